import os
import subprocess
import sys
from pathlib import Path

import pytest

from minspan import kernels
from minspan.panel import write_panel

ROOT = Path(__file__).resolve().parents[1]


def _run(args, env_backend=None):
    env = dict(os.environ)
    env.pop("MINSPAN_BACKEND", None)
    if env_backend:
        env["MINSPAN_BACKEND"] = env_backend
    return subprocess.run([sys.executable, *args], capture_output=True, env=env, check=True)


def test_env_forces_fallback():
    out = _run(["-c", "from minspan import kernels; print(kernels.BACKEND)"], "python").stdout
    assert out.strip() == b"python"


def test_get_backend_rejects_unknown():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_fallback_output_identical(tmp_path, sim_panel):
    path = tmp_path / "p.csv"
    with open(path, "w", newline="") as fh:
        write_panel(sim_panel, fh)
    argv = ["-m", "minspan", "estimate", "--input", str(path), "--boot", "100"]
    assert _run(argv, "python").stdout == _run(argv).stdout


def test_benchmark_script_runs():
    out = _run([str(ROOT / "benchmarks" / "bench_kernels.py"), "--boot", "50", "--T", "60", "--d", "4", "--repeat", "1"])
    lines = out.stdout.decode().splitlines()
    assert len(lines) == 5
    assert all(line.split()[-1] == "True" for line in lines[2:])
