"""Command line interface.

Subcommands::

    minspan estimate  --input returns.csv [--variant mss|tan|gmv|tan-plus]
    minspan spanning  --input returns.csv --benchmark A,B --additional C
    minspan diagnose  --input returns.csv --out bands.csv
    minspan simulate  --standard-grid --reps 1000 --out table.csv

Exit codes: 0 success, 2 usage, 3 data, 4 numerical.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager

from . import __version__
from .bootstrap import DEFAULT_B, DEFAULT_SEED, default_block_len
from .errors import EstimationError, PanelError
from .kernels import BACKEND
from .panel import align_common_sample, load_panel
from .report import dumps, estimate_report, write_diagnose, write_draws
from .simulation import DESIGN_T, SimConfig, read_grid, run_experiment, standard_grid, write_results
from .variants import Variant, VariantSpec, spec_from_labels, variant_estimate

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4
MIN_BOOT = 50

_HINTS = {
    PanelError: "check the CSV layout, missing values and collinear columns",
    EstimationError: "drop redundant or collinear assets, or use more observations",
}

log = logging.getLogger("minspan")


def _level(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError(f"level must lie in (0, 1), got {x}")
    return x


def _boot(text):
    n = int(text)
    if n < MIN_BOOT:
        raise argparse.ArgumentTypeError(f"need at least {MIN_BOOT} bootstrap replications, got {n}")
    return n


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {n}")
    return n


def _block_len(text):
    if text == "auto":
        return None
    return _positive(text)


def _labels(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _common(p: argparse.ArgumentParser, with_input=True):
    if with_input:
        p.add_argument("--input", action="append", required=True, metavar="CSV",
                       help="return panel (repeat to join several on common periods)")
        p.add_argument("--date-column", default="date")
        p.add_argument("--drop-incomplete", action="store_true", help="skip rows with missing cells")
        p.add_argument("--units", choices=["decimal", "percent"], default="decimal",
                       help="percent inputs are divided by 100 on load")
    p.add_argument("--level", type=_level, default=0.05)
    p.add_argument("--block-len", type=_block_len, default=None, help="block length or 'auto'")
    p.add_argument("--boot", type=_boot, default=DEFAULT_B, help="bootstrap replications")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minspan", description="Minimum spanning set estimation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="bootstrap step-down MSS estimate (JSON report)")
    _common(p)
    p.add_argument("--variant", choices=[v.value for v in Variant if v is not Variant.NONREDUNDANT], default="mss")
    p.add_argument("--draws-out", default=None, help="also dump the B x d bootstrap draws as CSV")

    p = sub.add_parser("spanning", help="which additional assets expand the benchmark frontier")
    _common(p)
    p.add_argument("--benchmark", type=_labels, required=True)
    p.add_argument("--additional", type=_labels, required=True)

    p = sub.add_parser("diagnose", help="per-asset confidence band data (CSV)")
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo containment / exact-match frequencies (CSV)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--grid", help="JSON-lines file of experiment configurations")
    src.add_argument("--standard-grid", action="store_true", help="the four K+N=8 designs at T=120..300")
    src.add_argument("--design", nargs=3, type=int, metavar=("K", "N", "T"))
    p.add_argument("--T", type=_positive, nargs="+", default=None, dest="T_values",
                   help="sample sizes for --standard-grid")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--level", type=_level, default=None)
    p.add_argument("--block-len", type=_block_len, default=None)
    p.add_argument("--boot", type=_boot, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--threads", type=_positive, default=1, help="worker processes")
    p.add_argument("--out", default="-")
    return parser


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load(args):
    panels = []
    for path in args.input:
        try:
            with open(path, "rb") as fh:
                panels.append(load_panel(fh, args.date_column, args.drop_incomplete))
        except OSError as exc:
            raise PanelError(f"cannot read {path}: {exc.strerror}") from None
    panel = panels[0] if len(panels) == 1 else align_common_sample(panels)
    if args.units == "percent":
        panel = panel.scaled(0.01)
    return panel


def _config(args, panel) -> dict:
    return {
        "command": args.command,
        "input": list(args.input),
        "date_column": args.date_column,
        "drop_incomplete": args.drop_incomplete,
        "units": args.units,
        "level": args.level,
        "block_len": args.block_len or default_block_len(panel.T),
        "block_len_rule": "auto" if args.block_len is None else "fixed",
        "boot": args.boot,
        "seed": args.seed,
        "T": panel.T,
        "d": panel.d,
    }


def _run_estimate(args, spec=None, panel=None):
    panel = panel if panel is not None else _load(args)
    spec = spec or VariantSpec(Variant(args.variant))
    est = variant_estimate(panel, spec, args.level, args.block_len, args.boot, args.seed, args.threads)
    return panel, est


def cmd_estimate(args) -> int:
    panel, est = _run_estimate(args)
    cfg = _config(args, panel)
    cfg["variant"] = args.variant
    with _output(args.out) as fh:
        fh.write(dumps(estimate_report(est, panel, cfg)))
    if args.draws_out:
        with _output(args.draws_out) as fh:
            write_draws(est.draws, [panel.asset_labels[i] for i in est.draws.assets], fh)
    return 0


def cmd_spanning(args, parser) -> int:
    if not args.additional:
        parser.error("--additional needs at least one label")
    if not args.benchmark:
        parser.error("--benchmark needs at least one label")
    panel = _load(args)
    named = args.benchmark + args.additional
    missing = [a for a in panel.asset_labels if a not in named]
    unknown = [a for a in named if a not in panel.asset_labels]
    if missing or unknown or len(set(named)) != len(named):
        parser.error(
            "--benchmark and --additional must partition the panel columns "
            f"(missing: {missing}, unknown: {unknown})"
        )
    spec = spec_from_labels(panel, args.benchmark, args.additional)
    panel, est = _run_estimate(args, spec, panel)
    cfg = _config(args, panel)
    cfg.update(variant="nonredundant", benchmark=args.benchmark, additional=args.additional)
    report = estimate_report(est, panel, cfg)
    report["nonredundant_labels"] = report["selected_labels"]
    report["benchmark_spans_additional"] = not est.selected
    report["note"] = (
        "benchmark_spans_additional is an inference at the stated level, not a proof of spanning; "
        "the empty-set adjustment is not applied to this estimator"
    )
    with _output(args.out) as fh:
        fh.write(dumps(report))
    return 0


def cmd_diagnose(args) -> int:
    panel, est = _run_estimate(args, VariantSpec(Variant.MSS))
    with _output(args.out) as fh:
        write_diagnose(est, panel.T, fh)
    return 0


def cmd_simulate(args, parser) -> int:
    if args.reps is not None and args.reps < 1:
        parser.error("--reps must be at least 1")
    overrides = {
        "reps": args.reps, "level": args.level, "block_len": args.block_len, "B": args.boot,
        "seed": args.seed, "burn_in": args.burn_in,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        if args.grid:
            with open(args.grid, encoding="utf-8") as fh:
                configs = read_grid(fh, **overrides)
        elif args.standard_grid:
            configs = standard_grid(tuple(args.T_values or DESIGN_T), **overrides)
        else:
            K, N, T = args.design
            configs = [SimConfig(K=K, N=N, T=T, **overrides)]
    except (TypeError, ValueError) as exc:
        parser.error(f"invalid experiment configuration: {exc}")
    except OSError as exc:
        raise PanelError(f"cannot read grid {args.grid}: {exc.strerror}") from None
    results = []
    for cfg in configs:
        log.info("running %s T=%d reps=%d", cfg.panel_id, cfg.T, cfg.reps)
        results.append(run_experiment(cfg, workers=args.threads))
    with _output(args.out) as fh:
        write_results(results, fh)
    return 0


def _error(exc, code) -> int:
    body = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    asset = getattr(exc, "asset", None)
    if asset is not None:
        body["error"]["asset"] = asset
    for cls, hint in _HINTS.items():
        if isinstance(exc, cls):
            body["error"]["hint"] = hint
    sys.stderr.write(json.dumps(body) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "estimate":
            return cmd_estimate(args)
        if args.command == "spanning":
            return cmd_spanning(args, parser)
        if args.command == "diagnose":
            return cmd_diagnose(args)
        return cmd_simulate(args, parser)
    except PanelError as exc:
        return _error(exc, EXIT_DATA)
    except EstimationError as exc:
        return _error(exc, EXIT_NUMERICAL)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
