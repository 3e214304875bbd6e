"""JSON and CSV renderings of estimates, for the CLI and for replay."""

from __future__ import annotations

import csv
import json
from typing import IO, Any, Sequence

import numpy as np

from .bootstrap import BootstrapDraws
from .panel import ReturnPanel
from .stepdown import ConfidenceBand, MssEstimate, confidence_bands

DIAGNOSE_COLUMNS = [
    "rank", "label", "m_stat", "alpha_abs", "alpha_bound", "beta_abs", "beta_bound", "exceed_source", "in_mss",
]


def _labels(panel: ReturnPanel, idx) -> list[str]:
    return [panel.asset_labels[i] for i in idx]


def estimate_report(est: MssEstimate, panel: ReturnPanel, config: dict[str, Any] | None = None) -> dict:
    bands = {b.asset_index: b for b in confidence_bands(est, est.T or panel.T)}
    per_asset = []
    for s in est.stats:
        b = bands[s.asset_index]
        per_asset.append({
            "label": s.label,
            "alpha_hat": s.alpha_hat,
            "beta_sum_hat": s.beta_sum_hat,
            "s1": s.s1,
            "s2": s.s2,
            "m_stat": s.m_stat,
            "alpha_bound": b.alpha_bound,
            "beta_bound": b.beta_bound,
            "exceed_source": b.exceed_source,
            "in_mss": b.in_mss,
        })
    return {
        "variant": est.variant,
        "level": est.level,
        "block_len": est.block_len,
        "B": est.B,
        "seed": est.seed,
        "T": est.T or panel.T,
        "assets": list(panel.asset_labels),
        "selected_labels": _labels(panel, est.selected),
        "final_cv": est.final_cv,
        "adjusted": est.adjusted,
        "redraw_count": est.redraw_count,
        "trace": [
            {"iteration": t.iteration, "selected_labels": _labels(panel, t.selected), "cv": t.cv}
            for t in est.trace
        ],
        "per_asset": per_asset,
        "config": config or {},
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"


def bands_from_report(report: dict) -> list[bool]:
    """Recompute band membership from a dumped report's per-asset records."""
    out = []
    kind = {"tan": "alpha", "tan-plus": "alpha_signed", "gmv": "beta"}.get(report.get("variant"), "max")
    for a in report["per_asset"]:
        if kind == "alpha_signed":
            a_ex = a["alpha_hat"] > a["alpha_bound"]
        else:
            a_ex = abs(a["alpha_hat"]) > a["alpha_bound"]
        b_ex = abs(a["beta_sum_hat"] - 1.0) > a["beta_bound"]
        if kind in ("alpha", "alpha_signed"):
            b_ex = False
        elif kind == "beta":
            a_ex = False
        out.append(a_ex or b_ex)
    return out


def diagnose_rows(est: MssEstimate, T: int) -> list[dict]:
    """Per-asset band data ordered by descending statistic (ties by index)."""
    bands: dict[int, ConfidenceBand] = {b.asset_index: b for b in confidence_bands(est, T)}
    stats = sorted(est.stats, key=lambda s: (-s.m_stat, s.asset_index))
    rows = []
    for rank, s in enumerate(stats, start=1):
        b = bands[s.asset_index]
        rows.append({
            "rank": rank,
            "label": s.label,
            "m_stat": repr(float(s.m_stat)),
            "alpha_abs": repr(b.alpha_abs),
            "alpha_bound": repr(b.alpha_bound),
            "beta_abs": repr(b.beta_abs),
            "beta_bound": repr(b.beta_bound),
            "exceed_source": b.exceed_source,
            "in_mss": str(b.in_mss).lower(),
        })
    return rows


def write_diagnose(est: MssEstimate, T: int, stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=DIAGNOSE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(diagnose_rows(est, T))


def write_draws(draws: BootstrapDraws, labels: Sequence[str], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(labels)
    for row in np.asarray(draws.m_boot):
        writer.writerow([repr(float(x)) for x in row])
