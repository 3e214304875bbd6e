"""Return panels: CSV ingestion, sample alignment and basic diagnostics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import PanelError

#: Relative eigenvalue floor below which a sample covariance is treated as singular.
SINGULAR_RTOL = 1e-10

_MISSING = {"", "na", "nan", "null", "none", "."}


@dataclass(frozen=True)
class ReturnPanel:
    """A T x d matrix of period returns with asset and period labels.

    The values array is made read-only on construction, so panels can be
    shared freely between threads.
    """

    values: np.ndarray
    asset_labels: tuple[str, ...]
    period_labels: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise PanelError(f"returns must be a 2-d array, got shape {values.shape}")
        assets = tuple(str(a) for a in self.asset_labels)
        periods = tuple(str(p) for p in self.period_labels)
        T, d = values.shape
        if len(assets) != d:
            raise PanelError(f"{len(assets)} asset labels for {d} columns")
        if len(periods) != T:
            raise PanelError(f"{len(periods)} period labels for {T} rows")
        if len(set(assets)) != d:
            raise PanelError(f"duplicate asset labels: {_duplicates(assets)}")
        if d < 2:
            raise PanelError(f"need at least 2 assets, got {d}")
        if T <= d + 1:
            raise PanelError(f"need T > d + 1 observations, got T={T}, d={d}")
        if not np.all(np.isfinite(values)):
            raise PanelError("returns contain missing or non-finite entries")
        for a, b in zip(periods, periods[1:]):
            if not a < b:
                raise PanelError(f"period labels not strictly increasing at {a!r} -> {b!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "asset_labels", assets)
        object.__setattr__(self, "period_labels", periods)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, label: str) -> int:
        try:
            return self.asset_labels.index(label)
        except ValueError:
            raise PanelError(f"unknown asset label {label!r}") from None

    def select(self, labels: Sequence[str]) -> "ReturnPanel":
        """Sub-panel with the given columns, in the given order."""
        idx = [self.column(a) for a in labels]
        return ReturnPanel(self.values[:, idx], tuple(labels), self.period_labels)

    def scaled(self, factor: float) -> "ReturnPanel":
        return ReturnPanel(self.values * factor, self.asset_labels, self.period_labels)


@dataclass(frozen=True)
class PanelDiagnostics:
    sample_mean: np.ndarray
    sample_cov: np.ndarray
    min_cov_eigenvalue: float
    condition_number: float

    @property
    def max_cov_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.sample_cov)[-1])

    def is_singular(self, rtol: float = SINGULAR_RTOL) -> bool:
        top = self.max_cov_eigenvalue
        return top <= 0 or self.min_cov_eigenvalue < rtol * top


def _duplicates(labels: Iterable[str]) -> list[str]:
    seen, dup = set(), []
    for a in labels:
        if a in seen and a not in dup:
            dup.append(a)
        seen.add(a)
    return dup


def _parse_cell(text: str) -> float | None:
    s = text.strip()
    if s.lower() in _MISSING:
        return None
    try:
        x = float(s)
    except ValueError:
        return None
    return x if np.isfinite(x) else None


def load_panel(
    source: IO[bytes] | IO[str] | bytes | str,
    date_column: str = "date",
    drop_incomplete_rows: bool = False,
) -> ReturnPanel:
    """Read a return panel from CSV.

    ``source`` may be a binary or text stream, raw bytes, or a string of
    CSV text. The file needs a header row with one date column named
    ``date_column``; every other column is an asset, kept in file order.
    Rows containing blank or non-numeric cells either raise
    :class:`PanelError` or, with ``drop_incomplete_rows``, are skipped.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8-sig")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise PanelError("empty CSV input")
    header = [h.strip() for h in rows[0]]
    if date_column not in header:
        raise PanelError(f"date column {date_column!r} not found in header {header}")
    if header.count(date_column) > 1:
        raise PanelError(f"date column {date_column!r} appears more than once")
    date_pos = header.index(date_column)
    assets = [h for j, h in enumerate(header) if j != date_pos]
    dup = _duplicates(assets)
    if dup:
        raise PanelError(f"duplicate asset labels: {dup}")
    if len(assets) < 2:
        raise PanelError(f"need at least 2 asset columns, got {len(assets)}")

    periods, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise PanelError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        cells = [c for j, c in enumerate(row) if j != date_pos]
        parsed = [_parse_cell(c) for c in cells]
        if any(x is None for x in parsed):
            if drop_incomplete_rows:
                continue
            bad = [assets[j] for j, x in enumerate(parsed) if x is None]
            raise PanelError(f"line {lineno}: missing or non-numeric value in column(s) {bad}")
        periods.append(row[date_pos].strip())
        values.append(parsed)
    if len(values) <= len(assets) + 1:
        raise PanelError(
            f"need T > d + 1 complete rows, got T={len(values)}, d={len(assets)}"
        )
    return ReturnPanel(np.array(values, dtype=float), tuple(assets), tuple(periods))


def write_panel(panel: ReturnPanel, stream: IO[str], date_column: str = "date") -> None:
    """Write ``panel`` in the layout :func:`load_panel` reads.

    Floats are written with ``repr`` so a reload is exact.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([date_column, *panel.asset_labels])
    for period, row in zip(panel.period_labels, panel.values):
        writer.writerow([period, *(repr(float(x)) for x in row)])


def panel_to_csv(panel: ReturnPanel, date_column: str = "date") -> str:
    buf = io.StringIO()
    write_panel(panel, buf, date_column)
    return buf.getvalue()


def align_common_sample(panels: Sequence[ReturnPanel]) -> ReturnPanel:
    """Join panels column-wise on the periods they all share."""
    if not panels:
        raise PanelError("no panels to align")
    labels = [a for p in panels for a in p.asset_labels]
    dup = _duplicates(labels)
    if dup:
        raise PanelError(f"duplicate asset labels across panels: {dup}")
    common = set(panels[0].period_labels)
    for p in panels[1:]:
        common &= set(p.period_labels)
    if not common:
        raise PanelError("panels share no common periods")
    periods = sorted(common)
    blocks = []
    for p in panels:
        pos = {lab: t for t, lab in enumerate(p.period_labels)}
        blocks.append(p.values[[pos[lab] for lab in periods]])
    return ReturnPanel(np.hstack(blocks), tuple(labels), tuple(periods))


def validate_panel(panel: ReturnPanel) -> PanelDiagnostics:
    """Sample moments (divisor T) and covariance eigenvalue diagnostics."""
    x = panel.values
    mean = x.mean(axis=0)
    dev = x - mean
    cov = dev.T @ dev / panel.T
    cov = (cov + cov.T) / 2
    eig = np.linalg.eigvalsh(cov)
    lo, hi = float(eig[0]), float(eig[-1])
    cond = hi / lo if lo > 0 else np.inf
    return PanelDiagnostics(mean, cov, lo, float(cond))


def require_nonsingular(panel: ReturnPanel, rtol: float = SINGULAR_RTOL) -> PanelDiagnostics:
    diag = validate_panel(panel)
    if diag.is_singular(rtol):
        raise PanelError(
            "sample covariance is numerically singular "
            f"(min eigenvalue {diag.min_cov_eigenvalue:.3g}); "
            "drop collinear or constant columns"
        )
    return diag
