import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minspan.errors import PanelError
from minspan.panel import (
    ReturnPanel,
    align_common_sample,
    load_panel,
    panel_to_csv,
    require_nonsingular,
    validate_panel,
)

from conftest import make_panel

CSV5 = """date,X,Y,Z
2001-01,0.01,0.02,-0.01
2001-02,0.00,0.03,0.02
2001-03,-0.02,0.01,0.00
2001-04,0.04,-0.01,0.01
2001-05,0.01,0.00,0.03
"""


def test_load_basic():
    p = load_panel(CSV5.encode())
    assert (p.T, p.d) == (5, 3)
    assert p.asset_labels == ("X", "Y", "Z")
    assert p.period_labels[0] == "2001-01"
    np.testing.assert_array_equal(p.values[1], [0.0, 0.03, 0.02])


def test_four_rows_three_assets_is_underdetermined():
    # T must exceed d + 1 for the exclusion regressions
    text = "\n".join(CSV5.splitlines()[:5]) + "\n"
    with pytest.raises(PanelError, match="T > d"):
        load_panel(text)


def test_blank_cell():
    text = CSV5.replace("0.00,0.03,0.02", "0.00,,0.02")
    with pytest.raises(PanelError):
        load_panel(text)
    text = text + "2001-06,0.02,0.01,0.01\n"
    p = load_panel(text, drop_incomplete_rows=True)
    assert p.T == 5
    assert "2001-02" not in p.period_labels


def test_non_numeric_cell():
    with pytest.raises(PanelError):
        load_panel(CSV5.replace("-0.02", "abc"))


def test_duplicate_labels():
    with pytest.raises(PanelError, match="duplicate"):
        load_panel(CSV5.replace("date,X,Y,Z", "date,X,X,Z"))


def test_too_few_assets():
    with pytest.raises(PanelError):
        load_panel("date,X\n1,0.1\n2,0.2\n3,0.3\n4,0.1\n")


def test_unordered_periods():
    text = CSV5.replace("2001-03", "2000-12")
    with pytest.raises(PanelError):
        load_panel(text)


def test_custom_date_column_and_stream():
    p = load_panel(io.StringIO(CSV5.replace("date", "month")), date_column="month")
    assert p.T == 5


def test_values_read_only():
    p = load_panel(CSV5)
    with pytest.raises(ValueError):
        p.values[0, 0] = 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(0, 5))
def test_round_trip(seed, d, extra):
    rng = np.random.default_rng(seed)
    T = d + 2 + extra
    p = make_panel(rng.standard_normal((T, d)) * 10.0 ** rng.integers(-6, 3))
    q = load_panel(panel_to_csv(p))
    np.testing.assert_array_equal(q.values, p.values)
    assert q.asset_labels == p.asset_labels
    assert q.period_labels == p.period_labels


def _pair(lo, hi, labels, rng):
    periods = tuple(f"{t:03d}" for t in range(lo, hi + 1))
    return ReturnPanel(rng.standard_normal((len(periods), 2)), labels, periods)


def test_align_intersection(rng):
    a = _pair(1, 10, ("a1", "a2"), rng)
    b = _pair(5, 15, ("b1", "b2"), rng)
    j = align_common_sample([a, b])
    assert j.period_labels == tuple(f"{t:03d}" for t in range(5, 11))
    assert j.asset_labels == ("a1", "a2", "b1", "b2")
    np.testing.assert_array_equal(j.values[:, :2], a.values[4:10])
    np.testing.assert_array_equal(j.values[:, 2:], b.values[:6])


def test_align_identity(rng):
    a = _pair(1, 10, ("a1", "a2"), rng)
    j = align_common_sample([a])
    np.testing.assert_array_equal(j.values, a.values)
    assert j.period_labels == a.period_labels


def test_align_disjoint(rng):
    with pytest.raises(PanelError):
        align_common_sample([_pair(1, 10, ("a", "b"), rng), _pair(20, 30, ("c", "d"), rng)])


def test_align_duplicate_labels(rng):
    with pytest.raises(PanelError):
        align_common_sample([_pair(1, 10, ("a", "b"), rng), _pair(1, 10, ("b", "c"), rng)])


def test_align_associative(rng):
    a = _pair(1, 40, ("a1", "a2"), rng)
    b = _pair(5, 30, ("b1", "b2"), rng)
    c = _pair(10, 50, ("c1", "c2"), rng)
    left = align_common_sample([align_common_sample([a, b]), c])
    right = align_common_sample([a, align_common_sample([b, c])])
    flat = align_common_sample([a, b, c])
    common = set(a.period_labels) & set(b.period_labels) & set(c.period_labels)
    for j in (left, right):
        assert j.period_labels == flat.period_labels == tuple(sorted(common))
        np.testing.assert_array_equal(j.values, flat.values)


def test_duplicated_column_singular(rng):
    x = rng.standard_normal((50, 2))
    p = make_panel(np.column_stack([x, x[:, 0]]))
    diag = validate_panel(p)
    assert abs(diag.min_cov_eigenvalue) < 1e-12
    assert diag.is_singular()
    with pytest.raises(PanelError):
        require_nonsingular(p)


def test_constant_column(rng):
    p = make_panel(np.column_stack([rng.standard_normal((30, 2)), np.full(30, 0.5)]))
    assert abs(validate_panel(p).min_cov_eigenvalue) < 1e-12


def test_two_pass_covariance(rng):
    x = rng.standard_normal((200, 2))
    p = make_panel(x)
    T = x.shape[0]
    mean = [sum(x[:, j]) / T for j in range(2)]
    cov = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            cov[a, b] = sum((x[t, a] - mean[a]) * (x[t, b] - mean[b]) for t in range(T)) / T
    diag = validate_panel(p)
    np.testing.assert_allclose(diag.sample_mean, mean, atol=1e-12)
    np.testing.assert_allclose(diag.sample_cov, cov, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_covariance_psd(seed, d):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((d + 2, d)) @ rng.standard_normal((d, d))
    diag = validate_panel(make_panel(x))
    np.testing.assert_array_equal(diag.sample_cov, diag.sample_cov.T)
    assert diag.min_cov_eigenvalue >= -1e-10
    assert np.all(np.linalg.eigvalsh(diag.sample_cov) >= diag.min_cov_eigenvalue - 1e-12)


def test_scaled(rng):
    p = make_panel(rng.standard_normal((10, 3)))
    np.testing.assert_allclose(p.scaled(0.01).values, p.values * 0.01)
