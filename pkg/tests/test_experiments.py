import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_search import experiments as exp
from adiabatic_search.experiments import InsufficientPointsError, SweepRecord
from adiabatic_search.model import CouplingSpec, SearchModel


def _synthetic(omega, slope, ns, c=3.0):
    return [SweepRecord(omega, n, c * n ** slope, 0.5, 5) for n in ns]


def test_two_items_start_on_target():
    rec = exp.runtime_for_success(SearchModel(2), CouplingSpec(), 0.0)
    assert rec.runtime_at_target == pytest.approx(0.0, abs=1e-12)
    assert rec.achieved_probability == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize("n,omega", [(16, 0.0), (64, 0.5), (32, 1.0), (8, 0.95)])
def test_record_hits_target(n, omega):
    rec = exp.runtime_for_success(SearchModel(n), CouplingSpec(), omega, target=0.5, p_tol=1e-4)
    assert abs(rec.achieved_probability - 0.5) <= 1e-4
    assert rec.flag == ""
    assert rec.runtime_at_target > 0


def test_doubling_ratios():
    t = {n: exp.runtime_for_success(SearchModel(n), CouplingSpec(), 0.0).runtime_at_target for n in (2048, 4096)}
    assert t[4096] / t[2048] == pytest.approx(math.sqrt(2), rel=0.06)
    t = {n: exp.runtime_for_success(SearchModel(n), CouplingSpec(), 1.0).runtime_at_target for n in (2048, 4096)}
    assert t[4096] / t[2048] == pytest.approx(2.0, rel=0.05)


def test_target_validation():
    with pytest.raises(ValueError):
        exp.runtime_for_success(SearchModel(8), CouplingSpec(), 0.0, target=1.0)
    with pytest.raises(ValueError):
        # unreachable from below: zero-time success is already 1/N = 0.25 > 0.1
        exp.runtime_for_success(SearchModel(4), CouplingSpec(), 0.0, target=0.1)


def test_bracket_failure(monkeypatch):
    monkeypatch.setattr(exp, "success_probability", lambda *a, **k: 0.1)
    with pytest.raises(exp.BracketError):
        exp.runtime_for_success(SearchModel(8), CouplingSpec(), 0.0)


def test_nonmonotone_fallback_flags_record(monkeypatch):
    # dip below the bracket value right at the first bisection midpoint
    def fake(model, sched, params, tol):
        T = params.runtime
        base = 1 - math.exp(-T / 5)
        return base - 0.6 * math.exp(-((T - 3.0) / 0.05) ** 2)

    monkeypatch.setattr(exp, "success_probability", fake)
    rec = exp.runtime_for_success(SearchModel(16), CouplingSpec(), 0.0, p_tol=1e-6)
    assert rec.flag == "nonmonotone"
    assert abs(rec.achieved_probability - 0.5) <= 1e-6


def test_sweep_order_and_parallel_equivalence():
    serial = exp.scaling_sweep([0.0, 0.5], [8, 16, 32], tol=1e-9)
    assert [(r.omega, r.n_items) for r in serial] == [(w, n) for w in (0.0, 0.5) for n in (8, 16, 32)]
    parallel = exp.scaling_sweep([0.0, 0.5], [8, 16, 32], tol=1e-9, workers=2)
    assert [r.csv() for r in serial] == [r.csv() for r in parallel]


def test_sweep_records_errors_in_row():
    recs = exp.scaling_sweep([0.0], [4, 8], target=0.2)
    assert recs[0].flag == "error:ValueError"
    assert not recs[0].ok
    # N=8 starts at 1/8 < 0.2 and is a normal cell
    assert recs[1].ok and abs(recs[1].achieved_probability - 0.2) <= 1e-4


def test_wide_open_slower_than_closed():
    recs = exp.scaling_sweep([0.0, 1.0], [8, 32, 128])
    for n in (8, 32, 128):
        t0 = next(r for r in recs if r.omega == 0.0 and r.n_items == n).runtime_at_target
        t1 = next(r for r in recs if r.omega == 1.0 and r.n_items == n).runtime_at_target
        assert t1 > t0
    assert exp.omega_monotone_violations(recs) == []


def test_monotone_violation_report():
    recs = [SweepRecord(0.0, 8, 5.0, 0.5, 1), SweepRecord(0.5, 8, 4.0, 0.5, 1)]
    assert exp.omega_monotone_violations(recs) == [(8, 0.0, 0.5)]


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 100.0))
def test_slope_fit_recovers_power_law(slope, c):
    fit = exp.slope_fit(_synthetic(0.3, slope, [2 ** k for k in range(3, 11)], c))
    assert fit.slope == pytest.approx(slope, rel=1e-9)
    assert fit.intercept == pytest.approx(math.log2(c), abs=1e-9)
    assert fit.tail_slope == pytest.approx(slope, rel=1e-9)
    assert fit.residual_rms < 1e-9


def test_slope_fit_default_window_is_upper_half():
    fit = exp.slope_fit(_synthetic(0.0, 0.5, [2 ** k for k in range(3, 14)]))
    assert fit.fit_window == (2 ** 8, 2 ** 13)
    assert fit.n_points == 6


def test_slope_fit_errors():
    with pytest.raises(InsufficientPointsError):
        exp.slope_fit(_synthetic(0.0, 0.5, [8, 16, 32]))
    with pytest.raises(InsufficientPointsError):
        exp.slope_fit(_synthetic(0.0, 0.5, [8, 16, 32, 64, 128]), window=(64, 128))
    with pytest.raises(ValueError):
        exp.slope_fit(_synthetic(0.0, 0.5, [8, 16]) + _synthetic(1.0, 1.0, [32, 64]))


def test_fit_all_skips_short_series():
    recs = _synthetic(0.0, 0.5, [8, 16, 32, 64, 128, 256, 512, 1024]) + _synthetic(1.0, 1.0, [8, 16])
    fits = exp.fit_all(recs)
    assert [f.omega for f in fits] == [0.0]


def test_csv_rows():
    r = SweepRecord(0.1, 64, 12.5, 0.5000123, 7, "")
    fields = r.csv().split(",")
    assert fields[0] == "0.10000000000000001" and fields[1:3] == ["64", "12.5"]
    assert float(fields[3]) == 0.5000123  # 17 digits round-trip exactly
    assert fields[4:] == ["7", ""]
    fit = exp.slope_fit(_synthetic(0.0, 0.5, [16, 32, 64, 128]), window=(16, 128))
    assert len(fit.csv().split(",")) == len(exp.SLOPE_CSV_HEADER.split(","))
    assert np.isfinite(fit.slope)
