"""Acceptance criteria 1-12 at their stated tolerances.

Each test records one ``PASS``/``FAIL`` line (shown in the pytest terminal
summary) before asserting. Running this file directly prints the same lines.
"""
import math

import numpy as np
import pytest

from adiabatic_search import bounds as bnd
from adiabatic_search import cli
from adiabatic_search import dynamics as dyn
from adiabatic_search import model as mdl
from adiabatic_search.dynamics import DecoherenceParams
from adiabatic_search.experiments import scaling_sweep, slope_fit
from adiabatic_search.model import CouplingSpec, SearchModel
from adiabatic_search.schedule import Schedule

WIDE_NS = [2 ** k for k in range(8, 14)]
MID_NS = [2 ** k for k in range(10, 14)]


def _report(lines, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    lines.append(line)
    print(line)
    return ok


def _slope(omega, ns, spec=None):
    recs = scaling_sweep([omega], ns, spec or CouplingSpec())
    assert all(r.ok for r in recs), [r for r in recs if not r.ok]
    return slope_fit(recs, (ns[0], ns[-1])).slope


@pytest.fixture(scope="module")
def wide_open_slope_mid():
    return _slope(1.0, MID_NS)


def test_criterion_01_zero_time_oracle(acceptance_report):
    worst = 0.0
    for n in (2, 16, 1024):
        m = SearchModel(n)
        for omega in (0.0, 0.5, 1.0):
            tr = dyn.integrate(m, Schedule(m), DecoherenceParams.from_omega(omega, 0.0), 1e-10, n_samples=201)
            worst = max(worst, float(np.max(np.abs(tr.y - mdl.y0_array(m, tr.r)))))
    ok = worst <= 1e-6
    _report(acceptance_report, 1, ok, f"zero-time max |Y - Y0| = {worst:.3g} (<= 1e-6)")
    assert ok


def test_criterion_02_closed_slope(acceptance_report):
    s = _slope(0.0, WIDE_NS)
    ok = 0.45 <= s <= 0.55
    _report(acceptance_report, 2, ok, f"omega=0 slope over N=2^8..2^13 = {s:.4f} (in [0.45, 0.55])")
    assert ok


def test_criterion_03_wide_open_slope(acceptance_report):
    s = _slope(1.0, WIDE_NS)
    ok = 0.90 <= s <= 1.05
    _report(acceptance_report, 3, ok, f"omega=1 slope over N=2^8..2^13 = {s:.4f} (in [0.90, 1.05])")
    assert ok


def test_criterion_04_intermediate_robustness(acceptance_report, wide_open_slope_mid):
    slopes = {w: _slope(w, MID_NS) for w in (0.3, 0.6, 0.9)}
    ok = all(0.43 <= s <= 0.62 and s < wide_open_slope_mid for s in slopes.values())
    detail = ", ".join(f"omega={w}: {s:.4f}" for w, s in slopes.items())
    _report(acceptance_report, 4, ok,
            f"{detail} (in [0.43, 0.62], below omega=1 slope {wide_open_slope_mid:.4f} on N=2^10..2^13)")
    assert ok


def test_criterion_05_power_coupling_slope(acceptance_report):
    s = _slope(1.0, [2 ** k for k in range(4, 9)], CouplingSpec.power(2.0))
    ok = 1.8 <= s <= 2.2
    _report(acceptance_report, 5, ok, f"sigma=2 wide-open slope over N=2^4..2^8 = {s:.4f} (in [1.8, 2.2])")
    assert ok


def test_criterion_06_bound_compliance(acceptance_report):
    worst_general = math.inf
    for n in (8, 32, 128, 512, 2048):
        m = SearchModel(n)
        s = Schedule(m)
        k = mdl.k_fluctuation(CouplingSpec(), m)
        for factor in (1.0, 4.0, 16.0, 64.0, 256.0):
            T = factor * n
            for omega in (0.0, 0.5, 0.9):
                p = DecoherenceParams.from_omega(omega, T)
                sim = dyn.success_probability(m, s, p, 1e-10)
                worst_general = min(worst_general, sim - bnd.lower_bound_general(n, T, p.a_weight, p.b_weight, k))

    worst_wide = worst_i0 = math.inf
    for sigma in (1.0, 2.0):
        spec = CouplingSpec.power(sigma)
        for n in (4, 16, 64):
            m = SearchModel(n)
            s = Schedule(m)
            for factor in (1.0, 10.0, 50.0):
                T = factor * n ** sigma
                p = DecoherenceParams(0.0, 1.0, T, spec)
                y1 = dyn.integrate(m, s, p, 1e-10, n_samples=2).y[-1]
                sim = 0.5 * (1 + y1)
                worst_wide = min(worst_wide, sim - bnd.lower_bound_wide_open(n, T, sigma))
                worst_i0 = min(worst_i0, (1 - y1) - bnd.necessity_I0(m, s, spec, T).i0)
    ok = min(worst_general, worst_wide, worst_i0) >= -1e-6
    _report(acceptance_report, 6, ok,
            f"min slack: general {worst_general:.3g}, wide-open {worst_wide:.3g}, 1-Y_T(1)-I0 {worst_i0:.3g} (>= -1e-6)")
    assert ok


def test_criterion_07_protection_ordering(acceptance_report):
    rng = np.random.default_rng(20240607)
    worst = math.inf
    for _ in range(20):
        n = int(2 ** rng.integers(1, 13))
        omega = float(rng.uniform(0, 1))
        T = float(np.exp(rng.uniform(math.log(0.1), math.log(5.0 * n))))
        sigma = float(rng.choice([1.0, 1.5, 2.0]))
        m = SearchModel(n)
        tr = dyn.integrate(m, Schedule(m), DecoherenceParams.from_omega(omega, T, CouplingSpec.power(sigma)), 1e-10)
        worst = min(worst, float(np.min(tr.y - mdl.y0_array(m, tr.r))))
    ok = worst >= -1e-8
    _report(acceptance_report, 7, ok, f"min (Y_T - Y0) over 20 random runs = {worst:.3g} (>= -1e-8)")
    assert ok


def test_criterion_08_integral_equation(acceptance_report):
    worst = 0.0
    for n, T, omega in ((64, 50.0, 0.3), (16, 20.0, 0.8), (256, 300.0, 1.0)):
        m = SearchModel(n)
        s = Schedule(m)
        p = DecoherenceParams.from_omega(omega, T)
        tr = dyn.integrate(m, s, p, 1e-11, n_samples=2001)
        worst = max(worst, dyn.integral_equation_eval(m, s, p, tr))
    ok = worst <= 1e-5
    _report(acceptance_report, 8, ok, f"max |1 - Y(1) - 4 I(1)| = {worst:.3g} (<= 1e-5)")
    assert ok


def test_criterion_09_spectral_identities(acceptance_report):
    rng = np.random.default_rng(7)
    worst_id = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 2 ** 20 + 1))
        r = float(rng.uniform(0, 1))
        m = SearchModel(n)
        worst_id = max(worst_id, abs(mdl.coupling_z(m, r) * mdl.gap_sq(m, r) - math.sqrt(n - 1) / n))
    n_list = [2 ** k for k in range(1, 21)] + [int(x) for x in rng.integers(2, 2 ** 20, 30)]
    max_int = max(mdl.z_integral(SearchModel(n)) for n in n_list)
    max_dgap = max(mdl.z_abs_gap_derivative_integral(SearchModel(n)) for n in n_list)
    ok = worst_id <= 1e-12 and max_int <= math.pi / 2 + 1e-9 and max_dgap <= 2.0
    _report(acceptance_report, 9, ok,
            f"|Z gap^2 - sqrt(N-1)/N| <= {worst_id:.2g}, max int Z = {max_int:.10f}, max int Z|gap'| = {max_dgap:.6f}")
    assert ok


def test_criterion_10_necessity_monotonicity(acceptance_report):
    betas = np.linspace(0.1, 10.0, 50)
    worst_step = math.inf
    for alpha in (0.0, 0.5, 2.0, 8.0, 32.0):
        vals = np.array([bnd.necessity_I(alpha, b) for b in betas])
        worst_step = min(worst_step, float(np.min(np.diff(vals))))
    fs = np.array([bnd.necessity_F_integral(a) for a in np.linspace(0.0, 32.0, 30)])
    ok = worst_step >= 0.0 and bool(np.all(np.diff(fs) < 0))
    _report(acceptance_report, 10, ok,
            f"min I step in beta = {worst_step:.3g} (>= 0); int F strictly decreasing from {fs[0]:.4f} to {fs[-1]:.3g}")
    assert ok


def test_criterion_11_full_space(acceptance_report):
    m = SearchModel(8)
    s = Schedule(m)
    worst = max(dyn.full_space_check(m, s, DecoherenceParams.from_omega(w, T))
                for w, T in ((0.0, 20.0), (0.5, 20.0), (1.0, 40.0)))
    ok = worst <= 1e-6
    _report(acceptance_report, 11, ok, f"N=8 full-space vs eigenframe max |d rho00| = {worst:.3g} (<= 1e-6)")
    assert ok


def test_criterion_12_determinism(acceptance_report, tmp_path):
    argv = ["sweep", "--omegas", "0,0.5,1", "--ns", "8,16,32,64", "--window", "8,64",
            "--out", str(tmp_path / "s.csv"), "--slope-out", str(tmp_path / "l.csv")]
    outputs = []
    for _ in range(2):
        assert cli.main(argv) == 0
        outputs.append(((tmp_path / "s.csv").read_bytes(), (tmp_path / "l.csv").read_bytes()))
    ok = outputs[0] == outputs[1]
    _report(acceptance_report, 12, ok, "repeated sweep runs produce byte-identical CSV")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
