"""Desk-scale invariant suite run by ``adiabatic-search verify``.

Each check returns ``(passed, detail)``.  ``inject`` applies a deliberate
defect (for mutation testing of the suite itself).
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable
from unittest import mock

import numpy as np

from . import bounds, dynamics, model as mdl, schedule as sch
from .dynamics import DecoherenceParams, integrate
from .model import CouplingSpec, SearchModel
from .quadrature import adaptive_quad

INJECTIONS = ("z-sign", "wrong-L")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _spectral_identity():
    rng = np.random.default_rng(12345)
    worst = 0.0
    for n, r in zip(rng.integers(2, 2 ** 20, 1000), rng.random(1000)):
        m = SearchModel(int(n))
        worst = max(worst, abs(mdl.coupling_z(m, r) * mdl.gap(m, r) ** 2 - math.sqrt(n - 1) / n))
    return worst <= 1e-12, f"max |Z gap^2 - sqrt(N-1)/N| = {worst:.3g}"


def _z_gap_product():
    worst = -np.inf
    for n in (2, 3, 10, 1000, 2 ** 16):
        m = SearchModel(n)
        r = np.linspace(0, 1, 501)
        v = mdl.coupling_z_array(m, r) * mdl.gap_array(m, r) - math.sqrt((n - 1) / n)
        worst = max(worst, float(v.max()))
    return worst <= 1e-12, f"max Z gap - sqrt((N-1)/N) = {worst:.3g}"


def _z_integral():
    vals = [mdl.z_integral(SearchModel(2 ** k)) for k in range(1, 21)]
    return max(vals) <= math.pi / 2 + 1e-9, f"max int Z = {max(vals):.12g}"


def _z_gap_derivative():
    vals = [mdl.z_abs_gap_derivative_integral(SearchModel(2 ** k)) for k in range(1, 21)]
    return max(vals) <= 2.0, f"max int Z|gap'| = {max(vals):.12g}"


def _symmetry():
    worst = 0.0
    r = np.linspace(0, 1, 1001)
    for n in (2, 7, 64, 4096):
        m = SearchModel(n)
        worst = max(worst, np.max(np.abs(mdl.gap_array(m, r) - mdl.gap_array(m, 1 - r))),
                    np.max(np.abs(mdl.coupling_z_array(m, r) - mdl.coupling_z_array(m, 1 - r))))
    return worst <= 1e-12, f"max asymmetry {worst:.3g}"


def _k_fluctuation():
    ks = [mdl.k_fluctuation(CouplingSpec(), SearchModel(2 ** k)) for k in range(3, 21)]
    dec = all(b < a for a, b in zip(ks, ks[1:]))
    return max(ks) <= 4.0 and dec, f"K(N=8)={ks[0]:.6g}, K(N=2^20)={ks[-1]:.6g}, decreasing={dec}"


def _eigenvectors():
    worst_orth, worst_gauge, worst_z = 0.0, np.inf, 0.0
    grid = np.linspace(0, 1, 401)
    for n in (2, 5, 64, 4096):
        m = SearchModel(n)
        prev = None
        for r in grid:
            p = mdl.eigenvectors(m, r)
            worst_orth = max(worst_orth, abs(p.e0 @ p.e1), abs(p.e0 @ p.e0 - 1), abs(p.e1 @ p.e1 - 1))
            if prev is not None:
                worst_gauge = min(worst_gauge, float(prev @ p.e0))
            prev = p.e0
        for r in (0.1, 0.37, 0.5, 0.81):
            z = mdl.coupling_z(m, r)
            worst_z = max(worst_z, abs(mdl.signed_coupling(m, r) - z) / z)
    ok = worst_orth <= 1e-12 and worst_gauge > 0 and worst_z <= 1e-5
    return ok, f"orth {worst_orth:.2g}, min overlap {worst_gauge:.4f}, signed-Z rel err {worst_z:.2g}"


def _y0_rotation():
    worst = 0.0
    for n in (2, 16, 1024):
        m = SearchModel(n)
        for r in np.linspace(0, 1, 201):
            worst = max(worst, abs(mdl.y0_closed(m, r) - math.cos(2 * mdl.z_integral(m, r))))
    return worst <= 1e-8, f"max |Y0 - cos(2 int Z)| = {worst:.3g}"


def _schedule_closed_forms():
    worst_s, worst_rt = 0.0, 0.0
    g = np.linspace(0, 1, 1001)
    for n in (2, 5, 64, 4096):
        s = sch.Schedule(SearchModel(n))
        L = s.normalization_L
        quad = np.array([adaptive_quad(lambda x: 1 / (L * mdl.gap_sq(s.model, x)), 0, r, points=[0.5])
                         for r in g[::10]])
        worst_s = max(worst_s, np.max(np.abs(quad - sch.s_of_r(s, g[::10]))))
        worst_rt = max(worst_rt, np.max(np.abs(sch.s_of_r(s, sch.r_of_s(s, g)) - g)))
    ok = worst_s <= 1e-10 and worst_rt <= 1e-10
    return ok, f"s(r) vs quadrature {worst_s:.3g}, round trip {worst_rt:.3g}"


def _schedule_velocity():
    worst = 0.0
    h = 1e-4
    for n in (2, 64, 1024):
        s = sch.Schedule(SearchModel(n))
        r = np.linspace(2 * h, 1 - 2 * h, 301)
        f = partial(sch.s_of_r, s)
        fd = (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h)
        worst = max(worst, float(np.max(np.abs(fd - sch.velocity(s, r)) / sch.velocity(s, r))))
    return worst <= 1e-8, f"max rel |ds/dr - v| = {worst:.3g}"


def _q_r_monotone():
    ok = True
    for n in (4, 256):
        s = sch.Schedule(SearchModel(n))
        r = np.linspace(0, 1, 513)
        for spec in (CouplingSpec(), CouplingSpec.power(2), CouplingSpec.power(1.5)):
            q = sch.q_accum(s, spec, r)
            ok &= bool(q[0] == 0 and np.all(np.diff(q) >= 0))
        rr = sch.r_phase(s, r)
        ok &= bool(abs(rr[0]) < 1e-15 and np.all(np.diff(rr) > 0))
        ok &= abs(sch.q_accum(s, CouplingSpec(), 1.0) - 1 / s.normalization_L) < 1e-15
    return ok, "Q, R start at 0 and are nondecreasing; Q(1) = 1/L for W = H"


def _zero_time_oracle():
    worst = 0.0
    for n in (2, 16, 1024):
        m = SearchModel(n)
        tr = integrate(m, sch.Schedule(m), DecoherenceParams.from_omega(0.5, 0.0), 1e-10)
        worst = max(worst, float(np.max(np.abs(tr.y - mdl.y0_array(m, tr.r)))))
    return worst <= 1e-6, f"max |Y - Y0| at T=0: {worst:.3g}"


def _purity_closed():
    m = SearchModel(64)
    tr = integrate(m, sch.Schedule(m), DecoherenceParams(1.0, 0.0, 40.0), 1e-10)
    dev = float(np.max(np.abs(tr.y ** 2 + 4 * (tr.c_re ** 2 + tr.c_im ** 2) - 1)))
    return dev <= 1e-8, f"max purity deviation {dev:.3g}"


def _protection():
    rng = np.random.default_rng(7)
    worst = np.inf
    for _ in range(8):
        n = int(2 ** rng.integers(1, 11))
        m = SearchModel(n)
        p = DecoherenceParams.from_omega(float(rng.random()), float(rng.random() * 4 * n))
        tr = integrate(m, sch.Schedule(m), p, 1e-10)
        worst = min(worst, float(np.min(tr.y - mdl.y0_array(m, tr.r))))
    return worst >= -1e-8, f"min (Y_T - Y0) = {worst:.3g}"


def _integral_equation():
    worst = 0.0
    for n, T, w in ((64, 50.0, 0.3), (16, 20.0, 0.7), (256, 100.0, 1.0)):
        m = SearchModel(n)
        s = sch.Schedule(m)
        p = DecoherenceParams.from_omega(w, T)
        tr = integrate(m, s, p, 1e-10, n_samples=2001)
        worst = max(worst, dynamics.integral_equation_eval(m, s, p, tr))
    return worst <= 1e-5, f"max |1 - Y(1) - 4 I(1)| = {worst:.3g}"


def _full_space():
    m = SearchModel(8)
    dev = dynamics.full_space_check(m, sch.Schedule(m), DecoherenceParams.from_omega(0.5, 20.0))
    return dev <= 1e-6, f"max rho00 deviation {dev:.3g}"


def _necessity_monotone():
    betas = np.linspace(0.1, 10, 50)
    ok = True
    for a in (0.0, 0.5, 1.0, 2.0, 4.0):
        vals = np.array([bounds.necessity_I(a, b) for b in betas])
        ok &= bool(np.all(np.diff(vals) >= -1e-10))
    fs = np.array([bounds.necessity_F_integral(a) for a in np.linspace(0, 32, 30)])
    ok &= bool(np.all(np.diff(fs) < 0))
    return ok, f"int F from {fs[0]:.4g} to {fs[-1]:.3g}"


def _bound_compliance():
    worst = np.inf
    for n in (16, 256):
        m = SearchModel(n)
        s = sch.Schedule(m)
        k = mdl.k_fluctuation(CouplingSpec(), m)
        for w in (0.0, 0.5, 0.9):
            p = DecoherenceParams.from_omega(w, 20.0 * n)
            sim = dynamics.success_probability(m, s, p, 1e-10)
            b = bounds.lower_bound_general(n, p.runtime, p.a_weight, p.b_weight, k)
            worst = min(worst, sim - b)
        p = DecoherenceParams(0.0, 1.0, 10.0 * n)
        sim = dynamics.success_probability(m, s, p, 1e-10)
        worst = min(worst, sim - bounds.lower_bound_wide_open(n, p.runtime, 1.0))
    return worst >= -1e-6, f"min slack {worst:.3g}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "model.z_gap_sq_identity": _spectral_identity,
    "model.z_gap_product_bound": _z_gap_product,
    "model.z_integral_le_pi_half": _z_integral,
    "model.z_abs_gap_derivative_le_2": _z_gap_derivative,
    "model.symmetry": _symmetry,
    "model.k_fluctuation_bounded_decreasing": _k_fluctuation,
    "model.eigenvector_gauge": _eigenvectors,
    "model.y0_rotation_identity": _y0_rotation,
    "schedule.closed_forms": _schedule_closed_forms,
    "schedule.velocity": _schedule_velocity,
    "schedule.q_r_monotone": _q_r_monotone,
    "dynamics.zero_time_oracle": _zero_time_oracle,
    "dynamics.purity_closed_case": _purity_closed,
    "dynamics.protection_ordering": _protection,
    "dynamics.integral_equation": _integral_equation,
    "dynamics.full_space_reduction": _full_space,
    "bounds.necessity_monotone": _necessity_monotone,
    "bounds.compliance": _bound_compliance,
}


@contextlib.contextmanager
def _injected(name: str | None):
    if name is None:
        yield
        return
    if name == "z-sign":
        # population equation sees the opposite gauge from the coherence equation
        orig = dynamics._rhs

        def flipped(rates, r, y, cr, ci):
            dy, dcr, dci = orig(rates, r, y, cr, ci)
            return -dy, dcr, dci

        with mock.patch.object(dynamics, "_rhs", flipped):
            yield
    elif name == "wrong-L":
        orig_norm = sch.normalization
        with mock.patch.object(sch, "normalization", lambda m: 1.01 * orig_norm(m)):
            yield
    else:
        raise ValueError(f"unknown injection {name!r}; choose from {INJECTIONS}")


def run_checks(names: list[str] | None = None, inject: str | None = None) -> list[CheckResult]:
    results = []
    with _injected(inject):
        for name in names or list(CHECKS):
            try:
                ok, detail = CHECKS[name]()
            except Exception as exc:  # a crashing check is a failing check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            results.append(CheckResult(name, bool(ok), detail))
    return results
