"""Run-time search at fixed success probability, omega sweeps and log-log slope fits."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import DecoherenceParams, IntegratorError, success_probability
from .model import CouplingSpec, SearchModel, y0_closed
from .schedule import Schedule

log = logging.getLogger(__name__)

DEFAULT_OMEGAS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0)
DEFAULT_NS = tuple(2 ** k for k in range(3, 14))
MAX_DOUBLINGS = 60
MAX_BISECTIONS = 200
SCAN_POINTS = 64

SWEEP_CSV_HEADER = "omega,N,T,achieved_p,iterations,flag"
SLOPE_CSV_HEADER = "omega,slope,intercept,residual_rms,n_min,n_max"


class BracketError(RuntimeError):
    pass


class InsufficientPointsError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRecord:
    omega: float
    n_items: int
    runtime_at_target: float
    achieved_probability: float
    bisection_iterations: int
    flag: str = ""

    @property
    def ok(self) -> bool:
        return not self.flag.startswith("error")

    def csv(self) -> str:
        return (f"{self.omega:.17g},{self.n_items},{self.runtime_at_target:.17g},"
                f"{self.achieved_probability:.17g},{self.bisection_iterations},{self.flag}")


@dataclass(frozen=True)
class SlopeFit:
    omega: float
    slope: float
    intercept: float
    fit_window: tuple[int, int]
    residual_rms: float
    tail_slope: float
    n_points: int

    def csv(self) -> str:
        return (f"{self.omega:.17g},{self.slope:.17g},{self.intercept:.17g},"
                f"{self.residual_rms:.17g},{self.fit_window[0]},{self.fit_window[1]}")


def runtime_for_success(model: SearchModel, spec: CouplingSpec, omega: float, target: float = 0.5,
                        p_tol: float = 1e-4, tol: float = 1e-9) -> SweepRecord:
    """Smallest-bracket run time at which ``rho00(1)`` hits ``target`` within ``p_tol``.

    Doubling from ``sqrt(N)/4`` brackets the crossing, then bisection narrows it.
    Each bisection midpoint is checked to lie between its bracket values; if not,
    a log-spaced scan locates the first crossing and the record is flagged.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    sched = Schedule(model)
    base = DecoherenceParams.from_omega(omega, 0.0, spec)
    n = model.n_items

    def prob(T):
        return success_probability(model, sched, base.with_runtime(T), tol)

    p0 = prob(0.0)
    if abs(p0 - target) <= p_tol:
        return SweepRecord(omega, n, 0.0, p0, 0)
    if p0 > target:
        start = 0.5 * (1.0 + y0_closed(model, 1.0))
        raise ValueError(f"target {target} below the zero-time success probability {start:.6g}")

    lo, p_lo = 0.0, p0
    T = math.sqrt(n) / 4.0
    for _ in range(MAX_DOUBLINGS):
        p = prob(T)
        if abs(p - target) <= p_tol:
            return SweepRecord(omega, n, T, p, 0)
        if p > target:
            hi, p_hi = T, p
            break
        lo, p_lo = T, p
        T *= 2.0
    else:
        raise BracketError(f"no bracket for target {target} after {MAX_DOUBLINGS} doublings (N={n}, omega={omega})")

    flag = ""
    for it in range(1, MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + hi)
        p_mid = prob(mid)
        if abs(p_mid - target) <= p_tol:
            return SweepRecord(omega, n, mid, p_mid, it, flag)
        if not (p_lo <= p_mid <= p_hi):
            flag = "nonmonotone"
            lo, p_lo, hi, p_hi = _scan_first_crossing(prob, lo, hi, p_lo, p_hi, target)
            continue
        if p_mid < target:
            lo, p_lo = mid, p_mid
        else:
            hi, p_hi = mid, p_mid
    raise BracketError(f"bisection did not reach p_tol={p_tol} (N={n}, omega={omega})")


def _scan_first_crossing(prob, lo, hi, p_lo, p_hi, target):
    start = lo if lo > 0.0 else hi / 2 ** 10
    ts = np.geomspace(start, hi, SCAN_POINTS)
    prev_t, prev_p = lo, p_lo
    for t in ts:
        p = prob(float(t))
        if p >= target:
            return prev_t, prev_p, float(t), p
        prev_t, prev_p = float(t), p
    return lo, p_lo, hi, p_hi


def _cell(args) -> SweepRecord:
    omega, n, spec, target, p_tol, tol = args
    try:
        return runtime_for_success(SearchModel(n), spec, omega, target, p_tol, tol)
    except (BracketError, IntegratorError, ValueError) as exc:
        log.warning("sweep cell omega=%s N=%s failed: %s", omega, n, exc)
        return SweepRecord(omega, n, float("nan"), float("nan"), 0, f"error:{type(exc).__name__}")


def scaling_sweep(omega_list: Sequence[float], n_list: Sequence[int], spec: CouplingSpec | None = None,
                  target: float = 0.5, p_tol: float = 1e-4, tol: float = 1e-9,
                  workers: int = 1) -> list[SweepRecord]:
    """Every (omega, N) cell, omega outer and N inner, independent of completion order."""
    spec = spec or CouplingSpec()
    cells = [(float(w), int(n), spec, target, p_tol, tol) for w in omega_list for n in n_list]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell, cells))
    return [_cell(c) for c in cells]


def slope_fit(records: Iterable[SweepRecord], window: tuple[int, int] | None = None) -> SlopeFit:
    """Least-squares slope of log2 T against log2 N.

    The default window is the upper half of the available N values. The tail
    slope between the two largest N is reported alongside.
    """
    recs = sorted((r for r in records if r.ok and r.runtime_at_target > 0.0), key=lambda r: r.n_items)
    if not recs:
        raise InsufficientPointsError("no usable records")
    omegas = {r.omega for r in recs}
    if len(omegas) != 1:
        raise ValueError(f"records mix several omega values: {sorted(omegas)}")
    if window is None:
        ns = [r.n_items for r in recs]
        window = (ns[(len(ns) - 1) // 2], ns[-1])
    sel = [r for r in recs if window[0] <= r.n_items <= window[1]]
    if len(sel) < 4:
        raise InsufficientPointsError(f"need >= 4 points in window {window}, have {len(sel)}")
    x = np.log2([r.n_items for r in sel])
    y = np.log2([r.runtime_at_target for r in sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    tail = (y[-1] - y[-2]) / (x[-1] - x[-2])
    return SlopeFit(sel[0].omega, float(slope), float(intercept), (sel[0].n_items, sel[-1].n_items),
                    float(np.sqrt(np.mean(resid ** 2))), float(tail), len(sel))


def fit_all(records: Sequence[SweepRecord], window: tuple[int, int] | None = None) -> list[SlopeFit]:
    out = []
    for w in dict.fromkeys(r.omega for r in records):
        try:
            out.append(slope_fit([r for r in records if r.omega == w], window))
        except InsufficientPointsError as exc:
            log.warning("no slope for omega=%s: %s", w, exc)
    return out


def omega_monotone_violations(records: Sequence[SweepRecord]) -> list[tuple[int, float, float]]:
    """(N, omega_lo, omega_hi) pairs where the run time decreases as omega grows."""
    by_n: dict[int, list[SweepRecord]] = {}
    for r in records:
        if r.ok:
            by_n.setdefault(r.n_items, []).append(r)
    bad = []
    for n, rs in sorted(by_n.items()):
        rs = sorted(rs, key=lambda r: r.omega)
        for a, b in zip(rs, rs[1:]):
            if b.runtime_at_target < a.runtime_at_target:
                bad.append((n, a.omega, b.omega))
    return bad


__all__ = [
    "DEFAULT_NS",
    "DEFAULT_OMEGAS",
    "SLOPE_CSV_HEADER",
    "SWEEP_CSV_HEADER",
    "BracketError",
    "InsufficientPointsError",
    "SlopeFit",
    "SweepRecord",
    "fit_all",
    "omega_monotone_violations",
    "runtime_for_success",
    "scaling_sweep",
    "slope_fit",
]
