"""Local adiabatic reparametrization and the accumulated dephasing/phase integrals.

The local schedule spends time in proportion to ``1/gap**2``:
``s(r) = (1/L) int_0^r gap^-2``.  ``Q`` is the accumulated dephasing weight
``(1/L) int Gamma^2/gap^2`` and ``R`` the accumulated dynamical phase
``(1/L) int 1/gap``, both as functions of the schedule parameter ``r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .model import CouplingSpec, DomainError, SearchModel, _check_r, gamma_array, gap_sq
from .quadrature import gauss_legendre

_TABLE_NODES = 4097
_LOCAL_ORDER = 12


def normalization(model: SearchModel) -> float:
    """Total schedule length ``L = int_0^1 gap^-2 = N/sqrt(N-1) * atan(sqrt(N-1))``."""
    s = model.sqrt_nm1
    return model.n_items / s * math.atan(s)


@dataclass(frozen=True)
class Schedule:
    model: SearchModel
    normalization_L: float = field(default=float("nan"))
    local: bool = True

    def __post_init__(self):
        if math.isnan(self.normalization_L):
            object.__setattr__(self, "normalization_L", normalization(self.model))
        if not self.normalization_L > 0.0:
            raise ValueError("schedule normalization must be positive")

    @property
    def theta0(self) -> float:
        return math.atan(self.model.sqrt_nm1)


def s_of_r(sched: Schedule, r):
    """Physical time fraction ``s`` at which the schedule reaches ``r``."""
    if np.ndim(r) == 0:
        _check_r(r)
    if not sched.local:
        return r
    m = sched.model
    sq = m.sqrt_nm1
    pref = m.n_items / (2.0 * sched.normalization_L * sq)
    out = pref * (np.arctan(sq * (2.0 * np.asarray(r, dtype=float) - 1.0)) + math.atan(sq))
    # rounding can overshoot 1 by an ulp at r = 1
    return np.clip(out, 0.0, 1.0) + 0.0


def r_of_s(sched: Schedule, s):
    """Inverse of :func:`s_of_r` in closed form."""
    if np.ndim(s) == 0 and not (0.0 <= float(s) <= 1.0):
        raise DomainError(f"time fraction s={s!r} outside [0, 1]")
    if not sched.local:
        return s
    sq = sched.model.sqrt_nm1
    out = 0.5 + np.tan((2.0 * np.asarray(s, dtype=float) - 1.0) * sched.theta0) / (2.0 * sq)
    return np.clip(out, 0.0, 1.0) + 0.0


def velocity(sched: Schedule, r):
    """``ds/dr = 1/(L gap^2)``; peaks at ``N/L`` in the middle of the sweep."""
    if not sched.local:
        return np.ones_like(np.asarray(r, dtype=float)) + 0.0
    return 1.0 / (sched.normalization_L * gap_sq(sched.model, np.asarray(r, dtype=float))) + 0.0


def r_phase(sched: Schedule, r):
    """Accumulated phase ``R(r) = (1/L) int_0^r 1/gap`` (closed form via asinh)."""
    if np.ndim(r) == 0:
        _check_r(r)
    m = sched.model
    sq = m.sqrt_nm1
    if not sched.local:
        # plain linear sweep: int_0^r gap
        return _linear_gap_integral(m, np.asarray(r, dtype=float))
    pref = math.sqrt(m.n_items) / (2.0 * sched.normalization_L * sq)
    return pref * (np.arcsinh(sq * (2.0 * np.asarray(r, dtype=float) - 1.0)) + math.asinh(sq)) + 0.0


def _linear_gap_integral(m: SearchModel, r):
    sq = m.sqrt_nm1
    n = m.n_items

    def prim(x):
        u = sq * x
        return (u * np.sqrt(1.0 + u * u) + np.arcsinh(u)) / (4.0 * sq * math.sqrt(n))

    return prim(2.0 * r - 1.0) - prim(-1.0)


def _q_density(sched: Schedule, spec: CouplingSpec, r):
    g = gamma_array(spec, sched.model, r)
    return g * g * velocity(sched, r)


@lru_cache(maxsize=256)
def _q_table(sched: Schedule, spec: CouplingSpec) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.linspace(0.0, 1.0, _TABLE_NODES)
    t, w = gauss_legendre(_LOCAL_ORDER)
    h = np.diff(nodes)
    x = nodes[:-1, None] + h[:, None] * t[None, :]
    cell = np.sum(_q_density(sched, spec, x) * w, axis=1) * h
    return nodes, np.concatenate([[0.0], np.cumsum(cell)])


def _q_tabulated(sched: Schedule, spec: CouplingSpec, r: np.ndarray) -> np.ndarray:
    nodes, prefix = _q_table(sched, spec)
    k = np.clip(np.searchsorted(nodes, r, side="right") - 1, 0, len(nodes) - 2)
    t, w = gauss_legendre(_LOCAL_ORDER)
    lo = nodes[k]
    h = r - lo
    x = lo[..., None] + h[..., None] * t
    return prefix[k] + np.sum(_q_density(sched, spec, x) * w, axis=-1) * h


def q_accum(sched: Schedule, spec: CouplingSpec, r):
    """Accumulated dephasing weight ``Q(r) = (1/L) int_0^r Gamma^2 / gap^2``.

    Closed forms cover W = H (``r/L``) and Gamma = gap**2; every other coupling
    goes through a cached prefix-sum table with Gauss-Legendre refinement.
    """
    scalar = np.ndim(r) == 0
    if scalar:
        _check_r(r)
    rr = np.asarray(r, dtype=float)
    m = sched.model
    L = sched.normalization_L
    if sched.local and spec.kind != "custom" and spec.sigma == 1.0:
        out = rr / L
    elif sched.local and spec.kind == "power" and spec.sigma == 2.0:
        n = m.n_items
        out = (rr + (n - 1) * ((2.0 * rr - 1.0) ** 3 + 1.0) / 6.0) / (n * L)
    else:
        out = _q_tabulated(sched, spec, rr)
    return float(out) if scalar else out


def q_lower_bound(sched: Schedule, sigma: float, r):
    """``r / (L N**(sigma-1))``, which bounds Q from below for Gamma = gap**sigma, sigma >= 1."""
    return np.asarray(r, dtype=float) / (sched.normalization_L * sched.model.n_items ** (sigma - 1.0))


__all__ = [
    "Schedule",
    "normalization",
    "q_accum",
    "q_lower_bound",
    "r_of_s",
    "r_phase",
    "s_of_r",
    "velocity",
]
