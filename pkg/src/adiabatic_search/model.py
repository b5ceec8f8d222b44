"""Spectral quantities of the two-level search Hamiltonian and of the dephasing operator.

The N-item problem is reduced to the plane spanned by the equal superposition
``|psi>`` and the marked item ``|mu>``.  Coordinates are taken in the ordered
orthonormal basis ``{|phi>, |mu>}`` where ``|phi>`` is the part of ``|psi>``
orthogonal to ``|mu>``, so ``|psi> = (sqrt((N-1)/N), 1/sqrt(N))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import QuadratureError, adaptive_quad


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def _check_r(r: float) -> float:
    r = float(r)
    if not (0.0 <= r <= 1.0):
        raise DomainError(f"schedule parameter r={r!r} outside [0, 1]")
    return r


@dataclass(frozen=True)
class SearchModel:
    """Search problem over ``n_items`` elements restricted to the relevant plane."""

    n_items: int

    def __post_init__(self):
        if int(self.n_items) != self.n_items or self.n_items < 2:
            raise DomainError(f"n_items must be an integer >= 2, got {self.n_items!r}")
        object.__setattr__(self, "n_items", int(self.n_items))

    @property
    def sqrt_nm1(self) -> float:
        return math.sqrt(self.n_items - 1)

    @property
    def psi(self) -> np.ndarray:
        n = self.n_items
        return np.array([math.sqrt((n - 1) / n), 1.0 / math.sqrt(n)])

    @property
    def mu(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def hamiltonian(self, r: float) -> np.ndarray:
        """2x2 matrix of ``-(1-r)|psi><psi| - r|mu><mu|`` in the reduced basis."""
        p = self.psi
        return -(1.0 - r) * np.outer(p, p) - r * np.diag([0.0, 1.0])


@dataclass(frozen=True)
class CouplingSpec:
    """Choice of the dephasing operator through its splitting ``Gamma(r)``.

    ``kind`` is ``"hamiltonian"`` (W = H, Gamma = gap), ``"power"`` (Gamma = gap**sigma)
    or ``"custom"`` (Gamma = eta(gap) for a user-supplied increasing ``eta``).
    """

    kind: str = "hamiltonian"
    sigma: float = 1.0
    eta: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.kind not in ("hamiltonian", "power", "custom"):
            raise DomainError(f"unknown coupling kind {self.kind!r}")
        if self.kind == "hamiltonian":
            object.__setattr__(self, "sigma", 1.0)
        if self.kind == "power" and not self.sigma >= 0.5:
            raise DomainError(f"power coupling requires sigma >= 1/2, got {self.sigma!r}")
        if self.kind == "custom" and self.eta is None:
            raise DomainError("custom coupling requires an eta callable")

    @classmethod
    def hamiltonian_like(cls) -> "CouplingSpec":
        return cls("hamiltonian")

    @classmethod
    def power(cls, sigma: float) -> "CouplingSpec":
        return cls("power", sigma=float(sigma))

    @classmethod
    def custom(cls, eta: Callable[[float], float]) -> "CouplingSpec":
        return cls("custom", eta=eta)

    @property
    def exponent(self) -> float | None:
        """Power-law exponent of Gamma in the gap, or None for custom couplings."""
        return None if self.kind == "custom" else self.sigma

    def of_gap(self, delta: float) -> float:
        if self.kind == "custom":
            g = float(self.eta(delta))
            if not g > 0.0:
                raise ValueError(f"custom eta returned non-positive value {g!r} at gap {delta!r}")
            return g
        return delta ** self.sigma


@dataclass(frozen=True)
class SpectralPoint:
    r: float
    delta: float
    z: float
    gamma: float
    e0: np.ndarray
    e1: np.ndarray


def gap_sq(model: SearchModel, r: float) -> float:
    n = model.n_items
    x = 2.0 * r - 1.0
    return (1.0 + (n - 1) * x * x) / n


def gap(model: SearchModel, r: float) -> float:
    """Energy gap between the two lowest levels, minimal (1/sqrt(N)) at r = 1/2."""
    return math.sqrt(gap_sq(model, _check_r(r)))


def gap_derivative(model: SearchModel, r: float) -> float:
    n = model.n_items
    return 2.0 * (n - 1) * (2.0 * r - 1.0) / (n * math.sqrt(gap_sq(model, r)))


def coupling_z(model: SearchModel, r: float) -> float:
    """Non-adiabatic coupling ``|<dE0/dr|E1>|``; peaks at sqrt(N-1) at r = 1/2."""
    r = _check_r(r)
    n = model.n_items
    x = 2.0 * r - 1.0
    return math.sqrt(n - 1) / (1.0 + (n - 1) * x * x)


def z_antiderivative(model: SearchModel, r: float) -> float:
    """Closed form of ``int_0^r Z``."""
    s = model.sqrt_nm1
    return 0.5 * (math.atan(s * (2.0 * r - 1.0)) + math.atan(s))


def z_integral(model: SearchModel, upper: float = 1.0) -> float:
    """``int_0^upper Z dr`` by adaptive quadrature, split at the peak."""
    upper = _check_r(upper)
    return adaptive_quad(lambda r: coupling_z(model, r), 0.0, upper, points=[0.5])


def gamma(spec: CouplingSpec, model: SearchModel, r: float) -> float:
    return spec.of_gap(gap(model, r))


def gamma_sq_derivative(spec: CouplingSpec, model: SearchModel, r: float) -> float:
    """d(Gamma^2)/dr; analytic for power-law kinds, central differences for custom."""
    if spec.kind != "custom":
        d = gap(model, r)
        return 2.0 * spec.sigma * d ** (2.0 * spec.sigma - 1.0) * gap_derivative(model, r)
    h = 1e-6
    lo, hi = max(r - h, 0.0), min(r + h, 1.0)
    return (gamma(spec, model, hi) ** 2 - gamma(spec, model, lo) ** 2) / (hi - lo)


def gap_array(model: SearchModel, r) -> np.ndarray:
    return np.sqrt(gap_sq(model, np.asarray(r, dtype=float)))


def coupling_z_array(model: SearchModel, r) -> np.ndarray:
    n = model.n_items
    x = 2.0 * np.asarray(r, dtype=float) - 1.0
    return math.sqrt(n - 1) / (1.0 + (n - 1) * x * x)


def gamma_array(spec: CouplingSpec, model: SearchModel, r) -> np.ndarray:
    d = gap_array(model, r)
    if spec.kind == "custom":
        return np.vectorize(spec.of_gap, otypes=[float])(d)
    return d ** spec.sigma


def y0_array(model: SearchModel, r) -> np.ndarray:
    n = model.n_items
    x = 2.0 * np.asarray(r, dtype=float) - 1.0
    return (1.0 - (n - 1) * x) / (math.sqrt(n) * np.sqrt(1.0 + (n - 1) * x * x))


def _golden_min(f, a: float, b: float, tol: float = 1e-10) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def zeta(spec: CouplingSpec, model: SearchModel) -> float:
    """Minimum over r of ``Gamma^2 / gap``.

    For power-law couplings with sigma >= 1/2 the ratio is ``gap**(2 sigma - 1)``,
    a nondecreasing function of the gap, so the minimum sits at r = 1/2.
    """
    if spec.kind != "custom":
        return gap(model, 0.5) ** (2.0 * spec.sigma - 1.0)

    def ratio(r):
        return gamma(spec, model, r) ** 2 / gap(model, r)

    grid = np.linspace(0.0, 1.0, 1025)
    vals = np.array([ratio(r) for r in grid])
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    r_star = _golden_min(ratio, lo, hi)
    return min(ratio(r_star), float(vals[k]))


def k_fluctuation(spec: CouplingSpec, model: SearchModel, tol: float = 1e-10) -> float:
    """Fluctuation functional ``int_0^1 Z |d Gamma^2 / dr| dr``."""
    return adaptive_quad(
        lambda r: coupling_z(model, r) * abs(gamma_sq_derivative(spec, model, r)),
        0.0, 1.0, points=[0.5], epsabs=tol,
    )


def z_abs_gap_derivative_integral(model: SearchModel) -> float:
    """``int_0^1 Z |d gap / dr| dr``; bounded by 2 sqrt((N-1)/N)."""
    return adaptive_quad(
        lambda r: coupling_z(model, r) * abs(gap_derivative(model, r)), 0.0, 1.0, points=[0.5]
    )


def _mixing_angle(model: SearchModel, r: float) -> float:
    # H = c*1 + (1/2) * gap * [[cos a, sin a], [sin a, -cos a]]; a in (-pi, 0]
    n = model.n_items
    diag = r - (1.0 - r) * (n - 2) / n
    off = -2.0 * (1.0 - r) * math.sqrt(n - 1) / n
    return math.atan2(off, diag)


def eigenvectors(model: SearchModel, r: float, spec: CouplingSpec | None = None) -> SpectralPoint:
    """Instantaneous eigenvectors in a continuous real gauge.

    ``e0`` has positive overlap with ``|psi>`` at r = 0 and ``e1`` is oriented so
    that ``<de0/dr|e1> = +Z(r)`` on the whole interval.
    """
    r = _check_r(r)
    half = 0.5 * _mixing_angle(model, r)
    e0 = np.array([-math.sin(half), math.cos(half)])
    e1 = np.array([-math.cos(half), -math.sin(half)])
    spec = spec or CouplingSpec()
    return SpectralPoint(
        r=r,
        delta=gap(model, r),
        z=coupling_z(model, r),
        gamma=gamma(spec, model, r),
        e0=e0,
        e1=e1,
    )


def signed_coupling(model: SearchModel, r: float, h: float = 1e-6) -> float:
    """``<de0/dr|e1>`` by central differences of the gauge-fixed eigenvectors."""
    lo, hi = max(r - h, 0.0), min(r + h, 1.0)
    de0 = (eigenvectors(model, hi).e0 - eigenvectors(model, lo).e0) / (hi - lo)
    return float(de0 @ eigenvectors(model, r).e1)


def y0_closed(model: SearchModel, r: float) -> float:
    """Ground/excited population difference for an instantaneous (T = 0) sweep."""
    r = _check_r(r)
    n = model.n_items
    x = 2.0 * r - 1.0
    return (1.0 - (n - 1) * x) / (math.sqrt(n) * math.sqrt(1.0 + (n - 1) * x * x))


__all__ = [
    "CouplingSpec",
    "DomainError",
    "QuadratureError",
    "SearchModel",
    "SpectralPoint",
    "coupling_z",
    "coupling_z_array",
    "eigenvectors",
    "gamma",
    "gamma_array",
    "gamma_sq_derivative",
    "gap",
    "gap_array",
    "gap_derivative",
    "gap_sq",
    "k_fluctuation",
    "signed_coupling",
    "y0_array",
    "y0_closed",
    "z_abs_gap_derivative_integral",
    "z_antiderivative",
    "z_integral",
    "zeta",
]
