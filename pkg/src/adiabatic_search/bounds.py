"""Analytic success-probability bounds and the wide-open necessity functionals.

``lower_bound_general`` holds whenever the Hamiltonian weight is nonzero and
``lower_bound_wide_open`` for pure dephasing with ``Gamma = gap**sigma``.  The
remaining functions evaluate the double integrals that show a run time of
order ``N**sigma`` is also necessary in the wide-open case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .model import (
    CouplingSpec,
    DomainError,
    SearchModel,
    coupling_z_array,
    y0_array,
)
from .quadrature import adaptive_quad, nested_causal
from .schedule import Schedule, q_accum, r_of_s


def lower_bound_general(n_items: int, runtime: float, a_weight: float, b_weight: float,
                        k_const: float) -> float:
    """Lower bound on ``rho00`` for ``A > 0``; may be negative (vacuous), never clamped."""
    if not a_weight > 0.0:
        raise DomainError("general bound needs a positive Hamiltonian weight; use lower_bound_wide_open")
    if not runtime > 0.0:
        raise DomainError("general bound needs a positive run time")
    if k_const < 0.0:
        raise DomainError("fluctuation constant K must be nonnegative")
    n = n_items
    return 1.0 - 2.0 * math.pi ** 2 * math.sqrt(n) / runtime * (
        1.0 / a_weight + math.sqrt(n / (n - 1)) * k_const * b_weight / a_weight ** 2
    )


def lower_bound_wide_open(n_items: int, runtime: float, sigma: float) -> float:
    """``1 - (pi^2/2) N**sigma / T`` for pure dephasing with ``B = 1``."""
    if not runtime > 0.0:
        raise DomainError("wide-open bound needs a positive run time")
    if sigma < 1.0:
        raise DomainError("wide-open bound requires sigma >= 1")
    return 1.0 - 0.5 * math.pi ** 2 * n_items ** sigma / runtime


def _phi_poly(x, k: int):
    # (1 + t^2)^k expanded binomially, integrated term by term
    out = np.zeros_like(x, dtype=float)
    for j in range(k + 1):
        out = out + math.comb(k, j) * x ** (2 * j + 1) / (2 * j + 1)
    return out


def phi_array(x, sigma: float) -> np.ndarray:
    """Vectorized ``Phi(x) = int_0^x (1 + t^2)**(sigma - 1) dt``."""
    x = np.asarray(x, dtype=float)
    k = sigma - 1.0
    if k == int(k) and k >= 0:
        return _phi_poly(x, int(k))
    return x * special.hyp2f1(1.0 - sigma, 0.5, 1.5, -x * x)


def phi(x: float, sigma: float) -> float:
    """``Phi(x)``: closed form for integer sigma, adaptive quadrature otherwise. Odd in x."""
    if sigma < 1.0:
        raise DomainError("Phi is defined here for sigma >= 1")
    k = sigma - 1.0
    if k == int(k):
        return float(_phi_poly(np.float64(x), int(k)))
    return adaptive_quad(lambda t: (1.0 + t * t) ** k, 0.0, x)


def necessity_alpha(n_items: int, runtime: float, sigma: float) -> float:
    if n_items < 2:
        raise DomainError("N must be at least 2")
    return runtime / (2.0 * n_items ** sigma * math.atan(math.sqrt(n_items - 1)))


def _panels(lo: float, hi: float, rate: float) -> np.ndarray:
    n = int(min(2048, max(16, math.ceil(abs(hi - lo) * max(rate, 1.0)))))
    return np.linspace(lo, hi, n + 1)


def necessity_I(alpha: float, beta: float, sigma: float = 1.0, tol: float = 1e-8) -> float:
    """Double integral ``I(alpha, beta)`` over ``-beta <= y <= x <= beta``.

    The kernel ``exp(-alpha (Phi(x) - Phi(y)))`` is bounded by one on the causal
    triangle, so the two exponentials are never formed separately.
    """
    if alpha < 0.0 or not beta > 0.0:
        raise DomainError("need alpha >= 0 and beta > 0")

    def f(x):
        return 1.0 / (1.0 + x * x)

    def g(y):
        return -y / (1.0 + y * y) ** 1.5

    def phase(u):
        return alpha * phi_array(u, sigma)

    rate = alpha * (1.0 + beta * beta) ** max(sigma - 1.0, 0.0)
    return float(np.real(nested_causal(f, g, _panels(-beta, beta, rate), phase=phase, tol=tol)))


def necessity_I_closed_alpha0(beta: float) -> float:
    """``I(0, beta) = 2 (beta - atan beta) / sqrt(1 + beta^2)``."""
    return 2.0 * (beta - math.atan(beta)) / math.sqrt(1.0 + beta * beta)


def necessity_I_riemann(alpha: float, beta: float, sigma: float = 1.0, n: int = 2000) -> float:
    """Brute-force midpoint-rule oracle for ``I(alpha, beta)`` on an ``n x n`` grid."""
    h = 2.0 * beta / n
    c = -beta + h * (np.arange(n) + 0.5)
    ph = alpha * phi_array(c, sigma)
    fx = 1.0 / (1.0 + c * c)
    gy = -c / (1.0 + c * c) ** 1.5
    total = 0.0
    for i in range(n):
        # y-cells strictly below x, plus the diagonal cell at half weight
        inner = np.sum(np.exp(ph[:i] - ph[i]) * gy[:i]) + 0.5 * gy[i]
        total += fx[i] * inner
    return float(total * h * h)


def necessity_F(alpha: float, beta: float, sigma: float = 1.0) -> float:
    """Integrand ``F(alpha, beta)`` bounding ``dI/dbeta`` from below."""
    inner = adaptive_quad(lambda x: math.exp(-alpha * phi(x, sigma)) / (1.0 + x * x), 0.0, beta)
    return 2.0 * beta * math.exp(-alpha * phi(beta, sigma)) / (1.0 + beta * beta) ** 1.5 * inner


def necessity_F_integral(alpha: float, sigma: float = 1.0, tol: float = 1e-8) -> float:
    """``int_0^1 F(alpha, beta) d beta`` by nested panel quadrature."""
    if alpha < 0.0:
        raise DomainError("alpha must be nonnegative")

    def f(b):
        return 2.0 * b * np.exp(-alpha * phi_array(b, sigma)) / (1.0 + b * b) ** 1.5

    def g(x):
        return np.exp(-alpha * phi_array(x, sigma)) / (1.0 + x * x)

    return float(np.real(nested_causal(f, g, _panels(0.0, 1.0, alpha), tol=tol)))


@dataclass(frozen=True)
class NecessityCheck:
    i0: float
    alpha: float
    chain_rhs: float

    @property
    def slack(self) -> float:
        return self.i0 - self.chain_rhs


def necessity_I0(model: SearchModel, sched: Schedule, spec: CouplingSpec, runtime: float,
                 tol: float = 1e-9) -> NecessityCheck:
    """Lower bound ``I0`` on ``1 - Y_T(1)`` for pure dephasing (A = 0, B = 1).

    Evaluated in the schedule parameter with the schedule's Q and the T = 0
    population difference; also returns ``sqrt((N-1)/N) I(alpha, sqrt(N-1))``,
    which must not exceed ``I0``.
    """
    if spec.kind == "custom" or spec.sigma < 1.0:
        raise DomainError("necessity analysis needs a power-law coupling with sigma >= 1")
    n = model.n_items

    def f(r):
        return coupling_z_array(model, r)

    def g(r):
        return coupling_z_array(model, r) * y0_array(model, r)

    def phase(r):
        return runtime * q_accum(sched, spec, r)

    n_panels = int(min(2048, max(64, runtime / 4.0)))
    edges = r_of_s(sched, np.linspace(0.0, 1.0, n_panels + 1))
    i0 = 4.0 * float(np.real(nested_causal(f, g, edges, phase=phase, tol=tol, max_refine=6)))
    alpha = necessity_alpha(n, runtime, spec.sigma)
    rhs = math.sqrt((n - 1) / n) * necessity_I(alpha, math.sqrt(n - 1), spec.sigma, tol=tol)
    return NecessityCheck(i0, alpha, rhs)


BOUND_CSV_HEADER = "N,T,omega,sigma,simulated_p,bound_general,bound_wideopen,K,zeta,slack"


@dataclass(frozen=True)
class BoundRow:
    n_items: int
    runtime: float
    omega: float
    sigma: float
    simulated_p: float
    bound_general: float
    bound_wideopen: float
    k_const: float
    zeta: float

    @property
    def slack(self) -> float:
        bound = self.bound_wideopen if math.isnan(self.bound_general) else self.bound_general
        return self.simulated_p - bound

    def csv(self) -> str:
        vals = (self.runtime, self.omega, self.sigma, self.simulated_p, self.bound_general,
                self.bound_wideopen, self.k_const, self.zeta, self.slack)
        return f"{self.n_items}," + ",".join(f"{v:.17g}" for v in vals)


__all__ = [
    "BOUND_CSV_HEADER",
    "BoundRow",
    "NecessityCheck",
    "lower_bound_general",
    "lower_bound_wide_open",
    "necessity_F",
    "necessity_F_integral",
    "necessity_I",
    "necessity_I0",
    "necessity_I_closed_alpha0",
    "necessity_I_riemann",
    "necessity_alpha",
    "phi",
    "phi_array",
]
