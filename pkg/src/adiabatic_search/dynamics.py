"""Dephasing dynamics of the local adiabatic search in the instantaneous eigenframe.

State is the population difference ``Y = rho00 - rho11`` and the coherence
``c = <E0|rho|E1>``.  With the gauge of :func:`model.eigenvectors` the
reparametrized master equation reads

    dY/dr = 4 Z c_re
    dc/dr = -Z Y + (i A T v gap - B T v Gamma^2) c,      v = 1/(L gap^2)

The integral-equation evaluator and the full N-dimensional integrator in this
module are independent checks on that reduction.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sp_integrate
from scipy.interpolate import CubicSpline

from .model import (
    CouplingSpec,
    SearchModel,
    coupling_z_array,
    eigenvectors,
    gamma_array,
)
from .quadrature import nested_causal
from .schedule import Schedule, q_accum, r_of_s, r_phase, velocity

MAX_STEP = 1.0 / 64.0
MIN_STEP = 1e-12
SAFETY = 0.9
STIFF_THRESHOLD = 10.0

# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (
    35 / 384 - 5179 / 57600,
    0.0,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
)


class IntegratorError(RuntimeError):
    def __init__(self, message: str, r_reached: float):
        super().__init__(f"{message} (reached r={r_reached:.12g})")
        self.r_reached = r_reached


@dataclass(frozen=True)
class DecoherenceParams:
    """Hamiltonian weight ``A``, dephasing weight ``B``, run time ``T`` and coupling."""

    a_weight: float
    b_weight: float
    runtime: float
    coupling: CouplingSpec = field(default_factory=CouplingSpec)

    def __post_init__(self):
        if self.a_weight < 0 or self.b_weight < 0:
            raise ValueError("decoherence weights must be nonnegative")
        if self.runtime < 0:
            raise ValueError("runtime must be nonnegative")

    @classmethod
    def from_omega(cls, omega: float, runtime: float, coupling: CouplingSpec | None = None):
        if not 0.0 <= omega <= 1.0:
            raise ValueError(f"omega={omega!r} outside [0, 1]")
        a = math.cos(omega * math.pi / 2.0)
        b = math.sin(omega * math.pi / 2.0)
        # exact endpoints so that omega = 1 is genuinely wide open
        if omega == 1.0:
            a = 0.0
        return cls(a, b, float(runtime), coupling or CouplingSpec())

    def with_runtime(self, runtime: float) -> "DecoherenceParams":
        return DecoherenceParams(self.a_weight, self.b_weight, float(runtime), self.coupling)


@dataclass(frozen=True)
class EigenFrameState:
    y: float
    c_re: float
    c_im: float

    @property
    def rho00(self) -> float:
        return 0.5 * (1.0 + self.y)

    def purity_measure(self) -> float:
        return self.y * self.y + 4.0 * (self.c_re * self.c_re + self.c_im * self.c_im)


@dataclass
class Trajectory:
    r: np.ndarray
    y: np.ndarray
    c_re: np.ndarray
    c_im: np.ndarray
    n_items: int
    params: DecoherenceParams
    tolerance: float
    steps: int = 0
    rejected: int = 0
    exponential_steps: int = 0

    @property
    def rho00(self) -> np.ndarray:
        return 0.5 * (1.0 + self.y)

    @property
    def final_probability(self) -> float:
        return float(self.rho00[-1])


class _Rates:
    """Per-r coefficients (Z, phase rate, dephasing rate) of the eigenframe equations."""

    def __init__(self, model: SearchModel, sched: Schedule, params: DecoherenceParams):
        self.n = model.n_items
        self.sq = math.sqrt(self.n - 1)
        self.L = sched.normalization_L
        self.local = sched.local
        self.aT = params.a_weight * params.runtime
        self.bT = params.b_weight * params.runtime
        spec = params.coupling
        self.custom = spec.of_gap if spec.kind == "custom" else None
        self.sigma = spec.sigma

    def __call__(self, r: float) -> tuple[float, float, float]:
        n = self.n
        x = 2.0 * r - 1.0
        u = 1.0 + (n - 1) * x * x
        z = self.sq / u
        gsq = u / n
        gap = math.sqrt(gsq)
        v = 1.0 / (self.L * gsq) if self.local else 1.0
        if self.custom is not None:
            g = self.custom(gap)
            g2 = g * g
        elif self.sigma == 1.0:
            g2 = gsq
        else:
            g2 = gsq ** self.sigma
        return z, self.aT * v * gap, self.bT * v * g2


def derivative(state: EigenFrameState, r: float, model: SearchModel, sched: Schedule,
               params: DecoherenceParams) -> EigenFrameState:
    """Eigenframe rates ``(dY/dr, d c_re/dr, d c_im/dr)`` packed as a state."""
    z, ph, dp = _Rates(model, sched, params)(r)
    y, cr, ci = state.y, state.c_re, state.c_im
    return EigenFrameState(4.0 * z * cr, -z * y - ph * ci - dp * cr, ph * cr - dp * ci)


def _rhs(rates, r, y, cr, ci):
    z, ph, dp = rates(r)
    return 4.0 * z * cr, -z * y - ph * ci - dp * cr, ph * cr - dp * ci


def _dp5_step(rates, r, u, h, k1):
    ks = [k1]
    for s in range(1, 7):
        a = _A[s]
        y = u[0] + h * sum(a[j] * ks[j][0] for j in range(s))
        cr = u[1] + h * sum(a[j] * ks[j][1] for j in range(s))
        ci = u[2] + h * sum(a[j] * ks[j][2] for j in range(s))
        if s == 6:
            unew = (y, cr, ci)
        ks.append(_rhs(rates, r + _C[s] * h, y, cr, ci))
    err = tuple(h * sum(_E[j] * ks[j][i] for j in range(7)) for i in range(3))
    return unew, err, ks[6]


def _phi12(zc: complex) -> tuple[complex, complex, complex]:
    ez = cmath.exp(zc)
    if abs(zc) < 1e-3:
        phi1 = 1.0 + zc / 2.0 + zc * zc / 6.0
        phi2 = 0.5 + zc / 6.0 + zc * zc / 24.0
    else:
        phi1 = (ez - 1.0) / zc
        phi2 = (ez - 1.0 - zc) / (zc * zc)
    return ez, phi1, phi2


def _etd_step(rates, r, u, h):
    """Exponential (Cox-Matthews ETD2RK) step with ETD1 embedded for the error.

    The coherence's linear damping/phase term is frozen at the step midpoint and
    integrated exactly; the coupling source terms and the drift of the linear
    coefficient across the step are treated explicitly.
    """
    _, phm, dpm = rates(r + 0.5 * h)
    lam = complex(-dpm, phm)

    def nonlinear(rr, y, c):
        z, ph, dp = rates(rr)
        return 4.0 * z * c.real, -z * y + (complex(-dp, ph) - lam) * c

    y0, c0 = u[0], complex(u[1], u[2])
    ny0, nc0 = nonlinear(r, y0, c0)
    ez, p1, p2 = _phi12(lam * h)
    # stage: exponential Euler
    ya = y0 + h * ny0
    ca = ez * c0 + h * p1 * nc0
    nya, nca = nonlinear(r + h, ya, ca)
    y1 = ya + h * 0.5 * (nya - ny0)
    c1 = ca + h * p2 * (nca - nc0)
    return (y1, c1.real, c1.imag), (y1 - ya, (c1 - ca).real, (c1 - ca).imag)


def integrate(model: SearchModel, sched: Schedule, params: DecoherenceParams,
              tol: float = 1e-9, n_samples: int = 201) -> Trajectory:
    """Integrate from the ground state at r = 0 to r = 1.

    Steps are clipped so that every sample of the uniform ``n_samples`` grid is
    hit exactly; no interpolation is involved in the returned samples.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError(f"tolerance {tol!r} outside [1e-12, 1e-4]")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    rates = _Rates(model, sched, params)
    grid = np.linspace(0.0, 1.0, n_samples)
    ys = np.empty(n_samples)
    crs = np.empty(n_samples)
    cis = np.empty(n_samples)
    u = (1.0, 0.0, 0.0)
    ys[0], crs[0], cis[0] = u
    r = 0.0
    h_prop = 1e-3
    k1 = _rhs(rates, r, *u)
    steps = rejected = n_exp = 0
    idx = 1
    while idx < n_samples:
        target = float(grid[idx])
        h = min(h_prop, MAX_STEP)
        hit = r + h >= target - 1e-14
        if hit:
            h = target - r
        _, _, dp = rates(r + 0.5 * h)
        stiff = dp * h > STIFF_THRESHOLD
        if stiff:
            unew, err = _etd_step(rates, r, u, h)
            order = 2.0
        else:
            unew, err, k7 = _dp5_step(rates, r, u, h, k1)
            order = 5.0
        en = max(abs(e) / (tol + tol * max(abs(a), abs(b))) for e, a, b in zip(err, u, unew))
        if en <= 1.0:
            r = target if hit else r + h
            u = unew
            steps += 1
            if stiff:
                n_exp += 1
                k1 = _rhs(rates, r, *u)
            else:
                k1 = k7
            purity = u[0] * u[0] + 4.0 * (u[1] * u[1] + u[2] * u[2])
            if purity > 1.0 + 10.0 * tol:
                raise IntegratorError(f"positivity violated: Y^2+4|c|^2={purity!r}", r)
            if hit:
                ys[idx], crs[idx], cis[idx] = u
                idx += 1
            fac = 5.0 if en == 0.0 else min(5.0, SAFETY * en ** (-1.0 / order))
            if not (hit and fac >= 1.0):
                h_prop = h * max(0.2, fac)
        else:
            rejected += 1
            h_prop = h * max(0.1, SAFETY * en ** (-1.0 / order))
            if h_prop < MIN_STEP:
                raise IntegratorError("step size underflow", r)
    return Trajectory(grid, ys, crs, cis, model.n_items, params, tol, steps, rejected, n_exp)


def success_probability(model: SearchModel, sched: Schedule, params: DecoherenceParams,
                        tol: float = 1e-9) -> float:
    """Ground-state population ``rho00(1) = (1 + Y(1))/2`` of a fresh integration."""
    return integrate(model, sched, params, tol, n_samples=2).final_probability


def _phase_function(sched: Schedule, params: DecoherenceParams):
    T, A, B = params.runtime, params.a_weight, params.b_weight
    spec = params.coupling

    def phase(r):
        return T * (B * q_accum(sched, spec, r) - 1j * A * r_phase(sched, r))

    return phase


def integral_equation_value(model: SearchModel, sched: Schedule, params: DecoherenceParams,
                            y_of_r, tol: float = 1e-9) -> float:
    """``I(1)`` of the integral form ``1 - Y(1) = 4 I(1)`` for a given ``Y(r)``."""
    def zf(r):
        return coupling_z_array(model, r)

    def zy(r):
        return coupling_z_array(model, r) * y_of_r(r)

    T = params.runtime
    n_panels = int(min(4096, max(32, 2.0 * T * max(params.a_weight, params.b_weight))))
    edges = r_of_s(sched, np.linspace(0.0, 1.0, n_panels + 1)) if sched.local else np.linspace(0, 1, n_panels + 1)
    val = nested_causal(zf, zy, edges, phase=_phase_function(sched, params), tol=tol)
    return float(np.real(val))


def integral_equation_eval(model: SearchModel, sched: Schedule, params: DecoherenceParams,
                           trajectory: Trajectory) -> float:
    """Residual ``|1 - Y(1) - 4 I(1)|`` with ``Y`` taken from ``trajectory``.

    Only the population samples enter (through a cubic spline), so the coherence
    computed by the integrator is not reused. Use a finely sampled trajectory.
    """
    spline = CubicSpline(trajectory.r, trajectory.y)
    i1 = integral_equation_value(model, sched, params, spline)
    return abs(1.0 - trajectory.y[-1] - 4.0 * i1)


def _embed(model: SearchModel, vec2: np.ndarray) -> np.ndarray:
    n = model.n_items
    mu = np.zeros(n)
    mu[0] = 1.0
    psi = np.full(n, 1.0 / math.sqrt(n))
    phi = (psi - mu / math.sqrt(n)) / math.sqrt((n - 1) / n)
    return vec2[0] * phi + vec2[1] * mu


def full_space_check(model: SearchModel, sched: Schedule, params: DecoherenceParams,
                     tol: float = 1e-10, n_samples: int = 201) -> float:
    """Max deviation of ``rho00(r)`` between the N-dimensional master equation and
    the eigenframe integrator.

    The N x N density matrix is propagated in the fixed computational basis with
    ``W = Gamma |E1><E1|`` (zero on the complement of the search plane).
    """
    n = model.n_items
    if n > 16:
        raise ValueError(f"full-space check limited to N <= 16, got {n}")
    spec = params.coupling
    mu = np.zeros(n)
    mu[0] = 1.0
    psi = np.full(n, 1.0 / math.sqrt(n))
    P_psi, P_mu = np.outer(psi, psi), np.outer(mu, mu)
    aT = params.a_weight * params.runtime
    bT = params.b_weight * params.runtime

    def rhs(r, flat):
        rho = flat.reshape(n, n)
        H = -(1.0 - r) * P_psi - r * P_mu
        e1 = _embed(model, eigenvectors(model, min(max(r, 0.0), 1.0)).e1)
        g = float(gamma_array(spec, model, min(max(r, 0.0), 1.0)))
        W = g * np.outer(e1, e1)
        comm_h = H @ rho - rho @ H
        wr = W @ rho - rho @ W
        dd = W @ wr - wr @ W
        v = float(velocity(sched, r))
        return (v * (-1j * aT * comm_h - bT * dd)).ravel()

    grid = np.linspace(0.0, 1.0, n_samples)
    rho0 = np.outer(psi, psi).astype(complex)
    sol = sp_integrate.solve_ivp(rhs, (0.0, 1.0), rho0.ravel(), method="DOP853", t_eval=grid,
                                 rtol=tol, atol=tol, max_step=MAX_STEP)
    if not sol.success:
        raise IntegratorError(f"full-space integration failed: {sol.message}", float(sol.t[-1]))
    rhos = sol.y.T.reshape(-1, n, n)
    traces = np.real(np.einsum("kii->k", rhos))
    if np.max(np.abs(traces - 1.0)) > 1e-9:
        raise IntegratorError("trace drift above 1e-9 in full-space integration", 1.0)
    p_full = np.array([
        np.real(_embed(model, eigenvectors(model, r).e0) @ rho @ _embed(model, eigenvectors(model, r).e0))
        for r, rho in zip(grid, rhos)
    ])
    traj = integrate(model, sched, params, tol=max(tol, 1e-12), n_samples=n_samples)
    return float(np.max(np.abs(p_full - traj.rho00)))


def write_trajectory_csv(traj: Trajectory, path, header_lines: list[str] | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        for line in header_lines or []:
            fh.write(line.rstrip("\n") + "\n")
        fh.write("r,y,c_re,c_im,rho00\n")
        for row in zip(traj.r, traj.y, traj.c_re, traj.c_im, traj.rho00):
            fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")


__all__ = [
    "DecoherenceParams",
    "EigenFrameState",
    "IntegratorError",
    "Trajectory",
    "derivative",
    "full_space_check",
    "integral_equation_eval",
    "integral_equation_value",
    "integrate",
    "success_probability",
    "write_trajectory_csv",
]
