"""Quadrature helpers: adaptive Gauss-Kronrod for 1-D integrals and a panel scheme
for the nested "causal" double integrals that show up throughout the analysis.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(f"{message} (estimate={estimate!r}, error estimate={error!r})")
        self.estimate = estimate
        self.error = error


def adaptive_quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    points: Sequence[float] | None = None,
    epsabs: float = 1e-10,
    epsrel: float = 1e-12,
    limit: int = 500,
) -> float:
    """Integrate ``f`` over ``[a, b]`` with QUADPACK's 21-point Gauss-Kronrod rule.

    ``points`` are interior breakpoints (kinks); those outside ``(a, b)`` are dropped.
    """
    if a == b:
        return 0.0
    pts = None
    if points:
        lo, hi = min(a, b), max(a, b)
        pts = [p for p in points if lo < p < hi] or None
    out = integrate.quad(f, a, b, points=pts, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if len(out) == 4:
        value, err, _, msg = out
        if err > max(epsabs, epsrel * abs(value)) * 10.0:
            raise QuadratureError(f"quad failed on [{a}, {b}]: {msg.strip()}", value, err)
    return float(out[0])


@lru_cache(maxsize=None)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _nested_once(f, g, phase, edges, m):
    t, wt = gauss_legendre(m)
    a, b = edges[:-1], edges[1:]
    h = b - a
    # outer nodes x[k, j]; inner sub-panel nodes y[k, j, l] on [a_k, x_kj]
    x = a[:, None] + h[:, None] * t[None, :]
    y = a[:, None, None] + (x - a[:, None])[:, :, None] * t[None, None, :]
    pa, px, py = phase(a), phase(x), phase(y)
    gy = g(y)
    part = np.sum(np.exp(py - px[:, :, None]) * gy * wt, axis=-1) * (x - a[:, None])

    # full-panel inner integrals, carried forward through the panels
    ye = a[:, None] + h[:, None] * t[None, :]
    pb = phase(b)
    full = np.sum(np.exp(phase(ye) - pb[:, None]) * g(ye) * wt, axis=-1) * h
    decay = np.exp(pa - pb)
    carry = np.zeros(len(a), dtype=np.result_type(full, decay))
    acc = 0.0
    for k in range(len(a)):
        carry[k] = acc
        acc = decay[k] * acc + full[k]

    inner = np.exp(pa[:, None] - px) * carry[:, None] + part
    return np.sum(f(x) * inner * wt[None, :] * h[:, None])


def nested_causal(
    f: Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    edges: Sequence[float],
    phase: Callable[[np.ndarray], np.ndarray] | None = None,
    tol: float = 1e-8,
    order: int = 10,
    max_refine: int = 8,
):
    """Evaluate ``int_a^b f(x) int_a^x exp(P(y) - P(x)) g(y) dy dx``.

    ``edges`` is the initial panel partition of ``[a, b]``; ``P`` (``phase``) may be
    complex and should have a nondecreasing real part so the kernel stays bounded.
    The inner integral is carried across panels as a prefix sum, so each pass
    costs O(panels * order**2). Panels are bisected until successive values agree
    to ``tol``; all callables must accept numpy arrays.
    """
    if phase is None:
        def phase(u):
            return np.zeros_like(u)
    edges = np.asarray(edges, dtype=float)
    prev = _nested_once(f, g, phase, edges, order)
    for _ in range(max_refine):
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
        cur = _nested_once(f, g, phase, edges, order)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureError("nested quadrature did not converge", complex(cur), abs(cur - prev))


def panel_quad(f: Callable[[np.ndarray], np.ndarray], edges: Sequence[float], order: int = 10) -> float:
    """Composite Gauss-Legendre rule on the given panels."""
    edges = np.asarray(edges, dtype=float)
    t, wt = gauss_legendre(order)
    h = np.diff(edges)
    x = edges[:-1, None] + h[:, None] * t[None, :]
    return float(np.sum(f(x) * wt[None, :] * h[:, None]))
