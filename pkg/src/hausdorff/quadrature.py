"""Quadrature building blocks.

Two families live here:

* break-aware lattice weights: a corrected trapezoid rule (Gregory-type
  end corrections derived from the Euler-Maclaurin expansion) applied
  piece by piece between known break points of a piecewise smooth
  integrand.  The weights do not depend on any oscillatory factor applied
  later, so a weighted sample vector can be Fourier transformed with a
  plain exponential sum and stay accurate to high order.
* thin wrappers around QUADPACK adaptive Gauss-Kronrod integration with
  divergence detection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import bernoulli

from .grid import GridParams

__all__ = [
    "DEFAULT_ORDER",
    "QUAD_RTOL",
    "QUAD_ATOL",
    "DIVERGENCE_CAP",
    "end_corrections",
    "lagrange_integral_weights",
    "WeightPlan",
    "plan_weights",
    "adaptive_integral",
    "DivergenceError",
]

DEFAULT_ORDER = 8
QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-14
DIVERGENCE_CAP = 1e12


class DivergenceError(ArithmeticError):
    """An adaptive integral failed to converge or exceeded the divergence cap."""


@lru_cache(maxsize=None)
def _end_corrections(q: int) -> tuple:
    # Left-end weights w_j, j = 0..q-1, with sum_j w_j j**m equal to the
    # Euler-Maclaurin left-end term for t**m (unit spacing).
    B = bernoulli(q + 1)
    j = np.arange(q, dtype=float)
    V = np.vander(j, q, increasing=True).T
    rhs = np.array([B[m + 1] / (m + 1) if m % 2 == 1 else 0.0 for m in range(q)])
    return tuple(np.linalg.solve(V, rhs))


def end_corrections(q: int = DEFAULT_ORDER) -> np.ndarray:
    """Corrections added to trapezoid weights at the first ``q`` nodes of an end.

    Adding ``h * end_corrections(q)`` to the trapezoid weights next to a
    finite endpoint makes the rule exact for polynomials of degree ``< q``
    (in the Euler-Maclaurin sense, one end at a time).
    """
    return np.array(_end_corrections(q))


def lagrange_integral_weights(nodes: np.ndarray, x0: float, x1: float) -> np.ndarray:
    """Weights ``w`` with ``sum(w * p(nodes)) == integral of p over [x0, x1]``.

    Exact for polynomials of degree ``< len(nodes)``.  Works in coordinates
    centred on the node mean, which keeps the Vandermonde system tame for
    the small stencils used here.
    """
    nodes = np.asarray(nodes, dtype=float)
    m = len(nodes)
    c = nodes.mean()
    scale = max(np.ptp(nodes), abs(x1 - x0), 1e-300) / 2 or 1.0
    x = (nodes - c) / scale
    a, b = (x0 - c) / scale, (x1 - c) / scale
    k = np.arange(m)
    moments = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    V = np.vander(x, m, increasing=True).T
    return np.linalg.solve(V, moments) * scale


@dataclass
class WeightPlan:
    """Quadrature weights on a lattice for a piecewise smooth integrand.

    ``weights`` apply to the ordinary sample at each node.  Nodes that sit
    exactly on a break are listed in ``break_nodes`` as
    ``(index, t_break, w_left, w_right)``; their integrand enters through
    one-sided limits and their entry in ``weights`` is zero.
    """

    grid: GridParams
    weights: np.ndarray
    break_nodes: list = field(default_factory=list)

    def integrate(self, func: Callable[[np.ndarray], np.ndarray], eps: float | None = None) -> np.ndarray:
        """Per-node masses of ``func`` (a vectorised function of t)."""
        t = self.grid.nodes
        values = np.asarray(func(t))
        masses = self.weights * values
        if self.break_nodes:
            masses = masses.astype(np.result_type(masses, complex) if np.iscomplexobj(values) else float)
            h = self.grid.step
            for idx, tb, wl, wr in self.break_nodes:
                d = (eps if eps is not None else 1e-9) * h
                left = func(np.array([tb - d]))[0]
                right = func(np.array([tb + d]))[0]
                masses[idx] = wl * left + wr * right
        return masses


def _piece_weights(m: int, d_left: float | None, d_right: float | None, q: int) -> np.ndarray:
    """Unit-spacing weights for ``m`` consecutive nodes inside one smooth piece.

    ``d_left``/``d_right`` give the gap (in steps, in ``[0, 1)``) between the
    piece's break and its first/last node; ``None`` means the piece runs
    into the grid edge, where the integrand is negligible and the plain
    Riemann weight is used.
    """
    if d_left is not None and d_right is not None and m < q:
        nodes = np.arange(m, dtype=float)
        if m == 1:
            return np.array([d_left + d_right])
        return lagrange_integral_weights(nodes, -d_left, m - 1 + d_right)
    w = np.ones(m)
    corr = end_corrections(min(q, m))
    k = len(corr)
    if d_left is not None:
        w[0] -= 0.5
        w[:k] += corr
        if d_left > 0:
            w[:k] += lagrange_integral_weights(np.arange(k, dtype=float), -d_left, 0.0)
    if d_right is not None:
        w[-1] -= 0.5
        w[m - k:] += corr[::-1]
        if d_right > 0:
            w[m - k:] += lagrange_integral_weights(np.arange(1 - k, 1, dtype=float), 0.0, d_right)
    return w


def plan_weights(grid: GridParams, breaks: Sequence[float] = (), order: int = DEFAULT_ORDER) -> WeightPlan:
    """Build break-aware quadrature weights on ``grid``.

    Without breaks inside the grid this is the plain rule ``h`` per node,
    so the weighted samples of a break-free function are just ``h * g``.
    """
    h = grid.step
    n = grid.n
    tol = 1e-9
    inner = sorted(b for b in set(float(b) for b in breaks) if grid.lo < b < grid.hi)
    if not inner:
        return WeightPlan(grid, np.full(n, h))

    weights = np.zeros(n)
    left_w: dict[int, float] = {}
    right_w: dict[int, float] = {}
    on_break: dict[int, float] = {}
    bounds = [None] + inner + [None]
    for lo_b, hi_b in zip(bounds[:-1], bounds[1:]):
        # node index range belonging to this piece, endpoints on breaks included
        if lo_b is None:
            ja, d_left = 0, None
        else:
            x = (lo_b - grid.lo) / h
            ja = int(np.ceil(x - tol))
            d_left = max(ja - x, 0.0)
            if d_left < tol:
                d_left = 0.0
                on_break[ja] = lo_b
        if hi_b is None:
            jb, d_right = n - 1, None
        else:
            x = (hi_b - grid.lo) / h
            jb = int(np.floor(x + tol))
            d_right = max(x - jb, 0.0)
            if d_right < tol:
                d_right = 0.0
                on_break[jb] = hi_b
        m = jb - ja + 1
        if m <= 0:
            continue
        w = h * _piece_weights(m, d_left, d_right, order)
        for k, idx in enumerate(range(ja, jb + 1)):
            if k == 0 and d_left == 0.0:
                right_w[idx] = right_w.get(idx, 0.0) + w[k]
            elif k == m - 1 and d_right == 0.0:
                left_w[idx] = left_w.get(idx, 0.0) + w[k]
            else:
                weights[idx] += w[k]
    break_nodes = [
        (idx, on_break[idx], left_w.get(idx, 0.0), right_w.get(idx, 0.0)) for idx in sorted(on_break)
    ]
    return WeightPlan(grid, weights, break_nodes)


def adaptive_integral(
    func: Callable[[float], float],
    a: float,
    b: float,
    points: Sequence[float] = (),
    rtol: float = QUAD_RTOL,
    atol: float = QUAD_ATOL,
    cap: float = DIVERGENCE_CAP,
) -> tuple[float, float]:
    """Integrate a real function on ``[a, b]`` (infinite ends allowed).

    The interval is split at ``points`` and each piece goes to QUADPACK.
    Raises :class:`DivergenceError` if any piece fails to converge or the
    running total exceeds ``cap``.
    """
    edges = [a] + sorted(p for p in points if a < p < b) + [b]
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, e = integrate.quad(func, lo, hi, epsrel=rtol, epsabs=atol, limit=500)
            except integrate.IntegrationWarning as exc:
                raise DivergenceError(f"quadrature on [{lo}, {hi}] did not converge: {exc}") from None
        if not np.isfinite(val) or abs(val) > cap:
            raise DivergenceError(f"integral on [{lo}, {hi}] exceeds {cap:g}")
        total += val
        err += e
        if abs(total) > cap:
            raise DivergenceError(f"partial sum exceeds {cap:g}")
    return total, err
