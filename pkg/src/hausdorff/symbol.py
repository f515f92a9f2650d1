"""The 2x2 matrix symbol and the exact operator norm.

For the pair ``(K_plus, K_minus)`` the symbol is

    Phi(s) = [[phi_plus(s), phi_minus(s)],
              [phi_minus(s), phi_plus(s)]],    phi_pm = Fourier(K_pm).

``Phi(s) = phi_plus I + phi_minus J`` with ``J`` the swap matrix, so
``Phi(s)`` is normal with eigenvalues ``phi = phi_plus + phi_minus`` and
``phi_star = phi_plus - phi_minus``; its operator norm is the larger of
their moduli.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .grid import DEFAULT_S_GRID, DEFAULT_T_GRID, GridError, GridParams
from .kernel_model import AuxFunction, KernelPair, KernelSpec, TAIL_TOL, to_log_pair
from .transforms import _check_resolution, lattice_sum

__all__ = [
    "Symbol",
    "OperatorHandle",
    "compute_symbol",
    "symbol_at",
    "multiply_symbols",
    "operator_norm",
    "same_aux",
]


@dataclass(frozen=True)
class Symbol:
    s_grid: GridParams
    phi_plus: np.ndarray
    phi_minus: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return self.s_grid.nodes

    @property
    def phi(self) -> np.ndarray:
        return self.phi_plus + self.phi_minus

    @property
    def phi_star(self) -> np.ndarray:
        return self.phi_plus - self.phi_minus

    def matrices(self) -> np.ndarray:
        """Stack of ``Phi(s)`` as an array of shape ``(n_s, 2, 2)``."""
        out = np.empty((self.s_grid.n, 2, 2), dtype=complex)
        out[:, 0, 0] = out[:, 1, 1] = self.phi_plus
        out[:, 0, 1] = out[:, 1, 0] = self.phi_minus
        return out

    @classmethod
    def zeros(cls, s_grid: GridParams = DEFAULT_S_GRID) -> "Symbol":
        z = np.zeros(s_grid.n, dtype=complex)
        return cls(s_grid, z, z.copy())


def same_aux(a: AuxFunction, b: AuxFunction) -> bool:
    if a is b:
        return True
    return a.family_tag == b.family_tag != "custom" and a.params == b.params


@dataclass
class OperatorHandle:
    """A Hausdorff operator: its kernel pair, its scaling function, and a
    lazily computed symbol on ``s_grid``."""

    pair: KernelPair
    aux: AuxFunction
    s_grid: GridParams = DEFAULT_S_GRID
    kernel: KernelSpec | None = None
    cached_symbol: Symbol | None = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @classmethod
    def from_kernel(
        cls,
        kernel: KernelSpec,
        aux: AuxFunction | None = None,
        grid: GridParams = DEFAULT_T_GRID,
        s_grid: GridParams = DEFAULT_S_GRID,
        tail_tol: float = TAIL_TOL,
    ) -> "OperatorHandle":
        aux = aux if aux is not None else AuxFunction.reciprocal()
        return cls(to_log_pair(kernel, aux, grid, tail_tol), aux, s_grid, kernel)

    @property
    def grid(self) -> GridParams:
        return self.pair.grid

    @property
    def symbol(self) -> Symbol:
        return compute_symbol(self)

    def with_pair(self, pair: KernelPair) -> "OperatorHandle":
        return OperatorHandle(pair, self.aux, self.s_grid)


def compute_symbol(h: OperatorHandle, s_grid: GridParams | None = None) -> Symbol:
    """``phi_pm(s) = sum_k mass_pm[k] exp(-i s t_k)``, cached on the handle
    for its own s-grid."""
    grid = s_grid if s_grid is not None else h.s_grid
    if s_grid is None or grid.same_as(h.s_grid):
        with h._lock:
            if h.cached_symbol is None:
                h.cached_symbol = _transform_pair(h.pair, h.s_grid)
            return h.cached_symbol
    return _transform_pair(h.pair, grid)


def _transform_pair(pair: KernelPair, s_grid: GridParams) -> Symbol:
    _check_resolution(pair.grid, s_grid)
    out = []
    for m in (pair.mass_plus, pair.mass_minus):
        if np.any(m):
            out.append(lattice_sum(m, pair.grid, s_grid, sign=-1))
        else:
            out.append(np.zeros(s_grid.n, dtype=complex))
    return Symbol(s_grid, out[0], out[1])


def symbol_at(sym: Symbol, s: float) -> np.ndarray:
    """``Phi(s)`` from linear interpolation of the sampled entries."""
    grid = sym.s_grid
    if not grid.lo <= s <= grid.hi:
        raise GridError(f"s={s} outside the symbol grid [{grid.lo}, {grid.hi}]")
    nodes = grid.nodes

    def lin(v):
        return np.interp(s, nodes, v.real) + 1j * np.interp(s, nodes, v.imag)

    p, m = lin(sym.phi_plus), lin(sym.phi_minus)
    return np.array([[p, m], [m, p]])


def _cmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # complex product from separately rounded real products; numpy's own
    # complex multiply may fuse multiply-adds, which breaks x*y == y*x
    xr, xi, yr, yi = x.real, x.imag, y.real, y.imag
    return (xr * yr - xi * yi) + 1j * (xr * yi + xi * yr)


def multiply_symbols(a: Symbol, b: Symbol) -> Symbol:
    a.s_grid.require_same(b.s_grid, "symbol grids")
    # swapping a and b only commutes products and sums, so the result is bitwise symmetric
    plus = _cmul(a.phi_plus, b.phi_plus) + _cmul(a.phi_minus, b.phi_minus)
    minus = _cmul(a.phi_plus, b.phi_minus) + _cmul(a.phi_minus, b.phi_plus)
    return Symbol(a.s_grid, plus, minus)


def operator_norm(sym: Symbol) -> float:
    """``sup_s ||Phi(s)||_op = sup_s max(|phi(s)|, |phi_star(s)|)``.

    The discrete maximum is refined by golden-section search on the
    quadratic through the argmax and its two neighbours.
    """
    g = np.maximum(np.abs(sym.phi), np.abs(sym.phi_star))
    if not np.any(g):
        return 0.0
    i = int(np.argmax(g))
    best = float(g[i])
    if 0 < i < len(g) - 1:
        s = sym.s
        x0, x1, x2 = s[i - 1], s[i], s[i + 1]
        y0, y1, y2 = g[i - 1], g[i], g[i + 1]
        coef = np.polyfit([x0, x1, x2], [y0, y1, y2], 2)
        try:
            res = minimize_scalar(lambda x: -np.polyval(coef, x), bracket=(x0, x1, x2), method="golden")
        except ValueError:  # flat top: the bracket is degenerate
            return best
        if x0 <= res.x <= x2:
            best = max(best, float(-res.fun))
    return best
