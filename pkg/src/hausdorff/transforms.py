"""Fourier transform of integrable functions, linear convolution, and the
unitary Mellin transform on a half-line.

Sign convention (used everywhere): ``g_hat(s) = int g(t) e^{-ist} dt`` and
``g(t) = (2 pi)^{-1} int g_hat(s) e^{ist} ds``.  Under ``u = e^{-t}`` this
turns ``|u|^{is}`` into ``e^{-ist}``.

Exponential sums between two lattices are evaluated with the chirp
z-transform, so a forward transform of ``n`` samples onto ``m`` frequencies
costs ``O((n + m) log(n + m))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.signal import czt, fftconvolve

from .grid import DEFAULT_S_GRID, GridError, GridParams
from .kernel_model import TAIL_TOL, GridTooSmallError

__all__ = ["SampledLine", "lattice_sum", "fourier_l1", "convolve", "mellin_halfline"]

Direction = Literal["forward", "inverse"]


@dataclass(frozen=True)
class SampledLine:
    """Samples of a function on a uniform lattice.

    ``masses``, when given, are quadrature masses (already multiplied by the
    node weights); otherwise the plain rule ``step * values`` is used.
    """

    grid: GridParams
    values: np.ndarray
    masses: np.ndarray | None = None
    truncation_mass: float = 0.0

    def __post_init__(self):
        if len(self.values) != self.grid.n:
            raise GridError(f"{len(self.values)} samples for a grid of {self.grid.n}")

    @property
    def weighted(self) -> np.ndarray:
        return self.masses if self.masses is not None else self.grid.step * np.asarray(self.values)

    @property
    def l1(self) -> float:
        return float(np.abs(self.weighted).sum())


def lattice_sum(coeffs: np.ndarray, src: GridParams, dst: GridParams, sign: int = -1) -> np.ndarray:
    """``out[m] = sum_k coeffs[k] exp(sign * i * y_m * x_k)`` for lattices ``x`` (src), ``y`` (dst)."""
    x0, h = src.lo, src.step
    y0, dy = dst.lo, dst.step
    a = np.exp(-1j * sign * y0 * h)
    w = np.exp(1j * sign * dy * h)
    out = czt(np.asarray(coeffs, dtype=complex), m=dst.n, w=w, a=a)
    return out * np.exp(1j * sign * dst.nodes * x0)


def _check_resolution(t_grid: GridParams, s_grid: GridParams) -> None:
    # s must stay below the Nyquist frequency of t, and the s-spacing must
    # resolve the full t-window without periodic images overlapping.
    if max(abs(s_grid.lo), abs(s_grid.hi)) > np.pi / t_grid.step * (1 + 1e-12):
        raise GridError(f"s-range {s_grid.lo, s_grid.hi} exceeds the Nyquist limit {np.pi / t_grid.step:g}")
    if 2 * np.pi / s_grid.step < (t_grid.hi - t_grid.lo):
        raise GridError("s-spacing too coarse for the t-window (periodic images overlap)")


def fourier_l1(
    g: SampledLine,
    target: GridParams = DEFAULT_S_GRID,
    direction: Direction = "forward",
) -> SampledLine:
    """Fourier transform between a t-lattice and an s-lattice.

    forward: ``g`` lives on a t-grid, ``target`` is the s-grid.
    inverse: ``g`` holds ``g_hat`` on an s-grid, ``target`` is the t-grid;
    the trapezoid sum over s is scaled by ``1 / (2 pi)``.
    """
    if direction == "forward":
        _check_resolution(g.grid, target)
        return SampledLine(target, lattice_sum(g.weighted, g.grid, target, sign=-1))
    if direction == "inverse":
        _check_resolution(target, g.grid)
        vals = lattice_sum(g.weighted, g.grid, target, sign=+1) / (2 * np.pi)
        return SampledLine(target, vals)
    raise ValueError(f"unknown direction {direction!r}")


def convolve(g1: SampledLine, g2: SampledLine, tail_tol: float = TAIL_TOL) -> SampledLine:
    """Linear convolution ``(g1 * g2)(t) = int g1(tau) g2(t - tau) dtau``.

    Works on quadrature masses, so the result's mass vector is the exact
    discrete convolution and ``fourier(g1 * g2) = fourier(g1) fourier(g2)``
    holds to rounding on the lattice.  The part of the full convolution
    falling outside the common grid is reported as ``truncation_mass``; if it
    exceeds ``tail_tol * |g1|_1 |g2|_1`` a :class:`GridTooSmallError` is raised.
    """
    g1.grid.require_same(g2.grid, "convolution grids")
    grid = g1.grid
    z = grid.zero_index
    m1, m2 = g1.weighted, g2.weighted
    if not np.any(m1) or not np.any(m2):
        zero = np.zeros(grid.n, dtype=np.result_type(m1, m2))
        return SampledLine(grid, zero, zero.copy())
    full = fftconvolve(m1, m2)
    masses = full[z : z + grid.n]
    lost_lo = float(np.abs(full[:z]).sum())
    lost_hi = float(np.abs(full[z + grid.n :]).sum())
    scale = float(np.abs(m1).sum() * np.abs(m2).sum())
    if lost_lo + lost_hi > tail_tol * scale:
        end = "lower" if lost_lo >= lost_hi else "upper"
        raise GridTooSmallError(
            f"convolution loses mass {lost_lo + lost_hi:.3g} (> {tail_tol:g} x {scale:.4g}) past the {end} t end",
            end,
            lost_lo + lost_hi,
        )
    return SampledLine(grid, masses / grid.step, masses, lost_lo + lost_hi)


def mellin_halfline(
    g: SampledLine,
    target: GridParams,
    direction: Direction = "forward",
) -> SampledLine:
    """Unitary Mellin transform ``(M f)(s) = (2 pi)^{-1/2} int_0^inf f(x) x^{-1/2-is} dx``.

    A half-line function is carried as ``f(e^{-tau})`` on a tau-lattice.
    With ``F(tau) = f(e^{-tau}) e^{-tau/2}`` the transform is
    ``(2 pi)^{-1/2} int F(tau) e^{i s tau} dtau``, an L2 isometry.

    forward: ``g`` on a tau-grid (values ``f(e^{-tau})``), ``target`` = s-grid.
    inverse: ``g`` on an s-grid, ``target`` = tau-grid; returns ``f(e^{-tau})``.
    """
    if direction == "forward":
        _check_resolution(g.grid, target)
        tau = g.grid.nodes
        if g.masses is not None:
            coeffs = g.masses * np.exp(-tau / 2)
        else:
            coeffs = g.grid.step * np.asarray(g.values) * np.exp(-tau / 2)
        vals = lattice_sum(coeffs, g.grid, target, sign=+1) / np.sqrt(2 * np.pi)
        return SampledLine(target, vals)
    if direction == "inverse":
        _check_resolution(target, g.grid)
        F = lattice_sum(g.weighted, g.grid, target, sign=-1) / np.sqrt(2 * np.pi)
        return SampledLine(target, F * np.exp(target.nodes / 2))
    raise ValueError(f"unknown direction {direction!r}")
