"""Algebra operations on operators sharing one scaling function.

Composition is convolution of kernel pairs:

    Q_plus  = K_plus * L_plus  + K_minus * L_minus
    Q_minus = K_plus * L_minus + K_minus * L_plus
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel_model import TAIL_TOL, KernelError, KernelPair
from .symbol import OperatorHandle, compute_symbol, same_aux
from .transforms import SampledLine, convolve

__all__ = ["IncompatibleAlgebraError", "compose", "lincomb", "check_commutativity", "CommutativityReport"]


class IncompatibleAlgebraError(KernelError):
    """Operators built on different scaling functions do not share an algebra."""


def _check_compatible(hk: OperatorHandle, hl: OperatorHandle) -> None:
    if not same_aux(hk.aux, hl.aux):
        raise IncompatibleAlgebraError(
            f"scaling functions differ ({hk.aux.family_tag}{hk.aux.params} vs "
            f"{hl.aux.family_tag}{hl.aux.params})"
        )
    hk.grid.require_same(hl.grid, "kernel grids")
    hk.s_grid.require_same(hl.s_grid, "symbol grids")


def _line(pair: KernelPair, which: str) -> SampledLine:
    if which == "+":
        return SampledLine(pair.grid, pair.kplus, pair.mass_plus)
    return SampledLine(pair.grid, pair.kminus, pair.mass_minus)


def compose(hk: OperatorHandle, hl: OperatorHandle, tail_tol: float = TAIL_TOL) -> OperatorHandle:
    """The operator ``H_K H_L`` as a new handle (kernel ``Q`` in pair form)."""
    _check_compatible(hk, hl)
    kp, km = _line(hk.pair, "+"), _line(hk.pair, "-")
    lp, lm = _line(hl.pair, "+"), _line(hl.pair, "-")
    terms = {
        "pp": convolve(kp, lp, tail_tol),
        "mm": convolve(km, lm, tail_tol),
        "pm": convolve(kp, lm, tail_tol),
        "mp": convolve(km, lp, tail_tol),
    }
    q_plus = terms["pp"].weighted + terms["mm"].weighted
    q_minus = terms["pm"].weighted + terms["mp"].weighted
    lost = sum(t.truncation_mass for t in terms.values())
    pair = KernelPair.from_masses(hk.grid, q_plus, q_minus, lost)
    return OperatorHandle(pair, hk.aux, hk.s_grid)


def lincomb(alpha: complex, hk: OperatorHandle, beta: complex, hl: OperatorHandle) -> OperatorHandle:
    """``alpha H_K + beta H_L``; samples and masses combine linearly."""
    _check_compatible(hk, hl)
    p, q = hk.pair, hl.pair

    def comb(x, y):
        out = alpha * x + beta * y
        return out.real.copy() if np.isrealobj(x) and np.isrealobj(y) and np.imag(alpha) == 0 and np.imag(beta) == 0 else out

    mp, mm = comb(p.mass_plus, q.mass_plus), comb(p.mass_minus, q.mass_minus)
    pair = KernelPair(
        p.grid,
        comb(p.kplus, q.kplus),
        comb(p.kminus, q.kminus),
        mp,
        mm,
        float(np.abs(mp).sum()),
        float(np.abs(mm).sum()),
        abs(alpha) * p.tail_mass + abs(beta) * q.tail_mass,
    )
    return OperatorHandle(pair, hk.aux, hk.s_grid)


@dataclass(frozen=True)
class CommutativityReport:
    max_symbol_deviation: float
    max_kernel_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_symbol_deviation <= self.tol and self.max_kernel_deviation <= self.tol


def check_commutativity(hk: OperatorHandle, hl: OperatorHandle, tol: float = 1e-8) -> CommutativityReport:
    """Compare ``H_K H_L`` with ``H_L H_K`` on symbols and on ``Q_pm`` masses.

    Deviations are relative to the largest entry of the compared arrays.
    """
    ab, ba = compose(hk, hl), compose(hl, hk)
    sa, sb = compute_symbol(ab), compute_symbol(ba)

    def rel(x, y):
        scale = max(np.abs(x).max(), np.abs(y).max())
        return float(np.abs(x - y).max() / scale) if scale > 0 else 0.0

    sym_dev = max(rel(sa.phi_plus, sb.phi_plus), rel(sa.phi_minus, sb.phi_minus))
    ker_dev = max(rel(ab.pair.mass_plus, ba.pair.mass_plus), rel(ab.pair.mass_minus, ba.pair.mass_minus))
    return CommutativityReport(sym_dev, ker_dev, tol)
