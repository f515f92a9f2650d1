"""Spectrum as the closure of the two eigenvalue curves plus the origin."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symbol import Symbol

__all__ = ["SpectralCurve", "spectrum_curve", "distance_to_spectrum", "resolvent_regularity"]


@dataclass(frozen=True)
class SpectralCurve:
    s: np.ndarray
    branch_phi: np.ndarray
    branch_phi_star: np.ndarray
    includes_zero: bool = True

    @property
    def bounding_radius(self) -> float:
        pts = self.points()
        return float(np.abs(pts).max()) if len(pts) else 0.0

    def points(self) -> np.ndarray:
        """All sampled points of both branches followed by the adjoined 0."""
        return np.concatenate([self.branch_phi, self.branch_phi_star, [0.0 + 0.0j]])


def spectrum_curve(sym: Symbol) -> SpectralCurve:
    return SpectralCurve(sym.s.copy(), sym.phi.copy(), sym.phi_star.copy(), True)


def _segment_distance(lam: complex, p: np.ndarray) -> float:
    if len(p) == 1:
        return float(abs(lam - p[0]))
    a, b = p[:-1], p[1:]
    d = b - a
    dd = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        tpar = np.where(dd > 0, ((lam - a) * np.conj(d)).real / dd, 0.0)
    tpar = np.clip(tpar, 0.0, 1.0)
    return float(np.abs(lam - (a + tpar * d)).min())


def distance_to_spectrum(curve: SpectralCurve, lam: complex) -> float:
    """Distance from ``lam`` to the polygonal closure of both branches and 0."""
    return min(
        abs(lam),
        _segment_distance(lam, curve.branch_phi),
        _segment_distance(lam, curve.branch_phi_star),
    )


def resolvent_regularity(sym: Symbol, lam: complex) -> float:
    """``min_s |(lam - phi_plus)^2 - phi_minus^2| = min_s |lam - phi| |lam - phi_star|``."""
    delta = (lam - sym.phi_plus) ** 2 - sym.phi_minus**2
    return float(np.abs(delta).min())
