"""Holomorphic functional calculus through contour integrals of the resolvent.

For ``Phi = [[z2, z1], [z1, z2]]`` and ``Delta(lam) = (lam - z2)^2 - z1^2``,

    F1(z1, z2) = 1/(2 pi i) \\oint F(lam) (lam - z2) / Delta dlam     (diagonal)
    F2(z1, z2) = z1/(2 pi i) \\oint F(lam) / Delta dlam              (off-diagonal)

The off-diagonal sign is ``+z1``: inverting ``lam - Phi`` gives ``+z1 / Delta``
off the diagonal.  With eigenprojections this is
``F1 = (F(z2 + z1) + F(z2 - z1)) / 2`` and ``F2 = (F(z2 + z1) - F(z2 - z1)) / 2``.

``apply_function`` evaluates ``F1, F2`` on the discrete Fourier lattice of
the kernel masses, so its output is an exact element of the same discrete
convolution algebra that ``compose`` works in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .kernel_model import TAIL_TOL, GridTooSmallError, KernelPair
from .spectrum import SpectralCurve
from .symbol import OperatorHandle

__all__ = [
    "ContourError",
    "ContractViolation",
    "Contour",
    "HoloFunction",
    "winding_number",
    "auto_contour",
    "f1_f2_contour",
    "f1_f2_eigen",
    "apply_function",
    "lattice_symbol",
]

DEFAULT_NODES = 1024
_CHUNK = 4096


class ContourError(ValueError):
    """The contour is not admissible for the requested evaluation."""


class ContractViolation(ValueError):
    """``F(0) != 0``: the result would leave the algebra."""


@dataclass(frozen=True)
class Contour:
    """Closed, positively oriented contour with quadrature nodes ``nodes`` and
    complex weights ``dz`` (so ``\\oint g = sum(g(nodes) * dz)``).

    ``kind`` is ``"circle"`` (params: center, radius) or ``"polygon"``
    (params: vertices); ``n_quad`` is the node count per circle or per edge.
    """

    kind: str
    params: tuple
    n_quad: int
    nodes: np.ndarray
    dz: np.ndarray

    @classmethod
    def circle(cls, center: complex, radius: float, n_quad: int = DEFAULT_NODES) -> "Contour":
        if not radius > 0:
            raise ContourError(f"circle radius must be positive, got {radius}")
        theta = 2 * np.pi * np.arange(n_quad) / n_quad
        e = np.exp(1j * theta)
        nodes = center + radius * e
        dz = 1j * radius * e * (2 * np.pi / n_quad)
        return cls("circle", (complex(center), float(radius)), n_quad, nodes, dz)

    @classmethod
    def polygon(cls, vertices: Sequence[complex], n_quad: int = 256, panel: int = 16) -> "Contour":
        """Counter-clockwise polygon; each edge carries ``n_quad`` Gauss-Legendre
        nodes split into panels of ``panel`` nodes."""
        v = np.asarray(vertices, dtype=complex)
        area = 0.5 * np.sum(v.real * np.roll(v.imag, -1) - np.roll(v.real, -1) * v.imag)
        if area <= 0:
            raise ContourError("polygon must be counter-clockwise with positive area")
        n_panels = max(1, n_quad // panel)
        x, w = np.polynomial.legendre.leggauss(panel)
        nodes, dz = [], []
        for a, b in zip(v, np.roll(v, -1)):
            edges = np.linspace(0.0, 1.0, n_panels + 1)
            for p0, p1 in zip(edges[:-1], edges[1:]):
                tt = p0 + (p1 - p0) * (x + 1) / 2
                nodes.append(a + (b - a) * tt)
                dz.append((b - a) * (p1 - p0) / 2 * w)
        return cls("polygon", tuple(complex(z) for z in v), n_panels * panel,
                   np.concatenate(nodes), np.concatenate(dz))

    @classmethod
    def rectangle(cls, x0: float, x1: float, y0: float, y1: float, n_quad: int = 256) -> "Contour":
        return cls.polygon([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)], n_quad)

    def refined(self) -> "Contour":
        if self.kind == "circle":
            return Contour.circle(*self.params, n_quad=2 * self.n_quad)
        return Contour.polygon(self.params, n_quad=2 * self.n_quad)

    def path(self) -> np.ndarray:
        """Closed point sequence tracing the contour (for winding numbers)."""
        if self.kind == "circle":
            return self.nodes
        pts = []
        v = np.asarray(self.params)
        for a, b in zip(v, np.roll(v, -1)):
            pts.append(a + (b - a) * np.linspace(0, 1, 64, endpoint=False))
        return np.concatenate(pts)

    def encloses(self, points) -> np.ndarray:
        """Strict interior test (geometric)."""
        p = np.asarray(points, dtype=complex)
        if self.kind == "circle":
            c, r = self.params
            return np.abs(p - c) < r
        v = np.asarray(self.params)
        inside = np.zeros(p.shape, dtype=bool)
        for a, b in zip(v, np.roll(v, -1)):
            cond = (a.imag > p.imag) != (b.imag > p.imag)
            with np.errstate(divide="ignore", invalid="ignore"):
                xcross = a.real + (p.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            inside ^= cond & (p.real < xcross)
        return inside

    def distance(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=complex)
        if self.kind == "circle":
            c, r = self.params
            return np.abs(np.abs(p - c) - r)
        v = np.asarray(self.params)
        best = np.full(p.shape, np.inf)
        for a, b in zip(v, np.roll(v, -1)):
            d = b - a
            t = np.clip(((p - a) * np.conj(d)).real / abs(d) ** 2, 0, 1)
            best = np.minimum(best, np.abs(p - (a + t * d)))
        return best


def winding_number(contour: Contour, points) -> np.ndarray:
    """Discrete argument principle: total change of ``arg(path - p)`` over ``2 pi``."""
    p = np.atleast_1d(np.asarray(points, dtype=complex))
    path = contour.path()
    out = np.empty(p.shape, dtype=float)
    for i in range(0, len(p), 512):
        chunk = p[i : i + 512]
        z = path[None, :] - chunk[:, None]
        dang = np.angle(np.roll(z, -1, axis=1) / z)
        out[i : i + 512] = dang.sum(axis=1) / (2 * np.pi)
    return np.rint(out).astype(int)


@dataclass(frozen=True)
class HoloFunction:
    """A function holomorphic on ``region`` (``None`` = entire) except at ``poles``.

    ``region`` is a vectorised predicate; the calculus checks it on the
    contour nodes and on a coarse lattice of interior points, and refuses
    contours that enclose a declared pole.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    name_tag: str = "custom"
    region: Callable[[np.ndarray], np.ndarray] | None = None
    poles: tuple = ()

    def __call__(self, z):
        return self.eval(np.asarray(z, dtype=complex))

    @property
    def value_at_zero(self) -> complex:
        return complex(self.eval(np.zeros(1, dtype=complex))[0])

    @classmethod
    def identity(cls) -> "HoloFunction":
        return cls(lambda z: z, "identity")

    @classmethod
    def power(cls, k: int) -> "HoloFunction":
        return cls(lambda z: z**k, {2: "square", 3: "cube"}.get(k, f"power{k}"))

    @classmethod
    def square(cls) -> "HoloFunction":
        return cls.power(2)

    @classmethod
    def cube(cls) -> "HoloFunction":
        return cls.power(3)

    @classmethod
    def poly(cls, coeffs: Sequence[complex]) -> "HoloFunction":
        """``sum_k coeffs[k] z**k`` (lowest degree first)."""
        c = np.asarray(coeffs, dtype=complex)
        return cls(lambda z: np.polynomial.polynomial.polyval(z, c), "poly:" + ",".join(f"{x:g}" for x in coeffs))

    @classmethod
    def resolvent(cls, mu: complex) -> "HoloFunction":
        """``z / (mu - z)``, holomorphic off ``mu``."""
        return cls(lambda z: z / (mu - z), f"resolvent:{mu}", None, (complex(mu),))


def f1_f2_eigen(F: HoloFunction, z1, z2) -> tuple[np.ndarray, np.ndarray]:
    """Closed form through the eigenvalues ``z2 +- z1``."""
    a = F(np.asarray(z2) + np.asarray(z1))
    b = F(np.asarray(z2) - np.asarray(z1))
    return 0.5 * (a + b), 0.5 * (a - b)


def _contour_sums(F_nodes, contour: Contour, z1: np.ndarray, z2: np.ndarray):
    nodes, dz = contour.nodes, contour.dz
    wf = F_nodes * dz / (2j * np.pi)
    f1 = np.empty(z1.shape, dtype=complex)
    f2 = np.empty(z1.shape, dtype=complex)
    min_delta = np.inf
    for i in range(0, len(z1), _CHUNK):
        a = z1[i : i + _CHUNK, None]
        b = z2[i : i + _CHUNK, None]
        d = nodes[None, :] - b
        delta = d * d - a * a
        min_delta = min(min_delta, float(np.abs(delta).min()))
        inv = 1.0 / delta
        f1[i : i + _CHUNK] = (d * inv) @ wf
        f2[i : i + _CHUNK] = z1[i : i + _CHUNK] * (inv @ wf)
    return f1, f2, min_delta


def _interior_samples(contour: Contour, m: int = 33) -> np.ndarray:
    z = contour.nodes
    xs = np.linspace(z.real.min(), z.real.max(), m)
    ys = np.linspace(z.imag.min(), z.imag.max(), m)
    box = (xs[None, :] + 1j * ys[:, None]).ravel()
    return box[contour.encloses(box)]


def _check_holomorphy(F: HoloFunction, contour: Contour) -> None:
    if F.poles and np.any(contour.encloses(np.array(F.poles))):
        raise ContourError(f"contour encloses a pole of {F.name_tag}")
    if F.poles and contour.distance(np.array(F.poles)).min() < 1e-12:
        raise ContourError(f"contour passes through a pole of {F.name_tag}")
    if F.region is not None:
        pts = np.concatenate([contour.nodes, _interior_samples(contour)])
        if not np.all(F.region(pts)):
            raise ContourError(f"contour or its interior leaves the holomorphy region of {F.name_tag}")


def f1_f2_contour(
    F: HoloFunction,
    contour: Contour,
    z1,
    z2,
    rtol: float = 1e-10,
    max_doublings: int = 6,
    check_inside: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Contour quadrature of ``F1, F2``; node count doubles until two successive
    estimates agree to ``rtol``.  Inputs broadcast; scalars give scalars."""
    scalar = np.ndim(z1) == 0 and np.ndim(z2) == 0
    z1a, z2a = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    shape = z1a.shape
    z1a, z2a = z1a.ravel(), z2a.ravel()
    if check_inside:
        eig = np.concatenate([z2a + z1a, z2a - z1a])
        if not np.all(contour.encloses(eig)):
            raise ContourError("some eigenvalues z2 +- z1 are not strictly inside the contour")
    _check_holomorphy(F, contour)
    scale = max(1.0, float(np.abs(contour.nodes).max()) ** 2)
    prev = None
    cur = contour
    for _ in range(max_doublings + 1):
        f1, f2, min_delta = _contour_sums(F(cur.nodes), cur, z1a, z2a)
        if min_delta < 1e-6 * scale:
            raise ContourError(f"contour passes within {min_delta:.3g} of a pole of the resolvent")
        if prev is not None:
            ref = max(1e-300, float(np.abs(f1).max()), float(np.abs(f2).max()))
            diff = max(float(np.abs(f1 - prev[0]).max()), float(np.abs(f2 - prev[1]).max()))
            if diff <= rtol * max(ref, 1.0):
                break
        prev = (f1, f2)
        cur = cur.refined()
    else:
        raise ContourError(f"contour quadrature did not converge after {max_doublings} doublings")
    f1, f2 = f1.reshape(shape), f2.reshape(shape)
    if scalar:
        return complex(f1[()]), complex(f2[()])
    return f1, f2


def auto_contour(curve: SpectralCurve, margin: float = 0.25, n_quad: int = DEFAULT_NODES) -> Contour:
    """Circle about the centroid of ``{0} U curve`` with radius ``(1 + margin)``
    times the largest distance from that centroid."""
    if not margin > 0:
        raise ContourError("margin must be positive")
    pts = curve.points()
    center = complex(pts.mean())
    rmax = float(np.abs(pts - center).max())
    if rmax == 0.0:
        return Contour.circle(center, margin, n_quad)
    radius = rmax * (1 + margin)
    if radius - rmax < 2 * np.pi * radius / n_quad:
        raise ContourError(f"margin {margin} leaves the contour within node spacing of the spectrum")
    return Contour.circle(center, radius, n_quad)


def lattice_symbol(pair: KernelPair, pad: int = 2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symbol of the masses on the FFT frequency lattice of a ``pad * n`` buffer.

    Returns ``(s, phi_plus, phi_minus)`` in FFT order; ``t = 0`` sits at
    buffer index 0 so the values carry no extra phase.
    """
    grid = pair.grid
    n_buf = pad * grid.n
    z = grid.zero_index
    idx = (np.arange(grid.n) - z) % n_buf
    out = []
    for m in (pair.mass_plus, pair.mass_minus):
        buf = np.zeros(n_buf, dtype=complex)
        buf[idx] = m
        out.append(np.fft.fft(buf))
    s = 2 * np.pi * np.fft.fftfreq(n_buf, d=grid.step)
    return s, out[0], out[1]


def _from_lattice(values: np.ndarray, pair: KernelPair) -> tuple[np.ndarray, float]:
    grid = pair.grid
    n_buf = len(values)
    z = grid.zero_index
    buf = np.fft.ifft(values)
    idx = (np.arange(grid.n) - z) % n_buf
    masses = buf[idx]
    outside = np.ones(n_buf, dtype=bool)
    outside[idx] = False
    return masses, float(np.abs(buf[outside]).sum())


def apply_function(
    F: HoloFunction,
    contour: Contour,
    h: OperatorHandle,
    tail_tol: float = TAIL_TOL,
    pad: int = 2,
) -> OperatorHandle:
    """``F(H)`` for ``F`` holomorphic near the spectrum with ``F(0) = 0``.

    Diagonal values ``F1`` become ``Q_plus`` and off-diagonal ``F2`` become
    ``Q_minus`` after the inverse discrete Fourier transform.  The masses
    falling outside the t-grid (in the padded buffer) are the tail; above
    ``tail_tol`` relative to the total a :class:`GridTooSmallError` is raised.
    """
    f0 = F.value_at_zero
    if abs(f0) > 1e-12:
        raise ContractViolation(f"F(0) = {f0} != 0; F(H) would not lie in the operator algebra")
    if not contour.encloses(0.0):
        raise ContourError("contour must enclose 0")
    s, php, phm = lattice_symbol(h.pair, pad)
    f1, f2 = f1_f2_contour(F, contour, phm, php)
    q_plus, lost_p = _from_lattice(f1, h.pair)
    q_minus, lost_m = _from_lattice(f2, h.pair)
    total = float(np.abs(q_plus).sum() + np.abs(q_minus).sum())
    lost = lost_p + lost_m
    if lost > tail_tol * max(total, 1e-300) and lost > 1e-300:
        raise GridTooSmallError(
            f"F(H) kernel mass {lost:.3g} falls outside the t-grid (> {tail_tol:g} x {total:.4g})",
            "both",
            lost,
        )
    real_in = np.isrealobj(h.pair.mass_plus) and np.isrealobj(h.pair.mass_minus)
    if real_in:
        scale = max(float(np.abs(q_plus).max()), float(np.abs(q_minus).max()), 1e-300)
        if max(float(np.abs(q_plus.imag).max()), float(np.abs(q_minus.imag).max())) <= 1e-13 * scale:
            q_plus, q_minus = q_plus.real.copy(), q_minus.real.copy()
    pair = KernelPair.from_masses(h.grid, q_plus, q_minus, lost)
    return OperatorHandle(pair, h.aux, h.s_grid)
