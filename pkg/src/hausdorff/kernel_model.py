"""Scaling functions, raw kernels and the log-coordinate kernel pair.

An operator ``(H f)(x) = int K(u) f(x a(u)) du`` is stored through the pair

    K_plus(t)  = K( e^{-t}) e^{-t} / |a(e^{-t})|^{1/2}
    K_minus(t) = K(-e^{-t}) e^{-t} / |a(e^{-t})|^{1/2}

sampled on a uniform t-lattice.  Alongside point samples the pair keeps
per-node quadrature masses (break-aware corrected trapezoid weights times
samples); masses are what the algebra and the transforms consume.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .grid import DEFAULT_T_GRID, GridParams
from .quadrature import DEFAULT_ORDER, DivergenceError, adaptive_integral, plan_weights

__all__ = [
    "KernelError",
    "InadmissibleKernelError",
    "GridTooSmallError",
    "AuxFunction",
    "KernelSpec",
    "KernelPair",
    "BoundednessReport",
    "TAIL_TOL",
    "to_log_pair",
    "from_log_pair",
    "admissibility",
    "read_table",
]

TAIL_TOL = 1e-8
_LOG_LIMIT = 700.0  # |t| beyond this leaves the double range for u = e^{-t}


class KernelError(ValueError):
    """Base class for kernel/scaling construction and evaluation errors."""


class InadmissibleKernelError(KernelError):
    def __init__(self, report: "BoundednessReport"):
        super().__init__(f"kernel is not admissible: {report}")
        self.report = report


class GridTooSmallError(KernelError):
    def __init__(self, message: str, end: str = "", mass: float = float("nan")):
        super().__init__(message)
        self.end = end
        self.mass = mass


def read_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``u,value`` CSV with strictly increasing ``u > 0``."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"table file not found: {path}")
    us, vals = [], []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                u, v = float(row[0]), complex(row[1].strip().replace(" ", ""))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header
                raise KernelError(f"{path}:{lineno}: expected 'u,value', got {row!r}") from None
            us.append(u)
            vals.append(v)
    u = np.array(us)
    v = np.array(vals)
    if len(u) < 2:
        raise KernelError(f"{path}: need at least two rows")
    if np.any(u <= 0) or np.any(np.diff(u) <= 0):
        raise KernelError(f"{path}: u column must be strictly increasing and positive")
    if np.all(v.imag == 0):
        v = v.real
    return u, v


# ---------------------------------------------------------------------------
# scaling function a


@dataclass(frozen=True)
class AuxFunction:
    """Odd scaling function ``a``, given only on ``u > 0``.

    ``a(-u) = -a(u)`` is applied by :meth:`__call__`; the positive-axis
    callables are never handed negative arguments.
    """

    pos_eval: Callable[[np.ndarray], np.ndarray]
    pos_inverse: Callable[[np.ndarray], np.ndarray]
    family_tag: str = "custom"
    params: tuple = ()
    breaks: tuple = ()
    # subdivision points for adaptive quadrature only (not lattice breaks)
    quad_points: tuple = ()

    def __post_init__(self):
        self.validate()

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.sign(u) * self.pos_eval(np.abs(u))

    def half_root(self, t):
        """``|a(e^{-t})|^{1/2}`` in log coordinates."""
        return np.sqrt(self.pos_eval(np.exp(-np.asarray(t, dtype=float))))

    def log_shift(self, t):
        """``-ln a(e^{-t})``: multiplication by ``a(u)`` is this shift in t."""
        t = np.asarray(t, dtype=float)
        if self.family_tag == "reciprocal":
            return -t
        if self.family_tag == "power":
            return -self.params[0] * t
        return -np.log(self.pos_eval(np.exp(-t)))

    def validate(self) -> None:
        u = np.exp(np.linspace(-64.0, 64.0, 129))
        with np.errstate(all="ignore"):
            v = np.asarray(self.pos_eval(u), dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise KernelError("scaling function must be finite and positive on (0, inf)")
        if np.any(np.diff(v) >= 0):
            raise KernelError("scaling function must be strictly decreasing on (0, inf)")
        if not v[-1] < 1e-6 * v[0]:
            raise KernelError("scaling function does not decay to 0 at infinity")
        back = np.asarray(self.pos_inverse(v), dtype=float)
        if np.max(np.abs(back - u) / u) > 1e-10:
            raise KernelError("pos_inverse is not the inverse of pos_eval")

    @classmethod
    def reciprocal(cls) -> "AuxFunction":
        return cls(lambda u: 1.0 / u, lambda v: 1.0 / v, "reciprocal")

    @classmethod
    def power(cls, gamma: float) -> "AuxFunction":
        if not gamma > 0:
            raise KernelError(f"power scaling needs gamma > 0, got {gamma}")
        g = float(gamma)
        return cls(lambda u: u ** (-g), lambda v: v ** (-1.0 / g), "power", (g,))

    @classmethod
    def from_table(cls, u: np.ndarray, values: np.ndarray) -> "AuxFunction":
        """Monotone cubic (PCHIP) interpolation of a table in log-log space.

        Outside the table the log-log line continues with the end slopes, so
        the scaling is C^1 and no quadrature breaks are needed.
        """
        u = np.asarray(u, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(values <= 0):
            raise KernelError("scaling table values must be positive")
        lu, lv = np.log(u), np.log(values)
        if np.any(np.diff(lv) >= 0):
            raise KernelError("scaling table values must be strictly decreasing")
        spline = PchipInterpolator(lu, lv, extrapolate=False)
        slope = spline.derivative()
        s_lo, s_hi = float(slope(lu[0])), float(slope(lu[-1]))

        def log_fwd(lx):
            out = spline(np.clip(lx, lu[0], lu[-1]))
            out = np.where(lx < lu[0], lv[0] + s_lo * (lx - lu[0]), out)
            return np.where(lx > lu[-1], lv[-1] + s_hi * (lx - lu[-1]), out)

        def log_slope(lx):
            out = slope(np.clip(lx, lu[0], lu[-1]))
            return np.where(lx < lu[0], s_lo, np.where(lx > lu[-1], s_hi, out))

        def fwd(x):
            return np.exp(log_fwd(np.log(np.asarray(x, dtype=float))))

        def inv(y):
            ly = np.log(np.asarray(y, dtype=float))
            lx = np.interp(ly, lv[::-1], lu[::-1])
            lx = np.where(ly > lv[0], lu[0] + (ly - lv[0]) / s_lo, lx)
            lx = np.where(ly < lv[-1], lu[-1] + (ly - lv[-1]) / s_hi, lx)
            for _ in range(8):
                lx = lx - (log_fwd(lx) - ly) / log_slope(lx)
            return np.exp(lx)

        return cls(fwd, inv, "custom", (), (), tuple(u))

    @classmethod
    def from_file(cls, path: str | Path) -> "AuxFunction":
        u, v = read_table(path)
        if np.iscomplexobj(v):
            raise KernelError(f"{path}: scaling values must be real")
        return cls.from_table(u, v)


# ---------------------------------------------------------------------------
# kernels


def _positive_only(func):
    def wrapped(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        pos = u > 0
        with np.errstate(all="ignore"):
            out[pos] = func(u[pos])
        return out

    return wrapped


@dataclass(frozen=True)
class KernelSpec:
    """Pointwise kernel ``K`` on ``R \\ {0}`` plus the points where it may jump.

    ``eval`` is vectorised over numpy arrays.  ``breaks`` lists the
    ``u``-values (either sign) where ``K`` or a derivative may be
    discontinuous; quadrature is split there.  ``log_table`` is set for
    kernels that are themselves sampled in log coordinates.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    preset_tag: str = "custom"
    params: tuple = ()
    breaks: tuple = ()
    log_table: object = None

    def __call__(self, u):
        return self.eval(np.asarray(u, dtype=float))

    @classmethod
    def hardy(cls) -> "KernelSpec":
        return cls(_positive_only(lambda u: np.where(u >= 1.0, u**-2.0, 0.0)), "hardy", (), (1.0,))

    @classmethod
    def truncated_power(cls, alpha: float, cutoff: float) -> "KernelSpec":
        """``K(u) = u**alpha`` for ``u >= cutoff``, zero elsewhere."""
        if not cutoff > 0:
            raise KernelError("truncated_power needs cutoff > 0")
        a, c = float(alpha), float(cutoff)
        return cls(
            _positive_only(lambda u: np.where(u >= c, u**a, 0.0)), "truncated_power", (a, c), (c,)
        )

    @classmethod
    def log_gaussian(cls, sigma: float = 1.0) -> "KernelSpec":
        """Gaussian in ``ln u`` with the ``u**-1.5`` factor that makes ``K_plus``
        a normal density when ``a(u) = 1/u``."""
        if not sigma > 0:
            raise KernelError("log_gaussian needs sigma > 0")
        sg = float(sigma)
        norm = 1.0 / (sg * math.sqrt(2.0 * math.pi))
        return cls(
            _positive_only(lambda u: norm * u**-1.5 * np.exp(-0.5 * (np.log(u) / sg) ** 2)),
            "log_gaussian",
            (sg,),
        )

    @classmethod
    def zero(cls) -> "KernelSpec":
        return cls(lambda u: np.zeros_like(np.asarray(u, dtype=float)), "zero")

    @classmethod
    def custom(cls, func: Callable, breaks: Sequence[float] = ()) -> "KernelSpec":
        return cls(func, "custom", (), tuple(float(b) for b in breaks))

    @classmethod
    def from_table(cls, u: np.ndarray, values: np.ndarray) -> "KernelSpec":
        """Kernel on ``u > 0`` interpolated linearly in ``ln u``; zero off the table."""
        lu = np.log(np.asarray(u, dtype=float))
        vals = np.asarray(values)

        def func(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros(x.shape, dtype=vals.dtype)
            pos = x > 0
            lx = np.log(x[pos])
            inside = (lx >= lu[0]) & (lx <= lu[-1])
            res = np.zeros(lx.shape, dtype=vals.dtype)
            if np.iscomplexobj(vals):
                res[inside] = np.interp(lx[inside], lu, vals.real) + 1j * np.interp(lx[inside], lu, vals.imag)
            else:
                res[inside] = np.interp(lx[inside], lu, vals)
            out[pos] = res
            return out

        return cls(func, "custom", (), tuple(np.exp(lu)))

    @classmethod
    def from_file(cls, path: str | Path) -> "KernelSpec":
        u, v = read_table(path)
        return cls.from_table(u, v)

    def symmetrized(self, parity: int = 1) -> "KernelSpec":
        """Extend the ``u > 0`` part to ``u < 0`` as ``K(-u) = parity * K(u)``."""
        base = self.eval

        def func(u):
            u = np.asarray(u, dtype=float)
            return np.where(u > 0, base(np.abs(u)), parity * base(np.abs(u)))

        pos_breaks = tuple(b for b in self.breaks if b > 0)
        return KernelSpec(func, self.preset_tag, self.params, pos_breaks + tuple(-b for b in pos_breaks))


# ---------------------------------------------------------------------------
# kernel pair


@dataclass(frozen=True)
class KernelPair:
    """Sampled ``(K_plus, K_minus)`` on a uniform t-lattice.

    ``kplus``/``kminus`` are point samples; ``mass_plus``/``mass_minus``
    are the per-node quadrature masses, so that ``sum(mass * g(t))``
    approximates ``int K(t) g(t) dt`` for smooth ``g``.
    """

    grid: GridParams
    kplus: np.ndarray
    kminus: np.ndarray
    mass_plus: np.ndarray
    mass_minus: np.ndarray
    l1_plus: float
    l1_minus: float
    tail_mass: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def t_min(self) -> float:
        return self.grid.lo

    @property
    def t_max(self) -> float:
        return self.grid.hi

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def l1(self) -> float:
        return self.l1_plus + self.l1_minus

    @classmethod
    def from_masses(cls, grid: GridParams, mass_plus, mass_minus, tail_mass: float = 0.0, **meta) -> "KernelPair":
        """Pair whose point samples are the densities ``mass / h``."""
        h = grid.step
        mp = np.asarray(mass_plus)
        mm = np.asarray(mass_minus)
        return cls(
            grid, mp / h, mm / h, mp, mm,
            float(np.abs(mp).sum()), float(np.abs(mm).sum()), float(tail_mass), dict(meta),
        )

    @classmethod
    def zeros(cls, grid: GridParams = DEFAULT_T_GRID) -> "KernelPair":
        z = np.zeros(grid.n)
        return cls(grid, z, z, z, z, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class BoundednessReport:
    """Outcome of the integrability test ``int |K(u)| / |a(u)|^{1/2} du < inf``."""

    integral_value: float
    admissible: bool
    quadrature_error_estimate: float

    def __str__(self):
        return (
            f"integral={self.integral_value:.6g} err={self.quadrature_error_estimate:.2g} "
            f"admissible={self.admissible}"
        )


def _log_component(
    k: KernelSpec, a: AuxFunction, sign: int, strict: bool = True
) -> Callable[[np.ndarray], np.ndarray]:
    def comp(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        ok = np.abs(t) < _LOG_LIMIT
        tt = t[ok]
        u = np.exp(-tt)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
            kv = np.asarray(k.eval(sign * u))
            # u / |a(u)|^{1/2} = exp(-t + A(t)/2), A = log_shift
            val = kv * np.exp(-tt + 0.5 * a.log_shift(tt))
        out[ok] = np.where(kv == 0, 0.0, val)
        if strict and np.any(~np.isfinite(out)):
            bad = t[~np.isfinite(out)][0]
            raise KernelError(f"kernel evaluation produced non-finite value at u={sign * math.exp(-bad):g}")
        return out

    return comp


def _t_breaks(k: KernelSpec, a: AuxFunction, sign: int) -> list[float]:
    out = [-math.log(abs(b)) for b in k.breaks if b != 0 and np.sign(b) == sign]
    out += [-math.log(b) for b in a.breaks]
    return out


def _t_points(k: KernelSpec, a: AuxFunction, sign: int) -> list[float]:
    """Breaks plus the scaling's quadrature-only subdivision points, in t."""
    out = _t_breaks(k, a, sign)
    out += [-math.log(b) for b in a.quad_points]
    return out


def _real_if_possible(x: np.ndarray) -> np.ndarray:
    return x.real.copy() if np.all(x.imag == 0) else x


def admissibility(k: KernelSpec, a: AuxFunction) -> BoundednessReport:
    """Adaptive-quadrature test of ``int |K(u)| |a(u)|^{-1/2} du`` on both half-lines.

    Works in the exact substitution ``u = +-e^{-t}``, splitting at ``u = +-1``
    (``t = 0``) and at every declared break.  Divergence (no convergence or a
    partial sum above ``1e12``) gives ``integral_value = inf``.
    """
    if k.preset_tag == "zero":
        return BoundednessReport(0.0, True, 0.0)
    if k.log_table is not None:
        grid, kp, km = k.log_table
        h = grid.step
        total = float(h * (np.abs(kp).sum() + np.abs(km).sum()))
        return BoundednessReport(total, True, 0.0)
    total, err = 0.0, 0.0
    for sign in (1, -1):
        comp = _log_component(k, a, sign, strict=False)
        pts = sorted(set([0.0] + _t_points(k, a, sign)))

        def f(t, comp=comp):
            return float(np.abs(comp(np.array([t]))[0]))

        try:
            with np.errstate(invalid="ignore"):
                val, e = adaptive_integral(f, -np.inf, np.inf, points=pts)
        except DivergenceError:
            return BoundednessReport(float("inf"), False, float("inf"))
        total += val
        err += e
    ok = np.isfinite(total) and err <= 1e-6 * max(total, 1e-300) + 1e-14
    return BoundednessReport(total, bool(ok), err)


def _tail_mass(comp, a_end: float, b_end: float, pts_lo, pts_hi) -> tuple[float, float]:
    def f(t):
        return float(np.abs(comp(np.array([t]))[0]))

    lo, _ = adaptive_integral(f, -np.inf, a_end, points=pts_lo)
    hi, _ = adaptive_integral(f, b_end, np.inf, points=pts_hi)
    return lo, hi


def to_log_pair(
    k: KernelSpec,
    a: AuxFunction,
    grid: GridParams = DEFAULT_T_GRID,
    tail_tol: float = TAIL_TOL,
    order: int = DEFAULT_ORDER,
) -> KernelPair:
    """Sample ``K_plus``/``K_minus`` on ``grid`` and attach break-aware masses.

    Raises :class:`InadmissibleKernelError` when the integrability test fails
    and :class:`GridTooSmallError` when the L1 mass outside the grid exceeds
    ``tail_tol`` times the total.
    """
    report = admissibility(k, a)
    if not report.admissible:
        raise InadmissibleKernelError(report)
    if k.preset_tag == "zero":
        return KernelPair.zeros(grid)
    t = grid.nodes
    samples, masses, l1s = [], [], []
    tails = [0.0, 0.0]
    for sign in (1, -1):
        comp = _log_component(k, a, sign)
        if k.log_table is not None:
            plan = plan_weights(grid, ())
        else:
            plan = plan_weights(grid, _t_breaks(k, a, sign), order)
        samples.append(_real_if_possible(comp(t)))
        masses.append(_real_if_possible(plan.integrate(comp)))
        l1s.append(float(plan.integrate(lambda x: np.abs(comp(x))).sum()))
        if k.log_table is None and l1s[-1] > 0:
            brk = _t_points(k, a, sign)
            lo, hi = _tail_mass(
                comp, grid.lo, grid.hi, [b for b in brk if b < grid.lo], [b for b in brk if b > grid.hi]
            )
            tails[0] += lo
            tails[1] += hi
    total_l1 = sum(l1s)
    tail = tails[0] + tails[1]
    if tail > tail_tol * total_l1:
        end = "lower (large |u|)" if tails[0] >= tails[1] else "upper (small |u|)"
        raise GridTooSmallError(
            f"L1 mass {tail:.3g} outside the t-grid exceeds {tail_tol:g} x {total_l1:.6g}; "
            f"extend the {end} end",
            end,
            tail,
        )
    return KernelPair(grid, samples[0], samples[1], masses[0], masses[1], l1s[0], l1s[1], tail)


def from_log_pair(p: KernelPair, a: AuxFunction) -> KernelSpec:
    """Pull a kernel pair back to a pointwise kernel ``Q(u)``.

    ``Q(+-e^{-t}) = Q_pm(t) e^{t} |a(e^{-t})|^{1/2}`` with linear interpolation
    in t and zero outside the grid.
    """
    grid = p.grid
    tol = 1e-9 * grid.step
    t_nodes = grid.nodes
    comps = {1: p.kplus, -1: p.kminus}

    def interp(tq, vals):
        inside = (tq >= grid.lo - tol) & (tq <= grid.hi + tol)
        tc = np.clip(tq, grid.lo, grid.hi)
        if np.iscomplexobj(vals):
            out = np.interp(tc, t_nodes, vals.real) + 1j * np.interp(tc, t_nodes, vals.imag)
        else:
            out = np.interp(tc, t_nodes, vals)
        return np.where(inside, out, 0.0)

    def func(u):
        u = np.asarray(u, dtype=float)
        dtype = complex if (np.iscomplexobj(p.kplus) or np.iscomplexobj(p.kminus)) else float
        out = np.zeros(u.shape, dtype=dtype)
        for sign, vals in comps.items():
            sel = (u > 0) if sign == 1 else (u < 0)
            if not np.any(sel):
                continue
            au = np.abs(u[sel])
            tq = -np.log(au)
            out[sel] = interp(tq, vals) / au * np.sqrt(a.pos_eval(au))
        return out

    return KernelSpec(func, "custom", (), (), (grid, p.kplus, p.kminus))
