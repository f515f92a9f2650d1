"""Command-line front end.

    hausdorff <subcommand> CONFIG [--out DIR] [--function F] [--contour C]

The config is a key=value text file (one or more pairs per line, ``#``
comments).  Grids are symmetric lattices ``[-t_max, t_max)`` so that the
origin is a node.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import shlex
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .algebra import check_commutativity, compose
from .engine import (
    GridFunction,
    apply_direct,
    apply_via_symbol,
    conjugation_multiplier,
    estimate_norm,
    multiplier_discrepancy,
)
from .funcalc import Contour, HoloFunction, apply_function, auto_contour, lattice_symbol
from .grid import DEFAULT_S_GRID, DEFAULT_T_GRID, GridParams, is_power_of_two
from .kernel_model import AuxFunction, KernelError, KernelSpec, admissibility
from .spectrum import spectrum_curve
from .symbol import OperatorHandle, multiply_symbols, operator_norm

__all__ = ["ConfigError", "RunConfig", "parse_config", "run", "main", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
SUBCOMMANDS = ("symbol", "norm", "spectrum", "compose", "funcalc", "apply", "verify")
DEFAULT_SEED = 20240917


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    kernel: str = "hardy"
    kernel_path: str | None = None
    parity: str = "none"
    kernel2: str | None = None
    kernel2_path: str | None = None
    kernel2_parity: str = "none"
    scaling: str = "reciprocal"
    scaling_path: str | None = None
    t_max: float = -DEFAULT_T_GRID.lo
    n: int = DEFAULT_T_GRID.n
    s_max: float = -DEFAULT_S_GRID.lo
    n_s: int = DEFAULT_S_GRID.n
    tail_tol: float = 1e-8
    quad_rtol: float = 1e-10
    seed: int = DEFAULT_SEED
    iters: int = 50
    output_dir: str = "out"
    function: str = "square"
    contour: str = "auto:0.25"
    test_function: str = "indicator"
    base_dir: str = field(default=".", compare=False)

    @property
    def t_grid(self) -> GridParams:
        return GridParams.symmetric(self.t_max, self.n)

    @property
    def s_grid(self) -> GridParams:
        return GridParams.symmetric(self.s_max, self.n_s)


_FIELDS = {
    "kernel": str, "path": str, "parity": str,
    "kernel2": str, "kernel2_path": str, "kernel2_parity": str,
    "scaling": str, "scaling_path": str,
    "t_max": float, "n": int, "s_max": float, "n_s": int,
    "tail_tol": float, "quad_rtol": float, "seed": int, "iters": int,
    "output_dir": str, "function": str, "contour": str, "test_function": str,
}
_RENAME = {"path": "kernel_path"}
_CALL = re.compile(r"^([A-Za-z_]\w*)(?:\((.*)\))?$")
_KERNELS = {"hardy": 0, "truncated_power": 2, "log_gaussian": (0, 1), "zero": 0, "custom": 0, "table": 0}
_SCALINGS = {"reciprocal": 0, "power": 1, "table": 0}


def _split_call(text: str, table: dict, what: str) -> tuple[str, list[float]]:
    m = _CALL.match(text.strip())
    if not m or m.group(1) not in table:
        raise ConfigError(f"unknown {what} {text!r}; expected one of {sorted(table)}")
    args = []
    if m.group(2):
        try:
            args = [float(x) for x in m.group(2).split(",")]
        except ValueError:
            raise ConfigError(f"{what} arguments must be numbers: {text!r}") from None
    allowed = table[m.group(1)]
    allowed = allowed if isinstance(allowed, tuple) else (allowed,)
    if len(args) not in allowed:
        raise ConfigError(f"{what} {m.group(1)} takes {allowed} arguments, got {len(args)}")
    return m.group(1), args


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    """Parse and validate a key=value config; errors name the offending line."""
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = re.sub(r"\s*=\s*", "=", raw)
        try:
            tokens = shlex.split(line, comments=True)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        for tok in tokens:
            if "=" not in tok:
                raise ConfigError(f"line {lineno}: expected key=value, got {tok!r}")
            key, val = tok.split("=", 1)
            if key not in _FIELDS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r} (first on line {lines[key]})")
            try:
                conv = _FIELDS[key](val)
                if _FIELDS[key] is int and not float(val).is_integer():
                    raise ValueError
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} expects {_FIELDS[key].__name__}, got {val!r}") from None
            values[_RENAME.get(key, key)] = conv
            lines[key] = lineno

    def where(key):
        return f"line {lines[key]}: " if key in lines else ""

    cfg = RunConfig(base_dir=str(base_dir), **values)
    for key in ("n", "n_s"):
        v = getattr(cfg, key)
        if not is_power_of_two(v):
            raise ConfigError(f"{where(key)}{key}={v} is not a power of two")
    for key in ("tail_tol", "quad_rtol", "t_max", "s_max"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"{where(key)}{key} must be positive")
    if cfg.iters < 20:
        raise ConfigError(f"{where('iters')}iters must be at least 20")
    for key, kpath, pkey in (("kernel", "path", "parity"), ("kernel2", "kernel2_path", "kernel2_parity")):
        spec = getattr(cfg, key)
        if spec is None:
            continue
        try:
            name, _ = _split_call(spec, _KERNELS, "kernel")
        except ConfigError as exc:
            raise ConfigError(f"{where(key)}{exc}") from None
        path = getattr(cfg, _RENAME.get(kpath, kpath))
        if name in ("custom", "table"):
            if path is None:
                raise ConfigError(f"{where(key)}kernel {name} needs {kpath}=FILE")
            _resolve(cfg, path)
        if getattr(cfg, pkey) not in ("none", "even", "odd"):
            raise ConfigError(f"{where(pkey)}{pkey} must be none, even or odd")
    try:
        name, _ = _split_call(cfg.scaling, _SCALINGS, "scaling")
    except ConfigError as exc:
        raise ConfigError(f"{where('scaling')}{exc}") from None
    if name == "table":
        if cfg.scaling_path is None:
            raise ConfigError(f"{where('scaling')}scaling table needs scaling_path=FILE")
        _resolve(cfg, cfg.scaling_path)
    try:
        parse_function(cfg.function)
    except ConfigError as exc:
        raise ConfigError(f"{where('function')}{exc}") from None
    if cfg.test_function not in TEST_FUNCTIONS:
        raise ConfigError(f"{where('test_function')}test_function must be one of {sorted(TEST_FUNCTIONS)}")
    return cfg


def _resolve(cfg: RunConfig, path: str) -> Path:
    p = Path(path)
    if not p.is_absolute():
        p = Path(cfg.base_dir) / p
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {p}")
    return p


def build_kernel(cfg: RunConfig, spec: str, path: str | None, parity: str) -> KernelSpec:
    name, args = _split_call(spec, _KERNELS, "kernel")
    if name == "hardy":
        k = KernelSpec.hardy()
    elif name == "truncated_power":
        k = KernelSpec.truncated_power(*args)
    elif name == "log_gaussian":
        k = KernelSpec.log_gaussian(*args)
    elif name == "zero":
        k = KernelSpec.zero()
    else:
        k = KernelSpec.from_file(_resolve(cfg, path))
    if parity != "none":
        k = k.symmetrized(1 if parity == "even" else -1)
    return k


def build_scaling(cfg: RunConfig) -> AuxFunction:
    name, args = _split_call(cfg.scaling, _SCALINGS, "scaling")
    if name == "reciprocal":
        return AuxFunction.reciprocal()
    if name == "power":
        return AuxFunction.power(args[0])
    return AuxFunction.from_file(_resolve(cfg, cfg.scaling_path))


def build_handle(cfg: RunConfig, second: bool = False) -> OperatorHandle:
    if second:
        k = build_kernel(cfg, cfg.kernel2 or cfg.kernel, cfg.kernel2_path or cfg.kernel_path, cfg.kernel2_parity)
    else:
        k = build_kernel(cfg, cfg.kernel, cfg.kernel_path, cfg.parity)
    return OperatorHandle.from_kernel(k, build_scaling(cfg), cfg.t_grid, cfg.s_grid, cfg.tail_tol)


def parse_function(text: str) -> HoloFunction:
    name, _, arg = text.partition(":")
    if name in ("identity", "square", "cube") and not arg:
        return getattr(HoloFunction, name)()
    try:
        if name == "resolvent":
            return HoloFunction.resolvent(complex(arg))
        if name == "poly":
            return HoloFunction.poly([complex(c) for c in arg.split(",")])
    except ValueError:
        raise ConfigError(f"bad function argument in {text!r}") from None
    raise ConfigError(f"unknown function {text!r}; use square, cube, identity, resolvent:MU or poly:C0,C1,...")


def parse_contour(text: str, handle: OperatorHandle) -> Contour:
    kind, _, arg = text.partition(":")
    try:
        nums = [float(x) for x in arg.split(",")] if arg else []
    except ValueError:
        raise ConfigError(f"bad contour {text!r}") from None
    if kind == "auto" and len(nums) <= 1:
        return auto_contour(spectrum_curve(handle.symbol), nums[0] if nums else 0.25)
    if kind == "circle" and len(nums) == 3:
        return Contour.circle(complex(nums[0], nums[1]), nums[2])
    if kind == "rectangle" and len(nums) == 4:
        return Contour.rectangle(*nums)
    raise ConfigError(f"bad contour {text!r}; use auto:MARGIN, circle:CX,CY,R or rectangle:X0,X1,Y0,Y1")


TEST_FUNCTIONS = {
    "indicator": (lambda x: ((x >= 0) & (x <= 1)).astype(float), (1.0,)),
    "gaussian": (lambda x: np.exp(-x * x), ()),
    "odd_bump": (lambda x: x * np.exp(-x * x), ()),
}


def make_test_function(name: str, grid: GridParams) -> GridFunction:
    f, breaks = TEST_FUNCTIONS[name]
    return GridFunction.from_callable(f, grid, breaks)


# ---------------------------------------------------------------- outputs


class _Writer:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.created: list[Path] = []

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        p = self.out_dir / name
        self.created.append(p)
        return p

    def csv(self, name: str, header: list[str], rows) -> None:
        with open(self._path(name), "w", newline="") as fh:
            fh.write(f"# schema_version={SCHEMA_VERSION}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])

    def json(self, name: str, data: dict) -> None:
        data = {"schema_version": SCHEMA_VERSION, **data}
        with open(self._path(name), "w") as fh:
            json.dump(_clean(data), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def cleanup(self) -> None:
        for p in self.created:
            p.unlink(missing_ok=True)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _check(value: float, limit: float, kind: str = "max") -> dict:
    ok = value <= limit if kind == "max" else value >= limit
    return {"value": float(value), "limit": float(limit), "passed": bool(ok)}


def _symbol_rows(sym):
    return zip(sym.s, sym.phi_plus.real, sym.phi_plus.imag, sym.phi_minus.real, sym.phi_minus.imag)


def _write_symbol(w: _Writer, sym) -> None:
    w.csv("symbol.csv", ["s", "re_phi_plus", "im_phi_plus", "re_phi_minus", "im_phi_minus"], _symbol_rows(sym))


def _write_kernel(w: _Writer, h: OperatorHandle) -> None:
    """``Q(+-e^{-t}) = Q_pm(t) e^{t} |a(e^{-t})|^{1/2}`` at every t node, sorted by u."""
    t = h.grid.nodes
    scale = np.exp(t) * h.aux.half_root(t)
    u = np.exp(-t)
    qp = np.asarray(h.pair.kplus, dtype=complex) * scale
    qm = np.asarray(h.pair.kminus, dtype=complex) * scale
    rows = [(-uu, q.real, q.imag) for uu, q in zip(u, qm)]
    rows += [(uu, q.real, q.imag) for uu, q in zip(u[::-1], qp[::-1])]
    w.csv("kernel.csv", ["u", "re", "im"], rows)


def _rel(x, y, scale=None) -> float:
    s = scale if scale is not None else max(float(np.abs(y).max()), 1e-300)
    return float(np.abs(np.asarray(x) - np.asarray(y)).max() / s)


# ---------------------------------------------------------------- subcommands


def _cmd_symbol(cfg, w, args):
    h = build_handle(cfg)
    sym = h.symbol
    _write_symbol(w, sym)
    return {"symbol_norm": operator_norm(sym)}, {}


def _cmd_norm(cfg, w, args):
    h = build_handle(cfg)
    sym_norm = operator_norm(h.symbol)
    bound = admissibility(h.kernel, h.aux).integral_value
    pi = estimate_norm(h, cfg.iters, cfg.seed)
    checks = {"minkowski": _check(sym_norm, bound * (1 + 1e-6))}
    if h.aux.family_tag == "reciprocal":
        checks["isometry"] = _check(abs(pi - sym_norm), 0.02 * max(sym_norm, 1e-300) if sym_norm else 1e-12)
    return {"symbol_norm": round(sym_norm, 6), "minkowski_bound": bound, "power_iteration": pi}, checks


def _cmd_spectrum(cfg, w, args):
    h = build_handle(cfg)
    curve = spectrum_curve(h.symbol)
    rows = []
    if np.any(curve.branch_phi) or np.any(curve.branch_phi_star):
        for name, br in (("phi", curve.branch_phi), ("phi_star", curve.branch_phi_star)):
            rows += [(name, s, z.real, z.imag) for s, z in zip(curve.s, br)]
    rows.append(("zero_adjoined", "", 0.0, 0.0))
    w.csv("spectrum.csv", ["branch", "s", "re_z", "im_z"], rows)
    return {"bounding_radius": curve.bounding_radius, "points": len(rows)}, {}


def _cmd_compose(cfg, w, args):
    hk, hl = build_handle(cfg), build_handle(cfg, second=True)
    q = compose(hk, hl)
    sq, sk, sl = q.symbol, hk.symbol, hl.symbol
    prod = multiply_symbols(sk, sl)
    nk, nl = operator_norm(sk), operator_norm(sl)
    dev = max(float(np.abs(sq.phi_plus - prod.phi_plus).max()), float(np.abs(sq.phi_minus - prod.phi_minus).max()))
    comm = check_commutativity(hk, hl)
    _write_symbol(w, sq)
    _write_kernel(w, q)
    checks = {
        "homomorphism": _check(dev, 1e-6 * max(nk * nl, 1e-300)),
        "commutativity_symbol": _check(comm.max_symbol_deviation, 1e-8),
        "commutativity_kernel": _check(comm.max_kernel_deviation, 1e-6),
    }
    return {"norm": operator_norm(sq), "tail_mass": q.pair.tail_mass}, checks


def _cmd_funcalc(cfg, w, args):
    h = build_handle(cfg)
    F = parse_function(args.function or cfg.function)
    gamma = parse_contour(args.contour or cfg.contour, h)
    out = apply_function(F, gamma, h)
    _, php, phm = lattice_symbol(h.pair)
    _, qp, qm = lattice_symbol(out.pair)
    a, b = F(php + phm), F(php - phm)
    scale = max(float(np.abs(a).max()), float(np.abs(b).max()), 1e-300)
    dev = max(float(np.abs(qp + qm - a).max()), float(np.abs(qp - qm - b).max())) / scale
    _write_symbol(w, out.symbol)
    _write_kernel(w, out)
    info = {"function": F.name_tag, "contour": {"kind": gamma.kind, "params": [str(p) for p in gamma.params]},
            "norm": operator_norm(out.symbol), "tail_mass": out.pair.tail_mass}
    return info, {"spectral_identity": _check(dev, 1e-8)}


def _cmd_apply(cfg, w, args):
    h = build_handle(cfg)
    f = make_test_function(cfg.test_function, h.grid)
    d = apply_direct(h, f)
    mult = conjugation_multiplier(h, rtol=cfg.quad_rtol)
    v = apply_via_symbol(h, f, mult)
    dev = (d - v).l2_norm() / max(d.l2_norm(), 1e-300)
    x = d.x
    rows = [(-xx, a.real, a.imag, b.real, b.imag) for xx, a, b in
            zip(x, np.asarray(d.f_minus, complex), np.asarray(v.f_minus, complex))]
    rows += [(xx, a.real, a.imag, b.real, b.imag) for xx, a, b in
             zip(x[::-1], np.asarray(d.f_plus, complex)[::-1], np.asarray(v.f_plus, complex)[::-1])]
    w.csv("apply.csv", ["x", "direct_re", "direct_im", "symbol_re", "symbol_im"], rows)
    info = {"test_function": cfg.test_function, "input_l2": f.l2_norm(), "output_l2": d.l2_norm(),
            "symbol_vs_multiplier": multiplier_discrepancy(h, mult)}
    return info, {"route_equivalence": _check(dev, 1e-3)}


PRESET_MATRIX = ("hardy", "log_gaussian", "truncated_power(-2.5,2)")


def _cmd_verify(cfg, w, args):
    base = replace(cfg, scaling="reciprocal", scaling_path=None, parity="none")
    handles = {name: build_handle(replace(base, kernel=name)) for name in PRESET_MATRIX}
    checks, info = {}, {}
    for a in PRESET_MATRIX:
        ha = handles[a]
        na = operator_norm(ha.symbol)
        bound = admissibility(ha.kernel, ha.aux).integral_value
        checks[f"minkowski[{a}]"] = _check(na, bound * (1 + 1e-6))
        pi = estimate_norm(ha, cfg.iters, cfg.seed)
        checks[f"isometry[{a}]"] = _check(abs(pi - na), 0.02 * na)
        info[f"norm[{a}]"] = {"symbol": na, "power_iteration": pi, "minkowski_bound": bound}
        for b in PRESET_MATRIX:
            hb = handles[b]
            q = compose(ha, hb)
            prod = multiply_symbols(ha.symbol, hb.symbol)
            dev = max(float(np.abs(q.symbol.phi_plus - prod.phi_plus).max()),
                      float(np.abs(q.symbol.phi_minus - prod.phi_minus).max()))
            checks[f"homomorphism[{a},{b}]"] = _check(dev, 1e-6 * na * operator_norm(hb.symbol))
        mult = conjugation_multiplier(ha, rtol=cfg.quad_rtol)
        for tf in TEST_FUNCTIONS:
            f = make_test_function(tf, ha.grid)
            d = apply_direct(ha, f)
            v = apply_via_symbol(ha, f, mult)
            checks[f"route[{a},{tf}]"] = _check((d - v).l2_norm() / d.l2_norm(), 1e-3)
    comm = check_commutativity(handles["hardy"], handles["log_gaussian"])
    checks["commutativity_symbol"] = _check(comm.max_symbol_deviation, 1e-8)
    checks["commutativity_kernel"] = _check(comm.max_kernel_deviation, 1e-6)
    return info, checks


_DISPATCH = {
    "symbol": _cmd_symbol, "norm": _cmd_norm, "spectrum": _cmd_spectrum, "compose": _cmd_compose,
    "funcalc": _cmd_funcalc, "apply": _cmd_apply, "verify": _cmd_verify,
}


def run(cfg: RunConfig, subcommand: str, out_dir: str | Path | None = None, args=None) -> dict:
    """Run one subcommand, write its files and ``report.json``; return the report.

    On any exception the files written so far are removed and the error
    propagates.
    """
    if subcommand not in _DISPATCH:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    args = args or argparse.Namespace(function=None, contour=None)
    w = _Writer(Path(out_dir if out_dir is not None else cfg.output_dir))
    try:
        info, checks = _DISPATCH[subcommand](cfg, w, args)
        report = {
            "subcommand": subcommand,
            "config": {k: v for k, v in sorted(vars(cfg).items()) if k != "base_dir"},
            "results": info,
            "checks": checks,
            "passed": all(c["passed"] for c in checks.values()),
        }
        w.json("report.json", report)
    except BaseException:
        w.cleanup()
        raise
    return _clean(report)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hausdorff", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("config", help="key=value config file")
    ap.add_argument("--out", help="output directory (overrides output_dir)")
    ap.add_argument("--function", help="square | cube | identity | resolvent:MU | poly:C0,C1,... (lowest degree first)")
    ap.add_argument("--contour", help="auto:MARGIN | circle:CX,CY,R | rectangle:X0,X1,Y0,Y1")
    args = ap.parse_args(argv)
    try:
        path = Path(args.config)
        cfg = parse_config(path.read_text(), base_dir=path.parent)
        if args.function:
            parse_function(args.function)
        report = run(cfg, args.subcommand, args.out, args)
    except (ConfigError, FileNotFoundError, KernelError, ValueError, ArithmeticError) as exc:
        print(f"hausdorff {args.subcommand}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for name, c in report["checks"].items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}: {c['value']:.3e} (limit {c['limit']:.3e})")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
