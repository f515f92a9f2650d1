import math

import numpy as np
import pytest

from hausdorff import (
    AuxFunction,
    GridFunction,
    KernelSpec,
    OperatorHandle,
    adjoint_apply,
    admissibility,
    apply_direct,
    apply_via_symbol,
    compose,
    compute_symbol,
    conjugation_multiplier,
    estimate_norm,
    multiplier_discrepancy,
    operator_norm,
)
from hausdorff.engine import EngineError
from hausdorff.grid import GridParams

from conftest import SMALL_T

INDICATOR = (lambda x: ((x >= 0) & (x <= 1)).astype(float), (1.0,))
GAUSSIAN = (lambda x: np.exp(-x * x), ())
ODD_BUMP = (lambda x: x * np.exp(-x * x), ())


def sample(spec, grid):
    f, breaks = spec
    return GridFunction.from_callable(f, grid, breaks)


def rel_l2(a, b):
    return (a - b).l2_norm() / b.l2_norm()


@pytest.fixture(scope="module")
def multipliers(presets):
    return {name: conjugation_multiplier(h) for name, h in presets.items()}


def test_grid_function_norms(hardy):
    f = sample(INDICATOR, hardy.grid)
    assert f.l2_norm() == pytest.approx(1.0, abs=2e-6)
    g = sample(GAUSSIAN, hardy.grid)
    # int_R e^{-2x^2} dx = sqrt(pi/2)
    assert g.l2_norm() ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-9)
    assert GridFunction.zeros(hardy.grid).l2_norm() == 0.0


def test_hardy_on_indicator(hardy):
    f = sample(INDICATOR, hardy.grid)
    g = apply_direct(hardy, f)
    x = g.x
    exact = GridFunction(g.grid, np.minimum(1.0, 1.0 / x), np.zeros_like(x))
    assert rel_l2(g, exact) <= 1e-3
    assert g.l2_norm() == pytest.approx(math.sqrt(2), abs=1e-3)
    assert not np.any(g.f_minus)


def test_trivial_applications(hardy, zero_op):
    f = sample(GAUSSIAN, hardy.grid)
    assert apply_direct(hardy, GridFunction.zeros(hardy.grid)).l2_norm() == 0.0
    assert apply_direct(zero_op, f).l2_norm() == 0.0
    assert apply_via_symbol(hardy, GridFunction.zeros(hardy.grid)).l2_norm() == 0.0


def test_norm_consistency_and_minkowski(presets):
    for h in presets.values():
        bound = admissibility(h.kernel, h.aux).integral_value
        for spec in (INDICATOR, GAUSSIAN, ODD_BUMP):
            f = sample(spec, h.grid)
            out = apply_direct(h, f).l2_norm()
            assert out <= operator_norm(h.symbol) * f.l2_norm() * 1.01
            assert out <= bound * f.l2_norm() * 1.01


def test_hardy_multiplier(hardy, multipliers):
    m = multipliers["hardy"]
    s = m.s
    assert np.abs(m.phi_plus - 1 / (0.5 + 1j * s)).max() < 1e-8
    assert m.phi_plus[m.s_grid.zero_index] == pytest.approx(2.0, abs=1e-10)
    assert not np.any(m.phi_minus)


def test_power_scaling_multiplier_reparametrises():
    # with a(u) = u^-2 the shift is A(t) = -2t, so m_plus(s) = phi_plus(-2s)
    h = OperatorHandle.from_kernel(KernelSpec.log_gaussian(1.0), AuxFunction.power(2.0), SMALL_T)
    s_grid = GridParams.symmetric(16.0, 2**10)
    m = conjugation_multiplier(h, s_grid)
    sym = compute_symbol(h)
    k = np.arange(-200, 200)
    # symbol grid spacing 1/64, multiplier spacing 1/32: s = k/32 maps to index -4k
    expected = sym.phi_plus[sym.s_grid.zero_index - 4 * k]
    assert np.abs(m.phi_plus[s_grid.zero_index + k] - expected).max() < 1e-8
    assert not np.any(m.phi_minus)


def test_zero_multiplier(zero_op):
    m = conjugation_multiplier(zero_op, GridParams.symmetric(8.0, 64))
    assert not np.any(m.phi_plus) and not np.any(m.phi_minus)


def test_lattice_multiplier_agrees(trunc_power, multipliers):
    lat = conjugation_multiplier(trunc_power, method="lattice")
    ad = multipliers["truncated_power"]
    # lattice masses resolve frequencies up to roughly |s| h < 1/4
    inner = np.abs(lat.s) <= 64
    assert np.abs(lat.phi_plus - ad.phi_plus)[inner].max() < 1e-8


@pytest.mark.parametrize("op", ["hardy", "log_gaussian", "truncated_power"])
@pytest.mark.parametrize("fn", ["indicator", "gaussian", "odd_bump"])
def test_route_equivalence(presets, multipliers, op, fn):
    h = presets[op]
    f = sample({"indicator": INDICATOR, "gaussian": GAUSSIAN, "odd_bump": ODD_BUMP}[fn], h.grid)
    direct = apply_direct(h, f)
    spectral = apply_via_symbol(h, f, multipliers[op])
    assert rel_l2(spectral, direct) <= 1e-3


def test_even_kernel_keeps_odd_functions_odd(even_gaussian):
    f = sample(ODD_BUMP, even_gaussian.grid)
    out = apply_via_symbol(even_gaussian, f)
    scale = np.abs(out.f_plus).max()
    assert np.abs(out.f_plus + out.f_minus).max() <= 1e-8 * max(scale, 1e-300)


def test_range_truncation_reported(hardy, multipliers):
    # a spike of width ~h in tau has most of its energy beyond |s| = 128
    t = hardy.grid.nodes
    spike = GridFunction.from_unitary(hardy.grid, (np.abs(t - 3.0) < 1e-9).astype(float), np.zeros_like(t))
    with pytest.raises(EngineError):
        apply_via_symbol(hardy, spike, multipliers["hardy"])


def test_hardy_adjoint_on_indicator(hardy):
    g = sample(INDICATOR, hardy.grid)
    out = adjoint_apply(hardy, g)
    tau = out.tau
    window = np.abs(tau) < 30
    expected = np.where(tau >= 0, tau, 0.0)
    # both jumps sit on the same node, so the error there is first order in h
    assert np.abs(out.f_plus - expected)[window].max() <= 1e-3
    assert not np.any(out.f_minus)
    assert adjoint_apply(hardy, GridFunction.zeros(hardy.grid)).l2_norm() == 0.0


@pytest.mark.parametrize("op", ["hardy", "log_gaussian", "truncated_power"])
def test_duality_pairing(presets, op, even_gaussian):
    h = presets[op]
    f = sample(GAUSSIAN, h.grid)
    g = GridFunction.from_callable(lambda x: np.exp(-((x - 0.5) ** 2)) * (1 + 0.3j * x), h.grid)
    lhs = apply_direct(h, f).inner(g)
    rhs = f.inner(adjoint_apply(h, g))
    assert abs(lhs - rhs) <= 1e-6 * abs(lhs)
    lhs = apply_direct(even_gaussian, f).inner(g)
    rhs = f.inner(adjoint_apply(even_gaussian, g))
    assert abs(lhs - rhs) <= 1e-6 * abs(lhs)


def test_composition_at_function_level(hardy, log_gaussian):
    f = sample(GAUSSIAN, hardy.grid)
    both = apply_direct(compose(hardy, log_gaussian), f)
    nested = apply_direct(hardy, apply_direct(log_gaussian, f))
    assert rel_l2(both, nested) <= 5e-3


def test_generic_scaling_path_is_exact_transpose():
    a = AuxFunction.power(1.5)
    h = OperatorHandle.from_kernel(KernelSpec.log_gaussian(1.0), a, SMALL_T)
    f = sample(GAUSSIAN, SMALL_T)
    g = sample(ODD_BUMP, SMALL_T)
    lhs = apply_direct(h, f).inner(g)
    rhs = f.inner(adjoint_apply(h, g))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
    m = conjugation_multiplier(h, GridParams.symmetric(32.0, 2**11))
    # non-lattice shifts use linear interpolation, so agreement is second order in h
    assert rel_l2(apply_via_symbol(h, f, m), apply_direct(h, f)) <= 1e-3


def test_window_loss_reported(hardy):
    narrow = GridParams.symmetric(4.0, 2**10)
    h = OperatorHandle.from_kernel(KernelSpec.log_gaussian(1.0), None, GridParams.symmetric(12.0, 2**10))
    wide = GridFunction.from_unitary(h.grid, np.ones(h.grid.n), np.ones(h.grid.n))
    from hausdorff import GridTooSmallError

    with pytest.raises(GridTooSmallError):
        apply_direct(h, wide)
    assert narrow.n == 2**10


def test_power_iteration(hardy, log_gaussian, zero_op):
    est = estimate_norm(hardy, 50, seed=7, full=True)
    assert est.value == pytest.approx(2.0, rel=0.02)
    assert np.all(np.diff(est.history) >= -1e-10)
    assert estimate_norm(log_gaussian, 50, seed=7) == pytest.approx(1.0, rel=0.02)
    assert estimate_norm(zero_op, 20) == 0.0
    with pytest.raises(ValueError):
        estimate_norm(hardy, 5)


def test_power_iteration_is_seeded(log_gaussian):
    assert estimate_norm(log_gaussian, 20, seed=3) == estimate_norm(log_gaussian, 20, seed=3)


def test_isometry_reconciliation(presets):
    for h in presets.values():
        sym_norm = operator_norm(h.symbol)
        assert abs(estimate_norm(h, 50, seed=1) - sym_norm) <= 0.02 * sym_norm


def test_discrepancy_reported_for_power_law(hardy, multipliers):
    gap = multiplier_discrepancy(hardy, multipliers["hardy"])
    assert gap["norm_gap"] < 1e-8
    assert gap["symbol_norm"] == pytest.approx(2.0, abs=1e-8)


def test_discrepancy_reported_for_table_scaling():
    # a(u) = 1 / (u + u^3) is not a power law; the gap is data, not a pass/fail
    u = np.logspace(-6, 6, 2001)
    a = AuxFunction.from_table(u, 1 / (u + u**3))
    h = OperatorHandle.from_kernel(KernelSpec.log_gaussian(1.0), a, SMALL_T)
    m = conjugation_multiplier(h, GridParams.symmetric(16.0, 2**10), method="lattice")
    gap = multiplier_discrepancy(h, m)
    assert set(gap) == {"symbol_norm", "multiplier_norm", "norm_gap"}
    assert np.isfinite(gap["norm_gap"])
    bound = admissibility(h.kernel, h.aux).integral_value
    assert gap["multiplier_norm"] <= bound * (1 + 1e-6)
