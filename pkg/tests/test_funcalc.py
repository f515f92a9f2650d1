import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hausdorff import (
    Contour,
    ContourError,
    ContractViolation,
    HoloFunction,
    GridTooSmallError,
    apply_function,
    auto_contour,
    compose,
    f1_f2_contour,
    f1_f2_eigen,
    spectrum_curve,
    winding_number,
)
from hausdorff.funcalc import lattice_symbol


@pytest.fixture(scope="module")
def hardy_contour(hardy):
    return auto_contour(spectrum_curve(hardy.symbol), 0.25)


@pytest.fixture(scope="module")
def hardy_squared(hardy, hardy_contour):
    return apply_function(HoloFunction.square(), hardy_contour, hardy)


def test_circle_contour_basics():
    c = Contour.circle(0.5 + 0.5j, 2.0)
    assert winding_number(c, [0.0, 1.0 + 1.0j, 5.0])[:2].tolist() == [1, 1]
    assert winding_number(c, [5.0])[0] == 0
    # closed: sum of dz vanishes, and \oint dz / z = 2 pi i
    assert abs(c.dz.sum()) < 1e-12
    assert np.sum(c.dz / c.nodes) == pytest.approx(2j * np.pi, abs=1e-12)


def test_rectangle_contour_basics():
    r = Contour.rectangle(-1.0, 3.0, -2.0, 2.0)
    assert abs(r.dz.sum()) < 1e-12
    assert np.sum(r.dz / r.nodes) == pytest.approx(2j * np.pi, abs=1e-10)
    assert winding_number(r, [0.0, 2.5 + 1.5j, 4.0]).tolist() == [1, 1, 0]
    assert r.encloses(np.array([0.0, 4.0])).tolist() == [True, False]
    with pytest.raises(ContourError):
        Contour.polygon([0, 1j, 1])  # clockwise


def test_auto_contour_hardy(hardy, hardy_contour):
    curve = spectrum_curve(hardy.symbol)
    center, radius = hardy_contour.params
    rmax = np.abs(curve.points() - center).max()
    assert radius == pytest.approx(1.25 * rmax)
    assert np.all(winding_number(hardy_contour, curve.points()[::64]) == 1)
    # encloses the whole closed circle |z - 1| = 1
    ring = 1 + np.exp(1j * np.linspace(0, 2 * np.pi, 200))
    assert np.all(hardy_contour.encloses(ring))


def test_auto_contour_zero_and_interval(zero_op, log_gaussian):
    c = auto_contour(spectrum_curve(zero_op.symbol), 1.0)
    assert c.params[1] > 0 and winding_number(c, [0.0])[0] == 1
    c = auto_contour(spectrum_curve(log_gaussian.symbol), 0.25)
    assert np.all(c.encloses(np.linspace(0, 1, 101)))


def test_auto_contour_margin_validation(hardy):
    curve = spectrum_curve(hardy.symbol)
    with pytest.raises(ContourError):
        auto_contour(curve, 0.0)
    with pytest.raises(ContourError):
        auto_contour(curve, 1e-5)


def test_contour_examples():
    circle = Contour.circle(0.0, 3.0)
    f1, f2 = f1_f2_contour(HoloFunction.identity(), circle, 1.0, 1.0)
    assert (f1, f2) == (pytest.approx(1.0, abs=1e-12), pytest.approx(1.0, abs=1e-12))
    f1, f2 = f1_f2_contour(HoloFunction.identity(), circle, 0.0, 0.5)
    assert f1 == pytest.approx(0.5, abs=1e-12) and abs(f2) < 1e-14
    z1, z2 = 0.3 - 0.2j, 0.9 + 0.1j
    f1, f2 = f1_f2_contour(HoloFunction.square(), circle, z1, z2)
    assert f1 == pytest.approx(z2 * z2 + z1 * z1, abs=1e-12)
    assert f2 == pytest.approx(2 * z1 * z2, abs=1e-12)


def test_eigen_examples():
    assert f1_f2_eigen(HoloFunction.identity(), 0.3, 0.7) == pytest.approx((0.7, 0.3))
    assert f1_f2_eigen(HoloFunction.square(), 1.0, 2.0) == pytest.approx((5.0, 4.0))
    zero = HoloFunction(lambda z: 0 * z)
    assert f1_f2_eigen(zero, 1.0, 2.0) == (0, 0)


def test_contour_preconditions():
    small = Contour.circle(0.0, 1.0)
    with pytest.raises(ContourError):
        f1_f2_contour(HoloFunction.square(), small, 0.6, 0.6)  # z2 + z1 outside
    with pytest.raises(ContourError):
        f1_f2_contour(HoloFunction.resolvent(0.5), Contour.circle(0.0, 2.0), 0.1, 0.2)  # pole inside
    # eigenvalue a hair inside the circle: resolvent nearly singular on the contour
    with pytest.raises(ContourError):
        f1_f2_contour(HoloFunction.square(), small, 0.0, 1 - 1e-9)
    with pytest.raises(ContourError):
        f1_f2_contour(HoloFunction.square(), Contour.circle(0.0, 1.0, n_quad=8), 0.0, 0.99, max_doublings=0)


@pytest.mark.parametrize(
    "F",
    [HoloFunction.identity(), HoloFunction.square(), HoloFunction.cube(), HoloFunction.resolvent(4.0 + 1.0j)],
    ids=["z", "z2", "z3", "resolvent"],
)
def test_contour_matches_eigen_on_random_points(F):
    rng = np.random.default_rng(11)
    gamma = Contour.circle(0.2, 2.5)
    # eigenvalues z2 +- z1 uniformly inside radius 2.2 about the centre
    r = 2.2 * np.sqrt(rng.random((2, 200)))
    e = 0.2 + r * np.exp(2j * np.pi * rng.random((2, 200)))
    z2, z1 = (e[0] + e[1]) / 2, (e[0] - e[1]) / 2
    a = np.array(f1_f2_contour(F, gamma, z1, z2))
    b = np.array(f1_f2_eigen(F, z1, z2))
    assert np.abs(a - b).max() <= 1e-8 * np.abs(b).max()


@settings(max_examples=40, deadline=None)
@given(
    st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
    st.lists(st.floats(-2, 2), min_size=1, max_size=5),
)
def test_polynomial_calculus_matches_eigen(z1, z2, coeffs):
    F = HoloFunction.poly([0.0] + coeffs)
    a = np.array(f1_f2_contour(F, Contour.circle(0.0, 2.5), z1, z2))
    b = np.array(f1_f2_eigen(F, z1, z2))
    assert np.abs(a - b).max() <= 1e-8 * max(np.abs(b).max(), 1.0)


def test_square_equals_composition(hardy, hardy_squared):
    direct = compose(hardy, hardy)
    scale = np.abs(direct.pair.mass_plus).max()
    assert np.abs(hardy_squared.pair.mass_plus - direct.pair.mass_plus).max() <= 1e-6 * scale
    assert np.abs(hardy_squared.symbol.phi_plus - direct.symbol.phi_plus).max() <= 1e-6
    from hausdorff import operator_norm

    assert operator_norm(hardy_squared.symbol) == pytest.approx(4.0, abs=1e-6)


def test_identity_returns_operator(trunc_power, even_gaussian):
    for h in (trunc_power, even_gaussian):
        gamma = auto_contour(spectrum_curve(h.symbol), 0.25)
        out = apply_function(HoloFunction.identity(), gamma, h)
        for got, want in ((out.pair.mass_plus, h.pair.mass_plus), (out.pair.mass_minus, h.pair.mass_minus)):
            assert np.abs(got - want).max() <= 1e-8 * np.abs(h.pair.mass_plus).max()


def test_cube_matches_triple_composition(hardy, hardy_contour):
    cube = apply_function(HoloFunction.cube(), hardy_contour, hardy)
    triple = compose(compose(hardy, hardy), hardy)
    assert np.abs(cube.symbol.phi_plus - triple.symbol.phi_plus).max() <= 1e-6


def test_polynomial_on_log_gaussian(log_gaussian):
    gamma = auto_contour(spectrum_curve(log_gaussian.symbol), 0.25)
    out = apply_function(HoloFunction.poly([0, 0, -1, 1]), gamma, log_gaussian)
    s = out.symbol.s
    assert np.abs(out.symbol.phi_plus - (np.exp(-1.5 * s * s) - np.exp(-s * s))).max() <= 1e-8


def test_resolvent_function_on_branches(hardy):
    # phi / (mu - phi) = -1 / (2 (1 - is)) for mu = -2: a fast-decaying kernel
    mu = -2.0
    out = apply_function(HoloFunction.resolvent(mu), Contour.circle(1.0, 1.4), hardy)
    phi, phi_star = hardy.symbol.phi, hardy.symbol.phi_star
    assert np.abs(out.symbol.phi - phi / (mu - phi)).max() <= 1e-8
    assert np.abs(out.symbol.phi_star - phi_star / (mu - phi_star)).max() <= 1e-8


def test_spectral_identity_on_lattice(hardy, hardy_squared):
    _, p, m = lattice_symbol(hardy.pair)
    _, qp, qm = lattice_symbol(hardy_squared.pair)
    assert np.abs(qp + qm - (p + m) ** 2).max() <= 1e-8 * 4
    assert np.abs(qp - qm - (p - m) ** 2).max() <= 1e-8 * 4


def test_contour_independence(hardy, hardy_squared):
    rect = Contour.rectangle(-0.5, 2.5, -1.5, 1.5)
    other = apply_function(HoloFunction.square(), rect, hardy)
    assert np.abs(other.symbol.phi_plus - hardy_squared.symbol.phi_plus).max() <= 1e-8
    assert np.abs(other.symbol.phi_minus - hardy_squared.symbol.phi_minus).max() <= 1e-8


def test_function_must_vanish_at_zero(hardy, hardy_contour):
    shifted = HoloFunction(lambda z: z + 1.0, "z+1")
    with pytest.raises(ContractViolation):
        apply_function(shifted, hardy_contour, hardy)


def test_contour_must_enclose_zero(log_gaussian):
    with pytest.raises(ContourError):
        apply_function(HoloFunction.square(), Contour.circle(0.5, 0.4), log_gaussian)


def test_resolvent_tail_detected(hardy, hardy_contour):
    # mu = 3 gives phi / (3 - phi) = 1 / (1/2 - 3is): kernel e^{t/6}, too slow for the window
    with pytest.raises(GridTooSmallError):
        apply_function(HoloFunction.resolvent(3.0), hardy_contour, hardy)
