import math

import numpy as np
import pytest

from hausdorff.grid import GridError, GridParams, is_power_of_two
from hausdorff.quadrature import (
    DivergenceError,
    adaptive_integral,
    end_corrections,
    lagrange_integral_weights,
    plan_weights,
)


def test_power_of_two_validation():
    assert is_power_of_two(1024) and not is_power_of_two(1000)
    with pytest.raises(GridError):
        GridParams(-1.0, 1.0, 1000)


def test_symmetric_lattice_has_origin_node():
    g = GridParams.symmetric(40.0, 2**12)
    assert g.nodes[g.zero_index] == 0.0
    assert g.step == pytest.approx(80.0 / 2**12)
    assert g.lo == -40.0 and g.hi == pytest.approx(40.0 - g.step)


@pytest.mark.parametrize("q", [2, 4, 6, 8])
def test_end_corrections_exact_on_polynomials(q):
    # corrected trapezoid on [0, m-1] with both ends corrected
    m = 40
    w = np.ones(m)
    w[0] = w[-1] = 0.5
    c = end_corrections(q)
    w[:q] += c
    w[m - q:] += c[::-1]
    x = np.arange(m, dtype=float)
    for deg in range(q):
        exact = (m - 1) ** (deg + 1) / (deg + 1)
        assert np.dot(w, x**deg) == pytest.approx(exact, rel=1e-10, abs=1e-10)


def test_lagrange_weights_integrate_cubic():
    w = lagrange_integral_weights(np.array([0.0, 1.0, 2.0, 3.0]), -0.3, 0.0)
    p = lambda x: 1 + 2 * x - x**2 + 0.5 * x**3
    exact = -(-0.3 + (-0.3) ** 2 - (-0.3) ** 3 / 3 + 0.5 * (-0.3) ** 4 / 4)
    assert np.dot(w, p(np.arange(4.0))) == pytest.approx(exact, rel=1e-12)


def test_plain_weights_without_breaks():
    g = GridParams.symmetric(4.0, 64)
    plan = plan_weights(g)
    assert np.all(plan.weights == g.step) and not plan.break_nodes


@pytest.mark.parametrize("b", [0.0, 0.37, -1.001953125])
def test_jump_integral_high_order(b):
    # int_{-inf}^{b} e^{t} dt = e^b, with a jump to zero at b (on or off the lattice)
    g = GridParams.symmetric(40.0, 2**12)
    f = lambda t: np.where(t <= b, np.exp(t), 0.0)
    plan = plan_weights(g, [b])
    assert plan.integrate(f).sum() == pytest.approx(math.exp(b), rel=1e-9)


def test_two_breaks_in_one_window():
    g = GridParams.symmetric(10.0, 2**11)
    f = lambda t: np.where((t >= -1.3) & (t <= 2.2), np.cos(t), 0.0)
    total = plan_weights(g, [-1.3, 2.2]).integrate(f).sum()
    assert total == pytest.approx(math.sin(2.2) - math.sin(-1.3), rel=1e-10)


def test_adaptive_integral_and_divergence():
    val, _ = adaptive_integral(lambda u: u**-1.5, 1.0, np.inf)
    assert val == pytest.approx(2.0, rel=1e-10)
    with pytest.raises(DivergenceError):
        adaptive_integral(lambda u: u**-0.5, 1.0, np.inf)
