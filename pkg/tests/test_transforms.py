import math

import numpy as np
import pytest
from scipy import integrate

from hausdorff import GridParams, GridTooSmallError, SampledLine, convolve, fourier_l1, mellin_halfline
from hausdorff.grid import DEFAULT_S_GRID, GridError
from hausdorff.quadrature import plan_weights

T = GridParams.symmetric(64.0, 2**15)
S = GridParams.symmetric(32.0, 2**11)


def gaussian_line(grid=T):
    t = grid.nodes
    return SampledLine(grid, np.exp(-t * t / 2) / math.sqrt(2 * math.pi))


def hardy_line(grid=T):
    t = grid.nodes
    f = lambda x: np.where(x <= 0, np.exp(x / 2), 0.0)
    plan = plan_weights(grid, [0.0])
    return SampledLine(grid, f(t), plan.integrate(f))


def direct_fourier(f, s, lo, hi, points=None):
    """Reference transform by QUADPACK, real and imaginary parts separately."""
    re = integrate.quad(lambda t: f(t) * math.cos(s * t), lo, hi, points=points, limit=2000, epsabs=1e-13)[0]
    im = integrate.quad(lambda t: -f(t) * math.sin(s * t), lo, hi, points=points, limit=2000, epsabs=1e-13)[0]
    return complex(re, im)


def test_gaussian_transform():
    out = fourier_l1(gaussian_line(), S).values
    s = S.nodes
    # the chirp-z evaluation carries ~1e-10 rounding at this size
    assert np.abs(out - np.exp(-s * s / 2)).max() < 1e-9
    assert out[S.zero_index] == pytest.approx(1.0)
    k = np.searchsorted(s, 1.0)
    assert out[k].real == pytest.approx(0.60653066, abs=1e-8)


def test_gaussian_against_direct_quadrature():
    out = fourier_l1(gaussian_line(), S).values
    g = lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi)
    for k in (S.zero_index - 300, S.zero_index + 17, S.zero_index + 250):
        ref = direct_fourier(g, S.nodes[k], -40, 40)
        assert abs(out[k] - ref) < 1e-9


def test_hardy_component_transform():
    out = fourier_l1(hardy_line(), S).values
    s = S.nodes
    assert np.abs(out - 1 / (0.5 - 1j * s)).max() < 1e-8
    assert out[S.zero_index] == pytest.approx(2.0, rel=1e-9)


def test_zero_transform():
    z = SampledLine(T, np.zeros(T.n))
    assert not np.any(fourier_l1(z, S).values)


def test_resolution_guard():
    with pytest.raises(GridError):
        fourier_l1(gaussian_line(GridParams.symmetric(40.0, 2**10)), GridParams.symmetric(128.0, 2**10))


def test_fourier_inversion_smooth_bump():
    t = T.nodes
    bump = np.where(np.abs(t) < 1, np.exp(-1 / np.maximum(1 - t * t, 1e-300)), 0.0)
    g = SampledLine(T, bump)
    wide = GridParams.symmetric(256.0, 2**14)
    back = fourier_l1(fourier_l1(g, wide), T, "inverse").values
    err = np.abs(back - bump).sum() / np.abs(bump).sum()
    assert err < 1e-6


def test_convolution_closed_form():
    h = hardy_line()
    c = convolve(h, h)
    t = T.nodes
    expected = np.where(t <= 0, -t * np.exp(t / 2), 0.0)
    # values are masses / h; next to the jump they carry end-correction weights
    away = np.abs(t) > 16 * T.step
    assert np.abs(c.values - expected)[away].max() < 1e-8
    assert c.weighted.sum() == pytest.approx(4.0, rel=1e-9)
    k = T.zero_index - int(round(1 / T.step))
    assert c.values[k] == pytest.approx(math.exp(-0.5), abs=1e-8)


def test_convolution_with_zero():
    c = convolve(gaussian_line(), SampledLine(T, np.zeros(T.n)))
    assert not np.any(c.values)


def test_convolution_theorem():
    h, g = hardy_line(), gaussian_line()
    lhs = fourier_l1(convolve(h, g), S).values
    rhs = fourier_l1(h, S).values * fourier_l1(g, S).values
    assert np.abs(lhs - rhs).max() <= 1e-7
    assert np.abs(lhs - rhs).max() <= 1e-6 * h.l1 * g.l1


def test_convolution_truncation_detected():
    narrow = GridParams.symmetric(6.0, 2**10)
    with pytest.raises(GridTooSmallError):
        convolve(hardy_line(narrow), hardy_line(narrow))


def test_mellin_indicator_closed_form():
    # g(x) = x^{-1/2} on [1, e]; in tau = -ln x this is the window [-1, 0]
    f = lambda tau: np.where((tau >= -1) & (tau <= 0), np.exp(tau / 2), 0.0)
    plan = plan_weights(T, [-1.0, 0.0])
    g = SampledLine(T, f(T.nodes), plan.integrate(f))
    out = mellin_halfline(g, S).values
    s = S.nodes
    with np.errstate(invalid="ignore", divide="ignore"):
        ref = (1 - np.exp(-1j * s)) / (1j * s) / math.sqrt(2 * math.pi)
    ref[S.zero_index] = 1 / math.sqrt(2 * math.pi)
    assert np.abs(out - ref).max() < 1e-9


def test_mellin_plancherel_and_round_trip():
    tau = T.nodes
    # g(x) = x^{-1/2} exp(-(ln x)^2 / 2): unitary coordinates give exp(-tau^2 / 2)
    gx = np.exp(tau / 2) * np.exp(-tau * tau / 2)
    g = SampledLine(T, gx)
    norm_g = math.pi**0.25
    m = mellin_halfline(g, S)
    norm_m = math.sqrt(S.step * np.sum(np.abs(m.values) ** 2))
    assert norm_m / norm_g == pytest.approx(1.0, abs=1e-6)
    back = mellin_halfline(m, T, "inverse").values
    F_back = back * np.exp(-tau / 2)
    F = np.exp(-tau * tau / 2)
    assert math.sqrt(T.step * np.sum(np.abs(F_back - F) ** 2)) / norm_g < 1e-6


def test_mellin_of_zero():
    assert not np.any(mellin_halfline(SampledLine(T, np.zeros(T.n)), S).values)


@pytest.mark.parametrize("name", ["hardy", "log_gaussian"])
def test_decay_at_grid_edge(presets, name):
    sym = presets[name].symbol
    phi = np.abs(sym.phi_plus)
    assert max(phi[0], phi[-1]) <= 1e-2 * phi.max()
    assert sym.s_grid.same_as(DEFAULT_S_GRID)


def test_jump_kernel_decays_like_inverse_frequency(trunc_power):
    # a jump in K_plus limits the decay to 1/|s|: here |phi_plus| ~ 0.5/|s|
    sym = trunc_power.symbol
    edge = abs(sym.phi_plus[0]) * abs(sym.s[0])
    assert edge == pytest.approx(0.5, rel=1e-2)
