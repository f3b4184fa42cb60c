import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from houli.spectral import (
    EvenField,
    Grid,
    OddField,
    SymmetryError,
    biot_savart,
    cosine_transform,
    deriv_at_zero,
    differentiate,
    inverse_cosine_transform,
    inverse_sine_transform,
    multiply_dealiased,
    psi_x_at_zero,
    sine_transform,
)

coeffs = arrays(np.float64, st.integers(1, 24), elements=st.floats(-10, 10, allow_nan=False))


def test_sine_transform_single_mode():
    g = Grid(64)
    f = sine_transform(np.sin(g.nodes))
    assert f.coeffs[0] == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(f.coeffs[1:])) < 1e-14


def test_inverse_sine_transform_single_mode():
    g = Grid(64)
    s = inverse_sine_transform(OddField(np.array([0.0, 1.0, 0.0])), g)
    assert np.max(np.abs(s - np.sin(2 * g.nodes))) < 1e-14


def test_sine_transform_against_quadrature():
    # oracle: trapezoidal projection (exact for trigonometric polynomials)
    g = Grid(64)
    samples = np.sin(g.nodes) - 0.5 * np.sin(2 * g.nodes)
    f = sine_transform(samples, 8)
    ref = [2.0 / 64 * np.sum(samples * np.sin(k * g.nodes)) for k in range(1, 9)]
    assert np.allclose(f.coeffs, ref, atol=1e-14)
    assert np.allclose(f.coeffs[:2], [1.0, -0.5], atol=1e-14)


def test_sine_transform_rejects_even_samples():
    g = Grid(32)
    with pytest.raises(SymmetryError):
        sine_transform(np.cos(g.nodes))


def test_cosine_transform_round_trip():
    g = Grid(32)
    e = EvenField(np.array([0.3, -1.0, 0.25, 0.0, 2.0]))
    back = cosine_transform(inverse_cosine_transform(e, g), 4)
    assert np.allclose(back.coeffs, e.coeffs, atol=1e-14)


@given(coeffs)
def test_round_trip(c):
    f = OddField(c)
    g = Grid.for_truncation(f.M)
    back = sine_transform(inverse_sine_transform(f, g), f.M)
    scale = max(1.0, np.max(np.abs(c)))
    assert np.max(np.abs(back.coeffs - c)) <= 1e-12 * scale


def test_differentiate_examples():
    assert np.allclose(differentiate(OddField.mode(1, 3)).coeffs, [0, 1, 0, 0])
    assert np.allclose(differentiate(EvenField.mode(2, 3)).coeffs, [0, -2, 0])
    f = OddField(np.array([1.0, -0.5]))
    d = differentiate(f)
    # oracle: centered differences on a fine grid
    x = np.linspace(0.1, 6.0, 50)
    h = 1e-5
    fd = (f(x + h) - f(x - h)) / (2 * h)
    assert np.max(np.abs(d(x) - fd)) < 1e-8
    assert np.allclose(d.coeffs, [0, 1, -1])


def test_biot_savart_modes():
    assert np.allclose(biot_savart(OddField.mode(1, 3)).coeffs, [1, 0, 0])
    assert np.allclose(biot_savart(OddField.mode(3, 3)).coeffs, [0, 0, 1 / 9])


def test_biot_savart_integral_form():
    from scipy.integrate import quad

    w = OddField(np.array([1.0, 1.0]))
    psi = biot_savart(w)
    px0 = psi_x_at_zero(w)
    for x in Grid(16).offset_nodes:
        integral = quad(lambda y: (y - x) * w(y), 0.0, x, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        assert abs(psi(x) - integral - x * px0) < 1e-10


def test_psi_x_at_zero_examples():
    from scipy.integrate import quad

    assert psi_x_at_zero(OddField.mode(1, 2)) == pytest.approx(1.0)
    assert psi_x_at_zero(OddField.mode(2, 2)) == pytest.approx(0.5)
    w = OddField(np.array([1.0, 0.0, 3.0]))
    moment = -quad(lambda y: y * w(y), 0, 2 * np.pi, epsabs=1e-14)[0] / (2 * np.pi)
    assert psi_x_at_zero(w) == pytest.approx(2.0, abs=1e-14)
    assert moment == pytest.approx(2.0, abs=1e-12)


def test_deriv_at_zero():
    s1 = OddField.mode(1, 2)
    assert deriv_at_zero(s1, 1) == 1.0
    assert deriv_at_zero(s1, 3) == -1.0
    assert deriv_at_zero(OddField.mode(2, 2), 3) == -8.0
    with pytest.raises(ValueError):
        deriv_at_zero(s1, 2)


def test_multiply_dealiased_identities():
    g = Grid(32)
    p = multiply_dealiased(OddField.mode(1, 4), EvenField.mode(1, 4), g)
    assert isinstance(p, OddField)
    assert np.allclose(p.coeffs, [0, 0.5, 0, 0], atol=1e-15)
    q = multiply_dealiased(OddField.mode(1, 4), OddField.mode(1, 4), g)
    assert isinstance(q, EvenField)
    assert np.allclose(q.coeffs, [0.5, 0, -0.5, 0, 0], atol=1e-15)


def test_multiply_dealiased_against_fine_grid():
    f = OddField(np.array([1.0, 1.0]))
    c = EvenField.mode(1, 2)
    p = multiply_dealiased(f, c, Grid(32), M=4)
    x = Grid(1024).offset_nodes
    assert np.max(np.abs(p(x) - f(x) * c(x))) < 1e-12


def test_multiply_rejects_small_grid():
    with pytest.raises(ValueError):
        multiply_dealiased(OddField.mode(1, 16), OddField.mode(1, 16), Grid(16))


@given(coeffs)
def test_laplacian_inverts_biot_savart(c):
    w = OddField(c)
    back = differentiate(differentiate(biot_savart(w)))
    assert np.max(np.abs(back.coeffs + c)) <= 1e-12 * max(1.0, np.max(np.abs(c)))


@given(coeffs)
def test_psi_x0_is_derivative_of_psi(c):
    w = OddField(c)
    assert psi_x_at_zero(w) == pytest.approx(deriv_at_zero(biot_savart(w), 1), abs=1e-12 * (1 + np.abs(c).sum()))


@given(coeffs, coeffs)
def test_parity_of_products(a, b):
    f, h = OddField(a), OddField(b)
    M = max(f.M, h.M)
    g = Grid.for_truncation(M, factor=8)
    x = Grid(256).offset_nodes
    even = multiply_dealiased(f, h, g, M=2 * M)
    odd = multiply_dealiased(f, differentiate(h), g, M=2 * M + 1)
    assert isinstance(even, EvenField) and isinstance(odd, OddField)
    scale = 1 + np.abs(a).sum() * (1 + np.abs(b).sum()) * M
    assert np.max(np.abs(even(x) - f(x) * h(x))) < 1e-11 * scale
    assert np.max(np.abs(odd(x) - f(x) * differentiate(h)(x))) < 1e-11 * scale
