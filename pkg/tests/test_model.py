import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from houli.model import (
    DegenerateNormalization,
    HolderSystem,
    ModelParams,
    ModelState,
    RescalingState,
    SmoothSystem,
    advance,
    error_terms,
    holder_profile,
    lawson_rk4,
    normalization_cu,
    rhs_physical,
    rhs_rescaled,
    step,
)
from houli.spectral import OddField, biot_savart, differentiate


def _pointwise_rhs(state, p, x):
    # oracle: every term assembled from exact pointwise evaluation
    u, w = state.u, state.omega
    psi = biot_savart(w)
    ux, wx, px = differentiate(u), differentiate(w), differentiate(psi)
    uxx, wxx = differentiate(ux), differentiate(wx)
    du = -2 * p.a * psi(x) * ux(x) + 2 * u(x) * px(x) + p.nu * uxx(x)
    dw = -2 * p.a * psi(x) * wx(x) + 2 * u(x) * ux(x) + p.nu * wxx(x)
    return du, dw


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(nu=-1)
    with pytest.raises(ValueError):
        ModelParams(C_u0=0)
    with pytest.raises(ValueError):
        ModelParams(alpha=1.5)


def test_physical_steady_state():
    du, dw = rhs_physical(ModelState.steady(16), ModelParams())
    assert np.max(np.abs(du.coeffs)) < 1e-15 and np.max(np.abs(dw.coeffs)) < 1e-15


def test_physical_pure_vorticity():
    s = ModelState(OddField.zeros(8), OddField.mode(1, 8))
    du, dw = rhs_physical(s, ModelParams())
    assert np.max(np.abs(du.coeffs)) < 1e-15
    assert np.allclose(dw.coeffs, -OddField.mode(2, 8).coeffs, atol=1e-15)


def test_physical_against_pointwise_oracle():
    rng = np.random.default_rng(0)
    M = 32
    k = np.arange(1, M + 1)
    s = ModelState(OddField(np.where(k <= 8, rng.standard_normal(M), 0) / k**2), OddField(np.where(k <= 8, rng.standard_normal(M), 0) / k**2))
    p = ModelParams(a=0.9, nu=0.01)
    du, dw = rhs_physical(s, p)
    x = np.linspace(0.01, 6.2, 300)
    ou, ow = _pointwise_rhs(s, p, x)
    assert np.max(np.abs(du(x) - ou)) < 1e-10
    assert np.max(np.abs(dw(x) - ow)) < 1e-10


def test_normalization_examples():
    s = ModelState.steady(16)
    assert normalization_cu(s, ModelParams(a=0.95)) == pytest.approx(-0.1, abs=1e-14)
    assert normalization_cu(s, ModelParams(a=0.95), exact=False) == pytest.approx(-0.1, abs=1e-15)
    assert normalization_cu(s, ModelParams(a=1.0)) == 0.0
    assert normalization_cu(s, ModelParams(a=1.0, nu=0.01)) == pytest.approx(0.01, abs=1e-15)
    assert normalization_cu(s, ModelParams(a=1.0, nu=0.01), exact=False) == pytest.approx(0.01, abs=1e-15)


def test_degenerate_normalization():
    s = ModelState(OddField(np.array([2.0, -1.0])), OddField.mode(1, 2))
    with pytest.raises(DegenerateNormalization):
        normalization_cu(s, ModelParams())


def test_rescaled_examples():
    rs = RescalingState(ModelState.steady(16), 0.0, 1.0)
    du, dw, sc = rhs_rescaled(rs, ModelParams())
    assert np.max(np.abs(du.coeffs)) == 0 and np.max(np.abs(dw.coeffs)) == 0 and sc["c_u"] == 0
    du, dw, sc = rhs_rescaled(rs, ModelParams(a=0.9))
    x = np.linspace(0, 2 * np.pi, 101)
    F = -0.2 * np.sin(x) * (1 - np.cos(x))
    assert np.max(np.abs(du(x) - F)) < 1e-14 and np.max(np.abs(dw(x) - F)) < 1e-14
    assert sc["c_u"] == pytest.approx(-0.2, abs=1e-14)


@given(st.integers(0, 2**31), st.floats(0.8, 1.0), st.floats(0.0, 0.02))
def test_normalization_fixes_ux0(seed, a, nu):
    rng = np.random.default_rng(seed)
    M = 16
    u = rng.standard_normal(M) * 0.1 / np.arange(1, M + 1) ** 3
    u[0] += 1 - np.arange(1, M + 1) @ u
    w = np.eye(M)[0] + rng.standard_normal(M) * 0.1 / np.arange(1, M + 1) ** 3
    rs = RescalingState(ModelState(OddField(u), OddField(w)), 0.0, 1.0)
    du, _, _ = rhs_rescaled(rs, ModelParams(a=a, nu=nu))
    assert abs(np.arange(1, M + 1) @ du.coeffs) < 1e-13


def test_ux0_drift_long_run():
    p = ModelParams(a=0.97)
    sys_ = SmoothSystem(p, 32)
    y = sys_.pack(ModelState.steady(32), 1.0)
    k = np.arange(1, 33)
    for _ in range(10_000):
        y, _ = advance(sys_, y, 1e-3)
    assert abs(k @ y[:32] - 1.0) < 1e-9


def test_step_fixed_point():
    rs = RescalingState(ModelState.steady(16), 0.0, 1.0)
    out = step(rs, 1e-3, ModelParams())
    assert np.max(np.abs(out.state.u.coeffs - rs.state.u.coeffs)) < 1e-14
    assert out.t_phys == pytest.approx(1e-3) and out.C_u == 1.0


def test_step_beats_forward_euler():
    # reference: the same flow integrated with 100 tiny RK4 steps
    p = ModelParams(a=0.97)
    M, h = 32, 0.005
    sys_ = SmoothSystem(p, M)
    y0 = sys_.pack(ModelState.steady(M), 1.0)
    ref = y0
    for _ in range(100):
        ref = lawson_rk4(ref, h / 100, sys_.linear_rates(ref), lambda v: sys_.rhs(v)[0])
    rk = step(RescalingState(ModelState.steady(M), 0.0, 1.0), h, p)
    euler = y0 + h * sys_.rhs(y0)[0]
    err_rk = np.max(np.abs(rk.state.to_array() - ref[: 2 * M]))
    err_eu = np.max(np.abs(euler[: 2 * M] - ref[: 2 * M]))
    assert err_rk < 1e-3 * err_eu


def test_scale_accumulates_exponentially():
    p = ModelParams(a=0.95)
    sys_ = SmoothSystem(p, 32)
    y = sys_.pack(ModelState.steady(32), 2.0)
    cs = []
    for _ in range(100):
        cs.append(sys_.rhs(y)[1])
        y, _ = advance(sys_, y, 1e-4)
    # c_u barely moves in 0.01 time units; compare with the trapezoid of c
    cs.append(sys_.rhs(y)[1])
    integral = sum(0.5 * (cs[i] + cs[i + 1]) * 1e-4 for i in range(100))
    assert math.exp(y[64]) == pytest.approx(2.0 * math.exp(integral), rel=1e-8)
    assert math.exp(y[64]) == pytest.approx(2.0 * math.exp(-0.1 * 100 * 1e-4), rel=1e-5)


def test_heat_integrating_factor_exact():
    # with the transport switched off, mode k decays by exp(-nu C k^2 dtau)
    M, nu, h = 8, 0.3, 0.1
    rates = nu * np.arange(1, M + 1) ** 2.0
    y = np.ones(M)
    out = lawson_rk4(y, h, rates, lambda v: -rates * v)
    assert np.allclose(out, np.exp(-rates * h), rtol=1e-15, atol=0)


def _holder_coeff(alpha, k):
    f = lambda x: mpmath.sin(x) ** alpha * mpmath.sin(k * x)
    return float(2 / mpmath.pi * mpmath.quad(f, [0, mpmath.pi / 2, mpmath.pi]))


def test_holder_profile_alpha_one():
    prof = holder_profile(1.0, 16)
    assert np.allclose(prof.u.coeffs, OddField.mode(1, 16).coeffs)
    assert prof.c_u == 0.0


def test_holder_coefficients_against_quadrature():
    prof = holder_profile(0.95, 256)
    for k in (1, 2, 3, 5, 11):
        assert prof.omega.coeffs[k - 1] == pytest.approx(_holder_coeff(0.95, k), abs=1e-8)
        assert prof.u.coeffs[k - 1] == pytest.approx(_holder_coeff(0.975, k), abs=1e-8)


def test_holder_profile_close_to_sin():
    x = np.linspace(0, 2 * np.pi, 2001)
    ratios = []
    for al in (0.99, 0.95, 0.92):
        prof = holder_profile(al, 512)
        ratios.append(np.max(np.abs(prof.pointwise(x)["omega"] - np.sin(x))) / (1 - al))
    assert max(ratios) / min(ratios) < 2.0


def test_holder_scaling_negative():
    assert holder_profile(0.95, 1024).c_u < 0


def test_holder_range():
    with pytest.raises(ValueError):
        holder_profile(0.8)


def test_error_terms_examples():
    F1, F2 = error_terms(a=1.0, M=16)
    assert np.max(np.abs(F1.coeffs)) == 0 and np.max(np.abs(F2.coeffs)) == 0
    F1, F2 = error_terms(a=0.9, M=16)
    x = np.linspace(0, 2 * np.pi, 201)
    ref = -0.2 * np.sin(x) * (1 - np.cos(x))
    assert np.max(np.abs(F1(x) - ref)) < 1e-14 and np.max(np.abs(F2(x) - ref)) < 1e-14


def test_holder_system_background_is_near_steady():
    p = ModelParams(a=1.0, alpha=0.95)
    sys_ = HolderSystem(p, 64, holder_profile(0.95, 1024))
    f, c = sys_.rhs(sys_.pack(ModelState(OddField.zeros(64), OddField.zeros(64))))
    assert c == pytest.approx(holder_profile(0.95, 1024).c_u, rel=1e-12)
    assert abs(np.arange(1, 65) @ f[:64]) < 1e-12
    assert np.max(np.abs(f[:128])) < 0.1
