import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasfold.errors import DomainError, HyperbolicityError, ReductionError
from gasfold.oracle import energy_balance_residual, fd_partial, nquad
from gasfold.thermo import (
    IdealGasParams,
    ThermodynamicModel,
    applicability,
    entropy,
    homentropic_reduce,
    ideal_gas_model,
    lagrangian_state,
    model_from_pressure,
    model_from_sound_speed,
    power_law_model,
)

temps = st.floats(0.05, 50.0)
dens = st.floats(0.05, 50.0)


def test_lagrangian_state_ideal_unit_point(ideal3):
    p, e = lagrangian_state(ideal3, 1.0, 1.0)
    assert p == pytest.approx(1.0, rel=1e-14)
    assert e == pytest.approx(1.5, rel=1e-14)


def test_lagrangian_state_n5():
    p, e = lagrangian_state(ideal_gas_model(IdealGasParams(5)), 2.0, 3.0)
    assert p == pytest.approx(6.0, rel=1e-14)
    assert e == pytest.approx(5.0, rel=1e-14)


def test_lagrangian_state_n3_at_2_5(ideal3):
    p, e = lagrangian_state(ideal3, 2.0, 5.0)
    assert (p, e) == (pytest.approx(10.0), pytest.approx(3.0))


def test_lagrangian_state_deterministic(ideal3):
    assert lagrangian_state(ideal3, 1.7, 0.3) == lagrangian_state(ideal3, 1.7, 0.3)


@pytest.mark.parametrize("T,rho", [(0.0, 1.0), (1.0, -1.0), (float("nan"), 1.0)])
def test_lagrangian_state_domain(ideal3, T, rho):
    with pytest.raises(DomainError):
        lagrangian_state(ideal3, T, rho)


def test_entropy_values(ideal3):
    assert entropy(ideal3, 1.0, 1.0) == pytest.approx(1.5, rel=1e-14)
    assert entropy(ideal3, math.e**2, 1.0) == pytest.approx(4.5, rel=1e-14)
    assert entropy(ideal3, 1.0, 1.0) - entropy(ideal3, 1.0, math.e) == pytest.approx(1.0, rel=1e-14)


def test_applicability_ideal_unit(ideal3):
    k_tt, k_rr, ok = applicability(ideal3, 1.0, 1.0)
    assert (k_tt, k_rr, ok) == (pytest.approx(-1.5), pytest.approx(-1.0), True)


def test_applicability_boundary():
    zero = lambda rho, T: 0.0 * np.asarray(rho) * np.asarray(T)
    model = ThermodynamicModel(
        phi=lambda rho, T: np.log(T), phi_T=lambda rho, T: 1.0 / np.asarray(T),
        phi_rho=zero, phi_TT=lambda rho, T: -1.0 / np.asarray(T) ** 2, phi_rhorho=zero,
        R=1.0, descriptor="flat in rho")
    _, k_rr, ok = applicability(model, 1.0, 1.0)
    assert k_rr == 0.0 and ok is False


@settings(max_examples=100, deadline=None)
@given(temps, dens, st.floats(0.5, 10.0))
def test_applicability_ideal_everywhere(T, rho, n):
    model = ideal_gas_model(IdealGasParams(n))
    k_tt, k_rr, ok = applicability(model, T, rho)
    assert ok
    assert k_tt == pytest.approx(-n / (2 * T * T), rel=1e-12)
    assert k_rr == pytest.approx(-1.0 / rho**2, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(temps, dens)
def test_energy_balance_identity(T, rho):
    model = ideal_gas_model(IdealGasParams(3, R=1.3))
    a, b = energy_balance_residual(model, T, rho)
    assert abs(a) < 1e-6 * max(1.0, 1.0 / T)
    assert abs(b) < 1e-6 * max(1.0, 1.0 / (T * rho**2))


@settings(max_examples=40, deadline=None)
@given(temps, dens)
def test_potential_derivatives_match_fd(T, rho):
    model = ideal_gas_model(IdealGasParams(3))
    phi = lambda r, t: model.phi(r, t)
    assert model.phi_T(rho, T) == pytest.approx(fd_partial(phi, (rho, T), 1), rel=1e-6)
    assert model.phi_rho(rho, T) == pytest.approx(fd_partial(phi, (rho, T), 0), rel=1e-6)
    assert model.phi_TT(rho, T) == pytest.approx(fd_partial(model.phi_T, (rho, T), 1), rel=1e-6)
    assert model.phi_rhorho(rho, T) == pytest.approx(fd_partial(model.phi_rho, (rho, T), 0), rel=1e-6)


def test_ideal_params_validation():
    with pytest.raises(DomainError):
        IdealGasParams(0)
    with pytest.raises(DomainError):
        IdealGasParams(3, R=-1)


def test_reduce_ideal_m(ideal3_hm):
    assert ideal3_hm.params["m"] == pytest.approx(-2.0 / 3.0, rel=1e-15)
    assert ideal3_hm.kind == "closed-form"


def test_reduce_ideal_holds_entropy(ideal3):
    s0 = 0.7
    hm = homentropic_reduce(ideal3, s0)
    rho = np.geomspace(0.1, 10, 31)
    assert np.allclose(entropy(ideal3, hm.T(rho), rho), s0, rtol=0, atol=1e-12)


def test_reduce_ideal_closed_forms(ideal3):
    # the textbook closed forms use the entropy level without the Rn/2 offset of this package
    n, R, s0 = 3.0, 1.0, 2.1
    hm = homentropic_reduce(ideal3, s0)
    level = s0 - R * n / 2
    rho = np.geomspace(0.1, 10, 41)
    c = np.exp(2 * level / (R * n))
    A0 = np.sqrt(R * (1 + 2 / n) * c)
    assert np.allclose(hm.T(rho), c * rho ** (2 / n), rtol=1e-12, atol=0)
    assert np.allclose(hm.p(rho), R * c * rho ** (2 / n + 1), rtol=1e-12, atol=0)
    assert np.allclose(hm.A(rho), A0 * rho ** (1 / n - 1), rtol=1e-12, atol=0)
    assert np.allclose(hm.A(rho), np.sqrt(hm.dp(rho)) / rho, rtol=1e-12, atol=0)


def test_a0_one_gives_closed_integrals(pl_model):
    rho = np.geomspace(0.1, 10, 25)
    assert np.allclose(pl_model.Q(rho), 1.5 * rho ** (2 / 3), rtol=1e-14)
    assert np.allclose(pl_model.IQ(rho), 0.9 * rho ** (5 / 3), rtol=1e-14)
    # t-quadrature coefficient lam A0^2 rho^(2m+2) / (2 (2m^2+5m+3)) equals IQ/rho
    m = -2 / 3
    coeff = rho ** (2 * m + 2) / (2 * (2 * m * m + 5 * m + 3))
    assert np.allclose(pl_model.IQ(rho) / rho, coeff, rtol=1e-13)


def test_ideal_gas_s0_for_unit_a0_is_hyperbolic():
    n, R = 3.0, 1.0
    # A0 = 1 needs exp(2 level / (R n)) = 1 / (R (1 + 2/n)), level = s0 - R n / 2
    s0 = R * n / 2 + 0.5 * R * n * np.log(1.0 / (R * (1 + 2 / n)))
    params = IdealGasParams(n, R, s0)
    assert params.A0 == pytest.approx(1.0, rel=1e-14)
    hm = homentropic_reduce(ideal_gas_model(params), s0)
    rho = np.geomspace(1e-3, 1e3, 101)
    assert np.all(hm.dp(rho) > 0)
    assert np.allclose(hm.A(rho), rho ** (-2 / 3), rtol=1e-12)


@pytest.mark.parametrize("A0,m", [(1.0, -2 / 3), (0.7, 0.4), (2.0, -1.0), (1.3, -1.5)])
def test_closed_integrals_match_quadrature(A0, m):
    hm = power_law_model(A0, m)
    rho = np.geomspace(0.1, 10, 9)
    for a, b in zip(rho[:-1], rho[1:]):
        q = nquad(lambda s: s * hm.A(s) ** 2, a, b, tol=1e-10)
        assert q == pytest.approx(hm.Q(b) - hm.Q(a), rel=1e-9, abs=1e-12)
        iq = nquad(hm.Q, a, b, tol=1e-10)
        assert iq == pytest.approx(hm.IQ(b) - hm.IQ(a), rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5.0))
def test_integral_derivatives(rho):
    hm = power_law_model(1.0, -2 / 3)
    assert fd_partial(hm.Q, (rho,), 0) == pytest.approx(rho * hm.A(rho) ** 2, rel=1e-6)
    assert fd_partial(hm.IQ, (rho,), 0) == pytest.approx(hm.Q(rho), rel=1e-6)


def test_numeric_reduction_matches_closed_form(ideal3):
    # a model without the ideal-gas tag goes through the numeric route
    from dataclasses import replace

    numeric = replace(ideal3, params={"kind": "generic"})
    s0 = 0.4
    hm_num = homentropic_reduce(numeric, s0, rho_range=(0.1, 10.0))
    hm_cf = homentropic_reduce(ideal3, s0, rho_range=(0.1, 10.0))
    assert hm_num.kind == "numeric"
    rho = np.geomspace(0.1, 10, 13)
    T = np.array([hm_num.T(r) for r in rho])
    assert np.max(np.abs(entropy(ideal3, T, rho) - s0)) < 1e-10
    assert np.allclose(T, hm_cf.T(rho), rtol=1e-10)
    assert np.allclose([hm_num.dp(r) for r in rho], hm_cf.dp(rho), rtol=1e-7)
    # quadrature constants are anchored at rho = 1, so compare differences
    q_num = np.array([hm_num.Q(r) for r in rho])
    assert np.allclose(q_num - hm_num.Q(1.0), hm_cf.Q(rho) - hm_cf.Q(1.0), rtol=1e-8, atol=1e-10)


def test_reduction_error_when_unbracketed():
    # entropy bounded above in T: s = 1 - 1/T - ln rho never reaches large s0
    model = ThermodynamicModel(
        phi=lambda rho, T: -2.0 / np.asarray(T) + 1.0 - np.log(rho) + 0 * np.asarray(T),
        phi_T=lambda rho, T: 2.0 / np.asarray(T) ** 2 + 0 * np.asarray(rho),
        phi_rho=lambda rho, T: -1.0 / np.asarray(rho) + 0 * np.asarray(T),
        phi_TT=lambda rho, T: -4.0 / np.asarray(T) ** 3 + 0 * np.asarray(rho),
        phi_rhorho=lambda rho, T: 1.0 / np.asarray(rho) ** 2 + 0 * np.asarray(T),
        R=1.0, descriptor="bounded entropy")
    with pytest.raises(ReductionError):
        homentropic_reduce(model, 50.0, rho_range=(0.5, 2.0))


def test_hyperbolicity_error_carries_rho():
    with pytest.raises(HyperbolicityError) as exc:
        model_from_pressure(lambda r: -(r - 2.0) ** 2, rho_range=(1.0, 5.0))
    assert exc.value.rho > 2.0 - 1e-9


def test_domain_rejects_outside_range(pl_model):
    with pytest.raises(DomainError):
        pl_model.A(2e3)
    with pytest.raises(DomainError):
        power_law_model(1.0, -2 / 3, rho_range=(0.0, 1.0))


def test_model_from_sound_speed_roundtrip():
    hm = model_from_sound_speed(lambda r: r ** -2.0, rho_range=(0.5, 4.0))
    rho = np.linspace(0.5, 4.0, 7)
    assert np.allclose([hm.dp(r) for r in rho], rho**2 * rho ** -4.0, rtol=1e-9)
    assert hm.Q(1.0) == pytest.approx(0.0, abs=1e-14)


def test_log_special_cases():
    hm = power_law_model(1.0, -1.0)  # 2m + 2 = 0
    assert hm.Q(math.e) == pytest.approx(1.0)
    hm = power_law_model(1.0, -1.5)  # 2m + 3 = 0
    assert hm.IQ(math.e) == pytest.approx(-1.0)
    assert fd_partial(hm.IQ, (2.0,), 0) == pytest.approx(hm.Q(2.0), rel=1e-8)
