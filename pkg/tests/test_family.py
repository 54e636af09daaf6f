import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasfold.errors import DegenerateFamily, OutsideSupport
from gasfold.family import (
    SolutionFamily,
    WaveFunction,
    branch_u,
    branch_x,
    branch_x_partials,
    fold_count,
    fold_indicator,
    preimage_count,
    profile,
    radicand,
    separated_f,
    solution_surface,
    surface_partials,
    t_of,
    varkappa_coeffs,
    wave_residual,
    x_of,
)
from gasfold.geometry import effective_forms, restrict_2form
from gasfold.oracle import fd_partial, powerlaw_x
from gasfold.thermo import power_law_model

us = st.floats(-3.0, 1.0)
rhos = st.floats(0.2, 3.0)


def test_t_of_reference(pstar):
    assert t_of(pstar, 0.0, 1.0) == pytest.approx(-0.1, abs=1e-15)
    assert t_of(pstar, -2.0, 1.0) == pytest.approx(-0.1, abs=1e-15)


def test_x_of_reference(pstar):
    assert x_of(pstar, 0.0, 1.0) == pytest.approx(-1.5, abs=1e-15)
    assert powerlaw_x(pstar, 0.0, 1.0, 1.0, -2 / 3) == pytest.approx(-1.5, abs=1e-12)


def test_zero_lambda_quadratures(pl_model):
    fam = SolutionFamily(0.0, 1.0, 0.0, 0.0, 0.0, pl_model)
    u = np.linspace(-2, 2, 9)
    assert np.allclose(t_of(fam, u, 1.7), u, atol=1e-15)
    fam = SolutionFamily(0.0, 0.0, 0.0, 0.0, 2.5, pl_model)
    assert np.all(x_of(fam, u, 0.6) == 2.5)


def test_branch_reference(pstar):
    assert radicand(pstar, 1.0, -0.1) == pytest.approx(0.5, abs=1e-15)
    assert branch_u(pstar, 1.0, -0.1, "plus") == pytest.approx(0.0, abs=1e-15)
    assert branch_u(pstar, 1.0, -0.1, "minus") == pytest.approx(-2.0, abs=1e-15)


def test_branch_errors(pstar, pl_model):
    with pytest.raises(DegenerateFamily):
        branch_u(SolutionFamily(0.0, 1.0, 0.0, 0.0, 0.0, pl_model), 1.0, 0.0, "plus")
    with pytest.raises(OutsideSupport) as exc:
        branch_u(pstar, 1.0, -5.0, "plus")
    assert exc.value.D < 0
    with pytest.raises(ValueError):
        branch_u(pstar, 1.0, -0.1, "sideways")


def test_branch_at_zero_radicand(pstar):
    from scipy import optimize

    t = 0.0
    r = optimize.brentq(lambda q: radicand(pstar, q, t), 1.0, 2.0, xtol=1e-15)
    up = branch_u(pstar, r, t, "plus")
    um = branch_u(pstar, r, t, "minus")
    assert up == pytest.approx(-1.0, abs=1e-6) and um == pytest.approx(-1.0, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(rhos, st.floats(1e-6, 1.0), st.sampled_from(["plus", "minus"]))
def test_branch_round_trip(pstar, rho, frac, sign):
    # t between the support boundary and 5 units above it
    t_min = float(t_of(pstar, -1.0, rho))
    t = t_min + 5 * frac
    u = branch_u(pstar, rho, t, sign)
    assert t_of(pstar, u, rho) == pytest.approx(t, abs=1e-10 * max(1.0, abs(t)))


@settings(max_examples=100, deadline=None)
@given(us)
def test_quadratic_symmetry(pstar, u):
    assert t_of(pstar, u, 1.3) == pytest.approx(t_of(pstar, -2.0 - u, 1.3), abs=1e-12)


def test_wave_residual_cases(pstar):
    f = separated_f(pstar)
    rng = np.random.default_rng(20240917)
    u = rng.uniform(-3, 1, 200)
    rho = rng.uniform(0.2, 3, 200)
    assert np.max(np.abs(wave_residual(f, u, rho, pstar.hm))) < 1e-12
    linear = WaveFunction(lambda u, r: 2 * u - 3 * r + 1)
    assert np.max(np.abs(wave_residual(linear, u, rho, pstar.hm))) < 1e-6
    flat = power_law_model(1.0, 0.0)
    sq = WaveFunction(lambda u, r: u**2 + 0 * r)
    assert wave_residual(sq, 0.7, 1.2, flat) == pytest.approx(2.0, rel=1e-6)


def test_separated_f_reproduces_time(pstar):
    f = separated_f(pstar)
    u, rho = 0.4, 1.9
    assert f.f(u, rho) / rho == pytest.approx(t_of(pstar, u, rho), rel=1e-14)


def test_profile_contains_reference_samples(pstar):
    grid = np.concatenate([np.linspace(0.2, 3.0, 57), [1.0]])
    samples = profile(pstar, -0.1, grid)
    hits = [s for s in samples if s.rho == 1.0]
    plus = [s for s in hits if s.branch == "plus"]
    minus = [s for s in hits if s.branch == "minus"]
    assert plus[0].x == pytest.approx(-1.5) and plus[0].u == pytest.approx(0.0, abs=1e-15)
    assert minus[0].u == pytest.approx(-2.0)
    assert minus[0].x == pytest.approx(x_of(pstar, -2.0, 1.0))


def test_profile_empty_far_below(pstar):
    assert profile(pstar, -100.0, np.geomspace(0.1, 10, 101)) == []


def test_profile_t0_single_valued(pstar):
    samples = profile(pstar, 0.0, np.geomspace(1e-3, 1e3, 4001))
    assert fold_count(samples) == 0
    xs = np.array([s.x for s in samples])
    assert np.all(np.diff(xs) >= 0)


def test_profile_folds_later(pstar):
    grid = np.geomspace(1e-3, 1e3, 4001)
    s27 = profile(pstar, 2.7, grid)
    s375 = profile(pstar, 3.75, grid)
    assert fold_count(s27) >= 1 and fold_count(s375) >= 1
    xs = np.array([s.x for s in s375])
    probe = np.linspace(xs.min(), xs.max(), 2001)
    assert max(preimage_count(s375, x) for x in probe) >= 3


def test_profile_samples_fields(pstar):
    samples = profile(pstar, 1.0, np.linspace(0.3, 2.0, 41))
    assert all(s.t == 1.0 for s in samples)
    for s in samples:
        assert radicand(pstar, s.rho, 1.0) >= 0
        assert s.x == pytest.approx(x_of(pstar, s.u, s.rho), abs=1e-12)


def test_surface_partials_match_fd(pstar):
    rng = np.random.default_rng(20240917)
    for u, rho in zip(rng.uniform(-3, 1, 50), rng.uniform(0.2, 3, 50)):
        t_u, t_rho, x_u, x_rho = surface_partials(pstar, u, rho)
        t = lambda a, b: t_of(pstar, a, b)
        x = lambda a, b: x_of(pstar, a, b)
        for exact, fn, k in ((t_u, t, 0), (t_rho, t, 1), (x_u, x, 0), (x_rho, x, 1)):
            approx = fd_partial(fn, (u, rho), k)
            assert exact == pytest.approx(approx, rel=1e-6, abs=1e-8)


def test_solution_property_pstar(pstar):
    surf = solution_surface(pstar)
    w1, w2 = effective_forms(pstar.hm)
    rng = np.random.default_rng(20240917)
    u = rng.uniform(-3, 1, 200)
    rho = rng.uniform(0.2, 3, 200)
    assert np.max(np.abs(restrict_2form(w1, surf, u, rho))) < 1e-8
    assert np.max(np.abs(restrict_2form(w2, surf, u, rho))) < 1e-8


@settings(max_examples=50, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-2.0, 2.0), st.floats(-3.0, 3.0), st.floats(0.3, 2.0), st.floats(-0.5, 1.0))
def test_solution_property_any_family(lam, a0, a2, A0, m):
    fam = SolutionFamily(lam, a0, a2, 0.5, 0.1, power_law_model(A0, m))
    surf = solution_surface(fam)
    w1, w2 = effective_forms(fam.hm)
    u, rho = np.array([-1.0, 0.3, 0.9]), np.array([0.4, 1.0, 2.5])
    scale = 1 + np.max(np.abs(surf.jacobian(u, rho))) ** 2 * (1 + np.max(rho * fam.hm.A(rho) ** 2))
    assert np.max(np.abs(restrict_2form(w1, surf, u, rho))) < 1e-12 * scale * 10
    assert np.max(np.abs(restrict_2form(w2, surf, u, rho))) < 1e-12 * scale * 10


def test_solution_property_detects_wrong_model(pstar):
    from dataclasses import replace

    fam = replace(pstar, hm=power_law_model(1.0, -2 / 3 + 0.1))
    surf = solution_surface(fam)
    w1, w2 = effective_forms(pstar.hm)
    u, rho = np.array([0.3]), np.array([2.0])
    # mass form vanishes for any A; the momentum form sees the wrong model
    assert np.max(np.abs(restrict_2form(w1, surf, u, rho))) < 1e-12
    assert np.max(np.abs(restrict_2form(w2, surf, u, rho))) > 1e-3


def test_fold_indicator_changes_sign_across_caustic(pstar, pstar_caustics):
    rho, t, x = pstar_caustics["plus"].arrays()
    k = np.argmin(np.abs(rho - 1.0))
    uc = pstar_caustics["plus"].u_critical[k]
    left = fold_indicator(pstar, uc - 0.05, rho[k])
    right = fold_indicator(pstar, uc + 0.05, rho[k])
    assert left * right < 0


def test_varkappa_is_gradient_of_x(pstar):
    rng = np.random.default_rng(20240917)
    u = rng.uniform(-3, 1, 100)
    rho = rng.uniform(0.2, 3, 100)
    du, drho = varkappa_coeffs(pstar, u, rho)
    _, _, x_u, x_rho = surface_partials(pstar, u, rho)
    assert np.max(np.abs(x_u + du)) < 1e-10
    assert np.max(np.abs(x_rho + drho)) < 1e-10


def test_varkappa_closed(pstar):
    rng = np.random.default_rng(20240917)
    for u, rho in zip(rng.uniform(-3, 1, 100), rng.uniform(0.2, 3, 100)):
        a = fd_partial(lambda a_, b_: varkappa_coeffs(pstar, a_, b_)[0], (u, rho), 1)
        b = fd_partial(lambda a_, b_: varkappa_coeffs(pstar, a_, b_)[1], (u, rho), 0)
        assert abs(a - b) < 1e-6


def test_varkappa_loop_integral_vanishes(pstar):
    from scipy import integrate

    u0, u1, r0, r1 = -1.5, 0.5, 0.6, 2.2
    du = lambda u, r: varkappa_coeffs(pstar, u, r)[0]
    dr = lambda u, r: varkappa_coeffs(pstar, u, r)[1]
    q = lambda f, a, b: integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-13)[0]
    loop = (q(lambda u: du(u, r0), u0, u1) + q(lambda r: dr(u1, r), r0, r1)
            - q(lambda u: du(u, r1), u0, u1) - q(lambda r: dr(u0, r), r0, r1))
    assert abs(loop) < 1e-8


def test_branch_x_partials_match_fd(pstar):
    for rho, t, sign in ((1.0, 1.5, "plus"), (0.8, 2.0, "minus"), (2.0, 3.0, "plus")):
        drho, dt = branch_x_partials(pstar, rho, t, sign)
        f = lambda r, tt: branch_x(pstar, r, tt, sign)
        assert drho == pytest.approx(fd_partial(f, (rho, t), 0), rel=1e-6)
        assert dt == pytest.approx(fd_partial(f, (rho, t), 1), rel=1e-6)


def test_preimage_count_simple():
    from gasfold.family import ProfileSample

    pts = [ProfileSample(x, 1.0, 0.0, "plus", 0.0) for x in (0.0, 2.0, 1.0, 3.0)]
    assert preimage_count(pts, 1.5) == 3
    assert preimage_count(pts, 2.5) == 1
    assert fold_count(pts) == 1
