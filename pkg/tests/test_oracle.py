import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasfold.errors import OracleError
from gasfold.family import ProfileSample, SolutionFamily, profile, t_of, x_of
from gasfold.oracle import (
    FDConfig,
    fd_partial,
    flux_integral,
    fold_scan,
    hausdorff,
    mass_integral,
    nquad,
)
from gasfold.singularity import caustic


def _samples(x, rho):
    return [ProfileSample(float(a), float(b), 0.0, "plus", 0.0) for a, b in zip(x, rho)]


def test_fd_polynomial():
    f = lambda u, r: u**2 * r
    assert fd_partial(f, (2.0, 3.0), 0) == pytest.approx(12.0, abs=1e-8)
    assert fd_partial(lambda u, r: 4.0 + 0 * u, (2.0, 3.0), 1) == 0.0


def test_fd_on_family(pstar):
    assert fd_partial(lambda u, r: t_of(pstar, u, r), (0.0, 1.0), 0) == pytest.approx(1.0, abs=1e-8)


def test_fd_config_validation():
    with pytest.raises(ValueError):
        FDConfig(h=0.0)
    with pytest.raises(ValueError):
        FDConfig(scheme="forward")


def test_fd_nonfinite():
    with pytest.raises(OracleError):
        fd_partial(lambda x: np.where(x < 0, np.nan, x), (0.0,), 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.5, 3))
def test_fd_exact_for_cubics(a, b):
    f = lambda x, y: x**3 * y - 2 * x * y**2
    assert fd_partial(f, (a, b), 0) == pytest.approx(3 * a * a * b - 2 * b * b, abs=1e-7)


def test_nquad_values(pl_model):
    assert nquad(lambda r: r ** (-1 / 3), 1.0, 2.0) == pytest.approx(1.5 * (2 ** (2 / 3) - 1), abs=1e-12)
    assert nquad(lambda r: r ** (-1 / 3), 1.0, 2.0) == pytest.approx(pl_model.Q(2.0) - pl_model.Q(1.0), abs=1e-12)
    assert nquad(np.exp, 1.0, 1.0) == 0.0
    assert nquad(pl_model.Q, 1.0, 2.0) == pytest.approx(pl_model.IQ(2.0) - pl_model.IQ(1.0), abs=1e-9)


def test_nquad_failure():
    with pytest.raises(OracleError):
        nquad(lambda x: np.sin(1.0 / x) / x**2, 1e-6, 1.0, tol=1e-14)


def test_fold_scan_maps_onto_caustic(pstar):
    u = np.linspace(-4, 2, 61)
    rho = np.linspace(0.5, 3.0, 2001)
    pts = fold_scan(pstar, u, rho)
    assert pts.shape[1] == 2 and len(pts) > 1000
    tx = np.column_stack([t_of(pstar, pts[:, 0], pts[:, 1]), x_of(pstar, pts[:, 0], pts[:, 1])])
    curves = []
    for b in ("plus", "minus"):
        _, t, x = caustic(pstar, np.linspace(0.5, 3.0, 20001), b).arrays()
        curves.append(np.column_stack([t, x]))
    ref = np.vstack(curves)
    from scipy.spatial import cKDTree

    d = cKDTree(ref).query(tx)[0]
    assert d.max() < 1e-2


def test_fold_scan_degenerate_lambda(pl_model):
    # lam = 0: indicator = alpha0 x_rho = -alpha0**2 rho A**2 < 0, no zeros
    fam = SolutionFamily(0.0, 1.0, 0.0, 0.0, 0.0, pl_model)
    assert fold_scan(fam, np.linspace(-1, 1, 11), np.linspace(0.5, 2, 11)).shape == (0, 2)


def test_mass_constant_density():
    smp = _samples(np.linspace(-5, 5, 11), np.full(11, 2.5))
    assert mass_integral(smp, (-1.3, 2.2)) == pytest.approx(2.5 * 3.5, abs=1e-14)


def test_mass_rejects_fold():
    smp = _samples([0.0, 2.0, 1.0, 3.0], [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(OracleError):
        mass_integral(smp, (0.0, 3.0))
    assert np.isfinite(mass_integral(smp, (0.0, 3.0), allow_multivalued=True))


def test_mass_jump_contributes_nothing():
    smp = _samples([0.0, 1.0, 1.0, 2.0], [1.0, 1.0, 3.0, 3.0])
    assert mass_integral(smp, (0.0, 2.0)) == pytest.approx(4.0)


def test_mass_trapezoid_order():
    exact = np.exp(1.0) - 1.0
    errs = []
    for n in (41, 81, 161):
        x = np.linspace(0, 1, n)
        errs.append(abs(mass_integral(_samples(x, np.exp(x)), (0.0, 1.0)) - exact))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.02)


def test_hausdorff():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 0.5], [1.0, 0.0], [3.0, 0.0]])
    assert hausdorff(a, b) == pytest.approx(2.0)
    assert hausdorff(a, a) == 0.0
    with pytest.raises(OracleError):
        hausdorff(a, np.empty((0, 2)))


def test_flux_balances_mass_before_folding(pstar):
    # single-valued profile before the cusp: mass change equals boundary flux
    grid = np.geomspace(1e-3, 1e3, 100001)
    window, t1, t2 = (-3.0, -1.0), 0.5, 1.0
    m1 = mass_integral(profile(pstar, t1, grid, apex_refine=20000), window)
    m2 = mass_integral(profile(pstar, t2, grid, apex_refine=20000), window)
    coarse = np.geomspace(1e-3, 1e3, 4001)
    inflow = flux_integral(pstar, window[0], t1, t2, coarse) - flux_integral(pstar, window[1], t1, t2, coarse)
    assert abs(m2 - m1 - inflow) < 1e-6
