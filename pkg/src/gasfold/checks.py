"""
Invariant checks that pit the analytic routes against the oracles.

Each check returns a :class:`CheckResult` with the worst residual it saw and
the tolerance it was held to.  The ``validate`` command runs them all; the
acceptance tests call them with their stated sample sizes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .errors import GasfoldError
from .family import (
    SolutionFamily,
    branch_u,
    branch_x_partials,
    fold_count,
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
from .geometry import aw_matrix, effective_forms, euler_forms, pairing_matrix, restrict_2form
from .oracle import (
    SEED,
    FDConfig,
    energy_balance_residual,
    fd_partial,
    flux_integral,
    fold_scan,
    hausdorff,
    mass_integral,
    powerlaw_t,
    powerlaw_x,
    powerlaw_z,
)
from .singularity import (
    caustic,
    caustic_t,
    caustic_x,
    critical_u_root,
    cut_profile,
    potential_H,
    shock_front,
    z_pm,
)
from .thermo import HomentropicModel, ThermodynamicModel, applicability

__all__ = [
    "CheckResult",
    "halton_points",
    "check_solution_property",
    "check_specialization",
    "check_wave_equation",
    "check_varkappa",
    "check_potential",
    "check_caustic_hausdorff",
    "check_caustic_on_fold",
    "check_shock_front",
    "check_mass_conservation",
    "check_front_gap",
    "check_fold_transition",
    "check_thermodynamics",
    "dense_caustic",
    "feasible_points",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["worst"] = float(self.worst)
        return d


def _result(name, worst, tol, **detail):
    worst = float(worst)
    return CheckResult(name, bool(np.isfinite(worst) and worst < tol), worst, float(tol), detail)


def halton_points(n, box, seed=SEED):
    """``n`` scrambled Halton points in the box ``[(lo, hi), ...]``."""
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    pts = qmc.Halton(d=len(box), scramble=True, seed=seed).random(n)
    return lo + pts * (hi - lo)


def _rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(np.abs(b), 1.0)


def check_solution_property(fam: SolutionFamily, n=10_000, box=((-3.0, 1.0), (0.2, 3.0)), tol=1e-8,
                            forms_model: HomentropicModel = None):
    """Both effective forms restrict to zero on the quadrature surface.

    ``forms_model`` builds the forms from a different model than the family;
    that must make the check fail.
    """
    pts = halton_points(n, box)
    u, rho = pts[:, 0], pts[:, 1]
    surf = solution_surface(fam)
    w1, w2 = effective_forms(forms_model or fam.hm)
    r1 = np.abs(restrict_2form(w1, surf, u, rho))
    r2 = np.abs(restrict_2form(w2, surf, u, rho))
    return _result("solution_property", max(r1.max(), r2.max()), tol, points=n)


def check_specialization(fam: SolutionFamily, n=100, box=((-3.0, 1.0), (0.2, 3.0)), tol=1e-12):
    """Generic quadratures and ``Z+/-`` against the standalone power-law closed forms on an ``n`` x ``n`` grid."""
    A0, m = fam.hm.params["A0"], fam.hm.params["m"]
    u, rho = np.meshgrid(np.linspace(*box[0], n), np.linspace(*box[1], n))
    errs = {
        "t": _rel(t_of(fam, u, rho), powerlaw_t(fam, u, rho, A0, m)).max(),
        "x": _rel(x_of(fam, u, rho), powerlaw_x(fam, u, rho, A0, m)).max(),
    }
    r = rho[:, 0]
    for sign in ("plus", "minus"):
        errs["Z_" + sign] = _rel(z_pm(fam, r, sign), powerlaw_z(fam, r, sign, A0, m)).max()
    return _result("specialization", max(errs.values()), tol, **{k: float(v) for k, v in errs.items()})


def check_wave_equation(fam: SolutionFamily, n=1000, box=((-3.0, 1.0), (0.2, 3.0)), tol=1e-9):
    pts = halton_points(n, box, seed=SEED + 1)
    f = separated_f(fam)
    res = np.abs(wave_residual(f, pts[:, 0], pts[:, 1], fam.hm))
    scale = np.maximum(1.0, np.abs(f.second_u(pts[:, 0], pts[:, 1])))
    return _result("wave_equation", (res / scale).max(), tol)


def check_varkappa(fam: SolutionFamily, n=1000, box=((-3.0, 1.0), (0.2, 3.0)), tol_closed=1e-6, tol_grad=1e-10):
    """The 1-form ``dx + a du + b drho`` is closed and its coefficients are ``-grad x``."""
    pts = halton_points(n, box, seed=SEED + 2)
    u, rho = pts[:, 0], pts[:, 1]
    a = lambda u_, r_: varkappa_coeffs(fam, u_, r_)[0]
    b = lambda u_, r_: varkappa_coeffs(fam, u_, r_)[1]
    a_rho = fd_partial(a, (u, rho), 1)
    b_u = fd_partial(b, (u, rho), 0)
    closed = (np.abs(a_rho - b_u) / np.maximum(1.0, np.abs(a_rho))).max()
    _, _, x_u, x_rho = surface_partials(fam, u, rho)
    ca, cb = varkappa_coeffs(fam, u, rho)
    grad = max(_rel(-ca, x_u).max(), _rel(-cb, x_rho).max())
    x_u_fd = fd_partial(lambda u_, r_: x_of(fam, u_, r_), (u, rho), 0)
    x_r_fd = fd_partial(lambda u_, r_: x_of(fam, u_, r_), (u, rho), 1)
    fd_grad = max(_rel(x_u_fd, x_u).max(), _rel(x_r_fd, x_rho).max())
    passed = closed < tol_closed and grad < tol_grad and fd_grad < tol_closed
    return CheckResult("varkappa", bool(passed), float(max(closed, fd_grad)), tol_closed,
                       {"closedness": float(closed), "gradient_vs_coeffs": float(grad),
                        "gradient_vs_fd": float(fd_grad), "gradient_tolerance": tol_grad})


def feasible_points(fam: SolutionFamily, n, box=((0.2, 3.0), (1.0, 5.0)), margin=1e-3, seed=SEED + 3):
    """``n`` quasi-random ``(rho, t)`` with ``D(rho, t) > margin``."""
    out = []
    k = 0
    while sum(len(o) for o in out) < n:
        pts = halton_points(4 * n, box, seed=seed + k)
        D = np.asarray(radicand(fam, pts[:, 0], pts[:, 1]))
        out.append(pts[D > margin])
        k += 1
        if k > 20:
            raise GasfoldError("feasible region too small in the sampling box")
    return np.vstack(out)[:n]


def check_potential(fam: SolutionFamily, n=1000, box=((0.2, 3.0), (1.0, 5.0)), tol=1e-6):
    """Finite-difference gradient of ``H`` equals ``(rho x_rho, rho x_t - rho U)``."""
    pts = feasible_points(fam, n, box)
    rho, t = pts[:, 0], pts[:, 1]
    cfg = FDConfig(h=1e-6)
    worst = 0.0
    for sign in ("plus", "minus"):
        H = lambda r_, t_: potential_H(fam, r_, t_, sign)
        H_rho = fd_partial(H, (rho, t), 0, cfg)
        H_t = fd_partial(H, (rho, t), 1, cfg)
        x_rho, x_t = branch_x_partials(fam, rho, t, sign)
        U = branch_u(fam, rho, t, sign)
        worst = max(worst, _rel(H_rho, rho * x_rho).max(), _rel(H_t, rho * x_t - rho * U).max())
    return _result("potential", worst, tol, points=n)


def dense_caustic(fam: SolutionFamily, branch, t_window, ds=5e-4, n_coarse=2001):
    """Caustic branch resampled so neighbouring ``(t, x)`` points are about ``ds`` apart."""
    lo, hi = fam.hm.rho_range
    coarse = caustic(fam, np.geomspace(lo, hi, n_coarse), branch)
    r, t, x = coarse.arrays()
    inside = np.nonzero((t >= t_window[0]) & (t <= t_window[1]))[0]
    if inside.size == 0:
        return coarse, np.empty((0, 2)), np.empty(0)
    i0, i1 = max(inside[0] - 1, 0), min(inside[-1] + 2, r.size)
    r, t, x = r[i0:i1], t[i0:i1], x[i0:i1]
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(t), np.diff(x)))])
    rho = np.interp(np.arange(0.0, arc[-1], ds), arc, r)
    curve = caustic(fam, rho, branch)
    r, t, x = curve.arrays()
    keep = (t >= t_window[0]) & (t <= t_window[1])
    return curve, np.column_stack([t[keep], x[keep]]), r[keep]


def check_caustic_hausdorff(fam: SolutionFamily, t_window=(1.0, 6.0), tol=1e-3, ds=5e-4,
                            n_rho=200_001, n_u=41):
    """Parametric caustic against a brute-force scan of the fold indicator in ``(t, x)``."""
    curves = [dense_caustic(fam, b, t_window, ds) for b in ("plus", "minus")]
    para = np.vstack([c[1] for c in curves])
    if para.size == 0:
        return _result("caustic_hausdorff", np.inf, tol, reason="no caustic points in the window")
    rho_in = np.concatenate([c[2] for c in curves])
    rho_lo, rho_hi = rho_in.min(), rho_in.max()
    u_all = np.concatenate([np.asarray(c[0].u_critical) for c in curves])
    u_span = (u_all.min() - 1.0, u_all.max() + 1.0)
    scan = fold_scan(fam, np.linspace(*u_span, n_u), np.geomspace(rho_lo, rho_hi, n_rho))
    T = np.asarray(t_of(fam, scan[:, 0], scan[:, 1]))
    X = np.asarray(x_of(fam, scan[:, 0], scan[:, 1]))
    keep = (T >= t_window[0]) & (T <= t_window[1])
    oracle = np.column_stack([T[keep], X[keep]])
    if oracle.size == 0:
        return _result("caustic_hausdorff", np.inf, tol, reason="fold scan found nothing")
    d = hausdorff(para, oracle)
    return _result("caustic_hausdorff", d, tol, parametric=len(para), scanned=len(oracle))


def check_caustic_on_fold(fam: SolutionFamily, n=2001, tol=1e-8):
    """Every emitted caustic point zeroes the fold indicator (relative to its terms)."""
    worst = 0.0
    skipped = 0
    for branch in ("plus", "minus"):
        curve = caustic(fam, None if n is None else np.geomspace(*_clip(fam), n), branch)
        r, _, _ = curve.arrays()
        u = np.asarray(curve.u_critical)
        t_u, t_rho, x_u, x_rho = surface_partials(fam, u, r)
        J = np.abs(t_u * x_rho - t_rho * x_u)
        scale = np.maximum(1.0, np.maximum(np.abs(t_u * x_rho), np.abs(t_rho * x_u)))
        worst = max(worst, (J / scale).max())
        skipped += curve.skipped
    return _result("caustic_on_fold", worst, tol, skipped=skipped)


def _clip(fam):
    lo, hi = fam.hm.rho_range
    return max(lo, 1e-3), min(hi, 1e3)


def _caustic_arm_x(fam, branch, rho_c, t):
    """Caustic ``x`` on both arms of the cusp of ``branch`` at time ``t``."""
    lo, hi = _clip(fam)

    def tf(r):
        r = np.asarray(r, dtype=float)
        if branch == "plus":
            tc = caustic_t(fam, r)
        else:
            tc = t_of(fam, critical_u_root(fam, r, "minus"), r)
        return np.asarray(tc, dtype=float) - t

    xs = []
    for a, b in ((lo, rho_c), (rho_c, hi)):
        grid = np.geomspace(a, b, 200)
        vals = tf(grid)
        idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if idx.size == 0:
            return None
        i = idx[-1] if b == rho_c else idx[0]
        r = optimize.brentq(lambda q: float(tf(q)), grid[i], grid[i + 1], xtol=1e-14)
        xs.append(float(caustic_x(fam, r, branch)))
    return tuple(sorted(xs))


def check_shock_front(fam: SolutionFamily, branch="plus", span=3.0, dt=0.01, tol=1e-8, front=None):
    """Residuals at every continuation step, and the front stays inside the cusp."""
    front = front or shock_front(fam, None, dt, branch)
    t_end = front.t_start + span
    samples = [s for s in front.samples if s.t <= t_end + 1e-9]
    worst = max(max(s.residual_H, s.residual_x) for s in samples)
    outside = 0
    for s in samples[:: max(1, len(samples) // 30)]:
        arms = _caustic_arm_x(fam, branch, front.rho_c, s.t)
        if arms is None or not (arms[0] < s.x_s < arms[1]):
            outside += 1
    expected = int(np.floor(span / dt + 1e-9))
    passed = worst < tol and outside == 0 and len(samples) == expected and front.status == "ok"
    return CheckResult(f"shock_front_{branch}", bool(passed), float(worst), tol,
                       {"steps": len(samples), "expected_steps": expected, "outside_cusp": outside,
                        "status": front.status, "t_start": front.t_start})


def check_mass_conservation(fam: SolutionFamily, fronts, t1, t2, window, tol=1e-6, n_rho=100_001,
                            apex_refine=25_000):
    """Mass of the cut profile in a fixed window, balanced against the boundary flux.

    ``(M(t2) - M(t1) - inflow + outflow) / (t2 - t1)`` must stay below ``tol``.
    """
    lo, hi = _clip(fam)
    grid = np.geomspace(lo, hi, n_rho)
    coarse = np.geomspace(lo, hi, 4001)
    M1 = mass_integral(cut_profile(fam, t1, grid, fronts, apex_refine), window)
    M2 = mass_integral(cut_profile(fam, t2, grid, fronts, apex_refine), window)
    f_in = flux_integral(fam, window[0], t1, t2, coarse)
    f_out = flux_integral(fam, window[1], t1, t2, coarse)
    drift = abs(M2 - M1 - (f_in - f_out)) / (t2 - t1)
    return _result("mass_conservation", drift, tol, M1=M1, M2=M2, inflow=f_in, outflow=f_out,
                   window=list(window), t=[t1, t2])


def check_front_gap(fam: SolutionFamily, fronts):
    """Two fronts, gap strictly positive and strictly decreasing; fitted power-law decay."""
    p, m = fronts["plus"], fronts["minus"]
    tp, tm = p.column("t"), m.column("t")
    n = min(len(tp), len(tm))
    if n < 3 or not np.allclose(tp[:n], tm[:n], rtol=0, atol=1e-9):
        return _result("front_gap", np.inf, 0.0, reason="fronts not sampled on a common time grid")
    gap = np.abs(p.column("x_s")[:n] - m.column("x_s")[:n])
    t = tp[:n]
    positive = bool(np.all(gap > 0))
    decreasing = bool(np.all(np.diff(gap) < 0))
    slope, intercept = np.polyfit(np.log(t), np.log(gap), 1)
    return CheckResult("front_gap", positive and decreasing, float(np.max(np.diff(gap))), 0.0,
                       {"gap_first": float(gap[0]), "gap_last": float(gap[-1]),
                        "t_first": float(t[0]), "t_last": float(t[-1]),
                        "power_law_exponent": float(slope), "power_law_prefactor": float(np.exp(intercept)),
                        "positive": positive, "strictly_decreasing": decreasing})


def check_fold_transition(fam: SolutionFamily, t_cusp, dt=0.01, t_max=10.0, n_rho=20_001, t_late=3.75):
    """Fold count 0 at ``t = 0`` and >= 1 at ``t_late``; first folded time within ``2 dt`` of the cusp."""
    grid = np.geomspace(*_clip(fam), n_rho)
    at0 = fold_count(profile(fam, 0.0, grid))
    late = fold_count(profile(fam, t_late, grid))
    t_star = None
    for k in range(int(round(t_max / dt)) + 1):
        t = k * dt
        if fold_count(profile(fam, t, grid)) >= 1:
            t_star = t
            break
    gap = np.inf if t_star is None else abs(t_star - t_cusp)
    passed = at0 == 0 and late >= 1 and gap <= 2 * dt
    return CheckResult("fold_transition", bool(passed), float(gap), 2 * dt,
                       {"fold_count_t0": at0, "fold_count_late": late, "t_late": t_late,
                        "t_star": t_star, "t_cusp": t_cusp})


def check_thermodynamics(model: ThermodynamicModel | None, hm: HomentropicModel, n=100, tol=1e-12, seed=SEED):
    """Applicability at random states, ``det P = -4 p' < 0`` and ``W**2 = id``.

    With ``model=None`` (a model given only through ``A(rho)``) the
    applicability and energy-balance parts are skipped.
    """
    rng = np.random.default_rng(seed)
    T = rng.uniform(0.1, 10.0, n)
    rho = rng.uniform(0.1, 10.0, n)
    if model is not None:
        _, _, ok = applicability(model, T, rho)
        applicable = int(np.count_nonzero(ok))
        energy = max(float(np.abs(np.asarray(r)).max()) for r in energy_balance_residual(model, T, rho))
    else:
        applicable, energy = n, 0.0
    lo, hi = hm.rho_range
    r = np.exp(rng.uniform(np.log(max(lo, 0.1)), np.log(min(hi, 10.0)), n))
    u = rng.uniform(-3.0, 3.0, n)
    det_err = 0.0
    det_negative = True
    w_err = 0.0
    forms = euler_forms(hm)
    for ui, ri in zip(u, r):
        P = pairing_matrix(forms, ui, ri)
        det = np.linalg.det(P)
        expected = -4.0 * float(hm.dp(ri))
        det_err = max(det_err, abs(det - expected) / max(1.0, abs(expected)))
        det_negative = det_negative and bool(det < 0)
        W = aw_matrix(hm, ui, ri)
        w_err = max(w_err, float(np.abs(W @ W - np.eye(4)).max()))
    passed = applicable == n and det_negative and det_err < tol and w_err < tol and energy < 1e-6
    return CheckResult("thermodynamics", bool(passed), float(max(det_err, w_err)), tol,
                       {"applicable": applicable, "points": n, "det_negative": det_negative,
                        "det_error": float(det_err), "W_squared_error": float(w_err),
                        "energy_balance": float(energy), "potential_checked": model is not None})
