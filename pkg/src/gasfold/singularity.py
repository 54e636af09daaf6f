"""
Caustics, the mass-conservation potential and shock fronts of a solution family.

The caustic is the fold locus of the projection of the solution surface to
the (t, x) plane.  On it the critical velocity is ``u_c = -Z / (lam A rho**2)``
with

    Z(+/-) = alpha0 rho**2 A -/+ lam rho Q +/- lam IQ +/- alpha2.

A shock front cuts an overhang of the multivalued profile at the two
densities ``rho1 < rho2`` of one velocity branch where both the position and
the mass potential ``H`` agree.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from .errors import ContinuationStall, OutsideSupport
from .family import (
    ProfileSample,
    SolutionFamily,
    branch_u,
    branch_x,
    branch_x_partials,
    fold_indicator,
    profile,
    radicand,
    sign_value,
    surface_partials,
    t_of,
)

__all__ = [
    "CausticCurve",
    "ShockFront",
    "FrontSample",
    "z_pm",
    "critical_u",
    "critical_u_root",
    "caustic_t",
    "caustic_x",
    "caustic",
    "potential_H",
    "fold_points",
    "shock_front",
    "shock_fronts",
    "cut_profile",
    "default_rho_grid",
]

log = logging.getLogger(__name__)

FOLD_TOL = 1e-8
NEWTON_TOL = 1e-10
NEWTON_MAXITER = 50
MAX_HALVINGS = 20


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def default_rho_grid(fam: SolutionFamily, n=4001):
    lo, hi = fam.hm.rho_range
    return np.geomspace(max(lo, 1e-3), min(hi, 1e3), n)


def z_pm(fam: SolutionFamily, rho, sign):
    s = sign_value(sign)
    rho = np.asarray(rho, dtype=float)
    hm = fam.hm
    return _out(fam.alpha0 * rho**2 * hm.A(rho) - s * fam.lam * rho * hm.Q(rho)
                + s * fam.lam * hm.IQ(rho) + s * fam.alpha2)


def critical_u(fam: SolutionFamily, rho, sign):
    """Closed-form critical velocity on caustic branch ``sign``."""
    fam.require_lambda()
    rho = np.asarray(rho, dtype=float)
    return _out(-np.asarray(z_pm(fam, rho, sign)) / (fam.lam * fam.hm.A(rho) * rho**2))


def caustic_t(fam: SolutionFamily, rho):
    """Caustic time ``t(rho)``; shared by both caustic branches."""
    fam.require_lambda()
    rho = np.asarray(rho, dtype=float)
    hm = fam.hm
    lam, a0 = fam.lam, fam.alpha0
    A = hm.A(rho)
    Z = np.asarray(z_pm(fam, rho, "plus"))
    return _out(Z**2 / (2 * lam * A**2 * rho**4) + Z / rho * (1 - a0 / (lam * rho * A))
                - a0 * rho * A + lam * hm.Q(rho) + fam.t0)


def caustic_x(fam: SolutionFamily, rho, sign):
    fam.require_lambda()
    s = sign_value(sign)
    rho = np.asarray(rho, dtype=float)
    hm = fam.hm
    lam, a0 = fam.lam, fam.alpha0
    A = hm.A(rho)
    Z = np.asarray(z_pm(fam, rho, sign))
    return _out(fam.x0 - Z**3 / (3 * lam**2 * A**3 * rho**6) + a0 * Z**2 / (2 * lam**2 * A**2 * rho**4)
                + s * a0 * Z / (lam * rho) - s * Z**2 / (lam * A * rho**3) - a0 * hm.Q(rho))


def critical_u_root(fam: SolutionFamily, rho, sign):
    """Critical velocity as a root of the fold indicator at fixed ``rho``.

    The indicator equals ``rho (t_rho**2 - A**2 t_u**2)``; it is non-negative
    at ``u = -alpha0/lam`` and has one root on each side.  The plus branch is
    the root where ``t_u`` and ``t_rho`` share a sign, the minus branch the one
    where they differ.  Vectorised over ``rho``: each root is bracketed by
    doubling and then bisected to machine precision.  Entries without a
    bracket are NaN (``None`` for scalar input).
    """
    fam.require_lambda()
    s = sign_value(sign)
    scalar = np.ndim(rho) == 0
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    lam = fam.lam
    u_star = np.full(rho.shape, -fam.alpha0 / lam)
    _, t_rho, _, _ = surface_partials(fam, u_star, rho)
    t_rho = np.asarray(t_rho, dtype=float)
    direction = np.sign(s * t_rho * lam)
    g = lambda u, r: np.asarray(fold_indicator(fam, u, r), dtype=float)
    width = np.abs(t_rho) / (np.asarray(fam.hm.A(rho)) * abs(lam)) + 1.0
    found = direction == 0
    for _ in range(200):
        todo = ~found
        if not todo.any():
            break
        gv = g(u_star[todo] + direction[todo] * width[todo], rho[todo])
        hit = gv < 0
        idx = np.nonzero(todo)[0]
        found[idx[hit]] = True
        width[idx[~hit]] *= 2.0
    a = u_star.copy()
    b = u_star + direction * width
    ga = g(a, rho)
    for _ in range(1100):
        mid = 0.5 * (a + b)
        active = (mid != a) & (mid != b) & found & (direction != 0)
        if not active.any():
            break
        gm = g(mid, rho)
        same = (np.sign(gm) == np.sign(ga)) & active
        a = np.where(same, mid, a)
        ga = np.where(same, gm, ga)
        b = np.where(active & ~same, mid, b)
    root = np.where(direction == 0, u_star, 0.5 * (a + b))
    root = np.where(found, root, np.nan)
    if scalar:
        return None if not np.isfinite(root[0]) else float(root[0])
    return root


def _fold_ok(fam, u, rho):
    t_u, t_rho, x_u, x_rho = (np.asarray(v, dtype=float) for v in surface_partials(fam, u, rho))
    J = t_u * x_rho - t_rho * x_u
    scale = np.maximum(1.0, np.maximum(np.abs(t_u * x_rho), np.abs(t_rho * x_u)))
    return np.abs(J) <= FOLD_TOL * scale, J


@dataclass(frozen=True)
class CausticCurve:
    """Parametric caustic branch.

    ``samples`` holds ``(rho, t, x, branch)`` tuples in increasing ``rho``;
    ``cusp`` is ``(rho_c, t_c, x_c)`` at the minimum of ``t(rho)`` or ``None``.
    ``max_t_formula_gap`` compares the fallback time with the closed-form
    caustic time (minus branch only).
    """

    branch: str
    samples: list
    cusp: Optional[tuple]
    skipped: int = 0
    u_critical: tuple = ()
    max_t_formula_gap: Optional[float] = None

    def arrays(self):
        if not self.samples:
            return np.empty(0), np.empty(0), np.empty(0)
        rho, t, x, _ = zip(*self.samples)
        return np.array(rho), np.array(t), np.array(x)


def _golden_min(fn, grid, values):
    i = int(np.nanargmin(values))
    if i == 0 or i == len(grid) - 1:
        return None
    res = optimize.minimize_scalar(fn, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=1e-10)
    return float(res.x)


def caustic(fam: SolutionFamily, rho_grid=None, branch="plus") -> CausticCurve:
    """Sample one caustic branch over ``rho_grid``.

    The plus branch uses the closed-form ``(t, x)``.  The minus branch takes
    ``x`` from the closed form with ``Z-`` and ``t`` from the root of the fold
    indicator at each density.  Every point is checked against the fold
    indicator; points that fail (or have no root) are skipped and counted.
    """
    fam.require_lambda()
    sgn = sign_value(branch)
    name = "plus" if sgn > 0 else "minus"
    rho = np.asarray(default_rho_grid(fam) if rho_grid is None else rho_grid, dtype=float)
    fam.hm._rho(rho)

    if sgn > 0:
        u_c = np.asarray(critical_u(fam, rho, "plus"), dtype=float)
        t_c = np.asarray(caustic_t(fam, rho), dtype=float)
        t_fun = lambda r: caustic_t(fam, r)
        gap = None
    else:
        u_c = np.asarray(critical_u_root(fam, rho, "minus"), dtype=float)
        ok = np.isfinite(u_c)
        t_c = np.full(rho.shape, np.nan)
        t_c[ok] = t_of(fam, u_c[ok], rho[ok])

        def t_fun(r):
            uc = critical_u_root(fam, r, "minus")
            return np.inf if uc is None else float(t_of(fam, uc, r))

        t_formula = np.asarray(caustic_t(fam, rho[ok]))
        gap = float(np.max(np.abs(t_c[ok] - t_formula) / np.maximum(1.0, np.abs(t_formula)))) if ok.any() else None
    x_c = np.asarray(caustic_x(fam, rho, name), dtype=float)

    finite = np.isfinite(u_c) & np.isfinite(t_c) & np.isfinite(x_c)
    good = np.zeros(rho.shape, dtype=bool)
    if finite.any():
        good[finite], _ = _fold_ok(fam, u_c[finite], rho[finite])
    skipped = int(np.count_nonzero(~good))
    samples = [(float(r), float(t), float(x), name) for r, t, x in zip(rho[good], t_c[good], x_c[good])]
    kept_u = [float(u) for u in u_c[good]]
    if skipped:
        log.info("caustic %s: skipped %d points", name, skipped)

    cusp = None
    if samples:
        rr = np.array([s[0] for s in samples])
        tt = np.array([s[1] for s in samples])
        rc = _golden_min(t_fun, rr, tt)
        if rc is not None:
            cusp = (rc, float(t_fun(rc)), float(caustic_x(fam, rc, name)))
    return CausticCurve(name, samples, cusp, skipped, tuple(kept_u), gap)


def potential_H(fam: SolutionFamily, rho, t, sign):
    """Potential of the mass conservation law restricted to the solution on branch ``sign``.

    ``dH = rho dx - rho U dt`` in the ``(rho, t)`` chart.
    """
    fam.require_lambda()
    s = sign_value(sign)
    rho = np.asarray(rho, dtype=float)
    D = np.asarray(radicand(fam, rho, t), dtype=float)
    if np.any(D < 0):
        raise OutsideSupport(float(D[D < 0].ravel()[0]) if D.ndim else float(D))
    hm = fam.hm
    lam = fam.lam
    bracket = rho * lam * hm.Q(rho) - lam * hm.IQ(rho) - fam.alpha2
    return _out(-s / (lam * np.sqrt(rho)) * np.sqrt(2 * D) * bracket)


def _t_grid_root(fam, t, a, b):
    f = lambda r: float(caustic_t(fam, r)) - t
    return optimize.brentq(f, a, b, xtol=1e-15, rtol=1e-15, maxiter=500)


def _fold_rhos(fam, t, rho_c):
    """Densities on either side of the cusp density where the caustic time equals ``t``."""
    lo, hi = fam.hm.rho_range
    out = []
    for direction in (-1, 1):
        step = 0.05 * rho_c
        a = rho_c
        while True:
            b = rho_c + direction * step
            if b <= lo or b >= hi:
                out.append(None)
                break
            if float(caustic_t(fam, b)) > t:
                out.append(_t_grid_root(fam, t, *sorted((a, b))))
                break
            a = b
            step *= 2.0
    return out


def fold_points(fam: SolutionFamily, t, branch, rho_c=None):
    """Fold (turning) points ``[(rho, x), ...]`` of the profile on one velocity branch at time ``t``."""
    if rho_c is None:
        rho_c = caustic(fam, None, branch).cusp[0]
    pts = []
    for r in _fold_rhos(fam, float(t), rho_c):
        if r is not None:
            pts.append((r, float(branch_x(fam, r, t, branch))))
    return pts


class FrontSample(NamedTuple):
    t: float
    x_s: float
    rho1: float
    rho2: float
    residual_H: float
    residual_x: float


@dataclass(frozen=True)
class ShockFront:
    """A shock front born at the cusp of one velocity branch.

    ``status`` is ``"ok"``, ``"merged"`` (the two densities collapsed) or
    ``"stalled"``.
    """

    branch: str
    t_start: float
    rho_c: float
    x_c: float
    samples: tuple = ()
    status: str = "ok"

    def column(self, name):
        return np.array([getattr(s, name) for s in self.samples])

    def state_at(self, fam: SolutionFamily, t):
        """``(rho1, rho2, x_s)`` at arbitrary ``t`` within coverage, refined by Newton."""
        if not self.samples:
            raise ValueError("front has no samples")
        ts = self.column("t")
        if t < self.t_start or t > ts[-1] + 1e-12:
            raise ValueError(f"t={t!r} outside front coverage [{self.t_start!r}, {ts[-1]!r}]")
        if t < ts[0]:
            r1, r2 = _cusp_seed(fam, self.branch, self.rho_c, t)
        else:
            r1 = float(np.interp(t, ts, self.column("rho1")))
            r2 = float(np.interp(t, ts, self.column("rho2")))
        r1, r2, _ = _solve_front(fam, t, self.branch, r1, r2)
        x1 = float(branch_x(fam, r1, t, self.branch))
        x2 = float(branch_x(fam, r2, t, self.branch))
        return r1, r2, 0.5 * (x1 + x2)


def _residual(fam, t, sign, r1, r2):
    H1 = float(potential_H(fam, r1, t, sign))
    H2 = float(potential_H(fam, r2, t, sign))
    x1 = float(branch_x(fam, r1, t, sign))
    x2 = float(branch_x(fam, r2, t, sign))
    return np.array([H1 - H2, x1 - x2])


def _feasible(fam, t, r1, r2):
    if not (r1 < r2) or not (fam.hm.contains(r1) and fam.hm.contains(r2)):
        return False
    return float(radicand(fam, r1, t)) > 0 and float(radicand(fam, r2, t)) > 0


def _solve_front(fam, t, sign, r1, r2):
    """Damped Newton for ``H(r1) = H(r2)``, ``x(r1) = x(r2)`` on one velocity branch."""
    if not _feasible(fam, t, r1, r2):
        raise ContinuationStall(t, f"infeasible seed at t={t!r}")
    F = _residual(fam, t, sign, r1, r2)
    norm = np.max(np.abs(F))
    for _ in range(NEWTON_MAXITER):
        if norm < NEWTON_TOL:
            return r1, r2, F
        d1, _ = branch_x_partials(fam, r1, t, sign)
        d2, _ = branch_x_partials(fam, r2, t, sign)
        J = np.array([[r1 * d1, -r2 * d2], [d1, -d2]])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            n1, n2 = r1 + lam * step[0], r2 + lam * step[1]
            if _feasible(fam, t, n1, n2):
                Fn = _residual(fam, t, sign, n1, n2)
                nn = np.max(np.abs(Fn))
                if nn < norm or nn < NEWTON_TOL:
                    break
            lam *= 0.5
        else:
            break
        r1, r2, F, norm = n1, n2, Fn, nn
    if norm < NEWTON_TOL:
        return r1, r2, F
    raise ContinuationStall(t, f"Newton did not converge at t={t!r} (residual {norm:.3e})")


def _cusp_seed(fam, sign, rho_c, t):
    """Seed densities just after the cusp.

    Near a cusp the profile is locally cubic, and the equal-area cut sits
    sqrt(3) times farther from the cusp density than the fold points.
    """
    rl, rh = _fold_rhos(fam, t, rho_c)
    if rl is None or rh is None:
        raise ContinuationStall(t, "fold points not found near the cusp")
    k = np.sqrt(3.0)
    return rho_c - k * (rho_c - rl), rho_c + k * (rh - rho_c)


def shock_front(fam: SolutionFamily, t_range=None, dt_step=0.01, branch="plus", rho_grid=None,
                caustic_curve: Optional[CausticCurve] = None) -> ShockFront:
    """Continue the shock front of one velocity branch in time.

    Samples are taken at ``t_start + k * dt_step`` for ``k >= 1`` inside
    ``t_range`` (default ``[t_start, t_start + 3]``), where ``t_start`` is the
    cusp time.  A failed step is retried with halved sub-steps.

    Raises
    ------
    ContinuationStall
        If Newton fails even after step halving; ``exc.front`` holds the
        samples accepted so far and ``exc.last_t`` the last good time.
    """
    fam.require_lambda()
    name = "plus" if sign_value(branch) > 0 else "minus"
    curve = caustic_curve or caustic(fam, rho_grid, name)
    if curve.cusp is None:
        raise ContinuationStall(float("nan"), "caustic has no cusp on the density grid")
    rho_c, t_c, x_c = curve.cusp
    if t_range is None:
        t_range = (t_c, t_c + 3.0)
    t_lo, t_hi = float(t_range[0]), float(t_range[1])
    dt = float(dt_step)
    n_steps = int(np.floor((t_hi - t_c) / dt + 1e-9))

    samples = []
    history = []
    t_prev, state = t_c, None
    status = "ok"

    def make_front(st):
        return ShockFront(name, t_c, rho_c, x_c, tuple(samples), st)

    for k in range(1, n_steps + 1):
        t_target = t_c + k * dt
        h = t_target - t_prev
        t_cur = t_prev
        while t_cur < t_target - 1e-14:
            t_try = min(t_cur + h, t_target)
            try:
                if state is None:
                    seed = _cusp_seed(fam, name, rho_c, t_try)
                elif len(history) >= 2:
                    (ta, a1, a2), (tb, b1, b2) = history[-2], history[-1]
                    w = (t_try - tb) / (tb - ta)
                    seed = (b1 + w * (b1 - a1), b2 + w * (b2 - a2))
                    if not _feasible(fam, t_try, *seed):
                        seed = state
                else:
                    seed = state
                r1, r2, F = _solve_front(fam, t_try, name, *seed)
            except ContinuationStall:
                h *= 0.5
                if h < dt * 2.0**-MAX_HALVINGS:
                    raise ContinuationStall(t_prev, front=make_front("stalled"))
                continue
            if abs(r2 - r1) < 1e-10:
                status = "merged"
                return make_front(status)
            state = (r1, r2)
            history.append((t_try, r1, r2))
            t_cur = t_try
        t_prev = t_target
        if t_lo - 1e-12 <= t_target <= t_hi + 1e-12:
            r1, r2 = state
            x1 = float(branch_x(fam, r1, t_target, name))
            x2 = float(branch_x(fam, r2, t_target, name))
            H1 = float(potential_H(fam, r1, t_target, name))
            H2 = float(potential_H(fam, r2, t_target, name))
            samples.append(FrontSample(t_target, 0.5 * (x1 + x2), r1, r2, abs(H1 - H2), abs(x1 - x2)))
    return make_front(status)


def shock_fronts(fam: SolutionFamily, t_range=None, dt_step=0.01, rho_grid=None):
    """Fronts of both velocity branches, ``{"plus": front, "minus": front}``."""
    return {name: shock_front(fam, t_range, dt_step, name, rho_grid) for name in ("plus", "minus")}


def cut_profile(fam: SolutionFamily, t, rho_grid, front, apex_refine=0):
    """Single-valued discontinuous profile at ``t``.

    ``front`` is a :class:`ShockFront` or a sequence of them.  On each front's
    branch the samples with ``rho1 < rho < rho2`` (the overhang) are removed
    and the two end states are inserted at the shock position ``x_s``, so the
    jump is the only abscissa carrying two samples.  Fronts not yet born at
    ``t`` leave the profile unchanged.
    """
    fronts = [front] if isinstance(front, ShockFront) else list(front)
    samples = profile(fam, t, rho_grid, apex_refine)
    for fr in fronts:
        if t <= fr.t_start:
            continue
        r1, r2, x_s = fr.state_at(fam, t)
        u1 = float(branch_u(fam, r1, t, fr.branch))
        u2 = float(branch_u(fam, r2, t, fr.branch))
        left = ProfileSample(x_s, r1, u1, fr.branch, float(t))
        right = ProfileSample(x_s, r2, u2, fr.branch, float(t))
        out = []
        inserted = False
        prev_rho = None
        for smp in samples:
            if smp.branch != fr.branch:
                out.append(smp)
                continue
            inside = r1 <= smp.rho <= r2
            if not inserted:
                crossed = prev_rho is not None and (
                    (prev_rho < r1 and smp.rho > r2) or (prev_rho > r2 and smp.rho < r1))
                if inside or crossed:
                    ascending = prev_rho < r1 if prev_rho is not None else True
                    out.extend([left, right] if ascending else [right, left])
                    inserted = True
            prev_rho = smp.rho
            if not inside:
                out.append(smp)
        samples = out
    return samples
