"""
Exact multivalued solutions from the separated solution of the quotient wave equation.

A :class:`SolutionFamily` holds the constants ``(lam, alpha0, alpha2, t0, x0)``
and a homentropic gas model.  Its solution surface in E(t, x, u, rho) is
parametrised by ``(u, rho)``:

    t = lam u**2/2 + alpha0 u + alpha2/rho + lam IQ(rho)/rho + t0
    x = lam u**3/3 - lam u Q + alpha0 u**2/2 + lam u IQ/rho + alpha2 u/rho - alpha0 Q + x0

Solving the first relation for ``u`` gives the two velocity branches
``U(+/-)(rho, t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .errors import DegenerateFamily, OutsideSupport
from .geometry import SurfaceParametrization
from .thermo import HomentropicModel

__all__ = [
    "SolutionFamily",
    "ProfileSample",
    "WaveFunction",
    "SIGNS",
    "sign_value",
    "wave_residual",
    "separated_f",
    "radicand",
    "t_of",
    "x_of",
    "surface_partials",
    "fold_indicator",
    "branch_u",
    "branch_x",
    "branch_x_partials",
    "profile",
    "branch_curves",
    "fold_count",
    "preimage_count",
    "solution_surface",
    "varkappa_coeffs",
]

SIGNS = ("plus", "minus")


def sign_value(sign):
    if sign in ("plus", "+", 1, +1.0):
        return 1.0
    if sign in ("minus", "-", -1, -1.0):
        return -1.0
    raise ValueError(f"branch sign must be 'plus' or 'minus', got {sign!r}")


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class SolutionFamily:
    """Constants of the separated solution family.

    ``lam`` may be zero for the quadratures; branch resolution, the potential
    ``H`` and shock fronts need ``lam != 0``.
    """

    lam: float
    alpha0: float
    alpha2: float
    t0: float
    x0: float
    hm: HomentropicModel

    def require_lambda(self):
        if self.lam == 0:
            raise DegenerateFamily("operation divides by lambda; lambda must be non-zero")


@dataclass(frozen=True)
class ProfileSample:
    x: float
    rho: float
    u: float
    branch: str
    t: float


@dataclass(frozen=True)
class WaveFunction:
    """A function ``f(u, rho)`` with optional analytic second partials."""

    f: Callable
    f_uu: Optional[Callable] = None
    f_rhorho: Optional[Callable] = None
    step: float = 1e-4

    def second_u(self, u, rho):
        if self.f_uu is not None:
            return self.f_uu(u, rho)
        h = self.step * np.maximum(np.abs(u), 1.0)
        return (self.f(u + h, rho) - 2 * self.f(u, rho) + self.f(u - h, rho)) / h**2

    def second_rho(self, u, rho):
        if self.f_rhorho is not None:
            return self.f_rhorho(u, rho)
        h = self.step * np.maximum(np.abs(rho), 1.0)
        return (self.f(u, rho + h) - 2 * self.f(u, rho) + self.f(u, rho - h)) / h**2


def wave_residual(f: WaveFunction, u, rho, hm: HomentropicModel):
    """Residual ``f_uu - A(rho)**-2 f_rhorho`` of the quotient wave equation."""
    A = hm.A(rho)
    return _out(f.second_u(u, rho) - f.second_rho(u, rho) / A**2)


def separated_f(fam: SolutionFamily) -> WaveFunction:
    """The separated solution ``f = rho mu(u) + nu(rho)`` behind the family.

    ``mu = lam u**2/2 + alpha0 u + t0`` and ``nu = lam IQ(rho) + alpha2``, so that
    ``t = f / rho`` reproduces :func:`t_of`.
    """
    hm = fam.hm
    lam, a0, a2, t0 = fam.lam, fam.alpha0, fam.alpha2, fam.t0

    def f(u, rho):
        u = np.asarray(u, dtype=float)
        rho = np.asarray(rho, dtype=float)
        return rho * (lam * u**2 / 2 + a0 * u + t0) + lam * hm.IQ(rho) + a2

    return WaveFunction(
        f=f,
        f_uu=lambda u, rho: lam * np.asarray(rho, dtype=float) + 0 * np.asarray(u, dtype=float),
        f_rhorho=lambda u, rho: lam * np.asarray(rho, dtype=float) * hm.A(rho) ** 2 + 0 * np.asarray(u, dtype=float),
    )


def radicand(fam: SolutionFamily, rho, t):
    """``D(rho, t) = rho lam (t - t0) + rho alpha0**2/2 - lam alpha2 - lam**2 IQ(rho)``."""
    rho = np.asarray(rho, dtype=float)
    t = np.asarray(t, dtype=float)
    lam = fam.lam
    return _out(rho * lam * (t - fam.t0) + rho * fam.alpha0**2 / 2 - lam * fam.alpha2 - lam**2 * fam.hm.IQ(rho))


def t_of(fam: SolutionFamily, u, rho):
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)
    lam = fam.lam
    return _out(lam * u**2 / 2 + fam.alpha0 * u + fam.alpha2 / rho + lam / rho * fam.hm.IQ(rho) + fam.t0)


def x_of(fam: SolutionFamily, u, rho):
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)
    lam, a0, a2 = fam.lam, fam.alpha0, fam.alpha2
    Q = fam.hm.Q(rho)
    IQ = fam.hm.IQ(rho)
    return _out(lam * u**3 / 3 - lam * u * Q + a0 * u**2 / 2 + lam * u / rho * IQ + a2 * u / rho - a0 * Q + fam.x0)


def surface_partials(fam: SolutionFamily, u, rho):
    """Analytic ``(t_u, t_rho, x_u, x_rho)`` on the solution surface."""
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)
    lam, a0, a2 = fam.lam, fam.alpha0, fam.alpha2
    Q = fam.hm.Q(rho)
    IQ = fam.hm.IQ(rho)
    rA2 = rho * fam.hm.A(rho) ** 2
    t_u = lam * u + a0
    t_rho = -a2 / rho**2 - lam * IQ / rho**2 + lam * Q / rho
    x_u = lam * u**2 - lam * Q + a0 * u + lam * IQ / rho + a2 / rho
    x_rho = -lam * u * rA2 + lam * u * Q / rho - lam * u * IQ / rho**2 - a2 * u / rho**2 - a0 * rA2
    return t_u + 0 * rho, t_rho + 0 * u, x_u, x_rho


def fold_indicator(fam: SolutionFamily, u, rho):
    """Jacobian ``t_u x_rho - t_rho x_u`` of the projection ``(u, rho) -> (t, x)``; zero on the caustic."""
    t_u, t_rho, x_u, x_rho = surface_partials(fam, u, rho)
    return _out(t_u * x_rho - t_rho * x_u)


def branch_u(fam: SolutionFamily, rho, t, sign):
    """Velocity branch ``U(+/-)(rho, t)`` solving ``t_of(u, rho) = t``.

    Raises
    ------
    DegenerateFamily
        If ``lam == 0``.
    OutsideSupport
        If ``D(rho, t) < 0``; the exception carries ``D``.
    """
    fam.require_lambda()
    s = sign_value(sign)
    rho = np.asarray(rho, dtype=float)
    D = np.asarray(radicand(fam, rho, t))
    if np.any(D < 0):
        raise OutsideSupport(_out(D[D < 0].ravel()[0]) if D.ndim else float(D))
    return _out(-fam.alpha0 / fam.lam + s / (fam.lam * rho) * np.sqrt(2 * rho * D))


def branch_x(fam: SolutionFamily, rho, t, sign):
    """``x(rho, t)`` on one velocity branch."""
    return x_of(fam, branch_u(fam, rho, t, sign), rho)


def branch_x_partials(fam: SolutionFamily, rho, t, sign):
    """``(dx/drho at fixed t, dx/dt at fixed rho)`` along one velocity branch."""
    u = branch_u(fam, rho, t, sign)
    t_u, t_rho, x_u, x_rho = surface_partials(fam, u, rho)
    return _out(x_rho - x_u * t_rho / t_u), _out(x_u / t_u)


def _apex_roots(fam, rho, D, t):
    roots = []
    idx = np.nonzero(np.sign(D[:-1]) * np.sign(D[1:]) < 0)[0]
    for i in idx:
        r = optimize.brentq(lambda q: radicand(fam, q, t), rho[i], rho[i + 1], xtol=1e-15, rtol=1e-15)
        roots.append(r)
    return roots


def _dedup(samples, tol=1e-12):
    out = []
    for smp in samples:
        if out and out[-1].branch == smp.branch and abs(out[-1].x - smp.x) <= tol and abs(out[-1].rho - smp.rho) <= tol:
            continue
        out.append(smp)
    return out


def _apex_cluster(fam, rho, t, r_apex, n):
    """``n`` densities clustered quadratically on the feasible side of an apex root.

    Near ``D = 0`` the profile is smooth in ``x`` but ``x - x_apex`` grows like
    ``sqrt(|rho - r_apex|)``, so points uniform in that square root give
    uniform spacing in ``x``.
    """
    lo, hi = rho[0], rho[-1]
    step = 1e-9 * r_apex
    side = 1.0 if radicand(fam, min(r_apex + step, hi), t) > 0 else -1.0
    s = np.linspace(0.0, 1.0, n + 1)[1:]
    pts = r_apex * (1.0 + side * 0.5 * s**2)
    return pts[(pts >= lo) & (pts <= hi)]


def profile(fam: SolutionFamily, t, rho_grid, apex_refine=0):
    """Density profile at time ``t`` on both velocity branches.

    For every contiguous run of grid densities with ``D(rho, t) >= 0`` the
    samples trace the profile curve continuously: the plus branch with
    ``rho`` increasing, then the minus branch with ``rho`` decreasing.  The
    density where ``D = 0`` (where the branches join) is inserted when the grid
    brackets it.  Where the profile is single valued this is increasing ``x``;
    where it folds, curve order is kept so overhangs stay visible.

    With ``apex_refine = n > 0``, ``n`` extra densities are clustered around
    each such join so the samples are evenly spread in ``x`` there, which
    trapezoidal mass integrals need.
    """
    fam.require_lambda()
    t = float(t)
    rho = np.unique(np.asarray(rho_grid, dtype=float))
    fam.hm._rho(rho)
    if rho.size == 0:
        return []
    D = np.asarray(radicand(fam, rho, t), dtype=float).reshape(-1)
    pts = list(zip(rho, D))
    for r in _apex_roots(fam, rho, D, t):
        pts.append((r, 0.0))
        if apex_refine:
            extra = _apex_cluster(fam, rho, t, r, int(apex_refine))
            pts.extend(zip(extra, np.asarray(radicand(fam, extra, t), dtype=float).reshape(-1)))
    pts.sort()
    rho_all = np.array([p[0] for p in pts])
    feasible = np.array([p[1] >= 0 for p in pts])
    D_all = np.maximum(np.array([p[1] for p in pts]), 0.0)

    samples = []
    start = None
    for i in range(len(rho_all) + 1):
        inside = i < len(rho_all) and feasible[i]
        if inside and start is None:
            start = i
        if not inside and start is not None:
            r = rho_all[start:i]
            d = D_all[start:i]
            base = -fam.alpha0 / fam.lam
            for sgn, name, order in ((1.0, "plus", slice(None)), (-1.0, "minus", slice(None, None, -1))):
                rr = r[order]
                u = base + sgn / (fam.lam * rr) * np.sqrt(2 * rr * d[order])
                x = np.asarray(x_of(fam, u, rr)).reshape(-1)
                samples.extend(ProfileSample(float(xi), float(ri), float(ui), name, t) for xi, ri, ui in zip(x, rr, u))
            start = None
    return _dedup(samples)


def branch_curves(samples):
    """Group samples by branch, keeping curve order: ``{branch: (x, rho, u)}``."""
    out = {}
    for name in SIGNS:
        sel = [s for s in samples if s.branch == name]
        if sel:
            out[name] = (np.array([s.x for s in sel]), np.array([s.rho for s in sel]), np.array([s.u for s in sel]))
    return out


def _turning_points(x):
    dx = np.diff(x)
    dx = dx[dx != 0]
    return int(np.count_nonzero(np.sign(dx[1:]) != np.sign(dx[:-1])))


def fold_count(samples):
    """Number of overhangs (pairs of x-turning points) summed over both branches."""
    total = 0
    for x, _, _ in branch_curves(samples).values():
        total += (_turning_points(x) + 1) // 2
    return total


def preimage_count(samples, x):
    """How many times the profile curve passes through abscissa ``x``."""
    xs = np.array([s.x for s in samples])
    if xs.size < 2:
        return int(np.count_nonzero(xs == x))
    a = xs[:-1] - x
    b = xs[1:] - x
    crossings = np.count_nonzero(a * b < 0)
    touches = np.count_nonzero(xs == x)
    return int(crossings + touches)


def solution_surface(fam: SolutionFamily) -> SurfaceParametrization:
    """Solution surface parametrised by ``(a, b) = (u, rho)`` with analytic partials."""

    def partials(u, rho):
        t_u, t_rho, x_u, x_rho = surface_partials(fam, u, rho)
        one = np.ones_like(t_u)
        zero = np.zeros_like(t_u)
        return np.array([[t_u, t_rho], [x_u, x_rho], [one, zero], [zero, one]])

    return SurfaceParametrization(
        t_of=lambda u, rho: t_of(fam, u, rho),
        x_of=lambda u, rho: x_of(fam, u, rho),
        u_of=lambda u, rho: np.asarray(u, dtype=float) + 0 * np.asarray(rho, dtype=float),
        rho_of=lambda u, rho: np.asarray(rho, dtype=float) + 0 * np.asarray(u, dtype=float),
        partials=partials,
    )


def varkappa_coeffs(fam: SolutionFamily, u, rho):
    """``du`` and ``drho`` coefficients of the closed 1-form ``dx - ... du + ... drho``.

    The ``dx`` coefficient is identically one.
    """
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)
    lam, a0, a2 = fam.lam, fam.alpha0, fam.alpha2
    Q = fam.hm.Q(rho)
    IQ = fam.hm.IQ(rho)
    rA2 = rho * fam.hm.A(rho) ** 2
    du = -(lam * u**2 + a0 * u - lam * Q + lam / rho * IQ + a2 / rho)
    drho = lam * u / rho**2 * IQ - lam * u / rho * Q + rA2 * (lam * u + a0) + a2 * u / rho**2
    return _out(du), _out(drho)
