"""
Equilibrium thermodynamics through the Massieu-Planck potential.

A gas is described by a potential ``phi(rho, T)``; pressure, specific energy
and specific entropy follow from

    p = -rho**2 * T * phi_rho,   e = T**2 * phi_T,   s = phi + T * phi_T.

Fixing the entropy at ``s0`` turns every thermodynamic quantity into a function
of density alone.  :class:`HomentropicModel` carries those functions together
with the two density integrals that the exact solution family needs,

    Q(rho)  = integral of rho * A(rho)**2 d rho,
    IQ(rho) = integral of Q(rho) d rho,

where ``A(rho) = sqrt(p'(rho)) / rho``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, HyperbolicityError, ReductionError

__all__ = [
    "ThermodynamicModel",
    "IdealGasParams",
    "HomentropicModel",
    "ideal_gas_model",
    "lagrangian_state",
    "entropy",
    "applicability",
    "homentropic_reduce",
    "power_law_model",
    "model_from_pressure",
    "model_from_sound_speed",
    "DEFAULT_RHO_RANGE",
]

DEFAULT_RHO_RANGE = (1e-3, 1e3)


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_state(T, rho):
    T = np.asarray(T, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(~(T > 0)) or np.any(~(rho > 0)):
        raise DomainError("thermodynamic state requires T > 0 and rho > 0")
    return T, rho


@dataclass(frozen=True)
class ThermodynamicModel:
    """A gas given by its Massieu-Planck potential ``phi(rho, T)``.

    All evaluators take ``(rho, T)`` and broadcast over numpy arrays.
    ``phi_Trho`` is optional; when missing it is obtained by central
    differences of ``phi_rho`` in ``T``.
    """

    phi: Callable
    phi_T: Callable
    phi_rho: Callable
    phi_TT: Callable
    phi_rhorho: Callable
    R: float
    descriptor: str
    phi_Trho: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def mixed_partial(self, rho, T):
        if self.phi_Trho is not None:
            return self.phi_Trho(rho, T)
        h = 1e-5 * np.maximum(np.abs(T), 1.0)
        return (self.phi_rho(rho, T + h) - self.phi_rho(rho, T - h)) / (2 * h)


@dataclass(frozen=True)
class IdealGasParams:
    """Ideal gas with ``n`` degrees of freedom.

    ``s0`` is an entropy level in the convention ``s = phi + T phi_T`` with the
    potential's additive constant set to zero (see :func:`ideal_gas_model`).
    """

    n: float
    R: float = 1.0
    s0: float = 0.0

    def __post_init__(self):
        if not self.n > 0:
            raise DomainError(f"degrees of freedom must be positive, got n={self.n!r}")
        if not self.R > 0:
            raise DomainError(f"gas constant must be positive, got R={self.R!r}")

    @property
    def m(self):
        return (1.0 - self.n) / self.n

    @property
    def entropy_offset(self):
        """Difference between this package's entropy and ``R ln(T**(n/2) / rho)``."""
        return self.R * self.n / 2.0

    @property
    def A0(self):
        level = self.s0 - self.entropy_offset
        return float(np.sqrt(self.R * (1 + 2 / self.n) * np.exp(2 * level / (self.R * self.n))))


def ideal_gas_model(params: IdealGasParams) -> ThermodynamicModel:
    """Massieu-Planck potential ``phi = (R n / 2) ln T - R ln rho`` of an ideal gas.

    The additive constant of ``phi`` is zero, so :func:`entropy` returns
    ``R ln(T**(n/2) / rho) + R n / 2``.
    """
    n, R = float(params.n), float(params.R)
    c = R * n / 2.0
    return ThermodynamicModel(
        phi=lambda rho, T: c * np.log(T) - R * np.log(rho),
        phi_T=lambda rho, T: c / np.asarray(T, dtype=float),
        phi_rho=lambda rho, T: -R / np.asarray(rho, dtype=float),
        phi_TT=lambda rho, T: -c / np.asarray(T, dtype=float) ** 2,
        phi_rhorho=lambda rho, T: R / np.asarray(rho, dtype=float) ** 2,
        phi_Trho=lambda rho, T: np.zeros(np.broadcast(np.asarray(rho), np.asarray(T)).shape),
        R=R,
        descriptor=f"ideal-gas({params.n:g}); phi additive constant 0",
        params={"kind": "ideal-gas", "n": n, "R": R},
    )


def lagrangian_state(model: ThermodynamicModel, T, rho):
    """Return ``(p, e)`` on the Lagrangian manifold at temperature ``T`` and density ``rho``."""
    T, rho = _check_state(T, rho)
    p = -rho**2 * T * model.phi_rho(rho, T)
    e = T**2 * model.phi_T(rho, T)
    return _scalar_or_array(p), _scalar_or_array(e)


def entropy(model: ThermodynamicModel, T, rho):
    """Specific entropy ``s = phi + T phi_T``."""
    T, rho = _check_state(T, rho)
    return _scalar_or_array(model.phi(rho, T) + T * model.phi_T(rho, T))


def applicability(model: ThermodynamicModel, T, rho):
    """Coefficients of the quadratic form restricted to the state manifold.

    Returns ``(kappa_TT, kappa_rhorho, applicable)``; a state is physical when
    both coefficients are negative, which is equivalent to ``e_T > 0`` and
    ``p_rho > 0``.
    """
    T, rho = _check_state(T, rho)
    k_TT = -(2.0 / T * model.phi_T(rho, T) + model.phi_TT(rho, T))
    k_rr = 2.0 / rho * model.phi_rho(rho, T) + model.phi_rhorho(rho, T)
    k_TT, k_rr = np.broadcast_arrays(k_TT, k_rr)
    ok = (k_TT < 0) & (k_rr < 0)
    if np.ndim(ok) == 0:
        return float(k_TT), float(k_rr), bool(ok)
    return k_TT, k_rr, ok


@dataclass(frozen=True)
class HomentropicModel:
    """Thermodynamics reduced to functions of density at fixed entropy.

    Evaluators are exposed through :meth:`T`, :meth:`p`, :meth:`dp`,
    :meth:`A`, :meth:`Q` and :meth:`IQ`, which reject densities outside
    ``rho_range``.  ``T_of_rho`` is ``None`` for models specified directly by
    a pressure law or by ``A(rho)``.
    """

    s0: Optional[float]
    T_of_rho: Optional[Callable]
    p_of_rho: Callable
    dp_of_rho: Callable
    A_of_rho: Callable
    Q_of_rho: Callable
    IQ_of_rho: Callable
    kind: str
    rho_range: tuple = DEFAULT_RHO_RANGE
    descriptor: str = ""
    params: dict = field(default_factory=dict)

    def _rho(self, rho):
        rho = np.asarray(rho, dtype=float)
        lo, hi = self.rho_range
        if np.any(~((rho >= lo) & (rho <= hi))):
            bad = rho[~((rho >= lo) & (rho <= hi))] if rho.ndim else rho
            raise DomainError(f"density {np.ravel(bad)[0]!r} outside declared range [{lo!r}, {hi!r}]")
        return rho

    def contains(self, rho):
        lo, hi = self.rho_range
        rho = np.asarray(rho, dtype=float)
        return (rho >= lo) & (rho <= hi)

    def T(self, rho):
        if self.T_of_rho is None:
            raise DomainError(f"model {self.descriptor!r} carries no temperature law")
        return _scalar_or_array(self.T_of_rho(self._rho(rho)))

    def p(self, rho):
        return _scalar_or_array(self.p_of_rho(self._rho(rho)))

    def dp(self, rho):
        return _scalar_or_array(self.dp_of_rho(self._rho(rho)))

    def A(self, rho):
        return _scalar_or_array(self.A_of_rho(self._rho(rho)))

    def Q(self, rho):
        return _scalar_or_array(self.Q_of_rho(self._rho(rho)))

    def IQ(self, rho):
        return _scalar_or_array(self.IQ_of_rho(self._rho(rho)))


def _check_range(rho_range):
    lo, hi = (float(v) for v in rho_range)
    if not (0 < lo < hi):
        raise DomainError(f"density range must satisfy 0 < min < max, got {rho_range!r}")
    return lo, hi


def _check_hyperbolic(dp, rho_range, n=257):
    grid = np.geomspace(*rho_range, n)
    vals = np.asarray(dp(grid), dtype=float)
    bad = ~(vals > 0)
    if np.any(bad):
        raise HyperbolicityError(grid[np.argmax(bad)])


def _power_law_integrals(A0, m):
    """Closed-form ``Q`` and ``IQ`` for ``A = A0 rho**m`` with zero integration constants."""
    a2 = A0**2
    k = 2 * m + 2
    if abs(k) < 1e-14:
        Q = lambda r: a2 * np.log(r)
        IQ = lambda r: a2 * (r * np.log(r) - r)
    elif abs(k + 1) < 1e-14:
        Q = lambda r: -a2 / r
        IQ = lambda r: -a2 * np.log(r)
    else:
        Q = lambda r: a2 * r**k / k
        IQ = lambda r: a2 * r ** (k + 1) / (k * (k + 1))
    return Q, IQ


def power_law_model(A0, m, rho_range=DEFAULT_RHO_RANGE, T_of_rho=None, s0=None, descriptor=None):
    """Homentropic model with ``A(rho) = A0 * rho**m``.

    ``p'(rho) = A0**2 rho**(2m+2)``; the pressure and both density integrals
    are taken with zero additive constants.
    """
    A0, m = float(A0), float(m)
    if not A0 > 0:
        raise DomainError(f"A0 must be positive, got {A0!r}")
    rho_range = _check_range(rho_range)
    a2 = A0**2
    if abs(2 * m + 3) < 1e-14:
        p = lambda r: a2 * np.log(r)
    else:
        p = lambda r: a2 * r ** (2 * m + 3) / (2 * m + 3)
    Q, IQ = _power_law_integrals(A0, m)
    return HomentropicModel(
        s0=s0,
        T_of_rho=T_of_rho,
        p_of_rho=p,
        dp_of_rho=lambda r: a2 * r ** (2 * m + 2),
        A_of_rho=lambda r: A0 * r**m,
        Q_of_rho=Q,
        IQ_of_rho=IQ,
        kind="closed-form",
        rho_range=rho_range,
        descriptor=descriptor or f"power-law(A0={A0:g}, m={m:g})",
        params={"A0": A0, "m": m},
    )


def _numeric_integrals(dp, rho_ref, epsrel=1e-12):
    """``Q`` and ``IQ`` by adaptive quadrature anchored at ``rho_ref``.

    ``IQ`` uses the Cauchy repeated-integral formula so a single quadrature
    suffices per point.
    """

    def _quad(f, a, b):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=200)
        return val

    def Q1(r):
        return _quad(lambda s: dp(s) / s, rho_ref, r)

    def IQ1(r):
        return _quad(lambda s: (r - s) * dp(s) / s, rho_ref, r)

    return np.vectorize(Q1, otypes=[float]), np.vectorize(IQ1, otypes=[float])


def _from_dp(p, dp, rho_range, rho_ref, kind, descriptor, s0=None, T_of_rho=None, params=None):
    Q, IQ = _numeric_integrals(dp, rho_ref)
    return HomentropicModel(
        s0=s0,
        T_of_rho=T_of_rho,
        p_of_rho=p,
        dp_of_rho=dp,
        A_of_rho=lambda r: np.sqrt(dp(r)) / r,
        Q_of_rho=Q,
        IQ_of_rho=IQ,
        kind=kind,
        rho_range=rho_range,
        descriptor=descriptor,
        params=dict(params or {}, rho_ref=rho_ref),
    )


def model_from_pressure(p, dp=None, rho_range=DEFAULT_RHO_RANGE, rho_ref=1.0, descriptor="pressure-law",
                        check_hyperbolic=True):
    """Homentropic model from a barotropic law ``p(rho)``.

    ``dp`` defaults to a central difference of ``p``.  ``Q`` and ``IQ`` are
    computed by quadrature from ``rho_ref``.
    """
    rho_range = _check_range(rho_range)
    if dp is None:
        def dp(r):
            r = np.asarray(r, dtype=float)
            h = 1e-6 * r
            return (p(r + h) - p(r - h)) / (2 * h)
    if check_hyperbolic:
        _check_hyperbolic(dp, rho_range)
    return _from_dp(p, dp, rho_range, rho_ref, "numeric", descriptor)


def model_from_sound_speed(A, rho_range=DEFAULT_RHO_RANGE, rho_ref=1.0, descriptor="A-law"):
    """Homentropic model from ``A(rho)``; ``p`` is recovered by quadrature of ``rho**2 A**2``."""
    rho_range = _check_range(rho_range)
    dp = lambda r: np.asarray(r, dtype=float) ** 2 * np.asarray(A(r), dtype=float) ** 2

    def p1(r):
        val, _ = integrate.quad(dp, rho_ref, r, epsabs=0.0, epsrel=1e-12, limit=200)
        return val

    model = _from_dp(np.vectorize(p1, otypes=[float]), dp, rho_range, rho_ref, "numeric", descriptor)
    return replace(model, A_of_rho=A)


def _ideal_gas_reduce(model: ThermodynamicModel, s0, rho_range):
    n, R = model.params["n"], model.params["R"]
    level = s0 - R * n / 2.0
    scale = np.exp(2 * level / (R * n))
    A0 = np.sqrt(R * (1 + 2 / n) * scale)
    m = (1.0 - n) / n
    base = power_law_model(A0, m, rho_range)
    return HomentropicModel(
        s0=s0,
        T_of_rho=lambda r: scale * r ** (2 / n),
        p_of_rho=lambda r: R * scale * r ** (2 / n + 1),
        dp_of_rho=lambda r: R * (1 + 2 / n) * scale * r ** (2 / n),
        A_of_rho=lambda r: A0 * r**m,
        Q_of_rho=base.Q_of_rho,
        IQ_of_rho=base.IQ_of_rho,
        kind="closed-form",
        rho_range=rho_range,
        descriptor=f"ideal-gas(n={n:g}, R={R:g}, s0={s0:g})",
        params={"A0": float(A0), "m": m, "n": n, "R": R},
    )


def _solve_temperature(model: ThermodynamicModel, s0, rho, tol=1e-12):
    """Root of ``s(T, rho) = s0`` by geometric bracketing, Brent, then a Newton polish."""

    def g(T):
        return model.phi(rho, T) + T * model.phi_T(rho, T) - s0

    lo, hi = 0.5, 2.0
    glo, ghi = g(lo), g(hi)
    for _ in range(400):
        if np.isfinite(glo) and np.isfinite(ghi) and glo < 0 < ghi:
            break
        if not (np.isfinite(glo) and glo < 0):
            lo *= 0.5
            glo = g(lo)
        if not (np.isfinite(ghi) and ghi > 0):
            hi *= 2.0
            ghi = g(hi)
    else:
        raise ReductionError(f"cannot bracket T(rho) for s0={s0!r} at rho={rho!r}")
    T = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    for _ in range(3):
        r = g(T)
        if abs(r) < tol:
            break
        dsdT = 2 * model.phi_T(rho, T) + T * model.phi_TT(rho, T)
        if dsdT > 0:
            T_new = T - r / dsdT
            if lo <= T_new <= hi:
                T = T_new
    if not abs(g(T)) < 1e-10 * max(1.0, abs(s0)):
        raise ReductionError(f"temperature solve did not reach tolerance at rho={rho!r}")
    return float(T)


def homentropic_reduce(model: ThermodynamicModel, s0, rho_range=DEFAULT_RHO_RANGE, rho_ref=1.0):
    """Fix the entropy at ``s0`` and express the state through density alone.

    Ideal gases use closed forms.  Any other model solves ``s(T, rho) = s0``
    pointwise and differentiates ``p(T(rho), rho)`` with the implicit function
    theorem; ``Q`` and ``IQ`` come from quadrature anchored at ``rho_ref``.

    Raises
    ------
    ReductionError
        If no temperature root can be bracketed.
    HyperbolicityError
        If ``p'(rho) <= 0`` at some sampled density in ``rho_range``.
    """
    rho_range = _check_range(rho_range)
    if model.params.get("kind") == "ideal-gas":
        hm = _ideal_gas_reduce(model, float(s0), rho_range)
        _check_hyperbolic(hm.dp_of_rho, rho_range)
        return hm

    s0 = float(s0)
    T_scalar = lambda r: _solve_temperature(model, s0, float(r))
    T_of_rho = np.vectorize(T_scalar, otypes=[float])

    def p_of_rho(r):
        r = np.asarray(r, dtype=float)
        T = T_of_rho(r)
        return -r**2 * T * model.phi_rho(r, T)

    def dp_of_rho(r):
        r = np.asarray(r, dtype=float)
        T = T_of_rho(r)
        f_r, f_T, f_rr, f_TT = model.phi_rho(r, T), model.phi_T(r, T), model.phi_rhorho(r, T), model.phi_TT(r, T)
        f_Tr = model.mixed_partial(r, T)
        p_r = -2 * r * T * f_r - r**2 * T * f_rr
        p_T = -r**2 * f_r - r**2 * T * f_Tr
        s_T = 2 * f_T + T * f_TT
        s_r = f_r + T * f_Tr
        return p_r - p_T * s_r / s_T

    _check_hyperbolic(dp_of_rho, rho_range, n=65)
    return _from_dp(p_of_rho, dp_of_rho, rho_range, rho_ref, "numeric",
                    f"{model.descriptor} at s0={s0:g}", s0=s0, T_of_rho=T_of_rho)
