"""
Differential 2-forms on the 0-jet space E(t, x, u, rho).

Coordinates are always ordered ``(t, x, u, rho)``.  A 2-form is stored by its
six coefficients on ``dt^dx, dt^du, dt^drho, dx^du, dx^drho, du^drho`` in that
(lexicographic) order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, SingularCharacteristic, SingularOperator
from .thermo import HomentropicModel

__all__ = [
    "PAIRS",
    "TwoFormOnE",
    "SurfaceParametrization",
    "SystemType",
    "euler_forms",
    "effective_forms",
    "wedge_pair",
    "pairing_matrix",
    "classify",
    "characteristic_fields",
    "aw_matrix",
    "interior",
    "restrict_2form",
    "is_integrable_characteristics",
    "is_constant_coeff_reducible",
]

PAIRS = ("tx", "tu", "trho", "xu", "xrho", "urho")
_PAIR_INDEX = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _zero(u, rho):
    return np.zeros(np.broadcast(np.asarray(u, dtype=float), np.asarray(rho, dtype=float)).shape)


@dataclass(frozen=True)
class TwoFormOnE:
    """A 2-form whose coefficients depend on ``(u, rho)`` only.

    Missing coefficients are identically zero.
    """

    c_tx: Optional[Callable] = None
    c_tu: Optional[Callable] = None
    c_trho: Optional[Callable] = None
    c_xu: Optional[Callable] = None
    c_xrho: Optional[Callable] = None
    c_urho: Optional[Callable] = None

    def coefficients(self, u, rho):
        """Array of shape ``(6, *broadcast_shape)`` in :data:`PAIRS` order."""
        u = np.asarray(u, dtype=float)
        rho = np.asarray(rho, dtype=float)
        shape = np.broadcast(u, rho).shape
        out = np.empty((6,) + shape)
        for k, name in enumerate(PAIRS):
            fn = getattr(self, "c_" + name)
            out[k] = _zero(u, rho) if fn is None else np.broadcast_to(fn(u, rho), shape)
        return out

    def matrix(self, u, rho):
        """Antisymmetric 4x4 matrix ``M[i, j]`` with ``form = sum_{i<j} M[i, j] dxi^dxj``."""
        c = self.coefficients(u, rho)
        M = np.zeros((4, 4) + c.shape[1:])
        for k, (i, j) in enumerate(_PAIR_INDEX):
            M[i, j] = c[k]
            M[j, i] = -c[k]
        return M


@dataclass(frozen=True)
class SystemType:
    tag: str
    det_P: float


def euler_forms(hm: HomentropicModel):
    """The pair of 2-forms encoding the homentropic Euler system before normalisation.

    ``omega1 = rho dt^du + u dt^drho - dx^drho`` and
    ``omega2 = u dt^du + (p'/rho) dt^drho - dx^du``.
    """
    w1 = TwoFormOnE(
        c_tu=lambda u, r: np.asarray(r, dtype=float) + 0 * np.asarray(u),
        c_trho=lambda u, r: np.asarray(u, dtype=float) + 0 * np.asarray(r),
        c_xrho=lambda u, r: -np.ones(np.broadcast(np.asarray(u), np.asarray(r)).shape),
    )
    w2 = TwoFormOnE(
        c_tu=lambda u, r: np.asarray(u, dtype=float) + 0 * np.asarray(r),
        c_trho=lambda u, r: hm.dp(r) / np.asarray(r, dtype=float) + 0 * np.asarray(u),
        c_xu=lambda u, r: -np.ones(np.broadcast(np.asarray(u), np.asarray(r)).shape),
    )
    return w1, w2


def effective_forms(hm: HomentropicModel):
    """Effective 2-forms of a hyperbolic system.

    ``omega1 = A (rho dt^du + u dt^drho - dx^drho)`` and
    ``omega2 = u dt^du + rho A**2 dt^drho - dx^du``, with ``A = sqrt(p') / rho``.
    """
    w1 = TwoFormOnE(
        c_tu=lambda u, r: hm.A(r) * np.asarray(r, dtype=float) + 0 * np.asarray(u),
        c_trho=lambda u, r: hm.A(r) * np.asarray(u, dtype=float),
        c_xrho=lambda u, r: -hm.A(r) + 0 * np.asarray(u),
    )
    w2 = TwoFormOnE(
        c_tu=lambda u, r: np.asarray(u, dtype=float) + 0 * np.asarray(r),
        c_trho=lambda u, r: np.asarray(r, dtype=float) * hm.A(r) ** 2 + 0 * np.asarray(u),
        c_xu=lambda u, r: -np.ones(np.broadcast(np.asarray(u), np.asarray(r)).shape),
    )
    return w1, w2


def wedge_pair(alpha: TwoFormOnE, beta: TwoFormOnE, u, rho):
    """Coefficient of ``alpha ^ beta`` against ``dt^dx^du^drho``."""
    a = alpha.coefficients(u, rho)
    b = beta.coefficients(u, rho)
    tx, tu, tr, xu, xr, ur = range(6)
    val = (a[tx] * b[ur] + a[ur] * b[tx]
           - a[tu] * b[xr] - a[xr] * b[tu]
           + a[tr] * b[xu] + a[xu] * b[tr])
    return float(val) if val.ndim == 0 else val


def pairing_matrix(forms, u, rho):
    """``P_omega``: matrix of :func:`wedge_pair` over a pair of forms."""
    return np.array([[wedge_pair(a, b, u, rho) for b in forms] for a in forms])


def classify(hm: HomentropicModel, rho) -> SystemType:
    """Type of the Euler system at density ``rho`` from ``det P_omega = -4 p'(rho)``."""
    det = -4.0 * float(hm.dp(rho))
    if det < 0:
        tag = "Hyperbolic"
    elif det > 0:
        tag = "Elliptic"
    else:
        tag = "Parabolic"
    return SystemType(tag, det)


def characteristic_fields(hm: HomentropicModel, u, rho):
    """Generators ``X+, X-, Y+, Y-`` of the characteristic planes.

    Each is a component vector in the ``(t, x, u, rho)`` basis:
    ``X(+/-) = +/-A d_u + d_rho`` and ``Y(+/-) = (u -/+ rho A)**-1 d_t + d_x``.
    """
    A = float(hm.A(rho))
    u = float(u)
    rho = float(rho)
    c_plus = u - rho * A
    c_minus = u + rho * A
    if c_plus == 0 or c_minus == 0:
        raise SingularCharacteristic(f"zero characteristic speed at u={u!r}, rho={rho!r}")
    X_plus = np.array([0.0, 0.0, A, 1.0])
    X_minus = np.array([0.0, 0.0, -A, 1.0])
    Y_plus = np.array([1.0 / c_plus, 1.0, 0.0, 0.0])
    Y_minus = np.array([1.0 / c_minus, 1.0, 0.0, 0.0])
    return X_plus, X_minus, Y_plus, Y_minus


def aw_matrix(hm: HomentropicModel, u, rho):
    """Matrix of the operator ``A_omega`` defined by ``X _| omega2 = A_omega(X) _| omega1``.

    The entries are the classical ones,

        1/(rho A) * [[u, -1, 0, 0],
                     [u**2 - rho**2 A**2, -u, 0, 0],
                     [0, 0, 0, rho A**2],
                     [0, 0, rho, 0]],

    and the matrix acts on column vectors with components ordered
    ``(t, x, u, rho)``.
    """
    A = float(hm.A(rho))
    u = float(u)
    rho = float(rho)
    rA = rho * A
    if rA == 0:
        raise SingularOperator(f"rho A(rho) = 0 at rho={rho!r}")
    return np.array([
        [u, -1.0, 0.0, 0.0],
        [u * u - rA * rA, -u, 0.0, 0.0],
        [0.0, 0.0, 0.0, rho * A * A],
        [0.0, 0.0, rho, 0.0],
    ]) / rA


def interior(vec, form: TwoFormOnE, u, rho):
    """Components of the 1-form ``vec _| form`` in the ``(dt, dx, du, drho)`` basis."""
    M = form.matrix(float(u), float(rho))
    return np.asarray(vec, dtype=float) @ M


@dataclass(frozen=True)
class SurfaceParametrization:
    """A 2-parameter surface ``(a, b) -> (t, x, u, rho)`` in E.

    ``partials``, when given, returns an array of shape ``(4, 2, ...)`` with
    ``d xi_i / d a`` in ``[:, 0]`` and ``d xi_i / d b`` in ``[:, 1]``.  Otherwise
    central differences with step ``fd_step`` (relative) are used.
    """

    t_of: Callable
    x_of: Callable
    u_of: Callable
    rho_of: Callable
    partials: Optional[Callable] = None
    fd_step: float = 1e-6

    def point(self, a, b):
        return np.array([self.t_of(a, b), self.x_of(a, b), self.u_of(a, b), self.rho_of(a, b)])

    def jacobian(self, a, b):
        if self.partials is not None:
            return np.asarray(self.partials(a, b), dtype=float)
        return self.fd_jacobian(a, b)

    def fd_jacobian(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        ha = self.fd_step * np.maximum(np.abs(a), 1.0)
        hb = self.fd_step * np.maximum(np.abs(b), 1.0)
        da = (self.point(a + ha, b) - self.point(a - ha, b)) / (2 * ha)
        db = (self.point(a, b + hb) - self.point(a, b - hb)) / (2 * hb)
        return np.stack([da, db], axis=1)


def restrict_2form(form: TwoFormOnE, surf: SurfaceParametrization, a, b):
    """Coefficient of ``da^db`` in the pullback of ``form`` to ``surf``.

    The form's coefficients are evaluated at the surface point's ``(u, rho)``.
    """
    J = surf.jacobian(a, b)
    c = form.coefficients(surf.u_of(a, b), surf.rho_of(a, b))
    total = 0.0
    for k, (i, j) in enumerate(_PAIR_INDEX):
        total = total + c[k] * (J[i, 0] * J[j, 1] - J[i, 1] * J[j, 0])
    total = np.asarray(total, dtype=float)
    return float(total) if total.ndim == 0 else total


def _sample_grid(hm: HomentropicModel, n):
    lo, hi = hm.rho_range
    return np.geomspace(lo, hi, n)


def is_integrable_characteristics(hm: HomentropicModel, n_verify=50, rtol=1e-9):
    """Detect ``p(rho) = c0 rho**3 + c1`` by sampling.

    The constants are fitted from three densities and the law is verified on
    ``n_verify`` more.  ``True`` is a sufficient condition for integrability
    of both characteristic distributions; ``False`` says nothing about
    necessity.
    """
    fit_rho = _sample_grid(hm, 3)
    p_fit = np.asarray(hm.p(fit_rho), dtype=float)
    scale = fit_rho[-1] ** 3
    V = np.column_stack([(fit_rho / fit_rho[-1]) ** 3, np.ones(3)])
    (c0, c1), *_ = np.linalg.lstsq(V, p_fit, rcond=None)
    c0 /= scale
    rho = _sample_grid(hm, n_verify)
    p = np.asarray(hm.p(rho), dtype=float)
    resid = np.abs(p - (c0 * rho**3 + c1))
    return bool(np.all(resid <= rtol * np.max(np.abs(p))))


def is_constant_coeff_reducible(hm: HomentropicModel, n_verify=50, rtol=1e-9):
    """Detect ``A(rho) = (beta1 rho + beta2)**-2``, i.e. ``A**-1/2`` affine in ``rho``."""
    rho = _sample_grid(hm, n_verify)
    A = np.asarray(hm.A(rho), dtype=float)
    if np.any(~(A > 0)):
        raise DomainError("A(rho) must be positive on the sampled density grid")
    g = A ** -0.5
    r0, r1 = rho[0], rho[-1]
    beta1 = (g[-1] - g[0]) / (r1 - r0)
    beta2 = g[0] - beta1 * r0
    resid = np.abs(g - (beta1 * rho + beta2))
    return bool(np.all(resid <= rtol * np.max(np.abs(g))))
