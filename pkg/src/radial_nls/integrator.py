"""Outward integration of the radial system from a series start at the origin.

The first-order state is (u, u', v, v').  The origin is singular through the
(n-1)/r damping term, so integration begins at a small radius ``r_start``
from the second-order expansion u(r) = u0 - f(0, u0, v0) r^2 / (2n).
"""

from __future__ import annotations

import math
import types
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import kve

from . import _kernels as K
from .errors import StiffnessError, ValidationError
from .model import DecayCertificate, Nonlinearity, Parameters, RadialProfile
from .quadrature import adaptive_simpson


class Outcome(str, Enum):
    DECAY = "Decay"
    ZERO_CROSSING = "ZeroCrossing"
    BLOWUP = "Blowup"
    INDETERMINATE = "Indeterminate"


_KIND = {
    K.KIND_DECAY: Outcome.DECAY,
    K.KIND_CROSS: Outcome.ZERO_CROSSING,
    K.KIND_BLOWUP: Outcome.BLOWUP,
    K.KIND_INDETERMINATE: Outcome.INDETERMINATE,
}
_DETAIL = {
    (K.KIND_CROSS, K.DETAIL_U): "u",
    (K.KIND_CROSS, K.DETAIL_V): "v",
    (K.KIND_CROSS, K.DETAIL_BOTH): "uv",
    (K.KIND_INDETERMINATE, K.DETAIL_HORIZON): "horizon",
    (K.KIND_INDETERMINATE, K.DETAIL_TRAPPED): "trapped",
}


@dataclass(frozen=True)
class ShootingConfig:
    """Integration controls.

    r_max defaults to 50/sqrt(m) with m from ``certificate``.  ``energy_cutoff``
    stops a trajectory as soon as the Hamiltonian of a gradient system drops
    below zero: energy is nonincreasing along solutions and vanishes at the
    origin, so such a trajectory can never decay.
    """

    r_start: float = 1e-4
    r_max: Optional[float] = None
    tol: float = 1e-10
    blowup_factor: float = 1e3
    decay_floor: float = 1e-5
    energy_cutoff: bool = True
    h_max: float = math.inf
    certificate: DecayCertificate = DecayCertificate()

    def __post_init__(self):
        if self.r_max is None:
            object.__setattr__(self, "r_max", 50.0 / math.sqrt(self.certificate.m))
        if not 0 < self.r_start < self.r_max:
            raise ValidationError("need 0 < r_start < r_max")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if not self.blowup_factor > 1:
            raise ValidationError("blowup_factor must exceed 1")
        if not 0 < self.decay_floor < 1:
            raise ValidationError("decay_floor must lie in (0, 1)")
        if not self.h_max > 0:
            raise ValidationError("h_max must be positive")

    def replace(self, **kw) -> "ShootingConfig":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return ShootingConfig(**d)


@dataclass(frozen=True)
class TrajectoryOutcome:
    kind: Outcome
    event_radius: float
    profile: RadialProfile
    detail: str = ""

    @property
    def u0(self) -> float:
        return float(self.profile.u[0])


# ---------------------------------------------------------------------------
# right-hand side selection


def _python_dopri5():
    """dopri5 with every helper swapped for its pure-Python original."""
    src = K.dopri5.py_func
    glb = dict(src.__globals__)
    # helpers share one namespace so nested calls also stay in Python
    for name in ("_dense", "_locate", "_err_norm", "_event_value"):
        glb[name] = types.FunctionType(getattr(K, name).py_func.__code__, glb, name)
    # codes become callables
    glb["_rhs"] = lambda fun, r, y, out, p: fun(r, y, out, p)
    glb["_energy"] = lambda energy, r, y, p: energy(r, y, p)
    return types.FunctionType(src.__code__, glb, "dopri5_py")


_DOPRI_PY = _python_dopri5()


def _power_params(f: Nonlinearity, second: Optional[Nonlinearity], n: int):
    if f.kernel is None:
        return None
    g = f if second is None else second
    if g.kernel is None:
        return None
    q1, c1, a1, b1 = f.kernel
    q2, c2, a2, b2 = g.kernel
    if q1 != q2 or c1 != c2:
        return None
    return np.array([float(n), q1, c1, a1, b1, a2, b2])


def _system(f: Nonlinearity, second: Optional[Nonlinearity], n: int):
    """Return (driver, rhs, energy, p, has_energy)."""
    p = _power_params(f, second, n)
    gradient = second is None and f.potential is not None
    if p is not None:
        energy = K.ENERGY_POWER if gradient else K.ENERGY_NONE
        return K.dopri5, K.RHS_POWER, energy, p, gradient

    g = f if second is None else second

    def rhs(r, y, out, _p):
        u, du, v, dv = y[0], y[1], y[2], y[3]
        out[0] = du
        out[1] = -(n - 1) / r * du - float(f(r, max(u, 0.0), max(v, 0.0)))
        out[2] = dv
        out[3] = -(n - 1) / r * dv - float(g(r, max(v, 0.0), max(u, 0.0)))

    def energy(r, y, _p):
        return 0.5 * (y[1] ** 2 + y[3] ** 2) + float(f.potential(max(y[0], 0.0), max(y[2], 0.0)))

    return _DOPRI_PY, rhs, (energy if gradient else K.no_energy.py_func), np.zeros(1), gradient


# ---------------------------------------------------------------------------


def taylor_start(f: Nonlinearity, u0: float, v0: float, params: Parameters, r_start: float = 1e-4,
                 second: Optional[Nonlinearity] = None) -> np.ndarray:
    """State (u, u', v, v') at r_start from the regular expansion at the origin."""
    g = f if second is None else second
    n = params.n
    fu = float(f(0.0, u0, v0))
    fv = float(g(0.0, v0, u0))
    return np.array([
        u0 - fu * r_start**2 / (2 * n),
        -fu * r_start / n,
        v0 - fv * r_start**2 / (2 * n),
        -fv * r_start / n,
    ])


def _profile_from(rs, ys, params) -> RadialProfile:
    rs = np.asarray(rs)
    ys = np.asarray(ys)
    # an event located just past the previous node would make a near-duplicate
    # abscissa; keep the event sample instead
    if rs.size >= 3 and rs[-1] - rs[-2] < 1e-3 * (rs[-2] - rs[-3]):
        rs = np.delete(rs, -2)
        ys = np.delete(ys, -2, axis=0)
    return RadialProfile(rs, ys[:, 0], ys[:, 1], ys[:, 2], ys[:, 3], params)


def _thresholds(cfg: ShootingConfig, scale: float) -> np.ndarray:
    # energy at r_start is exact to rounding; later values carry integration
    # drift, so the running margin is sized by the tolerance
    e2 = max(1.0, scale**2)
    return np.array([
        cfg.blowup_factor * max(scale, 1.0),
        cfg.decay_floor * scale,
        1e-13 * e2,
        max(1e-6, 1e3 * cfg.tol) * e2,
    ])


def integrate(f: Nonlinearity, u0: float, v0: float, params: Parameters,
              cfg: ShootingConfig = ShootingConfig(), second: Optional[Nonlinearity] = None) -> TrajectoryOutcome:
    """Integrate outward from (u0, v0) and classify the trajectory.

    ZeroCrossing when u or v reaches zero (detail names the component),
    Blowup when max(u, v) exceeds blowup_factor * max(u0, v0, 1), Decay once all
    of |u|, |v|, |u'|, |v'| fall below decay_floor * max(u0, v0) with u', v' <= 0,
    Indeterminate at r_max (detail "horizon") or on negative energy
    (detail "trapped").  Events are located on the dense output to 1e-12 in r.
    """
    if not (u0 >= 0 and v0 >= 0):
        raise ValidationError("initial values must be nonnegative")
    if u0 == 0 and v0 == 0:
        r = np.linspace(cfg.r_start, cfg.r_max, 4)
        z = np.zeros(4)
        return TrajectoryOutcome(Outcome.INDETERMINATE, cfg.r_max, RadialProfile(r, z, z, z, z, params), "zero")

    driver, rhs, energy, p, gradient = _system(f, second, params.n)
    y0 = taylor_start(f, u0, v0, params, cfg.r_start, second)
    scale = max(u0, v0)
    ev = _thresholds(cfg, scale)
    flags = K.EV_CROSS | K.EV_BLOWUP | K.EV_DECAY
    if gradient and cfg.energy_cutoff:
        flags |= K.EV_ENERGY
    kind, detail, r_ev, _, rs, ys, status = driver(
        rhs, energy, p, cfg.r_start, y0, cfg.r_max, cfg.tol, cfg.h_max, flags, ev, True
    )
    if status == K.STATUS_UNDERFLOW:
        raise StiffnessError(float(r_ev))
    return TrajectoryOutcome(_KIND[kind], float(r_ev), _profile_from(rs, ys, params), _DETAIL.get((kind, detail), ""))


def classify_node(f: Nonlinearity, u0: float, v0: float, params: Parameters, cfg: ShootingConfig,
                  second: Optional[Nonlinearity] = None, decay_event: bool = True):
    """(kind code, detail code, event radius) without recording a profile.

    With ``decay_event=False`` a trajectory is followed until it crosses, blows
    up, is trapped or reaches r_max; bisection uses this because a small
    decay floor is reached before near-threshold trajectories separate.
    """
    driver, rhs, energy, p, gradient = _system(f, second, params.n)
    y0 = taylor_start(f, u0, v0, params, cfg.r_start, second)
    scale = max(u0, v0)
    ev = _thresholds(cfg, scale)
    flags = K.EV_CROSS | K.EV_BLOWUP
    if decay_event:
        flags |= K.EV_DECAY
    if gradient and cfg.energy_cutoff:
        flags |= K.EV_ENERGY
    kind, detail, r_ev, _, _, _, status = driver(
        rhs, energy, p, cfg.r_start, y0, cfg.r_max, cfg.tol, cfg.h_max, flags, ev, False
    )
    if status == K.STATUS_UNDERFLOW:
        raise StiffnessError(float(r_ev))
    return kind, detail, r_ev


# ---------------------------------------------------------------------------
# miss map for 2D root finding


def tail_ratio(n: int, r: float, mass: float = 1.0) -> float:
    """-u'/u of the decaying solution of u'' + (n-1)/r u' = mass u."""
    nu = (n - 2) / 2.0
    s = math.sqrt(mass)
    return s * kve(nu + 1, s * r) / kve(nu, s * r)


def _fd_partials(f, r, z1, z2):
    h1 = 1e-7 * max(1.0, abs(z1))
    h2 = 1e-7 * max(1.0, abs(z2))
    d1 = (float(f(r, z1 + h1, z2)) - float(f(r, max(z1 - h1, 0.0), z2))) / (z1 + h1 - max(z1 - h1, 0.0))
    d2 = (float(f(r, z1, z2 + h2)) - float(f(r, z1, max(z2 - h2, 0.0)))) / (z2 + h2 - max(z2 - h2, 0.0))
    return d1, d2


def miss_map(f: Nonlinearity, u0: float, v0: float, params: Parameters, r_probe: float, tol: float,
             r_start: float = 1e-4, second: Optional[Nonlinearity] = None):
    """Tail mismatch M = (u' + k u, v' + k v) at r_probe and its Jacobian in (u0, v0).

    k is the logarithmic decay rate of the linearised tail, so M vanishes (up
    to nonlinear terms) exactly on trajectories that decay.  The Jacobian comes
    from the variational equations integrated alongside the state.
    """
    g = f if second is None else second
    n = params.n
    y0 = taylor_start(f, u0, v0, params, r_start, second)
    p = _power_params(f, second, n)
    if p is not None:
        q, c, a1, b1 = f.kernel
        a2, b2 = g.kernel[2], g.kernel[3]
        fu_u, fu_v = K.power_grad(u0, v0, q, c, a1, b1)
        fv_v, fv_u = K.power_grad(v0, u0, q, c, a2, b2)
        driver, rhs = K.dopri5, K.RHS_POWER_VAR
        mass = c
    else:
        fu_u, fu_v = _fd_partials(f, 0.0, u0, v0)
        fv_v, fv_u = _fd_partials(g, 0.0, v0, u0)

        def rhs(r, y, out, _p):
            uc, vc = max(y[0], 0.0), max(y[2], 0.0)
            out[0] = y[1]
            out[1] = -(n - 1) / r * y[1] - float(f(r, uc, vc))
            out[2] = y[3]
            out[3] = -(n - 1) / r * y[3] - float(g(r, vc, uc))
            a11, a12 = _fd_partials(f, r, uc, vc)
            a22, a21 = _fd_partials(g, r, vc, uc)
            for j in range(2):
                s0, s1, s2, s3 = y[4 + j], y[6 + j], y[8 + j], y[10 + j]
                out[4 + j] = s1
                out[6 + j] = -(n - 1) / r * s1 - a11 * s0 - a12 * s2
                out[8 + j] = s3
                out[10 + j] = -(n - 1) / r * s3 - a21 * s0 - a22 * s2

        driver, p, mass = _DOPRI_PY, np.zeros(1), 1.0
    rr = r_start**2 / (2 * n)
    S = np.array([
        [1 - fu_u * rr, -fu_v * rr],
        [-fu_u * r_start / n, -fu_v * r_start / n],
        [-fv_u * rr, 1 - fv_v * rr],
        [-fv_u * r_start / n, -fv_v * r_start / n],
    ])
    Y0 = np.concatenate([y0, S.ravel()])
    energy = K.ENERGY_NONE if driver is K.dopri5 else K.no_energy.py_func
    _, _, r_end, Y, _, _, status = driver(rhs, energy, p, r_start, Y0, r_probe, tol, math.inf, 0, np.zeros(4), False)
    if status == K.STATUS_UNDERFLOW:
        raise StiffnessError(float(r_end))
    k = tail_ratio(n, r_probe, mass)
    y = Y[:4]
    S = Y[4:].reshape(4, 2)
    M = np.array([y[1] + k * y[0], y[3] + k * y[2]])
    J = np.array([S[1] + k * S[0], S[3] + k * S[2]])
    return M, J, y


# ---------------------------------------------------------------------------


def wronskian_terms(profile: RadialProfile, f: Nonlinearity, second: Optional[Nonlinearity] = None):
    """Per-interval (change of r^(n-1)(u'v - v'u), integral of its derivative)."""
    g = f if second is None else second
    n = profile.params.n
    r = profile.r
    W = r ** (n - 1) * (profile.du * profile.v - profile.dv * profile.u)

    def integrand(x, idx):
        u, du, v, dv = profile(x)
        return x ** (n - 1) * (g(x, v, u) * u - f(x, u, v) * v)

    I = adaptive_simpson(integrand, r[:-1], r[1:], tol=1e-13)
    return np.diff(W), I


def wronskian_consistency(profile: RadialProfile, f: Nonlinearity, second: Optional[Nonlinearity] = None) -> float:
    """Sup over grid intervals of |delta W - integral of W'| along the profile."""
    dW, I = wronskian_terms(profile, f, second)
    return float(np.max(np.abs(dW - I)))
