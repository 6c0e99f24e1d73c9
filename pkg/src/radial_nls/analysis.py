"""Diagnostics on computed profiles: decay rates, the c1/c2 lower bound, and the
Wronskian and energy identities evaluated by quadrature."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsufficientTailError, UnsupportedNonlinearityError
from .integrator import wronskian_terms
from .model import DecayCertificate, Nonlinearity, RadialProfile
from .quadrature import adaptive_simpson

MIN_TAIL = 10
RATE_SLACK = 0.05
EQUAL_CUTOFF = 1e-14


def _tail_start(profile: RadialProfile, eps: float) -> float:
    # first radius beyond which both components stay below eps
    big = np.flatnonzero(np.maximum(profile.u, profile.v) >= eps)
    if big.size == 0:
        return float(profile.r[0])
    if big[-1] + 1 >= len(profile):
        return math.inf
    return float(profile.r[big[-1] + 1])


@dataclass(frozen=True)
class DecayCheck:
    rate_u: float
    rate_v: float
    passed: bool
    monotone: bool
    window: tuple

    def to_dict(self) -> dict:
        return {"rate_u": self.rate_u, "rate_v": self.rate_v, "pass": self.passed,
                "monotone": self.monotone, "window": list(self.window)}


def tail_window(profile: RadialProfile, cert: DecayCertificate):
    """Indices in [r_end/2, 0.9 r_end] where both components are below eps."""
    r = profile.r
    lo = max(0.5 * profile.r_end, _tail_start(profile, cert.eps))
    sel = np.flatnonzero((r >= lo) & (r <= 0.9 * profile.r_end))
    if sel.size < MIN_TAIL:
        raise InsufficientTailError(f"tail window holds {sel.size} samples, need {MIN_TAIL}")
    return sel


def _rate(r, w, n):
    # the radial factor r^((n-1)/2) removes the algebraic part of the tail
    y = np.log(w) + 0.5 * (n - 1) * np.log(r)
    return float(np.polyfit(r, y, 1)[0])


def verify_decay(profile: RadialProfile, cert: DecayCertificate = DecayCertificate()) -> DecayCheck:
    """Fitted exponential rates of u + |u'| and v + |v'| and the monotone envelope test.

    Passes when both rates are at most -sqrt(m) + 0.05.  The envelope
    exp(sqrt(m) r) (u + v) must be nonincreasing beyond max(R, r_eps).
    """
    n = profile.params.n if profile.params is not None else 1
    sel = tail_window(profile, cert)
    r = profile.r[sel]
    wu = profile.u[sel] + np.abs(profile.du[sel])
    wv = profile.v[sel] + np.abs(profile.dv[sel])
    if np.any(wu <= 0) or np.any(wv <= 0):
        raise InsufficientTailError("tail contains nonpositive samples")
    ru, rv = _rate(r, wu, n), _rate(r, wv, n)
    sm = math.sqrt(cert.m)
    passed = ru <= -sm + RATE_SLACK and rv <= -sm + RATE_SLACK

    start = max(cert.R, _tail_start(profile, cert.eps))
    mask = profile.r >= start
    env = np.exp(sm * profile.r[mask]) * (profile.u[mask] + profile.v[mask])
    monotone = bool(env.size < 2 or np.all(np.diff(env) <= 1e-9 * np.max(env)))
    return DecayCheck(ru, rv, bool(passed and monotone), monotone, (float(r[0]), float(r[-1])))


def c1_c2(profile: RadialProfile, f: Nonlinearity, cert: DecayCertificate, second: Optional[Nonlinearity] = None):
    """Pointwise quotients c1, c2; c1 = c2 = m where |u - v| < 1e-14."""
    g = f if second is None else second
    r, u, v = profile.r, profile.u, profile.v
    a = np.asarray(f(r, u, v), dtype=float)
    b = np.asarray(g(r, v, u), dtype=float)
    d = u - v
    eq = np.abs(d) < EQUAL_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        c1 = np.where(eq, cert.m, -(a - b) / np.where(eq, 1.0, d))
        c2 = np.where(eq, cert.m, -(a + b) / (u + v))
    return c1, c2


def check_c1_c2_bound(profile: RadialProfile, f: Nonlinearity, cert: DecayCertificate = DecayCertificate(),
                      second: Optional[Nonlinearity] = None) -> bool:
    """c1, c2 >= m wherever r >= R and both components are already below eps."""
    c1, c2 = c1_c2(profile, f, cert, second)
    mask = profile.r >= max(cert.R, _tail_start(profile, cert.eps))
    if not mask.any():
        raise InsufficientTailError("profile never enters the small-amplitude region")
    return bool(np.all(c1[mask] >= cert.m) and np.all(c2[mask] >= cert.m))


# ---------------------------------------------------------------------------
# identities


def _n(profile, n):
    if n is not None:
        return int(n)
    return profile.params.n if profile.params is not None else 1


def wronskian_integral(profile: RadialProfile, f: Nonlinearity, n: Optional[int] = None,
                       second: Optional[Nonlinearity] = None, tol: float = 1e-13) -> float:
    """Integral of r^(n-1) (f(r,v,u) u - f(r,u,v) v) over the profile's range."""
    g = f if second is None else second
    n = _n(profile, n)

    def integrand(x, idx):
        u, _, v, _ = profile(x)
        return x ** (n - 1) * (np.asarray(g(x, v, u)) * u - np.asarray(f(x, u, v)) * v)

    r = profile.r
    return float(np.sum(adaptive_simpson(integrand, r[:-1], r[1:], tol=tol)))


def antiderivative_g(f: Nonlinearity, r, z, tol: float = 1e-12):
    """G(r, z) = integral of g(r, t) over t in [0, z], by adaptive Simpson."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    r, z = np.broadcast_arrays(r, z)
    g = f.split.g
    return adaptive_simpson(lambda t, i: g(r[i], t), np.zeros(z.size), z.ravel(), tol=tol).reshape(z.shape)


def energy_function(profile: RadialProfile, f: Nonlinearity, n: Optional[int] = None):
    """E(r) = r^(2n-2) (-u'^2/2 + v'^2/2 - G(r,u) + G(r,v)) at the grid nodes."""
    if f.split is None:
        raise UnsupportedNonlinearityError("energy identity needs the g/h split")
    n = _n(profile, n)
    r = profile.r
    G = antiderivative_g(f, r, profile.u) - antiderivative_g(f, r, profile.v)
    return r ** (2 * n - 2) * (-0.5 * profile.du**2 + 0.5 * profile.dv**2 - G)


def check_energy_identity(profile: RadialProfile, f: Nonlinearity, n: Optional[int] = None,
                          tol: float = 1e-12) -> float:
    """Sup over grid intervals of |delta E - integral of E'| with
    E' = r^(2n-2) h (v u' - u v') - r^(2n-3) * integral_v^u (r g_r + (2n-2) g) dt."""
    if f.split is None:
        raise UnsupportedNonlinearityError("energy identity needs the g/h split")
    n = _n(profile, n)
    g, g_r, h = f.split.g, f.split.g_r, f.split.h
    E = energy_function(profile, f, n)

    def inner(x, u, v):
        # integral over [v, u] of r g_r + (2n-2) g, oriented
        fn = lambda t, i: x[i] * g_r(x[i], t) + (2 * n - 2) * g(x[i], t)
        return adaptive_simpson(fn, v, u, tol=tol)

    def integrand(x, idx):
        u, du, v, dv = profile(x)
        out = x ** (2 * n - 2) * np.asarray(h(x, u, v)) * (v * du - u * dv)
        if n > 1 or np.any(np.asarray(g_r(x, u)) != 0):
            out = out - x ** (2 * n - 3) * inner(x, u, v)
        return out

    r = profile.r
    I = adaptive_simpson(integrand, r[:-1], r[1:], tol=tol)
    return float(np.max(np.abs(np.diff(E) - I)))


def ratio_monotonicity(profile: RadialProfile, floor: float = 1e-3) -> str:
    """Shape of u/v where both components exceed floor * max: equal, constant,
    increasing, decreasing or mixed.  Reported without interpretation."""
    scale = max(np.max(profile.u), np.max(profile.v))
    if np.all(np.abs(profile.u - profile.v) <= 1e-12 * scale):
        return "equal"
    keep = (profile.u > floor * scale) & (profile.v > floor * scale)
    ratio = profile.u[keep] / profile.v[keep]
    d = np.diff(ratio)
    noise = 1e-8 * np.max(np.abs(ratio))
    if np.all(np.abs(d) <= noise):
        return "constant"
    if np.all(d >= -noise):
        return "increasing"
    if np.all(d <= noise):
        return "decreasing"
    return "mixed"


@dataclass(frozen=True)
class IdentityReport:
    wronskian_defect: float
    wronskian_consistency: float
    energy_defect: Optional[float]
    decay_rate_u: float
    decay_rate_v: float
    decay_pass: bool
    c1_c2_bound: bool
    ratio_shape: str
    truncation_bound: float
    certificate: DecayCertificate

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["certificate"] = self.certificate.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def identity_report(profile: RadialProfile, f: Nonlinearity, cert: DecayCertificate = DecayCertificate(),
                    second: Optional[Nonlinearity] = None) -> IdentityReport:
    n = _n(profile, None)
    wi = wronskian_integral(profile, f, n, second)
    dW, I = wronskian_terms(profile, f, second)
    energy = None
    if f.split is not None and second is None:
        energy = check_energy_identity(profile, f, n)
    dc = verify_decay(profile, cert)
    return IdentityReport(
        wronskian_defect=abs(wi),
        wronskian_consistency=float(np.max(np.abs(dW - I))),
        energy_defect=energy,
        decay_rate_u=dc.rate_u,
        decay_rate_v=dc.rate_v,
        decay_pass=dc.passed,
        c1_c2_bound=check_c1_c2_bound(profile, f, cert, second),
        ratio_shape=ratio_monotonicity(profile),
        truncation_bound=math.exp(-math.sqrt(cert.m) * profile.r_end),
        certificate=cert,
    )
