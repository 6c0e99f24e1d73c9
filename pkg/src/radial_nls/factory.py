"""Explicit solutions built by rescaling a scalar ground state, and the
parameter reduction of the two-mu Schrodinger system to a single coupling."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .criteria import PsiAnalysis
from .errors import (
    InconsistentParametersError,
    NumericalError,
    PositivityViolationError,
    RegimeError,
    ValidationError,
)
from .ground_state import GroundState
from .model import (
    Nonlinearity,
    Parameters,
    RadialProfile,
    make_beta_system,
    make_coupled_power,
    make_power_pair,
    residual,
)

RESIDUAL_GATE = 1e-6


def symmetric_scale(q: float, b: float) -> float:
    if not 1 + b > 0:
        raise ValidationError(f"symmetric scaling needs 1 + b > 0, got b={b}")
    return (1.0 + b) ** (-1.0 / (2 * q - 2))


def make_symmetric(ground: GroundState, b: float) -> RadialProfile:
    """(s u0, s u0) with s = (1+b)^(-1/(2q-2))."""
    s = symmetric_scale(ground.params.q, b)
    return ground.profile.scaled(s, s, ground.params.with_b(b))


@dataclass(frozen=True)
class Triple:
    """Three solutions at one coupling: symmetric, (mu u0, mu k u0) and its swap.

    ``literal_residual`` is the residual of the unscaled pair (u0, u0), kept
    to document that it is not a solution once b > 0.
    """

    members: tuple
    residuals: tuple
    literal_residual: float
    k_b: float
    mu_b: float
    separation: float
    note: str

    def initial_values(self):
        return [(float(p.u[0]), float(p.v[0])) for p in self.members]


def make_triple(ground: GroundState, analysis: PsiAnalysis, gate: float = RESIDUAL_GATE) -> Triple:
    if analysis.root is None or analysis.params is None:
        raise RegimeError("no interior zero of psi; the asymmetric pair does not exist")
    q, b = analysis.params.q, analysis.params.b
    if q != ground.params.q:
        raise ValidationError("ground state and psi analysis use different exponents")
    params = ground.params.with_b(b)
    f = make_coupled_power(params)
    k, mu = analysis.root, analysis.mu_b

    sym = make_symmetric(ground, b)
    second = ground.profile.scaled(mu, mu * k, params)
    third = second.swap()
    members = (sym, second, third)
    res = tuple(residual(f, m) for m in members)
    literal = residual(f, ground.profile.scaled(1.0, 1.0, params))
    bad = [i for i, r in enumerate(res) if not r < gate]
    if bad:
        raise NumericalError(f"triple members {bad} have residual above {gate:g}: {res}")

    h = ground.height
    seps = [
        max(abs(a.u[0] - c.u[0]), abs(a.v[0] - c.v[0]))
        for i, a in enumerate(members) for c in members[i + 1:]
    ]
    note = (
        f"the unscaled pair (u0, u0) has residual {literal:.3g}; the symmetric member is "
        f"(1+b)^(-1/(2q-2)) (u0, u0) with residual {res[0]:.3g}"
    )
    if min(seps) < mu * (1 - k) * h / 2:
        raise NumericalError("triple members are not separated")
    return Triple(members, res, literal, k, mu, float(min(seps)), note)


def make_theta_family(ground: GroundState, theta: float, b: float = 1.0) -> RadialProfile:
    """(cos(theta) u0, sin(theta) u0); solves the system only at q = 2, b = 1."""
    q = ground.params.q
    if not (q == 2 and b == 1):
        raise RegimeError(f"the rotation family exists only for q = 2, b = 1 (got q={q}, b={b})")
    if not 0 < theta < math.pi / 2:
        raise ValidationError("theta must lie in (0, pi/2)")
    c, s = math.cos(theta), math.sin(theta)
    if min(c, s) * ground.height < 1e-3:
        warnings.warn(f"theta={theta:g}: smaller component starts below 1e-3; positivity is fragile", stacklevel=2)
    return ground.profile.scaled(c, s, ground.params.with_b(b))


# ---------------------------------------------------------------------------
# two-mu system


@dataclass(frozen=True)
class MaZhaoParams:
    """Coefficients of -u'' + u = mu1 u^(2q-1) + beta1 u^(q-1) v^q and the
    mirrored v equation with (mu2, beta2)."""

    mu1: float
    mu2: float
    beta1: float
    beta2: float
    q: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "beta1", "beta2", "q"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.q > 1:
            raise ValidationError("q must exceed 1")
        if self.mu1 > 0 or self.mu2 > 0:
            raise ValidationError("mu1, mu2 must be <= 0")
        if not (self.beta1 > 0 and self.beta2 > 0):
            raise ValidationError("beta1, beta2 must be positive")
        q = self.q
        lhs = self.mu1 * self.beta1 ** (q - 1)
        rhs = self.mu2 * self.beta2 ** (q - 1)
        if abs(lhs - rhs) > 1e-12 * max(abs(lhs), abs(rhs), 1e-300):
            raise InconsistentParametersError(f"mu1 beta1^(q-1) = {lhs!r} differs from mu2 beta2^(q-1) = {rhs!r}")
        if not (self.beta1 ** ((q - 2) / 2) * self.mu1 + self.beta2 ** (q / 2) > 0):
            raise PositivityViolationError("beta1^((q-2)/2) mu1 + beta2^(q/2) must be positive")
        if not (self.beta2 ** ((q - 2) / 2) * self.mu2 + self.beta1 ** (q / 2) > 0):
            raise PositivityViolationError("beta2^((q-2)/2) mu2 + beta1^(q/2) must be positive")

    def swapped(self) -> "MaZhaoParams":
        return MaZhaoParams(self.mu2, self.mu1, self.beta2, self.beta1, self.q)

    def to_dict(self) -> dict:
        return {"mu1": self.mu1, "mu2": self.mu2, "beta1": self.beta1, "beta2": self.beta2, "q": self.q}

    @classmethod
    def from_dict(cls, d: dict) -> "MaZhaoParams":
        return cls(d["mu1"], d["mu2"], d["beta1"], d["beta2"], d["q"])

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "MaZhaoParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


def mazhao_beta_pair(p: MaZhaoParams):
    """The two expressions for the reduced coupling."""
    if p.mu1 == 0 or p.mu2 == 0:
        raise ValidationError("the reduction needs mu1, mu2 < 0 strictly")
    q = p.q
    e1 = p.beta1 * abs(p.mu1) ** (-(q - 2) / (2 * q - 2)) * abs(p.mu2) ** (-q / (2 * q - 2))
    e2 = p.beta2 * abs(p.mu1) ** (-q / (2 * q - 2)) * abs(p.mu2) ** (-(q - 2) / (2 * q - 2))
    return e1, e2


def mazhao_beta(p: MaZhaoParams) -> float:
    e1, e2 = mazhao_beta_pair(p)
    if abs(e1 - e2) > 1e-10 * max(abs(e1), abs(e2)):
        raise InconsistentParametersError(f"coupling expressions disagree: {e1!r} vs {e2!r}")
    return 0.5 * (e1 + e2)


def _factors(p: MaZhaoParams):
    e = 1.0 / (2 * p.q - 2)
    return abs(p.mu1) ** e, abs(p.mu2) ** e


def mazhao_scale(u, v, p: MaZhaoParams):
    """(|mu1|^(1/(2q-2)) u, |mu2|^(1/(2q-2)) v); u, v are arrays or a RadialProfile (v ignored)."""
    a, c = _factors(p)
    if isinstance(u, RadialProfile):
        return u.scaled(a, c)
    return a * np.asarray(u, dtype=float), c * np.asarray(v, dtype=float)


def mazhao_unscale(u, v, p: MaZhaoParams):
    a, c = _factors(p)
    if isinstance(u, RadialProfile):
        return u.scaled(1.0 / a, 1.0 / c)
    return np.asarray(u, dtype=float) / a, np.asarray(v, dtype=float) / c


def mazhao_ratio(p: MaZhaoParams) -> float:
    """Predicted u/v for positive solutions of the two-mu system."""
    q = p.q
    top = p.mu2 + p.beta1 ** (q / 2) * p.beta2 ** (-(q - 2) / 2)
    bot = p.mu1 + p.beta2 ** (q / 2) * p.beta1 ** (-(q - 2) / 2)
    if not (top > 0 and bot > 0):
        raise PositivityViolationError("ratio bases must be positive")
    e = 1.0 / (2 * q - 2)
    return top**e * bot ** (-e)


def make_mazhao_system(p: MaZhaoParams):
    """(first, second) nonlinearities of the two-mu system."""
    return make_power_pair(p.q, p.mu1, p.beta1, "mazhao_u"), make_power_pair(p.q, p.mu2, p.beta2, "mazhao_v")


def reduced_system(p: MaZhaoParams) -> Nonlinearity:
    return make_beta_system(p.q, mazhao_beta(p))


def make_mazhao_solution(ground: GroundState, p: MaZhaoParams) -> RadialProfile:
    """Positive solution of the two-mu system from the symmetric solution of the
    reduced one: (w, w) with w = (beta-1)^(-1/(2q-2)) u0, then unscaled."""
    if ground.params.q != p.q:
        raise ValidationError("ground state exponent differs from q")
    beta = mazhao_beta(p)
    if not beta > 1:
        raise RegimeError(f"reduced coupling beta={beta:g} <= 1 admits no positive symmetric solution")
    s = (beta - 1.0) ** (-1.0 / (2 * p.q - 2))
    return mazhao_unscale(ground.profile.scaled(s, s), None, p)
