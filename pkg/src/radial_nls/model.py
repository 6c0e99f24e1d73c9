"""Parameters, nonlinearities and sampled radial profiles.

The radial system is

    -u'' - (n-1)/r u' = f(r, u, v)
    -v'' - (n-1)/r v' = f(r, v, u)

and every nonlinearity here is only defined for nonnegative arguments.
Evaluators clip negative inputs to zero, which is what the integrator does
between a zero crossing and its detection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import MalformedProfileError, ValidationError

CSV_HEADER = "r,u,du,v,dv"


@dataclass(frozen=True)
class Parameters:
    """Space dimension n, exponent q and coupling b.

    Construction fails for q <= 1 or n < 1.  Exponents outside the
    subcritical window (q >= n/(n-2) for n >= 3) are accepted but flagged;
    solver entry points call :meth:`require_window`.
    """

    n: int
    q: float
    b: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.n!r}")
        if not self.q > 1:
            raise ValidationError(f"exponent q must exceed 1, got {self.q!r}")
        if not math.isfinite(self.b):
            raise ValidationError("coupling b must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "b", float(self.b))

    @property
    def critical_exponent(self) -> float:
        return math.inf if self.n <= 2 else self.n / (self.n - 2)

    @property
    def subcritical(self) -> bool:
        return self.q < self.critical_exponent

    def require_window(self):
        if not self.subcritical:
            raise ValidationError(
                f"q={self.q} is not below the critical exponent {self.critical_exponent} for n={self.n}"
            )

    def with_b(self, b: float) -> "Parameters":
        return Parameters(self.n, self.q, b)

    def to_dict(self) -> dict:
        return {"n": self.n, "q": self.q, "b": self.b, "family": "coupled_power"}

    @classmethod
    def from_dict(cls, d: dict) -> "Parameters":
        return cls(int(d["n"]), float(d["q"]), float(d.get("b", 0.0)))


@dataclass(frozen=True)
class GrowthBound:
    """Constants (C, p) with |f| <= C(|z1| + |z2| + |z1|^p + |z2|^p)."""

    C: float
    p: float

    def __post_init__(self):
        if not (self.C > 0 and self.p > 1):
            raise ValidationError("growth bound needs C > 0 and p > 1")


@dataclass(frozen=True)
class DecayCertificate:
    """Constants (m, R, eps) of the decay hypothesis on the difference and sum quotients."""

    m: float = 0.5
    R: float = 1.0
    eps: float = 0.1

    def __post_init__(self):
        if not (self.m > 0 and self.R > 0 and self.eps > 0):
            raise ValidationError("decay certificate needs m, R, eps > 0")

    def to_dict(self) -> dict:
        return {"m": self.m, "R": self.R, "eps": self.eps}


@dataclass(frozen=True)
class Split:
    """f(r, z1, z2) = g(r, z1) + h(r, z1, z2) z2 with h symmetric in (z1, z2)."""

    g: Callable
    g_r: Callable
    h: Callable


@dataclass(frozen=True)
class Nonlinearity:
    """A vectorised evaluator f(r, z1, z2) plus optional structure.

    ``kernel`` is ``(q, c, a, b)`` when f is the power form
    ``-c z1 + a z1^(2q-1) + b z1^(q-1) z2^q``; the integrator then runs a
    compiled right-hand side.  ``potential`` is F(z1, z2) with dF/dz1 = f(z1, z2)
    and dF/dz2 = f(z2, z1), present for gradient systems only.
    """

    eval: Callable
    growth: GrowthBound
    split: Optional[Split] = None
    potential: Optional[Callable] = None
    family: str = "custom"
    kernel: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def __call__(self, r, z1, z2):
        return self.eval(r, z1, z2)

    def to_dict(self) -> dict:
        return {"family": self.family, **self.meta}


def _power_eval(q, c, a, b):
    def f(r, z1, z2):
        z1 = np.maximum(np.asarray(z1, dtype=float), 0.0)
        z2 = np.maximum(np.asarray(z2, dtype=float), 0.0)
        return -c * z1 + a * z1 ** (2 * q - 1) + b * z1 ** (q - 1) * z2**q

    return f


def _power_potential(q, c, a, b):
    def F(z1, z2):
        z1 = np.maximum(np.asarray(z1, dtype=float), 0.0)
        z2 = np.maximum(np.asarray(z2, dtype=float), 0.0)
        return (
            -0.5 * c * (z1 * z1 + z2 * z2)
            + a * (z1 ** (2 * q) + z2 ** (2 * q)) / (2 * q)
            + b * z1**q * z2**q / q
        )

    return F


def _power_family(q, c, a, b, family, meta) -> Nonlinearity:
    def g(r, z):
        z = np.maximum(np.asarray(z, dtype=float), 0.0)
        return -c * z + a * z ** (2 * q - 1)

    def g_r(r, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def h(r, z1, z2):
        z1 = np.maximum(np.asarray(z1, dtype=float), 0.0)
        z2 = np.maximum(np.asarray(z2, dtype=float), 0.0)
        return b * (z1 * z2) ** (q - 1)

    return Nonlinearity(
        eval=_power_eval(q, c, a, b),
        growth=GrowthBound(max(1.0, abs(c), abs(a)) + abs(b), 2 * q - 1),
        split=Split(g, g_r, h),
        potential=_power_potential(q, c, a, b),
        family=family,
        kernel=(float(q), float(c), float(a), float(b)),
        meta=meta,
    )


def make_coupled_power(params: Parameters) -> Nonlinearity:
    """f(r, z1, z2) = -z1 + z1^(2q-1) + b z1^(q-1) z2^q."""
    q, b = params.q, params.b
    f = _power_family(q, 1.0, 1.0, b, "coupled_power", params.to_dict())
    # loose bookkeeping constant, never used in numerics
    return replace(f, growth=GrowthBound(max(1.0, 1.0 + abs(b)), 2 * q - 1))


def make_beta_system(q: float, beta: float) -> Nonlinearity:
    """f(r, z1, z2) = -z1 - z1^(2q-1) + beta z1^(q-1) z2^q (rescaled two-mu system)."""
    return _power_family(q, 1.0, -1.0, beta, "beta_system", {"q": q, "beta": beta})


def make_power_pair(q: float, mu: float, beta: float, family="power") -> Nonlinearity:
    """One equation -z1 + mu z1^(2q-1) + beta z1^(q-1) z2^q of an asymmetric pair."""
    f = _power_family(q, 1.0, mu, beta, family, {"q": q, "mu": mu, "beta": beta})
    return replace(f, potential=None)


def black_box(fun: Callable, growth: GrowthBound = GrowthBound(1.0, 2.0), split: Optional[Split] = None) -> Nonlinearity:
    """Wrap a user-supplied f(r, z1, z2).  Local Lipschitz continuity on the
    open positive octant is the caller's obligation; it is never checked."""
    return Nonlinearity(eval=fun, growth=growth, split=split, family="custom")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """Samples (u, u', v, v') on a strictly increasing radial grid."""

    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    params: Optional[Parameters] = None

    def __post_init__(self):
        arrays = []
        for name in ("r", "u", "du", "v", "dv"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise MalformedProfileError(f"{name} must be one-dimensional")
            a.flags.writeable = False
            object.__setattr__(self, name, a)
            arrays.append(a)
        if len({a.shape[0] for a in arrays}) != 1:
            raise MalformedProfileError("sample arrays differ in length from the grid")
        if self.r.size and (self.r[0] < 0 or np.any(np.diff(self.r) <= 0)):
            raise MalformedProfileError("grid must be nonnegative and strictly increasing")

    def __len__(self):
        return self.r.shape[0]

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    @cached_property
    def _splines(self):
        if len(self) < 2:
            raise MalformedProfileError("interpolation needs at least two samples")
        return (
            CubicHermiteSpline(self.r, self.u, self.du),
            CubicHermiteSpline(self.r, self.v, self.dv),
        )

    def __call__(self, x):
        """Cubic Hermite values and derivatives (u, u', v, v') at radii x."""
        su, sv = self._splines
        return su(x), su(x, 1), sv(x), sv(x, 1)

    def swap(self) -> "RadialProfile":
        return RadialProfile(self.r, self.v, self.dv, self.u, self.du, self.params)

    def scaled(self, su: float, sv: float, params: Optional[Parameters] = None) -> "RadialProfile":
        return RadialProfile(
            self.r, su * self.u, su * self.du, sv * self.v, sv * self.dv,
            self.params if params is None else params,
        )

    def truncated(self, r_max: float) -> "RadialProfile":
        keep = self.r <= r_max
        return RadialProfile(
            self.r[keep], self.u[keep], self.du[keep], self.v[keep], self.dv[keep], self.params
        )

    def to_csv(self, path):
        data = np.column_stack([self.r, self.u, self.du, self.v, self.dv])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header=CSV_HEADER, comments="")

    @classmethod
    def from_csv(cls, path, params: Optional[Parameters] = None) -> "RadialProfile":
        with open(path) as fh:
            header = fh.readline().strip()
        if header.replace(" ", "") != CSV_HEADER:
            raise MalformedProfileError(f"expected header {CSV_HEADER!r}, got {header!r}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 5:
            raise MalformedProfileError("profile CSV needs five columns")
        return cls(*data.T, params=params)


def save_params(params: Parameters, path):
    Path(path).write_text(json.dumps(params.to_dict()) + "\n")


def load_params(path) -> Parameters:
    return Parameters.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------


def _local_second_derivative(r, y, dy):
    """y'' at interior nodes from the quintic Hermite interpolant through
    (y, y') at the node and its two neighbours."""
    xm = r[:-2] - r[1:-1]
    xp = r[2:] - r[1:-1]
    s = 0.5 * (xp - xm)
    tm = xm / s
    tp = xp / s
    y0 = y[1:-1]
    d0 = dy[1:-1] * s
    rhs = np.column_stack(
        [
            y[:-2] - y0 - d0 * tm,
            dy[:-2] * s - d0,
            y[2:] - y0 - d0 * tp,
            dy[2:] * s - d0,
        ]
    )
    k = np.arange(2, 6)
    mat = np.empty((tm.size, 4, 4))
    mat[:, 0, :] = tm[:, None] ** k
    mat[:, 1, :] = k * tm[:, None] ** (k - 1)
    mat[:, 2, :] = tp[:, None] ** k
    mat[:, 3, :] = k * tp[:, None] ** (k - 1)
    coef = np.linalg.solve(mat, rhs[..., None])[..., 0]
    return 2.0 * coef[:, 0] / s**2


def residual(f: Nonlinearity, profile: RadialProfile, second: Optional[Nonlinearity] = None, n: Optional[int] = None) -> float:
    """Sup over interior nodes of the summed absolute equation defects.

    ``second`` is the nonlinearity of the v-equation, evaluated as
    second(r, v, u); by default it is ``f`` itself.  For profiles produced by
    the integrator the value is dominated by the differentiation error of the
    local quintic Hermite fit, roughly 10^3 * tol at tol = 1e-12.
    """
    if len(profile) < 4:
        raise MalformedProfileError("residual needs at least four samples")
    if profile.r[0] <= 0:
        raise MalformedProfileError("residual grid must start at r > 0")
    if n is None:
        if profile.params is None:
            raise ValidationError("profile carries no parameters; pass n explicitly")
        n = profile.params.n
    g = f if second is None else second
    r = profile.r
    upp = _local_second_derivative(r, profile.u, profile.du)
    vpp = _local_second_derivative(r, profile.v, profile.dv)
    ri = r[1:-1]
    u, v = profile.u[1:-1], profile.v[1:-1]
    ru = -upp - (n - 1) / ri * profile.du[1:-1] - f(ri, u, v)
    rv = -vpp - (n - 1) / ri * profile.dv[1:-1] - g(ri, v, u)
    return float(np.max(np.abs(ru) + np.abs(rv)))
