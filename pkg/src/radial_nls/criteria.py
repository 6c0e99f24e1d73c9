"""Hypothesis checks and regime classification for the coupled power system.

All sampling checks are evidence gathered on finite random samples, not
proofs.  Every sampler takes an explicit ``numpy.random.Generator`` so that
results are reproducible per seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    MultipleRootsError,
    NumericalError,
    RegimeError,
    UnsupportedCouplingError,
    UnsupportedNonlinearityError,
    ValidationError,
)
from .model import DecayCertificate, Nonlinearity, Parameters, make_coupled_power

SAMPLES = 100_000
PSI_GRID = 10_000
EPS = np.finfo(float).eps
# ratios z2/z1 below this leave no trace in double-precision f values
PSI_RESOLUTION = 1e-8


class SignClass(str, Enum):
    NEGATIVE = "NegativeEverywhere"
    POSITIVE = "PositiveEverywhere"
    ZERO = "IdenticallyZero"
    MIXED = "Mixed"


class SignCondition(str, Enum):
    A3 = "A3"
    A3PRIME = "A3prime"
    NEITHER = "Neither"


class Regime(str, Enum):
    THM1 = "UniqueSymmetric_Thm1"
    THM2 = "UniqueSymmetric_Thm2"
    MULTIPLE = "MultipleKnown"
    CONTINUUM = "ContinuumFamily"
    UNDETERMINED = "Undetermined"


# ---------------------------------------------------------------------------
# psi


def _psi_terms(k, q, b):
    k = np.asarray(k, dtype=float)
    return 1.0, b * k**q, -(k ** (2 * q - 2)), -b * k ** (q - 2)


def psi(k, params: Parameters):
    """1 + b k^q - k^(2q-2) - b k^(q-2) for 0 < k <= 1."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0) or np.any(k > 1):
        raise ValidationError("psi is defined for 0 < k <= 1")
    t = _psi_terms(k, params.q, params.b)
    return t[0] + t[1] + t[2] + t[3]


def _noise(terms):
    # rounding scale of a sum of terms
    return 64 * EPS * sum(np.abs(t) for t in terms)


def _sign_pattern(values, noise):
    s = np.where(values > noise, 1, np.where(values < -noise, -1, 0))
    return s


@dataclass(frozen=True)
class PsiAnalysis:
    sign_on_01: SignClass
    root: Optional[float] = None
    mu_b: Optional[float] = None
    limit_at_0: float = math.nan
    params: Optional[Parameters] = None

    def to_dict(self) -> dict:
        return {"sign_on_01": self.sign_on_01.value, "k_b": self.root, "mu_b": self.mu_b}


def _k_grid(q: float, b: float) -> np.ndarray:
    # log-spaced part reaches far toward 0 since for q < 2 and small b the
    # zero sits near b^(1/(2-q))
    lo = -200.0 if q < 2 else -16.0
    g = np.concatenate([np.logspace(lo, -1e-9, PSI_GRID), np.linspace(1e-6, 1 - 1e-9, PSI_GRID)])
    return np.unique(g)


def mu_from_k(k: float, params: Parameters) -> float:
    return (1 + params.b * k**params.q) ** (-1.0 / (2 * params.q - 2))


def analyze_psi(params: Parameters) -> PsiAnalysis:
    q, b = params.q, params.b
    if q < 2:
        limit = -math.inf if b > 0 else (math.inf if b < 0 else 1.0)
    elif q == 2:
        limit = 1.0 - b
    else:
        limit = 1.0

    k = _k_grid(q, b)
    terms = _psi_terms(k, q, b)
    vals = sum(terms)
    s = _sign_pattern(vals, _noise(terms))
    nz = s != 0
    if not nz.any():
        return PsiAnalysis(SignClass.ZERO, limit_at_0=limit, params=params)
    ks, ss = k[nz], s[nz]
    changes = np.flatnonzero(ss[1:] != ss[:-1])
    if changes.size == 0:
        cls = SignClass.POSITIVE if ss[0] > 0 else SignClass.NEGATIVE
        return PsiAnalysis(cls, limit_at_0=limit, params=params)
    if changes.size > 1:
        raise MultipleRootsError(f"psi changes sign {changes.size} times on (0, 1) for q={q}, b={b}")
    i = changes[0]
    a, c = ks[i], ks[i + 1]
    fun = lambda x: float(psi(x, params))
    root = brentq(fun, a, c, xtol=1e-300, rtol=4 * EPS, maxiter=500)
    # polish: bisection ends on a float; pick the neighbour with smaller |psi|
    cand = [root, np.nextafter(root, 0.0), np.nextafter(root, 1.0)]
    root = float(min(cand, key=lambda x: abs(fun(x))))
    if abs(fun(root)) >= 1e-12:
        raise NumericalError(f"psi root polish failed: |psi|={abs(fun(root)):.3g}")
    return PsiAnalysis(SignClass.MIXED, root, mu_from_k(root, params), limit, params)


def find_kb(params: Parameters) -> float:
    """The interior zero of psi; RegimeError when psi keeps one sign."""
    a = analyze_psi(params)
    if a.root is None:
        raise RegimeError(f"psi has no interior zero for q={params.q}, b={params.b} ({a.sign_on_01.value})")
    return a.root


# ---------------------------------------------------------------------------
# sampled assumption checks


def check_A2(f: Nonlinearity, cert: DecayCertificate, rng: Optional[np.random.Generator] = None,
             samples: int = SAMPLES) -> bool:
    """Both decay quotients <= -m on random pairs in (0, eps)^2, r in (R, R+100]."""
    rng = np.random.default_rng(0) if rng is None else rng
    z1 = rng.uniform(0, cert.eps, samples)
    z2 = rng.uniform(0, cert.eps, samples)
    r = cert.R + 100 * (1 - rng.uniform(0, 1, samples))
    ok = (z1 != z2) & (z1 > 0) & (z2 > 0)
    z1, z2, r = z1[ok], z2[ok], r[ok]
    a = np.asarray(f(r, z1, z2), dtype=float)
    c = np.asarray(f(r, z2, z1), dtype=float)
    q1 = (a - c) / (z1 - z2)
    q2 = (a + c) / (z1 + z2)
    lim = -cert.m + 1e-12
    return bool(np.all(q1 <= lim) and np.all(q2 <= lim))


def fit_certificate(f: Nonlinearity, rng: Optional[np.random.Generator] = None, m: float = 0.5,
                    R: float = 1.0, eps: float = 0.1, halvings: int = 30) -> Optional[DecayCertificate]:
    """Shrink eps until the sampled decay condition holds; None if it never does."""
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(halvings + 1):
        cert = DecayCertificate(m, R, eps)
        if check_A2(f, cert, rng):
            return cert
        eps *= 0.5
    return None


def _pairs_ordered(rng, samples, z_max=10.0):
    # z1 log-uniform, ratio k = z2/z1 half log-uniform (deep toward 0), half uniform
    z1 = np.exp(rng.uniform(math.log(1e-3), math.log(z_max), samples))
    h = samples // 2
    k = np.concatenate([10 ** rng.uniform(-200, 0, h), rng.uniform(0, 1, samples - h)])
    k = np.clip(k, 1e-300, np.nextafter(1.0, 0.0))
    z2 = k * z1
    keep = (z2 > 0) & (z2 < z1)
    r = rng.uniform(0, 10, samples)
    return r[keep], z1[keep], z2[keep]


def check_sign_conditions(f: Nonlinearity, rng: Optional[np.random.Generator] = None,
                          samples: int = SAMPLES) -> SignCondition:
    """Sign of f(r,z1,z2) z2 - f(r,z2,z1) z1 over random z1 > z2 > 0."""
    rng = np.random.default_rng(0) if rng is None else rng
    r, z1, z2 = _pairs_ordered(rng, samples)
    a = np.asarray(f(r, z1, z2), dtype=float) * z2
    c = np.asarray(f(r, z2, z1), dtype=float) * z1
    d = a - c
    # f may cancel internally, so its rounding is bounded through the growth
    # certificate rather than through |f|
    C, pw = f.growth.C, f.growth.p
    mag = C * (z1 + z2 + z1**pw + z2**pw)
    noise = 64 * EPS * mag * (z1 + z2)
    s = _sign_pattern(d, noise)
    s = s[s != 0]
    if s.size and np.all(s < 0):
        return SignCondition.A3
    if s.size and np.all(s > 0):
        return SignCondition.A3PRIME
    return SignCondition.NEITHER


def _require_r_independent(f, rng, n=1000):
    z1 = rng.uniform(0, 10, n)
    z2 = rng.uniform(0, 10, n)
    a = np.asarray(f(np.full(n, 1.0), z1, z2), dtype=float)
    c = np.asarray(f(np.full(n, 7.5), z1, z2), dtype=float)
    if not np.allclose(a, c, rtol=1e-13, atol=1e-13):
        raise ValidationError("nonlinearity depends on r; the Quittner-Souplet condition needs f = f(z1, z2)")


def check_QS(f: Nonlinearity, rng: Optional[np.random.Generator] = None, samples: int = SAMPLES) -> bool:
    """(z1 - z2)(f(z1, z2) - f(z2, z1)) <= 0 on random z1 >= z2 > 0."""
    rng = np.random.default_rng(0) if rng is None else rng
    _require_r_independent(f, rng)
    z1 = rng.uniform(0, 10, samples)
    z2 = z1 * rng.uniform(0, 1, samples)
    keep = z2 > 0
    z1, z2 = z1[keep], z2[keep]
    r = np.ones_like(z1)
    a = np.asarray(f(r, z1, z2), dtype=float)
    c = np.asarray(f(r, z2, z1), dtype=float)
    val = (z1 - z2) * (a - c)
    noise = 64 * EPS * (z1 - z2) * (np.abs(a) + np.abs(c))
    return bool(np.all(val <= noise))


def check_A4(f: Nonlinearity, n: int, rng: Optional[np.random.Generator] = None,
             samples: int = SAMPLES, z_max: float = 10.0) -> bool:
    """Split structure: h symmetric and positive, r g_r + (2n-2) g <= 0 for z in (0, z_max]."""
    if f.split is None:
        raise UnsupportedNonlinearityError("nonlinearity carries no g/h split")
    rng = np.random.default_rng(0) if rng is None else rng
    g, g_r, h = f.split.g, f.split.g_r, f.split.h
    r = rng.uniform(0, 10, samples) + 1e-12
    z1 = rng.uniform(0, z_max, samples) + 1e-300
    z2 = rng.uniform(0, z_max, samples) + 1e-300
    h12 = np.asarray(h(r, z1, z2), dtype=float)
    h21 = np.asarray(h(r, z2, z1), dtype=float)
    if not (np.all(h12 == h21) and np.all(h12 > 0)):
        return False
    gv = np.asarray(g(r, z1), dtype=float)
    ineq = r * np.asarray(g_r(r, z1), dtype=float) + (2 * n - 2) * gv
    return bool(np.all(ineq <= 64 * EPS * (2 * n) * np.abs(gv)))


def split_defect(f: Nonlinearity, rng: Optional[np.random.Generator] = None, samples: int = 10_000) -> float:
    """max |f - g - h z2| on random points of (0, 10]^3."""
    if f.split is None:
        raise UnsupportedNonlinearityError("nonlinearity carries no g/h split")
    rng = np.random.default_rng(0) if rng is None else rng
    r, z1, z2 = (10 * (1 - rng.uniform(0, 1, samples)) for _ in range(3))
    s = f.split
    d = np.asarray(f(r, z1, z2)) - np.asarray(s.g(r, z1)) - np.asarray(s.h(r, z1, z2)) * z2
    return float(np.max(np.abs(d)))


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class RegimeReport:
    params: Parameters
    regime: Regime
    assumptions: dict
    k_b: Optional[float] = None
    mu_b: Optional[float] = None
    certificate: Optional[DecayCertificate] = None
    seed: int = 0
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "q": self.params.q,
            "b": self.params.b,
            "regime": self.regime.value,
            "assumptions": dict(self.assumptions),
            "k_b": self.k_b,
            "mu_b": self.mu_b,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "seed": self.seed,
            "notes": "; ".join(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_SIGN_TO_CONDITION = {
    SignClass.NEGATIVE: SignCondition.A3,
    SignClass.POSITIVE: SignCondition.A3PRIME,
    SignClass.ZERO: SignCondition.NEITHER,
    SignClass.MIXED: SignCondition.NEITHER,
}


def table_regime(params: Parameters) -> Regime:
    """The case table alone, without running any checks."""
    n, q, b = params.n, params.q, params.b
    if (1 < q < 2 and b >= q - 1) or (q == 2 and b > 1):
        return Regime.THM1
    if n == 1:
        if (q == 2 and 0 < b < 1) or (q > 2 and 0 < b <= q - 1):
            return Regime.THM2
        if (1 < q < 2 and 0 < b < q - 1) or (q > 2 and b > q - 1):
            return Regime.MULTIPLE
        if q == 2 and b == 1:
            return Regime.CONTINUUM
    return Regime.UNDETERMINED


def classify(params: Parameters, seed: int = 0) -> RegimeReport:
    """Regime of (n, q, b) with sampled assumption flags attached."""
    if not params.b > 0:
        raise UnsupportedCouplingError(f"only positive coupling is supported, got b={params.b}")
    rng = np.random.default_rng(seed)
    f = make_coupled_power(params)
    notes = []

    pa = analyze_psi(params)
    sign = check_sign_conditions(f, rng)
    if sign is not _SIGN_TO_CONDITION[pa.sign_on_01]:
        if pa.sign_on_01 is SignClass.MIXED and pa.root < PSI_RESOLUTION:
            notes.append(f"psi changes sign at k={pa.root:.3g}, below the resolution of sampled f values")
            sign = SignCondition.NEITHER
        else:
            raise NumericalError(f"sampled sign condition {sign.value} disagrees with psi class {pa.sign_on_01.value}")
    cert = fit_certificate(f, rng)
    flags = {
        "A1": True,
        "A2": cert is not None,
        "A3": sign is SignCondition.A3,
        "A3p": sign is SignCondition.A3PRIME,
        "A4": check_A4(f, params.n, rng),
        "QS": check_QS(f, rng),
    }

    regime = table_regime(params)
    n, q, b = params.n, params.q, params.b
    if not params.subcritical:
        notes.append(f"q={q} is not below the critical exponent {params.critical_exponent:g}; no ground state")
        regime = Regime.UNDETERMINED
    elif regime is Regime.UNDETERMINED and n >= 2:
        if (q == 2 and 0 < b < 1) or (q > 2 and 0 < b <= q - 1):
            notes.append("uniqueness for n >= 2 in this range is open: the split condition on g fails for z > 1")
        elif (1 < q < 2 and 0 < b < q - 1) or (q > 2 and b > q - 1) or (q == 2 and b == 1):
            notes.append("the explicit scaled solutions exist for every n; the case table covers n = 1 only")

    if regime is Regime.THM1 and not flags["A3"]:
        raise NumericalError("regime Thm1 without the A3 sign condition")
    if regime is Regime.THM2 and not (flags["A3p"] and flags["A4"] and n == 1):
        raise NumericalError("regime Thm2 without A3', A4 and n = 1")
    if regime is Regime.MULTIPLE and pa.root is None:
        raise NumericalError("regime MultipleKnown without an interior zero of psi")
    if regime is Regime.CONTINUUM and not (q == 2 and b == 1):
        raise NumericalError("continuum family outside q = 2, b = 1")
    if regime in (Regime.THM1, Regime.THM2) and not flags["A2"]:
        raise NumericalError("uniqueness regime without a decay certificate")
    if not flags["A4"] and n >= 2:
        notes.append("A4 fails on (0, 10]; a range-restricted variant is not assumed")
    notes.append("assumption flags are sampling evidence, not proofs")

    return RegimeReport(params, regime, flags, pa.root, pa.mu_b, cert, seed, tuple(notes))
