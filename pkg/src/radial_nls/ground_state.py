"""Scalar ground state of -u'' - (n-1)/r u' + u = u^(2q-1) by shooting on u(0)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import DichotomyViolationError, NoGroundStateError, ValidationError
from .integrator import Outcome, ShootingConfig, classify_node, integrate
from .model import Nonlinearity, Parameters, RadialProfile, make_coupled_power

HI_LIMIT = 1e3


class Soliton:
    """Closed-form one-dimensional ground state q^(1/(2q-2)) sech^(1/(q-1))((q-1) r)."""

    def __init__(self, q: float):
        if not q > 1:
            raise ValidationError("q must exceed 1")
        self.q = q
        self.height = q ** (1.0 / (2 * q - 2))

    def __call__(self, r):
        q = self.q
        return self.height / np.cosh((q - 1) * np.asarray(r, dtype=float)) ** (1.0 / (q - 1))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        return -self(r) * np.tanh((self.q - 1) * r)


def soliton_1d(q: float) -> Soliton:
    return Soliton(q)


@dataclass(frozen=True)
class GroundState:
    height: float
    profile: RadialProfile
    params: Parameters
    tol: float = 1e-10
    notes: tuple = field(default_factory=tuple)

    def to_files(self, csv_path) -> Path:
        """Write the profile CSV and a JSON sidecar next to it; returns the sidecar path."""
        csv_path = Path(csv_path)
        self.profile.to_csv(csv_path)
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps({"n": self.params.n, "q": self.params.q, "height": self.height}, indent=2))
        return side

    @classmethod
    def from_files(cls, csv_path) -> "GroundState":
        csv_path = Path(csv_path)
        meta = json.loads(csv_path.with_suffix(".json").read_text())
        params = Parameters(int(meta["n"]), float(meta["q"]), 0.0)
        return cls(float(meta["height"]), RadialProfile.from_csv(csv_path, params), params)


def _high(kind: int) -> bool:
    # above the threshold a trajectory leaves the positive cone
    return kind == K.KIND_CROSS or kind == K.KIND_BLOWUP


def shoot_diagonal(f: Nonlinearity, params: Parameters, cfg: ShootingConfig, lo: float, hi: float = 10.0):
    """Bisection for the decaying height on the diagonal u(0) = v(0).

    Returns (height, profile, notes).  ``lo`` must lie on the non-escaping side;
    ``hi`` is grown tenfold until escape is observed.
    """
    notes = []
    horizon = 0

    def side(x, c):
        nonlocal horizon
        kind, detail, _ = classify_node(f, x, x, params, c, decay_event=False)
        if kind == K.KIND_INDETERMINATE and detail == K.DETAIL_HORIZON:
            horizon += 1
        return _high(kind)

    if side(lo, cfg):
        raise DichotomyViolationError(f"lower end u0={lo:g} already escapes")
    while not side(hi, cfg):
        if hi >= HI_LIMIT:
            raise NoGroundStateError(f"no escaping height found up to {HI_LIMIT:g}")
        hi *= 10.0
    while hi - lo >= cfg.tol:
        mid = 0.5 * (lo + hi)
        if side(mid, cfg):
            hi = mid
        else:
            lo = mid

    # refine with the tight tolerance so the final run shares its discretisation
    tight = cfg.replace(tol=max(cfg.tol / 100, 1e-14))
    w = max(10 * cfg.tol, 1e-9 * hi)
    a, b = lo - w, hi + w
    for _ in range(60):
        if not side(a, tight):
            break
        a -= w
        w *= 2
    for _ in range(60):
        if side(b, tight):
            break
        b += w
        w *= 2
    while True:
        mid = 0.5 * (a + b)
        if not a < mid < b:
            break
        if side(mid, tight):
            b = mid
        else:
            a = mid

    final = tight.replace(energy_cutoff=False)
    for x in (a, 0.5 * (a + b), b):
        out = integrate(f, x, x, params, final)
        if out.kind is Outcome.DECAY:
            break
    else:
        raise NoGroundStateError(f"bracket [{a!r}, {b!r}] did not yield a decaying trajectory")
    if horizon:
        notes.append(f"{horizon} bisection runs reached r_max={cfg.r_max:g} without escaping; counted as below threshold")
    return float(x), out.profile, tuple(notes)


def solve_scalar(params: Parameters, cfg: ShootingConfig = ShootingConfig()) -> GroundState:
    """Ground-state height and profile for the decoupled equation (b is ignored)."""
    params.require_window()
    p0 = params.with_b(0.0)
    f = make_coupled_power(p0)
    height, profile, notes = shoot_diagonal(f, p0, cfg, lo=1.0)
    return GroundState(height, profile, p0, cfg.tol, notes)
