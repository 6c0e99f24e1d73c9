"""Search of the initial-value plane (u(0), v(0)) for positive decaying solutions.

Pipeline: classify a grid of initial values by trajectory outcome, pick seed
cells where outcome basins meet, polish each seed with Gauss-Newton on the
tail mismatch, validate hits by a tight re-integration, cluster, and mirror
across the diagonal.  Completeness is limited by the grid resolution.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import ValidationError
from .ground_state import shoot_diagonal
from .integrator import Outcome, ShootingConfig, classify_node, integrate, miss_map
from .model import DecayCertificate, Parameters, RadialProfile, make_coupled_power, residual

WORKERS_ENV = "RADIAL_NLS_WORKERS"

# basin codes
DECAY, CROSS_U, CROSS_V, CROSS_UV, BLOWUP, INDETERMINATE = range(6)
CODE_NAMES = {
    DECAY: "Decay",
    CROSS_U: "ZeroCrossing(u)",
    CROSS_V: "ZeroCrossing(v)",
    CROSS_UV: "ZeroCrossing(uv)",
    BLOWUP: "Blowup",
    INDETERMINATE: "Indeterminate",
}
_MIRROR = np.array([DECAY, CROSS_V, CROSS_U, CROSS_UV, BLOWUP, INDETERMINATE], dtype=np.int8)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            w = int(env)
        except ValueError:
            raise ValidationError(f"{WORKERS_ENV} must be an integer, got {env!r}")
        if w < 1:
            raise ValidationError(f"{WORKERS_ENV} must be positive")
        return w
    return os.cpu_count() or 1


@dataclass(frozen=True)
class CensusConfig:
    grid_tol: float = 1e-8
    newton_tol: float = 1e-12
    final_tol: float = 1e-12
    r_probe: Optional[float] = None
    probe_schedule: tuple = (2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    cluster_radius: float = 1e-3
    residual_gate: float = 1e-5
    max_seeds: int = 400
    chain_min: int = 10
    certificate: DecayCertificate = DecayCertificate()

    def __post_init__(self):
        if self.r_probe is None:
            object.__setattr__(self, "r_probe", 15.0 / math.sqrt(self.certificate.m))
        if not (self.grid_tol > 0 and self.newton_tol > 0 and self.final_tol > 0):
            raise ValidationError("tolerances must be positive")
        if not self.cluster_radius > 0:
            raise ValidationError("cluster_radius must be positive")


@dataclass(frozen=True)
class CensusHit:
    u0: float
    v0: float
    profile: RadialProfile
    residual: float
    source: str

    def swapped(self) -> "CensusHit":
        return CensusHit(self.v0, self.u0, self.profile.swap(), self.residual, self.source + "+mirror")

    def to_dict(self) -> dict:
        return {"u0": self.u0, "v0": self.v0, "residual": self.residual, "source": self.source}


@dataclass(frozen=True)
class CensusResult:
    params: Parameters
    solutions: tuple
    degenerate: bool
    search_box: tuple
    resolution: tuple
    basin: np.ndarray
    chain: tuple = ()
    seeds: int = 0
    notes: tuple = field(default_factory=tuple)

    def initial_values(self):
        return [(h.u0, h.v0) for h in self.solutions]

    def asymmetric(self, tol: float = 1e-8):
        return [h for h in self.solutions if abs(h.u0 - h.v0) > tol]

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "solutions": [h.to_dict() for h in self.solutions],
            "count": len(self.solutions),
            "degenerate": self.degenerate,
            "chain": [list(p) for p in self.chain],
            "search_box": [list(self.search_box[0]), list(self.search_box[1])],
            "resolution": list(self.resolution),
            "basin_shape": list(self.basin.shape),
            "basin_codes": {str(k): v for k, v in CODE_NAMES.items()},
            "seeds": self.seeds,
            "notes": list(self.notes),
        }

    def to_json(self, path=None) -> str:
        s = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s + "\n")
        return s

    def basin_to_csv(self, path):
        """One outcome code per node; row i is u0 index i, column j is v0 index j."""
        np.savetxt(path, self.basin, fmt="%d", delimiter=",")


# ---------------------------------------------------------------------------


def _node_code(f, u0, v0, params, cfg) -> int:
    kind, detail, _ = classify_node(f, u0, v0, params, cfg)
    if kind == K.KIND_DECAY:
        return DECAY
    if kind == K.KIND_CROSS:
        return detail  # DETAIL_U/V/BOTH coincide with CROSS_U/V/UV
    if kind == K.KIND_BLOWUP:
        return BLOWUP
    return INDETERMINATE


def grid_axes(box, dims):
    (ua, ub), (va, vb) = box
    nu, nv = dims
    us = ua + (np.arange(nu) + 0.5) * (ub - ua) / nu
    vs = va + (np.arange(nv) + 0.5) * (vb - va) / nv
    return us, vs


def classify_grid(params: Parameters, box, dims, cfg: CensusConfig = CensusConfig(),
                  workers: Optional[int] = None) -> np.ndarray:
    """Outcome code per grid node; basin[i, j] belongs to (us[i], vs[j])."""
    f = make_coupled_power(params)
    us, vs = grid_axes(box, dims)
    scfg = ShootingConfig(tol=cfg.grid_tol, r_max=cfg.r_probe, certificate=cfg.certificate)
    mirror = box[0] == box[1] and dims[0] == dims[1]
    nodes = [(i, j) for i in range(dims[0]) for j in range(dims[1]) if not mirror or i >= j]
    workers = default_workers() if workers is None else workers

    def run(chunk):
        return [_node_code(f, us[i], vs[j], params, scfg) for i, j in chunk]

    size = max(1, len(nodes) // (8 * workers) + 1)
    chunks = [nodes[k:k + size] for k in range(0, len(nodes), size)]
    basin = np.full(dims, -1, dtype=np.int8)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        # map preserves submission order, so the result is worker-count independent
        for chunk, codes in zip(chunks, ex.map(run, chunks)):
            for (i, j), c in zip(chunk, codes):
                basin[i, j] = c
    if mirror:
        lower = np.tril_indices(dims[0], -1)
        basin[lower[1], lower[0]] = _MIRROR[basin[lower]]
    return basin


def basin_boundaries(basin: np.ndarray) -> np.ndarray:
    """Cells with a crossing/non-crossing change among their 4-neighbours."""
    crossing = np.isin(basin, (CROSS_U, CROSS_V, CROSS_UV))
    edge = np.zeros_like(crossing)
    edge[1:, :] |= crossing[1:, :] != crossing[:-1, :]
    edge[:-1, :] |= crossing[1:, :] != crossing[:-1, :]
    edge[:, 1:] |= crossing[:, 1:] != crossing[:, :-1]
    edge[:, :-1] |= crossing[:, 1:] != crossing[:, :-1]
    return edge


def _neighbourhood_has(mask: np.ndarray) -> np.ndarray:
    p = np.pad(mask, 1)
    out = np.zeros_like(mask)
    for di in range(3):
        for dj in range(3):
            out |= p[di:di + mask.shape[0], dj:dj + mask.shape[1]]
    return out


def seed_cells(basin: np.ndarray, max_seeds: int, upper_only: bool):
    """Junctions of u-crossing, v-crossing and non-crossing basins, plus decay
    cells; all crossing/non-crossing boundary cells when no junction exists."""
    nonc = ~np.isin(basin, (CROSS_U, CROSS_V, CROSS_UV))
    junction = (
        _neighbourhood_has(basin == CROSS_U)
        & _neighbourhood_has(basin == CROSS_V)
        & _neighbourhood_has(nonc)
    ) | (basin == DECAY)
    cand = junction if junction.any() else basin_boundaries(basin)
    if upper_only:
        cand &= np.tri(*basin.shape, dtype=bool)  # i >= j, i.e. u0 >= v0
    idx = np.argwhere(cand)
    if len(idx) > max_seeds:
        idx = idx[np.linspace(0, len(idx) - 1, max_seeds).round().astype(int)]
    return [tuple(x) for x in idx], bool(junction.any())


# ---------------------------------------------------------------------------
# polishing


def newton_polish(f, params: Parameters, x0, cfg: CensusConfig, schedule=None):
    """Damped Gauss-Newton on the tail mismatch with continuation in the probe radius.

    Returns (x, converged, jacobian at the final probe radius).
    """
    x = np.array(x0, dtype=float)
    schedule = cfg.probe_schedule if schedule is None else schedule
    J = None
    for rm in schedule:
        M, J, _ = miss_map(f, x[0], x[1], params, rm, cfg.newton_tol)
        nM = np.linalg.norm(M)
        done = False
        for _ in range(40):
            # min-norm step, so a rank-deficient Jacobian is harmless
            step = np.linalg.lstsq(J, -M, rcond=1e-9)[0]
            size = np.linalg.norm(step)
            if size <= 1e-13 * (1 + np.linalg.norm(x)):
                done = True
                break
            lam, accepted = 1.0, False
            while lam >= 1.0 / 1024:
                xn = x + lam * step
                if np.all(xn > 0):
                    Mn, Jn, _ = miss_map(f, xn[0], xn[1], params, rm, cfg.newton_tol)
                    if np.linalg.norm(Mn) < nM:
                        accepted = True
                        break
                lam *= 0.5
            if not accepted:
                # no further decrease: accept only at the noise floor
                done = size <= 1e-9 * (1 + np.linalg.norm(x))
                break
            x, M, J, nM = xn, Mn, Jn, np.linalg.norm(Mn)
        if not done:
            return x, False, J
    return x, True, J


def validate(f, params: Parameters, x, cfg: CensusConfig) -> Optional[CensusHit]:
    scfg = ShootingConfig(tol=cfg.final_tol, energy_cutoff=False, certificate=cfg.certificate)
    out = integrate(f, float(x[0]), float(x[1]), params, scfg)
    if out.kind is not Outcome.DECAY or len(out.profile) < 4:
        return None
    res = residual(f, out.profile)
    if not res < cfg.residual_gate:
        return None
    return CensusHit(float(x[0]), float(x[1]), out.profile, res, "newton")


def symmetric_slice(params: Parameters, cfg: ShootingConfig = ShootingConfig(), hi: float = 10.0,
                    samples: int = 64):
    """Heights u0 with (u0, u0) decaying.

    On the diagonal the system reduces to -u'' - (n-1)/r u' + u = (1+b) u^(2q-1).
    The diagonal is scanned from the nontrivial equilibrium upward and every
    change from non-escaping to escaping is bisected.
    """
    params.require_window()
    if not params.b > -1:
        raise ValidationError("the diagonal reduction needs b > -1")
    f = make_coupled_power(params)
    lo = (1 + params.b) ** (-1.0 / (2 * params.q - 2))
    xs = np.linspace(lo, hi, samples)
    esc = [classify_node(f, x, x, params, cfg)[0] in (K.KIND_CROSS, K.KIND_BLOWUP) for x in xs]
    heights = []
    for a, b, ea, eb in zip(xs[:-1], xs[1:], esc[:-1], esc[1:]):
        if not ea and eb:
            h, _, _ = shoot_diagonal(f, params, cfg, a, b)
            heights.append(h)
    if not any(esc):
        h, _, _ = shoot_diagonal(f, params, cfg, xs[-1], 10 * hi)
        heights.append(h)
    return heights


def _cluster(hits, radius):
    kept = []
    for h in hits:
        if all(math.hypot(h.u0 - k.u0, h.v0 - k.v0) > radius for k in kept):
            kept.append(h)
    return kept


def _walk_chain(f, params, start, J, cfg: CensusConfig, max_len: int = 12):
    """Follow a curve of solutions from ``start`` along the weakest Jacobian direction."""
    _, _, vt = np.linalg.svd(J)
    t = vt[-1]
    final = (cfg.probe_schedule[-1],)
    step = 0.5 * cfg.cluster_radius
    chain = [np.array(start, dtype=float)]
    origin = chain[0]
    for sign in (1.0, -1.0):
        x, d = origin, sign * t
        pts = []
        for _ in range(max_len):
            y, ok, Jy = newton_polish(f, params, x + step * d, cfg, final)
            if not ok:
                break
            moved = np.linalg.norm(y - x)
            if not (0.25 * step < moved < cfg.cluster_radius):
                break
            if validate(f, params, y, cfg) is None:
                break
            d = (y - x) / moved
            x = y
            pts.append(y)
        chain = chain + pts if sign > 0 else pts[::-1] + chain
    return chain


def census(params: Parameters, cfg: CensusConfig = CensusConfig(), box=((0.0, 2.0), (0.0, 2.0)),
           dims=(256, 256), workers: Optional[int] = None) -> CensusResult:
    params.require_window()
    if dims[0] < 32 or dims[1] < 32:
        raise ValidationError("grid must be at least 32 x 32")
    (ua, ub), (va, vb) = box
    if not (0 <= ua < ub and 0 <= va < vb):
        raise ValidationError("box must be a nonempty rectangle in the positive quadrant")
    f = make_coupled_power(params)
    notes = ["completeness is limited by the grid resolution"]
    n, q, b = params.n, params.q, params.b
    if n >= 2 and q > 2 and b <= q - 1:
        notes.append("exploratory: uniqueness in this parameter range is open")

    basin = classify_grid(params, box, dims, cfg, workers)
    mirror = box[0] == box[1] and dims[0] == dims[1]
    us, vs = grid_axes(box, dims)

    hits = []
    diag_cfg = ShootingConfig(tol=cfg.newton_tol, certificate=cfg.certificate)
    for h in symmetric_slice(params, diag_cfg, hi=max(ub, vb)):
        if ua <= h <= ub and va <= h <= vb:
            hit = validate(f, params, (h, h), cfg)
            if hit is not None:
                hits.append(CensusHit(h, h, hit.profile, hit.residual, "diagonal"))

    seeds, junction = seed_cells(basin, cfg.max_seeds, mirror)
    if not junction:
        notes.append("no basin junctions found; seeded from all basin boundaries")
    spacing = max((ub - ua) / dims[0], (vb - va) / dims[1])
    jacobians = {}
    for i, j in seeds:
        x0 = (us[i], vs[j])
        if any(math.hypot(x0[0] - h.u0, x0[1] - h.v0) < 2 * spacing for h in hits):
            continue
        x, ok, J = newton_polish(f, params, x0, cfg)
        if not ok:
            continue
        if mirror and x[1] > x[0]:
            x = x[::-1]
        if abs(x[0] - x[1]) < cfg.cluster_radius:
            continue  # diagonal solutions come from the slice
        if not (ua <= x[0] <= ub and va <= x[1] <= vb):
            continue
        if any(math.hypot(x[0] - h.u0, x[1] - h.v0) <= cfg.cluster_radius for h in hits):
            continue
        hit = validate(f, params, x, cfg)
        if hit is not None:
            hits.append(hit)
            jacobians[len(hits) - 1] = J

    hits = _cluster(hits, cfg.cluster_radius)

    # degeneracy: try to walk along a curve of solutions from each hit
    chain = ()
    for k, h in enumerate(hits):
        _, ok, J = newton_polish(f, params, (h.u0, h.v0), cfg, (cfg.probe_schedule[-1],))
        if not ok:
            continue
        c = _walk_chain(f, params, (h.u0, h.v0), J, cfg)
        if len(c) >= cfg.chain_min:
            chain = tuple(tuple(map(float, p)) for p in c)
            break
    degenerate = len(chain) >= cfg.chain_min
    if degenerate:
        notes.append("solutions form a continuum; listed hits are isolated samples of it")

    if mirror:
        full = []
        for h in hits:
            full.append(h)
            if abs(h.u0 - h.v0) > 0:
                full.append(h.swapped())
        hits = full
    hits.sort(key=lambda h: (h.u0, h.v0))
    return CensusResult(params, tuple(hits), degenerate, ((ua, ub), (va, vb)), tuple(dims), basin,
                        chain, len(seeds), tuple(notes))
