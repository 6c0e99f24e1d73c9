import json

import numpy as np
import pytest

from oracles import HEIGHTS, soliton, soliton_height
from radial_nls import Parameters, ShootingConfig, make_coupled_power, soliton_1d, solve_scalar
from radial_nls.errors import DichotomyViolationError, ValidationError
from radial_nls.ground_state import GroundState, shoot_diagonal


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0, 4.0])
def test_soliton_closed_form_residual(q):
    s = soliton_1d(q)
    assert s.height == pytest.approx(soliton_height(q), abs=1e-15)
    r = np.linspace(0.01, 10, 2000)
    h = 1e-4
    upp = (s(r + h) - 2 * s(r) + s(r - h)) / h**2
    assert np.max(np.abs(-upp + s(r) - s(r) ** (2 * q - 1))) < 1e-6
    d = (s(r + 1e-6) - s(r - 1e-6)) / 2e-6
    assert np.max(np.abs(d - s.derivative(r))) < 1e-8


def test_soliton_rejects_bad_exponent():
    with pytest.raises(ValidationError):
        soliton_1d(1.0)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0, 4.0])
def test_scalar_matches_soliton(q):
    tol = 1e-10
    g = solve_scalar(Parameters(1, q), ShootingConfig(tol=tol))
    assert g.height == pytest.approx(soliton_height(q), abs=1e-8)
    assert g.height > 1
    m = g.profile.r <= 10
    assert np.max(np.abs(g.profile.u[m] - soliton(q, g.profile.r[m]))) < 100 * tol


@pytest.mark.parametrize("key", sorted(HEIGHTS))
def test_heights_against_independent_shooting(key):
    n, q = key
    g = solve_scalar(Parameters(n, q))
    assert g.height == pytest.approx(HEIGHTS[key], abs=1e-8)


def test_n3_height_by_coarse_grid():
    # brute force: the first escaping height on a 1e-4 grid
    p = Parameters(3, 2.0, 0.0)
    from radial_nls.integrator import classify_node
    from radial_nls import _kernels as K

    f = make_coupled_power(p)
    grid = np.arange(4.30, 4.40, 1e-4)
    esc = [classify_node(f, x, x, p, ShootingConfig(tol=1e-9), decay_event=False)[0] == K.KIND_CROSS for x in grid]
    first = grid[int(np.argmax(esc))]
    assert first - 1e-4 <= solve_scalar(p).height <= first


@pytest.mark.parametrize("n,q", [(1, 2.0), (2, 2.0), (3, 2.0), (2, 3.0)])
def test_profile_properties(n, q):
    g = solve_scalar(Parameters(n, q))
    pr = g.profile
    assert np.all(pr.du[1:] < 0)
    assert np.array_equal(pr.u, pr.v)
    # tail slope of log u with the algebraic factor removed
    sel = (pr.r >= pr.r_end / 2) & (pr.r <= 0.9 * pr.r_end)
    slope = np.polyfit(pr.r[sel], np.log(pr.u[sel]) + 0.5 * (n - 1) * np.log(pr.r[sel]), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.02)


def test_supercritical_rejected():
    with pytest.raises(ValidationError):
        solve_scalar(Parameters(3, 3.5))


def test_dichotomy_violation():
    p = Parameters(1, 2.0, 0.0)
    with pytest.raises(DichotomyViolationError):
        shoot_diagonal(make_coupled_power(p), p, ShootingConfig(), lo=3.0)


def test_files_roundtrip(tmp_path):
    g = solve_scalar(Parameters(2, 2.0))
    side = g.to_files(tmp_path / "gs.csv")
    meta = json.loads(side.read_text())
    assert meta == {"n": 2, "q": 2.0, "height": g.height}
    back = GroundState.from_files(tmp_path / "gs.csv")
    assert back.height == g.height
    assert np.array_equal(back.profile.u, g.profile.u)


def test_scalar_ignores_coupling():
    a = solve_scalar(Parameters(1, 2.0, 0.0))
    b = solve_scalar(Parameters(1, 2.0, 3.0))
    assert a.height == b.height
