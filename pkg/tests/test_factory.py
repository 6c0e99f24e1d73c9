import math
import warnings

import numpy as np
import pytest

from oracles import KB_Q4_B5, MAZHAO_EXAMPLE, MAZHAO_EXAMPLE_BETA, MAZHAO_EXAMPLE_RATIO
from radial_nls import (
    MaZhaoParams,
    Parameters,
    analyze_psi,
    make_coupled_power,
    make_mazhao_solution,
    make_mazhao_system,
    make_symmetric,
    make_theta_family,
    make_triple,
    mazhao_beta,
    mazhao_ratio,
    mazhao_scale,
    mazhao_unscale,
    residual,
    solve_scalar,
)
from radial_nls.errors import InconsistentParametersError, PositivityViolationError, RegimeError, ValidationError
from radial_nls.factory import reduced_system, symmetric_scale


@pytest.mark.parametrize("q,b", [(2.0, 2.0), (1.5, 0.7), (3.0, 1.0)])
def test_symmetric_solution(q, b):
    g = solve_scalar(Parameters(1, q))
    s = make_symmetric(g, b)
    assert s.u[0] == pytest.approx((1 + b) ** (-1 / (2 * q - 2)) * g.height)
    assert residual(make_coupled_power(Parameters(1, q, b)), s) < 1e-6


def test_symmetric_scale_domain():
    with pytest.raises(ValidationError):
        symmetric_scale(2.0, -1.0)


def test_triple(ground_q4):
    p = Parameters(1, 4.0, 5.0)
    t = make_triple(ground_q4, analyze_psi(p))
    assert t.k_b == pytest.approx(KB_Q4_B5, abs=1e-12)
    assert max(t.residuals) < 1e-6
    # the unscaled pair is not a solution once b > 0
    assert t.literal_residual > 1.0
    iv = t.initial_values()
    assert iv[1] == pytest.approx(iv[2][::-1])
    assert iv[1][1] / iv[1][0] == pytest.approx(KB_Q4_B5)
    assert t.separation > 0.1


def test_triple_in_two_dimensions():
    g = solve_scalar(Parameters(2, 4.0))
    t = make_triple(g, analyze_psi(Parameters(2, 4.0, 5.0)))
    assert max(t.residuals) < 1e-5


def test_triple_absent():
    g = solve_scalar(Parameters(1, 3.0))
    with pytest.raises(RegimeError):
        make_triple(g, analyze_psi(Parameters(1, 3.0, 1.0)))


@pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 4, 3 * math.pi / 8, 0.1])
def test_theta_family(ground_q2, theta):
    s = make_theta_family(ground_q2, theta)
    assert residual(make_coupled_power(Parameters(1, 2.0, 1.0)), s) < 1e-6


def test_theta_family_restrictions(ground_q2, ground_q4):
    with pytest.raises(RegimeError):
        make_theta_family(ground_q4, 0.3)
    with pytest.raises(RegimeError):
        make_theta_family(ground_q2, 0.3, b=2.0)
    with pytest.raises(ValidationError):
        make_theta_family(ground_q2, 0.0)
    with pytest.warns(UserWarning):
        make_theta_family(ground_q2, 1e-4)


def test_mazhao_example():
    p = MaZhaoParams(**MAZHAO_EXAMPLE)
    assert mazhao_beta(p) == pytest.approx(MAZHAO_EXAMPLE_BETA, rel=1e-15)
    assert abs(mazhao_ratio(p) - MAZHAO_EXAMPLE_RATIO) < 1e-12
    assert mazhao_ratio(MaZhaoParams(-1, -1, 2, 2, 2)) == 1.0


def test_mazhao_validation():
    with pytest.raises(InconsistentParametersError):
        MaZhaoParams(-1, -2, 4, 4, 2)
    with pytest.raises(ValidationError):
        MaZhaoParams(1, -2, 4, 2, 2)
    with pytest.raises(PositivityViolationError):
        MaZhaoParams(-4, -4, 1, 1, 2)


def test_mazhao_ratio_identity():
    # under the invariant the ratio collapses to (|mu2|/|mu1|)^(1/(2q-2))
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 200:
        q = rng.uniform(1.2, 4.0)
        mu1, b1, b2 = -rng.uniform(0.1, 3), rng.uniform(0.2, 4), rng.uniform(0.2, 4)
        mu2 = mu1 * (b1 / b2) ** (q - 1)
        try:
            p = MaZhaoParams(mu1, mu2, b1, b2, q)
        except ValidationError:
            continue
        assert mazhao_ratio(p) == pytest.approx((abs(mu2) / abs(mu1)) ** (1 / (2 * q - 2)), rel=1e-12)
        assert mazhao_beta(p) == pytest.approx(mazhao_beta(p.swapped()), rel=1e-12)
        checked += 1


def test_mazhao_scaling_maps_systems():
    p = MaZhaoParams(**MAZHAO_EXAMPLE)
    f1, f2 = make_mazhao_system(p)
    g = reduced_system(p)
    rng = np.random.default_rng(5)
    u, v = rng.uniform(0.1, 2, (2, 100))
    U, V = mazhao_scale(u, v, p)
    a = (abs(p.mu1) ** (1 / (2 * p.q - 2)))
    assert np.allclose(a * f1(0.0, u, v), g(0.0, U, V), rtol=1e-12)


def test_mazhao_solution_and_ratio(ground_q2, tmp_path):
    p = MaZhaoParams(**MAZHAO_EXAMPLE)
    s = make_mazhao_solution(ground_q2, p)
    f1, f2 = make_mazhao_system(p)
    assert residual(f1, s, second=f2, n=1) < 1e-6
    assert s.u[0] / s.v[0] == pytest.approx(mazhao_ratio(p), rel=1e-12)
    p.save(tmp_path / "mz.json")
    assert MaZhaoParams.load(tmp_path / "mz.json") == p


def test_positivity_is_beta_above_one():
    # at q = 2 both positivity conditions reduce to beta > 1
    with pytest.raises(PositivityViolationError):
        MaZhaoParams(-1, -1, 0.5, 0.5, 2)
    with pytest.raises(PositivityViolationError):
        MaZhaoParams(-1, -1, 1.0, 1.0, 2)
    assert mazhao_beta(MaZhaoParams(-1, -1, 1.01, 1.01, 2)) > 1


def test_mazhao_profile_roundtrip(ground_q2):
    p = MaZhaoParams(**MAZHAO_EXAMPLE)
    pr = ground_q2.profile
    back = mazhao_unscale(mazhao_scale(pr, None, p), None, p)
    assert np.max(np.abs(back.u - pr.u)) < 1e-14 and np.max(np.abs(back.v - pr.v)) < 1e-14
