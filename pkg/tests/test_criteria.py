import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import KB_Q4_B5, MUB_Q4_B5
from radial_nls import Parameters, Regime, analyze_psi, classify, find_kb, make_coupled_power, psi
from radial_nls.criteria import (
    SignClass,
    SignCondition,
    check_A2,
    check_A4,
    check_QS,
    check_sign_conditions,
    fit_certificate,
    mu_from_k,
    table_regime,
    split_defect,
)
from radial_nls.errors import RegimeError, UnsupportedCouplingError, ValidationError
from radial_nls.model import DecayCertificate, black_box


def test_psi_domain():
    with pytest.raises(ValidationError):
        psi(0.0, Parameters(1, 2.0, 1.0))
    with pytest.raises(ValidationError):
        psi(1.5, Parameters(1, 2.0, 1.0))
    assert psi(1.0, Parameters(1, 3.0, 2.0)) == 0.0


@settings(max_examples=200, deadline=None)
@given(k=st.floats(1e-6, 1.0), b=st.floats(0.01, 10.0))
def test_psi_q2_factorises(k, b):
    assert abs(psi(k, Parameters(1, 2.0, b)) - (1 - b) * (1 - k * k)) < 1e-14


def test_kb_closed_form():
    p = Parameters(1, 4.0, 5.0)
    kb = find_kb(p)
    assert abs(kb - KB_Q4_B5) < 1e-10
    assert abs(mu_from_k(kb, p) - MUB_Q4_B5) < 1e-10
    assert abs(psi(kb, p)) < 1e-12


def test_kb_absent_in_uniqueness_regime():
    with pytest.raises(RegimeError):
        find_kb(Parameters(1, 3.0, 1.0))


@pytest.mark.parametrize(
    "q,b,cls",
    [
        (1.5, 1.0, SignClass.NEGATIVE),
        (2.0, 2.0, SignClass.NEGATIVE),
        (2.0, 0.5, SignClass.POSITIVE),
        (3.0, 2.0, SignClass.POSITIVE),
        (2.0, 1.0, SignClass.ZERO),
        (4.0, 5.0, SignClass.MIXED),
        (1.5, 0.2, SignClass.MIXED),
    ],
)
def test_psi_sign_classes(q, b, cls):
    assert analyze_psi(Parameters(1, q, b)).sign_on_01 is cls


@pytest.mark.parametrize("q,b", [(2.5, 2.0), (3.0, 2.5), (1.5, 0.3), (1.75, 0.6)])
def test_interior_root_matches_brute_force(q, b):
    p = Parameters(1, q, b)
    kb = find_kb(p)
    k = np.linspace(1e-4, 1 - 1e-9, 200_001)
    vals = np.array([psi(x, p) for x in k[::50]])
    flips = np.flatnonzero(np.diff(np.sign(vals)) != 0)
    assert flips.size == 1
    lo, hi = k[::50][flips[0]], k[::50][flips[0] + 1]
    assert lo <= kb <= hi


_SIGN_OF_CLASS = {
    SignClass.NEGATIVE: SignCondition.A3,
    SignClass.POSITIVE: SignCondition.A3PRIME,
    SignClass.ZERO: SignCondition.NEITHER,
    SignClass.MIXED: SignCondition.NEITHER,
}


@pytest.mark.parametrize("q,b", [(1.5, 1.0), (2.0, 3.0), (2.0, 0.5), (3.0, 1.5), (2.0, 1.0), (4.0, 5.0), (2.5, 0.8)])
def test_sampled_sign_agrees_with_psi(q, b):
    p = Parameters(1, q, b)
    f = make_coupled_power(p)
    assert check_sign_conditions(f, np.random.default_rng(3)) is _SIGN_OF_CLASS[analyze_psi(p).sign_on_01]


def test_decay_certificate():
    f = make_coupled_power(Parameters(1, 2.0, 1.0))
    assert check_A2(f, DecayCertificate(0.5, 1.0, 0.1))
    assert not check_A2(f, DecayCertificate(0.5, 1.0, 2.0))
    cert = fit_certificate(f)
    assert cert is not None and cert.m == 0.5


def test_quittner_souplet_and_split():
    # (z1 - z2)(f(z1,z2) - f(z2,z1)) = -2 (z1 - z2)^2 for f = -z1 + z2
    assert check_QS(black_box(lambda r, a, b: -a + b))
    assert not check_QS(black_box(lambda r, a, b: a**3))
    # coupled power at q = 2: the difference is (z1 - z2)^2 ((z1 - z2)^2 - 1), positive for wide pairs
    assert not check_QS(make_coupled_power(Parameters(1, 2.0, 2.0)))
    f = make_coupled_power(Parameters(1, 3.0, 1.0))
    assert split_defect(f) < 1e-10
    assert check_A4(f, 1)
    assert not check_A4(f, 2)


def test_qs_needs_autonomous_f():
    f = black_box(lambda r, a, b: -a + a**3 + np.asarray(r) * 0.1 * b)
    with pytest.raises(ValidationError):
        check_QS(f)


def test_case_table_boundaries():
    assert table_regime(Parameters(1, 1.5, 0.5)) is Regime.THM1  # b = q - 1 tie
    assert table_regime(Parameters(1, 3.0, 2.0)) is Regime.THM2  # b = q - 1 tie
    assert table_regime(Parameters(1, 3.0, 2.0000001)) is Regime.MULTIPLE
    assert table_regime(Parameters(2, 2.0, 1.0)) is Regime.UNDETERMINED


def test_classify_report_fields():
    rep = classify(Parameters(1, 4.0, 5.0))
    d = rep.to_dict()
    assert d["regime"] == "MultipleKnown"
    assert d["k_b"] == pytest.approx(0.5176381, abs=1e-7)
    assert set(d["assumptions"]) == {"A1", "A2", "A3", "A3p", "A4", "QS"}
    assert rep.to_json() == classify(Parameters(1, 4.0, 5.0)).to_json()


def test_classify_n3():
    assert classify(Parameters(3, 2.0, 2.0)).regime is Regime.THM1


def test_classify_supercritical_notes():
    rep = classify(Parameters(3, 3.5, 1.0))
    assert rep.regime is Regime.UNDETERMINED
    assert any("critical" in n for n in rep.notes)


def test_classify_rejects_nonpositive_b():
    with pytest.raises(UnsupportedCouplingError):
        classify(Parameters(1, 2.0, 0.0))


def test_classify_near_q_minus_one_small_root():
    # psi changes sign extremely close to 0 here; flagged rather than crashing
    rep = classify(Parameters(1, 1.25, 0.2499))
    assert rep.regime is Regime.MULTIPLE
