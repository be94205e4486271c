import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wspace.grids import GridBox, NestedGrid
from wspace.weights import (ANALYTIC_VERDICTS, CONDITIONS, ConditionReport, WeightFamily,
                            WeightFunction, builtin_family, check_condition, convexity_defect,
                            eval_weight, family_from_spec, is_convex, log_substitute)

KINDS = sorted(ANALYTIC_VERDICTS)


def test_eval_quadratic_member():
    assert eval_weight(builtin_family("quadratic")[1], 1.0) == 4.0


def test_eval_power_member():
    # 2^{3/2 * 2} * 4^{3/2} = 8 * 8
    assert eval_weight(builtin_family("power", p=1.5)[2], 4.0) == pytest.approx(64.0, rel=1e-15)


def test_eval_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_weight(builtin_family("quadratic", n=2)[1], [1.0, 2.0, 3.0])


def test_log_substitute_examples():
    psi = builtin_family("quadratic").psi(1)
    assert psi(0.0) == 4.0
    ident = log_substitute(WeightFunction(lambda x: x[..., 0], 1))
    assert ident(math.log(3.0)) == pytest.approx(3.0, rel=1e-15)


def test_log_substitute_power_is_convex():
    psi = builtin_family("power", p=1.5).psi(2)
    assert is_convex(psi, GridBox(4.0, 1 / 64))


def test_log_substitute_matches_composition():
    rng = np.random.default_rng(7)
    for n in (1, 2):
        w = builtin_family("anisotropic", n=n)[3]
        psi = log_substitute(w)
        t = rng.uniform(-3, 3, size=(1000, n))
        direct = w.evaluator(np.exp(t))
        np.testing.assert_allclose(psi(t), direct, rtol=1e-14)


@pytest.mark.parametrize("kind", KINDS)
@given(x=st.lists(st.floats(-50, 50), min_size=2, max_size=2),
       flips=st.lists(st.booleans(), min_size=2, max_size=2))
def test_radial_members_ignore_signs(kind, x, flips):
    w = builtin_family(kind, n=2)[2]
    y = np.array(x)
    z = np.where(flips, -y, y)
    assert w(y) == w(z)


def test_family_needs_three_members():
    w = builtin_family("quadratic")[1]
    with pytest.raises(ValueError):
        WeightFamily((w, w))


def test_family_mixed_dimensions_rejected():
    with pytest.raises(ValueError):
        WeightFamily((builtin_family("quadratic")[1],) * 2 + (builtin_family("quadratic", n=2)[1],))


def test_min_gaps_finite():
    gaps = builtin_family("power").min_gaps(GridBox(5.0, 0.1))
    assert all(np.isfinite(g) for g in gaps)


def test_family_spec_rejects_unknown_keys():
    with pytest.raises(ValueError):
        family_from_spec({"kind": "quadratic", "colour": "red"})
    assert family_from_spec({"kind": "power", "p": 2}).params["p"] == 2.0


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("cid", CONDITIONS)
def test_verdicts_match_analytic_table(kind, cid):
    fam = builtin_family(kind)
    for m in (1, 3):
        assert check_condition(fam, cid, m).verdict == ANALYTIC_VERDICTS[kind][cid]


def test_quadratic_i3_and_i4_witnesses_vanish():
    fam = builtin_family("quadratic")
    for m in (1, 2, 4):
        assert check_condition(fam, "i3", m).witness == 0.0
    assert check_condition(fam, "i4", 2).witness == 0.0


def test_doubling_i3_trend():
    rep = check_condition(builtin_family("doubling"), "i3", 1)
    # deficit 2^{m+1} x^2 at the box corner
    assert rep.margin_trend == (100.0, 400.0, 1600.0)
    assert rep.verdict == "fail"


def test_a1_even_function_witness_zero():
    rep = check_condition(builtin_family("quadratic"), "A1", 1)
    assert rep.witness == 0.0 and rep.verdict == "pass"


def test_a2_counterexample_fails():
    bump = WeightFunction(lambda x: np.sum(x * x, axis=-1) + 5 * np.exp(-np.sum((x - 1) ** 2, axis=-1)), 1)
    fam = WeightFamily((bump,) * 3)
    assert check_condition(fam, "A2", 1).verdict == "fail"


def test_sigma_must_exceed_one():
    with pytest.raises(ValueError):
        check_condition(builtin_family("quadratic"), "i1", 1, params={"sigma": 1.0})


def test_unknown_condition_and_member_range():
    fam = builtin_family("quadratic", M_max=3)
    with pytest.raises(ValueError):
        check_condition(fam, "i9", 1)
    with pytest.raises(ValueError):
        check_condition(fam, "i3", 3)


def test_check_condition_deterministic_and_round_trips():
    fam = builtin_family("power")
    a = check_condition(fam, "i2", 2)
    b = check_condition(fam, "i2", 2)
    assert a == b
    assert ConditionReport.from_dict(a.to_dict()) == a


@pytest.mark.parametrize("cid", ["i0", "i1", "i2", "i3", "i4"])
@given(extra=st.integers(1, 3))
def test_refinement_never_decreases_witness(cid, extra):
    fam = builtin_family("doubling")
    coarse = NestedGrid((2.0, 4.0), 0.5)
    fine = NestedGrid((2.0, 4.0, 4.0 + extra), 0.25)
    w0 = check_condition(fam, cid, 1, probe=coarse).witness
    w1 = check_condition(fam, cid, 1, probe=fine).witness
    assert w1 >= w0 - 1e-12


def test_convexity_defect_detects_concavity():
    concave = WeightFunction(lambda x: -np.sum(x * x, axis=-1), 2)
    assert convexity_defect(concave, GridBox(2.0, 0.5, 2)) < 0
    assert is_convex(builtin_family("anisotropic", n=2)[1], GridBox(2.0, 0.5, 2))
