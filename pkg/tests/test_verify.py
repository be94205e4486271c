import json

import pytest

from wspace.verify import (CLAIMS, Caps, VerificationReport, run_batch, run_claim, summary_rows,
                           verify_p12, verify_t1, verify_t2, verify_t3, verify_t4)
from wspace.weights import builtin_family
from wspace.zoo import THEOREM_MEMBERS, exact_fourier, from_id, gaussian, zero

QUAD = {"kind": "quadratic"}


def test_t1_gaussian_supported():
    rep = verify_t1(gaussian(1.0), builtin_family("quadratic"))
    assert rep.verdict == "supported" and rep.agreement
    labels = [e["label"] for e in rep.evidence[1:]]
    assert "p[nu=1,k=10]" in labels and "R[nu=1,m=10]" in labels
    assert rep.margins["nu_premise"] == 1 and rep.margins["nu_conclusion"] == 1


def test_supported_cites_only_interior_stable_estimates():
    for rep in run_batch(CLAIMS, ["gaussian:a=1"], QUAD):
        assert rep.verdict == "supported"
        cited = [e for e in rep.evidence if "values" in e and e["finite"]]
        assert cited
        for e in cited:
            assert not e["estimate"]["boundary_attained"]
            assert len(set(e["values"])) == 1


@pytest.mark.parametrize("verify", [verify_t1, verify_t2, verify_p12, verify_t3, verify_t4])
def test_zero_is_trivially_supported(verify):
    rep = verify(zero(), builtin_family("quadratic"))
    assert rep.verdict == "supported"
    assert all(v == 0.0 for e in rep.evidence if "values" in e for v in e["values"])


@pytest.mark.parametrize("claim", ["T1", "T2", "P1", "T3", "T4"])
def test_constant_premise_fails(claim):
    rep = run_claim(claim, "constant:c=1", QUAD)
    assert rep.verdict == "inconclusive-premise"
    if claim != "T3":
        assert rep.agreement is True


def test_p12_ratio_matches_closed_form():
    rep = verify_p12(gaussian(1.0), builtin_family("quadratic"))
    assert rep.claim == "P1"
    # at k = 0 the ratio is h / p = e^{-4}
    assert rep.margins["ratio_h_over_p_min"] == pytest.approx(0.01831563888873418, rel=1e-9)


def test_t2_with_doubling_family_records_hypotheses():
    rep = verify_t2(gaussian(1.0), builtin_family("doubling"))
    hyp = {(h["condition_id"], h["m"]): h["verdict"] for h in rep.evidence[0]["entries"]}
    assert hyp[("i1", 1)] == "pass" and hyp[("i2", 1)] == "pass"
    assert rep.verdict == "supported"


def test_hypothesis_gating():
    # doubling fails i3, which T3 and T4 need
    for claim in ("T3", "T4"):
        rep = run_claim(claim, "gaussian:a=1", {"kind": "doubling"})
        assert rep.verdict == "inconclusive-hypothesis"
    rep = run_claim("T1", "gaussian:a=1", {"kind": "linear"})
    assert rep.verdict == "inconclusive-hypothesis"


def test_t3_fourier_checks():
    rep = verify_t3(gaussian(1.0), builtin_family("quadratic"))
    assert rep.verdict == "supported"
    assert rep.margins["roundtrip_error"] <= 1e-6
    assert rep.margins["linearity_residual"] <= 1e-12
    assert rep.margins["exact_vs_quadrature"] <= 1e-8


def test_t4_closed_form_values():
    rep = verify_t4(exact_fourier(gaussian(1.0)), builtin_family("quadratic"))
    assert rep.verdict == "supported"
    g0 = next(e for e in rep.evidence if e.get("label") == "G[nu=1,m=0]")
    q0 = next(e for e in rep.evidence if e.get("label") == "GS[nu=1,m=0]")
    assert g0["values"][0] == pytest.approx(1.7724538509055159, rel=1e-12)
    assert q0["values"][0] == pytest.approx(1.7724538509055159, rel=1e-12)


def test_t4_slow_decay_rejected_by_both_sides():
    rep = run_claim("T4", "gaussian:a=1/32", QUAD, {"nu_max": 1}, direct=True)
    assert rep.verdict == "inconclusive-premise" and rep.agreement is True


@pytest.mark.parametrize("fid", THEOREM_MEMBERS + ("constant:c=1", "zero"))
def test_agreement_property(fid):
    for rep in run_batch(["T1", "T2", "P1", "T4"], [fid], QUAD):
        assert rep.agreement is True


def test_report_round_trip_and_determinism():
    a = run_claim("T1", "moment:k=1,a=1", QUAD)
    b = run_claim("T1", "moment:k=1,a=1", QUAD)
    assert a.to_json() == b.to_json()
    back = VerificationReport.from_dict(json.loads(a.to_json()))
    assert back == a


def test_escalation_note_recorded():
    rep = run_claim("T1", "gaussian:a=2", QUAD)
    assert "heuristic" in rep.inputs["escalation"]
    assert rep.inputs["nu_range"] == [1, 5]


def test_batch_sorted_and_parallel_identical():
    serial = run_batch(["T4", "T1"], ["moment:k=1,a=1", "gaussian:a=1"], QUAD)
    assert [(r.claim, r.inputs.get("subject_of", r.function)) for r in serial] == [
        ("T1", "gaussian:a=1"), ("T1", "moment:k=1,a=1"),
        ("T4", "gaussian:a=1"), ("T4", "moment:k=1,a=1")]
    parallel = run_batch(["T1", "T4"], ["gaussian:a=1", "moment:k=1,a=1"], QUAD, workers=2)
    assert [r.to_json() for r in parallel] == [r.to_json() for r in serial]
    rows = summary_rows(serial)
    assert [r["claim"] for r in rows] == ["T1", "T1", "T4", "T4"]


def test_caps_validation():
    with pytest.raises(ValueError):
        Caps.from_dict({"bogus": 1})
    assert Caps.from_dict({"real_boxes": [1, 2, 4]}).real_boxes == (1.0, 2.0, 4.0)
    with pytest.raises(ValueError):
        run_claim("T9", "gaussian:a=1", QUAD)


def test_two_dimensional_member():
    rep = run_claim("T1", "anisotropic:a1=1,a2=2", {"kind": "quadratic", "n": 2})
    assert rep.verdict == "supported"
