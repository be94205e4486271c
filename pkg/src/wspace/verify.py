"""Desk-scale numerical evidence for the membership and Fourier-image theorems.

Each ``verify_*`` function computes both sides of one claim on nested probe
boxes and returns a :class:`VerificationReport`.  Membership of a function in a
union over ``nu`` is decided by scanning ``nu = caps.nu, ..., caps.nu_max`` and
taking the least index whose estimates are interior and stable; this scan is a
heuristic and is recorded as such in every report.

Verdicts:

``supported``                both sides accept (finite evidence) and hypotheses hold
``refuted``                  an equivalence has one side accepting and the other rejecting
``inconclusive``             the conclusion did not stabilise
``inconclusive-premise``     the premise fails; ``agreement`` tells whether both sides reject
``inconclusive-hypothesis``  a required family condition failed its check
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import __version__
from .conjugate import ConjugateTable, psi_star_table
from .fourier import QuadratureTransform, auto_spec, fourier_transform, inverse_transform
from .grids import GridBox
from .seminorms import (ComplexProbe, SeminormEstimate, finite_evidence, g_norm, gs_seminorm,
                        h_seminorm, p_seminorm, phi_star_on_probe, psi_biconjugate, r_seminorm)
from .weights import (FAIL, PASS, WeightFamily, check_condition, convexity_defect,
                      family_from_spec)
from .zoo import EntireTestFunction, exact_fourier, from_id, gaussian, moment

SUPPORTED = "supported"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"
PREMISE = "inconclusive-premise"
HYPOTHESIS = "inconclusive-hypothesis"

CLAIMS = ("T1", "T2", "P1", "P2", "T3", "T4")

ESCALATION_NOTE = ("nu' is the least index in [nu, nu_max] whose estimates stabilise; "
                   "the scan range is a heuristic, not a quantity from the theorems")


@dataclass(frozen=True)
class Caps:
    """Probe sizes and truncation caps for one verification run."""

    nu: int = 1
    nu_max: int | None = None
    k_max: int = 10
    m_max: int = 10
    g_m_max: int = 6
    alpha_max: int = 40
    beta_max: int = 40
    complex_boxes: tuple[float, ...] = (4.0, 8.0, 12.0)
    complex_step: float = 0.04
    real_boxes: tuple[float, ...] = (8.0, 16.0, 32.0)
    real_step: float = 0.02
    roundtrip_tol: float = 1e-6
    linearity_tol: float = 1e-12
    exact_tol: float = 1e-8

    def resolved_nu_max(self, fam: WeightFamily) -> int:
        top = fam.M_max - 1
        return min(top, self.nu_max) if self.nu_max is not None else top

    def complex_probes(self, n: int) -> list[ComplexProbe]:
        return [ComplexProbe.square(b, self.complex_step, n) for b in self.complex_boxes]

    def real_probes(self, n: int) -> list[GridBox]:
        return [GridBox(b, self.real_step, n) for b in self.real_boxes]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["complex_boxes"] = list(self.complex_boxes)
        d["real_boxes"] = list(self.real_boxes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Caps":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown caps keys {sorted(unknown)}")
        d = dict(d)
        for key in ("complex_boxes", "real_boxes"):
            if key in d:
                d[key] = tuple(float(v) for v in d[key])
        return cls(**d)

    @classmethod
    def for_dimension(cls, n: int, **overrides) -> "Caps":
        """Coarser grids and lower caps in two or more dimensions."""
        if n == 1:
            return cls(**overrides)
        base = dict(k_max=4, m_max=4, g_m_max=2, alpha_max=12, beta_max=12,
                    complex_boxes=(2.0, 4.0, 6.0), complex_step=0.25,
                    real_boxes=(4.0, 8.0, 16.0), real_step=0.25)
        base.update(overrides)
        return cls(**base)


@dataclass
class VerificationReport:
    claim: str
    function: str
    family: dict
    inputs: dict
    evidence: list
    verdict: str
    margins: dict
    agreement: bool | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": "verification", **asdict(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        d = {k: v for k, v in d.items() if k != "kind"}
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _plain(obj):
    """Normalise to what a JSON round trip yields, so reloaded reports compare equal."""
    return json.loads(json.dumps(obj))


# -- cached building blocks ---------------------------------------------------

@lru_cache(maxsize=64)
def _psi(fam: WeightFamily, m: int):
    return fam.psi(m)


@lru_cache(maxsize=64)
def _table(fam: WeightFamily, m: int, cap: int) -> ConjugateTable:
    return psi_star_table(_psi(fam, m), cap)


@lru_cache(maxsize=64)
def _bic(fam: WeightFamily, m: int, s_max: float):
    return psi_biconjugate(_psi(fam, m), s_max)


@lru_cache(maxsize=64)
def _phi_star(fam: WeightFamily, m: int, probe: GridBox):
    return phi_star_on_probe(fam[m], probe)


@lru_cache(maxsize=256)
def _condition(fam: WeightFamily, cid: str, m: int):
    return check_condition(fam, cid, m)


def _hypotheses(fam: WeightFamily, conditions, ms) -> tuple[str, list]:
    entries, status = [], PASS
    for cid in conditions:
        for m in ms:
            if cid == "psi_convex":
                defect = convexity_defect(_psi(fam, m), GridBox(4.0, 1 / 64, fam.n))
                verdict = PASS if defect >= -1e-9 else FAIL
                entries.append({"condition_id": cid, "m": m, "witness": defect, "verdict": verdict})
            elif cid == "phi_convex":
                defect = convexity_defect(fam[m], GridBox(5.0, 0.05, fam.n))
                verdict = PASS if defect >= -1e-9 else FAIL
                entries.append({"condition_id": cid, "m": m, "witness": defect, "verdict": verdict})
            else:
                rep = _condition(fam, cid, m)
                verdict = rep.verdict
                entries.append({"condition_id": cid, "m": m, "witness": rep.witness,
                                "verdict": verdict, "margin_trend": list(rep.margin_trend)})
            if verdict == FAIL:
                status = FAIL
            elif verdict != PASS and status == PASS:
                status = INCONCLUSIVE
    return status, entries


def _nested_entry(label: str, estimates: list[SeminormEstimate]) -> dict:
    finest = estimates[-1]
    return {"label": label, "finite": finite_evidence(estimates),
            "values": [e.value for e in estimates],
            "boxes": [_box_size(e) for e in estimates],
            "estimate": finest.to_dict()}


def _box_size(e: SeminormEstimate) -> float:
    probe = e.probe
    return float(probe["real"]["half_width"] if "real" in probe else probe["half_width"])


def _max_rel_change(entries) -> float:
    worst = 0.0
    for en in entries:
        vals = en["values"]
        base = abs(vals[0]) or 1.0
        if all(math.isfinite(v) for v in vals):
            worst = max(worst, max(abs(v - vals[0]) for v in vals) / base)
    return worst


def _scan(nus, side) -> tuple[int | None, list]:
    """First ``nu`` for which ``side(nu)`` accepts; returns it with all evidence gathered."""
    evidence = []
    for nu in nus:
        ok, entries = side(nu)
        evidence.extend(entries)
        if ok:
            return nu, evidence
    return None, evidence


def _p_side(f, fam, caps, n):
    probes = caps.complex_probes(n)

    def side(nu):
        entries = []
        for k in range(caps.k_max + 1):
            est = [p_seminorm(f, fam[nu], k, pr) for pr in probes]
            entries.append(_nested_entry(f"p[nu={nu},k={k}]", est))
            if not entries[-1]["finite"]:
                return False, entries
        return True, entries

    return side


def _h_side(f, fam, caps, n):
    probes = caps.complex_probes(n)
    s_max = math.log1p(max(caps.complex_boxes))

    def side(nu):
        bic, dev = _bic(fam, nu, s_max)
        entries = []
        for k in range(caps.k_max + 1):
            est = [h_seminorm(f, _psi(fam, nu), k, pr, bic=bic) for pr in probes]
            entries.append(_nested_entry(f"h[nu={nu},k={k}]", est))
            entries[-1]["biconjugate_deviation"] = dev
            if not entries[-1]["finite"]:
                return False, entries
        return True, entries

    return side


def _r_side(f, fam, caps, n):
    probes = caps.real_probes(n)

    def side(nu):
        table = _table(fam, nu, max(caps.alpha_max, caps.beta_max))
        entries = []
        for m in range(caps.m_max + 1):
            est = [r_seminorm(f, table, m, pr, caps.alpha_max) for pr in probes]
            entries.append(_nested_entry(f"R[nu={nu},m={m}]", est))
            if not entries[-1]["finite"]:
                return False, entries
        return True, entries

    return side


def _g_side(f_hat, fam, caps, n):
    probes = caps.real_probes(n)

    def side(nu):
        table = _table(fam, nu, max(caps.alpha_max, caps.beta_max))
        entries = []
        for m in range(caps.g_m_max + 1):
            est = [g_norm(f_hat, table, m, pr, caps.beta_max) for pr in probes]
            entries.append(_nested_entry(f"G[nu={nu},m={m}]", est))
            if not entries[-1]["finite"]:
                return False, entries
        return True, entries

    return side


def _gs_side(f_hat, fam, caps, n):
    probes = caps.real_probes(n)

    def side(nu):
        # one phi* on the widest box, so nested boxes see identical weights at shared nodes
        phi_star = _phi_star(fam, nu, probes[-1])
        entries = []
        for m in range(caps.g_m_max + 1):
            est = [gs_seminorm(f_hat, phi_star, m, pr) for pr in probes]
            entries.append(_nested_entry(f"GS[nu={nu},m={m}]", est))
            if not entries[-1]["finite"]:
                return False, entries
        return True, entries

    return side


def _tail_gap(entries) -> float | None:
    """Log distance between the overall maximum and the largest term at the order cap."""
    gaps = []
    for en in entries:
        est = en["estimate"]
        if est["profile"] and math.isfinite(est["log_value"]):
            gaps.append(est["profile"][-1][1] - est["log_value"])
    return max(gaps) if gaps else None


def _report(claim, f, fam, caps, evidence, verdict, margins, agreement, notes, extra_inputs=None):
    margins = {k: float(v) for k, v in margins.items() if v is not None and math.isfinite(v)}
    inputs = {"caps": caps.to_dict(), "nu_range": [caps.nu, caps.resolved_nu_max(fam)],
              "escalation": ESCALATION_NOTE, "version": __version__, **(extra_inputs or {})}
    return VerificationReport(claim, f.id, _plain(fam.spec()), _plain(inputs), _plain(evidence),
                              verdict, margins, agreement, list(notes))


def _membership_pair(claim, f, fam, caps, premise_side, conclusion_side, hyp_conditions):
    nus = list(range(caps.nu, caps.resolved_nu_max(fam) + 1))
    status, hyp = _hypotheses(fam, hyp_conditions, nus)
    evidence = [{"label": "hypotheses", "entries": hyp}]
    nu_p, ev_p = _scan(nus, premise_side)
    nu_c, ev_c = _scan(nus if nu_p is None else [v for v in nus if v >= nu_p], conclusion_side)
    evidence += ev_p + ev_c
    agreement = (nu_p is None) == (nu_c is None)
    notes = []
    if status == FAIL:
        verdict = HYPOTHESIS
        notes.append("a required family condition failed")
    elif nu_p is None:
        verdict = PREMISE
    elif nu_c is not None and status == PASS:
        verdict = SUPPORTED
    else:
        verdict = INCONCLUSIVE
    margins = {"nu_premise": nu_p, "nu_conclusion": nu_c,
               "max_box_change": _max_rel_change(ev_p + ev_c),
               "tail_gap": _tail_gap([e for e in ev_c if e.get("finite")])}
    return _report(claim, f, fam, caps, evidence, verdict, margins, agreement, notes)


def verify_t1(f: EntireTestFunction, fam: WeightFamily, caps: Caps | None = None) -> VerificationReport:
    """Restriction to R^n of a member of E(Phi) satisfies the derivative bounds."""
    caps = caps or Caps.for_dimension(f.n)
    return _membership_pair("T1", f, fam, caps, _p_side(f, fam, caps, f.n),
                            _r_side(f, fam, caps, f.n), ("A1", "A2", "A3", "i0"))


def verify_t2(f: EntireTestFunction, fam: WeightFamily, caps: Caps | None = None) -> VerificationReport:
    """Converse direction on functions whose entire extension is known."""
    caps = caps or Caps.for_dimension(f.n)
    return _membership_pair("T2", f, fam, caps, _r_side(f, fam, caps, f.n),
                            _p_side(f, fam, caps, f.n), ("A1", "A2", "A3", "i0", "i1", "i2"))


def _equivalence(claim, subject, fam, caps, left, right, nus, hyp_status, hyp_entries,
                 ratio_label, ratio_fn, notes, extra_inputs=None):
    evidence = [{"label": "hypotheses", "entries": hyp_entries}]
    per_nu, ratios = [], []
    left_any = right_any = False
    for nu in nus:
        ok_l, ev_l = left(nu)
        ok_r, ev_r = right(nu)
        evidence += ev_l + ev_r
        per_nu.append(ok_l == ok_r)
        left_any |= ok_l
        right_any |= ok_r
        if ok_l and ok_r:
            ratios += ratio_fn(ev_l, ev_r)
            break
    agreement = left_any == right_any
    if hyp_status == FAIL:
        verdict = HYPOTHESIS
        notes.append("a required family condition failed")
    elif not agreement:
        verdict = REFUTED
    elif not left_any:
        verdict = PREMISE
    elif hyp_status == PASS:
        verdict = SUPPORTED
    else:
        verdict = INCONCLUSIVE
    finite_ratios = [r for r in ratios if math.isfinite(r)]
    margins = {"per_nu_agreement": sum(per_nu) / len(per_nu) if per_nu else None,
               f"{ratio_label}_min": min(finite_ratios) if finite_ratios else None,
               f"{ratio_label}_max": max(finite_ratios) if finite_ratios else None}
    return _report(claim, subject, fam, caps, evidence, verdict, margins, agreement, notes,
                   extra_inputs)


def _ratios(ev_top, ev_bottom) -> list[float]:
    out = []
    for a, b in zip(ev_top, ev_bottom):
        va, vb = a["values"][-1], b["values"][-1]
        if vb > 0:
            out.append(va / vb)
    return out


def verify_p12(f: EntireTestFunction, fam: WeightFamily, caps: Caps | None = None) -> VerificationReport:
    """Both descriptions of the entire-function space accept or reject ``f`` together."""
    caps = caps or Caps.for_dimension(f.n)
    nus = list(range(caps.nu, caps.resolved_nu_max(fam) + 1))
    s1, h1 = _hypotheses(fam, ("psi_convex", "i2"), nus)
    s2, h2 = _hypotheses(fam, ("i1", "i2"), nus)
    routes = {"convex_psi_route": s1, "extension_route": s2}
    status = PASS if PASS in (s1, s2) else (FAIL if s1 == FAIL and s2 == FAIL else INCONCLUSIVE)
    # label by the route whose hypotheses hold; the convex-psi route wins ties
    claim = "P2" if s1 != PASS and s2 == PASS else "P1"
    return _equivalence(claim, f, fam, caps, _p_side(f, fam, caps, f.n), _h_side(f, fam, caps, f.n),
                        nus, status, h1 + h2, "ratio_h_over_p",
                        lambda ev_p, ev_h: _ratios(ev_h, ev_p), [],
                        {"hypothesis_routes": routes})


def verify_t3(f: EntireTestFunction, fam: WeightFamily, caps: Caps | None = None) -> VerificationReport:
    """Fourier transformation maps members of E(Phi) into G(Psi*), with round trip and linearity."""
    caps = caps or Caps.for_dimension(f.n)
    nus = list(range(caps.nu, caps.resolved_nu_max(fam) + 1))
    status, hyp = _hypotheses(fam, ("i2", "i3", "i4"), nus)
    evidence = [{"label": "hypotheses", "entries": hyp}]
    notes = []
    nu_p, ev_p = _scan(nus, _p_side(f, fam, caps, f.n))
    evidence += ev_p
    margins: dict = {"nu_premise": nu_p}
    f_hat = exact_fourier(f)
    agreement = None
    if status == FAIL:
        notes.append("a required family condition failed")
        verdict = HYPOTHESIS
    elif nu_p is None or f_hat is None:
        verdict = PREMISE
        if f_hat is None:
            notes.append("transform is not a function (no decay on R^n)")
    else:
        nu_g, ev_g = _scan([v for v in nus if v >= nu_p], _g_side(f_hat, fam, caps, f.n))
        evidence += ev_g
        agreement = nu_g is not None
        margins["nu_conclusion"] = nu_g
        checks = _fourier_checks(f, f_hat, caps)
        evidence.append({"label": "fourier_checks", **checks})
        margins.update({k: checks[k] for k in ("roundtrip_error", "linearity_residual",
                                               "exact_vs_quadrature")})
        good = (checks["roundtrip_error"] <= caps.roundtrip_tol
                and checks["linearity_residual"] <= caps.linearity_tol
                and checks["exact_vs_quadrature"] <= caps.exact_tol)
        if not good:
            notes.append("quadrature checks exceeded tolerance")
        verdict = SUPPORTED if (nu_g is not None and good and status == PASS) else INCONCLUSIVE
    margins["max_box_change"] = _max_rel_change([e for e in evidence if "values" in e])
    return _report("T3", f, fam, caps, evidence, verdict, margins, agreement, notes)


def _fourier_targets(n: int) -> np.ndarray:
    axis = np.linspace(-3.0, 3.0, 13 if n == 1 else 5)
    return np.stack([m.ravel() for m in np.meshgrid(*[axis] * n, indexing="ij")], axis=-1)


def _fourier_checks(f: EntireTestFunction, f_hat: EntireTestFunction, caps: Caps) -> dict:
    x = _fourier_targets(f.n)
    quad, err = fourier_transform(f, x)
    exact = np.asarray(f_hat.evaluate(x))
    back, _ = inverse_transform(QuadratureTransform(f), x)
    roundtrip = float(np.max(np.abs(back - np.asarray(f.evaluate(x)))))
    partner = moment(1, 1.0) if f.n == 1 else exact_partner(f.n)
    combo = f + partner.scale(2.0)
    spec = auto_spec(combo, x)
    lhs, _ = fourier_transform(combo, x, spec)
    rhs = fourier_transform(f, x, spec)[0] + 2.0 * fourier_transform(partner, x, spec)[0]
    return {"roundtrip_error": roundtrip,
            "linearity_residual": float(np.max(np.abs(lhs - rhs))),
            "exact_vs_quadrature": float(np.max(np.abs(quad - exact))),
            "quadrature_error_estimate": float(np.max(err))}


def exact_partner(n: int) -> EntireTestFunction:
    return gaussian(1.0, n)


def verify_t4(f_hat, fam: WeightFamily, caps: Caps | None = None) -> VerificationReport:
    """The two descriptions of the Fourier image accept or reject ``f_hat`` together."""
    caps = caps or Caps.for_dimension(f_hat.n)
    nus = list(range(caps.nu, caps.resolved_nu_max(fam) + 1))
    status, hyp = _hypotheses(fam, ("phi_convex", "i2", "i3"), nus)
    return _equivalence("T4", f_hat, fam, caps, _g_side(f_hat, fam, caps, f_hat.n),
                        _gs_side(f_hat, fam, caps, f_hat.n), nus, status, hyp,
                        "ratio_q_over_g", lambda ev_g, ev_q: _ratios(ev_q, ev_g), [])


# -- batches -----------------------------------------------------------------------

def t4_subject(f: EntireTestFunction, direct: bool = False):
    """T4 runs on the transform of a decaying zoo member unless ``direct`` is set."""
    if direct:
        return f
    return exact_fourier(f) or f


def run_claim(claim: str, function_id: str, family_spec: dict, caps: dict | None = None,
              direct: bool = False) -> VerificationReport:
    fam = _family(json.dumps(family_spec, sort_keys=True))
    f = from_id(function_id)
    c = Caps.for_dimension(f.n, **(caps or {}))
    if claim == "T1":
        rep = verify_t1(f, fam, c)
    elif claim == "T2":
        rep = verify_t2(f, fam, c)
    elif claim in ("P1", "P2", "P12"):
        rep = verify_p12(f, fam, c)
    elif claim == "T3":
        rep = verify_t3(f, fam, c)
    elif claim == "T4":
        rep = verify_t4(t4_subject(f, direct), fam, c)
        rep.inputs["subject_of"] = function_id
    else:
        raise ValueError(f"unknown claim {claim!r}; expected one of {CLAIMS} or P12")
    return rep


@lru_cache(maxsize=16)
def _family(spec_json: str) -> WeightFamily:
    return family_from_spec(json.loads(spec_json))


def _run_packed(args):
    return run_claim(*args).to_dict()


def run_batch(claims, function_ids, family_spec: dict, caps: dict | None = None,
              workers: int = 1, direct: bool = False) -> list[VerificationReport]:
    """Run every claim on every function; output sorted by (claim, function id)."""
    claims = ["P1" if c in ("P2", "P12") else c for c in claims]
    jobs = sorted({(c, fid) for c in claims for fid in function_ids},
                  key=lambda j: (CLAIMS.index(j[0]) if j[0] in CLAIMS else 99, j[1]))
    packed = [(c, fid, family_spec, caps, direct) for c, fid in jobs]
    if workers > 1 and len(packed) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as ex:
            dicts = list(ex.map(_run_packed, packed))
        return [VerificationReport.from_dict(d) for d in dicts]
    return [run_claim(*p) for p in packed]


def summary_rows(reports) -> list[dict]:
    rows = []
    for r in reports:
        rows.append({"claim": r.claim, "function": r.function, "family": r.family["kind"],
                     "verdict": r.verdict, "agreement": r.agreement,
                     **{k: r.margins[k] for k in sorted(r.margins)}})
    return sorted(rows, key=lambda row: (row["claim"], row["function"]))
