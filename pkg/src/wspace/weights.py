"""Weight functions, weight families and numerical checks of their structural conditions.

A weight family is an increasing sequence ``phi_1, phi_2, ...`` of functions on
R^n.  The checks here work on nested probe grids and report the least constant
that makes each defining inequality hold on the finest grid, together with the
sequence of such constants across the grids (the margin trend).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from .grids import GridBox, NestedGrid, default_condition_grid

CONDITIONS = ("A1", "A2", "A3", "i0", "i1", "i2", "i3", "i4")
TWO_MEMBER = {"i0", "i1", "i2", "i3", "i4"}

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """An evaluable weight on R^n.

    ``evaluator`` maps an array of shape ``(..., n)`` to an array of shape ``(...)``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    n: int
    claimed_convex: bool = False
    claimed_radial: bool = False
    closed_form_id: str | None = None

    def __call__(self, x) -> np.ndarray:
        return eval_weight(self, x)


def eval_weight(w: WeightFunction, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != w.n:
        raise ValueError(f"point of dimension {x.shape[-1]} given to a weight on R^{w.n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("weight evaluated at a non-finite point")
    out = w.evaluator(x)
    return float(out) if np.ndim(out) == 0 else out


def log_substitute(w: WeightFunction, claimed_convex: bool = False) -> WeightFunction:
    """Return ``psi(t) = w(e^{t_1}, ..., e^{t_n})``.

    Coordinates equal to ``-inf`` are allowed and map to 0, which is the limit
    used by the conjugate tables for vanishing multi-index components.
    """
    base = w.evaluator

    def psi(t):
        return base(np.exp(np.asarray(t, dtype=float)))

    tag = f"log[{w.closed_form_id}]" if w.closed_form_id else None
    return WeightFunction(psi, w.n, claimed_convex=claimed_convex, closed_form_id=tag)


@dataclass(frozen=True, eq=False)
class WeightFamily:
    """Truncation ``phi_1, ..., phi_{M_max}`` of an infinite weight family."""

    members: tuple[WeightFunction, ...]
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.members) < 3:
            raise ValueError("a weight family needs at least 3 members")
        dims = {w.n for w in self.members}
        if len(dims) != 1:
            raise ValueError(f"family members have mixed dimensions {sorted(dims)}")

    @property
    def n(self) -> int:
        return self.members[0].n

    @property
    def M_max(self) -> int:
        return len(self.members)

    def __getitem__(self, m: int) -> WeightFunction:
        """1-based member access, ``fam[1]`` is ``phi_1``."""
        if not 1 <= m <= self.M_max:
            raise IndexError(f"member index {m} outside 1..{self.M_max}")
        return self.members[m - 1]

    def psi(self, m: int) -> WeightFunction:
        w = self[m]
        return log_substitute(w, claimed_convex=self.params.get("psi_convex", False))

    def min_gaps(self, box: GridBox) -> list[float]:
        """``min(phi_{m+1} - phi_m)`` over the box, for each consecutive pair."""
        pts = box.points()
        vals = [w.evaluator(pts) for w in self.members]
        return [float(np.min(b - a)) for a, b in zip(vals, vals[1:])]

    def spec(self) -> dict:
        return {"kind": self.kind, "n": self.n, "M_max": self.M_max, **self.params}


# -- builtin families ------------------------------------------------------

def _sum_sq(c):
    c = np.asarray(c, dtype=float)
    return lambda x: np.sum(c * x * x, axis=-1)


def _sum_abs_pow(p):
    return lambda x: np.sum(np.abs(x) ** p, axis=-1)


def _scaled(scale, g):
    return lambda x: scale * g(x)


def builtin_family(kind: str, n: int = 1, M_max: int = 6, **params) -> WeightFamily:
    """Construct one of the builtin families.

    ``quadratic``    phi_m = 4^m sum x_i^2
    ``power``        phi_m = 2^{pm} sum |x_i|^p            (param ``p > 1``, default 3/2)
    ``anisotropic``  phi_m = 4^m sum c_i x_i^2             (param ``c``, all positive)
    ``doubling``     phi_m = 2^m sum x_i^2                 (violates i3)
    ``linear``       phi_m = 2^m sum |x_i|                 (violates A3)
    """
    if M_max < 3:
        raise ValueError("M_max must be at least 3")
    members = []
    if kind == "quadratic":
        for m in range(1, M_max + 1):
            members.append(WeightFunction(_scaled(4.0 ** m, _sum_sq(np.ones(n))), n,
                                          claimed_convex=True, claimed_radial=True,
                                          closed_form_id=f"quadratic:m={m}"))
        params = {}
    elif kind == "power":
        p = float(params.get("p", 1.5))
        if p <= 1:
            raise ValueError("power family needs p > 1")
        for m in range(1, M_max + 1):
            members.append(WeightFunction(_scaled(2.0 ** (p * m), _sum_abs_pow(p)), n,
                                          claimed_convex=True, claimed_radial=(n == 1),
                                          closed_form_id=f"power:p={p},m={m}"))
        params = {"p": p}
    elif kind == "anisotropic":
        c = tuple(float(v) for v in params.get("c", [1.0 + i for i in range(n)]))
        if len(c) != n or min(c) <= 0:
            raise ValueError("anisotropic family needs n positive coefficients c")
        for m in range(1, M_max + 1):
            members.append(WeightFunction(_scaled(4.0 ** m, _sum_sq(c)), n,
                                          claimed_convex=True, claimed_radial=(n == 1),
                                          closed_form_id=f"anisotropic:c={list(c)},m={m}"))
        params = {"c": list(c)}
    elif kind == "doubling":
        for m in range(1, M_max + 1):
            members.append(WeightFunction(_scaled(2.0 ** m, _sum_sq(np.ones(n))), n,
                                          claimed_convex=True, claimed_radial=True,
                                          closed_form_id=f"doubling:m={m}"))
        params = {}
    elif kind == "linear":
        for m in range(1, M_max + 1):
            members.append(WeightFunction(_scaled(2.0 ** m, _sum_abs_pow(1.0)), n,
                                          claimed_convex=True, claimed_radial=(n == 1),
                                          closed_form_id=f"linear:m={m}"))
        params = {}
    else:
        raise ValueError(f"unknown builtin family {kind!r}")
    # every builtin is a positive combination of e^{p t_i}, hence psi_m is convex
    return WeightFamily(tuple(members), kind, {**params, "psi_convex": True})


def family_from_spec(spec: dict) -> WeightFamily:
    """Build a builtin family from a declarative dict such as ``{"kind": "power", "p": 2}``."""
    allowed = {"kind", "n", "M_max", "p", "c"}
    unknown = set(spec) - allowed
    if unknown:
        raise ValueError(f"unknown family keys {sorted(unknown)}")
    if "kind" not in spec:
        raise ValueError("family spec needs a 'kind'")
    extra = {k: spec[k] for k in ("p", "c") if k in spec}
    return builtin_family(spec["kind"], int(spec.get("n", 1)), int(spec.get("M_max", 6)), **extra)


# Closed-form verdicts per (family kind, condition), valid for every m < M_max
# with the default parameters A = 1, sigma = sqrt(2).
ANALYTIC_VERDICTS: dict[str, dict[str, str]] = {
    "quadratic": {c: PASS for c in CONDITIONS},
    "power": {c: PASS for c in CONDITIONS},
    "anisotropic": {c: PASS for c in CONDITIONS},
    "doubling": {**{c: PASS for c in CONDITIONS}, "i3": FAIL},
    "linear": {**{c: PASS for c in CONDITIONS}, "A3": FAIL},
}


# -- condition checks ------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    m: int
    parameters: dict
    witness: float
    verdict: str
    margin_trend: tuple[float, ...]
    grid: dict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "condition"
        d["margin_trend"] = list(self.margin_trend)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionReport":
        return cls(d["condition_id"], d["m"], dict(d["parameters"]), d["witness"],
                   d["verdict"], tuple(d["margin_trend"]), dict(d["grid"]))


def _clamped_max(lhs: np.ndarray, rhs: np.ndarray, tol: float) -> float:
    deficit = lhs - rhs
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    deficit = np.where(deficit <= tol * scale, 0.0, deficit)
    return float(np.max(deficit)) if deficit.size else 0.0


def _classify_trend(trend, tol: float) -> str:
    """Bounded-looking trends pass; growing trends with non-shrinking steps fail."""
    if len(trend) < 2:
        return PASS if np.isfinite(trend[-1]) else FAIL
    if not all(np.isfinite(trend)):
        return FAIL
    last, prev = trend[-1], trend[-2]
    if abs(last - prev) <= max(tol, 1e-9 * abs(last)):
        return PASS
    steps = np.diff(trend)
    if np.all(steps > 0) and np.all(steps[1:] >= steps[:-1] * (1 - 1e-9)):
        return FAIL
    return INCONCLUSIVE


def _i2_shifts(n: int) -> np.ndarray:
    return np.array(list(product((0.0, 0.5, 1.0), repeat=n)))


def _deficit_on_box(fam: WeightFamily, cid: str, m: int, box: GridBox, params: dict,
                    tol: float) -> float:
    g = fam[m].evaluator
    if cid == "A1":
        x = box.points()
        return _clamped_max(np.abs(g(x) - g(np.abs(x))), np.zeros(len(x)), tol)
    if cid == "A2":
        axes = [box.nonnegative_axis()] * fam.n
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = g(mesh)
        worst = 0.0
        for i in range(fam.n):
            lo = np.take(vals, range(vals.shape[i] - 1), axis=i)
            hi = np.take(vals, range(1, vals.shape[i]), axis=i)
            worst = max(worst, _clamped_max(lo, hi, tol))
        return worst
    h = fam[m + 1].evaluator
    if cid == "i0":
        x = box.points()
        A = params["A"]
        return _clamped_max(g(x) + A * np.log1p(np.linalg.norm(x, axis=-1)), h(x), tol)
    if cid == "i1":
        x = box.points()
        return _clamped_max(g(params["sigma"] * x), h(x), tol)
    if cid == "i2":
        axes = [box.nonnegative_axis()] * fam.n
        x = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=-1)
        rhs = h(x)
        return max(_clamped_max(g(x + xi), rhs, tol) for xi in _i2_shifts(fam.n))
    if cid == "i3":
        x = box.points()
        return _clamped_max(g(2.0 * x), h(x), tol)
    if cid == "i4":
        x = box.points()
        return _clamped_max(2.0 * g(x), h(x), tol)
    raise ValueError(f"unknown condition {cid!r}")


def _ray_directions(n: int) -> np.ndarray:
    dirs = [np.array(v, dtype=float) for v in product((0, 1), repeat=n) if any(v)]
    return np.array([d / np.linalg.norm(d) for d in dirs])


def _check_superlinear(fam: WeightFamily, m: int, probe: NestedGrid) -> tuple[float, str, list]:
    g = fam[m].evaluator
    dirs = _ray_directions(fam.n)
    ratios = np.array([[float(g(T * u)) / T for T in probe.boxes] for u in dirs])
    steps = np.diff(ratios, axis=1)
    trend = ratios.min(axis=0).tolist()
    if np.all(steps > 0):
        verdict = PASS
    elif np.any(np.all(steps <= 0, axis=1)):
        verdict = FAIL
    else:
        verdict = INCONCLUSIVE
    return trend[-1], verdict, trend


def check_condition(fam: WeightFamily, condition_id: str, m: int = 1, params: dict | None = None,
                    probe: NestedGrid | None = None, tol: float = 1e-12) -> ConditionReport:
    """Check one structural condition for member ``m`` (and ``m + 1``) of ``fam``.

    The witness is the largest deficit of the defining inequality on the finest
    grid, clamped below at 0.  For A3 the trend records ``min_ray phi_m(T u)/T``
    per box and passes when it grows on every tested ray.
    """
    if condition_id not in CONDITIONS:
        raise ValueError(f"unknown condition {condition_id!r}; expected one of {CONDITIONS}")
    if condition_id in TWO_MEMBER and m + 1 > fam.M_max:
        raise ValueError(f"{condition_id} needs member {m + 1} but M_max = {fam.M_max}")
    probe = probe or default_condition_grid(fam.n)
    if probe.n != fam.n:
        raise ValueError("probe dimension differs from family dimension")
    params = dict(params or {})
    if condition_id == "i0":
        params.setdefault("A", 1.0)
    if condition_id == "i1":
        params.setdefault("sigma", math.sqrt(2.0))
        if params["sigma"] <= 1:
            raise ValueError("i1 needs sigma > 1")

    if condition_id == "A3":
        witness, verdict, trend = _check_superlinear(fam, m, probe)
    else:
        trend = [_deficit_on_box(fam, condition_id, m, box, params, tol) for box in probe.levels()]
        witness = trend[-1]
        if condition_id in ("A1", "A2"):
            # any violation is a concrete counterexample point
            verdict = PASS if witness == 0.0 else FAIL
        else:
            verdict = _classify_trend(trend, tol)
    return ConditionReport(condition_id, m, params, float(witness), verdict,
                           tuple(float(t) for t in trend), probe.to_dict())


def convexity_defect(w: WeightFunction, box: GridBox) -> float:
    """Most negative normalised second difference along axes and diagonals."""
    axes = box.axes()
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = w.evaluator(mesh)
    scale = max(1.0, float(np.max(np.abs(vals))))
    n = w.n
    directions = [tuple(int(i == k) for i in range(n)) for k in range(n)]
    if n > 1:
        for a in range(n):
            for b in range(a + 1, n):
                for s in (1, -1):
                    d = [0] * n
                    d[a], d[b] = 1, s
                    directions.append(tuple(d))
    worst = 0.0
    for d in directions:
        lo = tuple(slice(2, None) if c == -1 else slice(None, -2) if c == 1 else slice(None)
                   for c in d)
        mid = tuple(slice(1, -1) if c else slice(None) for c in d)
        hi = tuple(slice(None, -2) if c == -1 else slice(2, None) if c == 1 else slice(None)
                   for c in d)
        second = vals[lo] - 2.0 * vals[mid] + vals[hi]
        if second.size:
            worst = min(worst, float(np.min(second)) / scale)
    return worst


def is_convex(w: WeightFunction, box: GridBox, tol: float = 1e-9) -> bool:
    return convexity_defect(w, box) >= -tol
