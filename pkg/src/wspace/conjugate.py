"""Discrete Young-Fenchel conjugation.

Everything here conjugates the grid-restricted function exactly: ``g*(x)`` is the
maximum of ``<x, y> - g(y)`` over the finite nodes ``y``.  The one-dimensional
transform uses the lower convex hull of the samples, so its cost is linear in
the node count plus a binary search per dual node; the n-dimensional transform
applies it one coordinate at a time.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from .grids import multi_indices
from .weights import WeightFunction


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Extended-real values on the Cartesian product of ``axes``; ``+inf`` is allowed."""

    axes: tuple[np.ndarray, ...]
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)
        if values.shape != tuple(len(a) for a in axes):
            raise ValueError(f"values shape {values.shape} does not match axes")
        for a in axes:
            if a.ndim != 1 or len(a) == 0 or np.any(np.diff(a) <= 0):
                raise ValueError("axis nodes must be strictly increasing")
        if np.any(np.isnan(values)) or np.any(values == -np.inf):
            raise ValueError("values must be finite or +inf")
        if not np.any(np.isfinite(values)):
            raise ValueError("sampled function is identically +inf")

    @property
    def n(self) -> int:
        return len(self.axes)

    @classmethod
    def from_callable(cls, func, axes) -> "SampledFunction":
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return cls(axes, func(mesh))

    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def conjugate_at(g: SampledFunction, x) -> np.ndarray | float:
    """Brute-force ``max_y <x, y> - g(y)`` over every finite node ``y``."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0 or (x.ndim == 1 and g.n > 1)
    pts = x.reshape(-1, g.n)
    vals = g.values.ravel()
    finite = np.isfinite(vals)
    if not finite.any():
        raise ValueError("sampled function is identically +inf")
    y = g.nodes()[finite]
    out = np.max(pts @ y.T - vals[finite], axis=1)
    return float(out[0]) if scalar else out.reshape(x.shape[:-1] if g.n > 1 else x.shape)


def _lower_hull(y: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of ``(y_i, v_i)`` with increasing ``y``."""
    hull: list[int] = []
    for i in range(len(y)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (y[b] - y[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (y[i] - y[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=int)


def _hull_data(y: np.ndarray, v: np.ndarray):
    finite = np.isfinite(v)
    yf, vf = y[finite], v[finite]
    idx = _lower_hull(yf, vf)
    hy, hv = yf[idx], vf[idx]
    slopes = np.diff(hv) / np.diff(hy)
    return hy, hv, slopes


def _conj_values(y: np.ndarray, v: np.ndarray, dual: np.ndarray) -> np.ndarray:
    if not np.any(np.isfinite(v)):
        return np.full(len(dual), -np.inf)
    hy, hv, slopes = _hull_data(y, v)
    # first vertex whose right slope is >= x; ties go to the earlier node
    k = np.searchsorted(slopes, dual, side="left")
    return dual * hy[k] - hv[k]


def slope_range(g: SampledFunction, axis: int = 0) -> tuple[float, float]:
    """Smallest and largest finite-difference slope of ``g`` along ``axis``."""
    y = g.axes[axis]
    v = np.moveaxis(g.values, axis, -1)
    d = np.diff(v, axis=-1) / np.diff(y)
    d = d[np.isfinite(d)]
    if d.size == 0:
        return 0.0, 0.0
    return float(d.min()), float(d.max())


def default_dual_axis(g: SampledFunction, axis: int = 0) -> np.ndarray:
    """Dual nodes spanning the achievable slopes; the primal axis when they collapse."""
    lo, hi = slope_range(g, axis)
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        return g.axes[axis].copy()
    return np.linspace(lo, hi, len(g.axes[axis]))


def conjugate_1d(g: SampledFunction, dual_axis=None) -> SampledFunction:
    if g.n != 1:
        raise ValueError("conjugate_1d needs a one-dimensional sample")
    dual = default_dual_axis(g) if dual_axis is None else np.asarray(dual_axis, dtype=float)
    return SampledFunction((dual,), _conj_values(g.axes[0], g.values, dual))


def _partial_conjugate(values: np.ndarray, y: np.ndarray, dual: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(values, axis, -1)
    rows = moved.reshape(-1, moved.shape[-1])
    out = np.empty((rows.shape[0], len(dual)))
    for r in range(rows.shape[0]):
        out[r] = _conj_values(y, rows[r], dual)
    return np.moveaxis(out.reshape(moved.shape[:-1] + (len(dual),)), -1, axis)


def conjugate_nd(g: SampledFunction, dual_axes=None) -> SampledFunction:
    """Conjugate by iterated partial one-dimensional conjugations.

    ``sup_y = sup_{y_n} ... sup_{y_1}``: after conjugating in ``y_1`` the partial
    result enters the next stage with its sign flipped.
    """
    if dual_axes is None:
        dual_axes = [default_dual_axis(g, k) for k in range(g.n)]
    dual_axes = tuple(np.asarray(d, dtype=float) for d in dual_axes)
    if len(dual_axes) != g.n:
        raise ValueError("need one dual axis per dimension")
    if g.n == 1:
        return conjugate_1d(g, dual_axes[0])
    current = g.values
    for k in range(g.n):
        h = _partial_conjugate(current, g.axes[k], dual_axes[k], k)
        current = -h if k < g.n - 1 else h
    return SampledFunction(dual_axes, current)


def _slope_axis(g: SampledFunction, axis: int, cap_factor: int = 4) -> np.ndarray:
    """Every distinct hull slope along ``axis``; a dense linspace when too many."""
    y = g.axes[axis]
    moved = np.moveaxis(g.values, axis, -1).reshape(-1, len(y))
    slopes = []
    for row in moved:
        if np.sum(np.isfinite(row)) >= 2:
            slopes.append(_hull_data(y, row)[2])
    if not slopes:
        return y.copy()
    s = np.unique(np.concatenate(slopes))
    if len(s) > cap_factor * len(y):
        return np.linspace(s[0], s[-1], cap_factor * len(y))
    if len(s) == 1:
        return np.array([s[0] - 1.0, s[0], s[0] + 1.0])
    return s


def biconjugate(g: SampledFunction, dual_axes=None) -> SampledFunction:
    """``g**`` on the nodes of ``g``: the discrete lower convex envelope.

    The intermediate dual grid defaults to the hull slopes of ``g``; in one
    dimension this makes the result exact at hull vertices.
    """
    if dual_axes is None:
        dual_axes = [_slope_axis(g, k) for k in range(g.n)]
    gstar = conjugate_nd(g, dual_axes)
    return conjugate_nd(gstar, g.axes)


# -- tables of psi*(alpha) --------------------------------------------------

@dataclass
class ConjugateTable:
    """``psi*(alpha)`` for every multi-index with ``|alpha| <= order_cap``."""

    order_cap: int
    n: int
    entries: dict[tuple[int, ...], float]
    source: str | None = None
    inconclusive: tuple[tuple[int, ...], ...] = field(default=())

    def __getitem__(self, alpha) -> float:
        alpha = tuple(int(a) for a in np.atleast_1d(alpha))
        if sum(alpha) > self.order_cap:
            raise KeyError(f"|alpha| = {sum(alpha)} exceeds table cap {self.order_cap}")
        return self.entries[alpha]

    def indices(self, max_order: int | None = None) -> list[tuple[int, ...]]:
        cap = self.order_cap if max_order is None else max_order
        if cap > self.order_cap:
            raise KeyError(f"order {cap} exceeds table cap {self.order_cap}")
        return multi_indices(self.n, cap)

    def line_convexity_defect(self) -> float:
        """Most negative second difference along integer coordinate lines."""
        worst = 0.0
        for alpha, v in self.entries.items():
            for i in range(self.n):
                up = list(alpha)
                up[i] += 1
                up2 = list(alpha)
                up2[i] += 2
                if sum(up2) <= self.order_cap:
                    d = self.entries[tuple(up2)] - 2 * self.entries[tuple(up)] + v
                    if np.isfinite(d):
                        worst = min(worst, d)
        return worst


def _maximize_active(psi: WeightFunction, alpha: np.ndarray, active: np.ndarray,
                     box: float, expansions: int):
    k = int(active.sum())
    nodes = {1: 2001, 2: 201}.get(k, 41)
    full = np.full(psi.n, -np.inf)

    def objective(ta):
        t = np.broadcast_to(full, ta.shape[:-1] + (psi.n,)).copy()
        t[..., active] = ta
        return ta @ alpha[active] - psi.evaluator(t)

    for _ in range(expansions + 1):
        axis = np.linspace(-box, box, nodes)
        mesh = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1)
        vals = objective(mesh)
        flat = int(np.argmax(vals))
        idx = np.unravel_index(flat, vals.shape)
        if all(0 < i < nodes - 1 for i in idx):
            break
        box *= 2.0
    else:
        return math.nan, False

    h = axis[1] - axis[0]
    t0 = np.array([axis[i] for i in idx])
    best = float(vals[idx])
    if k == 1:
        res = optimize.minimize_scalar(lambda s: -objective(np.array([s])),
                                       bounds=(t0[0] - h, t0[0] + h), method="bounded",
                                       options={"xatol": 1e-12})
        cand = -float(res.fun)
    else:
        res = optimize.minimize(lambda s: -objective(s), t0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
        cand = -float(res.fun)
    return max(best, cand), True


def psi_star_table(psi: WeightFunction, alpha_max: int, box: float = 8.0,
                   expansions: int = 4) -> ConjugateTable:
    """Tabulate ``psi*(alpha) = sup_t <alpha, t> - psi(t)`` for ``|alpha| <= alpha_max``.

    Components with ``alpha_i = 0`` are sent to ``t_i = -inf``: the weights are
    nondecreasing in each ``e^{t_i}``, so the supremum over that coordinate is
    the limit there.  The remaining coordinates are searched on ``[-box, box]``,
    doubled up to ``expansions`` times until the grid argmax is interior, then
    polished by a local optimiser.
    """
    entries: dict[tuple[int, ...], float] = {}
    bad = []
    for alpha in multi_indices(psi.n, alpha_max):
        a = np.asarray(alpha, dtype=float)
        active = a > 0
        if not active.any():
            entries[alpha] = float(-psi.evaluator(np.full(psi.n, -np.inf))) + 0.0
            continue
        value, ok = _maximize_active(psi, a, active, box, expansions)
        entries[alpha] = value
        if not ok:
            bad.append(alpha)
    return ConjugateTable(alpha_max, psi.n, entries, psi.closed_form_id, tuple(bad))


# -- CSV interchange ---------------------------------------------------------

def write_csv(g: SampledFunction, path, names=None) -> None:
    names = list(names) if names else [f"x{i + 1}" for i in range(g.n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["value"])
        for node, v in zip(g.nodes(), g.values.ravel()):
            # + 0.0 folds -0.0 into 0.0
            w.writerow([f"{c + 0.0:.17g}" for c in node] + [f"{v + 0.0:.17g}"])


def read_csv(path) -> tuple[SampledFunction, list[str]]:
    """Read a complete rectangular grid; returns the sample and its axis names."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    header = rows[0]
    n = len(header) - 1
    if n < 1:
        raise ValueError(f"{path}: header needs at least one axis column and a value column")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    axes = tuple(np.unique(data[:, i]) for i in range(n))
    shape = tuple(len(a) for a in axes)
    if data.shape[0] != math.prod(shape):
        raise ValueError(f"{path}: grid is not a complete Cartesian product")
    values = np.full(shape, np.nan)
    idx = tuple(np.searchsorted(axes[i], data[:, i]) for i in range(n))
    values[idx] = data[:, n]
    if np.any(np.isnan(values)):
        raise ValueError(f"{path}: grid has duplicate or missing nodes")
    return SampledFunction(axes, values), header[:n]
