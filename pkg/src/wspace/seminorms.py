"""Weighted supremum functionals evaluated on finite probe grids, in log space.

Five functionals are provided:

* ``p``  -- ``|f(z)| (1+|z|)^k e^{-phi(|Im z|)}`` over a complex box;
* ``h``  -- as ``p`` but with the weight ``(psi*)*(ln(1+|Im z_1|), ...)``;
* ``r``  -- ``(1+|x|)^m |D^a f(x)| e^{psi*(a)} / a!`` over real points and multi-indices;
* ``g``  -- ``|x^b D^a f(x)| e^{psi*(b)} / b!`` over ``|a| <= m`` and all ``b``;
* ``gs`` -- ``|D^a f(x)| e^{phi*(|x|)}`` over ``|a| <= m``.

Each returns the grid maximum with its location and a flag telling whether it
sits on the edge of what was probed.  A supremum counts as finite evidence only
when it is interior and stable under enlarging the box.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import gammaln

from .conjugate import ConjugateTable, SampledFunction, biconjugate, conjugate_nd
from .grids import GridBox, multi_indices
from .weights import WeightFunction


@dataclass(frozen=True)
class ComplexProbe:
    """Complex box: ``real`` box for ``Re z`` times ``imag`` box for ``Im z``."""

    real: GridBox
    imag: GridBox

    def __post_init__(self):
        if self.real.n != self.imag.n:
            raise ValueError("real and imaginary boxes differ in dimension")

    @property
    def n(self) -> int:
        return self.real.n

    @classmethod
    def square(cls, half_width: float, step: float, n: int = 1) -> "ComplexProbe":
        box = GridBox(half_width, step, n)
        return cls(box, box)

    def to_dict(self) -> dict:
        return {"real": self.real.to_dict(), "imag": self.imag.to_dict()}


@dataclass(frozen=True)
class SeminormEstimate:
    functional: str
    value: float
    log_value: float
    argmax: tuple | None
    multi_index: tuple | None
    boundary_attained: bool
    probe: dict
    profile: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmax"] = None if self.argmax is None else list(self.argmax)
        d["multi_index"] = None if self.multi_index is None else [list(a) if isinstance(a, tuple)
                                                                   else a for a in self.multi_index]
        d["profile"] = [list(p) for p in self.profile]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SeminormEstimate":
        mi = d.get("multi_index")
        if mi is not None:
            mi = tuple(tuple(a) if isinstance(a, list) else a for a in mi)
        return cls(d["functional"], d["value"], d["log_value"],
                   None if d["argmax"] is None else tuple(d["argmax"]), mi,
                   d["boundary_attained"], d["probe"],
                   tuple(tuple(p) for p in d.get("profile", ())), dict(d.get("diagnostics", {})))


def _estimate(name, log_terms, coords, probe_dict, edge_fn, profile=(),
              diagnostics=None) -> SeminormEstimate:
    """Reduce a log-term array; ``coords`` maps a full index to ``(point, multi_index)``."""
    diagnostics = diagnostics or {}
    flat = log_terms.ravel()
    if flat.size == 0 or not np.any(flat > -np.inf):
        return SeminormEstimate(name, 0.0, -math.inf, None, None, False, probe_dict, profile,
                                diagnostics)
    i = int(np.argmax(flat))
    idx = np.unravel_index(i, log_terms.shape)
    log_value = float(flat[i])
    point, mi = coords(idx)
    with np.errstate(over="ignore"):
        value = float(np.exp(log_value))
    return SeminormEstimate(name, value, log_value, point, mi, bool(edge_fn(idx)), probe_dict,
                            profile, diagnostics)


def _log_norm1p(mesh: np.ndarray) -> np.ndarray:
    return np.log1p(np.sqrt(np.sum(np.abs(mesh) ** 2, axis=-1)))


# -- complex-box functionals --------------------------------------------------

@lru_cache(maxsize=8)
def _complex_base(f, probe: ComplexProbe):
    n = probe.n
    axes = probe.real.axes() + probe.imag.axes()
    mesh = np.meshgrid(*axes, indexing="ij")
    z = np.stack([mesh[i] + 1j * mesh[n + i] for i in range(n)], axis=-1)
    absy = np.stack([np.abs(mesh[n + i]) for i in range(n)], axis=-1)
    logf = f.log_abs(z)
    return logf, _log_norm1p(z), absy


def _complex_coords(probe: ComplexProbe):
    axes = probe.real.axes() + probe.imag.axes()
    n = probe.n

    def coords(idx):
        vals = [float(axes[j][idx[j]]) for j in range(2 * n)]
        return tuple(vals), None

    def edge(idx):
        return probe.real.on_boundary(idx[:n]) or probe.imag.on_boundary(idx[n:])

    return coords, edge


def p_seminorm(f, phi: WeightFunction, k: int, probe: ComplexProbe) -> SeminormEstimate:
    """Grid maximum of ``|f(z)| (1+|z|)^k exp(-phi(|Im z_1|, ..., |Im z_n|))``.

    ``argmax`` is reported as ``(Re z_1, ..., Re z_n, Im z_1, ..., Im z_n)``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    logf, lnorm, absy = _complex_base(f, probe)
    terms = logf + k * lnorm - phi.evaluator(absy)
    coords, edge = _complex_coords(probe)
    return _estimate("p", terms, coords, probe.to_dict(), edge)


def psi_biconjugate(psi: WeightFunction, s_max: float, step: float = 1 / 64,
                    t_min: float = -8.0) -> tuple[SampledFunction, float]:
    """``(psi*)*`` on ``[t_min, ceil(s_max) + 1]^n`` and its largest deviation from ``psi``."""
    n = psi.n
    if n > 1:
        step = max(step, 1 / 16)
    hi = math.ceil(s_max) + 1.0
    axis = step * np.arange(round(t_min / step), round(hi / step) + 1, dtype=float)
    sample = SampledFunction.from_callable(psi.evaluator, [axis] * n)
    bic = biconjugate(sample)
    dev = float(np.max(np.abs(bic.values - sample.values)))
    return bic, dev


def _interp_weight(bic: SampledFunction, s: np.ndarray) -> np.ndarray:
    for i, a in enumerate(bic.axes):
        if np.any(s[..., i] < a[0]) or np.any(s[..., i] > a[-1]):
            raise ValueError("biconjugate range insufficient for the probe")
    if bic.n == 1:
        return np.interp(s[..., 0], bic.axes[0], bic.values)
    return RegularGridInterpolator(bic.axes, bic.values)(s)


def h_seminorm(f, psi: WeightFunction, k: int, probe: ComplexProbe,
               bic: SampledFunction | None = None) -> SeminormEstimate:
    """Grid maximum of ``|f(z)| (1+|z|)^k exp(-(psi*)*(ln(1+|Im z_1|), ...))``."""
    logf, lnorm, absy = _complex_base(f, probe)
    s = np.log1p(absy)
    diagnostics = {}
    if bic is None:
        bic, dev = psi_biconjugate(psi, float(np.max(s)))
        diagnostics["biconjugate_deviation"] = dev
    terms = logf + k * lnorm - _interp_weight(bic, s)
    coords, edge = _complex_coords(probe)
    return _estimate("h", terms, coords, probe.to_dict(), edge, diagnostics=diagnostics)


# -- real-box functionals -----------------------------------------------------

def _real_mesh(probe: GridBox) -> np.ndarray:
    return np.stack(np.meshgrid(*probe.axes(), indexing="ij"), axis=-1)


def _log_factorial(alphas) -> np.ndarray:
    return np.array([float(np.sum(gammaln(np.asarray(a) + 1.0))) for a in alphas])


def _table_column(table: ConjugateTable, alphas) -> np.ndarray:
    vals = np.array([table[a] for a in alphas], dtype=float)
    # inconclusive entries cannot contribute
    return np.where(np.isnan(vals), -np.inf, vals)


def _order_profile(terms: np.ndarray, alphas) -> tuple:
    per = terms.reshape(len(alphas), -1).max(axis=1)
    best: dict[int, float] = {}
    for a, v in zip(alphas, per):
        o = int(sum(a))
        best[o] = max(best.get(o, -math.inf), float(v))
    return tuple((o, best[o]) for o in sorted(best))


def r_term(f, table: ConjugateTable, m: int, x, alpha) -> float:
    """One term ``(1+|x|)^m |D^alpha f(x)| e^{psi*(alpha)} / alpha!`` in linear space."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    weight = math.exp(table[alpha] - float(_log_factorial([alpha])[0]))
    return (1.0 + float(np.linalg.norm(x))) ** m * abs(f.derivative(alpha, x)) * weight


@lru_cache(maxsize=32)
def _log_derivs(f, alphas: tuple, probe: GridBox) -> np.ndarray:
    return f.log_abs_derivative_grid(list(alphas), probe.axes())


def r_seminorm(f, table: ConjugateTable, m: int, probe: GridBox, alpha_max: int) -> SeminormEstimate:
    alphas = table.indices(alpha_max)
    logd = _log_derivs(f, tuple(alphas), probe)
    shape = (len(alphas),) + (1,) * probe.n
    c = (_table_column(table, alphas) - _log_factorial(alphas)).reshape(shape)
    terms = logd + m * _log_norm1p(_real_mesh(probe))[None] + c
    axes = probe.axes()

    def coords(idx):
        return tuple(float(axes[j][idx[1 + j]]) for j in range(probe.n)), (alphas[idx[0]],)

    def edge(idx):
        return probe.on_boundary(idx[1:]) or sum(alphas[idx[0]]) == alpha_max

    return _estimate("r", terms, coords, {**probe.to_dict(), "alpha_max": alpha_max, "m": m},
                     edge, profile=_order_profile(terms, alphas))


def _log_monomials(mesh: np.ndarray, betas) -> np.ndarray:
    """``ln|x^beta|`` for each beta on the grid (``0 ln 0 = 0``)."""
    with np.errstate(divide="ignore"):
        logx = np.log(np.abs(mesh))
    out = np.zeros((len(betas),) + mesh.shape[:-1])
    for j, b in enumerate(betas):
        acc = np.zeros(mesh.shape[:-1])
        for i, bi in enumerate(b):
            if bi:
                acc = acc + bi * logx[..., i]
        out[j] = acc
    return out


def g_norm(f_hat, table: ConjugateTable, m: int, probe: GridBox, beta_max: int) -> SeminormEstimate:
    """Grid maximum of ``|x^beta D^alpha f_hat(x)| e^{psi*(beta)} / beta!``, ``|alpha| <= m``."""
    alphas = multi_indices(probe.n, m)
    betas = table.indices(beta_max)
    logd = _log_derivs(f_hat, tuple(alphas), probe)
    best_alpha = np.argmax(logd, axis=0)
    lmax = np.max(logd, axis=0)
    mesh = _real_mesh(probe)
    c = (_table_column(table, betas) - _log_factorial(betas)).reshape((len(betas),) + (1,) * probe.n)
    terms = lmax[None] + _log_monomials(mesh, betas) + c
    axes = probe.axes()

    def coords(idx):
        x_idx = idx[1:]
        point = tuple(float(axes[j][x_idx[j]]) for j in range(probe.n))
        return point, (alphas[int(best_alpha[x_idx])], betas[idx[0]])

    def edge(idx):
        return probe.on_boundary(idx[1:]) or sum(betas[idx[0]]) == beta_max

    return _estimate("g", terms, coords,
                     {**probe.to_dict(), "beta_max": beta_max, "m": m}, edge,
                     profile=_order_profile(terms, betas))


def phi_star_on_probe(phi: WeightFunction, probe: GridBox) -> SampledFunction:
    """``phi*`` sampled exactly on the nonnegative nodes of ``probe``.

    ``phi`` is sampled on a box wide enough that its finite-difference slopes
    along every axis reach the largest probe coordinate.
    """
    n = phi.n
    xmax = probe.half_width
    nodes = 4001 if n == 1 else 401
    Y = 1.0
    for _ in range(40):
        axis = np.linspace(-Y, Y, nodes)
        h = axis[1] - axis[0]
        ok = True
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            slope = (float(phi.evaluator(Y * e)) - float(phi.evaluator((Y - h) * e))) / h
            ok = ok and slope > xmax
        if ok:
            break
        Y *= 2.0
    else:
        raise ValueError("phi grows too slowly for the probe: phi* range insufficient")
    sample = SampledFunction.from_callable(phi.evaluator, [axis] * n)
    dual = [probe.nonnegative_axis()] * n
    return conjugate_nd(sample, dual)


def _lookup(phi_star: SampledFunction, absx: np.ndarray) -> np.ndarray:
    for i, a in enumerate(phi_star.axes):
        if np.any(absx[..., i] < a[0] - 1e-12) or np.any(absx[..., i] > a[-1] + 1e-12):
            raise ValueError("phi* range insufficient for the probe")
    if phi_star.n == 1:
        return np.interp(absx[..., 0], phi_star.axes[0], phi_star.values)
    return RegularGridInterpolator(phi_star.axes, phi_star.values)(absx)


def gs_seminorm(f, phi_star: SampledFunction, m: int, probe: GridBox) -> SeminormEstimate:
    """Grid maximum of ``|D^alpha f(x)| exp(phi*(|x_1|, ..., |x_n|))``, ``|alpha| <= m``."""
    alphas = multi_indices(probe.n, m)
    logd = _log_derivs(f, tuple(alphas), probe)
    weight = _lookup(phi_star, np.abs(_real_mesh(probe)))
    terms = logd + weight[None]
    axes = probe.axes()

    def coords(idx):
        return tuple(float(axes[j][idx[1 + j]]) for j in range(probe.n)), (alphas[idx[0]],)

    return _estimate("gs", terms, coords, {**probe.to_dict(), "m": m},
                     lambda idx: probe.on_boundary(idx[1:]))


def finite_evidence(estimates, rtol: float = 1e-9) -> bool:
    """Interior argmax on every box and values unchanged as the box grows."""
    if not estimates:
        return False
    if any(e.boundary_attained or not math.isfinite(e.value) for e in estimates):
        return False
    v0 = estimates[0].value
    return all(abs(e.value - v0) <= rtol * max(abs(v0), 1e-300) for e in estimates)
