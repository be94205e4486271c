"""Explicit entire test functions: sums of polynomial-times-Gaussian blocks.

Every member has the form

    f(z) = sum_b  P_b(z) * exp(sum_i -a_{b,i} z_i^2 + c_{b,i} z_i)

with ``a >= 0`` and complex ``c``.  Derivatives on R^n come from the three-term
recurrence ``h_{j+1} = q' h_j - 2 a j h_{j-1}`` for ``D^j e^q / e^q`` with
``q = -a x^2 + c x``, and Fourier transforms are closed form whenever every
``a`` is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
from numpy.polynomial import hermite as npherm
from numpy.polynomial import polynomial as nppoly

Monomial = tuple[int, ...]


@dataclass(frozen=True)
class Block:
    poly: tuple[tuple[Monomial, complex], ...]
    rate: tuple[float, ...]
    linear: tuple[complex, ...]

    def scaled(self, s: complex) -> "Block":
        return Block(tuple((k, c * s) for k, c in self.poly), self.rate, self.linear)


def _gauss_factor_table(a: float, c: complex, x: np.ndarray, order: int) -> np.ndarray:
    """``h_j(x) = D^j e^q / e^q`` for ``j <= order``, ``q = -a x^2 + c x``."""
    x = np.asarray(x, dtype=float)
    h = np.empty((order + 1,) + x.shape, dtype=complex)
    h[0] = 1.0
    qp = -2.0 * a * x + c
    if order >= 1:
        h[1] = qp
    for j in range(1, order):
        h[j + 1] = qp * h[j] - 2.0 * a * j * h[j - 1]
    return h


def _monomial_factor_table(k: int, a: float, c: complex, x: np.ndarray, order: int) -> np.ndarray:
    """``D^j[x^k e^q] / e^q`` by Leibniz on top of the Gaussian recurrence."""
    h = _gauss_factor_table(a, c, x, order)
    if k == 0:
        return h
    out = np.zeros_like(h)
    for j in range(order + 1):
        for l in range(min(j, k) + 1):
            coef = math.comb(j, l) * math.perm(k, l)
            out[j] += coef * x ** (k - l) * h[j - l]
    return out


@dataclass(frozen=True)
class EntireTestFunction:
    """A zoo member; ``blocks`` determine it completely."""

    tag: str
    n: int
    blocks: tuple[Block, ...]
    params: tuple[tuple[str, float], ...] = ()
    order_cap: int = 60
    member: bool = True

    @property
    def id(self) -> str:
        if not self.params:
            return self.tag
        return self.tag + ":" + ",".join(f"{k}={v:g}" for k, v in self.params)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for b in self.blocks for _, c in b.poly)

    @property
    def decaying(self) -> bool:
        return all(min(b.rate) > 0 for b in self.blocks)

    # -- evaluation on C^n ----------------------------------------------------
    def _coords(self, z) -> np.ndarray:
        z = np.asarray(z)
        if self.n == 1 and (z.ndim == 0 or z.shape[-1] != 1):
            z = z[..., None]
        if z.shape[-1] != self.n:
            raise ValueError(f"point of dimension {z.shape[-1]} given to a function on C^{self.n}")
        return z

    def evaluate(self, z) -> np.ndarray | complex:
        zz = self._coords(z).astype(complex)
        out = np.zeros(zz.shape[:-1], dtype=complex)
        for b in self.blocks:
            q = np.sum(-np.asarray(b.rate) * zz * zz + np.asarray(b.linear) * zz, axis=-1)
            poly = np.zeros_like(out)
            for k, c in b.poly:
                poly = poly + c * np.prod(zz ** np.asarray(k), axis=-1)
            out = out + poly * np.exp(q)
        return complex(out) if out.ndim == 0 else out

    __call__ = evaluate

    def log_abs(self, z) -> np.ndarray:
        """``ln|f(z)|`` with the Gaussian exponents factored out (no overflow)."""
        zz = self._coords(z).astype(complex)
        if self.is_zero:
            return np.full(zz.shape[:-1], -np.inf)
        exps, polys = [], []
        for b in self.blocks:
            q = np.sum(-np.asarray(b.rate) * zz * zz + np.asarray(b.linear) * zz, axis=-1)
            poly = np.zeros(zz.shape[:-1], dtype=complex)
            for k, c in b.poly:
                poly = poly + c * np.prod(zz ** np.asarray(k), axis=-1)
            exps.append(q.real)
            polys.append(poly * np.exp(1j * q.imag))
        top = np.max(exps, axis=0)
        total = sum(p * np.exp(e - top) for p, e in zip(polys, exps))
        with np.errstate(divide="ignore"):
            return top + np.log(np.abs(total))

    # -- derivatives on R^n -------------------------------------------------------
    def _check_order(self, orders) -> None:
        if max(orders, default=0) > self.order_cap:
            raise ValueError(f"derivative order {max(orders)} exceeds cap {self.order_cap}")

    def derivative(self, alpha, x) -> np.ndarray | complex:
        """``D^alpha f`` at real points ``x`` of shape ``(..., n)``."""
        alpha = tuple(int(a) for a in np.atleast_1d(alpha))
        if len(alpha) != self.n:
            raise ValueError("multi-index dimension mismatch")
        self._check_order(alpha)
        x = np.asarray(self._coords(x), dtype=float)
        out = np.zeros(x.shape[:-1], dtype=complex)
        for b in self.blocks:
            q = np.sum(-np.asarray(b.rate) * x * x + np.asarray(b.linear) * x, axis=-1)
            part = np.zeros_like(out)
            for k, c in b.poly:
                term = np.full(x.shape[:-1], c, dtype=complex)
                for i in range(self.n):
                    tab = _monomial_factor_table(k[i], b.rate[i], b.linear[i], x[..., i], alpha[i])
                    term = term * tab[alpha[i]]
                part = part + term
            out = out + part * np.exp(q)
        return complex(out) if out.ndim == 0 else out

    def log_abs_derivative_grid(self, alphas, axes) -> np.ndarray:
        """``ln|D^alpha f|`` on the tensor grid ``axes`` for each multi-index in ``alphas``.

        Returns an array of shape ``(len(alphas), *grid_shape)``.
        """
        axes = [np.asarray(a, dtype=float) for a in axes]
        if len(axes) != self.n:
            raise ValueError("need one axis per dimension")
        alphas = [tuple(int(v) for v in a) for a in alphas]
        top_order = [max((a[i] for a in alphas), default=0) for i in range(self.n)]
        self._check_order(top_order)
        shape = tuple(len(a) for a in axes)
        if self.is_zero:
            return np.full((len(alphas),) + shape, -np.inf)
        exps, sums = [], []
        for b in self.blocks:
            # separable exponent and phase of the block on the grid
            re = np.zeros(shape)
            ph = np.zeros(shape)
            for i, ax in enumerate(axes):
                qi = -b.rate[i] * ax * ax + b.linear[i] * ax
                sl = [None] * self.n
                sl[i] = slice(None)
                re = re + np.real(qi)[tuple(sl)]
                ph = ph + np.imag(qi)[tuple(sl)]
            tabs = [[_monomial_factor_table(k[i], b.rate[i], b.linear[i], axes[i], top_order[i])
                     for i in range(self.n)] for k, _ in b.poly]
            block_vals = np.zeros((len(alphas),) + shape, dtype=complex)
            for j, alpha in enumerate(alphas):
                acc = np.zeros(shape, dtype=complex)
                for (k, c), tab in zip(b.poly, tabs):
                    term = np.asarray(c, dtype=complex)
                    for i in range(self.n):
                        sl = [None] * self.n
                        sl[i] = slice(None)
                        term = term * tab[i][alpha[i]][tuple(sl)]
                    acc = acc + term
                block_vals[j] = acc * np.exp(1j * ph)
            exps.append(re)
            sums.append(block_vals)
        top = np.max(exps, axis=0)
        total = sum(s * np.exp(e - top)[None] for s, e in zip(sums, exps))
        with np.errstate(divide="ignore"):
            return top[None] + np.log(np.abs(total))

    # -- algebra ------------------------------------------------------------------
    def __add__(self, other: "EntireTestFunction") -> "EntireTestFunction":
        if not isinstance(other, EntireTestFunction) or other.n != self.n:
            return NotImplemented
        return EntireTestFunction(f"({self.id})+({other.id})", self.n, self.blocks + other.blocks,
                                  member=self.member and other.member)

    def scale(self, s: complex) -> "EntireTestFunction":
        return EntireTestFunction(f"{s:g}*({self.id})", self.n,
                                  tuple(b.scaled(s) for b in self.blocks), member=self.member)

    __rmul__ = scale

    def decay_profile(self) -> tuple[float, float, int]:
        """``(min rate, max |Re linear| + 0, max polynomial degree)`` used to size boxes."""
        rate = min(min(b.rate) for b in self.blocks) if self.blocks else 1.0
        shift = max((abs(np.real(c)) for b in self.blocks for c in b.linear), default=0.0)
        deg = max((sum(k) for b in self.blocks for k, _ in b.poly), default=0)
        return float(rate), float(shift), int(deg)

    def frequency_shift(self) -> float:
        return max((abs(np.imag(c)) for b in self.blocks for c in b.linear), default=0.0)


# -- closed-form Fourier transforms ---------------------------------------------

def _fourier_axis(k: int, a: float, c: complex) -> tuple[np.ndarray, complex, float, complex]:
    """Transform of ``xi^k e^{-a xi^2 + c xi}`` as ``P(x) * A * exp(-x^2/(4a) + c' x)``.

    Returns ascending polynomial coefficients of ``P`` (already including ``i^k``),
    the constant ``A``, the new rate and the new linear coefficient.
    """
    amp = math.sqrt(math.pi / a) * np.exp(c * c / (4.0 * a))
    new_rate = 1.0 / (4.0 * a)
    new_lin = -1j * c / (2.0 * a)
    qprime = np.array([new_lin, -2.0 * new_rate], dtype=complex)
    p = np.array([1.0 + 0j])
    for _ in range(k):
        p = nppoly.polyadd(nppoly.polyder(p), nppoly.polymul(qprime, p))
    return (1j ** k) * p, complex(amp), new_rate, complex(new_lin)


def fourier_block(b: Block) -> Block:
    n = len(b.rate)
    poly: dict[Monomial, complex] = {}
    new_rate, new_lin = [], []
    amp_total = 1.0 + 0j
    for i in range(n):
        _, amp, r, l = _fourier_axis(0, b.rate[i], b.linear[i])
        new_rate.append(r)
        new_lin.append(l)
        amp_total *= amp
    for k, c in b.poly:
        per_axis = [_fourier_axis(k[i], b.rate[i], b.linear[i])[0] for i in range(n)]
        for powers in product(*[range(len(p)) for p in per_axis]):
            coef = c * amp_total * np.prod([per_axis[i][powers[i]] for i in range(n)])
            if coef != 0:
                poly[powers] = poly.get(powers, 0) + coef
    return Block(tuple(sorted(poly.items())), tuple(new_rate), tuple(new_lin))


def exact_fourier(f: EntireTestFunction) -> EntireTestFunction | None:
    """``f^(x) = int f(xi) e^{-i<x, xi>} dxi`` in closed form, or None when not decaying."""
    if not f.decaying:
        return None
    return EntireTestFunction(f"F[{f.id}]", f.n, tuple(fourier_block(b) for b in f.blocks),
                              member=f.member)


# -- named members -------------------------------------------------------------

def _block(poly: dict, rate, linear) -> Block:
    return Block(tuple(sorted((tuple(k), complex(c)) for k, c in poly.items())),
                 tuple(float(r) for r in rate), tuple(complex(l) for l in linear))


def gaussian(a: float = 1.0, n: int = 1) -> EntireTestFunction:
    """``exp(-a |z|^2)`` (no conjugation: ``sum z_i^2``)."""
    return EntireTestFunction("gaussian", n, (_block({(0,) * n: 1}, [a] * n, [0] * n),),
                              (("a", a),) + ((("n", n),) if n > 1 else ()))


def anisotropic_gaussian(rates) -> EntireTestFunction:
    rates = [float(r) for r in rates]
    n = len(rates)
    return EntireTestFunction("anisotropic", n, (_block({(0,) * n: 1}, rates, [0] * n),),
                              tuple((f"a{i + 1}", r) for i, r in enumerate(rates)))


def moment(k: int, a: float = 1.0) -> EntireTestFunction:
    """``z^k exp(-a z^2)``."""
    return EntireTestFunction("moment", 1, (_block({(k,): 1}, [a], [0]),),
                              (("k", k), ("a", a)))


def hermite(k: int, a: float = 1.0) -> EntireTestFunction:
    """``H_k(z) exp(-a z^2)`` with the physicists' Hermite polynomial ``H_k``."""
    coefs = npherm.herm2poly([0] * k + [1])
    poly = {(j,): float(c) for j, c in enumerate(coefs) if c != 0}
    return EntireTestFunction("hermite", 1, (_block(poly, [a], [0]),), (("k", k), ("a", a)))


def shifted(a: float = 1.0, s: float = 0.5) -> EntireTestFunction:
    """``exp(-a (z - s)^2) = e^{-a s^2} exp(-a z^2 + 2 a s z)``."""
    return EntireTestFunction("shifted", 1, (_block({(0,): math.exp(-a * s * s)}, [a], [2 * a * s]),),
                              (("a", a), ("s", s)))


def modulated(a: float = 1.0, w: float = 1.0) -> EntireTestFunction:
    """``exp(i w z) exp(-a z^2)``."""
    return EntireTestFunction("modulated", 1, (_block({(0,): 1}, [a], [1j * w]),),
                              (("a", a), ("w", w)))


def constant(c: float = 1.0, n: int = 1) -> EntireTestFunction:
    return EntireTestFunction("constant", n, (_block({(0,) * n: c}, [0] * n, [0] * n),),
                              (("c", c),), member=False)


def exponential(c: float = -1.0) -> EntireTestFunction:
    """``exp(c z)``: entire, but decays in no real direction uniformly."""
    return EntireTestFunction("exponential", 1, (_block({(0,): 1}, [0], [c]),), (("c", c),),
                              member=False)


def zero(n: int = 1) -> EntireTestFunction:
    return EntireTestFunction("zero", n, (), ())


@dataclass(frozen=True)
class RationalProbe:
    """``1 / (1 + z^2)``: not entire; only for exercising the Cauchy-Riemann probe."""

    tag: str = "rational"
    n: int = 1
    member: bool = field(default=False)

    @property
    def id(self) -> str:
        return self.tag

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        if z.ndim and z.shape[-1] == 1:
            z = z[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / (1.0 + z * z)


_BUILDERS = {
    "gaussian": (gaussian, {"a": float, "n": int}),
    "anisotropic": (None, {}),
    "moment": (moment, {"k": int, "a": float}),
    "hermite": (hermite, {"k": int, "a": float}),
    "shifted": (shifted, {"a": float, "s": float}),
    "modulated": (modulated, {"a": float, "w": float}),
    "constant": (constant, {"c": float, "n": int}),
    "exponential": (exponential, {"c": float}),
    "zero": (zero, {"n": int}),
    "rational": (None, {}),
}


def _number(text: str) -> float:
    return float(Fraction(text.strip()))


def from_id(spec: str):
    """Parse ids like ``gaussian:a=1``, ``hermite:k=2,a=1`` or ``anisotropic:a1=1,a2=2``."""
    name, _, rest = spec.strip().partition(":")
    if name not in _BUILDERS:
        raise ValueError(f"unknown zoo member {name!r}; known: {sorted(_BUILDERS)}")
    kv = {}
    if rest:
        for part in rest.split(","):
            key, eq, val = part.partition("=")
            if not eq:
                raise ValueError(f"malformed parameter {part!r} in {spec!r}")
            kv[key.strip()] = val.strip()
    if name == "rational":
        return RationalProbe()
    if name == "anisotropic":
        keys = sorted(kv, key=lambda s: int(s[1:]))
        if not keys or any(not k.startswith("a") for k in keys):
            raise ValueError("anisotropic needs parameters a1=..,a2=..")
        return anisotropic_gaussian([_number(kv[k]) for k in keys])
    builder, types = _BUILDERS[name]
    unknown = set(kv) - set(types)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)} for {name}")
    args = {k: (int(_number(v)) if types[k] is int else _number(v)) for k, v in kv.items()}
    return builder(**args)


# Members used by the theorem checks; "slow" decays too slowly for the GS weight at nu = 1.
THEOREM_MEMBERS = ("gaussian:a=1/2", "gaussian:a=1", "gaussian:a=2", "moment:k=1,a=1",
                   "hermite:k=2,a=1")
NON_MEMBERS = ("constant:c=1",)
SLOW_DECAY = "gaussian:a=1/32"


def cauchy_riemann_probe(f, points, h: float = 1e-4) -> np.ndarray:
    """Relative disagreement of the complex difference quotients along ``+1`` and ``+i``.

    For each point and coordinate direction compare central differences in the
    real and imaginary directions; an entire function gives ``O(h^2)`` mismatch.
    Non-finite values (e.g. at a pole) report ``inf``.
    """
    pts = np.asarray(points, dtype=complex)
    n = getattr(f, "n", 1)
    if pts.ndim == 1:
        pts = pts[:, None]
    worst = np.zeros(pts.shape[0])
    with np.errstate(all="ignore"):
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            base = np.asarray(f.evaluate(pts))
            d_re = (np.asarray(f.evaluate(pts + h * e)) - np.asarray(f.evaluate(pts - h * e))) / (2 * h)
            d_im = (np.asarray(f.evaluate(pts + 1j * h * e))
                    - np.asarray(f.evaluate(pts - 1j * h * e))) / (2j * h)
            scale = np.maximum.reduce([np.abs(d_re), np.abs(d_im), np.abs(base),
                                       np.full(len(pts), 1e-300)])
            rel = np.abs(d_re - d_im) / scale
            rel = np.where(np.isfinite(rel), rel, np.inf)
            worst = np.maximum(worst, rel)
    return worst
