"""Trapezoidal Fourier transforms of rapidly decreasing functions.

Convention: ``f^(x) = int f(xi) e^{-i<x, xi>} dxi`` and the inverse carries
``(2 pi)^{-n}``.  For smooth integrands that are negligible on the boundary of
the truncation box the trapezoidal rule converges faster than any power of
the step, so a plain rule at arbitrary targets is used instead of an FFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .zoo import EntireTestFunction


class QuadratureError(ValueError):
    """Raised when a quadrature spec cannot resolve the requested transform."""


@dataclass(frozen=True)
class QuadratureSpec:
    half_width: float
    step: float
    eps_tail: float = 1e-14
    margin: float = 0.0

    @property
    def nodes(self) -> np.ndarray:
        count = int(round(self.half_width / self.step))
        return self.step * np.arange(-count, count + 1, dtype=float)


def _targets(targets, n: int) -> tuple[np.ndarray, tuple]:
    x = np.asarray(targets, dtype=float)
    if n == 1 and (x.ndim < 2 or x.shape[-1] != 1):
        shape = x.shape
        return x.reshape(-1, 1), shape
    if x.shape[-1] != n:
        raise QuadratureError(f"targets of dimension {x.shape[-1]} for a transform on R^{n}")
    return x.reshape(-1, n), x.shape[:-1]


def _as_sampler(g, n):
    if hasattr(g, "evaluate"):
        return lambda pts: np.asarray(g.evaluate(pts), dtype=complex).reshape(pts.shape[:-1])
    return lambda pts: np.asarray(g(pts), dtype=complex).reshape(pts.shape[:-1])


def _face_points(n: int, L: float, samples: int = 21) -> np.ndarray:
    if n == 1:
        return np.array([[-L], [L]])
    inner = np.linspace(-L, L, samples)
    faces = []
    for i in range(n):
        for s in (-L, L):
            mesh = np.meshgrid(*[inner] * (n - 1), indexing="ij")
            cols = [m.ravel() for m in mesh]
            cols.insert(i, np.full(cols[0].shape, s))
            faces.append(np.stack(cols, axis=-1))
    return np.concatenate(faces)


def _moment_weight(pts: np.ndarray, alpha) -> np.ndarray:
    if alpha is None:
        return np.ones(pts.shape[:-1])
    return np.prod(np.abs(pts) ** np.asarray(alpha), axis=-1)


def _boundary_max(sampler, n, L, alpha) -> float:
    pts = _face_points(n, L)
    return float(np.max(np.abs(sampler(pts)) * _moment_weight(pts, alpha)))


def _spectral_width(f, eps: float) -> float:
    """Half width beyond which the transform of ``f`` is below ``eps``."""
    if isinstance(f, EntireTestFunction):
        rates = [a for b in f.blocks for a in b.rate]
        if not rates:
            return 0.0
        a_max = max(rates)
        deg = f.decay_profile()[2]
        return 2.0 * math.sqrt(a_max * (math.log(1.0 / eps) + deg)) + f.frequency_shift()
    if isinstance(f, QuadratureTransform):
        a_min, shift, deg = f.source.decay_profile()
        center = shift / (2.0 * a_min)
        return math.sqrt((math.log(1.0 / eps) + deg) / a_min) + center
    raise QuadratureError("cannot size the step for an opaque integrand; pass a QuadratureSpec")


def auto_spec(f, targets, alpha=None, eps_tail: float = 1e-14) -> QuadratureSpec:
    """Pick a box where ``|xi^alpha f|`` is below ``eps_tail`` and a resolving step."""
    n = f.n
    if isinstance(f, EntireTestFunction) and not f.decaying:
        raise QuadratureError(f"{f.id} does not decay; its transform is not a function")
    sampler = _as_sampler(f, n)
    x, _ = _targets(targets, n)
    L = 2.0
    while _boundary_max(sampler, n, L, alpha) >= eps_tail:
        L *= 1.25
        if L > 1e3:
            raise QuadratureError("integrand does not fall below eps_tail within |xi| <= 1000")
    margin = _spectral_width(f, eps_tail)
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    h_max = math.pi / (xmax + margin + 1.0)
    count = math.ceil(L / h_max)
    return QuadratureSpec(L, L / count, eps_tail, margin)


def _validate(spec: QuadratureSpec, sampler, n, x, alpha) -> None:
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    if spec.step * (xmax + spec.margin) > math.pi * (1 + 1e-12):
        raise QuadratureError(
            f"step {spec.step} too coarse for targets up to {xmax} (margin {spec.margin})")
    edge = _boundary_max(sampler, n, spec.half_width, alpha)
    if edge >= spec.eps_tail:
        raise QuadratureError(
            f"integrand is {edge:.3g} on the box boundary, above eps_tail {spec.eps_tail}")


def _trapezoid(sampler, n, x, alpha, L, h, sign: float) -> np.ndarray:
    count = int(round(L / h))
    nodes = h * np.arange(-count, count + 1, dtype=float)
    w = np.full(len(nodes), h)
    w[0] = w[-1] = h / 2
    mesh = np.stack(np.meshgrid(*[nodes] * n, indexing="ij"), axis=-1)
    vals = sampler(mesh)
    if alpha is not None:
        vals = vals * np.prod((-1j * mesh) ** np.asarray(alpha), axis=-1)
    weights = w
    for _ in range(1, n):
        weights = np.multiply.outer(weights, w)
    vals = vals * weights
    phase = np.exp(sign * 1j * np.multiply.outer(x[:, 0], nodes))
    acc = np.tensordot(phase, vals, axes=([1], [0]))
    for i in range(1, n):
        phase = np.exp(sign * 1j * np.multiply.outer(x[:, i], nodes))
        acc = np.einsum("mj,mj...->m...", phase, acc)
    return acc


def _transform(f, targets, spec, alpha, sign, scale):
    n = f.n if hasattr(f, "n") else 1
    sampler = _as_sampler(f, n)
    x, shape = _targets(targets, n)
    if spec is None:
        spec = auto_spec(f, x, alpha)
    _validate(spec, sampler, n, x, alpha)
    coarse = _trapezoid(sampler, n, x, alpha, spec.half_width, spec.step, sign) * scale
    fine = _trapezoid(sampler, n, x, alpha, spec.half_width, spec.step / 2, sign) * scale
    error = np.abs(fine - coarse) + spec.eps_tail * (2 * spec.half_width) ** n * abs(scale)
    return coarse.reshape(shape), error.reshape(shape)


def fourier_transform(f, targets, spec: QuadratureSpec | None = None):
    """``f^`` at ``targets`` and an error estimate (change under halving the step plus tail)."""
    return _transform(f, targets, spec, None, -1.0, 1.0)


def transform_derivative(f, alpha, targets, spec: QuadratureSpec | None = None):
    """``D^alpha f^(x) = int (-i xi)^alpha f(xi) e^{-i<x, xi>} dxi``."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if all(a == 0 for a in alpha):
        return fourier_transform(f, targets, spec)
    return _transform(f, targets, spec, alpha, -1.0, 1.0)


def inverse_transform(g, targets, spec: QuadratureSpec | None = None, n: int | None = None):
    """``(2 pi)^{-n} int g(x) e^{i<x, xi>} dx`` at ``targets``."""
    n = n or getattr(g, "n", 1)
    return _transform(g if hasattr(g, "n") else _Wrapped(g, n), targets, spec, None, 1.0,
                      (2 * math.pi) ** (-n))


@dataclass(frozen=True)
class _Wrapped:
    func: object
    n: int

    def evaluate(self, pts):
        return self.func(pts)


@dataclass(frozen=True)
class QuadratureTransform:
    """``f^`` computed by quadrature on demand; quacks like a zoo member on R^n."""

    source: EntireTestFunction

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def id(self) -> str:
        return f"Fq[{self.source.id}]"

    def evaluate(self, x):
        return fourier_transform(self.source, x)[0]

    def derivative(self, alpha, x):
        return transform_derivative(self.source, alpha, x)[0]

    def log_abs_derivative_grid(self, alphas, axes) -> np.ndarray:
        axes = [np.asarray(a, dtype=float) for a in axes]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        out = []
        for alpha in alphas:
            vals = transform_derivative(self.source, alpha, mesh)[0]
            with np.errstate(divide="ignore"):
                out.append(np.log(np.abs(vals)))
        return np.array(out)
