"""Probe grids shared by the condition checkers and seminorm evaluators.

Nodes are generated as ``(i / refine) * step`` with integer ``i`` so that a
node shared by two nested grids is bit-identical in both.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import product

import numpy as np


@dataclass(frozen=True)
class GridBox:
    """Symmetric box ``[-half_width, half_width]^n`` sampled with a uniform step."""

    half_width: float
    step: float
    n: int = 1
    refine: int = 1

    def __post_init__(self):
        if self.half_width <= 0 or self.step <= 0:
            raise ValueError("half_width and step must be positive")
        if self.n < 1:
            raise ValueError("dimension must be positive")
        ratio = self.half_width / self.step
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(
                f"half_width {self.half_width} is not a multiple of step {self.step}"
            )

    @property
    def count(self) -> int:
        return int(round(self.half_width / self.step)) * self.refine

    def axis(self) -> np.ndarray:
        i = np.arange(-self.count, self.count + 1, dtype=float)
        return (i / self.refine) * self.step

    def axes(self) -> tuple[np.ndarray, ...]:
        a = self.axis()
        return tuple(a for _ in range(self.n))

    def nonnegative_axis(self) -> np.ndarray:
        a = self.axis()
        return a[self.count:]

    def points(self) -> np.ndarray:
        """All grid nodes as an ``(N, n)`` array in lexicographic order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def on_boundary(self, index: tuple[int, ...]) -> bool:
        last = 2 * self.count
        return any(i == 0 or i == last for i in index)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class NestedGrid:
    """A sequence of boxes, each containing every node of the previous one."""

    boxes: tuple[float, ...]
    step: float
    n: int = 1
    refine: tuple[int, ...] | None = None

    def __post_init__(self):
        boxes = tuple(float(b) for b in self.boxes)
        object.__setattr__(self, "boxes", boxes)
        if not boxes:
            raise ValueError("need at least one box")
        refine = self.refine or tuple(1 for _ in boxes)
        object.__setattr__(self, "refine", tuple(int(r) for r in refine))
        if len(self.refine) != len(boxes):
            raise ValueError("refine must have one entry per box")
        for j in range(1, len(boxes)):
            if boxes[j] < boxes[j - 1]:
                raise ValueError(f"probe grids are not nested: box {boxes[j]} < {boxes[j - 1]}")
            if self.refine[j] % self.refine[j - 1] != 0:
                raise ValueError("probe grids are not nested: refinement factors must divide")
        # GridBox validates that every half width is a multiple of the step
        self.levels()

    @classmethod
    def from_points(cls, boxes, points: int, n: int = 1) -> "NestedGrid":
        """Step fixed by ``points`` nodes per axis on the first box."""
        if points < 3 or points % 2 == 0:
            raise ValueError("points per axis must be odd and >= 3 so that 0 is a node")
        boxes = tuple(float(b) for b in boxes)
        return cls(boxes, 2.0 * boxes[0] / (points - 1), n)

    def levels(self) -> list[GridBox]:
        return [GridBox(b, self.step, self.n, r) for b, r in zip(self.boxes, self.refine)]

    def to_dict(self) -> dict:
        return {"boxes": list(self.boxes), "step": self.step, "n": self.n,
                "refine": list(self.refine)}

    @classmethod
    def from_dict(cls, d: dict) -> "NestedGrid":
        return cls(tuple(d["boxes"]), d["step"], d.get("n", 1),
                   tuple(d["refine"]) if d.get("refine") else None)


def default_condition_grid(n: int) -> NestedGrid:
    """T in {5, 10, 20}; 201 nodes per axis on the first box (41 when n = 3)."""
    points = 201 if n <= 2 else 41
    return NestedGrid.from_points((5.0, 10.0, 20.0), points, n)


def multi_indices(n: int, max_order: int) -> list[tuple[int, ...]]:
    """All multi-indices with total order ``<= max_order``, graded then lexicographic."""
    out = []
    for total in range(max_order + 1):
        for alpha in product(range(total + 1), repeat=n):
            if sum(alpha) == total:
                out.append(alpha)
    return out
