"""Discretisation error of the grid conjugate and of the psi* tables.

Prints the max error of the discrete conjugate of y^2/2 against x^2/2 when the
dual nodes fall between primal nodes, for a sequence of node counts, and the
psi* table error for the quadratic family against its closed form.
"""

import math
from dataclasses import dataclass

import numpy as np

from wspace.conjugate import SampledFunction, conjugate_1d, psi_star_table
from wspace.weights import builtin_family


@dataclass
class ConvergenceConfig:
    half_width: float = 5.0
    node_counts: tuple = (101, 201, 401, 801, 1601, 3201)
    table_cap: int = 30


def conjugate_errors(cfg: ConvergenceConfig):
    x = np.linspace(-cfg.half_width / 2, cfg.half_width / 2, 997)
    for nodes in cfg.node_counts:
        y = np.linspace(-cfg.half_width, cfg.half_width, nodes)
        got = conjugate_1d(SampledFunction((y,), y * y / 2), x).values
        h = y[1] - y[0]
        yield nodes, h, float(np.max(np.abs(got - x * x / 2))), h * h / 8


def table_errors(cfg: ConvergenceConfig):
    fam = builtin_family("quadratic")
    for m in range(1, fam.M_max + 1):
        table = psi_star_table(fam.psi(m), cfg.table_cap)
        c = 4.0 ** m
        err = max(abs(table[a] - (a / 2 * math.log(a / (2 * c)) - a / 2))
                  for a in range(1, cfg.table_cap + 1))
        yield m, err


def main():
    cfg = ConvergenceConfig()
    print("nodes  step        max error   h^2/8 bound")
    for nodes, h, err, bound in conjugate_errors(cfg):
        print(f"{nodes:5d}  {h:.3e}   {err:.3e}   {bound:.3e}")
    print("\nm  psi* table error (|alpha| <= %d)" % cfg.table_cap)
    for m, err in table_errors(cfg):
        print(f"{m}  {err:.3e}")


if __name__ == "__main__":
    main()
