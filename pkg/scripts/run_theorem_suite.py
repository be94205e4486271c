"""Run every claim on the theorem zoo and write reports, a CSV summary and plot series.

    python scripts/run_theorem_suite.py --family power --out results/power
"""

import argparse
import csv
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from wspace.cli import plot_series
from wspace.verify import CLAIMS, run_batch, summary_rows
from wspace.zoo import NON_MEMBERS, THEOREM_MEMBERS


@dataclass
class SuiteConfig:
    family: dict = field(default_factory=lambda: {"kind": "quadratic"})
    functions: tuple = THEOREM_MEMBERS + NON_MEMBERS + ("zero",)
    claims: tuple = CLAIMS
    caps: dict = field(default_factory=dict)
    workers: int = int(os.environ.get("WSPACE_WORKERS", os.cpu_count() or 1))


def write_csv(rows, path):
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="quadratic")
    ap.add_argument("--p", type=float)
    ap.add_argument("--out", default="results/suite")
    args = ap.parse_args()

    family = {"kind": args.family, **({"p": args.p} if args.p else {})}
    cfg = SuiteConfig(family=family)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    reports = run_batch(cfg.claims, cfg.functions, cfg.family, cfg.caps, workers=cfg.workers)
    dicts = [r.to_dict() for r in reports]
    (out / "reports.json").write_text(json.dumps({"config": asdict(cfg), "reports": dicts},
                                                 indent=2, sort_keys=True) + "\n")
    write_csv(summary_rows(reports), out / "summary.csv")
    for stem, rows in sorted(plot_series(dicts).items()):
        write_csv(rows, out / f"{stem}.csv")

    width = max(len(r.function) for r in reports)
    for r in reports:
        print(f"{r.claim:4} {r.function:{width}}  {r.verdict}")


if __name__ == "__main__":
    main()
