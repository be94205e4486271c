"""Verdict and witness for every builtin family and condition, next to the analytic table."""

from dataclasses import dataclass

from wspace.weights import ANALYTIC_VERDICTS, CONDITIONS, builtin_family, check_condition


@dataclass
class SurveyConfig:
    n: int = 1
    members: tuple = (1, 2, 3)


def main():
    cfg = SurveyConfig()
    print(f"{'family':12} {'cond':4} {'m':>2}  {'verdict':12} {'expected':9} witness / trend")
    for kind in sorted(ANALYTIC_VERDICTS):
        fam = builtin_family(kind, n=cfg.n)
        for cid in CONDITIONS:
            for m in cfg.members:
                rep = check_condition(fam, cid, m)
                expected = ANALYTIC_VERDICTS[kind][cid]
                flag = "" if rep.verdict == expected else "  <-- mismatch"
                trend = ", ".join(f"{t:.4g}" for t in rep.margin_trend)
                print(f"{kind:12} {cid:4} {m:2d}  {rep.verdict:12} {expected:9} "
                      f"{rep.witness:.4g} / [{trend}]{flag}")


if __name__ == "__main__":
    main()
