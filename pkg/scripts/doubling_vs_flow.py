"""Compare doubling iterates with the flow sampled at t = 2^(k-1).

Runs on the seeded n = 4 NME test problem by default, or on a problem
JSON given with --input.
"""

import argparse

from riccati_flow import io
from riccati_flow.experiments import nme_test_problem
from riccati_flow.flow import sample_doubling


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--input", help="problem JSON (dare, nme or care)")
    ap.add_argument("--kmax", type=int, default=6)
    args = ap.parse_args()

    problem = io.problem_from_dict(io.load_json(args.input)) if args.input else nme_test_problem()
    print(f"{'k':>3} {'t':>6} {'X11':>10} {'X12':>10} {'X21':>10} {'X22':>10}  status")
    for r in sample_doubling(problem, kmax=args.kmax):
        d = [r.diffs.get(b, float("nan")) for b in ("X11", "X12", "X21", "X22")]
        print(f"{r.k:>3} {r.t:>6g} " + " ".join(f"{v:10.2e}" for v in d) + f"  {r.status}")


if __name__ == "__main__":
    main()
