"""Error sequences of the doubling iteration in its three regimes.

quadratic   NME x + 1/x = 3, error against the golden-ratio root
linear      DARE built from two size-one e blocks
oscillatory DARE built from one c block; the iterates keep a bounded
            periodic correction and do not settle

Prints one table per regime: k, error, and the ratio of successive errors.
"""

import argparse
import math

import numpy as np

from riccati_flow.asymptotics import sda_class
from riccati_flow.experiments import dare_from_spec, linear_sda_instance, sda_errors, spec_41
from riccati_flow.linalg import random_instance
from riccati_flow.sda import NmeProblem, run_sda


def table(name, errs, verdict):
    print(f"\n{name} (predicted: {verdict})")
    print(f"{'k':>3} {'error':>12} {'ratio':>10}")
    for k, e in enumerate(errs, start=1):
        r = e / errs[k - 2] if k > 1 and errs[k - 2] > 0 else float("nan")
        print(f"{k:>3} {e:12.4e} {r:10.4f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--kmax", type=int, default=14)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    x = (3 + math.sqrt(5)) / 2
    tr = run_sda(NmeProblem([[1.0]], [[3.0]]), tol=0.0, kmax=8)
    table("quadratic", [abs(r.X[0, 0] - x) for r in tr.records], "quadratic")

    spec, S = linear_sda_instance(args.seed)
    errs, cc, _ = sda_errors(spec, S, kmax=args.kmax)
    table("linear", errs, cc.verdict)

    spec = spec_41("c")
    S = random_instance("symplectic", spec.n, args.seed, scale=0.5)
    cc = sda_class(spec)
    problem, _ = dare_from_spec(spec, S)
    tr = run_sda(problem, tol=0.0, kmax=args.kmax)
    steps = [float(np.linalg.norm(b.Y - a.Y)) for a, b in zip(tr.records, tr.records[1:])]
    table("oscillatory (successive differences of H_k)", steps, cc.verdict)


if __name__ == "__main__":
    main()
