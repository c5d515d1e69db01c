"""Run the four built-in cases and print headline errors per method.

    python3 scripts/reproduce_cases.py [--cases case1,case3] [--mc-runs N] [--out results]
"""

import argparse
import logging
import os

import numpy as np

from attinit import experiments as ex


def headline(res, t_init, t_tail):
    ok = res.errors[res.ok]
    tail = res.t > t_tail
    return (float(ok[:, np.argmin(np.abs(res.t - t_init))].mean()),
            float(ok[:, tail].mean()), float(ok[:, -1].mean()))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cases", default="case1,case2,case3,case4")
    p.add_argument("--mc-runs", type=int)
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    print(f"{'case':<6} {'method':<16} {'@init [deg]':>12} {'last 30 min':>12} {'end [deg]':>12}")
    for name in args.cases.split(","):
        spec = ex.with_overrides(ex.BUILTIN[name], mc_runs=args.mc_runs,
                                 outputs=os.path.join(args.out, name))
        out = ex.run_case(spec, workers=args.workers)
        cfg = spec.scenario
        for res in out.results:
            a, b, c = headline(res, cfg.init_phase, cfg.duration - 1800.0)
            print(f"{name:<6} {res.method.value:<16} {a:12.5f} {b:12.5f} {c:12.5f}")
        for label, runs in out.failures.items():
            print(f"  {label}: {len(runs)} failed runs")


if __name__ == "__main__":
    main()
