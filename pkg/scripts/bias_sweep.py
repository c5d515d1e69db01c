"""Initializer error at the end of the initialization window versus gyro bias.

    python3 scripts/bias_sweep.py [--biases 0.01,0.1,1,10,100] [--duration 5400] [--out results/bias_sweep]

Also prints the constant-bias drift scale |beta| * T / 2 for comparison: a
bias left uncorrected tilts the constructed observations linearly in time, and
the least-squares fit over a window of length T lands near its midpoint.
"""

import argparse
import logging
import math

from attinit import experiments as ex
from attinit.scenario import DEG_PER_HOUR


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--biases", default="0.01,0.1,1,10,100")
    p.add_argument("--duration", type=float)
    p.add_argument("--mc-runs", type=int)
    p.add_argument("--out", default="results/bias_sweep")
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    biases = [float(b) for b in args.biases.split(",")]
    spec = ex.with_overrides(ex.BUILTIN["bias_sweep"], mc_runs=args.mc_runs,
                             outputs=args.out, duration=args.duration)
    out = ex.run_bias_sweep(spec, biases, workers=args.workers)
    T = spec.scenario.init_phase
    print(f"{'bias [deg/h]':>12} {'mean [deg]':>12} {'std [deg]':>12} {'|b|T/2 [deg]':>14}")
    for b, res in zip(biases, out.results):
        e = res.at(T)
        scale = math.degrees(math.sqrt(3) * b * DEG_PER_HOUR * T / 2)
        print(f"{b:12g} {e.mean():12.5f} {e.std(ddof=1) if len(e) > 1 else 0.0:12.5f} {scale:14.5f}")
    for path in out.files.values():
        print(path)


if __name__ == "__main__":
    main()
