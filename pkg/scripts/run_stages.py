"""Run the seven-DGU plug-and-play experiment and print a stage summary.

    python scripts/run_stages.py [--mode unit_gain] [--out runs/stages]
"""
import argparse
import time
from pathlib import Path

import numpy as np

from mgconsensus import builtin_stage_scenario, evaluate, simulate
from mgconsensus.scenario import STAGE_TIMES


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", default="first_order", choices=("first_order", "unit_gain"))
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--out")
    args = ap.parse_args()

    sc = builtin_stage_scenario(mode=args.mode)
    t0 = time.perf_counter()
    tr = simulate(sc, dt=args.dt)
    print(f"{len(tr.t)} samples in {time.perf_counter() - t0:.2f} s")

    probes = [t - 0.01 for t in STAGE_TIMES.values()] + [tr.t[-1]]
    print(f"{'t [s]':>7} " + " ".join(f"{'It_' + str(i):>8}" for i in tr.ids) + f" {'<V>':>9} {'cs_err':>9}")
    for t in probes:
        k = tr.at(t)
        cur = " ".join(f"{x:8.3f}" if np.isfinite(x) else f"{'-':>8}" for x in tr.It[k])
        print(f"{tr.t[k]:7.2f} {cur} {tr.Vavg[k]:9.5f} {tr.cs_error[k]:9.2e}")
    for r in evaluate(tr, sc):
        print(r)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "trace.csv", "w", newline="") as fh:
            tr.write_csv(fh)


if __name__ == "__main__":
    main()
