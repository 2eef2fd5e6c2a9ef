#!/usr/bin/env python3
"""Planar-swimmer cross-check between the 2-D and 3-D solvers.

Both engines advance the same developed (spun-up) planar state; the table
reports the final centre-of-mass discrepancy, its per-step share, and the
wall-time ratio.  The discrepancy should sit at accumulated rounding level.
"""

import argparse
import csv
import dataclasses
import pathlib

import numpy as np

from rodfem import (SimConfig, builtin_scenario, embed_in_space, run, run2d,
                    spun_up_state_2d, step_count, uniform_mesh)


def parse_levels(text):
    lo, _, hi = text.partition("..")
    return range(int(lo), int(hi or lo) + 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", default="0..3", type=parse_levels)
    ap.add_argument("--out", default=None, type=pathlib.Path,
                    help="directory for compare.csv")
    args = ap.parse_args()

    scenario = builtin_scenario("worm2d")
    rows = []
    print(f"{'level':>5} {'dt':>10} {'n':>5} {'com gap':>11} {'per step':>11} "
          f"{'t2d':>7} {'t3d':>7} {'ratio':>6}")
    for level in args.levels:
        cfg2 = SimConfig(scenario, n_vertices=2 ** (4 + level),
                         dt=4.0 ** (-level), dimension=2)
        cfg3 = dataclasses.replace(cfg2, dimension=3)
        planar0 = spun_up_state_2d(cfg2)
        spatial0 = embed_in_space(uniform_mesh(cfg2.n_vertices), planar0)
        res2 = run2d(cfg2, state=planar0)
        res3 = run(cfg3, state=spatial0)
        com2 = np.zeros(3)
        com2[:2] = res2.records[-1].com[:2]
        gap = float(np.linalg.norm(np.asarray(res3.records[-1].com) - com2))
        steps = step_count(cfg2.scenario.t_final, cfg2.dt)
        row = {
            "dt": cfg2.dt,
            "n_vertices": cfg2.n_vertices,
            "com_difference": gap,
            "com_difference_per_step": gap / steps,
            "time_2d": res2.wall_time,
            "time_3d": res3.wall_time,
            "time_ratio": res3.wall_time / max(res2.wall_time, 1e-9),
        }
        rows.append(row)
        print(f"{level:>5} {cfg2.dt:>10.6f} {cfg2.n_vertices:>5} "
              f"{gap:>11.3e} {row['com_difference_per_step']:>11.3e} "
              f"{res2.wall_time:>6.1f}s {res3.wall_time:>6.1f}s "
              f"{row['time_ratio']:>6.2f}")

    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "compare.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v
                                 for k, v in row.items()})
        print(f"table written to {path}")


if __name__ == "__main__":
    main()
