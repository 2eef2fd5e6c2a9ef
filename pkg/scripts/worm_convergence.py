#!/usr/bin/env python3
"""Refinement study for the undulatory swimmers.

The planar swimmer runs in the dedicated 2-D solver, the spatial swimmer in
the 3-D one; both use the coupled refinement dt = 4^-level,
vertices = 2^(4+level).  Note the spatial swimmer's measured rate between
the two coarsest levels is inflated by a coarse-time-step transient (see
scripts/coarse_step_transient.py).
"""

import argparse
import pathlib

from rodfem import SimConfig, builtin_scenario, eoc, run, run2d
from rodfem.diagnostics import write_convergence_table


def parse_levels(text):
    lo, _, hi = text.partition("..")
    return range(int(lo), int(hi or lo) + 1)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", choices=["worm2d", "worm3d"])
    ap.add_argument("--levels", default="0..4", type=parse_levels)
    ap.add_argument("--out", default=None, type=pathlib.Path,
                    help="directory for converge.csv")
    args = ap.parse_args()

    scenario = builtin_scenario(args.scenario)
    planar = args.scenario == "worm2d"
    results = {}
    print(f"{'level':>5} {'dt':>10} {'n':>5} {'max F1':>12} {'rate':>8} {'wall':>7}")
    for level in args.levels:
        cfg = SimConfig(scenario, n_vertices=2 ** (4 + level),
                        dt=4.0 ** (-level), dimension=2 if planar else 3)
        res = run2d(cfg) if planar else run(cfg)
        results[level] = res
        errs = [results[l].stats.max_f1 for l in sorted(results)]
        dts = [results[l].config.dt for l in sorted(results)]
        rate = eoc(errs, dts)[-1] if len(errs) > 1 else None
        print(f"{level:>5} {cfg.dt:>10.6f} {cfg.n_vertices:>5} "
              f"{res.stats.max_f1:>12.5e} "
              f"{'' if rate is None else f'{rate:8.5f}':>8} "
              f"{res.wall_time:>6.1f}s")

    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        levels = sorted(results)
        errs = [results[l].stats.max_f1 for l in levels]
        rates = [None] + list(eoc(errs, [results[l].config.dt for l in levels]))
        rows = [
            {
                "dt": results[l].config.dt,
                "n_vertices": results[l].config.n_vertices,
                "max_f1": results[l].stats.max_f1,
                "eoc": rates[i],
                "max_f2": results[l].stats.max_f2,
                "max_f2_increment": results[l].stats.max_f2_increment,
            }
            for i, l in enumerate(levels)
        ]
        write_convergence_table(args.out / "converge.csv", rows)
        print(f"table written to {args.out / 'converge.csv'}")


if __name__ == "__main__":
    main()
