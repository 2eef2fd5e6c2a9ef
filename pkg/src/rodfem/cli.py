"""Command-line front end.

Three subcommands cover the standard studies:

* ``run`` — advance one simulation and export per-step diagnostics plus
  state snapshots;
* ``converge`` — the coupled refinement study (time step divided by four,
  vertex count doubled per level) with a length-error convergence table;
* ``compare2d3d`` — drive the planar solver and the spatial solver from the
  same developed planar state and report how far their centers of mass
  drift apart, along with the cost ratio.

Runs are described by a flat, UTF-8 text config of ``section.key = value``
lines ('#' starts a comment).  Unknown keys are rejected by name so typos
fail loudly rather than silently running defaults.

Exit codes: 0 on success, 2 for configuration problems (the message names
the offending field), 3 when the linear algebra or the geometry breaks down
mid-run.
"""

import argparse
import csv
import dataclasses
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .diagnostics import (
    curvature_components,
    write_convergence_table,
    write_diagnostics,
    write_kymograph,
    write_snapshot,
)
from .engine3d import SimConfig, run, step_count
from .errors import (
    ConfigError,
    InvalidMeshError,
    InvalidParameterError,
    RodfemError,
)
from .geometry import averaged_tangent, element_tangents, perp, uniform_mesh
from .materials import IsotropicDrag, ResistiveForceDrag
from .scenarios import Scenario, builtin_scenario, compile_expr
from .solver2d import embed_in_space, run2d, spun_up_state_2d


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------

_PRESET_NAMES = ("relaxation", "worm2d", "worm3d")

# key -> parser tag: str / expr (kept raw), float, int, bool, profile
_KNOWN_KEYS = {
    "scenario.name": "str",
    "scenario.alpha0": "expr",
    "scenario.beta0": "expr",
    "scenario.gamma0": "expr",
    "scenario.spin_up": "float",
    "scenario.length": "float",
    "material.epsilon": "float",
    "material.bend_stiffness": "profile",
    "material.bend_viscosity": "profile",
    "material.twist_stiffness": "profile",
    "material.twist_viscosity": "profile",
    "material.rotary_drag": "float",
    "drag.kind": "str",
    "drag.k": "float",
    "run.dt": "float",
    "run.n_vertices": "int",
    "run.t_final": "float",
    "run.dimension": "int",
    "run.residual_tol": "float",
    "frame.renormalize_every": "int",
    "frame.renormalize_threshold": "float",
    "output.snapshot_stride": "int",
    "output.kymograph": "bool",
}


def parse_config(path) -> dict:
    """Read a flat dotted-key config file into {key: raw string value}."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"--config: cannot read '{path}' ({exc})") from exc

    cfg = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got '{body}'"
            )
        key, _, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key '{key}'")
        if key in cfg:
            raise ConfigError(f"{path}:{lineno}: duplicate config key '{key}'")
        if not value:
            raise ConfigError(f"{path}:{lineno}: empty value for '{key}'")
        cfg[key] = value
    return cfg


def _get(cfg, key, default=None):
    """Typed lookup of a config value; errors name the key."""
    if key not in cfg:
        return default
    raw = cfg[key]
    tag = _KNOWN_KEYS[key]
    try:
        if tag == "float":
            return float(raw)
        if tag == "int":
            return int(raw)
        if tag == "bool":
            lowered = raw.lower()
            if lowered in ("true", "yes", "on", "1"):
                return True
            if lowered in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        return raw  # str / expr / profile stay raw here
    except ValueError:
        raise ConfigError(f"{key}: cannot parse '{raw}' as {tag}") from None


def _profile_of(cfg, key):
    """A material profile: plain number, or an expression in u."""
    raw = cfg[key]
    try:
        return float(raw)
    except ValueError:
        pass
    try:
        f = compile_expr(raw)
    except ConfigError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return lambda u, _f=f: _f(u, 0.0)


def build_scenario(cfg) -> Scenario:
    """Construct the scenario a config describes, overrides applied."""
    name = _get(cfg, "scenario.name")
    if name is None:
        raise ConfigError("scenario.name is required")

    eps = _get(cfg, "material.epsilon", 0.05)
    if name in _PRESET_NAMES:
        try:
            scn = builtin_scenario(name, eps=eps)
        except (InvalidParameterError, ConfigError) as exc:
            raise ConfigError(f"material.epsilon: {exc}") from None
    elif name == "custom":
        if "scenario.alpha0" not in cfg:
            raise ConfigError(
                "scenario.alpha0 is required when scenario.name = custom"
            )
        scn = Scenario(
            name="custom",
            kappa1_pref=compile_expr(cfg["scenario.alpha0"]),
            kappa2_pref=compile_expr(cfg.get("scenario.beta0", "0")),
            twist_pref=compile_expr(cfg.get("scenario.gamma0", "0")),
        )
    else:
        raise ConfigError(
            f"scenario.name: unknown scenario '{name}' "
            f"(expected one of {', '.join(_PRESET_NAMES)}, or custom)"
        )

    # field overrides are honored for presets too, so small variations of
    # the bundled studies need no custom scenario
    if name != "custom":
        for key, attr in (("scenario.alpha0", "kappa1_pref"),
                          ("scenario.beta0", "kappa2_pref"),
                          ("scenario.gamma0", "twist_pref")):
            if key in cfg:
                try:
                    scn = dataclasses.replace(scn, **{attr: compile_expr(cfg[key])})
                except ConfigError as exc:
                    raise ConfigError(f"{key}: {exc}") from None

    material_keys = {
        "material.bend_stiffness": "bend_stiffness",
        "material.bend_viscosity": "bend_viscosity",
        "material.twist_stiffness": "twist_stiffness",
        "material.twist_viscosity": "twist_viscosity",
        "material.rotary_drag": "rotary_drag",
    }
    updates = {}
    for key, attr in material_keys.items():
        if key in cfg:
            if attr == "rotary_drag":
                updates[attr] = _get(cfg, key)
            else:
                updates[attr] = _profile_of(cfg, key)
    if updates:
        try:
            scn = dataclasses.replace(
                scn, material=dataclasses.replace(scn.material, **updates)
            )
        except InvalidParameterError as exc:
            raise ConfigError(f"material: {exc}") from None

    if "drag.kind" in cfg or "drag.k" in cfg:
        kind = _get(cfg, "drag.kind")
        if kind is None:
            kind = "rft" if isinstance(scn.drag, ResistiveForceDrag) else "isotropic"
        try:
            if kind == "rft":
                drag = ResistiveForceDrag(_get(cfg, "drag.k", 40.0))
            elif kind == "isotropic":
                drag = IsotropicDrag(_get(cfg, "drag.k", 1.0) * np.eye(3))
            else:
                raise ConfigError(
                    f"drag.kind: expected 'isotropic' or 'rft', got '{kind}'"
                )
        except InvalidParameterError as exc:
            raise ConfigError(f"drag.k: {exc}") from None
        scn = dataclasses.replace(scn, drag=drag)

    for key, attr in (("scenario.spin_up", "spin_up"),
                      ("scenario.length", "length"),
                      ("run.t_final", "t_final")):
        if key in cfg:
            scn = dataclasses.replace(scn, **{attr: _get(cfg, key)})
    if scn.length <= 0.0:
        raise ConfigError(f"scenario.length must be positive, got {scn.length}")
    if scn.spin_up < 0.0:
        raise ConfigError(f"scenario.spin_up must be >= 0, got {scn.spin_up}")
    if scn.t_final <= 0.0:
        raise ConfigError(f"run.t_final must be positive, got {scn.t_final}")
    return scn


def build_sim_config(cfg, scenario, args, n_vertices=None, dt=None) -> SimConfig:
    """SimConfig from the run/frame/output sections (levels may override)."""
    renorm_every = _get(cfg, "frame.renormalize_every", 0)
    if getattr(args, "renormalize_frame", False) and renorm_every == 0:
        renorm_every = 1
    try:
        return SimConfig(
            scenario=scenario,
            n_vertices=n_vertices if n_vertices is not None
            else _get(cfg, "run.n_vertices", 16),
            dt=dt if dt is not None else _get(cfg, "run.dt", 1.0),
            dimension=_get(cfg, "run.dimension", 3),
            renormalize_every=renorm_every,
            renormalize_threshold=_get(cfg, "frame.renormalize_threshold", 0.0),
            snapshot_stride=_get(cfg, "output.snapshot_stride", 0),
            residual_tol=_get(cfg, "run.residual_tol", 1e-10),
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"run: {exc}") from None


# ---------------------------------------------------------------------------
# shared output helpers
# ---------------------------------------------------------------------------


def _drive(sim: SimConfig, state=None):
    """Dispatch to the solver the config's dimension selects."""
    if sim.dimension == 2:
        return run2d(sim, state=state)
    return run(sim, state=state)


def _snapshot_files(out_dir, mesh, step, state):
    """Write snap_<step>.csv / snapel_<step>.csv; returns their names."""
    vname, ename = f"snap_{step}.csv", f"snapel_{step}.csv"
    planar = state.x.shape[1] == 2
    if planar:
        tau, _ = element_tangents(mesh, state.x)
        nu = perp(averaged_tangent(tau))
        write_snapshot(out_dir / vname, out_dir / ename, mesh, state.x, nu,
                       None, state.kappa, None, None, None, state.tension)
    else:
        write_snapshot(out_dir / vname, out_dir / ename, mesh, state.x,
                       state.e1, state.e2, state.kappa, state.spin,
                       state.twist, state.twist_moment, state.tension)
    return vname, ename


def _kymograph_samples(mesh, snapshots):
    samples = []
    for step in sorted(snapshots):
        st = snapshots[step]
        if st.x.shape[1] == 2:
            tau, _ = element_tangents(mesh, st.x)
            nu = perp(averaged_tangent(tau))
            alpha = np.einsum("nd,nd->n", st.kappa, nu)
            samples.append({"t": st.t, "alpha": alpha,
                            "beta": np.zeros_like(alpha), "gamma": None})
        else:
            alpha, beta = curvature_components(st.kappa, st.e1, st.e2)
            samples.append({"t": st.t, "alpha": alpha, "beta": beta,
                            "gamma": st.twist})
    return samples


def _write_manifest(out_dir, args, cfg, outputs, timings) -> None:
    manifest = {
        "command": f"rodfem {args.command}",
        "version": __version__,
        "platform": {
            "python": platform.python_version(),
            "system": platform.platform(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "seed": getattr(args, "seed", None),
        "config_file": str(args.config),
        "config": dict(cfg),
        "outputs": outputs,
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _parse_levels(text: str):
    """Parse --levels 'L0..L1' (or a single 'L') into an inclusive range."""
    parts = text.split("..")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError(text)
    except ValueError:
        raise ConfigError(
            f"--levels: expected 'L0..L1' with integers, got '{text}'"
        ) from None
    if lo < 0 or hi < lo:
        raise ConfigError(f"--levels: need 0 <= L0 <= L1, got '{text}'")
    return lo, hi


def _level_params(level: int):
    """Coupled refinement: quarter the step, double the vertex count."""
    return 4.0 ** (-level), 2 ** (4 + level)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    scenario = build_scenario(cfg)
    sim = build_sim_config(cfg, scenario, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    result = _drive(sim)
    mesh = uniform_mesh(sim.n_vertices)

    write_diagnostics(out_dir / "diagnostics.csv", result.records)
    outputs = {"diagnostics": "diagnostics.csv", "snapshots": []}
    for step in sorted(result.snapshots):
        names = _snapshot_files(out_dir, mesh, step, result.snapshots[step])
        outputs["snapshots"].extend(names)
    if _get(cfg, "output.kymograph", False):
        write_kymograph(
            out_dir / "kymograph_vertices.csv",
            out_dir / "kymograph_elements.csv",
            mesh, _kymograph_samples(mesh, result.snapshots),
        )
        outputs["kymograph"] = ["kymograph_vertices.csv",
                                "kymograph_elements.csv"]
    _write_manifest(out_dir, args, cfg, outputs,
                    {"run": result.wall_time})

    last = result.records[-1]
    print(
        f"{scenario.name}: {result.stats.steps} steps to t = {last.t:g} "
        f"({sim.dimension}-d, n = {sim.n_vertices}, dt = {sim.dt:g}); "
        f"max length error {result.stats.max_f1:.3e}, "
        f"max frame defect {result.stats.max_f2:.3e}; "
        f"outputs in {out_dir}"
    )
    return 0


def cmd_converge(args) -> int:
    cfg = parse_config(args.config)
    scenario = build_scenario(cfg)
    lo, hi = _parse_levels(args.levels)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows, timings = [], {}
    prev = None  # (dt, max_f1) of the previous level
    for level in range(lo, hi + 1):
        dt, n = _level_params(level)
        sim = build_sim_config(cfg, scenario, args, n_vertices=n, dt=dt)
        result = _drive(sim)
        stats = result.stats
        order = None
        if prev is not None:
            order = float(np.log(stats.max_f1 / prev[1]) / np.log(dt / prev[0]))
        rows.append({
            "dt": dt, "n_vertices": n, "max_f1": stats.max_f1, "eoc": order,
            "max_f2": stats.max_f2, "max_f2_increment": stats.max_f2_increment,
        })
        timings[f"level_{level}"] = result.wall_time
        prev = (dt, stats.max_f1)

    write_convergence_table(out_dir / "converge.csv", rows)
    _write_manifest(out_dir, args, cfg, {"table": "converge.csv"}, timings)

    print(f"{scenario.name}: refinement levels {lo}..{hi} "
          f"({'2' if _get(cfg, 'run.dimension', 3) == 2 else '3'}-d)")
    print(f"{'dt':>12} {'n':>6} {'max_f1':>13} {'eoc':>9} {'max_f2':>13}")
    for r in rows:
        eoc_txt = "" if r["eoc"] is None else f"{r['eoc']:.5f}"
        print(f"{r['dt']:>12.6g} {r['n_vertices']:>6d} {r['max_f1']:>13.6e} "
              f"{eoc_txt:>9} {r['max_f2']:>13.6e}")
    return 0


def cmd_compare2d3d(args) -> int:
    cfg = parse_config(args.config)
    scenario = build_scenario(cfg)
    lo, hi = _parse_levels(args.levels)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows, timings = [], {}
    for level in range(lo, hi + 1):
        dt, n = _level_params(level)
        sim2 = build_sim_config(cfg, scenario, args, n_vertices=n, dt=dt)
        sim2 = dataclasses.replace(sim2, dimension=2)
        sim3 = dataclasses.replace(sim2, dimension=3)
        mesh = uniform_mesh(n)

        # both solvers launch from the same developed planar state, so any
        # drift between their trajectories is solver-induced
        t0 = time.perf_counter()
        planar0 = spun_up_state_2d(sim2)
        spin_up_time = time.perf_counter() - t0
        spatial0 = embed_in_space(mesh, planar0)

        res2 = run2d(sim2, state=planar0)
        res3 = run(sim3, state=spatial0)

        com2 = np.zeros(3)
        com2[:2] = res2.records[-1].com[:2]
        com3 = np.asarray(res3.records[-1].com)
        diff = float(np.linalg.norm(com3 - com2))
        steps = step_count(sim2.horizon, dt)
        rows.append({
            "dt": dt, "n_vertices": n, "com_difference": diff,
            "com_difference_per_step": diff / steps,
            "time_2d": res2.wall_time, "time_3d": res3.wall_time,
            "time_ratio": res3.wall_time / max(res2.wall_time, 1e-12),
        })
        timings[f"level_{level}_spin_up"] = spin_up_time
        timings[f"level_{level}_2d"] = res2.wall_time
        timings[f"level_{level}_3d"] = res3.wall_time

    header = ["dt", "n_vertices", "com_difference", "com_difference_per_step",
              "time_2d", "time_3d", "time_ratio"]
    with open(out_dir / "compare.csv", "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for r in rows:
            out.writerow([
                "%.17g" % r["dt"], str(r["n_vertices"]),
                "%.17g" % r["com_difference"],
                "%.17g" % r["com_difference_per_step"],
                "%.17g" % r["time_2d"], "%.17g" % r["time_3d"],
                "%.17g" % r["time_ratio"],
            ])
    _write_manifest(out_dir, args, cfg, {"table": "compare.csv"}, timings)

    print(f"{scenario.name}: planar vs spatial, levels {lo}..{hi}")
    print(f"{'dt':>12} {'n':>6} {'com diff':>13} {'per step':>13} {'ratio':>7}")
    for r in rows:
        print(f"{r['dt']:>12.6g} {r['n_vertices']:>6d} "
              f"{r['com_difference']:>13.6e} "
              f"{r['com_difference_per_step']:>13.6e} "
              f"{r['time_ratio']:>7.2f}")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(sub) -> None:
    sub.add_argument("--config", required=True,
                     help="path to the flat key = value run description")
    sub.add_argument("--out", default="out",
                     help="output directory (created if missing)")
    sub.add_argument("--seed", type=int, default=None,
                     help="reserved for stochastic media; recorded in the "
                          "manifest, otherwise unused")
    sub.add_argument("--renormalize-frame", action="store_true",
                     help="re-orthonormalize the director frame every step")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rodfem",
        description="mixed finite elements for driven inextensible rods",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_run = subparsers.add_parser(
        "run", help="advance one simulation and export diagnostics")
    _add_common(p_run)

    p_conv = subparsers.add_parser(
        "converge", help="refinement study with a convergence table")
    _add_common(p_conv)
    p_conv.add_argument("--levels", default="0..3",
                        help="inclusive refinement range L0..L1")

    p_cmp = subparsers.add_parser(
        "compare2d3d", help="planar vs spatial solver cross-check")
    _add_common(p_cmp)
    p_cmp.add_argument("--levels", default="0..3",
                       help="inclusive refinement range L0..L1")

    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "converge": cmd_converge,
               "compare2d3d": cmd_compare2d3d}[args.command]
    try:
        return handler(args)
    except (ConfigError, InvalidParameterError, InvalidMeshError) as exc:
        print(f"rodfem: config error: {exc}", file=sys.stderr)
        return 2
    except RodfemError as exc:
        print(f"rodfem: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
