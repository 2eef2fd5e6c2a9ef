"""Planar reduction of the rod model.

The planar scheme carries no director pair: the unit normal is the rotated
averaged tangent, recomputed from geometry each step, so frame bookkeeping
(and its error) vanishes identically.  Unknowns per step are position,
bending moment, curvature, and tension; twist and spin do not exist.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (DiagnosticsRecord, center_of_mass, elastic_energy,
                          length_error)
from .engine3d import RodState3D, RunResult, RunStats, SimConfig, step_count
from .errors import AssemblyError, InvalidParameterError, SolverError
from .geometry import (Mesh, averaged_tangent, element_tangents,
                       lumped_weights, perp, uniform_mesh, vertex_curvature)
from .linsolve import BandedMatrix, factorize, relative_residual, solve
from .scenarios import evaluate_field

_D2 = np.arange(2)


@dataclass
class DofLayout2D:
    """Interleaved numbering: per interior vertex position (2), bending
    moment (2), curvature (2); boundary vertices position only; one tension
    slot per element in between."""

    n_vertices: int
    x_off: np.ndarray = field(init=False, repr=False)
    y_off: np.ndarray = field(init=False, repr=False)
    k_off: np.ndarray = field(init=False, repr=False)
    p_off: np.ndarray = field(init=False, repr=False)
    ndof: int = field(init=False)

    def __post_init__(self):
        n = self.n_vertices
        if n < 3:
            raise AssemblyError(f"need at least 3 vertices, got {n}")
        x_off = np.empty(n, dtype=np.int64)
        x_off[0] = 0
        x_off[1:] = 7 * np.arange(1, n, dtype=np.int64) - 4
        y_off = np.full(n, -1, dtype=np.int64)
        k_off = np.full(n, -1, dtype=np.int64)
        y_off[1:-1] = x_off[1:-1] + 2
        k_off[1:-1] = x_off[1:-1] + 4
        self.x_off = x_off
        self.y_off = y_off
        self.k_off = k_off
        self.p_off = 7 * np.arange(n - 1, dtype=np.int64) + 2
        self.ndof = 7 * n - 9


@dataclass
class RodState2D:
    t: float
    x: np.ndarray             # (n, 2)
    kappa: np.ndarray         # (n, 2)
    bend_moment: np.ndarray   # (n, 2)
    tension: np.ndarray       # (ne,)
    rest_density: np.ndarray  # (ne,)

    def copy(self) -> "RodState2D":
        return RodState2D(self.t, self.x.copy(), self.kappa.copy(),
                          self.bend_moment.copy(), self.tension.copy(),
                          self.rest_density.copy())


def initial_state_2d(mesh: Mesh, scenario) -> RodState2D:
    """Straight rod along the first axis, auxiliaries at rest."""
    n = mesh.n_vertices
    x = np.zeros((n, 2))
    x[:, 0] = scenario.length * mesh.u
    tau, s = element_tangents(mesh, x)
    kappa = vertex_curvature(mesh, x)
    return RodState2D(
        t=0.0, x=x, kappa=kappa, bend_moment=np.zeros((n, 2)),
        tension=np.zeros(n - 1), rest_density=s.copy(),
    )


def solve_step_2d(mesh, scenario, bend_stiffness, bend_viscosity, layout,
                  dt, t_new, x, kappa, bend_moment, rest_density,
                  residual_tol=1e-10):
    """One implicit planar step; geometry frozen at the given state."""
    n, ne = mesh.n_vertices, mesh.n_elements
    h, u = mesh.h, mesh.u
    tau, s = element_tangents(mesh, x)
    ttau = averaged_tangent(tau)
    w = lumped_weights(mesh, s)
    hs = h * s
    eye2 = np.eye(2)

    K = scenario.drag.element_matrices(tau)
    P = eye2[None] - tau[:, :, None] * tau[:, None, :]
    nu = perp(ttau)

    xo, yo, ko, po = layout.x_off, layout.y_off, layout.k_off, layout.p_off
    ii = np.arange(1, n - 1)
    b = np.zeros(layout.ndof)
    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(np.asarray(r, dtype=np.int64).ravel())
        cols.append(np.asarray(c, dtype=np.int64).ravel())
        vals.append(np.asarray(v, dtype=float).ravel())

    def put_blocks(r0, c0, mats):
        shp = mats.shape
        r = np.broadcast_to(r0[:, None, None] + _D2[None, :, None], shp)
        c = np.broadcast_to(c0[:, None, None] + _D2[None, None, :], shp)
        put(r, c, mats)

    def put_diag(r0, c0, coef):
        put(r0[:, None] + _D2, c0[:, None] + _D2,
            np.broadcast_to(coef[:, None], (coef.size, 2)))

    def put_vec_rows(r0, c0, vecs):
        put(r0[:, None] + _D2, np.broadcast_to(c0[:, None], vecs.shape), vecs)

    def put_vec_cols(r0, c0, vecs):
        put(np.broadcast_to(r0[:, None], vecs.shape), c0[:, None] + _D2, vecs)

    # momentum balance
    drag_lumped = np.zeros((n, 2, 2))
    drag_lumped[:-1] += 0.5 * hs[:, None, None] * K
    drag_lumped[1:] += 0.5 * hs[:, None, None] * K
    put_blocks(xo, xo, drag_lumped / dt)
    b[(xo[:, None] + _D2).ravel()] = (
        np.einsum("nij,nj->ni", drag_lumped, x) / dt
    ).ravel()
    put_vec_rows(xo[:-1], po, tau)
    put_vec_rows(xo[1:], po, -tau)
    coefP = P / hs[:, None, None]
    mh = np.arange(ne - 1)
    ml = np.arange(1, ne)
    put_blocks(xo[mh], yo[mh + 1], coefP[mh])
    put_blocks(xo[mh + 1], yo[mh + 1], -coefP[mh])
    put_blocks(xo[ml], yo[ml], -coefP[ml])
    put_blocks(xo[ml + 1], yo[ml], coefP[ml])

    # bending constitutive law
    ti = ttau[ii]
    Pt = eye2[None] - ti[:, :, None] * ti[:, None, :]
    A_i = bend_stiffness[ii]
    B_i = bend_viscosity[ii]
    kmat = -A_i[:, None, None] * eye2[None] - (B_i / dt)[:, None, None] * Pt
    put_diag(yo[ii], yo[ii], w[ii])
    put_blocks(yo[ii], ko[ii], w[ii][:, None, None] * kmat)
    alpha = evaluate_field(scenario.kappa1_pref, u, t_new)
    b[(yo[ii][:, None] + _D2).ravel()] = (
        w[ii][:, None]
        * (
            -A_i[:, None] * alpha[ii, None] * nu[ii]
            - (B_i / dt)[:, None] * np.einsum("nij,nj->ni", Pt, kappa[ii])
        )
    ).ravel()

    # curvature identity
    a_l = 1.0 / hs[:-1]
    a_r = 1.0 / hs[1:]
    put_diag(ko[ii], ko[ii], w[ii])
    put_diag(ko[ii], xo[ii], a_l + a_r)
    put_diag(ko[ii], xo[ii - 1], -a_l)
    put_diag(ko[ii], xo[ii + 1], -a_r)

    # inextensibility
    put_vec_cols(po, xo[1:], tau)
    put_vec_cols(po, xo[:-1], -tau)
    b[po] = h * rest_density

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    if not np.all(np.isfinite(v)) or not np.all(np.isfinite(b)):
        raise AssemblyError("non-finite entries in the planar step system")
    matrix = BandedMatrix(layout.ndof, int(np.max(r - c)), int(np.max(c - r)))
    matrix.add_entries(r, c, v)

    # solve for the position update (see the spatial solver for rationale)
    base = np.zeros(layout.ndof)
    base[xo[:, None] + _D2] = x
    shift = np.asarray(b, dtype=np.longdouble) - matrix.matvec(
        base.astype(np.longdouble)
    )
    sol = base + solve(factorize(matrix), shift.astype(float))
    res = relative_residual(matrix, sol, b)
    if not res <= residual_tol:
        raise SolverError(
            f"planar step at t={t_new} left relative residual {res:.3e} "
            f"(tolerance {residual_tol:.1e})"
        )

    x_new = sol[xo[:, None] + _D2]
    y_new = np.zeros((n, 2))
    k_new = np.zeros((n, 2))
    y_new[1:-1] = sol[yo[ii][:, None] + _D2]
    k_new[1:-1] = sol[ko[ii][:, None] + _D2]
    ab = evaluate_field(scenario.kappa1_pref, u[[0, -1]], t_new)
    k_new[[0, -1]] = ab[:, None] * nu[[0, -1]]
    return x_new, y_new, k_new, sol[po], res


def _probe_step(stats, tau_old, x_new, h, rest_density, res):
    """Accumulate the per-step invariants shared by both planar phases."""
    tau_new, s_new = _tangents_of(x_new, h)
    dx = x_new[1:] - x_new[:-1]
    cres = np.einsum("ed,ed->e", tau_old, dx) - h * rest_density
    stats.max_constraint_residual = max(
        stats.max_constraint_residual, float(np.abs(cres).max())
    )
    shrink = 1.0 - 0.5 * np.sum((tau_new - tau_old) ** 2, axis=1)
    identity_defect = np.inf if np.any(shrink <= 0.0) else float(
        np.abs(s_new - rest_density / shrink).max() / rest_density.min()
    )
    stats.max_length_identity_error = max(
        stats.max_length_identity_error, identity_defect
    )
    stats.min_stretch = min(
        stats.min_stretch, float((s_new / rest_density).min())
    )
    stats.max_solver_residual = max(stats.max_solver_residual, res)
    stats.steps += 1


def _tangents_of(x, h):
    dx = np.diff(x, axis=0)
    chord = np.linalg.norm(dx, axis=1)
    return dx / chord[:, None], chord / h


def spun_up_state_2d(config: SimConfig, stats: RunStats = None) -> RodState2D:
    """Initial planar state after the scenario's spin-up phase.

    The driving field is clamped at its t = 0 shape for the whole phase and
    the clock is reset afterwards, so locomotion starts from a developed
    waveform rather than a straight rod.
    """
    scn = config.scenario
    mesh = uniform_mesh(config.n_vertices)
    state = initial_state_2d(mesh, scn)
    if scn.spin_up <= 0.0:
        return state
    layout = DofLayout2D(mesh.n_vertices)
    A_v = scn.material.bend_stiffness_at(mesh.u)
    B_v = scn.material.bend_viscosity_at(mesh.u)
    for _ in range(step_count(scn.spin_up, config.dt)):
        tau_old, _ = element_tangents(mesh, state.x)
        x, y, k, p, res = solve_step_2d(
            mesh, scn, A_v, B_v, layout, config.dt, 0.0, state.x,
            state.kappa, state.bend_moment, state.rest_density,
            config.residual_tol,
        )
        if stats is not None:
            _probe_step(stats, tau_old, x, mesh.h, state.rest_density, res)
        state = RodState2D(0.0, x, k, y, p, state.rest_density)
    return state


def run2d(config: SimConfig, state: RodState2D = None) -> RunResult:
    """Advance the planar rod to the horizon; resumes from `state` if given."""
    wall0 = time.perf_counter()
    scn = config.scenario
    mesh = uniform_mesh(config.n_vertices)
    layout = DofLayout2D(mesh.n_vertices)
    A_v = scn.material.bend_stiffness_at(mesh.u)
    B_v = scn.material.bend_viscosity_at(mesh.u)
    stats = RunStats()

    if state is None:
        state = spun_up_state_2d(config, stats)
    else:
        state = state.copy()
        if state.x.shape[0] != mesh.n_vertices:
            raise InvalidParameterError(
                f"resume state has {state.x.shape[0]} vertices, "
                f"config wants {mesh.n_vertices}"
            )

    t0 = state.t
    n_steps = step_count(config.horizon - t0, config.dt)
    step0 = int(round(t0 / config.dt))
    records = []
    snapshots = {}

    def record(st, step_index):
        tau, s = element_tangents(mesh, st.x)
        w = lumped_weights(mesh, s)
        nu = perp(averaged_tangent(tau))
        alpha = evaluate_field(scn.kappa1_pref, mesh.u, st.t)
        hs = mesh.h * s
        energy = elastic_energy(w, A_v, st.kappa, alpha[:, None] * nu)
        f1 = length_error(hs, scn.length)
        records.append(DiagnosticsRecord(
            step=step_index, t=st.t, energy=energy, f1=f1, f2=0.0,
            f2_increment=0.0, total_length=float(hs.sum()),
            com=center_of_mass(mesh, st.x, s),
            s_min=float(s.min()), s_max=float(s.max()),
        ))
        stats.max_f1 = max(stats.max_f1, f1)

    record(state, step0)
    snapshots[step0] = state.copy()
    for k in range(n_steps):
        t_new = t0 + (k + 1) * config.dt
        tau_old, _ = element_tangents(mesh, state.x)
        x, y, kp, p, res = solve_step_2d(
            mesh, scn, A_v, B_v, layout, config.dt, t_new, state.x,
            state.kappa, state.bend_moment, state.rest_density,
            config.residual_tol,
        )
        _probe_step(stats, tau_old, x, mesh.h, state.rest_density, res)
        state = RodState2D(t_new, x, kp, y, p, state.rest_density)
        record(state, step0 + k + 1)
        idx = step0 + k + 1
        if config.snapshot_stride > 0 and idx % config.snapshot_stride == 0:
            snapshots[idx] = state.copy()
    snapshots[step0 + n_steps] = state.copy()

    return RunResult(
        config=config, final_state=state, records=records,
        snapshots=snapshots, stats=stats,
        wall_time=time.perf_counter() - wall0,
    )


def embed_in_space(mesh: Mesh, state: RodState2D) -> RodState3D:
    """Lift a planar state into the spatial model.

    The first director is the planar normal with a zero third component, the
    second is the plane normal, and every out-of-plane auxiliary starts at
    zero; the spatial step then reproduces the planar dynamics exactly.
    """
    n, ne = mesh.n_vertices, mesh.n_elements

    def lift(a):
        out = np.zeros((a.shape[0], 3))
        out[:, :2] = a
        return out

    tau, _ = element_tangents(mesh, state.x)
    nu = perp(averaged_tangent(tau))
    e2 = np.zeros((n, 3))
    e2[:, 2] = 1.0
    return RodState3D(
        t=state.t, x=lift(state.x), e1=lift(nu), e2=e2,
        kappa=lift(state.kappa), twist=np.zeros(ne),
        bend_moment=lift(state.bend_moment), spin=np.zeros(n),
        twist_moment=np.zeros(ne), tension=state.tension.copy(),
        rest_density=state.rest_density.copy(),
    )
