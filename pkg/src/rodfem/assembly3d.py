"""One implicit time step of the spatial rod model.

The step solves simultaneously for position, bending moment, curvature,
tangential spin rate, twist moment, twist density, and line tension.  All
geometric coefficients (tangents, length elements, quadrature weights, drag
matrices) are frozen at the previous step, which makes the system linear.
Unknowns are interleaved along the rod so the matrix is banded with a
resolution-independent bandwidth.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblyError, SolverError
from .geometry import Mesh, averaged_tangent, element_tangents, lumped_weights
from .linsolve import BandedMatrix, factorize, relative_residual, solve
from .scenarios import Scenario, evaluate_field

_D3 = np.arange(3)


@dataclass
class DofLayout3D:
    """Interleaved unknown numbering for the spatial step.

    Each vertex block holds position (3 slots), then — at interior vertices
    only — bending moment (3) and curvature (3), then the spin rate (1).
    Boundary bending moments vanish and boundary curvatures are prescribed,
    so neither enters the system there.  Element blocks (twist moment, twist,
    tension) sit between consecutive vertex blocks.  Rows are assigned to the
    same slots as the unknown they balance, which keeps the band tight.
    """

    n_vertices: int
    x_off: np.ndarray = field(init=False, repr=False)
    y_off: np.ndarray = field(init=False, repr=False)
    k_off: np.ndarray = field(init=False, repr=False)
    m_off: np.ndarray = field(init=False, repr=False)
    z_off: np.ndarray = field(init=False, repr=False)
    g_off: np.ndarray = field(init=False, repr=False)
    p_off: np.ndarray = field(init=False, repr=False)
    ndof: int = field(init=False)

    def __post_init__(self):
        n = self.n_vertices
        if n < 3:
            raise AssemblyError(f"need at least 3 vertices, got {n}")
        ne = n - 1
        x_off = np.empty(n, dtype=np.int64)
        x_off[0] = 0
        x_off[1:] = 13 * np.arange(1, n, dtype=np.int64) - 6
        m_off = x_off + 9
        m_off[0] = x_off[0] + 3
        m_off[-1] = x_off[-1] + 3
        y_off = np.full(n, -1, dtype=np.int64)
        k_off = np.full(n, -1, dtype=np.int64)
        y_off[1:-1] = x_off[1:-1] + 3
        k_off[1:-1] = x_off[1:-1] + 6
        el = np.arange(ne, dtype=np.int64)
        self.x_off = x_off
        self.y_off = y_off
        self.k_off = k_off
        self.m_off = m_off
        self.z_off = 13 * el + 4
        self.g_off = self.z_off + 1
        self.p_off = self.z_off + 2
        self.ndof = 13 * n - 15


@dataclass(frozen=True)
class FrozenGeometry:
    """Geometry of the previous step, reused as step coefficients."""

    tau: np.ndarray   # unit element tangents (ne, dim)
    s: np.ndarray     # length elements |x_u| per element (ne,)
    ttau: np.ndarray  # averaged vertex tangents (n, dim)
    w: np.ndarray     # lumped vertex weights (n,)


def frozen_geometry(mesh: Mesh, x: np.ndarray) -> FrozenGeometry:
    tau, s = element_tangents(mesh, x)
    return FrozenGeometry(tau, s, averaged_tangent(tau), lumped_weights(mesh, s))


@dataclass
class StepContext3D:
    """Per-run constants: mesh, layout, and sampled material fields."""

    mesh: Mesh
    scenario: Scenario
    layout: DofLayout3D = field(init=False, repr=False)
    bend_stiffness: np.ndarray = field(init=False, repr=False)    # vertices
    bend_viscosity: np.ndarray = field(init=False, repr=False)    # vertices
    twist_stiffness: np.ndarray = field(init=False, repr=False)   # midpoints
    twist_viscosity: np.ndarray = field(init=False, repr=False)   # midpoints

    def __post_init__(self):
        mat = self.scenario.material
        self.layout = DofLayout3D(self.mesh.n_vertices)
        self.bend_stiffness = mat.bend_stiffness_at(self.mesh.u)
        self.bend_viscosity = mat.bend_viscosity_at(self.mesh.u)
        self.twist_stiffness = mat.twist_stiffness_at(self.mesh.midpoints)
        self.twist_viscosity = mat.twist_viscosity_at(self.mesh.midpoints)


@dataclass
class StepResult3D:
    """Decoded unknowns of one step, with prescribed end curvatures attached."""

    x: np.ndarray             # positions (n, 3)
    bend_moment: np.ndarray   # (n, 3), zero at the ends
    kappa: np.ndarray         # (n, 3)
    spin: np.ndarray          # tangential angular velocity (n,)
    twist_moment: np.ndarray  # (ne,)
    twist: np.ndarray         # (ne,)
    tension: np.ndarray       # (ne,)
    residual: float


def _cross_matrices(v: np.ndarray) -> np.ndarray:
    out = np.zeros((v.shape[0], 3, 3))
    out[:, 0, 1] = -v[:, 2]
    out[:, 0, 2] = v[:, 1]
    out[:, 1, 0] = v[:, 2]
    out[:, 1, 2] = -v[:, 0]
    out[:, 2, 0] = -v[:, 1]
    out[:, 2, 1] = v[:, 0]
    return out


def assemble_step(ctx, geom, dt, t_new, x, e1, e2, kappa, twist,
                  bend_moment, spin, rest_density):
    """Banded matrix and right-hand side for one step.

    All state arguments are the previous step's fields; rest_density is the
    per-element length density the constraint rows pin the new positions to.
    """
    mesh = ctx.mesh
    lay = ctx.layout
    n, ne = mesh.n_vertices, mesh.n_elements
    h, u = mesh.h, mesh.u
    tau, s, ttau, w = geom.tau, geom.s, geom.ttau, geom.w
    hs = h * s
    eye3 = np.eye(3)

    K = ctx.scenario.drag.element_matrices(tau)                 # (ne,3,3)
    P = eye3[None] - tau[:, :, None] * tau[:, None, :]          # (ne,3,3)
    kbar = 0.5 * (kappa[:-1] + kappa[1:])
    tk = np.cross(tau, kbar)                                    # (ne,3)

    xo, yo, ko, mo = lay.x_off, lay.y_off, lay.k_off, lay.m_off
    zo, go, po = lay.z_off, lay.g_off, lay.p_off
    ii = np.arange(1, n - 1)
    b = np.zeros(lay.ndof)

    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(np.asarray(r, dtype=np.int64).ravel())
        cols.append(np.asarray(c, dtype=np.int64).ravel())
        vals.append(np.asarray(v, dtype=float).ravel())

    def put_blocks(r0, c0, mats):
        shp = mats.shape
        r = np.broadcast_to(r0[:, None, None] + _D3[None, :, None], shp)
        c = np.broadcast_to(c0[:, None, None] + _D3[None, None, :], shp)
        put(r, c, mats)

    def put_diag(r0, c0, coef):
        put(r0[:, None] + _D3, c0[:, None] + _D3,
            np.broadcast_to(coef[:, None], (coef.size, 3)))

    def put_vec_rows(r0, c0, vecs):
        put(r0[:, None] + _D3, np.broadcast_to(c0[:, None], vecs.shape), vecs)

    def put_vec_cols(r0, c0, vecs):
        put(np.broadcast_to(r0[:, None], vecs.shape), c0[:, None] + _D3, vecs)

    # -- momentum balance at every vertex (rows at the position slots)
    drag_lumped = np.zeros((n, 3, 3))
    drag_lumped[:-1] += 0.5 * hs[:, None, None] * K
    drag_lumped[1:] += 0.5 * hs[:, None, None] * K
    put_blocks(xo, xo, drag_lumped / dt)
    b[(xo[:, None] + _D3).ravel()] = (
        np.einsum("nij,nj->ni", drag_lumped, x) / dt
    ).ravel()

    # tension and twist-moment forces of element e on its two end vertices
    put_vec_rows(xo[:-1], po, tau)
    put_vec_rows(xo[1:], po, -tau)
    put_vec_rows(xo[:-1], zo, tk)
    put_vec_rows(xo[1:], zo, -tk)

    # transverse bending force, projected difference of the bending moment
    coefP = P / hs[:, None, None]
    mh = np.arange(ne - 1)      # elements whose right vertex is interior
    ml = np.arange(1, ne)       # elements whose left vertex is interior
    put_blocks(xo[mh], yo[mh + 1], coefP[mh])
    put_blocks(xo[mh + 1], yo[mh + 1], -coefP[mh])
    put_blocks(xo[ml], yo[ml], -coefP[ml])
    put_blocks(xo[ml + 1], yo[ml], coefP[ml])

    # -- bending constitutive law at interior vertices (bending-moment rows)
    ti = ttau[ii]
    Pt = eye3[None] - ti[:, :, None] * ti[:, None, :]
    Xt = _cross_matrices(ti)
    A_i = ctx.bend_stiffness[ii]
    B_i = ctx.bend_viscosity[ii]
    kmat = (
        -A_i[:, None, None] * eye3[None]
        - (B_i / dt)[:, None, None] * Pt
        + (B_i * spin[ii])[:, None, None] * Xt
    )
    put_diag(yo[ii], yo[ii], w[ii])
    put_blocks(yo[ii], ko[ii], w[ii][:, None, None] * kmat)
    alpha = evaluate_field(ctx.scenario.kappa1_pref, u, t_new)
    beta = evaluate_field(ctx.scenario.kappa2_pref, u, t_new)
    pref = alpha[ii, None] * e1[ii] + beta[ii, None] * e2[ii]
    b[(yo[ii][:, None] + _D3).ravel()] = (
        w[ii][:, None]
        * (
            -A_i[:, None] * pref
            - (B_i / dt)[:, None] * np.einsum("nij,nj->ni", Pt, kappa[ii])
        )
    ).ravel()

    # -- curvature identity at interior vertices (curvature rows; zero rhs)
    a_l = 1.0 / hs[:-1]
    a_r = 1.0 / hs[1:]
    put_diag(ko[ii], ko[ii], w[ii])
    put_diag(ko[ii], xo[ii], a_l + a_r)
    put_diag(ko[ii], xo[ii - 1], -a_l)
    put_diag(ko[ii], xo[ii + 1], -a_r)

    # -- tangential angular momentum at every vertex (spin rows)
    put(mo, mo, -ctx.scenario.material.rotary_drag * w)
    put(mo[:-1], zo, np.ones(ne))
    put(mo[1:], zo, -np.ones(ne))
    b[mo] = -w * np.einsum("nd,nd->n", bend_moment, np.cross(ttau, kappa))

    # -- twist constitutive law per element (twist-moment rows)
    C_e = ctx.twist_stiffness
    D_e = ctx.twist_viscosity
    gamma0 = evaluate_field(ctx.scenario.twist_pref, mesh.midpoints, t_new)
    put(zo, zo, hs)
    put(zo, go, -hs * (C_e + D_e / dt))
    b[zo] = hs * (-C_e * gamma0 - (D_e / dt) * twist)

    # -- twist transport per element (twist rows)
    put(go, go, hs / dt)
    put(go, mo[:-1], np.ones(ne))
    put(go, mo[1:], -np.ones(ne))
    put_vec_cols(go, xo[1:], tk / dt)
    put_vec_cols(go, xo[:-1], -tk / dt)
    b[go] = hs * twist / dt + np.einsum("ed,ed->e", tk, x[1:] - x[:-1]) / dt

    # -- inextensibility per element (tension rows)
    put_vec_cols(po, xo[1:], tau)
    put_vec_cols(po, xo[:-1], -tau)
    b[po] = h * rest_density

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    if not np.all(np.isfinite(v)) or not np.all(np.isfinite(b)):
        raise AssemblyError("non-finite entries in the step system")
    kl = int(np.max(r - c))
    ku = int(np.max(c - r))
    matrix = BandedMatrix(lay.ndof, kl, ku)
    matrix.add_entries(r, c, v)
    return matrix, b


def solve_step(ctx, geom, dt, t_new, x, e1, e2, kappa, twist, bend_moment,
               spin, rest_density, residual_tol=1e-10) -> StepResult3D:
    """Assemble, factor, and solve one step; decode the solution fields."""
    matrix, b = assemble_step(
        ctx, geom, dt, t_new, x, e1, e2, kappa, twist, bend_moment, spin,
        rest_density,
    )
    lay = ctx.layout
    # solve for the position update, not the position: keeping O(1)
    # coordinates out of the unknowns keeps the length constraint satisfied
    # to the rounding floor of the increment rather than of the coordinates
    # (the shift is accumulated in extended precision for the same reason)
    base = np.zeros(lay.ndof)
    base[lay.x_off[:, None] + _D3] = x
    shift = np.asarray(b, dtype=np.longdouble) - matrix.matvec(
        base.astype(np.longdouble)
    )
    sol = base + solve(factorize(matrix), shift.astype(float))
    res = relative_residual(matrix, sol, b)
    if not res <= residual_tol:
        raise SolverError(
            f"step at t={t_new} left relative residual {res:.3e} "
            f"(tolerance {residual_tol:.1e})"
        )

    n = ctx.mesh.n_vertices
    inner = np.arange(1, n - 1)
    x_new = sol[(lay.x_off[:, None] + _D3)]
    y_new = np.zeros((n, 3))
    k_new = np.zeros((n, 3))
    y_new[1:-1] = sol[(lay.y_off[inner][:, None] + _D3)]
    k_new[1:-1] = sol[(lay.k_off[inner][:, None] + _D3)]
    # prescribed end curvature, in the directors the step was built with
    ub = ctx.mesh.u[[0, -1]]
    ab = evaluate_field(ctx.scenario.kappa1_pref, ub, t_new)
    bb = evaluate_field(ctx.scenario.kappa2_pref, ub, t_new)
    k_new[[0, -1]] = ab[:, None] * e1[[0, -1]] + bb[:, None] * e2[[0, -1]]
    return StepResult3D(
        x=x_new,
        bend_moment=y_new,
        kappa=k_new,
        spin=sol[lay.m_off],
        twist_moment=sol[lay.z_off],
        twist=sol[lay.g_off],
        tension=sol[lay.p_off],
        residual=res,
    )
