"""Discrete weighted calculus on the primal/dual mesh pair.

Fields are plain numpy arrays:

* cell fields: shape (n_cells,), one value per triangle;
* edge fields: shape (n_edges,), the value for the stored orientation
  i -> j (i < j); the value seen from j -> i is the negation, see
  :func:`edge_value`;
* vertex fields: shape (n_verts,).

``ModelOps`` gathers every index table and weight-dependent coefficient the
operators need, so each operator is a handful of vectorized gathers/scatters.

Conventions (see also soundproof.mesh): fluxes are
``A_ij = -f_ij rhohat_ij V_ij / (2 vol_i)`` with vol the weighted volume, the
one-form built from a flux field is ``K_ij = -h_ij sigma_ij V_ij`` (the skew
part of ``2 area_i (h/f) A_ij``), and the circulation around a vertex sums the
one-form counterclockwise over the dual edges of its fan, walls contributing
nothing (free slip).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .mesh import DualGeometry, Mesh
from .models import (ANELASTIC, BOUSSINESQ, PSEUDO_INCOMPRESSIBLE, ModelSpec,
                     WeightSet)


class ModelOps:
    """Precomputed gather/scatter tables for one (mesh, dual, weights) triple."""

    def __init__(self, mesh: Mesh, dual: DualGeometry, weights: WeightSet):
        self.mesh = mesh
        self.dual = dual
        self.weights = weights
        self.nt, self.ne, self.nv = mesh.n_cells, mesh.n_edges, mesh.n_verts

        self.ci = mesh.edge_cells[:, 0]
        self.cj = mesh.edge_cells[:, 1]
        self.vm = mesh.edge_vminus
        self.vp = mesh.edge_vplus
        self.f = mesh.edge_f
        self.h = dual.h
        self.area = mesh.tri_area
        self.vol = weights.vol
        self.sigma = weights.sigma
        self.rhohat = weights.rhohat

        self.flat_coef = -self.h * self.sigma
        self.divw = self.rhohat * self.f
        self.grad_den = self.sigma * self.h
        self.pois_w = self.rhohat * self.f / (self.sigma * self.h)
        self.kin_w = self.h * self.sigma * self.f * self.rhohat

        # vorticity fans
        self.fe_vertex = dual.fe_vertex
        self.fe_edge = dual.fe_edge
        self.fe_sign = dual.fe_sign

        # advection stencil: slots [i-, j-, i+, j+]
        self.slot_edge = dual.slot_edge
        self.kcoef = dual.kcoef
        base_vol = self.vol[dual.slot_base]
        self.slot_coef = (self.f[dual.slot_edge] * self.rhohat[dual.slot_edge]
                          * dual.slot_sign) / (2.0 * base_vol)

        # sparse flux-matrix skeleton (rows/cols fixed, data follows V)
        self._flux_rows = np.concatenate([self.ci, self.cj])
        self._flux_cols = np.concatenate([self.cj, self.ci])
        self._flux_coef = np.concatenate([
            -self.divw / (2.0 * self.vol[self.ci]),
            self.divw / (2.0 * self.vol[self.cj])])


def edge_value(V: np.ndarray, mesh: Mesh, a: int, b: int) -> float:
    """Oriented edge value for the a -> b direction (negates when reversed)."""
    e = mesh._pair_to_edge.get((min(a, b), max(a, b)))
    if e is None:
        raise KeyError(f"cells {a},{b} are not adjacent")
    return float(V[e]) if mesh.edge_cells[e, 0] == a else -float(V[e])


# --------------------------------------------------------------------------
# basic operators
# --------------------------------------------------------------------------

def flat(V: np.ndarray, ops: ModelOps) -> np.ndarray:
    """One-form K_ij = -h sigma V on stored orientations (antisymmetric)."""
    return ops.flat_coef * V


def vorticity(K: np.ndarray, ops: ModelOps) -> np.ndarray:
    """Counterclockwise circulation of an edge one-form around each vertex."""
    return np.bincount(ops.fe_vertex, weights=ops.fe_sign * K[ops.fe_edge],
                       minlength=ops.nv)


def divergence(V: np.ndarray, ops: ModelOps) -> np.ndarray:
    """div_i = (1/area_i) sum_j rhohat_ij f_ij V_(i->j)."""
    g = ops.divw * V
    acc = (np.bincount(ops.ci, weights=g, minlength=ops.nt)
           - np.bincount(ops.cj, weights=g, minlength=ops.nt))
    return acc / ops.area


def gradient(P: np.ndarray, ops: ModelOps) -> np.ndarray:
    """(grad P)_ij = (P_j - P_i) / (sigma_ij h_ij)."""
    return (P[ops.cj] - P[ops.ci]) / ops.grad_den


def kinetic_density(V: np.ndarray, ops: ModelOps) -> np.ndarray:
    """k_i = (1/2) sum_j K_ij A_ij, one nonnegative value per cell."""
    q = ops.kin_w * V * V
    acc = (np.bincount(ops.ci, weights=q, minlength=ops.nt)
           + np.bincount(ops.cj, weights=q, minlength=ops.nt))
    return acc / (4.0 * ops.vol)


def velocity_from_stream(psi: np.ndarray, ops: ModelOps) -> np.ndarray:
    """Exactly divergence-free edge velocity from a vertex stream function.

    psi must be constant along each wall (zero is fine); then the weighted
    flux out of every cell telescopes to zero.
    """
    return (psi[ops.vm] - psi[ops.vp]) / (ops.rhohat * ops.f)


class FluxAccessor:
    """Flux matrix view of a velocity: A(i,j) per adjacent pair, else 0."""

    def __init__(self, V: np.ndarray, ops: ModelOps):
        self.ops = ops
        self.data = ops._flux_coef * np.concatenate([V, V])

    def __call__(self, i: int, j: int) -> float:
        e = self.ops.mesh._pair_to_edge.get((min(i, j), max(i, j)))
        if e is None:
            return 0.0
        k = e if self.ops.ci[e] == i else e + self.ops.ne
        return float(self.data[k])

    def matrix(self) -> sp.csr_matrix:
        ops = self.ops
        return sp.coo_matrix((self.data, (ops._flux_rows, ops._flux_cols)),
                             shape=(ops.nt, ops.nt)).tocsr()


def flux_from_velocity(V: np.ndarray, ops: ModelOps) -> FluxAccessor:
    return FluxAccessor(V, ops)


# --------------------------------------------------------------------------
# advection and forcing
# --------------------------------------------------------------------------

def _theta_tilde(theta: np.ndarray, ops: ModelOps) -> np.ndarray:
    """Edge harmonic-mean factor 0.5 (1/Theta_i + 1/Theta_j)."""
    return 0.5 * (1.0 / theta[ops.ci] + 1.0 / theta[ops.cj])


def advection(V: np.ndarray, model: ModelSpec, theta: np.ndarray | None = None,
              one_form: np.ndarray | None = None) -> np.ndarray:
    """Edge advection term of the momentum equation for the model's kind.

    For the pseudo-incompressible model the circulated one-form is
    M = 0.5 (1/Theta_i + 1/Theta_j) K and ``theta`` (> 0) is required.
    ``one_form`` overrides the circulated one-form (used by tests).
    """
    ops = model.ops
    if one_form is None:
        one_form = flat(V, ops)
        if model.kind == PSEUDO_INCOMPRESSIBLE:
            if theta is None:
                raise ValueError("pseudo-incompressible advection needs Theta")
            if np.any(theta <= 0):
                raise ValueError("pseudo-incompressible Theta must stay positive")
            one_form = one_form * _theta_tilde(theta, ops)
    vort = vorticity(one_form, ops)
    a_slot = -ops.slot_coef * V[ops.slot_edge]
    wminus = ops.kcoef[:, 0] * a_slot[:, 0] + ops.kcoef[:, 1] * a_slot[:, 1]
    wplus = ops.kcoef[:, 2] * a_slot[:, 2] + ops.kcoef[:, 3] * a_slot[:, 3]
    w = vort[ops.vm] * wminus - vort[ops.vp] * wplus
    return -w / (ops.h * ops.sigma)


def forcing(model: ModelSpec, theta: np.ndarray, V: np.ndarray | None = None) -> np.ndarray:
    """Edge forcing term: buoyancy (boussinesq), Exner (anelastic), or the
    height/kinetic term (pseudo-incompressible, needs V for k_i)."""
    ops = model.ops
    ci, cj = ops.ci, ops.cj
    dth = theta[cj] - theta[ci]
    if model.kind == BOUSSINESQ:
        return -(model.z[ci] + model.z[cj]) / (2.0 * ops.h) * dth
    if model.kind == ANELASTIC:
        cpp = model.cp * model.pibar
        return (cpp[ci] + cpp[cj]) / (2.0 * ops.grad_den) * dth
    if model.kind == PSEUDO_INCOMPRESSIBLE:
        if np.any(theta <= 0):
            raise ValueError("pseudo-incompressible Theta must stay positive")
        if V is None:
            raise ValueError("pseudo-incompressible forcing needs V for the kinetic density")
        k = kinetic_density(V, ops)
        gz = (model.g * model.z - k) / (theta * theta)
        return -(gz[ci] + gz[cj]) / (2.0 * ops.grad_den) * dth
    raise ValueError(model.kind)


# --------------------------------------------------------------------------
# dense commutator reference (test oracle)
# --------------------------------------------------------------------------

_DENSE_LIMIT = 200


def dense_flux_matrix(V: np.ndarray, ops: ModelOps) -> np.ndarray:
    if ops.nt > _DENSE_LIMIT:
        raise ValueError(f"dense operators limited to {_DENSE_LIMIT} cells")
    A = np.zeros((ops.nt, ops.nt))
    A[ops.ci, ops.cj] = -ops.divw * V / (2.0 * ops.vol[ops.ci])
    A[ops.cj, ops.ci] = ops.divw * V / (2.0 * ops.vol[ops.cj])
    return A


def dense_one_form(K: np.ndarray, ops: ModelOps) -> np.ndarray:
    """Dense antisymmetric matrix extending an edge one-form to second
    neighbors.

    Around each vertex, consecutive fan triples (a, b, c) fix the missing
    entry through D_ab + D_bc + D_ca = (kite_b / dual_area) * circulation.
    Only entries the commutator actually reads are produced this way.
    """
    if ops.nt > _DENSE_LIMIT:
        raise ValueError(f"dense operators limited to {_DENSE_LIMIT} cells")
    mesh, dual = ops.mesh, ops.dual
    D = np.zeros((ops.nt, ops.nt))
    D[ops.ci, ops.cj] = K
    D[ops.cj, ops.ci] = -K
    vort = vorticity(K, ops)
    for v in range(ops.nv):
        lo, hi = dual.fan_ptr[v], dual.fan_ptr[v + 1]
        ts = dual.fan_tri[lo:hi]
        kf = dual.fan_kite[lo:hi] / dual.dual_area[v]
        d = len(ts)
        closed = not mesh.wall_vert[v]
        ntrip = d if closed else d - 2
        for q in range(max(ntrip, 0)):
            a, b, c = ts[q], ts[(q + 1) % d], ts[(q + 2) % d]
            if (min(a, c), max(a, c)) in mesh._pair_to_edge:
                continue  # already a neighbor entry
            val = kf[(q + 1) % d] * vort[v] - D[a, b] - D[b, c]
            D[c, a] = val
            D[a, c] = -val
    return D


def dense_bracket_residual(V: np.ndarray, theta: np.ndarray, model: ModelSpec) -> np.ndarray:
    """Full matrix residual of the momentum system in commutator form.

    Returns ``[D vol, A] vol^-1 + F`` where D is the dense one-form (times the
    inverse-Theta edge factor for the pseudo-incompressible model), A the
    dense flux matrix, and F_ij = -1/2 (dl_i + dl_j)(Theta_j - Theta_i) the
    tracer forcing with dl the Theta-derivative of the Lagrangian density.
    Reference implementation for validating the explicit edge formulas.
    """
    ops = model.ops
    A = dense_flux_matrix(V, ops)
    K = flat(V, ops)
    if model.kind == PSEUDO_INCOMPRESSIBLE:
        K = K * _theta_tilde(theta, ops)
    D = dense_one_form(K, ops)
    vol = ops.vol
    DV = D * vol[None, :]
    bracket = (DV @ A - A @ DV) / vol[None, :]

    if model.kind == BOUSSINESQ:
        dl = model.z
    elif model.kind == ANELASTIC:
        dl = -model.cp * model.pibar
    else:
        k = kinetic_density(V, ops)
        dl = (model.g * model.z - k) / (theta * theta)
    F = -0.5 * (dl[:, None] + dl[None, :]) * (theta[None, :] - theta[:, None])
    return bracket + F


def bracket_residual_edges(V: np.ndarray, theta: np.ndarray, model: ModelSpec) -> np.ndarray:
    """Edge values the dense residual must match: h sigma (F - Adv) + 2(kap_i - kap_j).

    kap is the per-cell half-contraction of the circulated one-form with the
    fluxes (the kinetic density for boussinesq/anelastic), the gauge absorbed
    into the modified pressure.
    """
    ops = model.ops
    adv = advection(V, model, theta)
    frc = forcing(model, theta, V)
    if model.kind == PSEUDO_INCOMPRESSIBLE:
        q = ops.kin_w * V * V * _theta_tilde(theta, ops)
    else:
        q = ops.kin_w * V * V
    acc = (np.bincount(ops.ci, weights=q, minlength=ops.nt)
           + np.bincount(ops.cj, weights=q, minlength=ops.nt))
    kap = acc / (4.0 * ops.vol)
    return ops.h * ops.sigma * (frc - adv) + 2.0 * (kap[ops.ci] - kap[ops.cj])
