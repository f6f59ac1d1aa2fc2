"""Triangular channel meshes and their circumcentric dual geometry.

The domain is a channel [0, Lx] x [0, Lz], periodic in x with rigid walls at
z = 0 and z = Lz.  Primal cells are triangles; the dual node of a triangle is
its circumcenter, so primal and dual edges are orthogonal by construction.

Conventions used throughout the package:

* Interior edges carry a fixed orientation from cell ``i`` to cell ``j`` with
  ``i < j``; the unit normal ``n`` points from i to j.
* Each interior edge stores its two endpoint vertices as ``vminus`` /
  ``vplus``: ``vminus`` is the endpoint on the counterclockwise side of ``n``
  (rotate ``n`` by +90 degrees and you point at it).
* Vertex fans list the incident triangles in counterclockwise order; for wall
  vertices the fan is an open chain.
* All areas entering dual-cell bookkeeping are signed (shoelace), which makes
  the partition identities exact: kites of a triangle sum to its area, kites
  around a vertex sum to the dual-cell area.

Seam handling: triangles crossing x = 0/Lx keep wrapped vertex indices but all
geometry is evaluated in per-triangle unwrapped coordinates (nearest image of
each vertex relative to the first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class MeshError(Exception):
    """Invalid mesh construction arguments or broken topology."""


class MeshQualityError(MeshError):
    """Degenerate dual geometry (nonpositive dual length, inverted dual cell)."""


# --------------------------------------------------------------------------
# primal mesh
# --------------------------------------------------------------------------

@dataclass
class Mesh:
    """Immutable triangular mesh of a periodic-in-x channel."""

    verts: np.ndarray          # (nv, 2) vertex positions, x in [0, lx)
    tris: np.ndarray           # (nt, 3) ccw vertex indices
    lx: float
    lz: float
    nx: int
    nz: int
    seed: int | None = None
    c: float = 0.0

    # derived, filled by _finalize
    tri_xy: np.ndarray = field(default=None, repr=False)        # (nt, 3, 2) unwrapped
    tri_area: np.ndarray = field(default=None, repr=False)      # (nt,)
    tri_centroid: np.ndarray = field(default=None, repr=False)  # (nt, 2), x wrapped
    edge_cells: np.ndarray = field(default=None, repr=False)    # (ne, 2) i < j
    edge_vminus: np.ndarray = field(default=None, repr=False)   # (ne,)
    edge_vplus: np.ndarray = field(default=None, repr=False)    # (ne,)
    edge_f: np.ndarray = field(default=None, repr=False)        # (ne,) primal length
    edge_normal: np.ndarray = field(default=None, repr=False)   # (ne, 2) unit, i -> j
    edge_mid: np.ndarray = field(default=None, repr=False)      # (ne, 2), x wrapped
    wall_edges: np.ndarray = field(default=None, repr=False)    # (nw, 3) cell, v1, v2
    wall_vert: np.ndarray = field(default=None, repr=False)     # (nv,) bool
    _pair_to_edge: dict = field(default=None, repr=False)
    _multigraph: bool = field(default=False, repr=False)

    @property
    def n_verts(self) -> int:
        return len(self.verts)

    @property
    def n_cells(self) -> int:
        return len(self.tris)

    @property
    def n_edges(self) -> int:
        return len(self.edge_cells)

    @property
    def fx(self) -> float:
        return self.lx / self.nx

    @property
    def fz(self) -> float:
        return self.lz / self.nz

    def neighbors(self, i: int) -> list[int]:
        """Cells adjacent to cell i across interior edges."""
        out = []
        for e in self.cell_edges(i):
            a, b = self.edge_cells[e]
            out.append(int(b) if a == i else int(a))
        return out

    def cell_edges(self, i: int) -> list[int]:
        """Interior edge ids bordering cell i."""
        return self._cell_edge_list[i]

    def wrap_x(self, x):
        return np.mod(x, self.lx)


def build_regular(nx: int, nz: int, lx: float, lz: float) -> Mesh:
    """Regular strip of 2*nx*nz triangles, periodic in x.

    Rows of vertices alternate a half-cell x offset so triangles alternate
    up/down.  Cells are equilateral only when lz/nz == (lx/nx) * sqrt(3)/2;
    the constructor honours the requested counts and domain exactly.
    """
    if nx < 2 or nz < 2:
        raise MeshError("nx and nz must be at least 2")
    if lx <= 0 or lz <= 0:
        raise MeshError("domain lengths must be positive")
    fx, fz = lx / nx, lz / nz

    verts = np.empty((nx * (nz + 1), 2))
    for k in range(nz + 1):
        off = 0.5 * (k % 2)
        i = np.arange(nx)
        verts[k * nx : (k + 1) * nx, 0] = np.mod((i + off) * fx, lx)
        verts[k * nx : (k + 1) * nx, 1] = k * fz

    def vid(k, i):
        return k * nx + (i % nx)

    tris = np.empty((2 * nx * nz, 3), dtype=np.int64)
    t = 0
    for k in range(nz):
        p = k % 2
        for i in range(nx):
            tris[t] = (vid(k, i), vid(k, i + 1), vid(k + 1, i + p))
            t += 1
        for i in range(nx):
            tris[t] = (vid(k + 1, i + 1), vid(k + 1, i), vid(k, i + 1 - p))
            t += 1

    mesh = Mesh(verts=verts, tris=tris, lx=float(lx), lz=float(lz),
                nx=nx, nz=nz)
    _finalize(mesh)
    return mesh


def build_equilateral(nx: int, nz: int, lx: float) -> Mesh:
    """Regular mesh whose triangles are exactly equilateral (lz derived)."""
    fx = lx / nx
    return build_regular(nx, nz, lx, nz * fx * math.sqrt(3.0) / 2.0)


def _repair_unwrap(mesh: Mesh, xy: np.ndarray) -> None:
    """Resolve ambiguous seam unwraps (edges spanning exactly lx/2).

    Among the nine x-shift combinations of vertices 1 and 2 keep the most
    compact one, preferring counterclockwise at equal perimeter.  Genuinely
    flipped triangles stay flipped: every alternative inflates the perimeter.
    """
    def _perim(tri):
        return (np.linalg.norm(tri[1] - tri[0]) + np.linalg.norm(tri[2] - tri[1])
                + np.linalg.norm(tri[0] - tri[2]))

    def _area(tri):
        d1, d2 = tri[1] - tri[0], tri[2] - tri[0]
        return 0.5 * (d1[0] * d2[1] - d1[1] * d2[0])

    scale = 4.0 * (mesh.fx + mesh.fz)
    for t in range(len(xy)):
        if _area(xy[t]) > 0 and _perim(xy[t]) <= scale:
            continue
        best, best_key = None, None
        for s1 in (-1.0, 0.0, 1.0):
            for s2 in (-1.0, 0.0, 1.0):
                cand = xy[t].copy()
                cand[1, 0] += s1 * mesh.lx
                cand[2, 0] += s2 * mesh.lx
                key = (round(_perim(cand) / mesh.lx, 9), -np.sign(_area(cand)))
                if best_key is None or key < best_key:
                    best, best_key = cand, key
        xy[t] = best


def perturb_interior(mesh: Mesh, c: float, seed: int) -> Mesh:
    """Randomly displace internal vertices by up to (c*fx/2, c*fz/2).

    Internal vertices are those not belonging to any boundary triangle
    (a triangle with a vertex on either wall), so boundary triangles stay
    untouched.  Draws are uniform in [-0.5, 0.5] per coordinate from
    numpy's default generator (PCG64), one pair per vertex, which makes the
    result reproducible across platforms for a given seed.
    """
    if not 0.0 <= c < 0.5:
        raise MeshError(f"perturbation amplitude c={c} outside [0, 0.5)")
    rng = np.random.default_rng(seed)
    r = rng.uniform(-0.5, 0.5, size=(mesh.n_verts, 2))

    boundary_tri = mesh.wall_vert[mesh.tris].any(axis=1)
    internal = np.ones(mesh.n_verts, dtype=bool)
    internal[np.unique(mesh.tris[boundary_tri])] = False

    verts = mesh.verts.copy()
    verts[internal, 0] += c * mesh.fx * r[internal, 0]
    verts[internal, 1] += c * mesh.fz * r[internal, 1]
    verts[:, 0] = np.mod(verts[:, 0], mesh.lx)

    out = Mesh(verts=verts, tris=mesh.tris.copy(), lx=mesh.lx, lz=mesh.lz,
               nx=mesh.nx, nz=mesh.nz, seed=seed, c=float(c))
    _finalize(out)
    return out


def _finalize(mesh: Mesh) -> None:
    """Fill all derived arrays from verts/tris (wrap-aware)."""
    nv, nt = mesh.n_verts, mesh.n_cells
    lx = mesh.lx
    verts, tris = mesh.verts, mesh.tris

    xy = verts[tris].astype(float)  # (nt, 3, 2)
    # unwrap vertices 1 and 2 to the nearest x-image of vertex 0
    for s in (1, 2):
        dx = xy[:, 0, 0] - xy[:, s, 0]
        xy[:, s, 0] += lx * np.round(dx / lx)
    _repair_unwrap(mesh, xy)
    mesh.tri_xy = xy

    d1 = xy[:, 1] - xy[:, 0]
    d2 = xy[:, 2] - xy[:, 0]
    cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    mesh.tri_area = 0.5 * cross
    cen = xy.mean(axis=1)
    cen[:, 0] = np.mod(cen[:, 0], lx)
    mesh.tri_centroid = cen

    ztol = 1e-9 * mesh.lz
    mesh.wall_vert = (np.abs(verts[:, 1]) <= ztol) | (np.abs(verts[:, 1] - mesh.lz) <= ztol)

    # classify sides; two sides match when they share the vertex pair and
    # (modulo the seam) the same midpoint
    groups: dict[tuple, list] = {}
    for t in range(nt):
        for s in range(3):
            a, b = int(tris[t, s]), int(tris[t, (s + 1) % 3])
            mx = float(np.mod(0.5 * (xy[t, s, 0] + xy[t, (s + 1) % 3, 0]), lx))
            groups.setdefault((min(a, b), max(a, b)), []).append((t, s, mx))

    tol = 1e-6 * min(mesh.fx, mesh.fz)
    interior, walls = [], []
    for (a, b), sides in groups.items():
        if len(sides) == 1:
            walls.append((sides[0][0], a, b))
        elif len(sides) == 2:
            interior.append((a, b, sides[0], sides[1]))
        else:
            # seam-degenerate pair (tiny nx): cluster sides by midpoint
            remaining = list(sides)
            while remaining:
                t0, s0, m0 = remaining.pop(0)
                match = None
                for k, (t1, s1, m1) in enumerate(remaining):
                    d = abs(m1 - m0)
                    if min(d, lx - d) <= tol:
                        match = k
                        break
                if match is None:
                    walls.append((t0, a, b))
                else:
                    t1, s1, m1 = remaining.pop(match)
                    interior.append((a, b, (t0, s0, m0), (t1, s1, m1)))
            mesh._multigraph = True

    ne = len(interior)
    e_cells = np.empty((ne, 2), dtype=np.int64)
    e_vm = np.empty(ne, dtype=np.int64)
    e_vp = np.empty(ne, dtype=np.int64)
    e_f = np.empty(ne)
    e_n = np.empty((ne, 2))
    e_mid = np.empty((ne, 2))
    pair_to_edge: dict[tuple, int] = {}

    for k, (a, b, side0, side1) in enumerate(interior):
        (t0, s0, _), (t1, s1, _) = side0, side1
        ci, cj = (t0, t1) if t0 < t1 else (t1, t0)
        si = s0 if ci == t0 else s1
        # geometry in cell i's local frame
        pa = mesh.tri_xy[ci, si]
        pb = mesh.tri_xy[ci, (si + 1) % 3]
        va, vb = int(tris[ci, si]), int(tris[ci, (si + 1) % 3])
        ev = pb - pa
        f = math.hypot(ev[0], ev[1])
        n = np.array([ev[1], -ev[0]]) / f
        # orient n from cell i toward cell j using the opposite corner of i
        opp = mesh.tri_xy[ci, (si + 2) % 3]
        mid = 0.5 * (pa + pb)
        if np.dot(opp - mid, n) > 0:
            n = -n
        # vminus sits on the ccw side of n
        tvec = np.array([-n[1], n[0]])
        if np.dot(pa - mid, tvec) > 0:
            vm, vp = va, vb
        else:
            vm, vp = vb, va
        e_cells[k] = (ci, cj)
        e_vm[k], e_vp[k] = vm, vp
        e_f[k] = f
        e_n[k] = n
        e_mid[k] = (np.mod(mid[0], lx), mid[1])
        pair_to_edge.setdefault((ci, cj), k)

    mesh.edge_cells = e_cells
    mesh.edge_vminus = e_vm
    mesh.edge_vplus = e_vp
    mesh.edge_f = e_f
    mesh.edge_normal = e_n
    mesh.edge_mid = e_mid
    mesh.wall_edges = np.array(walls, dtype=np.int64).reshape(-1, 3)
    mesh._pair_to_edge = pair_to_edge
    if len(pair_to_edge) < ne:
        mesh._multigraph = True

    cell_edges: list[list[int]] = [[] for _ in range(nt)]
    for k in range(ne):
        cell_edges[e_cells[k, 0]].append(k)
        cell_edges[e_cells[k, 1]].append(k)
    mesh._cell_edge_list = cell_edges


# --------------------------------------------------------------------------
# dual geometry
# --------------------------------------------------------------------------

@dataclass
class DualGeometry:
    """Circumcentric dual of a Mesh plus the stencil tables the schemes use."""

    centers: np.ndarray        # (nt, 2) circumcenters, per-triangle frame
    h: np.ndarray              # (ne,) dual edge length
    h_signed: np.ndarray       # (ne,) (c_j - c_i) . n, equals h on valid meshes
    kites: np.ndarray          # (nt, 3) signed kite area at each corner
    dual_area: np.ndarray      # (nv,) signed dual cell area
    # vertex fans (ccw triangles; open chain at walls)
    fan_ptr: np.ndarray        # (nv+1,)
    fan_tri: np.ndarray
    fan_kite: np.ndarray       # kite area aligned with fan_tri
    # fan dual edges (consecutive fan pairs; cyclic for interior vertices)
    fe_ptr: np.ndarray         # (nv+1,)
    fe_edge: np.ndarray
    fe_sign: np.ndarray
    fe_vertex: np.ndarray      # owning vertex per entry (flattened CSR)
    # advection stencil per edge: slots [i-, j-, i+, j+]
    slot_edge: np.ndarray      # (ne, 4), 0 where missing
    slot_sign: np.ndarray      # (ne, 4), 0 where missing (wall)
    slot_base: np.ndarray      # (ne, 4) owning cell of the flux
    kcoef: np.ndarray          # (ne, 4) kite fractions K_i^-, K_j^-, K_i^+, K_j^+

    @property
    def n_verts(self) -> int:
        return len(self.fan_ptr) - 1


def circumcenters(xy: np.ndarray) -> np.ndarray:
    """Circumcenters of triangles given (n, 3, 2) corner coordinates."""
    a, b, c = xy[:, 0], xy[:, 1], xy[:, 2]
    ab, ac = b - a, c - a
    d = 2.0 * (ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])
    ab2 = (ab * ab).sum(axis=1)
    ac2 = (ac * ac).sum(axis=1)
    ux = (ac[:, 1] * ab2 - ab[:, 1] * ac2) / d
    uy = (ab[:, 0] * ac2 - ac[:, 0] * ab2) / d
    return a + np.stack([ux, uy], axis=1)


def build_dual(mesh: Mesh, strict: bool = True) -> DualGeometry:
    """Construct the circumcentric dual.

    With ``strict`` (default) a nonpositive oriented dual length or an
    inverted dual-cell kite raises MeshQualityError naming the offending
    entity; ``strict=False`` defers judgement to :func:`validate`.
    """
    if mesh._multigraph:
        raise MeshError("mesh has doubly adjacent cells (nx too small for dual operators)")

    nt, nv, ne = mesh.n_cells, mesh.n_verts, mesh.n_edges
    # work in per-triangle local coordinates so the signed-area arithmetic is
    # immune to cancellation at large x
    xy0 = mesh.tri_xy - mesh.tri_xy[:, :1, :]
    centers_local = circumcenters(xy0)
    centers = centers_local + mesh.tri_xy[:, 0, :]

    # dual lengths, oriented along the edge normal
    h_signed = np.empty(ne)
    for k in range(ne):
        ci, cj = mesh.edge_cells[k]
        shift = _frame_shift(mesh, cj, ci)
        cj_in_i = centers[cj] + shift
        h_signed[k] = float(np.dot(cj_in_i - centers[ci], mesh.edge_normal[k]))
        if strict and h_signed[k] <= 0:
            raise MeshQualityError(
                f"edge {k} (cells {ci},{cj}): nonpositive dual length {h_signed[k]:.3e}")
    h = np.abs(h_signed)

    # signed kite areas: quad [corner, mid(next), circumcenter, mid(prev)]
    kites = np.empty((nt, 3))
    for s in range(3):
        p = xy0[:, s]
        mnext = 0.5 * (p + xy0[:, (s + 1) % 3])
        mprev = 0.5 * (p + xy0[:, (s + 2) % 3])
        kites[:, s] = _quad_area(p, mnext, centers_local, mprev)

    # ccw vertex fans
    fans: list[list[int]] = [[] for _ in range(nv)]
    angles: list[list[float]] = [[] for _ in range(nv)]
    for t in range(nt):
        cen_local = mesh.tri_xy[t].mean(axis=0)
        for s in range(3):
            v = int(mesh.tris[t, s])
            rel = cen_local - mesh.tri_xy[t, s]
            fans[v].append(t)
            angles[v].append(math.atan2(rel[1], rel[0]))

    fan_ptr = np.zeros(nv + 1, dtype=np.int64)
    fan_tri_l, fan_kite_l = [], []
    fe_ptr = np.zeros(nv + 1, dtype=np.int64)
    fe_edge_l, fe_sign_l, fe_vert_l = [], [], []

    for v in range(nv):
        order = np.argsort(angles[v])
        ts = [fans[v][o] for o in order]
        fan_ptr[v + 1] = fan_ptr[v] + len(ts)
        for t in ts:
            s = int(np.where(mesh.tris[t] == v)[0][0])
            fan_tri_l.append(t)
            fan_kite_l.append(kites[t, s])
        closed = not mesh.wall_vert[v]
        npairs = len(ts) if closed else len(ts) - 1
        fe_ptr[v + 1] = fe_ptr[v] + max(npairs, 0)
        for q in range(npairs):
            a, b = ts[q], ts[(q + 1) % len(ts)]
            key = (a, b) if a < b else (b, a)
            e = mesh._pair_to_edge.get(key)
            if e is None:
                raise MeshError(f"fan of vertex {v}: triangles {a},{b} not adjacent")
            fe_edge_l.append(e)
            fe_sign_l.append(1.0 if mesh.edge_cells[e, 0] == a else -1.0)
            fe_vert_l.append(v)

    fan_tri = np.array(fan_tri_l, dtype=np.int64)
    fan_kite = np.array(fan_kite_l)
    dual_area = np.zeros(nv)
    np.add.at(dual_area, np.repeat(np.arange(nv), np.diff(fan_ptr)), fan_kite)

    if strict:
        bad = np.where(fan_kite <= 0)[0]
        if len(bad):
            v = int(np.repeat(np.arange(nv), np.diff(fan_ptr))[bad[0]])
            raise MeshQualityError(f"vertex {v}: inverted dual cell (kite <= 0)")

    # advection stencil tables
    slot_edge = np.zeros((ne, 4), dtype=np.int64)
    slot_sign = np.zeros((ne, 4))
    slot_base = np.zeros((ne, 4), dtype=np.int64)
    kcoef = np.zeros((ne, 4))
    tri_corner = {}  # (tri, vert) -> local corner
    for t in range(nt):
        for s in range(3):
            tri_corner[(t, int(mesh.tris[t, s]))] = s

    for k in range(ne):
        ci, cj = (int(mesh.edge_cells[k, 0]), int(mesh.edge_cells[k, 1]))
        vm, vp = int(mesh.edge_vminus[k]), int(mesh.edge_vplus[k])
        for slot, (cell, vert) in enumerate(((ci, vm), (cj, vm), (ci, vp), (cj, vp))):
            slot_base[k, slot] = cell
            kcoef[k, slot] = kites[cell, tri_corner[(cell, vert)]] / dual_area[vert]
            e2 = _other_edge_at(mesh, cell, vert, k)
            if e2 is None:
                continue  # wall side: free-slip, zero flux
            slot_edge[k, slot] = e2
            slot_sign[k, slot] = 1.0 if mesh.edge_cells[e2, 0] == cell else -1.0

    return DualGeometry(
        centers=centers, h=h, h_signed=h_signed, kites=kites, dual_area=dual_area,
        fan_ptr=fan_ptr, fan_tri=fan_tri, fan_kite=fan_kite,
        fe_ptr=fe_ptr, fe_edge=np.array(fe_edge_l, dtype=np.int64),
        fe_sign=np.array(fe_sign_l), fe_vertex=np.array(fe_vert_l, dtype=np.int64),
        slot_edge=slot_edge, slot_sign=slot_sign, slot_base=slot_base, kcoef=kcoef)


def _frame_shift(mesh: Mesh, t_from: int, t_to: int) -> np.ndarray:
    """x-shift mapping triangle t_from's local frame into t_to's frame."""
    shared = np.intersect1d(mesh.tris[t_from], mesh.tris[t_to])
    v = int(shared[0])
    s_from = int(np.where(mesh.tris[t_from] == v)[0][0])
    s_to = int(np.where(mesh.tris[t_to] == v)[0][0])
    return np.array([mesh.tri_xy[t_to, s_to, 0] - mesh.tri_xy[t_from, s_from, 0], 0.0])


def _other_edge_at(mesh: Mesh, cell: int, vert: int, edge: int) -> int | None:
    """The other interior edge of `cell` incident at `vert` (None if wall)."""
    for e in mesh.cell_edges(cell):
        if e == edge:
            continue
        if mesh.edge_vminus[e] == vert or mesh.edge_vplus[e] == vert:
            return e
    return None


def _quad_area(a, b, c, d) -> np.ndarray:
    """Signed shoelace area of quads given stacked corner arrays."""
    x = np.stack([a[..., 0], b[..., 0], c[..., 0], d[..., 0]], axis=-1)
    y = np.stack([a[..., 1], b[..., 1], c[..., 1], d[..., 1]], axis=-1)
    xn = np.roll(x, -1, axis=-1)
    yn = np.roll(y, -1, axis=-1)
    return 0.5 * (x * yn - xn * y).sum(axis=-1)


# --------------------------------------------------------------------------
# quality and validation
# --------------------------------------------------------------------------

@dataclass
class MeshQualityReport:
    dh: np.ndarray          # (nv,) dual distortion per vertex, >= 1
    max_dh: float
    min_h: float
    max_h: float
    min_angle: float        # radians


def quality(mesh: Mesh, dual: DualGeometry) -> MeshQualityReport:
    """Dual-cell distortion max(h)/min(h) per vertex plus global extremes."""
    nv = mesh.n_verts
    dh = np.ones(nv)
    for v in range(nv):
        sl = slice(dual.fe_ptr[v], dual.fe_ptr[v + 1])
        hs = dual.h[dual.fe_edge[sl]]
        if len(hs):
            dh[v] = hs.max() / hs.min()
    angles = _min_angles(mesh)
    return MeshQualityReport(dh=dh, max_dh=float(dh.max()),
                             min_h=float(dual.h.min()), max_h=float(dual.h.max()),
                             min_angle=float(angles.min()))


def _min_angles(mesh: Mesh) -> np.ndarray:
    xy = mesh.tri_xy
    out = np.full(mesh.n_cells, np.pi)
    for s in range(3):
        u = xy[:, (s + 1) % 3] - xy[:, s]
        w = xy[:, (s + 2) % 3] - xy[:, s]
        cosang = (u * w).sum(axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
        out = np.minimum(out, np.arccos(np.clip(cosang, -1.0, 1.0)))
    return out


def validate(mesh: Mesh, dual: DualGeometry | None = None) -> list[str]:
    """Check all mesh/dual invariants; returns one message per violation."""
    v: list[str] = []
    if dual is None:
        try:
            dual = build_dual(mesh, strict=False)
        except MeshError as exc:
            return [f"dual construction failed: {exc}"]

    bad = np.where(mesh.tri_area <= 0)[0]
    for t in bad:
        v.append(f"triangle {t}: not counterclockwise (area {mesh.tri_area[t]:.3e})")

    total = mesh.tri_area.sum()
    if abs(total - mesh.lx * mesh.lz) > 1e-12 * mesh.lx * mesh.lz:
        v.append(f"total area {total!r} != lx*lz {mesh.lx * mesh.lz!r}")

    counts = {}
    for t in range(mesh.n_cells):
        for s in range(3):
            key = (min(mesh.tris[t, s], mesh.tris[t, (s + 1) % 3]),
                   max(mesh.tris[t, s], mesh.tris[t, (s + 1) % 3]))
            counts[key] = counts.get(key, 0) + 1
    for key, n in counts.items():
        if n > 2 and not mesh._multigraph:
            v.append(f"edge {key}: borders {n} triangles")

    for w in mesh.wall_edges:
        if not (mesh.wall_vert[w[1]] and mesh.wall_vert[w[2]]):
            v.append(f"boundary edge {tuple(w[1:])}: single-sided but not on a wall")

    nv_, ne_, nf_ = mesh.n_verts, mesh.n_edges + len(mesh.wall_edges), mesh.n_cells
    if nv_ - ne_ + nf_ != 0:
        v.append(f"euler characteristic {nv_ - ne_ + nf_} != 0 for periodic strip")

    bad = np.where(dual.h_signed <= 0)[0]
    for e in bad:
        ci, cj = mesh.edge_cells[e]
        v.append(f"edge {e} (cells {ci},{cj}): nonpositive dual length "
                 f"{dual.h_signed[e]:.3e}")

    bad = np.where(dual.fan_kite <= 0)[0]
    if len(bad):
        owner = np.repeat(np.arange(mesh.n_verts), np.diff(dual.fan_ptr))
        for b in bad:
            v.append(f"vertex {owner[b]}: inverted dual cell (kite {dual.fan_kite[b]:.3e})")

    kite_by_tri = dual.kites.sum(axis=1)
    bad = np.where(np.abs(kite_by_tri - mesh.tri_area) > 1e-12 * np.abs(mesh.tri_area))[0]
    for t in bad:
        v.append(f"triangle {t}: kite partition {kite_by_tri[t]!r} != area {mesh.tri_area[t]!r}")

    dsum = dual.dual_area.sum()
    if abs(dsum - mesh.lx * mesh.lz) > 1e-12 * mesh.lx * mesh.lz:
        v.append(f"dual cells do not tile the domain: {dsum!r}")

    return v


def accept_perturbed(base: Mesh, c: float, seed: int, max_dh: float | None = None,
                     max_tries: int = 50) -> tuple[Mesh, DualGeometry, int, int]:
    """Perturb with reseeding until the mesh validates (and meets a dh cap).

    Returns (mesh, dual, seed_used, rejections).
    """
    rejections = 0
    for k in range(max_tries):
        s = seed + k
        m = perturb_interior(base, c, s)
        if validate(m):
            rejections += 1
            continue
        d = build_dual(m, strict=False)
        if max_dh is not None and quality(m, d).max_dh > max_dh:
            rejections += 1
            continue
        return m, d, s, rejections
    raise MeshQualityError(
        f"no acceptable perturbed mesh in {max_tries} seeds (c={c}, start seed {seed})")


# --------------------------------------------------------------------------
# plain-text mesh files
# --------------------------------------------------------------------------

def save_mesh(mesh: Mesh, path: str) -> None:
    """Write the plain-text format: metadata, vertex, and triangle sections."""
    with open(path, "w") as fh:
        fh.write("# soundproof mesh\n")
        fh.write(f"m nx {mesh.nx}\nm nz {mesh.nz}\n")
        fh.write(f"m lx {mesh.lx:.17g}\nm lz {mesh.lz:.17g}\n")
        fh.write(f"m seed {'none' if mesh.seed is None else mesh.seed}\n")
        fh.write(f"m c {mesh.c:.17g}\n")
        for x, z in mesh.verts:
            fh.write(f"v {x:.17g} {z:.17g}\n")
        for a, b, c_ in mesh.tris:
            fh.write(f"t {a} {b} {c_}\n")


def load_mesh(path: str) -> Mesh:
    meta: dict[str, str] = {}
    verts, tris = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tag, *rest = line.split()
            if tag == "m":
                meta[rest[0]] = rest[1]
            elif tag == "v":
                verts.append((float(rest[0]), float(rest[1])))
            elif tag == "t":
                tris.append((int(rest[0]), int(rest[1]), int(rest[2])))
            else:
                raise MeshError(f"unknown record {tag!r} in {path}")
    for key in ("nx", "nz", "lx", "lz"):
        if key not in meta:
            raise MeshError(f"mesh file missing metadata {key!r}")
    seed = None if meta.get("seed", "none") == "none" else int(meta["seed"])
    mesh = Mesh(verts=np.array(verts), tris=np.array(tris, dtype=np.int64),
                lx=float(meta["lx"]), lz=float(meta["lz"]),
                nx=int(meta["nx"]), nz=int(meta["nz"]),
                seed=seed, c=float(meta.get("c", 0.0)))
    _finalize(mesh)
    return mesh
