"""Mesh construction, perturbation, dual geometry, quality, validation, I/O."""

import math

import numpy as np
import pytest

from soundproof import mesh as M


def clip_polygon(poly, a, b):
    """Sutherland-Hodgman clip of polygon by half-plane left of segment a->b."""
    def inside(p):
        return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-14

    def intersect(p, q):
        d1 = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        d2 = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
        t = d1 / (d1 - d2)
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))

    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        if inside(q):
            if not inside(p):
                out.append(intersect(p, q))
            out.append(q)
        elif inside(p):
            out.append(intersect(p, q))
    return out


def poly_area(poly):
    s = 0.0
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


class TestBuildRegular:
    def test_paper_resolution(self):
        m = M.build_regular(384, 20, 24.0, 1.0)
        assert m.n_cells == 2 * 384 * 20
        assert m.fx == pytest.approx(0.0625)
        assert m.fz == pytest.approx(0.05)

    def test_tiny_mesh_counts_and_area(self):
        m = M.build_regular(2, 2, 2.0, 2.0)
        assert m.n_cells == 8
        assert m.tri_area.sum() == pytest.approx(4.0, rel=1e-14)

    def test_bubble_resolution(self):
        m = M.build_regular(321, 186, 20000.0, 10000.0)
        assert m.n_cells == 119412

    def test_vertex_count_and_euler(self):
        m = M.build_regular(12, 5, 3.0, 1.0)
        assert m.n_verts == 12 * 6
        ne_total = m.n_edges + len(m.wall_edges)
        assert m.n_verts - ne_total + m.n_cells == 0  # periodic strip

    def test_total_area(self):
        m = M.build_regular(17, 7, 5.0, 2.0)
        assert m.tri_area.sum() == pytest.approx(10.0, rel=1e-12)
        assert np.all(m.tri_area > 0)

    def test_invalid_arguments(self):
        with pytest.raises(M.MeshError):
            M.build_regular(1, 4, 1.0, 1.0)
        with pytest.raises(M.MeshError):
            M.build_regular(4, 4, 0.0, 1.0)
        with pytest.raises(M.MeshError):
            M.build_regular(4, 4, 1.0, -1.0)


class TestPerturb:
    def test_zero_amplitude_identity(self):
        m = M.build_equilateral(8, 4, 8.0)
        p = M.perturb_interior(m, 0.0, 3)
        assert np.array_equal(p.verts, m.verts)
        assert np.array_equal(p.tris, m.tris)

    def test_deterministic(self):
        m = M.build_equilateral(10, 6, 10.0)
        a = M.perturb_interior(m, 0.2, 11)
        b = M.perturb_interior(m, 0.2, 11)
        assert np.array_equal(a.verts, b.verts)

    def test_boundary_triangles_untouched(self):
        m = M.build_equilateral(10, 6, 10.0)
        p = M.perturb_interior(m, 0.2, 1)
        boundary_tri = m.wall_vert[m.tris].any(axis=1)
        bverts = np.unique(m.tris[boundary_tri])
        assert np.array_equal(p.verts[bverts], m.verts[bverts])
        moved = np.any(p.verts != m.verts, axis=1)
        assert moved.sum() > 0

    def test_displacement_bounds(self):
        m = M.build_equilateral(10, 8, 10.0)
        c = 0.2
        p = M.perturb_interior(m, c, 5)
        dx = p.verts[:, 0] - m.verts[:, 0]
        dx -= m.lx * np.round(dx / m.lx)
        dz = p.verts[:, 1] - m.verts[:, 1]
        assert np.abs(dx).max() <= 0.5 * c * m.fx + 1e-15
        assert np.abs(dz).max() <= 0.5 * c * m.fz + 1e-15

    def test_amplitude_range(self):
        m = M.build_equilateral(8, 4, 8.0)
        with pytest.raises(M.MeshError):
            M.perturb_interior(m, 0.5, 0)
        with pytest.raises(M.MeshError):
            M.perturb_interior(m, -0.1, 0)


class TestDual:
    def test_equilateral_h_over_f(self):
        m = M.build_equilateral(12, 6, 12.0)
        d = M.build_dual(m)
        np.testing.assert_allclose(d.h / m.edge_f, 1.0 / math.sqrt(3.0), rtol=1e-12)

    def test_kite_fraction_partition(self):
        m = M.build_equilateral(9, 5, 9.0)
        mp = M.perturb_interior(m, 0.2, 2)
        d = M.build_dual(mp, strict=False)
        ksum = np.zeros(mp.n_verts)
        owner = np.repeat(np.arange(mp.n_verts), np.diff(d.fan_ptr))
        np.add.at(ksum, owner, d.fan_kite / d.dual_area[owner])
        np.testing.assert_allclose(ksum, 1.0, rtol=1e-12)

    def test_kites_partition_triangles(self):
        m, d, _, _ = M.accept_perturbed(M.build_equilateral(9, 5, 9.0), 0.2, 7, max_dh=7.0)
        np.testing.assert_allclose(d.kites.sum(axis=1), m.tri_area, rtol=1e-12)

    def test_kite_total_is_domain(self):
        m, d, _, _ = M.accept_perturbed(M.build_equilateral(10, 6, 10.0), 0.15, 3, max_dh=7.0)
        assert d.dual_area.sum() == pytest.approx(m.lx * m.lz, rel=1e-12)

    def test_dual_orthogonal_to_primal(self):
        for mesh_c in (0.0, 0.2):
            base = M.build_equilateral(8, 5, 8.0)
            if mesh_c:
                m, d, _, _ = M.accept_perturbed(base, mesh_c, 4, max_dh=7.0)
            else:
                m, d = base, M.build_dual(base)
            for e in range(m.n_edges):
                ci, cj = m.edge_cells[e]
                shift = M._frame_shift(m, cj, ci)
                dvec = d.centers[cj] + shift - d.centers[ci]
                tang = np.array([-m.edge_normal[e, 1], m.edge_normal[e, 0]])
                assert abs(np.dot(dvec, tang)) < 1e-12 * np.linalg.norm(dvec) + 1e-14

    def test_kites_match_polygon_clipping_oracle(self):
        """Signed kites equal brute-force dual-cell/triangle intersections."""
        base = M.build_equilateral(8, 5, 8.0)
        m, d, _, _ = M.accept_perturbed(base, 0.2, 9, max_dh=7.0)
        rng = np.random.default_rng(0)
        verts = rng.permutation(m.n_verts)[:40]
        checked = 0
        for v in verts:
            if m.wall_vert[v]:
                continue  # oracle built for interior fans
            lo, hi = d.fan_ptr[v], d.fan_ptr[v + 1]
            ts = d.fan_tri[lo:hi]
            # dual cell polygon in the frame of vertex v
            poly = []
            for t in ts:
                s = int(np.where(m.tris[t] == v)[0][0])
                poly.append(tuple(d.centers[t] - m.tri_xy[t, s] + m.verts[v]))
            for idx in range(len(ts)):
                t = ts[idx]
                s = int(np.where(m.tris[t] == v)[0][0])
                shift = m.verts[v] - m.tri_xy[t, s]
                tri = [tuple(m.tri_xy[t, k] + shift) for k in range(3)]
                clipped = poly
                for k in range(3):
                    clipped = clip_polygon(clipped, tri[k], tri[(k + 1) % 3])
                    if not clipped:
                        break
                oracle = poly_area(clipped) if clipped else 0.0
                assert d.fan_kite[lo + idx] == pytest.approx(oracle, abs=1e-10)
                checked += 1
        assert checked > 50

    def test_multigraph_rejected(self):
        m = M.build_regular(2, 3, 2.0, 3.0)
        with pytest.raises(M.MeshError):
            M.build_dual(m)


class TestQuality:
    def test_equilateral_dh_is_one(self):
        m = M.build_equilateral(16, 8, 16.0)
        q = M.quality(m, M.build_dual(m))
        np.testing.assert_allclose(q.dh, 1.0, rtol=1e-12)
        assert q.min_angle == pytest.approx(math.pi / 3, rel=1e-12)

    def test_perturbed_dh_range(self):
        base = M.build_equilateral(24, 8, 24.0)
        m, d, _, _ = M.accept_perturbed(base, 0.2, 1, max_dh=7.0)
        q = M.quality(m, d)
        assert 1.0 < q.max_dh <= 7.0

    def test_stretched_pair_ratio(self):
        # anisotropic regular mesh: two incident h values with a known ratio
        m = M.build_regular(10, 5, 10.0, 4.0)
        d = M.build_dual(m)
        q = M.quality(m, d)
        hvals = np.unique(np.round(d.h, 12))
        assert q.max_dh == pytest.approx(hvals.max() / hvals.min(), rel=1e-9)


class TestValidate:
    def test_regular_clean(self):
        m = M.build_regular(384, 20, 24.0, 1.0)
        assert M.validate(m) == []

    def test_flipped_triangle_reported(self):
        m = M.build_equilateral(8, 4, 8.0)
        m.tris[5] = m.tris[5][::-1]
        M._finalize(m)
        msgs = [v for v in M.validate(m) if "counterclockwise" in v]
        assert len(msgs) == 1 and "5" in msgs[0]

    def test_aggressive_perturbation_reports_violations(self):
        base = M.build_equilateral(10, 6, 10.0)
        found = False
        for seed in range(40):
            bad = M.perturb_interior(base, 0.45, seed)
            v = M.validate(bad)
            if any("dual" in msg for msg in v):
                found = True
                break
        assert found, "no degenerate dual produced by c=0.45 in 40 seeds"

    def test_strict_dual_raises(self):
        base = M.build_regular(96, 10, 24.0, 1.0)  # fz/fx = 0.4: obtuse rows
        with pytest.raises(M.MeshQualityError):
            M.build_dual(base)


class TestMeshIO:
    def test_roundtrip_bits(self, tmp_path):
        base = M.build_equilateral(10, 6, 10.0)
        m, _, seed, _ = M.accept_perturbed(base, 0.2, 4, max_dh=7.0)
        path = tmp_path / "mesh.txt"
        M.save_mesh(m, str(path))
        m2 = M.load_mesh(str(path))
        assert np.array_equal(m2.verts, m.verts)
        assert np.array_equal(m2.tris, m.tris)
        assert (m2.lx, m2.lz, m2.nx, m2.nz) == (m.lx, m.lz, m.nx, m.nz)
        assert m2.seed == seed and m2.c == 0.2
        assert M.validate(m2) == []

    def test_missing_metadata(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("m nx 4\nv 0 0\n")
        with pytest.raises(M.MeshError):
            M.load_mesh(str(path))
