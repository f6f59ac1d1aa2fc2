"""Discrete operators against identities and the dense commutator reference."""

import numpy as np
import pytest

from soundproof import mesh as M
from soundproof import models as MD
from soundproof import operators as OP


def make_models(mesh, dual):
    rho = MD.exp_profile(1.0, -1.0)
    theta = MD.exp_profile(np.exp(-1.0), 1.0)
    pibar = MD.exp_profile(np.exp(1.0), -1.0)
    return {
        "boussinesq": MD.make_boussinesq(mesh, dual),
        "anelastic": MD.make_anelastic(mesh, rho, theta, cp=1.0, g=1.0,
                                       pibar=pibar, dual=dual),
        "pseudo_incompressible": MD.make_pseudo_incompressible(
            mesh, rho, theta, g=1.0, dual=dual),
    }


@pytest.fixture(scope="module")
def geo():
    base = M.build_equilateral(7, 4, 7.0)
    mesh, dual, _, _ = M.accept_perturbed(base, 0.15, 2, max_dh=7.0)
    return mesh, dual


def divfree(model, rng):
    psi = rng.standard_normal(model.ops.nv)
    psi[model.mesh.wall_vert] = 0.0
    return OP.velocity_from_stream(psi, model.ops)


class TestFlux:
    def test_zero_velocity(self, geo):
        mesh, dual = geo
        model = MD.make_boussinesq(mesh, dual)
        A = OP.flux_from_velocity(np.zeros(mesh.n_edges), model.ops)
        assert np.all(A.matrix().toarray() == 0.0)

    def test_defining_formula_single_edge(self):
        # uniform unit geometry: f = vol = 1, V = 2 across one edge -> A = -1
        mesh = M.build_equilateral(6, 4, 6.0)
        model = MD.make_boussinesq(mesh)
        ops = model.ops
        e = 10
        V = np.zeros(mesh.n_edges)
        V[e] = 2.0
        i, j = mesh.edge_cells[e]
        expect = -mesh.edge_f[e] * 2.0 / (2.0 * ops.vol[i])
        A = OP.flux_from_velocity(V, ops)
        assert A(int(i), int(j)) == pytest.approx(expect, rel=1e-14)
        assert A(int(i), int(i)) == 0.0

    def test_volume_antisymmetry_exact(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(3)
        for model in make_models(mesh, dual).values():
            V = rng.standard_normal(mesh.n_edges)
            A = OP.flux_from_velocity(V, model.ops).matrix().toarray()
            W = model.weights.vol
            asym = A.T * W[None, :] + W[:, None] * A
            assert np.abs(asym).max() <= 1e-14 * np.abs(A).max() * W.max()

    def test_divergence_free_rows_null(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(4)
        for model in make_models(mesh, dual).values():
            V = divfree(model, rng)
            A = OP.flux_from_velocity(V, model.ops).matrix().toarray()
            assert np.abs(A.sum(axis=1)).max() <= 1e-14 * np.abs(A).max()


class TestFlat:
    def test_velocity_form(self, geo):
        mesh, dual = geo
        model = MD.make_boussinesq(mesh, dual)
        rng = np.random.default_rng(5)
        V = rng.standard_normal(mesh.n_edges)
        np.testing.assert_allclose(OP.flat(V, model.ops), -dual.h * V, rtol=1e-14)

    def test_matches_skew_part_of_scaled_flux(self, geo):
        mesh, dual = geo
        models = make_models(mesh, dual)
        rng = np.random.default_rng(6)
        for model in models.values():
            ops = model.ops
            V = rng.standard_normal(mesh.n_edges)
            A = OP.flux_from_velocity(V, ops).matrix().toarray()
            Mmat = np.zeros_like(A)
            for e in range(mesh.n_edges):
                i, j = mesh.edge_cells[e]
                Mmat[i, j] = 2 * mesh.tri_area[i] * dual.h[e] / mesh.edge_f[e] * A[i, j]
                Mmat[j, i] = 2 * mesh.tri_area[j] * dual.h[e] / mesh.edge_f[e] * A[j, i]
            skew = 0.5 * (Mmat - Mmat.T)
            K = OP.flat(V, ops)
            got = skew[ops.ci, ops.cj]
            np.testing.assert_allclose(got, K, rtol=1e-12)

    def test_two_to_one_weight_ratio(self):
        # sbar_i = 1, sbar_j = 3 gives sigma = 4/3 and flat = -(4/3) h V
        mesh = M.build_equilateral(6, 4, 6.0)
        w = MD.make_weights(mesh, lambda z: np.ones_like(z))
        e = mesh.n_edges // 2
        i, j = mesh.edge_cells[e]
        vol = mesh.tri_area.copy()
        vol[j] *= 3.0
        sbar = vol / mesh.tri_area
        ci, cj = mesh.edge_cells[:, 0], mesh.edge_cells[:, 1]
        rhohat = 0.5 * (sbar[ci] + sbar[cj])
        sigma = 0.5 * rhohat * (1 / sbar[ci] + 1 / sbar[cj])
        assert rhohat[e] == pytest.approx(2.0)
        assert sigma[e] == pytest.approx(4.0 / 3.0)

    def test_linear_and_zero(self, geo):
        mesh, dual = geo
        ops = MD.make_boussinesq(mesh, dual).ops
        rng = np.random.default_rng(7)
        v1, v2 = rng.standard_normal((2, mesh.n_edges))
        np.testing.assert_allclose(OP.flat(v1 + 2 * v2, ops),
                                   OP.flat(v1, ops) + 2 * OP.flat(v2, ops), rtol=1e-12)
        assert np.all(OP.flat(np.zeros(mesh.n_edges), ops) == 0.0)


class TestVorticity:
    def test_exact_one_form_telescopes(self, geo):
        mesh, dual = geo
        ops = MD.make_boussinesq(mesh, dual).ops
        rng = np.random.default_rng(8)
        F = rng.standard_normal(mesh.n_cells)
        dF = F[ops.ci] - F[ops.cj]
        vort = OP.vorticity(dF, ops)
        interior = ~mesh.wall_vert
        assert np.abs(vort[interior]).max() <= 1e-12 * np.abs(dF).max()

    def test_zero(self, geo):
        mesh, dual = geo
        ops = MD.make_boussinesq(mesh, dual).ops
        assert np.all(OP.vorticity(np.zeros(mesh.n_edges), ops) == 0.0)

    def test_hand_built_hexagon_fan(self):
        """CCW loop sum around an interior vertex, enumerated by hand."""
        mesh = M.build_equilateral(6, 4, 6.0)
        dual = M.build_dual(mesh)
        ops = MD.make_boussinesq(mesh, dual).ops
        v = int(np.nonzero(~mesh.wall_vert)[0][0])
        lo, hi = dual.fe_ptr[v], dual.fe_ptr[v + 1]
        edges = dual.fe_edge[lo:hi]
        signs = dual.fe_sign[lo:hi]
        assert len(edges) == 6
        K = np.zeros(mesh.n_edges)
        K[edges] = np.arange(1.0, 7.0)
        expect = float(np.sum(signs * K[edges]))
        got = OP.vorticity(K, ops)[v]
        assert got == pytest.approx(expect, rel=1e-14)
        # cross-check the signs by walking the fan triangles pairwise
        ts = dual.fan_tri[dual.fan_ptr[v]:dual.fan_ptr[v + 1]]
        manual = 0.0
        for q in range(len(ts)):
            a, b = int(ts[q]), int(ts[(q + 1) % len(ts)])
            manual += OP.edge_value(K, mesh, a, b)
        assert manual == pytest.approx(got, rel=1e-14)


class TestDivergenceGradient:
    def test_zero(self, geo):
        mesh, dual = geo
        ops = MD.make_boussinesq(mesh, dual).ops
        assert np.all(OP.divergence(np.zeros(mesh.n_edges), ops) == 0.0)

    def test_matches_dense_flux_rows(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(9)
        for model in make_models(mesh, dual).values():
            ops = model.ops
            V = rng.standard_normal(mesh.n_edges)
            A = OP.dense_flux_matrix(V, ops)
            expect = -2.0 * (ops.vol / ops.area) * A.sum(axis=1)
            np.testing.assert_allclose(OP.divergence(V, ops), expect,
                                       rtol=0, atol=1e-12 * np.abs(expect).max())

    def test_gradient_constant_and_linear(self, geo):
        mesh, dual = geo
        model = MD.make_boussinesq(mesh, dual)
        ops = model.ops
        assert np.all(OP.gradient(np.full(mesh.n_cells, 3.7), ops) == 0.0)
        g = OP.gradient(model.z, ops)
        expect = (model.z[ops.cj] - model.z[ops.ci]) / dual.h
        np.testing.assert_allclose(g, expect, rtol=1e-14)

    def test_gradient_circulation_free(self, geo):
        # vorticity of sigma*h*grad(P) vanishes at interior vertices
        mesh, dual = geo
        ops = MD.make_boussinesq(mesh, dual).ops
        rng = np.random.default_rng(10)
        P = rng.standard_normal(mesh.n_cells)
        circ = ops.grad_den * OP.gradient(P, ops)
        vort = OP.vorticity(circ, ops)
        assert np.abs(vort[~mesh.wall_vert]).max() <= 1e-12 * np.abs(P).max()


class TestKineticDensity:
    def test_zero_and_sign(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(11)
        for model in make_models(mesh, dual).values():
            ops = model.ops
            assert np.all(OP.kinetic_density(np.zeros(mesh.n_edges), ops) == 0.0)
            k = OP.kinetic_density(rng.standard_normal(mesh.n_edges), ops)
            assert np.all(k >= 0.0)

    def test_single_edge_value(self):
        mesh = M.build_equilateral(6, 4, 6.0)
        model = MD.make_boussinesq(mesh)
        ops = model.ops
        e = 7
        V = np.zeros(mesh.n_edges)
        V[e] = 1.5
        k = OP.kinetic_density(V, ops)
        i, j = mesh.edge_cells[e]
        expect_i = ops.h[e] * mesh.edge_f[e] * 1.5 ** 2 / (4.0 * mesh.tri_area[i])
        assert k[i] == pytest.approx(expect_i, rel=1e-14)
        assert np.count_nonzero(k) == 2

    def test_total_matches_pairing(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(12)
        for model in make_models(mesh, dual).values():
            ops = model.ops
            V = rng.standard_normal(mesh.n_edges)
            k = OP.kinetic_density(V, ops)
            K = OP.flat(V, ops)
            A = OP.dense_flux_matrix(V, ops)
            D = np.zeros_like(A)
            D[ops.ci, ops.cj] = K
            D[ops.cj, ops.ci] = -K
            pairing = 0.5 * np.trace(D.T @ np.diag(ops.vol) @ A)
            assert float(ops.vol @ k) == pytest.approx(pairing, rel=1e-12)


class TestAdvectionForcing:
    def test_zero_velocity(self, geo):
        mesh, dual = geo
        for model in make_models(mesh, dual).values():
            theta = np.full(mesh.n_cells, 2.0)
            adv = OP.advection(np.zeros(mesh.n_edges), model, theta)
            assert np.all(adv == 0.0)

    def test_matches_dense_commutator(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(13)
        for kind, model in make_models(mesh, dual).items():
            for _ in range(20):
                V = divfree(model, rng)
                if kind == "pseudo_incompressible":
                    theta = 1.0 + rng.uniform(0.1, 1.0, mesh.n_cells)
                else:
                    theta = rng.standard_normal(mesh.n_cells)
                R = OP.dense_bracket_residual(V, theta, model)
                got = R[model.ops.ci, model.ops.cj]
                expect = OP.bracket_residual_edges(V, theta, model)
                scale = np.abs(R).max()
                assert np.abs(got - expect).max() <= 1e-12 * scale

    def test_pi_reduces_to_anelastic_for_constant_theta(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(14)
        rho = MD.exp_profile(1.0, -1.0)
        one = MD.const(1.0)
        pibar = MD.exp_profile(1.0, -1.0)
        ma = MD.make_anelastic(mesh, rho, one, cp=1.0, g=1.0, pibar=pibar, dual=dual)
        mp = MD.make_pseudo_incompressible(mesh, rho, one, g=1.0, dual=dual)
        V = rng.standard_normal(mesh.n_edges)
        theta = np.ones(mesh.n_cells)
        adv_a = OP.advection(V, ma)
        adv_p = OP.advection(V, mp, theta)
        np.testing.assert_allclose(adv_p, adv_a, rtol=1e-13, atol=1e-15)
        # pi forcing vanishes for constant theta
        assert np.abs(OP.forcing(mp, theta, V)).max() == 0.0

    def test_boussinesq_forcing_formula(self, geo):
        mesh, dual = geo
        model = MD.make_boussinesq(mesh, dual)
        ops = model.ops
        rng = np.random.default_rng(15)
        B = rng.standard_normal(mesh.n_cells)
        F = OP.forcing(model, B)
        expect = -(model.z[ops.ci] + model.z[ops.cj]) / (2 * ops.h) * (B[ops.cj] - B[ops.ci])
        np.testing.assert_allclose(F, expect, rtol=1e-14)
        assert np.all(OP.forcing(model, np.full(mesh.n_cells, 5.0)) == 0.0)

    def test_anelastic_forcing_constant_pibar(self, geo):
        mesh, dual = geo
        rho = MD.exp_profile(1.0, -1.0)
        model = MD.make_anelastic(mesh, rho, MD.const(1.0), cp=2.0, g=1.0,
                                  pibar=MD.const(0.7), dual=dual)
        ops = model.ops
        rng = np.random.default_rng(16)
        theta = rng.standard_normal(mesh.n_cells)
        F = OP.forcing(model, theta)
        expect = 2.0 * 0.7 / (ops.sigma * ops.h) * (theta[ops.cj] - theta[ops.ci])
        np.testing.assert_allclose(F, expect, rtol=1e-13)

    def test_pi_rest_forcing_zero_at_zero_height(self, geo):
        mesh, dual = geo
        model = MD.make_pseudo_incompressible(mesh, MD.exp_profile(1.0, -1.0),
                                              MD.const(1.0), g=1.0, dual=dual)
        model.z = np.zeros(mesh.n_cells)
        theta = np.full(mesh.n_cells, 2.0)
        F = OP.forcing(model, theta, np.zeros(mesh.n_edges))
        assert np.abs(F).max() == 0.0

    def test_pi_requires_positive_theta(self, geo):
        mesh, dual = geo
        model = make_models(mesh, dual)["pseudo_incompressible"]
        theta = np.ones(mesh.n_cells)
        theta[3] = -1.0
        with pytest.raises(ValueError):
            OP.advection(np.zeros(mesh.n_edges), model, theta)
        with pytest.raises(ValueError):
            OP.forcing(model, theta, np.zeros(mesh.n_edges))


class TestEdgeValue:
    def test_orientation_negates(self, geo):
        mesh, dual = geo
        rng = np.random.default_rng(17)
        V = rng.standard_normal(mesh.n_edges)
        e = 5
        i, j = (int(c) for c in mesh.edge_cells[e])
        assert OP.edge_value(V, mesh, i, j) == V[e]
        assert OP.edge_value(V, mesh, j, i) == -V[e]
        with pytest.raises(KeyError):
            OP.edge_value(V, mesh, i, i + 10**6)


class TestDenseGuard:
    def test_size_limit(self):
        mesh = M.build_equilateral(16, 8, 16.0)  # 256 cells
        model = MD.make_boussinesq(mesh)
        with pytest.raises(ValueError):
            OP.dense_bracket_residual(np.zeros(mesh.n_edges),
                                      np.zeros(mesh.n_cells), model)

    def test_zero_flux_zero_commutator(self, geo):
        mesh, dual = geo
        model = MD.make_boussinesq(mesh, dual)
        theta = np.zeros(mesh.n_cells)
        R = OP.dense_bracket_residual(np.zeros(mesh.n_edges), theta, model)
        assert np.all(R == 0.0)
