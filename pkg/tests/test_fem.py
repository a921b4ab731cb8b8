import numpy as np
import pytest

from deformop import fem, meshing as msh


def disk_mesh(h):
    return msh.reference_disk_mesh(h)


class TestAssembly:
    def test_zero_data_gives_zero_solution(self):
        mesh = disk_mesh(0.15)
        sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), np.zeros(mesh.n_nodes),
                                   np.zeros(len(mesh.boundary_nodes)))
        u = fem.solve_sparse(sys)
        assert np.max(np.abs(u)) <= 1e-14

    def test_constant_dirichlet_extends_harmonically(self):
        mesh = disk_mesh(0.15)
        g = np.full(len(mesh.boundary_nodes), 2.5)
        sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), np.zeros(mesh.n_nodes), g)
        u = fem.solve_sparse(sys)
        assert np.max(np.abs(u - 2.5)) <= 1e-10

    def test_interior_row_sums_vanish_before_elimination(self):
        mesh = disk_mesh(0.2)
        a = fem.assemble_stiffness(mesh, np.ones(mesh.n_nodes))
        rows = np.asarray(a.sum(axis=1)).ravel()
        interior = mesh.interior_mask()
        assert np.max(np.abs(rows[interior])) <= 1e-12

    def test_symmetry_sampled(self):
        mesh = disk_mesh(0.2)
        k = 1.0 + 0.5 * np.cos(mesh.nodes[:, 0])
        a = fem.assemble_stiffness(mesh, k).tocoo()
        at = fem.assemble_stiffness(mesh, k).T.tocoo()
        assert abs(a - at.tocsr()).max() <= 1e-12

    def test_nonpositive_k_rejected(self):
        mesh = disk_mesh(0.2)
        k = np.ones(mesh.n_nodes)
        k[3] = 0.0
        with pytest.raises(ValueError):
            fem.assemble_poisson(mesh, k, np.zeros(mesh.n_nodes),
                                 np.zeros(len(mesh.boundary_nodes)))

    def test_manufactured_sine_on_unit_square(self):
        mesh = msh.unit_square_mesh(50)
        x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
        f = 2 * np.pi ** 2 * np.sin(np.pi * x) * np.sin(np.pi * y)
        sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), f,
                                   np.zeros(len(mesh.boundary_nodes)))
        u = fem.solve_sparse(sys)
        center = np.argmin((x - 0.5) ** 2 + (y - 0.5) ** 2)
        assert u[center] == pytest.approx(1.0, abs=5e-3)


class TestSolvers:
    def test_identity_system(self):
        import scipy.sparse as sp

        sys = fem.SparseSystem(sp.identity(5, format="csr"), np.arange(5.0),
                               np.zeros(5, dtype=bool), np.array([]),
                               np.arange(5))
        u = fem.solve_sparse(sys)
        assert np.array_equal(u, np.arange(5.0))

    def test_disk_source_one_analytic(self):
        mesh = disk_mesh(0.05)
        sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), np.ones(mesh.n_nodes),
                                   np.zeros(len(mesh.boundary_nodes)))
        u = fem.solve_sparse(sys)
        center = int(np.argmin(np.sum(mesh.nodes ** 2, axis=1)))
        assert u[center] == pytest.approx(0.25, abs=5e-3)

    def test_cg_matches_direct(self):
        mesh = disk_mesh(0.1)
        rng = np.random.default_rng(0)
        f = rng.standard_normal(mesh.n_nodes)
        sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), f,
                                   np.zeros(len(mesh.boundary_nodes)))
        tol = 1e-10
        u_direct = fem.solve_sparse(sys, "direct", tol)
        u_cg = fem.solve_sparse(sys, "cg", tol)
        scale = np.max(np.abs(u_direct))
        assert np.max(np.abs(u_direct - u_cg)) <= 10 * tol * max(scale, 1.0)

    def test_unknown_method_rejected(self):
        mesh = disk_mesh(0.2)
        sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), np.ones(mesh.n_nodes),
                                   np.zeros(len(mesh.boundary_nodes)))
        with pytest.raises(ValueError):
            fem.solve_sparse(sys, "gmres")

    def test_nonconvergence_error_carries_residual(self):
        mesh = disk_mesh(0.05)
        sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), np.ones(mesh.n_nodes),
                                   np.zeros(len(mesh.boundary_nodes)))
        with pytest.raises(fem.SolverError) as err:
            fem.solve_sparse(sys, "cg", tol=1e-12, max_iter=3)
        assert err.value.residual > 0


class TestConvergence:
    def test_l2_rate_on_disk(self):
        errs = []
        for h in (0.1, 0.05):
            mesh = disk_mesh(h)
            sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), np.ones(mesh.n_nodes),
                                       np.zeros(len(mesh.boundary_nodes)))
            u = fem.solve_sparse(sys)
            exact = (1.0 - np.sum(mesh.nodes ** 2, axis=1)) / 4.0
            errs.append(fem.relative_l2_error(mesh, u, exact))
        assert errs[0] / errs[1] >= 3.5

    def test_l2_rate_on_square(self):
        errs = []
        for n in (20, 40):
            mesh = msh.unit_square_mesh(n)
            x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
            f = 2 * np.pi ** 2 * np.sin(np.pi * x) * np.sin(np.pi * y)
            sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), f,
                                       np.zeros(len(mesh.boundary_nodes)))
            u = fem.solve_sparse(sys)
            exact = np.sin(np.pi * x) * np.sin(np.pi * y)
            errs.append(fem.relative_l2_error(mesh, u, exact))
        assert errs[0] / errs[1] >= 3.5

    def test_solution_mapping_continuity_under_shrinking_perturbation(self):
        # fixed pullback source, boundary perturbed by eps * delta: the
        # combined-space distance of the solutions must shrink with eps
        from deformop import geometry as geo
        from deformop.discretization import x_metric_from_values

        ref = disk_mesh(0.08)
        base_r = 0.5
        delta = lambda th: 0.5 + 0.3 * np.cos(3 * th)
        fhat = np.cos(2.0 * ref.nodes[:, 0]) + ref.nodes[:, 1]

        def solve_on(eps):
            dom = geo.StarDomain(np.zeros(2),
                                 lambda th: base_r + eps * delta(th), 2.0)
            mesh = msh.deform_mesh(ref, dom)
            sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), fhat,
                                       np.zeros(len(mesh.boundary_nodes)))
            return dom, fem.solve_sparse(sys)

        dom0, u0 = solve_on(0.0)
        dists = []
        for eps in (0.08, 0.04, 0.02, 0.01):
            dom, u = solve_on(eps)
            from deformop.geometry import star_metric

            d_u = star_metric(dom0, dom)
            dists.append(x_metric_from_values(d_u, u0, u, ref.node_weights))
        assert dists[0] > dists[1] > dists[2] > dists[3]
