import numpy as np
import pytest
import scipy.sparse as sp

from deformop import fem, geometry as geo, meshing as msh
from deformop.datagen import DataConfig, generate_dataset
from deformop.gp import GPSpec
from deformop.him import (
    ExactOracleCorrector,
    GaussSeidelKernel,
    HIMConfig,
    HIMError,
    NeuralCorrector,
    Trace,
    gauss_seidel_sweep,
    gs_solve,
    him_report,
    him_solve,
)
from deformop.training import ModelConfig, TrainConfig, build_model, train


def poisson_system(rings=12, seed=3, family_dom=None):
    ref = msh.disk_mesh_by_rings(rings)
    if family_dom is None:
        rng = np.random.default_rng(seed)
        family_dom = geo.polygon_to_star(geo.random_polygon(rng))
    mesh = msh.deform_mesh(ref, family_dom)
    rng = np.random.default_rng(seed + 1)
    f = rng.standard_normal(mesh.n_nodes)
    sys = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), f,
                               np.zeros(len(mesh.boundary_nodes)))
    return sys, mesh, family_dom


class TestGaussSeidelSweep:
    def test_diagonal_system_solves_in_one_sweep(self):
        a = sp.diags([2.0, 4.0, 8.0]).tocsr()
        system = fem.SparseSystem(a, np.array([2.0, 8.0, 32.0]),
                                  np.zeros(3, dtype=bool), np.array([]), np.arange(3))
        u = gauss_seidel_sweep(system, np.zeros(3))
        assert np.allclose(u, [1.0, 2.0, 4.0], atol=1e-15)

    def test_residual_nonincreasing(self):
        system, _, _ = poisson_system()
        u = np.zeros(system.n_unknowns)
        res = [system.residual(u)]
        kern = GaussSeidelKernel(system.matrix)
        for _ in range(30):
            u = kern.sweep(u, system.rhs)
            res.append(system.residual(u))
        assert all(b <= a + 1e-15 for a, b in zip(res, res[1:]))

    def test_exact_solution_is_fixed_point(self):
        system, _, _ = poisson_system(rings=8)
        import scipy.sparse.linalg as spla

        u_star = spla.spsolve(system.matrix.tocsc(), system.rhs)
        u_next = gauss_seidel_sweep(system, u_star)
        assert np.max(np.abs(u_next - u_star)) <= 1e-12 * max(1.0, np.max(np.abs(u_star)))

    def test_zero_diagonal_rejected(self):
        a = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 2.0]]))
        system = fem.SparseSystem(a, np.ones(2), np.zeros(2, dtype=bool),
                                  np.array([]), np.arange(2))
        with pytest.raises(ValueError):
            gauss_seidel_sweep(system, np.zeros(2))


class TestHimSolve:
    def test_no_corrector_matches_plain_gs_bitwise(self):
        system, _, _ = poisson_system(rings=10)
        plain = gs_solve(system, tolerance=1e-6)
        hybrid = him_solve(system, HIMConfig(period=50, residual_tolerance=1e-6,
                                             corrector=None))
        assert plain.sweeps == hybrid.sweeps
        assert np.array_equal(plain.u, hybrid.u)
        assert plain.trace.residuals == hybrid.trace.residuals

    def test_exact_oracle_converges_at_first_correction(self):
        system, _, _ = poisson_system(rings=14)
        cfg = HIMConfig(period=25, residual_tolerance=1e-10, corrector="exact_oracle")
        result = him_solve(system, cfg)
        assert result.sweeps == 25
        assert result.trace.events.count("correction") == 1
        assert system.residual(result.u[system.interior]) <= 1e-10

    def test_max_iterations_error_carries_trace(self):
        system, _, _ = poisson_system(rings=12)
        with pytest.raises(HIMError) as err:
            him_solve(system, HIMConfig(period=10 ** 9, residual_tolerance=1e-12,
                                        max_iterations=10))
        assert err.value.trace.n_sweeps == 10

    def test_bad_correction_is_rolled_back_and_period_doubles(self):
        system, _, _ = poisson_system(rings=10)

        class Saboteur:
            def correct(self, system, residual, u):
                return 100.0 * np.ones_like(residual)

        cfg = HIMConfig(period=5, residual_tolerance=1e-6, corrector=Saboteur(),
                        correction_smoothing=3)
        result = him_solve(system, cfg)
        ev = result.trace.events
        assert ev.count("rollback") >= 2
        # every attempt is rejected, and rejected attempts never change the
        # converged answer
        assert ev.count("rollback") == ev.count("correction")
        attempts = [i for i, e in zip(result.trace.iterations, ev) if e == "correction"]
        gaps = np.diff(attempts)
        assert all(b > a for a, b in zip(gaps, gaps[1:]))  # period doubles
        assert system.residual(result.u[system.interior]) <= 1e-6
        plain = gs_solve(system, tolerance=1e-6)
        assert np.array_equal(result.u, plain.u)

    def test_neural_corrector_cuts_sweep_count(self):
        # small end-to-end version of the hybrid experiment: short training on
        # the polygon family, then correction on a held-out polygonal system
        cfg = DataConfig(family="polygon", n_samples=60, seed=11, n_radii=24,
                         n_fnodes=80, mesh_rings=5, gp=GPSpec(length_scale=0.25))
        ds = generate_dataset(cfg)
        model = build_model(ds, ModelConfig(p=32, branch_hidden=(48, 48),
                                            trunk_hidden=(48, 48)), "d2e", seed=0)
        train(model, ds, TrainConfig(framework="d2e", iterations=700,
                                     learning_rate=2e-3, log_every=0))
        rng = np.random.default_rng(123)
        dom = geo.polygon_to_star(geo.random_polygon(rng))
        rings = 24
        ref = msh.disk_mesh_by_rings(rings)
        mesh = msh.deform_mesh(ref, dom)
        f = np.asarray(np.random.default_rng(7).standard_normal(mesh.n_nodes))
        system = fem.assemble_poisson(mesh, np.ones(mesh.n_nodes), f,
                                      np.zeros(len(mesh.boundary_nodes)))
        plain = gs_solve(system, tolerance=1e-8)
        from deformop.discretization import direction_angles_2d

        corr = NeuralCorrector(model, dom, mesh,
                               dom.radius_at_angles(direction_angles_2d(24)),
                               ds.fnodes, ref, rings)
        hybrid = him_solve(system, HIMConfig(period=40, residual_tolerance=1e-8,
                                             corrector=corr))
        assert hybrid.sweeps < plain.sweeps
        assert system.residual(hybrid.u[system.interior]) <= 1e-8

    def test_trace_csv_round_trip(self, tmp_path):
        trace = Trace()
        trace.record(1, 0.5, "sweep")
        trace.record(2, 0.25, "correction")
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "iteration,residual,event"
        assert lines[1].startswith("1,0.5")
        assert lines[2].endswith("correction")


class TestHimReport:
    def test_identical_runs_give_unit_speedup(self):
        report = him_report({"gs": {"iterations": 100, "time_s": 10.0},
                             "hybrid": {"iterations": 100, "time_s": 10.0}})
        assert report["rows"][1]["iteration_speedup"] == 1.0
        assert report["rows"][1]["time_speedup"] == 1.0

    def test_published_benchmark_ratios(self):
        report = him_report({"gs": {"iterations": 1142414, "time_s": 7780.0},
                             "hybrid": {"iterations": 121239, "time_s": 925.0}})
        assert report["rows"][1]["iteration_speedup"] == pytest.approx(9.42, abs=0.01)
        assert report["rows"][1]["time_speedup"] == pytest.approx(8.4, abs=0.05)
        assert "hybrid" in report["text"]

    def test_single_run_rejected(self):
        with pytest.raises(ValueError):
            him_report({"gs": {"iterations": 10, "time_s": 1.0}})
