import numpy as np
import pytest

from deformop import geometry as geo
from deformop import meshing as msh


class TestReferenceDiskMesh:
    def test_area_close_to_pi(self):
        for h in (0.2, 0.1, 0.05):
            mesh = msh.reference_disk_mesh(h)
            assert abs(mesh.area() - np.pi) <= 2 * h * h

    def test_boundary_nodes_on_unit_circle(self):
        h = 0.1
        mesh = msh.reference_disk_mesh(h)
        r = np.linalg.norm(mesh.nodes[mesh.boundary_nodes], axis=1)
        assert np.all(r <= 1.0 + 1e-14) and np.all(r >= 1.0 - h * h)

    def test_node_count_scaling(self):
        n_coarse = msh.reference_disk_mesh(0.1).n_nodes
        n_fine = msh.reference_disk_mesh(0.05).n_nodes
        assert 3.0 <= n_fine / n_coarse <= 6.0

    def test_max_edge_length(self):
        for h in (0.2, 0.08):
            mesh = msh.reference_disk_mesh(h)
            p = mesh.nodes[mesh.triangles]
            edges = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
            assert np.linalg.norm(edges, axis=1).max() <= 1.5 * h

    def test_weights_sum_to_area(self):
        mesh = msh.reference_disk_mesh(0.07)
        total = msh.triangle_areas(mesh.nodes, mesh.triangles).sum()
        assert mesh.node_weights.sum() == pytest.approx(total, rel=1e-10)

    def test_all_triangles_positive(self):
        mesh = msh.reference_disk_mesh(0.06)
        assert msh.triangle_areas(mesh.nodes, mesh.triangles).min() > 0

    def test_h_range_validated(self):
        with pytest.raises(ValueError):
            msh.reference_disk_mesh(0.6)


class TestDeformMesh:
    def test_identity_domain(self):
        ref = msh.reference_disk_mesh(0.1)
        out = msh.deform_mesh(ref, geo.disk(1.0))
        assert np.array_equal(out.nodes, ref.nodes)
        assert np.array_equal(out.triangles, ref.triangles)

    def test_uniform_scaling_scales_areas(self):
        ref = msh.reference_disk_mesh(0.1)
        out = msh.deform_mesh(ref, geo.disk(2.0))
        a_ref = msh.triangle_areas(ref.nodes, ref.triangles)
        a_out = msh.triangle_areas(out.nodes, out.triangles)
        assert np.allclose(a_out, 4.0 * a_ref, rtol=1e-12)

    def test_random_star_mesh_area_matches_quadrature(self):
        rng = np.random.default_rng(6)
        dom = geo.random_star_domain(rng)
        ref = msh.reference_disk_mesh(0.05)
        out = msh.deform_mesh(ref, dom)
        area, _ = geo.domain_area_centroid(dom, 8192)
        assert abs(out.area() - area) / area <= 0.02

    def test_polygon_meshes_stay_valid(self):
        rng = np.random.default_rng(77)
        ref = msh.reference_disk_mesh(0.1)
        for _ in range(10):
            star = geo.polygon_to_star(geo.random_polygon(rng))
            out = msh.deform_mesh(ref, star)
            assert msh.triangle_areas(out.nodes, out.triangles).min() > 0


class TestUnitSquareMesh:
    def test_area_and_boundary(self):
        mesh = msh.unit_square_mesh(8)
        assert mesh.area() == pytest.approx(1.0, abs=1e-12)
        b = mesh.nodes[mesh.boundary_nodes]
        on_edge = (np.isclose(b, 0.0) | np.isclose(b, 1.0)).any(axis=1)
        assert on_edge.all()
        assert len(mesh.boundary_nodes) == 4 * 8


class TestLocalDomainMesh:
    def test_reference_configuration_matches_plain_grid(self):
        ref = msh.local_reference_mesh(0.05)
        again = msh.local_domain_mesh(geo.LocalDomain(0.5), 0.05)
        assert np.array_equal(ref.nodes, again.nodes)
        assert np.array_equal(ref.triangles, again.triangles)

    def test_areas_positive_and_total(self):
        for a in (0.3, 0.47, 0.62, 0.7):
            mesh = msh.local_domain_mesh(geo.LocalDomain(a), 0.05)
            assert msh.triangle_areas(mesh.nodes, mesh.triangles).min() > 0
            assert mesh.area() == pytest.approx(1.0 + 0.3 * 0.3, abs=1e-10)

    def test_node_map_realizes_deformation(self):
        h = 0.05
        ref = msh.local_reference_mesh(h)
        for a in (0.37, 0.5, 0.66):
            dom = geo.LocalDomain(a)
            mesh = msh.local_domain_mesh(dom, h)
            idx = msh.local_node_map(ref, dom, mesh, h)
            moved = geo.local_deform(dom, ref.nodes)
            assert np.max(np.abs(mesh.nodes[idx] - moved)) <= 1e-9
            assert len(set(idx.tolist())) == len(idx)

    def test_incompatible_h_rejected(self):
        with pytest.raises(ValueError):
            msh.local_domain_mesh(geo.LocalDomain(0.5), 0.04)


class TestLocator:
    def test_linear_functions_interpolated_exactly(self):
        mesh = msh.reference_disk_mesh(0.12)
        loc = msh.DiskMeshLocator(mesh, msh.disk_rings_for_h(0.12))
        vals = 2.0 * mesh.nodes[:, 0] - 0.7 * mesh.nodes[:, 1] + 0.25
        rng = np.random.default_rng(0)
        r = np.sqrt(rng.uniform(size=300)) * 0.999
        th = rng.uniform(0, 2 * np.pi, 300)
        pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        got = loc.interpolate(vals, pts)
        want = 2.0 * pts[:, 0] - 0.7 * pts[:, 1] + 0.25
        assert np.max(np.abs(got - want)) <= 1e-12

    def test_every_node_locatable(self):
        mesh = msh.reference_disk_mesh(0.2)
        loc = msh.DiskMeshLocator(mesh, msh.disk_rings_for_h(0.2))
        got = loc.interpolate(mesh.nodes[:, 0], mesh.nodes)
        assert np.max(np.abs(got - mesh.nodes[:, 0])) <= 1e-12

    def test_outside_point_rejected(self):
        mesh = msh.reference_disk_mesh(0.2)
        loc = msh.DiskMeshLocator(mesh, msh.disk_rings_for_h(0.2))
        with pytest.raises(ValueError):
            loc.find(np.array([1.2, 0.0]))
