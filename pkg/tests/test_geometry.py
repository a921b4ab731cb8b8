import numpy as np
import pytest

from deformop import geometry as geo


def ellipse(a=2.0, b=1.0):
    return geo.StarDomain(
        np.zeros(2),
        lambda th: a * b / np.sqrt((b * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2),
        lipschitz_bound=3.0,
    )


class TestStarMetric:
    def test_concentric_disks(self):
        assert geo.star_metric(geo.disk(1.0), geo.disk(1.2)) == pytest.approx(0.2)

    def test_translation_only(self):
        d1 = geo.disk(0.8, center=(0.0, 0.0))
        d2 = geo.disk(0.8, center=(0.3, 0.4))
        assert geo.star_metric(d1, d2) == pytest.approx(0.5)

    def test_identity(self):
        d = ellipse()
        assert geo.star_metric(d, d) == 0.0

    def test_dimension_mismatch(self):
        d2 = geo.disk(1.0)
        d3 = geo.StarDomain(np.zeros(3), lambda e: np.ones(len(e)), 1.0)
        with pytest.raises(ValueError):
            geo.star_metric(d2, d3)

    def test_nonpositive_radius_rejected(self):
        bad = geo.StarDomain(np.zeros(2), lambda th: np.cos(th), 1.0)
        with pytest.raises(ValueError):
            geo.star_metric(bad, geo.disk(1.0))

    def test_metric_axioms_on_random_triples(self):
        rng = np.random.default_rng(7)
        doms = [geo.random_star_domain(rng) for _ in range(12)]
        for _ in range(100):
            a, b, c = (doms[i] for i in rng.integers(0, len(doms), 3))
            dab = geo.star_metric(a, b)
            dba = geo.star_metric(b, a)
            dac = geo.star_metric(a, c)
            dcb = geo.star_metric(c, b)
            assert dab >= 0.0
            assert dab == dba
            assert dab <= dac + dcb + 1e-12


class TestStarDeform:
    def test_identity_deformation(self):
        out = geo.star_deform(geo.disk(1.0), np.array([0.3, 0.4]))
        assert np.allclose(out, [0.3, 0.4], atol=1e-15)

    def test_scaled_shifted(self):
        d = geo.disk(2.0, center=(1.0, 0.0))
        out = geo.star_deform(d, np.array([0.5, 0.0]))
        assert np.allclose(out, [2.0, 0.0], atol=1e-15)

    def test_ellipse_unit_direction(self):
        out = geo.star_deform(ellipse(), np.array([0.0, 0.9]))
        assert np.allclose(out, [0.0, 0.9], atol=1e-12)

    def test_origin_maps_to_centroid(self):
        d = geo.disk(2.0, center=(1.0, -0.5))
        assert np.array_equal(geo.star_deform(d, np.zeros(2)), d.centroid)

    def test_outside_ball_rejected(self):
        with pytest.raises(ValueError):
            geo.star_deform(geo.disk(1.0), np.array([1.0, 0.0]))

    def test_inverse_example(self):
        d = geo.disk(2.0, center=(1.0, 0.0))
        out = geo.star_deform_inverse(d, np.array([2.0, 0.0]))
        assert np.allclose(out, [0.5, 0.0], atol=1e-15)

    def test_centroid_maps_to_origin(self):
        d = geo.disk(1.5, center=(0.2, 0.7))
        assert np.array_equal(geo.star_deform_inverse(d, d.centroid), np.zeros(2))

    def test_boundary_point_rejected(self):
        with pytest.raises(ValueError):
            geo.star_deform_inverse(geo.disk(1.0), np.array([1.0, 0.0]))

    def test_round_trip_100_random_points(self):
        rng = np.random.default_rng(3)
        dom = geo.random_star_domain(rng)
        r = np.sqrt(rng.uniform(size=100)) * 0.999
        th = rng.uniform(0, geo.TWO_PI, 100)
        x = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        back = geo.star_deform_inverse(dom, geo.star_deform(dom, x))
        assert np.max(np.abs(back - x)) <= 1e-12


class TestBijectivityAllFamilies:
    def test_star_thousand_points(self):
        rng = np.random.default_rng(11)
        dom = geo.random_star_domain(rng)
        r = np.sqrt(rng.uniform(size=1000)) * (1 - 1e-9)
        th = rng.uniform(0, geo.TWO_PI, 1000)
        x = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        back = geo.deform_inverse(dom, geo.deform(dom, x))
        assert np.max(np.abs(back - x)) <= 1e-10

    def test_local_thousand_points(self):
        rng = np.random.default_rng(12)
        dom = geo.LocalDomain(0.62)
        from deformop.discretization import local_nodes_uniform

        x = local_nodes_uniform(1000, seed=5)
        back = geo.deform_inverse(dom, geo.deform(dom, x))
        assert np.max(np.abs(back - x)) <= 1e-10

    def test_annulus_thousand_points(self):
        rng = np.random.default_rng(13)
        dom = geo.AnnulusDomain(
            np.array([0.1, -0.2]),
            lambda th: 0.7 + 0.05 * np.cos(3 * th),
            lambda th: 1.4 + 0.1 * np.sin(2 * th),
        )
        r = np.sqrt(0.25 + 0.75 * rng.uniform(size=1000))
        th = rng.uniform(0, geo.TWO_PI, 1000)
        x = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        back = geo.deform_inverse(dom, geo.deform(dom, x))
        assert np.max(np.abs(back - x)) <= 1e-10


class TestLocalDeform:
    def test_identity_on_main_block(self):
        dom = geo.LocalDomain(0.6)
        assert np.array_equal(geo.local_deform(dom, np.array([0.2, 0.4])), [0.2, 0.4])

    def test_shift_on_flap(self):
        dom = geo.LocalDomain(0.6)
        out = geo.local_deform(dom, np.array([0.5, 1.1]))
        assert np.allclose(out, [0.6, 1.1], atol=1e-15)

    def test_reference_configuration_is_identity(self):
        dom = geo.LocalDomain(0.5)
        pts = np.array([[0.1, 0.9], [0.5, 1.2], [0.64, 1.3], [1.0, 1.0]])
        assert np.array_equal(geo.local_deform(dom, pts), pts)

    def test_main_block_identity_is_bitwise(self):
        dom = geo.LocalDomain(0.37)
        rng = np.random.default_rng(0)
        pts = rng.uniform(size=(200, 2))
        out = geo.local_deform(dom, pts)
        assert np.array_equal(out, pts)

    def test_outside_reference_rejected(self):
        with pytest.raises(ValueError):
            geo.local_deform(geo.LocalDomain(0.5), np.array([0.2, 1.2]))

    def test_offset_range_validated(self):
        with pytest.raises(ValueError):
            geo.LocalDomain(0.25)


class TestAnnulusDeform:
    def test_identity_ring(self):
        dom = geo.AnnulusDomain(np.zeros(2), lambda th: np.full_like(th, 0.5),
                                lambda th: np.ones_like(th))
        pts = np.array([[0.75, 0.0], [0.0, 0.6], [-0.5, 0.0]])
        assert np.allclose(geo.annulus_deform(dom, pts), pts, atol=1e-15)

    def test_direct_formula(self):
        dom = geo.AnnulusDomain(np.zeros(2), lambda th: np.ones_like(th),
                                lambda th: np.full_like(th, 2.0))
        out = geo.annulus_deform(dom, np.array([0.75, 0.0]))
        assert np.allclose(out, [1.5, 0.0], atol=1e-14)

    def test_round_trip_against_bisection(self):
        dom = geo.AnnulusDomain(
            np.array([0.05, 0.0]),
            lambda th: 0.6 + 0.05 * np.sin(2 * th),
            lambda th: 1.2 + 0.1 * np.cos(th),
        )
        rng = np.random.default_rng(2)
        r = 0.5 + 0.5 * rng.uniform(0.01, 0.99, 50)
        th = rng.uniform(0, geo.TWO_PI, 50)
        x = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        y = geo.annulus_deform(dom, x)

        # independent bisection oracle on the radial coordinate
        for xi, yi in zip(x, y):
            e = xi / np.linalg.norm(xi)
            lo, hi = 0.5, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if np.linalg.norm(geo.annulus_deform(dom, mid * e) - dom.inner_centroid) \
                        < np.linalg.norm(yi - dom.inner_centroid):
                    lo = mid
                else:
                    hi = mid
            assert abs(0.5 * (lo + hi) - np.linalg.norm(xi)) <= 1e-10

    def test_outside_ring_rejected(self):
        dom = geo.AnnulusDomain(np.zeros(2), lambda th: np.full_like(th, 0.5),
                                lambda th: np.ones_like(th))
        with pytest.raises(ValueError):
            geo.annulus_deform(dom, np.array([0.2, 0.0]))

    def test_improper_annulus_rejected(self):
        with pytest.raises(ValueError):
            geo.AnnulusDomain(np.zeros(2), lambda th: np.ones_like(th),
                              lambda th: np.full_like(th, 0.8))


class TestPolygonToStar:
    def test_square_radii(self):
        square = geo.PolygonDomain(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))
        star = geo.polygon_to_star(square)
        r = star.radius_at_angles(np.array([0.0, np.pi / 4]))
        assert r[0] == pytest.approx(1.0, abs=1e-12)
        assert r[1] == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_equilateral_triangle_vertex_radius(self):
        ang = np.array([np.pi / 2, np.pi / 2 + 2 * np.pi / 3, np.pi / 2 + 4 * np.pi / 3])
        verts = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        star = geo.polygon_to_star(geo.PolygonDomain(verts))
        assert star.radius_at_angles(np.array([np.pi / 2]))[0] == pytest.approx(1.0, abs=1e-12)

    def test_random_pentagon_round_trip(self):
        rng = np.random.default_rng(9)
        poly = geo.random_polygon(rng, n_vertices=5)
        star = geo.polygon_to_star(poly)
        r = np.sqrt(rng.uniform(size=50)) * 0.999
        th = rng.uniform(0, geo.TWO_PI, 50)
        x = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
        back = geo.star_deform_inverse(star, geo.star_deform(star, x))
        assert np.max(np.abs(back - x)) <= 1e-12

    def test_recenter_moves_centroid_to_origin(self):
        rng = np.random.default_rng(4)
        poly = geo.random_polygon(rng)
        star = geo.polygon_to_star(poly, recenter=True)
        assert np.array_equal(star.centroid, np.zeros(2))
        _, c = geo.domain_area_centroid(star, 8192)
        assert np.linalg.norm(c) <= 1e-3

    def test_non_star_polygon_rejected(self):
        verts = np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.2, 0.1], [0.0, 3.0]])
        if geo._polygon_signed_area(verts) < 0:
            verts = verts[::-1]
        with pytest.raises(ValueError):
            geo.polygon_to_star(geo.PolygonDomain(verts))


class TestAreaCentroid:
    def test_unit_disk(self):
        area, c = geo.domain_area_centroid(geo.disk(1.0), 4096)
        assert area == pytest.approx(np.pi, abs=1e-6)
        assert np.allclose(c, 0.0, atol=1e-9)

    def test_shifted_disk(self):
        area, c = geo.domain_area_centroid(geo.disk(2.0, center=(1.0, 1.0)), 4096)
        assert area == pytest.approx(4 * np.pi, abs=1e-6)
        assert np.allclose(c, [1.0, 1.0], atol=1e-9)

    def test_ellipse_area(self):
        area, _ = geo.domain_area_centroid(ellipse(), 4096)
        assert area == pytest.approx(2 * np.pi, rel=1e-8)

    def test_quadrature_count_validated(self):
        with pytest.raises(ValueError):
            geo.domain_area_centroid(geo.disk(1.0), 32)


class TestDeformationSystemContinuity:
    def test_l2_bound_on_random_pairs(self):
        # |D[O1] - D[O2]|_{L2} <= d_U * (int (1+|x|)^2 dx)^(1/2), the constant
        # over the unit disk being sqrt(17*pi/6).
        from deformop.discretization import disk_quadrature

        quad = disk_quadrature(4096, seed=0)
        const = np.sqrt(17.0 * np.pi / 6.0)
        rng = np.random.default_rng(21)
        doms = [geo.random_star_domain(rng) for _ in range(18)]
        # include centroid offsets so the translation term is exercised
        shifted = []
        for d in doms:
            off = rng.uniform(-0.1, 0.1, 2)
            shifted.append(geo.StarDomain(d.centroid + off, d.boundary_fn, d.lipschitz_bound))
        pool = doms + shifted
        for _ in range(100):
            i, j = rng.integers(0, len(pool), 2)
            a, b = pool[i], pool[j]
            da = geo.star_deform(a, quad.points)
            db = geo.star_deform(b, quad.points)
            lhs = np.sqrt(np.sum(quad.weights * np.sum((da - db) ** 2, axis=1)))
            assert lhs <= const * geo.star_metric(a, b) + 1e-12


class TestRandomGenerators:
    def test_star_generator_centred_and_valid(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            dom = geo.random_star_domain(rng)
            th = np.linspace(0, geo.TWO_PI, 2048, endpoint=False)
            b = dom.radius_at_angles(th)
            assert b.min() > 0.1
            assert dom.lipschitz_bound <= 2.0
            _, c = geo.domain_area_centroid(dom, 8192)
            assert np.linalg.norm(c) <= 1e-3

    def test_polygon_generator_inside_unit_square(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            poly = geo.random_polygon(rng)
            assert poly.vertices.min() >= 0.0 and poly.vertices.max() <= 1.0
            assert 4 <= len(poly.vertices) <= 6


class TestSerialization:
    def test_star_round_trip(self):
        rng = np.random.default_rng(8)
        dom = geo.random_star_domain(rng)
        obj = geo.domain_to_json(dom)
        back = geo.domain_from_json(obj)
        th = np.linspace(0, geo.TWO_PI, 777, endpoint=False)
        assert np.max(np.abs(back.radius_at_angles(th) - dom.radius_at_angles(th))) <= 1e-3
        assert obj["kind"] == "star"
        assert len(obj["boundary_samples"]) == geo.BOUNDARY_SAMPLE_COUNT

    def test_polygon_and_local_round_trip(self):
        poly = geo.PolygonDomain(np.array([[0.0, 0.0], [1.0, 0.1], [0.8, 0.9], [0.1, 0.8]]))
        assert np.array_equal(geo.domain_from_json(geo.domain_to_json(poly)).vertices,
                              poly.vertices)
        loc = geo.LocalDomain(0.44)
        assert geo.domain_from_json(geo.domain_to_json(loc)).offset_a == 0.44
