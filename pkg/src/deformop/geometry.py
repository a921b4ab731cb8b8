"""Domain families on varying regions: star, polygonal, locally-deformed and
annulus-like domains, their metrics, and the deformation maps that pull every
domain back to a fixed reference region.

Conventions
-----------
* 2-d boundary functions are parameterized by angle ``theta`` in [0, 2*pi) and
  must accept numpy arrays; 3-d boundary functions take unit vectors of shape
  (n, 3).
* Reference regions: unit ball B(0,1) for star domains, the ring
  0.5 < |x| < 1 for annuli, and the union square-plus-flap for the locally
  deformed family.
* All domain objects are immutable; every operation is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi

# Locally deformed family: main block, flap footprint at reference offset 0.5.
LOCAL_FLAP_HALF_WIDTH = 0.15
LOCAL_FLAP_Y = (1.0, 1.3)
LOCAL_OFFSET_RANGE = (0.3, 0.7)


def _as_points(x, dim):
    """Return (points (n,dim), was_single) after validating shape."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != dim:
            raise ValueError(f"expected a point in R^{dim}, got shape {arr.shape}")
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected points of shape (n, {dim}), got {arr.shape}")
    return arr, False


def _restore(points, single):
    return points[0] if single else points


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StarDomain:
    """Star-shaped domain given by a radius function about its centroid.

    Parameters
    ----------
    centroid : (d,) array
        Reference point of the radial parameterization.
    boundary_fn : callable
        For d=2 maps angle arrays to radii; for d=3 maps unit vectors (n,3)
        to radii. Radii must be strictly positive.
    lipschitz_bound : float
        Upper bound for the Lipschitz constant of the boundary function with
        respect to the Euclidean metric on the unit sphere.
    """

    centroid: np.ndarray
    boundary_fn: Callable
    lipschitz_bound: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "centroid", np.asarray(self.centroid, dtype=float))
        if self.centroid.ndim != 1 or self.centroid.shape[0] not in (2, 3):
            raise ValueError("centroid must be a point in R^2 or R^3")
        if self.lipschitz_bound <= 0:
            raise ValueError("lipschitz_bound must be positive")

    @property
    def dim(self) -> int:
        return self.centroid.shape[0]

    def radius_at_angles(self, theta):
        """Boundary radii at angles (2-d only)."""
        if self.dim != 2:
            raise ValueError("radius_at_angles is for 2-d domains")
        r = np.asarray(self.boundary_fn(np.asarray(theta, dtype=float)), dtype=float)
        if np.any(r <= 0.0):
            raise ValueError("boundary function returned a nonpositive radius")
        return r

    def radius_at_dirs(self, dirs):
        """Boundary radii at unit directions of shape (n, d)."""
        dirs = np.asarray(dirs, dtype=float)
        if self.dim == 2:
            theta = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), TWO_PI)
            return self.radius_at_angles(theta)
        r = np.asarray(self.boundary_fn(dirs), dtype=float)
        if np.any(r <= 0.0):
            raise ValueError("boundary function returned a nonpositive radius")
        return r

    def contains(self, y, tol=0.0):
        pts, single = _as_points(y, self.dim)
        v = pts - self.centroid
        r = np.linalg.norm(v, axis=1)
        inside = np.ones(len(pts), dtype=bool)
        nz = r > 0.0
        if np.any(nz):
            dirs = v[nz] / r[nz, None]
            inside[nz] = r[nz] < self.radius_at_dirs(dirs) - tol
        return _restore(inside, single)


def disk(radius=1.0, center=(0.0, 0.0)):
    """Circular star domain of the given radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    r = float(radius)
    return StarDomain(np.asarray(center, dtype=float),
                      lambda theta: np.full_like(np.asarray(theta, dtype=float), r),
                      lipschitz_bound=1e-12)


def star_from_samples(radii, centroid=(0.0, 0.0), lipschitz_bound=None):
    """2-d star domain from radii sampled at uniform angles starting at 0.

    The boundary function interpolates the samples periodically and linearly
    in the angle; Lipschitz boundaries need no smoother interpolant.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 3:
        raise ValueError("need at least 3 radius samples")
    if np.any(radii <= 0):
        raise ValueError("radius samples must be strictly positive")
    n = radii.size
    grid = np.arange(n + 1) * (TWO_PI / n)
    wrapped = np.concatenate([radii, radii[:1]])

    def boundary(theta):
        t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        return np.interp(t, grid, wrapped)

    if lipschitz_bound is None:
        lipschitz_bound = max(_lipschitz_estimate(radii), 1e-12)
    return StarDomain(np.asarray(centroid, dtype=float), boundary, lipschitz_bound)


def _lipschitz_estimate(radii):
    """max |Delta b| / chord length between adjacent uniform-angle samples."""
    n = radii.size
    chord = 2.0 * np.sin(np.pi / n)
    db = np.abs(np.diff(np.concatenate([radii, radii[:1]])))
    return float(db.max() / chord)


@dataclass(frozen=True)
class PolygonDomain:
    """Simple polygon with counterclockwise vertices, star-shaped about its
    centroid."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("vertices must be an (k>=3, 2) array")
        if _polygon_signed_area(v) <= 0:
            raise ValueError("vertices must be in counterclockwise order")
        object.__setattr__(self, "vertices", v)

    def area(self) -> float:
        return _polygon_signed_area(self.vertices)

    def centroid(self) -> np.ndarray:
        return _polygon_centroid(self.vertices)


@dataclass(frozen=True)
class LocalDomain:
    """Square with a movable flap: Omega(a) = [0,1]^2  u  [a-.15,a+.15]x[1,1.3]."""

    offset_a: float

    def __post_init__(self):
        lo, hi = LOCAL_OFFSET_RANGE
        if not (lo <= self.offset_a <= hi):
            raise ValueError(f"offset_a must lie in [{lo}, {hi}]")


@dataclass(frozen=True)
class AnnulusDomain:
    """Annulus-like domain between two star boundaries about the inner
    centroid."""

    inner_centroid: np.ndarray
    inner_fn: Callable
    outer_fn: Callable

    def __post_init__(self):
        c = np.asarray(self.inner_centroid, dtype=float)
        if c.shape != (2,):
            raise ValueError("inner_centroid must be a point in R^2")
        object.__setattr__(self, "inner_centroid", c)
        theta = np.arange(1024) * (TWO_PI / 1024)
        b_in = np.asarray(self.inner_fn(theta), dtype=float)
        b_out = np.asarray(self.outer_fn(theta), dtype=float)
        if np.any(b_in <= 0) or np.any(b_out <= b_in):
            raise ValueError("need outer_fn(theta) > inner_fn(theta) > 0 everywhere")


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def star_metric(a: StarDomain, b: StarDomain, n_angles: int = 1024) -> float:
    """Distance between star domains: centroid distance plus the sampled
    supremum of the boundary-radius difference.

    Uniform angular sampling approximates the supremum; the Lipschitz bound L
    controls the sampling error by L * (angular gap).
    """
    if a.dim != b.dim:
        raise ValueError("domains must share the same dimension")
    if n_angles < 8:
        raise ValueError("n_angles must be at least 8")
    if a.dim == 2:
        theta = np.arange(n_angles) * (TWO_PI / n_angles)
        ra, rb = a.radius_at_angles(theta), b.radius_at_angles(theta)
    else:
        from .discretization import directions_3d_fibonacci

        dirs = directions_3d_fibonacci(n_angles)
        ra, rb = a.radius_at_dirs(dirs), b.radius_at_dirs(dirs)
    sup = float(np.max(np.abs(ra - rb)))
    return float(np.linalg.norm(a.centroid - b.centroid)) + sup


def local_metric(a: LocalDomain, b: LocalDomain) -> float:
    return abs(a.offset_a - b.offset_a)


def annulus_metric(a: AnnulusDomain, b: AnnulusDomain, n_angles: int = 1024) -> float:
    theta = np.arange(n_angles) * (TWO_PI / n_angles)
    sup_in = float(np.max(np.abs(np.asarray(a.inner_fn(theta)) - np.asarray(b.inner_fn(theta)))))
    sup_out = float(np.max(np.abs(np.asarray(a.outer_fn(theta)) - np.asarray(b.outer_fn(theta)))))
    return float(np.linalg.norm(a.inner_centroid - b.inner_centroid)) + sup_in + sup_out


def domain_metric(a, b, n_angles: int = 1024) -> float:
    """Family-dispatching domain metric; both arguments must belong to the
    same family."""
    if isinstance(a, StarDomain) and isinstance(b, StarDomain):
        return star_metric(a, b, n_angles)
    if isinstance(a, LocalDomain) and isinstance(b, LocalDomain):
        return local_metric(a, b)
    if isinstance(a, AnnulusDomain) and isinstance(b, AnnulusDomain):
        return annulus_metric(a, b, n_angles)
    raise ValueError(f"domain family mismatch: {type(a).__name__} vs {type(b).__name__}")


# ---------------------------------------------------------------------------
# deformation maps
# ---------------------------------------------------------------------------


def star_deform(dom: StarDomain, x):
    """Map reference points in the open unit ball onto the domain:
    x -> centroid + b(x/|x|) * x, with the origin sent to the centroid."""
    pts, single = _as_points(x, dom.dim)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r >= 1.0):
        raise ValueError("reference points must satisfy |x| < 1")
    out = np.tile(dom.centroid, (len(pts), 1))
    nz = r > 0.0
    if np.any(nz):
        dirs = pts[nz] / r[nz, None]
        out[nz] = dom.centroid + dom.radius_at_dirs(dirs)[:, None] * pts[nz]
    return _restore(out, single)


def star_deform_inverse(dom: StarDomain, y):
    """Inverse of star_deform; defined for points strictly inside the domain."""
    pts, single = _as_points(y, dom.dim)
    v = pts - dom.centroid
    r = np.linalg.norm(v, axis=1)
    out = np.zeros_like(pts)
    nz = r > 0.0
    if np.any(nz):
        dirs = v[nz] / r[nz, None]
        radii = dom.radius_at_dirs(dirs)
        if np.any(r[nz] >= radii):
            raise ValueError("points must lie strictly inside the domain")
        out[nz] = v[nz] / radii[:, None]
    return _restore(out, single)


def star_boundary_points(dom: StarDomain, theta):
    """Points on the boundary, centroid + b(theta) * e(theta) (2-d)."""
    theta = np.asarray(theta, dtype=float)
    r = dom.radius_at_angles(theta)
    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return dom.centroid + r[..., None] * e


# Outer box edges take a small tolerance for float noise; the seam y = 1 is
# classified exactly (main-square side), keeping the identity branch bitwise.
_LOCAL_TOL = 1e-9


def _local_in_main(pts):
    return ((pts[:, 0] >= -_LOCAL_TOL) & (pts[:, 0] <= 1.0 + _LOCAL_TOL)
            & (pts[:, 1] >= -_LOCAL_TOL) & (pts[:, 1] <= 1.0))


def _local_in_flap(pts, a):
    return ((np.abs(pts[:, 0] - a) <= LOCAL_FLAP_HALF_WIDTH + _LOCAL_TOL)
            & (pts[:, 1] > LOCAL_FLAP_Y[0]) & (pts[:, 1] <= LOCAL_FLAP_Y[1] + _LOCAL_TOL))


def local_deform(dom: LocalDomain, x):
    """Identity on the main square, horizontal shift by (a - 0.5) on the flap.

    The seam y = 1 belongs to the main square (identity branch); points there
    are returned bitwise unchanged.
    """
    pts, single = _as_points(x, 2)
    main = _local_in_main(pts)
    flap = _local_in_flap(pts, 0.5) & ~main
    if not np.all(main | flap):
        raise ValueError("points must lie in the reference region")
    out = pts.copy()
    out[flap, 0] += dom.offset_a - 0.5
    return _restore(out, single)


def local_deform_inverse(dom: LocalDomain, y):
    pts, single = _as_points(y, 2)
    main = _local_in_main(pts)
    flap = _local_in_flap(pts, dom.offset_a) & ~main
    if not np.all(main | flap):
        raise ValueError("points must lie in the deformed region")
    out = pts.copy()
    out[flap, 0] -= dom.offset_a - 0.5
    return _restore(out, single)


def annulus_deform(dom: AnnulusDomain, x):
    """Map the closed reference ring 0.5 <= |x| <= 1 onto the annulus by
    radial interpolation between the inner and outer boundaries."""
    pts, single = _as_points(x, 2)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r < 0.5 - 1e-12) or np.any(r > 1.0 + 1e-12):
        raise ValueError("reference points must satisfy 0.5 <= |x| <= 1")
    theta = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), TWO_PI)
    b_in = np.asarray(dom.inner_fn(theta), dtype=float)
    b_out = np.asarray(dom.outer_fn(theta), dtype=float)
    rho = b_out * (2.0 * r - 1.0) + b_in * (2.0 - 2.0 * r)
    e = pts / r[:, None]
    return _restore(dom.inner_centroid + rho[:, None] * e, single)


def annulus_deform_inverse(dom: AnnulusDomain, y):
    pts, single = _as_points(y, 2)
    v = pts - dom.inner_centroid
    rho = np.linalg.norm(v, axis=1)
    theta = np.mod(np.arctan2(v[:, 1], v[:, 0]), TWO_PI)
    b_in = np.asarray(dom.inner_fn(theta), dtype=float)
    b_out = np.asarray(dom.outer_fn(theta), dtype=float)
    if np.any(rho < b_in - 1e-12) or np.any(rho > b_out + 1e-12):
        raise ValueError("points must lie inside the annulus")
    r = (rho + b_out - 2.0 * b_in) / (2.0 * (b_out - b_in))
    e = v / rho[:, None]
    return _restore(r[:, None] * e, single)


def deform(dom, x):
    """Family-dispatching deformation from the reference region onto dom."""
    if isinstance(dom, StarDomain):
        return star_deform(dom, x)
    if isinstance(dom, LocalDomain):
        return local_deform(dom, x)
    if isinstance(dom, AnnulusDomain):
        return annulus_deform(dom, x)
    raise ValueError(f"unsupported domain type {type(dom).__name__}")


def deform_inverse(dom, y):
    if isinstance(dom, StarDomain):
        return star_deform_inverse(dom, y)
    if isinstance(dom, LocalDomain):
        return local_deform_inverse(dom, y)
    if isinstance(dom, AnnulusDomain):
        return annulus_deform_inverse(dom, y)
    raise ValueError(f"unsupported domain type {type(dom).__name__}")


# ---------------------------------------------------------------------------
# polygons as star domains
# ---------------------------------------------------------------------------


def _polygon_signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polygon_centroid(v):
    x, y = v[:, 0], v[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = 0.5 * np.sum(cross)
    cx = np.sum((x + np.roll(x, -1)) * cross) / (6.0 * area)
    cy = np.sum((y + np.roll(y, -1)) * cross) / (6.0 * area)
    return np.array([cx, cy])


def _check_star_shaped(v, center, tol=1e-12):
    """Vertex angles about center must wind once, strictly monotonically.

    That is equivalent to every ray from the center meeting the boundary
    exactly once; a ray through a vertex then counts as one intersection.
    """
    rel = v - center
    radii = np.linalg.norm(rel, axis=1)
    if np.any(radii <= tol):
        raise ValueError("polygon is not star-shaped: a vertex coincides with the center")
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    gaps = np.mod(np.diff(ang, append=ang[0]), TWO_PI)
    if np.any(gaps <= tol) or np.any(gaps >= np.pi - tol):
        raise ValueError("polygon is not star-shaped about its centroid")


def polygon_radii(vertices, center, theta):
    """Exact ray-segment intersection radii from center at the given angles."""
    v = np.asarray(vertices, dtype=float)
    center = np.asarray(center, dtype=float)
    _check_star_shaped(v, center)
    rel = v - center
    ang = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), TWO_PI)
    order = np.argsort(ang, kind="stable")
    ang_sorted = ang[order]
    p = rel[order]
    q = rel[np.roll(order, -1)]

    t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    # wedge index: segment (p_i, q_i) spans [ang_i, ang_{i+1})
    idx = np.searchsorted(ang_sorted, t, side="right") - 1
    idx = np.mod(idx, len(ang_sorted))
    e = np.stack([np.cos(t), np.sin(t)], axis=-1)
    seg = q[idx] - p[idx]
    denom = e[..., 0] * seg[..., 1] - e[..., 1] * seg[..., 0]
    if np.any(np.abs(denom) <= 1e-12):
        raise ValueError("ray runs along a polygon edge; polygon is not star-shaped")
    radii = (p[idx][..., 0] * seg[..., 1] - p[idx][..., 1] * seg[..., 0]) / denom
    if np.any(radii <= 0):
        raise ValueError("ray-segment intersection produced a nonpositive radius")
    return radii


def polygon_to_star(p: PolygonDomain, recenter: bool = True) -> StarDomain:
    """View a star-shaped polygon as a StarDomain with exact ray-intersection
    boundary radii about the polygon centroid.

    With ``recenter`` the centroid is moved to the origin (the PDE families
    here are translation independent).
    """
    center = p.centroid()
    _check_star_shaped(p.vertices, center)
    verts = p.vertices - center if recenter else p.vertices
    origin = np.zeros(2) if recenter else center

    def boundary(theta):
        return polygon_radii(verts, origin, theta)

    probe = np.arange(2048) * (TWO_PI / 2048)
    lip = max(_lipschitz_estimate(boundary(probe)), 1e-12)
    return StarDomain(origin.copy(), boundary, lipschitz_bound=lip)


# ---------------------------------------------------------------------------
# area / centroid quadrature and random generators
# ---------------------------------------------------------------------------


def domain_area_centroid(dom: StarDomain, n_quad: int = 4096):
    """Area and geometric centroid of a 2-d star domain by periodic polar
    quadrature: area = int b^2/2 dtheta, first moments int b^3/3 e dtheta."""
    if dom.dim != 2:
        raise ValueError("area/centroid quadrature implemented for 2-d domains")
    if n_quad < 64:
        raise ValueError("n_quad must be at least 64")
    theta = np.arange(n_quad) * (TWO_PI / n_quad)
    b = dom.radius_at_angles(theta)
    dtheta = TWO_PI / n_quad
    area = 0.5 * float(np.sum(b * b)) * dtheta
    e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    moment = (b ** 3 / 3.0)[:, None] * e
    centroid = dom.centroid + moment.sum(axis=0) * dtheta / area
    return area, centroid


def random_star_domain(rng, base_radius=0.35, n_harmonics=5, coeff_scale=0.04,
                       min_radius=0.1, max_lipschitz=2.0, n_samples=512,
                       max_tries=200) -> StarDomain:
    """Random smooth star domain with truncated-Fourier boundary radii.

    b(theta) = r0 + sum_k (alpha_k cos k theta + beta_k sin k theta) with
    coefficients uniform in [-coeff_scale, coeff_scale]; draws are rejected
    when min b <= min_radius or the Lipschitz estimate exceeds max_lipschitz.
    The boundary polyline is re-parameterized about its computed centroid
    (two passes) and translated to the origin, so the stored reference point
    is the geometric centroid.
    """
    theta = np.arange(n_samples) * (TWO_PI / n_samples)
    for _ in range(max_tries):
        alpha = rng.uniform(-coeff_scale, coeff_scale, n_harmonics)
        beta = rng.uniform(-coeff_scale, coeff_scale, n_harmonics)
        k = np.arange(1, n_harmonics + 1)
        b = base_radius + (np.cos(np.outer(theta, k)) @ alpha
                           + np.sin(np.outer(theta, k)) @ beta)
        if b.min() <= min_radius:
            continue
        pts = b[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        for _ in range(2):  # re-center the polyline on its own centroid
            c = _polygon_centroid(pts)
            radii = polygon_radii(pts, c, theta)
            pts = radii[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        if radii.min() <= min_radius:
            continue
        lip = _lipschitz_estimate(radii)
        if lip > max_lipschitz:
            continue
        return star_from_samples(radii, centroid=(0.0, 0.0), lipschitz_bound=lip)
    raise RuntimeError("random_star_domain: rejection sampling did not converge")


def random_polygon(rng, n_vertices=None, radius_range=(0.25, 0.45),
                   max_tries=500) -> PolygonDomain:
    """Random convex polygon (4-6 vertices) contained in the unit square,
    built around (0.5, 0.5) and rejected until convex."""
    if n_vertices is None:
        n_vertices = int(rng.integers(4, 7))
    for _ in range(max_tries):
        ang = np.sort(rng.uniform(0.0, TWO_PI, n_vertices))
        if np.min(np.diff(ang, append=ang[0] + TWO_PI)) < 0.2:
            continue
        r = rng.uniform(radius_range[0], radius_range[1], n_vertices)
        v = 0.5 + r[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        edges = np.roll(v, -1, axis=0) - v
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        if np.all(cross > 1e-6):
            return PolygonDomain(v)
    raise RuntimeError("random_polygon: rejection sampling did not converge")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

BOUNDARY_SAMPLE_COUNT = 512


def domain_to_json(dom, n_samples=BOUNDARY_SAMPLE_COUNT) -> dict:
    """One JSON object per domain; boundary_samples are radii at uniform
    angles starting at theta = 0, counterclockwise."""
    if isinstance(dom, PolygonDomain):
        return {"kind": "polygon", "vertices": dom.vertices.tolist()}
    if isinstance(dom, StarDomain):
        if dom.dim != 2:
            raise ValueError("JSON serialization covers 2-d domains")
        theta = np.arange(n_samples) * (TWO_PI / n_samples)
        return {
            "kind": "star",
            "centroid": dom.centroid.tolist(),
            "boundary_samples": dom.radius_at_angles(theta).tolist(),
            "lipschitz_bound": dom.lipschitz_bound,
        }
    if isinstance(dom, LocalDomain):
        return {"kind": "local", "offset_a": dom.offset_a}
    if isinstance(dom, AnnulusDomain):
        theta = np.arange(n_samples) * (TWO_PI / n_samples)
        return {
            "kind": "annulus",
            "centroid": dom.inner_centroid.tolist(),
            "inner_samples": np.asarray(dom.inner_fn(theta), dtype=float).tolist(),
            "outer_samples": np.asarray(dom.outer_fn(theta), dtype=float).tolist(),
        }
    raise ValueError(f"unsupported domain type {type(dom).__name__}")


def domain_from_json(obj: dict):
    kind = obj.get("kind")
    if kind == "star":
        return star_from_samples(np.asarray(obj["boundary_samples"], dtype=float),
                                 centroid=np.asarray(obj["centroid"], dtype=float),
                                 lipschitz_bound=obj.get("lipschitz_bound"))
    if kind == "polygon":
        return PolygonDomain(np.asarray(obj["vertices"], dtype=float))
    if kind == "local":
        return LocalDomain(float(obj["offset_a"]))
    if kind == "annulus":
        inner = star_from_samples(np.asarray(obj["inner_samples"], dtype=float))
        outer = star_from_samples(np.asarray(obj["outer_samples"], dtype=float))
        return AnnulusDomain(np.asarray(obj["centroid"], dtype=float),
                             inner.boundary_fn, outer.boundary_fn)
    raise ValueError(f"unknown domain kind {kind!r}")
