"""Finite-dimensional encodings of domains and of functions pulled back to the
reference region, the matching decoders, the induced projections, and the
metric on the union of function spaces over varying domains.

Domain encodings are boundary radii at evenly spread directions (uniform
angles in 2-d, a Fibonacci lattice in 3-d). Function encodings are either
point samples at a node set fixed once per dataset, or cell averages over an
equal-measure partition of the reference region; cell averages are the
decoder-friendly, projection-exact route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    TWO_PI,
    LOCAL_FLAP_HALF_WIDTH,
    LOCAL_FLAP_Y,
    StarDomain,
    LocalDomain,
    deform,
    deform_inverse,
    domain_metric,
    polygon_radii,
    star_boundary_points,
    star_from_samples,
)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


# ---------------------------------------------------------------------------
# direction sets
# ---------------------------------------------------------------------------


def directions_2d(n: int) -> np.ndarray:
    """n unit vectors (cos(2*pi*i/n), sin(2*pi*i/n)), i = 1..n."""
    if n < 3:
        raise ValueError("need at least 3 directions")
    i = np.arange(1, n + 1)
    ang = TWO_PI * i / n
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def direction_angles_2d(n: int) -> np.ndarray:
    if n < 3:
        raise ValueError("need at least 3 directions")
    return TWO_PI * np.arange(1, n + 1) / n


def directions_3d_fibonacci(n: int) -> np.ndarray:
    """Fibonacci-lattice directions: z_i = 1 - (2i-2)/(n-1), azimuth
    (sqrt(5)-1)*pi*i, i = 1..n."""
    if n < 4:
        raise ValueError("need at least 4 directions")
    i = np.arange(1, n + 1, dtype=float)
    z = 1.0 - (2.0 * i - 2.0) / (n - 1.0)
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    az = (np.sqrt(5.0) - 1.0) * np.pi * i
    return np.stack([rho * np.cos(az), rho * np.sin(az), z], axis=-1)


# ---------------------------------------------------------------------------
# encodings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainEncoding:
    """Boundary radii at the directions of a named direction scheme, with the
    centroid optionally prepended for families that are not recentred."""

    radii: np.ndarray
    centroid: Optional[np.ndarray] = None
    direction_set_id: str = ""

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if np.any(r <= 0):
            raise ValueError("domain encoding radii must be strictly positive")
        object.__setattr__(self, "radii", r)
        if self.centroid is not None:
            object.__setattr__(self, "centroid", np.asarray(self.centroid, dtype=float))

    def vector(self) -> np.ndarray:
        if self.centroid is not None:
            return np.concatenate([self.centroid, self.radii])
        return self.radii


@dataclass(frozen=True)
class FunctionEncoding:
    values: np.ndarray
    scheme: str = "point_sample"
    node_set_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.scheme not in ("point_sample", "cell_average"):
            raise ValueError(f"unknown encoding scheme {self.scheme!r}")


@dataclass(frozen=True)
class CombinedEncoding:
    """Domain part plus one function part per input function and an optional
    boundary-trace part; ``vectors`` yields one array per network branch."""

    domain_part: DomainEncoding
    function_parts: tuple
    boundary_part: Optional[FunctionEncoding] = None

    def vectors(self) -> list:
        out = [self.domain_part.vector()]
        out.extend(fp.values for fp in self.function_parts)
        if self.boundary_part is not None:
            out.append(self.boundary_part.values)
        return out

    @property
    def total_length(self) -> int:
        return sum(v.size for v in self.vectors())


def encode_domain(dom: StarDomain, n: int, include_centroid: bool = False) -> DomainEncoding:
    """Boundary radii b(e_i) at n evenly spread directions."""
    if dom.dim == 2:
        radii = dom.radius_at_angles(direction_angles_2d(n))
        scheme = f"circle:{n}"
    else:
        radii = dom.radius_at_dirs(directions_3d_fibonacci(n))
        scheme = f"fib:{n}"
    return DomainEncoding(radii=radii,
                          centroid=dom.centroid.copy() if include_centroid else None,
                          direction_set_id=scheme)


def decode_domain(enc: DomainEncoding) -> StarDomain:
    """Reconstruct the inscribed polygon through the encoded boundary points.

    The returned StarDomain keeps the encoding's reference point; the
    reconstruction is not re-centred on the polygon centroid.
    """
    if not enc.direction_set_id.startswith("circle:"):
        raise ValueError("decode_domain reconstructs 2-d circle-scheme encodings")
    n = enc.radii.size
    if n < 3:
        raise ValueError("need at least 3 radii to reconstruct a polygon")
    center = enc.centroid if enc.centroid is not None else np.zeros(2)
    ang = direction_angles_2d(n)
    verts = center + enc.radii[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def boundary(theta):
        return polygon_radii(verts, center, theta)

    probe = np.arange(4 * n) * (TWO_PI / (4 * n))
    b = boundary(probe)
    slope = np.abs(np.diff(np.concatenate([b, b[:1]]))) / (2.0 * np.sin(np.pi / (4 * n)))
    return StarDomain(np.asarray(center, dtype=float).copy(), boundary,
                      lipschitz_bound=max(float(slope.max()), 1e-12))


def project_domain(dom: StarDomain, n: int) -> StarDomain:
    """P1 projection: decode(encode(dom, n))."""
    return decode_domain(encode_domain(dom, n, include_centroid=True))


# ---------------------------------------------------------------------------
# reference-region node sets and quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quadrature:
    """Fixed-node quadrature on the reference region with uniform area
    weights m(region)/N."""

    points: np.ndarray
    weights: np.ndarray

    def norm(self, values) -> float:
        return float(np.sqrt(np.sum(self.weights * np.asarray(values) ** 2)))


def disk_nodes_uniform(m: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(size=m))
    th = rng.uniform(0.0, TWO_PI, size=m)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def disk_nodes_fibonacci(m: int) -> np.ndarray:
    """Deterministic sunflower layout in the unit disk."""
    i = np.arange(1, m + 1, dtype=float)
    r = np.sqrt((i - 0.5) / m)
    th = GOLDEN_ANGLE * i
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def ring_nodes_uniform(m: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = np.sqrt(0.25 + 0.75 * rng.uniform(size=m))
    th = rng.uniform(0.0, TWO_PI, size=m)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def local_nodes_uniform(m: int, seed: int = 0) -> np.ndarray:
    """Uniform nodes on the square-plus-flap reference region."""
    rng = np.random.default_rng(seed)
    w = 2.0 * LOCAL_FLAP_HALF_WIDTH
    flap_h = LOCAL_FLAP_Y[1] - LOCAL_FLAP_Y[0]
    area_main, area_flap = 1.0, w * flap_h
    pick = rng.uniform(size=m) < area_main / (area_main + area_flap)
    pts = np.empty((m, 2))
    pts[pick] = rng.uniform(size=(int(pick.sum()), 2))
    nf = int((~pick).sum())
    fx = 0.5 - LOCAL_FLAP_HALF_WIDTH + w * rng.uniform(size=nf)
    fy = LOCAL_FLAP_Y[0] + flap_h * rng.uniform(size=nf)
    pts[~pick] = np.stack([fx, fy], axis=-1)
    return pts


def disk_quadrature(n: int = 4096, seed: int = 0) -> Quadrature:
    pts = disk_nodes_uniform(n, seed)
    return Quadrature(pts, np.full(n, np.pi / n))


def ring_quadrature(n: int = 4096, seed: int = 0) -> Quadrature:
    pts = ring_nodes_uniform(n, seed)
    return Quadrature(pts, np.full(n, 0.75 * np.pi / n))


def local_quadrature(n: int = 4096, seed: int = 0) -> Quadrature:
    pts = local_nodes_uniform(n, seed)
    area = 1.0 + 2.0 * LOCAL_FLAP_HALF_WIDTH * (LOCAL_FLAP_Y[1] - LOCAL_FLAP_Y[0])
    return Quadrature(pts, np.full(n, area / n))


# ---------------------------------------------------------------------------
# partitions and function encoders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellPartition:
    n_cells: int
    assign: Callable
    partition_id: str = ""


def disk_equal_area_partition(n_rings: int, n_sectors: int) -> CellPartition:
    """Equal-area rings (edges at sqrt(k/n_rings)) times equal angles.
    Doubling both counts refines every cell, so partitions nest."""

    def assign(pts):
        pts = np.asarray(pts, dtype=float)
        r2 = np.sum(pts * pts, axis=-1)
        ring = np.minimum((r2 * n_rings).astype(int), n_rings - 1)
        th = np.mod(np.arctan2(pts[..., 1], pts[..., 0]), TWO_PI)
        sector = np.minimum((th / TWO_PI * n_sectors).astype(int), n_sectors - 1)
        return ring * n_sectors + sector

    return CellPartition(n_rings * n_sectors, assign, f"polar:{n_rings}x{n_sectors}")


@dataclass(frozen=True)
class FunctionEncoder:
    """Fixed discretization of functions on the reference region.

    point_sample encoders carry the node set (fixed across a dataset);
    cell_average encoders carry a quadrature and a partition, and both the
    averages and the decoded piecewise-constant function are taken with
    respect to that same fixed quadrature, which makes the induced projection
    orthogonal in the discrete L2 inner product.
    """

    scheme: str
    nodes: Optional[np.ndarray] = None
    quad: Optional[Quadrature] = None
    partition: Optional[CellPartition] = None
    node_set_id: str = ""

    def __post_init__(self):
        if self.scheme == "point_sample":
            if self.nodes is None:
                raise ValueError("point_sample encoder needs nodes")
            object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=float))
        elif self.scheme == "cell_average":
            if self.quad is None or self.partition is None:
                raise ValueError("cell_average encoder needs quadrature and partition")
        else:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def length(self) -> int:
        if self.scheme == "point_sample":
            return self.nodes.shape[0]
        return self.partition.n_cells

    def encode(self, f: Callable, dom) -> FunctionEncoding:
        """Encode a function defined on the physical domain via pullback."""
        if self.scheme == "point_sample":
            vals = np.asarray(f(deform(dom, self.nodes)), dtype=float)
            return FunctionEncoding(vals, "point_sample", self.node_set_id)
        vals = np.asarray(f(deform(dom, self.quad.points)), dtype=float)
        return FunctionEncoding(self._cell_means(vals), "cell_average", self.node_set_id)

    def encode_reference(self, fhat) -> FunctionEncoding:
        """Encode a reference function (callable on the reference region, or
        point values at the encoder's own nodes)."""
        if self.scheme == "point_sample":
            vals = fhat if isinstance(fhat, np.ndarray) else np.asarray(fhat(self.nodes), dtype=float)
            if vals.shape != (self.length,):
                raise ValueError("point values must match the encoder node count")
            return FunctionEncoding(vals, "point_sample", self.node_set_id)
        vals = np.asarray(fhat(self.quad.points), dtype=float)
        return FunctionEncoding(self._cell_means(vals), "cell_average", self.node_set_id)

    def _cell_means(self, vals):
        labels = self.partition.assign(self.quad.points)
        sums = np.bincount(labels, weights=vals, minlength=self.partition.n_cells)
        counts = np.bincount(labels, minlength=self.partition.n_cells)
        means = np.zeros(self.partition.n_cells)
        nonzero = counts > 0
        means[nonzero] = sums[nonzero] / counts[nonzero]
        return means

    def decode(self, enc: FunctionEncoding) -> Callable:
        """Reconstruction on the reference region: piecewise constants on the
        partition (cell_average) or nearest-node values (point_sample)."""
        values = enc.values
        if enc.scheme == "cell_average":
            assign = self.partition.assign

            def fhat(x):
                return values[assign(x)]

            return fhat
        tree = cKDTree(self.nodes)

        def fhat(x):
            _, idx = tree.query(np.asarray(x, dtype=float))
            return values[idx]

        return fhat

    def project(self, fhat) -> Callable:
        """decode(encode_reference(fhat)) on the reference region."""
        return self.decode(self.encode_reference(fhat))


def encode_function(f, dom, encoder: FunctionEncoder) -> FunctionEncoding:
    return encoder.encode(f, dom)


def decode_function(enc: FunctionEncoding, encoder: FunctionEncoder) -> Callable:
    return encoder.decode(enc)


@dataclass(frozen=True)
class BoundaryEncoder:
    """Trace encoder on the reference boundary (unit circle), for boundary
    data of star-family problems."""

    angles: np.ndarray

    @classmethod
    def uniform(cls, m: int):
        return cls(np.arange(m) * (TWO_PI / m))

    @property
    def length(self) -> int:
        return self.angles.size

    def encode(self, g: Callable, dom: StarDomain) -> FunctionEncoding:
        pts = star_boundary_points(dom, self.angles)
        return FunctionEncoding(np.asarray(g(pts), dtype=float), "point_sample",
                                f"circle-boundary:{self.length}")


# ---------------------------------------------------------------------------
# metric on the union of function spaces, and the combined projection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XSample:
    """A function attached to its domain: one element of the union space."""

    dom: object
    f: Callable


def x_metric(s1: XSample, s2: XSample, quad: Quadrature, n_angles: int = 1024) -> float:
    """d_U(dom1, dom2) + L2(reference) distance of the pullbacks, with the L2
    norm taken by the fixed reference quadrature."""
    d_u = domain_metric(s1.dom, s2.dom, n_angles)
    v1 = np.asarray(s1.f(deform(s1.dom, quad.points)), dtype=float)
    v2 = np.asarray(s2.f(deform(s2.dom, quad.points)), dtype=float)
    return d_u + quad.norm(v1 - v2)


def x_metric_from_values(d_u: float, v1, v2, weights) -> float:
    diff = np.asarray(v1, dtype=float) - np.asarray(v2, dtype=float)
    return float(d_u + np.sqrt(np.sum(np.asarray(weights) * diff ** 2)))


def project_x(sample: XSample, n_domain: int, fencoder: FunctionEncoder) -> XSample:
    """Combined projection: project the domain, project the pullback, and
    recombine to a function on the projected domain."""
    dom_p = project_domain(sample.dom, n_domain)

    def fhat(x):
        return sample.f(deform(sample.dom, x))

    fhat_p = fencoder.project(fhat)

    def f_new(y):
        return fhat_p(deform_inverse(dom_p, y))

    return XSample(dom_p, f_new)
