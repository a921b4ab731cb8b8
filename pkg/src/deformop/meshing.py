"""Triangular meshes: a structured polar mesh of the unit disk (rings with a
center fan, sector count graded with the ring so elements stay quasi-uniform),
its image under star deformations, and per-sample conforming meshes for the
locally deformed family.

The disk mesh layout is fixed: ring k of n_r carries 6k nodes, so bands can be
triangulated by an angular two-pointer merge and triangle indices are grouped
by band, which gives O(log) point location without external libraries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    TWO_PI,
    LOCAL_FLAP_HALF_WIDTH,
    LOCAL_FLAP_Y,
    LocalDomain,
    StarDomain,
    local_deform,
)


@dataclass(frozen=True)
class TriMesh:
    """Triangulation with node-lumped quadrature weights.

    nodes : (N, 2) float
    triangles : (T, 3) int, counterclockwise
    boundary_nodes : (B,) int, nodes lying on boundary edges
    node_weights : (N,) float, lumped areas; sums to the mesh area
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    node_weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def area(self) -> float:
        return float(self.node_weights.sum())

    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return mask


def triangle_areas(nodes, triangles) -> np.ndarray:
    p = nodes[triangles]
    return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


def lumped_weights(nodes, triangles) -> np.ndarray:
    areas = triangle_areas(nodes, triangles)
    w = np.zeros(len(nodes))
    for k in range(3):
        np.add.at(w, triangles[:, k], areas / 3.0)
    return w


def boundary_nodes_from_edges(triangles, n_nodes) -> np.ndarray:
    """Nodes on edges that belong to exactly one triangle."""
    edges = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    return np.unique(uniq[counts == 1])


def _build_mesh(nodes, triangles) -> TriMesh:
    nodes = np.asarray(nodes, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    areas = triangle_areas(nodes, triangles)
    if np.any(areas <= 0):
        raise ValueError("mesh has a non-positively oriented or degenerate triangle")
    return TriMesh(nodes, triangles,
                   boundary_nodes_from_edges(triangles, len(nodes)),
                   lumped_weights(nodes, triangles))


# ---------------------------------------------------------------------------
# unit-disk reference mesh
# ---------------------------------------------------------------------------


def disk_rings_for_h(h: float) -> int:
    # 1.1/h rings keep the band-merge diagonals (worst ~1.56/n_r) under 1.5h
    if not (0.0 < h < 0.5):
        raise ValueError("target edge length must satisfy 0 < h < 0.5")
    return max(3, int(np.ceil(1.1 / h)))


def _merge_band(inner_ids, inner_ang, outer_ids, outer_ang):
    """Triangulate between two angle-sorted concentric rings by advancing the
    pointer with the smaller next angle; yields len(inner)+len(outer)
    counterclockwise triangles."""
    ni, no = len(inner_ids), len(outer_ids)
    tris = []
    i = o = 0
    while i < ni or o < no:
        nxt_i = inner_ang[(i + 1) % ni] + (TWO_PI if i + 1 >= ni else 0.0) if i < ni else np.inf
        nxt_o = outer_ang[(o + 1) % no] + (TWO_PI if o + 1 >= no else 0.0) if o < no else np.inf
        if nxt_i <= nxt_o:
            tris.append((inner_ids[i % ni], outer_ids[o % no], inner_ids[(i + 1) % ni]))
            i += 1
        else:
            tris.append((outer_ids[o % no], outer_ids[(o + 1) % no], inner_ids[i % ni]))
            o += 1
    return tris


def reference_disk_mesh(h: float) -> TriMesh:
    """Quasi-uniform triangulation of the closed unit disk with max edge
    <= 1.5 h."""
    return disk_mesh_by_rings(disk_rings_for_h(h))


def disk_mesh_by_rings(n_r: int) -> TriMesh:
    """Disk mesh with an explicit ring count; ring k holds 6k nodes."""
    if n_r < 2:
        raise ValueError("need at least 2 rings")
    nodes = [np.zeros((1, 2))]
    ring_ids = []
    ring_angles = []
    offset = 1
    for k in range(1, n_r + 1):
        m = 6 * k
        ang = np.arange(m) * (TWO_PI / m)
        r = k / n_r
        nodes.append(np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1))
        ring_ids.append(np.arange(offset, offset + m))
        ring_angles.append(ang)
        offset += m
    tris = [(0, ring_ids[0][j], ring_ids[0][(j + 1) % 6]) for j in range(6)]
    for k in range(1, n_r):
        tris.extend(_merge_band(ring_ids[k - 1], ring_angles[k - 1],
                                ring_ids[k], ring_angles[k]))
    return _build_mesh(np.concatenate(nodes), np.array(tris))


def deform_star_mesh_nodes(dom: StarDomain, pts: np.ndarray) -> np.ndarray:
    """Star deformation extended to the closed ball (mesh nodes include the
    boundary ring at |x| = 1)."""
    r = np.linalg.norm(pts, axis=1)
    out = np.tile(dom.centroid, (len(pts), 1))
    nz = r > 0
    dirs = pts[nz] / r[nz, None]
    out[nz] = dom.centroid + dom.radius_at_dirs(dirs)[:, None] * pts[nz]
    return out


def deform_mesh(ref: TriMesh, dom: StarDomain) -> TriMesh:
    """Push the reference mesh through the star deformation; connectivity is
    unchanged and an inverted triangle raises (domain too distorted for the
    mesh resolution)."""
    nodes = deform_star_mesh_nodes(dom, ref.nodes)
    areas = triangle_areas(nodes, ref.triangles)
    if np.any(areas <= 0):
        raise ValueError("deformation inverted a triangle; refine the mesh or "
                         "smooth the domain")
    return TriMesh(nodes, ref.triangles, ref.boundary_nodes,
                   lumped_weights(nodes, ref.triangles))


def unit_square_mesh(n: int) -> TriMesh:
    """Regular n x n grid of the unit square, each cell split along the same
    diagonal."""
    if n < 2:
        raise ValueError("need at least 2 cells per side")
    xs = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(xs, xs, indexing="xy")
    nodes = np.stack([xx.reshape(-1), yy.reshape(-1)], axis=-1)
    tris = []
    for j in range(n):
        for i in range(n):
            p00 = j * (n + 1) + i
            p10, p01 = p00 + 1, p00 + n + 1
            p11 = p01 + 1
            tris.append((p00, p10, p11))
            tris.append((p00, p11, p01))
    return _build_mesh(nodes, np.array(tris))


# ---------------------------------------------------------------------------
# locally deformed family
# ---------------------------------------------------------------------------


def _near_multiple(x: float, h: float) -> bool:
    return abs(x / h - round(x / h)) < 1e-9


def _merge_rows(bottom_ids, bottom_x, top_ids, top_x):
    """Linear counterpart of _merge_band for two horizontal node rows sharing
    their endpoints."""
    nb, nt = len(bottom_ids), len(top_ids)
    tris = []
    i = o = 0
    while i < nb - 1 or o < nt - 1:
        nxt_b = bottom_x[i + 1] if i < nb - 1 else np.inf
        nxt_t = top_x[o + 1] if o < nt - 1 else np.inf
        if nxt_b <= nxt_t:
            tris.append((bottom_ids[i], bottom_ids[i + 1], top_ids[o]))
            i += 1
        else:
            tris.append((top_ids[o + 1], top_ids[o], bottom_ids[i]))
            o += 1
    return tris


def local_domain_mesh(dom: LocalDomain, h: float = 0.05) -> TriMesh:
    """Conforming mesh of the square-plus-flap domain at offset a.

    The main grid is regular up to y = 1-h; the strip below the seam is
    triangulated against the seam row enriched with the flap columns, and the
    flap is a regular grid above. Requires h to divide 1, the flap width and
    the reference flap offset so that the a = 0.5 configuration collapses onto
    the plain grid.
    """
    a = dom.offset_a
    w = 2.0 * LOCAL_FLAP_HALF_WIDTH
    if not (_near_multiple(1.0, h) and _near_multiple(w, h)
            and _near_multiple(0.5 - LOCAL_FLAP_HALF_WIDTH, h)):
        raise ValueError("grid step must divide 1, the flap width and the "
                         "reference flap offset")
    n1 = round(1.0 / h)
    nf = round(w / h)
    nfy = round((LOCAL_FLAP_Y[1] - LOCAL_FLAP_Y[0]) / h)
    main_x = np.linspace(0.0, 1.0, n1 + 1)
    flap_x = np.linspace(a - LOCAL_FLAP_HALF_WIDTH, a + LOCAL_FLAP_HALF_WIDTH, nf + 1)

    nodes = []
    index = {}

    def add(x, y):
        key = (round(x / h * 1e6), round(y / h * 1e6))
        if key not in index:
            index[key] = len(nodes)
            nodes.append((x, y))
        return index[key]

    # main grid rows y = 0 .. 1-h
    grid = [[add(x, j * h) for x in main_x] for j in range(n1)]
    # seam row y = 1: main columns merged with flap columns
    seam_x = np.unique(np.round(np.concatenate([main_x, flap_x]) / h * 1e6)) / 1e6 * h
    seam = [add(x, 1.0) for x in seam_x]
    # flap rows y = 1+h .. 1.3
    flap_bottom = [index[(round(x / h * 1e6), round(1.0 / h * 1e6))] for x in flap_x]
    flap_rows = [flap_bottom]
    flap_y = np.linspace(LOCAL_FLAP_Y[0], LOCAL_FLAP_Y[1], nfy + 1)
    for j in range(1, nfy + 1):
        flap_rows.append([add(x, flap_y[j]) for x in flap_x])

    tris = []
    for j in range(n1 - 1):  # regular main cells below the strip
        for i in range(n1):
            p00, p10 = grid[j][i], grid[j][i + 1]
            p01, p11 = grid[j + 1][i], grid[j + 1][i + 1]
            tris.append((p00, p10, p11))
            tris.append((p00, p11, p01))
    tris.extend(_merge_rows(grid[n1 - 1], main_x, seam, seam_x))
    for j in range(nfy):
        for i in range(nf):
            p00, p10 = flap_rows[j][i], flap_rows[j][i + 1]
            p01, p11 = flap_rows[j + 1][i], flap_rows[j + 1][i + 1]
            tris.append((p00, p10, p11))
            tris.append((p00, p11, p01))
    return _build_mesh(np.array(nodes), np.array(tris))


def local_reference_mesh(h: float = 0.05) -> TriMesh:
    return local_domain_mesh(LocalDomain(0.5), h)


def local_node_map(ref: TriMesh, dom: LocalDomain, mesh: TriMesh, h: float) -> np.ndarray:
    """Index map m with mesh.nodes[m[i]] = deformation(ref.nodes[i]).

    The deformation sends every reference node onto a node of the deformed
    mesh (seam nodes ride with the main block), which makes pullbacks of
    nodal fields exact.
    """
    moved = local_deform(dom, ref.nodes)
    lookup = {(round(x / h * 1e6), round(y / h * 1e6)): i
              for i, (x, y) in enumerate(mesh.nodes)}
    out = np.empty(ref.n_nodes, dtype=np.int64)
    for i, (x, y) in enumerate(moved):
        key = (round(x / h * 1e6), round(y / h * 1e6))
        if key not in lookup:
            raise ValueError("reference node does not land on a mesh node")
        out[i] = lookup[key]
    return out


# ---------------------------------------------------------------------------
# point location and interpolation on the disk reference mesh
# ---------------------------------------------------------------------------


def barycentric(tri_pts, p):
    """Barycentric coordinates of p in the triangle (3,2)."""
    a, b, c = tri_pts
    m = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
    rhs = np.asarray(p) - a
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    l1 = (rhs[0] * m[1, 1] - rhs[1] * m[0, 1]) / det
    l2 = (-rhs[0] * m[1, 0] + rhs[1] * m[0, 0]) / det
    return np.array([1.0 - l1 - l2, l1, l2])


class DiskMeshLocator:
    """Point location on the graded polar disk mesh: the containing band
    follows from the radius, candidates within the band from a binary search
    on centroid angles."""

    def __init__(self, mesh: TriMesh, n_rings: int):
        self.mesh = mesh
        self.n_rings = n_rings
        self.band_start = [0] + [6 * k * k for k in range(1, n_rings + 1)]
        cent = mesh.nodes[mesh.triangles].mean(axis=1)
        ang = np.mod(np.arctan2(cent[:, 1], cent[:, 0]), TWO_PI)
        self._band_order = []
        self._band_ang = []
        for k in range(1, n_rings + 1):
            lo, hi = self.band_start[k - 1], self.band_start[k]
            order = np.argsort(ang[lo:hi], kind="stable")
            self._band_order.append(order + lo)
            self._band_ang.append(ang[lo:hi][order])

    def find(self, p, tol=1e-9):
        r = float(np.hypot(p[0], p[1]))
        if r > 1.0 + tol:
            raise ValueError("point lies outside the unit disk mesh")
        band = min(self.n_rings, max(1, int(np.floor(r * self.n_rings)) + 1))
        th = np.mod(np.arctan2(p[1], p[0]), TWO_PI)
        for b in (band, band - 1, band + 1):
            if not (1 <= b <= self.n_rings):
                continue
            order = self._band_order[b - 1]
            angles = self._band_ang[b - 1]
            j = int(np.searchsorted(angles, th))
            n = len(order)
            for off in (0, -1, 1, -2, 2, -3, 3):
                t = order[(j + off) % n]
                lam = barycentric(self.mesh.nodes[self.mesh.triangles[t]], p)
                if lam.min() >= -tol:
                    return t, lam
            for t in order:  # rare fallback: exhaustive scan of the band
                lam = barycentric(self.mesh.nodes[self.mesh.triangles[t]], p)
                if lam.min() >= -tol:
                    return t, lam
        raise ValueError(f"no containing triangle found for point {p}")

    def interpolate(self, values, pts) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.empty(len(pts))
        for i, p in enumerate(pts):
            t, lam = self.find(p)
            out[i] = float(values[self.mesh.triangles[t]] @ lam)
        return out
