"""Green's function of the Dirichlet Laplacian on the unit disk via the image
point, and the representation-formula quadrature used as an independent check
of the finite element pipeline.

G(x, y) = (1/2pi) * (log q(x, y) - log|x - y|) with
q(x, y)^2 = |x|^2 |y|^2 - 2 x.y + 1, which is the |x| |y - x/|x|^2| image
distance written symmetrically; q = 1 when either argument is the origin and
q = |x - y| when either argument reaches the boundary, so G vanishes there.
"""

from __future__ import annotations

import numpy as np

from .meshing import TriMesh


def greens_disk(x, y):
    """G(x, y) for x (2,) and y (2,) or (n, 2), both strictly inside the unit
    disk; coincident points raise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    ys = np.atleast_2d(y)
    d2 = np.sum((ys - x) ** 2, axis=1)
    if np.any(d2 <= 1e-28):
        raise ValueError("Green's function is singular at coincident points")
    q2 = np.sum(x * x) * np.sum(ys * ys, axis=1) - 2.0 * (ys @ x) + 1.0
    g = (0.5 * np.log(q2) - 0.5 * np.log(d2)) / (2.0 * np.pi)
    return float(g[0]) if single else g


def representation_solution(mesh: TriMesh, f_nodes, eval_nodes) -> np.ndarray:
    """Solution values u(x_j) = int G(x_j, y) f(y) dy at the mesh nodes
    ``eval_nodes`` by node-weight quadrature with singularity subtraction:

        u(x) = sum_i w_i G(x, y_i) (f_i - f(x)) + f(x) (1 - |x|^2) / 4,

    using that the disk solution for a unit source is (1 - r^2)/4. The i = x
    term vanishes with the subtraction and is skipped.
    """
    f_nodes = np.asarray(f_nodes, dtype=float)
    out = np.empty(len(eval_nodes))
    pts = mesh.nodes
    w = mesh.node_weights
    for j, idx in enumerate(np.asarray(eval_nodes, dtype=int)):
        x = pts[idx]
        d2 = np.sum((pts - x) ** 2, axis=1)
        keep = d2 > 1e-28
        q2 = np.sum(x * x) * np.sum(pts * pts, axis=1) - 2.0 * (pts @ x) + 1.0
        g = np.zeros(len(pts))
        g[keep] = (0.5 * np.log(q2[keep]) - 0.5 * np.log(d2[keep])) / (2.0 * np.pi)
        fx = f_nodes[idx]
        out[j] = float(np.sum(w * g * (f_nodes - fx)) + fx * (1.0 - np.sum(x * x)) / 4.0)
    return out
