"""P1 finite elements for the variable-coefficient Poisson problem
-div(k grad u) = f with Dirichlet data, on the triangular meshes of this
package. Boundary conditions are eliminated symmetrically (known columns move
to the right-hand side) so the reduced operator stays symmetric positive
definite for conjugate gradients and Gauss-Seidel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .meshing import TriMesh, triangle_areas


class SolverError(RuntimeError):
    """Iterative solve failed; carries the final relative residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SparseSystem:
    """Reduced SPD system plus the bookkeeping to reassemble full-length
    solutions.

    matrix : CSR operator on interior unknowns
    rhs : load with boundary columns eliminated
    dirichlet_mask : boolean mask over all mesh nodes
    boundary_values : Dirichlet data at the masked nodes
    interior : interior node indices (mesh numbering)
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dirichlet_mask: np.ndarray
    boundary_values: np.ndarray
    interior: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return self.rhs.shape[0]

    def residual(self, u_interior) -> float:
        b_norm = float(np.linalg.norm(self.rhs))
        r = self.rhs - self.matrix @ u_interior
        return float(np.linalg.norm(r)) / (b_norm if b_norm > 0 else 1.0)

    def expand(self, u_interior) -> np.ndarray:
        full = np.zeros(self.dirichlet_mask.shape[0])
        full[self.interior] = u_interior
        full[self.dirichlet_mask] = self.boundary_values
        return full


def assemble_stiffness(mesh: TriMesh, k_nodes) -> sp.csr_matrix:
    """Stiffness matrix with element-wise diffusivity taken as the average of
    the vertex values of k on each triangle."""
    k_nodes = np.asarray(k_nodes, dtype=float)
    if np.any(k_nodes <= 0):
        raise ValueError("diffusivity k must be strictly positive")
    tris = mesh.triangles
    p = mesh.nodes[tris]
    areas = triangle_areas(mesh.nodes, tris)
    # P1 basis gradients: grad(lambda_i) = perp(edge opposite i) / (2 area)
    e0 = p[:, 2] - p[:, 1]
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    grads = np.stack([e0, e1, e2], axis=1)
    grads = np.stack([-grads[..., 1], grads[..., 0]], axis=-1) / (2.0 * areas[:, None, None])
    k_elem = k_nodes[tris].mean(axis=1)
    local = np.einsum("tia,tja->tij", grads, grads) * (k_elem * areas)[:, None, None]
    rows = np.repeat(tris, 3, axis=1).reshape(-1)
    cols = np.tile(tris, (1, 3)).reshape(-1)
    a = sp.coo_matrix((local.reshape(-1), (rows, cols)),
                      shape=(mesh.n_nodes, mesh.n_nodes))
    return a.tocsr()


def assemble_poisson(mesh: TriMesh, k_nodes, f_nodes, g_boundary) -> SparseSystem:
    """Assemble -div(k grad u) = f with u = g on the boundary: P1 stiffness,
    lumped-mass load b_i = f_i * w_i, symmetric Dirichlet elimination."""
    a_full = assemble_stiffness(mesh, k_nodes)
    f_nodes = np.asarray(f_nodes, dtype=float)
    b_full = f_nodes * mesh.node_weights

    mask = np.zeros(mesh.n_nodes, dtype=bool)
    mask[mesh.boundary_nodes] = True
    interior = np.flatnonzero(~mask)
    g = np.zeros(mesh.n_nodes)
    g[mesh.boundary_nodes] = np.asarray(g_boundary, dtype=float)

    a_ii = a_full[interior][:, interior].tocsr()
    b_i = b_full[interior] - a_full[interior][:, mask] @ g[mask]
    return SparseSystem(a_ii, b_i, mask, g[mask], interior)


def solve_sparse(system: SparseSystem, method: str = "direct", tol: float = 1e-10,
                 max_iter: int = 20000) -> np.ndarray:
    """Solve the reduced system and return the full-length nodal solution with
    relative residual at most tol."""
    if method == "direct":
        u = spla.spsolve(system.matrix.tocsc(), system.rhs)
    elif method == "cg":
        u, info = spla.cg(system.matrix, system.rhs, rtol=tol * 0.1, atol=0.0,
                          maxiter=max_iter)
        if info != 0:
            raise SolverError(f"cg did not converge (info={info})", system.residual(u))
    else:
        raise ValueError(f"unknown solver method {method!r}")
    res = system.residual(u)
    if res > tol:
        raise SolverError(f"solver residual {res:.3e} above tolerance {tol:.1e}", res)
    return system.expand(u)


def relative_l2_error(mesh: TriMesh, u, u_exact) -> float:
    diff = np.asarray(u) - np.asarray(u_exact)
    num = np.sqrt(np.sum(mesh.node_weights * diff ** 2))
    den = np.sqrt(np.sum(mesh.node_weights * np.asarray(u_exact) ** 2))
    return float(num / den)
