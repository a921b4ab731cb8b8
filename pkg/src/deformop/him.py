"""Hybrid iterative method: Gauss-Seidel sweeps on the reduced FEM system,
periodically corrected by solving the error equation -div(k grad e) = r with
a linear-in-source surrogate (or exactly, as an oracle). Corrections that do
not reduce the residual are rolled back and the correction period doubles, so
the hybrid never diverges regardless of surrogate quality.

The residual is rescaled to unit L2 norm before encoding and the predicted
correction rescaled back, which the linear source branch makes exact and
which keeps corrector inputs inside the training distribution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import SparseSystem
from .meshing import DiskMeshLocator, TriMesh
from .mionet import MIONetModel
from .training import pullback_closed


class HIMError(RuntimeError):
    """Solve failed; carries the residual trace collected so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass
class Trace:
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def record(self, iteration, residual, event):
        self.iterations.append(int(iteration))
        self.residuals.append(float(residual))
        self.events.append(event)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iteration,residual,event\n")
            for i, r, e in zip(self.iterations, self.residuals, self.events):
                fh.write(f"{i},{r:.17g},{e}\n")

    @property
    def n_sweeps(self) -> int:
        return sum(1 for e in self.events if e == "sweep")


@dataclass(frozen=True)
class HIMConfig:
    period: int = 200
    residual_tolerance: float = 1e-8
    max_iterations: int = 2_000_000
    corrector: object = None  # None | "exact_oracle" | NeuralCorrector
    safeguard: float = 1.0
    # sweeps run right after adding a correction, before the safeguard
    # comparison: a coarse correction rightly spikes the residual (it injects
    # high-frequency error while fixing the smooth part) and smoothing crushes
    # the spike; these sweeps count toward the total
    correction_smoothing: int = 30

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("correction period must be at least 1")
        if self.residual_tolerance <= 0:
            raise ValueError("residual tolerance must be positive")


class GaussSeidelKernel:
    """One forward sweep as a lower-triangular solve with the D+L part."""

    def __init__(self, matrix):
        matrix = matrix.tocsr()
        if np.any(matrix.diagonal() == 0.0):
            raise ValueError("Gauss-Seidel needs a nonzero diagonal")
        self.lower = sp.tril(matrix, format="csr")
        self.upper = sp.triu(matrix, k=1, format="csr")

    def sweep(self, u, rhs):
        return spla.spsolve_triangular(self.lower, rhs - self.upper @ u, lower=True)


def gauss_seidel_sweep(system: SparseSystem, u) -> np.ndarray:
    """One Gauss-Seidel sweep on the reduced system."""
    return GaussSeidelKernel(system.matrix).sweep(np.asarray(u, dtype=float), system.rhs)


class ExactOracleCorrector:
    """Solves the error equation exactly; the hybrid then converges at the
    first correction."""

    def correct(self, system: SparseSystem, residual, u):
        return spla.spsolve(system.matrix.tocsc(), residual)


class NeuralCorrector:
    """Correction by a trained linear-in-source surrogate.

    The residual load vector is converted to nodal function values (divide by
    the lumped node weights), normalized to unit L2, encoded at the fixed
    function nodes by interpolation on the reference mesh, and the predicted
    error field (homogeneous boundary) is scaled back.
    """

    def __init__(self, model: MIONetModel, dom, mesh: TriMesh, enc_domain,
                 fnodes, ref_mesh: TriMesh, n_rings: int):
        if not model.linear_flags[1]:
            raise ValueError("the hybrid corrector requires a linear source branch")
        self.model = model
        self.dom = dom
        self.mesh = mesh
        self.enc_domain = np.asarray(enc_domain, dtype=float)
        self.framework = model.meta["framework"]
        locator = DiskMeshLocator(ref_mesh, n_rings)
        # sparse interpolation: function-node values from nodal fields; the
        # deformed mesh shares node indexing with the reference mesh
        rows, cols, vals = [], [], []
        for j, x in enumerate(np.asarray(fnodes, dtype=float)):
            t, lam = locator.find(x)
            for v, w in zip(ref_mesh.triangles[t], lam):
                rows.append(j)
                cols.append(int(v))
                vals.append(float(w))
        self.interp = sp.csr_matrix((vals, (rows, cols)),
                                    shape=(len(fnodes), ref_mesh.n_nodes))
        if self.framework == "d2e":
            self.points = mesh.nodes
        else:
            self.points = pullback_closed(dom, mesh.nodes)

    def correct(self, system: SparseSystem, residual, u):
        rhat = np.zeros(self.mesh.n_nodes)
        rhat[system.interior] = residual / self.mesh.node_weights[system.interior]
        scale = float(np.sqrt(np.sum(self.mesh.node_weights * rhat ** 2)))
        if scale == 0.0:
            return np.zeros_like(residual)
        enc_f = (self.interp @ rhat) / scale
        e_full = scale * self.model.forward([self.enc_domain, enc_f], self.points)
        return e_full[system.interior]


@dataclass
class HIMResult:
    u: np.ndarray
    sweeps: int
    trace: Trace


def him_solve(system: SparseSystem, cfg: HIMConfig) -> HIMResult:
    """Sweep until the relative residual reaches the tolerance, applying the
    configured corrector every `period` sweeps (with rollback on failure)."""
    corrector = cfg.corrector
    if corrector == "exact_oracle":
        corrector = ExactOracleCorrector()
    elif corrector == "none":
        corrector = None

    kernel = GaussSeidelKernel(system.matrix)
    b = system.rhs
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        b_norm = 1.0
    u = np.zeros(system.n_unknowns)
    rel = 1.0
    trace = Trace()
    sweeps = 0
    period = cfg.period
    next_correction = period

    def residual_of(v):
        return float(np.linalg.norm(b - system.matrix @ v)) / b_norm

    while rel > cfg.residual_tolerance:
        if sweeps >= cfg.max_iterations:
            raise HIMError(f"no convergence within {cfg.max_iterations} sweeps "
                           f"(relative residual {rel:.3e})", trace)
        u = kernel.sweep(u, b)
        sweeps += 1
        r = b - system.matrix @ u
        rel = float(np.linalg.norm(r)) / b_norm
        trace.record(sweeps, rel, "sweep")
        if rel > 10.0:
            raise HIMError(f"divergence: relative residual grew to {rel:.3e}", trace)
        if rel <= cfg.residual_tolerance:
            break
        if corrector is not None and sweeps >= next_correction:
            # correction step: add the predicted error, smooth away the
            # injected high-frequency part, then accept or roll back; the
            # smoothing sweeps are spent either way
            u_saved, rel_before = u, rel
            u = u + corrector.correct(system, r, u)
            rel = residual_of(u)
            trace.record(sweeps, rel, "correction")
            for _ in range(cfg.correction_smoothing):
                if rel <= cfg.residual_tolerance:
                    break
                u = kernel.sweep(u, b)
                sweeps += 1
                rel = residual_of(u)
                trace.record(sweeps, rel, "sweep")
            if rel > cfg.safeguard * rel_before:
                u, rel = u_saved, rel_before
                trace.record(sweeps, rel, "rollback")
                period *= 2
            next_correction = sweeps + period
    return HIMResult(system.expand(u), sweeps, trace)


def gs_solve(system: SparseSystem, tolerance: float = 1e-8,
             max_iterations: int = 2_000_000) -> HIMResult:
    """Plain Gauss-Seidel: the hybrid loop with no corrector (bitwise the
    same iterate sequence)."""
    return him_solve(system, HIMConfig(period=10 ** 9, residual_tolerance=tolerance,
                                       max_iterations=max_iterations, corrector=None))


def him_report(runs: dict) -> dict:
    """Comparison table across solver runs: iterations, wall time, speedups
    relative to the first entry. Values may come from Trace objects or plain
    records with `iterations` and `time_s`."""
    if len(runs) < 2:
        raise ValueError("need at least two runs to compare")
    names = list(runs)
    rows = []
    for name in names:
        entry = runs[name]
        if isinstance(entry, HIMResult):
            rows.append({"method": name, "iterations": entry.sweeps, "time_s": None})
        else:
            iters = entry.get("iterations")
            if iters is None:
                raise ValueError(f"run {name!r} has no iteration count")
            rows.append({"method": name, "iterations": int(iters),
                         "time_s": entry.get("time_s")})
    base = rows[0]
    for row in rows:
        row["iteration_speedup"] = (base["iterations"] / row["iterations"]
                                    if row["iterations"] else None)
        if base.get("time_s") and row.get("time_s"):
            row["time_speedup"] = base["time_s"] / row["time_s"]
        else:
            row["time_speedup"] = None
    header = f"{'method':<16}{'iterations':>12}{'time (s)':>12}{'x iters':>10}{'x time':>10}"
    lines = [header, "-" * len(header)]
    for row in rows:
        time_s = f"{row['time_s']:.1f}" if row["time_s"] is not None else "-"
        xi = f"{row['iteration_speedup']:.2f}" if row["iteration_speedup"] else "-"
        xt = f"{row['time_speedup']:.2f}" if row["time_speedup"] else "-"
        lines.append(f"{row['method']:<16}{row['iterations']:>12}{time_s:>12}{xi:>10}{xt:>10}")
    return {"rows": rows, "text": "\n".join(lines), "json": json.dumps(rows, sort_keys=True)}
