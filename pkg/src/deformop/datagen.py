"""Dataset generation: draw a domain, draw Gaussian-process inputs jointly at
the encoder pullback points and the mesh nodes (so encodings and FEM data are
exactly consistent), solve the Poisson problem, and store everything in one
self-describing container file.

All randomness flows from a single master seed through per-sample
SeedSequence children, so generation is deterministic and embarrassingly
parallel across samples.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from . import meshing as msh
from .container import config_hash, read_container, write_container
from .discretization import (
    direction_angles_2d,
    disk_nodes_fibonacci,
    disk_nodes_uniform,
    local_nodes_uniform,
)
from .fem import assemble_poisson, solve_sparse
from .gp import MAX_GP_POINTS, GPSpec, gp_sample

log = logging.getLogger(__name__)

FAMILIES = ("star", "polygon", "local")

# query-validity boxes for the extended (D2E) prediction path
VBOX = {
    "star": [[-1.0, 1.0], [-1.0, 1.0]],
    "polygon": [[-1.0, 1.0], [-1.0, 1.0]],
    "local": [[-0.5, 1.5], [-0.5, 1.8]],
}


@dataclass(frozen=True)
class DataConfig:
    family: str = "star"
    n_samples: int = 100
    seed: int = 0
    n_radii: int = 64
    n_fnodes: int = 320
    node_scheme: str = "uniform"
    node_seed: int = 0
    mesh_rings: int = 8
    local_h: float = 0.05
    gp: GPSpec = field(default_factory=GPSpec)
    with_k: bool = False
    with_g: bool = False
    n_bnodes: int = 64

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.node_scheme not in ("uniform", "fibonacci"):
            raise ValueError(f"unknown node scheme {self.node_scheme!r}")
        if self.n_samples < 0:
            raise ValueError("n_samples must be nonnegative")

    def encoder_dict(self) -> dict:
        return {
            "family": self.family,
            "n_radii": self.n_radii,
            "n_fnodes": self.n_fnodes,
            "node_scheme": self.node_scheme,
            "node_seed": self.node_seed,
            "with_k": self.with_k,
            "with_g": self.with_g,
            "n_bnodes": self.n_bnodes if self.with_g else 0,
        }


def function_nodes(cfg: DataConfig) -> np.ndarray:
    if cfg.family == "local":
        return local_nodes_uniform(cfg.n_fnodes, cfg.node_seed)
    if cfg.node_scheme == "fibonacci":
        return disk_nodes_fibonacci(cfg.n_fnodes)
    return disk_nodes_uniform(cfg.n_fnodes, cfg.node_seed)


def reference_mesh(cfg: DataConfig) -> msh.TriMesh:
    if cfg.family == "local":
        return msh.local_reference_mesh(cfg.local_h)
    return msh.disk_mesh_by_rings(cfg.mesh_rings)


def encoder_fingerprint(cfg: DataConfig, fnodes: np.ndarray, bangles) -> str:
    payload = cfg.encoder_dict()
    payload["fnodes_hash"] = config_hash(np.round(fnodes, 15).tolist())
    if bangles is not None:
        payload["bangles_hash"] = config_hash(np.round(bangles, 15).tolist())
    return config_hash(payload)


@dataclass
class SampleRecord:
    dom: object
    enc_vectors: list
    mesh: msh.TriMesh
    u: np.ndarray
    f_mesh: np.ndarray
    k_mesh: np.ndarray
    g_boundary: np.ndarray
    node_map: Optional[np.ndarray]


class Dataset:
    """Read-side view of a generated dataset container."""

    def __init__(self, header: dict, arrays: dict):
        self.header = header
        self.arrays = arrays

    # -- construction ------------------------------------------------------

    @classmethod
    def load(cls, path) -> "Dataset":
        header, arrays = read_container(path)
        if header.get("kind") != "dataset":
            raise ValueError(f"{path} is not a dataset container")
        return cls(header, arrays)

    def save(self, path) -> None:
        write_container(path, self.header, self.arrays)

    # -- accessors ---------------------------------------------------------

    @property
    def family(self) -> str:
        return self.header["family"]

    @property
    def n_samples(self) -> int:
        return int(self.header["n_generated"])

    @property
    def encoder_hash(self) -> str:
        return self.header["encoder_hash"]

    @property
    def fnodes(self) -> np.ndarray:
        return self.arrays["fnodes"]

    @property
    def vbox(self) -> np.ndarray:
        return np.asarray(self.header["vbox"], dtype=float)

    def ref_mesh(self) -> msh.TriMesh:
        a = self.arrays
        return msh.TriMesh(a["ref_nodes"], a["ref_triangles"].astype(np.int64),
                           a["ref_boundary"].astype(np.int64), a["ref_weights"])

    def domain(self, i: int):
        tag = f"s{i:05d}/"
        raw = self.arrays[tag + "domain"]
        if self.family == "star":
            return geo.star_from_samples(raw)
        if self.family == "polygon":
            return geo.polygon_to_star(geo.PolygonDomain(raw))
        return geo.LocalDomain(float(raw[0]))

    def sample(self, i: int) -> SampleRecord:
        if not (0 <= i < self.n_samples):
            raise IndexError(f"sample index {i} out of range")
        tag = f"s{i:05d}/"
        a = self.arrays
        enc_vectors = [a[tag + "enc_domain"], a[tag + "enc_f"]]
        if self.header["encoder"]["with_k"]:
            enc_vectors.append(a[tag + "enc_k"])
        if self.header["encoder"]["with_g"]:
            enc_vectors.append(a[tag + "enc_g"])
        if self.family == "local":
            mesh = msh.TriMesh(a[tag + "nodes"], a[tag + "triangles"].astype(np.int64),
                               a[tag + "boundary"].astype(np.int64), a[tag + "weights"])
            node_map = a[tag + "node_map"].astype(np.int64)
        else:
            ref = self.ref_mesh()
            mesh = msh.TriMesh(a[tag + "nodes"], ref.triangles, ref.boundary_nodes,
                               a[tag + "weights"])
            node_map = None
        return SampleRecord(
            dom=self.domain(i),
            enc_vectors=enc_vectors,
            mesh=mesh,
            u=a[tag + "u"],
            f_mesh=a[tag + "f"],
            k_mesh=a[tag + "k"] if self.header["encoder"]["with_k"] else np.ones(mesh.n_nodes),
            g_boundary=(a[tag + "g"] if self.header["encoder"]["with_g"]
                        else np.zeros(len(mesh.boundary_nodes))),
            node_map=node_map,
        )


def _draw_domain(cfg: DataConfig, rng):
    if cfg.family == "star":
        dom = geo.random_star_domain(rng)
        raw = dom.radius_at_angles(np.arange(geo.BOUNDARY_SAMPLE_COUNT)
                                   * (geo.TWO_PI / geo.BOUNDARY_SAMPLE_COUNT))
        return dom, raw
    if cfg.family == "polygon":
        poly = geo.random_polygon(rng)
        verts = poly.vertices - poly.centroid()
        return geo.polygon_to_star(geo.PolygonDomain(verts)), verts
    a = float(rng.uniform(*geo.LOCAL_OFFSET_RANGE))
    return geo.LocalDomain(a), np.array([a])


def _generate_sample(cfg: DataConfig, ref: msh.TriMesh, fnodes, bangles, rng):
    dom, dom_raw = _draw_domain(cfg, rng)

    if cfg.family == "local":
        mesh = msh.local_domain_mesh(dom, cfg.local_h)
        node_map = msh.local_node_map(ref, dom, mesh, cfg.local_h)
        pullback = geo.local_deform(dom, fnodes)
        enc_domain = dom_raw
    else:
        mesh = msh.deform_mesh(ref, dom)
        node_map = None
        pullback = geo.star_deform(dom, fnodes)
        enc_domain = dom.radius_at_angles(direction_angles_2d(cfg.n_radii))

    m = len(fnodes)
    pts = np.concatenate([pullback, mesh.nodes])
    f_all = gp_sample(cfg.gp, pts, rng)
    enc_f, f_mesh = f_all[:m], f_all[m:]

    record = {
        "domain": dom_raw,
        "enc_domain": enc_domain,
        "enc_f": enc_f,
        "nodes": mesh.nodes,
        "weights": mesh.node_weights,
        "f": f_mesh,
    }

    if cfg.with_k:
        k_all = 1.0 + 0.5 * np.tanh(gp_sample(cfg.gp, pts, rng))
        enc_k, k_mesh = k_all[:m], k_all[m:]
        record["enc_k"] = enc_k
        record["k"] = k_mesh
    else:
        k_mesh = np.ones(mesh.n_nodes)

    if cfg.with_g:
        if cfg.family == "local":
            raise ValueError("boundary-data sampling is implemented for star families")
        bpts = geo.star_boundary_points(dom, bangles)
        bmesh = mesh.nodes[mesh.boundary_nodes]
        g_all = gp_sample(cfg.gp, np.concatenate([bpts, bmesh]), rng)
        enc_g, g_boundary = g_all[:len(bangles)], g_all[len(bangles):]
        record["enc_g"] = enc_g
        record["g"] = g_boundary
    else:
        g_boundary = np.zeros(len(mesh.boundary_nodes))

    system = assemble_poisson(mesh, k_mesh, f_mesh, g_boundary)
    record["u"] = solve_sparse(system)

    if cfg.family == "local":
        record["triangles"] = mesh.triangles
        record["boundary"] = mesh.boundary_nodes
        record["node_map"] = node_map
    return record


def generate_dataset(cfg: DataConfig, threads: int = 1) -> Dataset:
    """Generate cfg.n_samples records; failed samples are logged and recorded
    in the header, and the dataset is fully determined by the config."""
    fnodes = function_nodes(cfg)
    ref = reference_mesh(cfg)
    bangles = (np.arange(cfg.n_bnodes) * (geo.TWO_PI / cfg.n_bnodes)
               if cfg.with_g else None)
    n_joint = cfg.n_fnodes + ref.n_nodes + 64  # local meshes vary a little
    if n_joint > MAX_GP_POINTS:
        raise ValueError(f"encoder nodes + mesh nodes = {n_joint} exceeds the "
                         f"GP sampling cap of {MAX_GP_POINTS}")

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_samples)

    def run(i):
        rng = np.random.default_rng(children[i])
        try:
            return i, _generate_sample(cfg, ref, fnodes, bangles, rng), None
        except Exception as exc:  # recorded, sample skipped
            return i, None, f"{type(exc).__name__}: {exc}"

    if threads > 1 and cfg.n_samples > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(cfg.n_samples)))
    else:
        results = [run(i) for i in range(cfg.n_samples)]

    arrays = {
        "fnodes": fnodes,
        "ref_nodes": ref.nodes,
        "ref_triangles": ref.triangles,
        "ref_boundary": ref.boundary_nodes,
        "ref_weights": ref.node_weights,
    }
    if bangles is not None:
        arrays["bangles"] = bangles

    failures = []
    kept = 0
    for i, record, error in results:
        if record is None:
            log.warning("sample %d failed: %s", i, error)
            failures.append({"index": i, "error": error})
            continue
        tag = f"s{kept:05d}/"
        for name, arr in record.items():
            arrays[tag + name] = arr
        kept += 1

    header = {
        "kind": "dataset",
        "version": 1,
        "family": cfg.family,
        "n_requested": cfg.n_samples,
        "n_generated": kept,
        "failures": failures,
        "seed": cfg.seed,
        "encoder": cfg.encoder_dict(),
        "gp": {"variance": cfg.gp.variance, "length_scale": cfg.gp.length_scale,
               "mean": cfg.gp.mean},
        "mesh": ({"local_h": cfg.local_h} if cfg.family == "local"
                 else {"rings": cfg.mesh_rings}),
        "vbox": VBOX[cfg.family],
        "encoder_hash": encoder_fingerprint(cfg, fnodes, bangles),
    }
    return Dataset(header, arrays)
