"""Training for the operator surrogate under the two loss routes, evaluation
by per-sample relative L2 error, and finite-difference gradient checking of
the hand-written backpropagation.

Deformed-space route (d2d): the surrogate is fit against pulled-back solution
values at the fixed reference mesh nodes, with reference node weights as the
loss quadrature. Extended-space route (d2e): the surrogate is fit at each
sample's own deformed mesh nodes with that sample's node weights. Both are
full-batch Adam with a fixed iteration count, so retraining from a recorded
config reproduces the weights bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .datagen import Dataset
from .geometry import LocalDomain, StarDomain, local_deform_inverse
from .mionet import MIONetModel
from .nets import Adam, DenseNet

log = logging.getLogger(__name__)

FRAMEWORKS = ("d2d", "d2e")


@dataclass(frozen=True)
class ModelConfig:
    p: int = 128
    branch_hidden: tuple = (128, 128, 128)
    trunk_hidden: tuple = (128, 128, 128)
    linear_branches: tuple = (1,)
    n_outputs: int = 1


@dataclass(frozen=True)
class TrainConfig:
    framework: str = "d2e"
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    iterations: int = 2000
    # piecewise-constant decay: lr * lr_decay every lr_decay_every iterations
    lr_decay: float = 1.0
    lr_decay_every: int = 0
    seed: int = 0
    log_every: int = 200

    def __post_init__(self):
        if self.framework not in FRAMEWORKS:
            raise ValueError(f"framework must be one of {FRAMEWORKS}")

    def lr_at(self, iteration: int) -> float:
        if self.lr_decay == 1.0 or self.lr_decay_every <= 0:
            return self.learning_rate
        return self.learning_rate * self.lr_decay ** (iteration // self.lr_decay_every)


def pullback_closed(dom, pts):
    """Inverse deformation extended to the domain closure (mesh nodes include
    the boundary)."""
    if isinstance(dom, StarDomain):
        v = np.atleast_2d(pts) - dom.centroid
        r = np.linalg.norm(v, axis=1)
        out = np.zeros_like(v)
        nz = r > 0
        out[nz] = v[nz] / dom.radius_at_dirs(v[nz] / r[nz, None])[:, None]
        return out
    if isinstance(dom, LocalDomain):
        return local_deform_inverse(dom, pts)
    raise ValueError(f"unsupported domain type {type(dom).__name__}")


def build_model(dataset: Dataset, mcfg: ModelConfig, framework: str, seed: int) -> MIONetModel:
    """Architecture and input normalization from the dataset: per-feature
    standardization on the training split, scale-only (no shift) for linear
    branches so they stay linear maps of their encoding."""
    if dataset.n_samples == 0:
        raise ValueError("cannot build a model from an empty dataset")
    rng = np.random.default_rng(seed)
    mats = branch_matrices(dataset)
    branches, shifts, scales = [], [], []
    for k, mat in enumerate(mats):
        width = mat.shape[1]
        linear = k in mcfg.linear_branches
        if linear:
            # no shift (would break linearity); RMS keeps inputs O(1) even for
            # features with tiny variance but large mean
            net = DenseNet.create([width, mcfg.p], rng, linear=True)
            shift = np.zeros(width)
            rms = np.sqrt(np.mean(mat * mat, axis=0))
            scale = np.maximum(rms, max(1e-12, 1e-3 * float(rms.max(initial=0.0))))
        else:
            net = DenseNet.create([width, *mcfg.branch_hidden, mcfg.p], rng)
            shift = mat.mean(axis=0)
            std = mat.std(axis=0)
            # centred features are at most std, so this floor never amplifies
            scale = np.maximum(std, max(1e-12, 1e-3 * float(std.max(initial=0.0))))
        branches.append(net)
        shifts.append(shift)
        scales.append(scale)
    trunk = DenseNet.create([2, *mcfg.trunk_hidden, mcfg.p * mcfg.n_outputs], rng)
    if framework == "d2e":
        box = dataset.vbox
        t_shift = box.mean(axis=1)
        t_scale = 0.5 * (box[:, 1] - box[:, 0])
    else:
        t_shift, t_scale = np.zeros(2), np.ones(2)
    # output scale: nearest power of two to the target spread, so the nets fit
    # O(1) values and un/scaling round-trips bitwise
    spread = float(np.std(np.concatenate([dataset.sample(i).u
                                          for i in range(dataset.n_samples)])))
    out_scale = 2.0 ** round(np.log2(spread)) if spread > 0 else 1.0
    meta = {
        "framework": framework,
        "family": dataset.family,
        "encoder_hash": dataset.encoder_hash,
        "vbox": dataset.vbox.tolist(),
        "p": mcfg.p,
        "branch_hidden": list(mcfg.branch_hidden),
        "trunk_hidden": list(mcfg.trunk_hidden),
        "linear_branches": list(mcfg.linear_branches),
        "init_seed": seed,
    }
    return MIONetModel(branches=branches, trunk=trunk,
                       linear_flags=[k in mcfg.linear_branches for k in range(len(mats))],
                       p=mcfg.p, n_outputs=mcfg.n_outputs,
                       branch_shift=shifts, branch_scale=scales,
                       trunk_shift=t_shift, trunk_scale=t_scale,
                       output_scale=out_scale, meta=meta)


def branch_matrices(dataset: Dataset) -> list:
    n = dataset.n_samples
    first = dataset.sample(0).enc_vectors
    mats = [np.empty((n, len(v))) for v in first]
    for i in range(n):
        for k, v in enumerate(dataset.sample(i).enc_vectors):
            mats[k][i] = v
    return mats


@dataclass
class TrainResult:
    model: MIONetModel
    loss_history: np.ndarray
    framework: str


def _d2d_design(dataset: Dataset):
    ref = dataset.ref_mesh()
    n = dataset.n_samples
    targets = np.empty((n, ref.n_nodes))
    for i in range(n):
        rec = dataset.sample(i)
        targets[i] = rec.u if rec.node_map is None else rec.u[rec.node_map]
    return ref.nodes, ref.node_weights, targets


def _d2e_design(dataset: Dataset):
    pts, wts, tgt, counts = [], [], [], []
    for i in range(dataset.n_samples):
        rec = dataset.sample(i)
        pts.append(rec.mesh.nodes)
        wts.append(rec.mesh.node_weights)
        tgt.append(rec.u)
        counts.append(rec.mesh.n_nodes)
    counts = np.asarray(counts)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    sample_of = np.repeat(np.arange(dataset.n_samples), counts)
    return (np.concatenate(pts), np.concatenate(wts), np.concatenate(tgt),
            offsets, sample_of)


def _branch_grads(model, bouts, bcaches, d_coeffs):
    """Backpropagate d(loss)/d(coeffs) through the branch product."""
    grads = []
    for k, (net, cache) in enumerate(zip(model.branches, bcaches)):
        other = None
        for l, o in enumerate(bouts):
            if l == k:
                continue
            other = o.copy() if other is None else other * o
        d_k = d_coeffs if other is None else d_coeffs * other
        g, _ = net.backward(cache, d_k)
        grads.extend(g)
    return grads


def train(model: MIONetModel, dataset: Dataset, cfg: TrainConfig) -> TrainResult:
    """Full-batch Adam on the configured loss; aborts on a non-finite loss."""
    if model.n_outputs != 1:
        raise NotImplementedError("training is implemented for single-output problems")
    if model.meta.get("encoder_hash") != dataset.encoder_hash:
        raise ValueError("model/dataset encoder configurations do not match")
    n = dataset.n_samples
    mats = branch_matrices(dataset)
    scale = model.output_scale
    if cfg.framework == "d2d":
        points, weights, targets = _d2d_design(dataset)
        targets = targets / scale
    else:
        flat_pts, flat_w, flat_t, offsets, sample_of = _d2e_design(dataset)
        points = flat_pts
        flat_t = flat_t / scale
    pts_norm = model.normalize_points(points)

    opt = Adam(model.params(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    history = np.empty(cfg.iterations)

    for it in range(cfg.iterations):
        coeffs, bouts, bcaches = model.branch_coeffs(mats, with_cache=True)
        t_out, t_cache = model.trunk.forward(pts_norm)
        if cfg.framework == "d2d":
            pred = coeffs @ t_out.T
            diff = pred - targets
            loss = float(np.sum(weights * diff * diff)) / n
            d_pred = (2.0 / n) * weights * diff
            d_coeffs = d_pred @ t_out
            d_trunk = d_pred.T @ coeffs
        else:
            c_exp = coeffs[sample_of]
            pred = np.einsum("mp,mp->m", c_exp, t_out)
            diff = pred - flat_t
            loss = float(np.sum(flat_w * diff * diff)) / n
            d_pred = (2.0 / n) * flat_w * diff
            d_trunk = d_pred[:, None] * c_exp
            d_coeffs = np.add.reduceat(d_pred[:, None] * t_out, offsets, axis=0)
        if not np.isfinite(loss):
            raise RuntimeError(f"non-finite loss at iteration {it}: {loss}; "
                               f"last finite loss {history[max(0, it - 1)]:.3e}")
        history[it] = loss * scale * scale  # report in physical units

        grads = _branch_grads(model, bouts, bcaches, d_coeffs)
        g_t, _ = model.trunk.backward(t_cache, d_trunk)
        grads.extend(g_t)
        opt.lr = cfg.lr_at(it)
        opt.step(grads)
        if cfg.log_every and it % cfg.log_every == 0:
            log.info("iter %6d  %s loss %.6e", it, cfg.framework, loss)
    model.meta["trained"] = {"framework": cfg.framework, "iterations": cfg.iterations,
                             "learning_rate": cfg.learning_rate, "seed": cfg.seed}
    return TrainResult(model, history, cfg.framework)


def predict_design(model: MIONetModel, dataset: Dataset, framework: str) -> list:
    """Batched per-sample predictions at the training quadrature nodes, using
    the same operations as the training loop (bitwise-consistent with it)."""
    mats = branch_matrices(dataset)
    coeffs = model.branch_coeffs(mats)
    scale = model.output_scale
    if framework == "d2d":
        points, _, _ = _d2d_design(dataset)
        t = model.trunk.forward(model.normalize_points(points))[0]
        pred = coeffs @ t.T
        return [scale * pred[i] for i in range(dataset.n_samples)]
    flat_pts, _, _, offsets, sample_of = _d2e_design(dataset)
    t = model.trunk.forward(model.normalize_points(flat_pts))[0]
    pred = np.einsum("mp,mp->m", coeffs[sample_of], t)
    ends = np.concatenate([offsets[1:], [len(pred)]])
    return [scale * pred[s:e] for s, e in zip(offsets, ends)]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def predict_on_mesh(model: MIONetModel, rec, framework: str) -> np.ndarray:
    """Predicted solution values at every mesh node of a sample record."""
    if framework == "d2e":
        return model.forward(rec.enc_vectors, rec.mesh.nodes)
    ref_pts = pullback_closed(rec.dom, rec.mesh.nodes)
    return model.forward(rec.enc_vectors, ref_pts)


def evaluate(model: MIONetModel, dataset: Dataset, framework: Optional[str] = None) -> dict:
    """Per-sample relative L2 errors by mesh-node quadrature, with aggregate
    statistics."""
    framework = framework or model.meta["framework"]
    if dataset.n_samples == 0:
        raise ValueError("cannot evaluate on an empty split")
    if model.meta.get("encoder_hash") != dataset.encoder_hash:
        raise ValueError("model/dataset encoder configurations do not match")
    errors = []
    for i in range(dataset.n_samples):
        rec = dataset.sample(i)
        pred = predict_on_mesh(model, rec, framework)
        w = rec.mesh.node_weights
        num = np.sqrt(np.sum(w * (pred - rec.u) ** 2))
        den = np.sqrt(np.sum(w * rec.u ** 2))
        errors.append(float(num / den) if den > 0 else float(num))
    errors = np.array(errors)
    return {
        "framework": framework,
        "n_samples": int(dataset.n_samples),
        "per_sample": errors.tolist(),
        "mean": float(errors.mean()),
        "median": float(np.median(errors)),
        "max": float(errors.max()),
    }


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------


def _point_loss_grads(model: MIONetModel, encodings, y, target, weight):
    coeffs, bouts, bcaches = model.branch_coeffs(encodings, with_cache=True)
    t_out, t_cache = model.trunk.forward(model.normalize_points(np.atleast_2d(y)))
    pred = model.output_scale * float(np.einsum("p,p->", coeffs[0], t_out[0]))
    d_base = 2.0 * weight * (pred - target) * model.output_scale
    grads = _branch_grads(model, bouts, bcaches, d_base * t_out)
    g_t, _ = model.trunk.backward(t_cache, d_base * coeffs)
    grads.extend(g_t)
    loss = weight * (pred - target) ** 2
    return loss, grads


def grad_check(model: MIONetModel, encodings, y, target: float = 0.0,
               weight: float = 1.0, n_checks: int = 30, step: float = 1e-5,
               seed: int = 0) -> float:
    """Max relative discrepancy between analytic parameter gradients of the
    per-point squared loss and central finite differences.

    Discrepancies are measured relative to the gradient's overall scale so
    finite-difference roundoff on negligible entries does not dominate.
    """
    params = model.params()
    _, grads = _point_loss_grads(model, encodings, y, target, weight)
    gmax = max(max(float(np.max(np.abs(g))) for g in grads), 1e-12)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_checks):
        k = int(rng.integers(len(params)))
        flat = int(rng.integers(params[k].size))
        idx = np.unravel_index(flat, params[k].shape)
        orig = params[k][idx]
        params[k][idx] = orig + step
        up, _ = _point_loss_grads(model, encodings, y, target, weight)
        params[k][idx] = orig - step
        dn, _ = _point_loss_grads(model, encodings, y, target, weight)
        params[k][idx] = orig
        fd = (up - dn) / (2.0 * step)
        a = float(grads[k][idx])
        denom = max(abs(a), abs(fd), 1e-3 * gmax, 1e-12)
        worst = max(worst, abs(a - fd) / denom)
    return worst
