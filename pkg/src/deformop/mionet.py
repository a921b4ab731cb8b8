"""Multi-branch operator network: one dense branch per input group (domain
encoding, each function encoding, optional boundary trace), a trunk over
coordinates, combined by summing the elementwise product of all branch and
trunk outputs. No output bias, so a bias-free linear source branch makes the
whole surrogate exactly linear in that input.

Two prediction paths share one trained surrogate:
* deformed-space (d2d): the surrogate acts on reference coordinates and a
  prediction composes it with the inverse deformation of the query domain;
* extended-space (d2e): the surrogate acts directly on physical coordinates
  inside a fixed bounding box and predictions restrict it to the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .container import read_container, write_container
from .geometry import deform_inverse
from .nets import DenseNet


@dataclass
class MIONetModel:
    branches: list
    trunk: DenseNet
    linear_flags: list
    p: int
    n_outputs: int = 1
    branch_shift: list = field(default_factory=list)
    branch_scale: list = field(default_factory=list)
    trunk_shift: Optional[np.ndarray] = None
    trunk_scale: Optional[np.ndarray] = None
    # power of two so that scaling and unscaling round-trip bitwise; a pure
    # multiplier keeps the surrogate exactly linear in linear branches
    output_scale: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for flag, net in zip(self.linear_flags, self.branches):
            if flag and not net.linear:
                raise ValueError("linearity flag requires a bias-free single-matrix branch")
        widths = {net.sizes[-1] for net in self.branches}
        widths.add(self.trunk.sizes[-1] // self.n_outputs)
        if widths != {self.p}:
            raise ValueError(f"branch/trunk output widths {widths} must all equal p={self.p}")

    # -- pieces ------------------------------------------------------------

    def params(self):
        out = []
        for net in self.branches:
            out.extend(net.params())
        out.extend(self.trunk.params())
        return out

    def normalize_branch(self, k, x):
        return (np.asarray(x, dtype=float) - self.branch_shift[k]) / self.branch_scale[k]

    def normalize_points(self, pts):
        return (np.asarray(pts, dtype=float) - self.trunk_shift) / self.trunk_scale

    def branch_inputs(self, encodings) -> list:
        """Stack encoding vectors (or batches) into normalized branch inputs."""
        vecs = encodings.vectors() if hasattr(encodings, "vectors") else list(encodings)
        if len(vecs) != len(self.branches):
            raise ValueError(f"expected {len(self.branches)} encoding groups, got {len(vecs)}")
        out = []
        for k, (v, net) in enumerate(zip(vecs, self.branches)):
            v = np.atleast_2d(np.asarray(v, dtype=float))
            if v.shape[1] != net.sizes[0]:
                raise ValueError(f"branch {k} expects width {net.sizes[0]}, got {v.shape[1]}")
            out.append(self.normalize_branch(k, v))
        return out

    def branch_coeffs(self, encodings, with_cache=False):
        """Elementwise product of all branch outputs, shape (n, p)."""
        xs = self.branch_inputs(encodings)
        outs, caches = [], []
        for net, x in zip(self.branches, xs):
            o, c = net.forward(x)
            outs.append(o)
            caches.append(c)
        coeffs = outs[0].copy()
        for o in outs[1:]:
            coeffs *= o
        if with_cache:
            return coeffs, outs, caches
        return coeffs

    def trunk_out(self, pts, with_cache=False):
        out, cache = self.trunk.forward(self.normalize_points(np.atleast_2d(pts)))
        return (out, cache) if with_cache else out

    # -- evaluation --------------------------------------------------------

    def forward(self, encodings, y):
        """Surrogate output at coordinates y (reference coordinates for the
        deformed-space path, physical for the extended path): sum over the
        latent index of branch-product times trunk."""
        coeffs = self.branch_coeffs(encodings)
        if coeffs.shape[0] != 1:
            raise ValueError("forward evaluates one combined encoding; use the "
                             "training utilities for batches")
        y = np.asarray(y, dtype=float)
        single = y.ndim == 1
        t = self.trunk_out(np.atleast_2d(y))
        if self.n_outputs == 1:
            vals = self.output_scale * (t @ coeffs[0])
            return float(vals[0]) if single else vals
        t = t.reshape(len(t), self.n_outputs, self.p)
        vals = self.output_scale * np.einsum("qoj,j->qo", t, coeffs[0])
        return vals[0] if single else vals

    def predict_d2e(self, encodings, query):
        """Extended-space prediction: direct trunk evaluation at physical
        coordinates; queries must lie inside the model's bounding box."""
        query = np.atleast_2d(np.asarray(query, dtype=float))
        box = np.asarray(self.meta["vbox"], dtype=float)
        if np.any(query < box[:, 0]) or np.any(query > box[:, 1]):
            raise ValueError("query points fall outside the extension box")
        return self.forward(encodings, query)

    def predict_d2d(self, dom, encodings, query):
        """Deformed-space prediction: pull queries back through the inverse
        deformation (queries must lie strictly inside the domain)."""
        query = np.atleast_2d(np.asarray(query, dtype=float))
        return self.forward(encodings, deform_inverse(dom, query))

    # -- persistence -------------------------------------------------------

    def save(self, path):
        header = {
            "kind": "model",
            "version": 1,
            "p": self.p,
            "n_outputs": self.n_outputs,
            "linear_flags": [bool(f) for f in self.linear_flags],
            "branch_sizes": [net.sizes for net in self.branches],
            "trunk_sizes": self.trunk.sizes,
            "output_scale": self.output_scale,
            "meta": self.meta,
        }
        arrays = {}
        for k, net in enumerate(self.branches):
            for l, w in enumerate(net.weights):
                arrays[f"branch{k}/W{l}"] = w
                if net.biases[l] is not None:
                    arrays[f"branch{k}/b{l}"] = net.biases[l]
            arrays[f"norm/branch{k}_shift"] = self.branch_shift[k]
            arrays[f"norm/branch{k}_scale"] = self.branch_scale[k]
        for l, w in enumerate(self.trunk.weights):
            arrays[f"trunk/W{l}"] = w
            arrays[f"trunk/b{l}"] = self.trunk.biases[l]
        arrays["norm/trunk_shift"] = self.trunk_shift
        arrays["norm/trunk_scale"] = self.trunk_scale
        write_container(path, header, arrays)

    @classmethod
    def load(cls, path):
        header, arrays = read_container(path)
        if header.get("kind") != "model":
            raise ValueError(f"{path} is not a model container")
        branches, shifts, scales = [], [], []
        for k, (sizes, flag) in enumerate(zip(header["branch_sizes"], header["linear_flags"])):
            n_layers = len(sizes) - 1
            weights = [np.array(arrays[f"branch{k}/W{l}"]) for l in range(n_layers)]
            biases = [np.array(arrays[f"branch{k}/b{l}"]) if f"branch{k}/b{l}" in arrays else None
                      for l in range(n_layers)]
            branches.append(DenseNet(weights, biases, linear=flag))
            shifts.append(np.array(arrays[f"norm/branch{k}_shift"]))
            scales.append(np.array(arrays[f"norm/branch{k}_scale"]))
        n_tl = len(header["trunk_sizes"]) - 1
        trunk = DenseNet([np.array(arrays[f"trunk/W{l}"]) for l in range(n_tl)],
                         [np.array(arrays[f"trunk/b{l}"]) for l in range(n_tl)])
        return cls(branches=branches, trunk=trunk,
                   linear_flags=list(header["linear_flags"]),
                   p=header["p"], n_outputs=header["n_outputs"],
                   branch_shift=shifts, branch_scale=scales,
                   trunk_shift=np.array(arrays["norm/trunk_shift"]),
                   trunk_scale=np.array(arrays["norm/trunk_scale"]),
                   output_scale=float(header.get("output_scale", 1.0)),
                   meta=header["meta"])


def mionet_forward(model: MIONetModel, encodings, y):
    return model.forward(encodings, y)
