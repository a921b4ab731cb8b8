"""Gaussian-process sampling of random input fields: squared-exponential
kernel, dense Cholesky factorization with jitter escalation, deterministic
given the seed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

MAX_GP_POINTS = 5000


@dataclass(frozen=True)
class GPSpec:
    variance: float = 1.0
    length_scale: float = 0.25
    mean: float = 0.0

    def __post_init__(self):
        if self.variance <= 0 or self.length_scale <= 0:
            raise ValueError("variance and length_scale must be positive")


def gp_covariance(spec: GPSpec, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d2 = cdist(pts, pts, "sqeuclidean")
    return spec.variance * np.exp(-d2 / (2.0 * spec.length_scale ** 2))


def gp_sample(spec: GPSpec, points, seed) -> np.ndarray:
    """One draw of the field at the given points.

    ``seed`` may be an int or a numpy Generator; dense factorization caps the
    point count at 5000. Jitter starts at 1e-10 and escalates by 100x up to
    1e-6 before failing.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if n > MAX_GP_POINTS:
        raise ValueError(f"gp_sample is dense; {n} points exceeds the cap of {MAX_GP_POINTS}")
    cov = gp_covariance(spec, pts)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal(n)
    jitter = 1e-10
    while True:
        try:
            chol = np.linalg.cholesky(cov + jitter * spec.variance * np.eye(n))
            break
        except np.linalg.LinAlgError:
            jitter *= 100.0
            if jitter > 1e-6:
                raise RuntimeError("GP covariance failed to factorize after jitter escalation")
    return spec.mean + chol @ z
