"""Verification suites: discretization convergence with measured rates, and
the metric axioms on random triples. Shared by the CLI `verify` command and
the test suite."""

from __future__ import annotations

import numpy as np

from . import geometry as geo
from .discretization import (
    CellPartition,
    FunctionEncoder,
    XSample,
    disk_equal_area_partition,
    disk_quadrature,
    project_domain,
    x_metric,
)


def _sup_boundary_gap(dom_a, dom_b, n=16384):
    th = np.arange(n) * (geo.TWO_PI / n)
    return float(np.max(np.abs(dom_a.radius_at_angles(th) - dom_b.radius_at_angles(th))))


def check_disk_projection_formula(tol: float = 1e-3) -> dict:
    """Measured distance between the disk and its decoded polygon must match
    1 - cos(pi/n)."""
    rows = []
    ok = True
    for n in (8, 16, 32):
        measured = geo.star_metric(geo.disk(1.0), project_domain(geo.disk(1.0), n),
                                   n_angles=16384)
        expected = 1.0 - np.cos(np.pi / n)
        rows.append({"n": n, "measured": measured, "expected": expected})
        ok &= abs(measured - expected) <= tol
    return {"name": "disk_projection_formula", "passed": bool(ok), "rows": rows,
            "tolerance": tol}


def check_domain_projection_rate(n_domains: int = 20, seed: int = 14,
                                 min_factor: float = 1.8) -> dict:
    """sup over a compact family of smooth star domains of the projection
    distance must shrink by at least min_factor per doubling of n."""
    rng = np.random.default_rng(seed)
    doms = [geo.random_star_domain(rng) for _ in range(n_domains)]
    sups = []
    for n in (16, 32, 64, 128):
        sups.append(max(_sup_boundary_gap(d, project_domain(d, n)) for d in doms))
    factors = [a / b for a, b in zip(sups, sups[1:])]
    return {"name": "domain_projection_rate", "passed": bool(all(f >= min_factor for f in factors)),
            "sup_distances": sups, "factors_per_doubling": factors,
            "min_factor": min_factor}


def check_function_projection_monotone(seed: int = 0) -> dict:
    """sup over a small family of smooth reference functions of the L2
    projection error must decrease monotonically over nested partitions."""
    quad = disk_quadrature(4096, seed=seed)
    fns = [
        lambda x: np.sin(np.pi * x[:, 0]),
        lambda x: np.cos(2.0 * x[:, 1]) * x[:, 0],
        lambda x: np.exp(-2.0 * np.sum(x * x, axis=1)),
    ]
    sups = []
    for n_r, n_s in [(2, 8), (4, 16), (8, 32), (16, 64)]:
        enc = FunctionEncoder("cell_average", quad=quad,
                              partition=disk_equal_area_partition(n_r, n_s))
        sups.append(max(quad.norm(f(quad.points) - enc.project(f)(quad.points))
                        for f in fns))
    ok = all(a > b for a, b in zip(sups, sups[1:]))
    return {"name": "function_projection_monotone", "passed": bool(ok),
            "sup_errors": sups, "cells": [16, 64, 256, 1024]}


def check_metric_axioms_domain(n_triples: int = 100, seed: int = 7,
                               slack: float = 1e-12) -> dict:
    rng = np.random.default_rng(seed)
    doms = [geo.random_star_domain(rng) for _ in range(12)]
    worst_sym, worst_tri = 0.0, 0.0
    for _ in range(n_triples):
        a, b, c = (doms[i] for i in rng.integers(0, len(doms), 3))
        dab, dba = geo.star_metric(a, b), geo.star_metric(b, a)
        worst_sym = max(worst_sym, abs(dab - dba))
        viol = dab - (geo.star_metric(a, c) + geo.star_metric(c, b))
        worst_tri = max(worst_tri, viol)
    passed = worst_sym == 0.0 and worst_tri <= slack
    return {"name": "metric_axioms_domain", "passed": bool(passed),
            "worst_symmetry_gap": worst_sym, "worst_triangle_violation": worst_tri,
            "slack": slack}


def check_metric_axioms_x(n_triples: int = 100, seed: int = 17,
                          slack: float = 1e-12) -> dict:
    quad = disk_quadrature(1024, seed=3)
    rng = np.random.default_rng(seed)
    doms = [geo.random_star_domain(rng) for _ in range(6)]

    def rand_fn(fn_seed):
        a, b, c, d = np.random.default_rng(fn_seed).uniform(-1.5, 1.5, 4)
        return lambda y: a * np.sin(b + 2 * y[:, 0]) + c * np.cos(d + 3 * y[:, 1])

    samples = [XSample(doms[i % len(doms)], rand_fn(i)) for i in range(12)]
    worst_sym, worst_tri = 0.0, 0.0
    for _ in range(n_triples):
        i, j, k = rng.integers(0, len(samples), 3)
        a, b, c = samples[i], samples[j], samples[k]
        dab, dba = x_metric(a, b, quad), x_metric(b, a, quad)
        worst_sym = max(worst_sym, abs(dab - dba))
        viol = dab - (x_metric(a, c, quad) + x_metric(c, b, quad))
        worst_tri = max(worst_tri, viol)
    passed = worst_sym <= slack and worst_tri <= slack
    return {"name": "metric_axioms_x", "passed": bool(passed),
            "worst_symmetry_gap": worst_sym, "worst_triangle_violation": worst_tri,
            "slack": slack}


def run_verification_suite() -> dict:
    checks = [
        check_disk_projection_formula(),
        check_domain_projection_rate(),
        check_function_projection_monotone(),
        check_metric_axioms_domain(),
        check_metric_axioms_x(),
    ]
    return {"checks": checks, "passed": bool(all(c["passed"] for c in checks))}
