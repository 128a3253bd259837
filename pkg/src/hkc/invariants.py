"""Randomized drift check: the total-disagreement functional must never have
positive expected drift, for any configuration, reference point, graph, or norm.

A failing case would contradict the supermartingale property of the dynamics
and therefore indicates an implementation defect; the runner shrinks any
failure to a minimal witness before reporting it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .analysis import generator_drift
from .dynamics import Configuration
from .graph import SocialGraph
from .space import Norm

DRIFT_TOLERANCE = 1e-9


@dataclass
class DriftCase:
    graph: SocialGraph
    config: Configuration
    tau: float
    norm: Norm
    c: tuple[float, ...]

    def drift(self) -> float:
        return generator_drift(self.config, self.graph, self.tau, self.norm, self.c)

    def describe(self) -> dict:
        return {
            "vertices": self.graph.vertex_count,
            "edges": list(self.graph.edges()),
            "opinions": self.config.opinions.tolist(),
            "tau": self.tau,
            "norm": self.norm.value,
            "c": list(self.c),
            "drift": self.drift(),
        }


def random_connected_graph(rng: random.Random, max_vertices: int = 20) -> SocialGraph:
    """Random attachment tree plus a few extra edges; connected by construction."""
    n = rng.randint(1, max_vertices)
    edges = {(rng.randrange(v), v) for v in range(1, n)}
    for _ in range(rng.randint(0, n)):
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return SocialGraph.from_edges(n, edges)


def _box_corners(lo: tuple[float, ...], hi: tuple[float, ...]) -> list[tuple[float, ...]]:
    corners = [()]
    for a, b in zip(lo, hi):
        corners = [c + (v,) for c in corners for v in (a, b)]
    return corners


def drift_case_batch(rng: random.Random, max_vertices: int = 20) -> list[DriftCase]:
    """One random (graph, configuration, tau, norm) with reference points at the
    corners of the opinions' bounding box plus 10 random points around it."""
    g = random_connected_graph(rng, max_vertices)
    dim = rng.choice((1, 2, 3))
    lo = tuple(rng.uniform(-2.0, 0.0) for _ in range(dim))
    hi = tuple(a + rng.uniform(0.2, 3.0) for a in lo)
    rows = [tuple(rng.uniform(a, b) for a, b in zip(lo, hi)) for _ in range(g.vertex_count)]
    config = Configuration.from_rows(rows)
    span = max(b - a for a, b in zip(lo, hi))
    tau = rng.uniform(0.05 * span, 2.0 * span)
    norm = rng.choice((Norm.L1, Norm.L2, Norm.LINF))
    points = _box_corners(lo, hi)
    width = tuple(b - a for a, b in zip(lo, hi))
    for _ in range(10):
        points.append(tuple(rng.uniform(a - w, b + w) for a, b, w in zip(lo, hi, width)))
    return [DriftCase(g, config, tau, norm, c) for c in points]


def shrink_case(case: DriftCase, tol: float = DRIFT_TOLERANCE) -> DriftCase:
    """Greedily drop vertices while the drift violation persists on a connected subgraph."""
    current = case
    changed = True
    while changed and current.graph.vertex_count > 1:
        changed = False
        n = current.graph.vertex_count
        for drop in range(n):
            keep = [v for v in range(n) if v != drop]
            relabel = {v: i for i, v in enumerate(keep)}
            edges = [
                (relabel[u], relabel[v])
                for u, v in current.graph.edges()
                if u != drop and v != drop
            ]
            try:
                sub = SocialGraph.from_edges(n - 1, edges)
            except ValueError:
                continue
            config = Configuration(current.config.opinions[keep])
            candidate = DriftCase(sub, config, current.tau, current.norm, current.c)
            if candidate.drift() > tol:
                current = candidate
                changed = True
                break
    return current


def run_drift_check(cases: int, seed: int, tol: float = DRIFT_TOLERANCE) -> dict:
    """Evaluate `cases` random batches; returns a summary with any shrunk failure."""
    if cases < 1:
        raise ValueError("cases must be >= 1")
    rng = random.Random(seed)
    max_drift = float("-inf")
    checked = 0
    for index in range(cases):
        for case in drift_case_batch(rng):
            value = case.drift()
            checked += 1
            if value > max_drift:
                max_drift = value
            if value > tol:
                failure = shrink_case(case, tol)
                return {
                    "cases": index + 1,
                    "points_checked": checked,
                    "max_drift": max_drift,
                    "tolerance": tol,
                    "status": "fail",
                    "failure": failure.describe(),
                }
    return {
        "cases": cases,
        "points_checked": checked,
        "max_drift": max_drift,
        "tolerance": tol,
        "status": "pass",
        "failure": None,
    }
