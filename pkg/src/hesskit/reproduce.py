"""Closed-form Hessians for the textbook two-, three- and four-agent cases.

Each case evaluates a hand-written closed form and the engine's assembly at
a set of parameter samples and reports the worst entrywise deviation. The
closed forms are written out directly here and do not call the engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from hesskit.graph import build_graph
from hesskit.hessian import hessian_edge_general, hessian_total, hessian_z4_direct
from hesskit.kinematics import Configuration
from hesskit.potentials import AreaTerm, CollisionZ4, PotentialSpec, QuarticDistanceSquared, uniform_spec
from hesskit.sampling import random_configuration, random_graph

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass
class CaseResult:
    case: str
    params: list[dict]
    deviations: list[float]

    @property
    def max_deviation(self) -> float:
        return max(self.deviations, default=0.0)


def _samples(lo, hi, count: int, seed: int | None) -> np.ndarray:
    """Deterministic Halton points unless a seed is given."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    if seed is None:
        u = qmc.Halton(len(lo), scramble=False).random(count + 1)[1:]
    else:
        u = np.random.default_rng(seed).random((count, len(lo)))
    return lo + u * (hi - lo)


# --- two agents, one pinned ------------------------------------------------

def pinned_pair_closed_form(x, y, d):
    e = x * x + y * y - d * d
    return np.array([[2 * x * x + e, 2 * x * y], [2 * x * y, 2 * y * y + e]])


def pinned_pair_engine(x, y, d):
    spec = uniform_spec(build_graph(2, [(1, 2)]), QuarticDistanceSquared(d), 2)
    c = Configuration(np.array([[0.0, 0.0], [x, y]]), frozenset({1}))
    return hessian_total(spec, c)


# --- three agents, two pinned, one area term --------------------------------

def pinned_triple_closed_form(a, d, K, x, y):
    return np.array([
        [6 * x * x + 6 * a * a + 2 * y * y - 2 * d * d, 4 * x * y],
        [4 * x * y, 2 * x * x + 2 * a * a + 6 * y * y - 2 * d * d + K * a * a],
    ])


def pinned_triple_spec(a, d, K, x, y, S_star=0.0):
    g = build_graph(3, [(3, 1), (3, 2)])
    spec = uniform_spec(g, QuarticDistanceSquared(d), 2, [AreaTerm((1, 2, 3), S_star, K)])
    c = Configuration(np.array([[-a, 0.0], [a, 0.0], [x, y]]), frozenset({1, 2}))
    return spec, c


def pinned_triple_engine(a, d, K, x, y):
    return hessian_total(*pinned_triple_spec(a, d, K, x, y))


# --- composite distance + area potentials -----------------------------------

def _rigidity(P, edges):
    n = P.shape[0]
    R = np.zeros((len(edges), 2 * n))
    for k, (i, j) in enumerate(edges):
        z = P[i] - P[j]
        R[k, 2 * i:2 * i + 2] = z
        R[k, 2 * j:2 * j + 2] = -z
    return R


def _signed_area(P, tri):
    i, j, k = tri
    return -0.5 * (P[j] - P[k]) @ _J @ (P[i] - P[j])


def _Y(P, tri):
    i, j, k = tri
    Y = np.zeros_like(P)
    Y[i] = _J @ (P[j] - P[k])
    Y[j] = _J @ (-P[i] + P[k])
    Y[k] = _J @ (P[i] - P[j])
    return Y.reshape(-1)


def _row(P, tri):
    """The row vector ``[(p_j-p_k)^T J, (-p_i+p_k)^T J, (p_i-p_j)^T J]`` scattered to n agents."""
    i, j, k = tri
    r = np.zeros_like(P)
    r[i] = (P[j] - P[k]) @ _J
    r[j] = (-P[i] + P[k]) @ _J
    r[k] = (P[i] - P[j]) @ _J
    return r.reshape(-1)


def _cyclic_J(n, tri):
    i, j, k = tri
    B = np.zeros((2 * n, 2 * n))
    for (a, b), blk in {
        (i, j): _J, (i, k): -_J,
        (j, i): -_J, (j, k): _J,
        (k, i): _J, (k, j): -_J,
    }.items():
        B[2 * a:2 * a + 2, 2 * b:2 * b + 2] = blk
    return B


def triangle_area_closed_form(P, dists, S_star, K):
    """``2 R^T R + (H^T W H) (x) I_2`` plus the area Hessian B, written term by term."""
    edges = [(0, 1), (1, 2), (0, 2)]
    R = _rigidity(P, edges)
    e = [np.sum((P[i] - P[j]) ** 2) - dk ** 2 for (i, j), dk in zip(edges, dists)]
    E = np.array([
        [e[0] + e[2], -e[0], -e[2]],
        [-e[0], e[0] + e[1], -e[1]],
        [-e[2], -e[1], e[1] + e[2]],
    ])
    tri = (0, 1, 2)
    S = _signed_area(P, tri)
    B = -0.25 * K * np.outer(_Y(P, tri), _row(P, tri)) + 0.5 * K * (S - S_star) * _cyclic_J(3, tri)
    return 2 * R.T @ R + np.kron(E, np.eye(2)) + B


def triangle_area_engine(P, dists, S_star, K):
    g = build_graph(3, [(1, 2), (2, 3), (1, 3)])
    spec = PotentialSpec(g, tuple(QuarticDistanceSquared(dk) for dk in dists), (AreaTerm((1, 2, 3), S_star, K),), 2)
    return hessian_total(spec, Configuration(P))


TWO_TRIANGLE_EDGES = [(1, 2), (2, 3), (1, 3), (2, 4), (3, 4)]


def two_triangle_closed_form(P, dists, S_A, S_B, K):
    edges0 = [(i - 1, j - 1) for i, j in TWO_TRIANGLE_EDGES]
    R = _rigidity(P, edges0)
    e12, e23, e13, e24, e34 = (np.sum((P[i] - P[j]) ** 2) - dk ** 2 for (i, j), dk in zip(edges0, dists))
    E = np.array([
        [e12 + e13, -e12, -e13, 0],
        [-e12, e12 + e23 + e24, -e23, -e24],
        [-e13, -e23, e13 + e23 + e34, -e34],
        [0, -e24, -e34, e24 + e34],
    ])
    tA, tB = (0, 1, 2), (1, 2, 3)
    YA, YB = _Y(P, tA), _Y(P, tB)
    SA, SB = _signed_area(P, tA), _signed_area(P, tB)
    MA = _cyclic_J(4, tA)
    MB = np.zeros((8, 8))
    MB[2:, 2:] = np.kron(np.array([[0, 1, -1], [-1, 0, 1], [1, -1, 0]]), _J)
    HV2 = 0.25 * K * (np.outer(YA, YA) + 2 * (SA - S_A) * MA + np.outer(YB, YB) + 2 * (SB - S_B) * MB)
    return 2 * R.T @ R + np.kron(E, np.eye(2)) + HV2


def two_triangle_engine(P, dists, S_A, S_B, K):
    g = build_graph(4, TWO_TRIANGLE_EDGES)
    areas = (AreaTerm((1, 2, 3), S_A, K), AreaTerm((2, 3, 4), S_B, K))
    spec = PotentialSpec(g, tuple(QuarticDistanceSquared(dk) for dk in dists), areas, 2)
    return hessian_total(spec, Configuration(P))


# --- case drivers -----------------------------------------------------------

def _dev(A, B) -> float:
    return float(np.max(np.abs(np.asarray(A) - np.asarray(B))))


def run_pinned_pair(count=50, seed=None) -> CaseResult:
    params, devs = [], []
    for x, y, d in _samples([-2, -2, 0.5], [2, 2, 2], count, seed):
        if np.hypot(x, y) <= 0.1:
            x += 0.2
        params.append({"x": x, "y": y, "d": d})
        devs.append(_dev(pinned_pair_engine(x, y, d), pinned_pair_closed_form(x, y, d)))
    return CaseResult("pinned-pair", params, devs)


def run_pinned_triple(count=50, seed=None) -> CaseResult:
    params, devs = [], []
    for a, d, K, x, y in _samples([0.2, 0.5, 0.1, -2, -2], [2, 2, 5, 2, 2], count, seed):
        params.append({"a": a, "d": d, "K": K, "x": x, "y": y})
        devs.append(_dev(pinned_triple_engine(a, d, K, x, y), pinned_triple_closed_form(a, d, K, x, y)))
    return CaseResult("pinned-triple", params, devs)


def run_collision_dual(count=20, seed=None) -> CaseResult:
    rng = np.random.default_rng(0 if seed is None else seed)
    params, devs = [], []
    for _ in range(count):
        g = random_graph(rng, n_max=4, m_max=6, n_min=4)
        d = int(rng.choice([2, 3]))
        fams = tuple(CollisionZ4(float(rng.uniform(0.5, 1.5))) for _ in range(g.m))
        spec = PotentialSpec(g, fams, (), d)
        c = random_configuration(rng, g, d)
        params.append({"edges": [list(e) for e in g.edges], "dimension": d})
        devs.append(_dev(hessian_z4_direct(spec, c), hessian_edge_general(spec, c)))
    return CaseResult("collision-dual", params, devs)


def run_triangle_area(count=50, seed=None) -> CaseResult:
    params, devs = [], []
    for row in _samples([-1.5] * 6 + [0.5] * 3 + [-1, 0.1], [1.5] * 6 + [2] * 3 + [1, 5], count, seed):
        P, dists, S_star, K = row[:6].reshape(3, 2), row[6:9], row[9], row[10]
        params.append({"positions": P.tolist(), "d": dists.tolist(), "S_star": S_star, "K": K})
        devs.append(_dev(triangle_area_engine(P, dists, S_star, K), triangle_area_closed_form(P, dists, S_star, K)))
    return CaseResult("triangle-area", params, devs)


def run_two_triangle(count=50, seed=None) -> CaseResult:
    params, devs = [], []
    lo = [-1.5] * 8 + [0.5] * 5 + [-1, -1, 0.1]
    hi = [1.5] * 8 + [2] * 5 + [1, 1, 5]
    for row in _samples(lo, hi, count, seed):
        P, dists, SA, SB, K = row[:8].reshape(4, 2), row[8:13], row[13], row[14], row[15]
        params.append({"positions": P.tolist(), "d": dists.tolist(), "S_A": SA, "S_B": SB, "K": K})
        devs.append(_dev(two_triangle_engine(P, dists, SA, SB, K), two_triangle_closed_form(P, dists, SA, SB, K)))
    return CaseResult("two-triangle", params, devs)


CASES: dict[str, Callable[..., CaseResult]] = {
    "pinned-pair": run_pinned_pair,
    "pinned-triple": run_pinned_triple,
    "collision-dual": run_collision_dual,
    "triangle-area": run_triangle_area,
    "two-triangle": run_two_triangle,
}
