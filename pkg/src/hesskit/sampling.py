"""Random graphs, configurations and specs for property checks and sweeps.

Every function takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import itertools

import numpy as np

from hesskit.graph import Graph, build_graph
from hesskit.kinematics import Configuration, relative_positions
from hesskit.potentials import (
    AreaTerm,
    CollisionZ4,
    ConnectednessPreserving,
    EdgeFamily,
    Manipulability,
    PotentialSpec,
    QuadraticDistanceError,
    QuarticDistanceSquared,
)

FAMILY_NAMES = (
    "quartic_distance_squared",
    "quadratic_distance_error",
    "manipulability",
    "connectedness_preserving",
    "collision_z4",
)


def random_graph(rng: np.random.Generator, n_max: int = 8, m_max: int = 16, n_min: int = 2) -> Graph:
    n = int(rng.integers(n_min, n_max + 1))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    m = int(rng.integers(1, min(m_max, len(pairs)) + 1))
    chosen = rng.choice(len(pairs), size=m, replace=False)
    edges = []
    for idx in chosen:
        i, j = pairs[idx]
        edges.append((i, j) if rng.random() < 0.5 else (j, i))
    return build_graph(n, edges)


def random_configuration(
    rng: np.random.Generator,
    g: Graph,
    d: int,
    box: float = 1.0,
    min_length: float = 0.5,
    max_tries: int = 1000,
) -> Configuration:
    """Uniform positions in ``[-box, box]^d`` with every edge at least ``min_length`` long."""
    for _ in range(max_tries):
        P = rng.uniform(-box, box, size=(g.n, d))
        c = Configuration(P)
        if g.m == 0 or relative_positions(g, c).lengths.min() >= min_length:
            return c
    raise RuntimeError(f"no configuration with edge lengths >= {min_length} after {max_tries} tries")


def random_family(rng: np.random.Generator, name: str, box: float = 1.0, dim: int = 3) -> EdgeFamily:
    """A family instance with target distance in ``[0.5, 1.5] * box``.

    ``delta`` for the connectedness family exceeds the diameter of the
    sampling box, so every configuration drawn from it is admissible.
    """
    if name == "connectedness_preserving":
        diam = 2.0 * box * np.sqrt(dim)
        return ConnectednessPreserving(delta=float(diam * rng.uniform(1.2, 2.0)))
    d = float(box * rng.uniform(0.5, 1.5))
    if name == "quartic_distance_squared":
        return QuarticDistanceSquared(d)
    if name == "quadratic_distance_error":
        return QuadraticDistanceError(d)
    if name == "manipulability":
        return Manipulability(d, e=str(rng.choice(["squared", "log"])))
    if name == "collision_z4":
        return CollisionZ4(d)
    raise ValueError(f"unknown family {name!r}")


def random_spec(
    rng: np.random.Generator,
    family: str,
    d: int | None = None,
    with_areas: bool = False,
    n_max: int = 8,
    m_max: int = 16,
    box: float = 1.0,
    min_length: float = 0.5,
) -> tuple[PotentialSpec, Configuration]:
    """Random graph, configuration and per-edge parameters for one family."""
    if d is None:
        d = int(rng.choice([2, 3]))
    g = random_graph(rng, n_max=n_max, m_max=m_max, n_min=3 if with_areas else 2)
    c = random_configuration(rng, g, d, box=box, min_length=min_length)
    fams = tuple(random_family(rng, family, box, d) for _ in range(g.m))
    areas = ()
    if with_areas and d == 2:
        tri = tuple(int(v) + 1 for v in rng.choice(g.n, size=3, replace=False))
        areas = (AreaTerm(tri, float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.5, 3.0))),)
    return PotentialSpec(g, fams, areas, d), c
