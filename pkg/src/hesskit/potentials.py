"""Edge-tension distance potentials, signed-area triangle terms, and the total potential.

Each edge family evaluates, at an edge length ``s``, the value ``V``, its
derivative ``V' = dV/ds``, the weight ``omega = V'/s`` and ``omega' = d omega/ds``.
Those four numbers are all the Hessian assembly needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, NamedTuple, Sequence

import numpy as np

from hesskit.graph import Graph
from hesskit.kinematics import Configuration, relative_positions, signed_area

#: Default singularity floor for ``s`` (families with 1/s terms) and for ``delta - s``.
DEFAULT_FLOOR = 1e-12


class DomainError(ValueError):
    """An edge length left the domain of its potential family.

    ``edge`` is the 0-based edge index (None for scalar evaluation).
    """

    def __init__(self, message: str, edge: int | None = None):
        super().__init__(message)
        self.edge = edge


class EdgeFamilyEval(NamedTuple):
    V: float
    Vprime: float
    omega: float
    omegaprime: float
    # omega'/s, the diagonal entry of the curvature matrix; finite at s=0
    # for the quartic family only.
    curvature: float


class EdgeFamily:
    """Base class of the edge potential catalog."""

    name: ClassVar[str]
    singular_at_zero: ClassVar[bool] = True

    def evaluate(self, s: float) -> EdgeFamilyEval:
        self.check(s)
        return self._evaluate(float(s))

    def check(self, s: float, margin: float = 0.0) -> None:
        if self.singular_at_zero and not s > self.floor + margin:
            raise DomainError(f"{self.name}: edge length {s:.6g} at or below singular floor "
                              f"{self.floor + margin:.3g}")

    def params(self) -> dict:
        raise NotImplementedError

    def _evaluate(self, s: float) -> EdgeFamilyEval:
        raise NotImplementedError


@dataclass(frozen=True)
class QuarticDistanceSquared(EdgeFamily):
    """``V = (s^2 - d^2)^2 / 4``."""

    d: float
    floor: float = DEFAULT_FLOOR
    name: ClassVar[str] = "quartic_distance_squared"
    singular_at_zero: ClassVar[bool] = False

    def params(self):
        return {"d": self.d}

    def _evaluate(self, s):
        e = s * s - self.d ** 2
        return EdgeFamilyEval(0.25 * e * e, e * s, e, 2.0 * s, 2.0)


@dataclass(frozen=True)
class QuadraticDistanceError(EdgeFamily):
    """``V = (s - d)^2 / 2``."""

    d: float
    floor: float = DEFAULT_FLOOR
    name: ClassVar[str] = "quadratic_distance_error"

    def params(self):
        return {"d": self.d}

    def _evaluate(self, s):
        e = s - self.d
        op = self.d / (s * s)
        return EdgeFamilyEval(0.5 * e * e, e, e / s, op, op / s)


class EFunction(NamedTuple):
    """A strictly increasing, twice differentiable ``e(s; d)`` with its derivatives."""

    e: Callable[[float, float], float]
    de: Callable[[float, float], float]
    d2e: Callable[[float, float], float]


E_FUNCTIONS: dict[str, EFunction] = {
    "squared": EFunction(
        lambda s, d: s * s - d * d,
        lambda s, d: 2.0 * s,
        lambda s, d: 2.0,
    ),
    "log": EFunction(
        lambda s, d: math.log(s / d),
        lambda s, d: 1.0 / s,
        lambda s, d: -1.0 / (s * s),
    ),
}


def register_e_function(name: str, e, de, d2e) -> None:
    """Register an e-function for the manipulability family under ``name``."""
    E_FUNCTIONS[name] = EFunction(e, de, d2e)


@dataclass(frozen=True)
class Manipulability(EdgeFamily):
    """``V = e(s)^2 / 2`` for a registered e-function."""

    d: float
    e: str = "squared"
    floor: float = DEFAULT_FLOOR
    name: ClassVar[str] = "manipulability"

    def __post_init__(self):
        if self.e not in E_FUNCTIONS:
            raise ValueError(f"unknown e-function {self.e!r}; registered: {sorted(E_FUNCTIONS)}")

    def params(self):
        return {"d": self.d, "e": self.e}

    def _evaluate(self, s):
        f = E_FUNCTIONS[self.e]
        e, de, d2e = f.e(s, self.d), f.de(s, self.d), f.d2e(s, self.d)
        vp = e * de
        op = ((de * de + e * d2e) * s - vp) / (s * s)
        return EdgeFamilyEval(0.5 * e * e, vp, vp / s, op, op / s)


@dataclass(frozen=True)
class ConnectednessPreserving(EdgeFamily):
    """``V = s^2 / (delta - s)``, defined for ``s < delta``."""

    delta: float
    floor: float = DEFAULT_FLOOR
    name: ClassVar[str] = "connectedness_preserving"

    def params(self):
        return {"delta": self.delta}

    def check(self, s, margin=0.0):
        super().check(s, margin)
        if not self.delta - s > self.floor + margin:
            raise DomainError(f"{self.name}: edge length {s:.6g} not below delta={self.delta:.6g}"
                              f" by the required margin {self.floor + margin:.3g}")

    def _evaluate(self, s):
        g = self.delta - s
        om = (2.0 * self.delta - s) / (g * g)
        op = (3.0 * self.delta - s) / (g * g * g)
        return EdgeFamilyEval(s * s / g, om * s, om, op, op / s)


@dataclass(frozen=True)
class CollisionZ4(EdgeFamily):
    """``V = (s^2 - d^2)^2 / s^2``."""

    d: float
    floor: float = DEFAULT_FLOOR
    name: ClassVar[str] = "collision_z4"

    def params(self):
        return {"d": self.d}

    def _evaluate(self, s):
        s2 = s * s
        d4 = self.d ** 4
        om = 2.0 * (s2 * s2 - d4) / (s2 * s2)
        op = 8.0 * d4 / (s2 * s2 * s)
        return EdgeFamilyEval((s2 - self.d ** 2) ** 2 / s2, om * s, om, op, op / s)


FAMILIES: dict[str, type[EdgeFamily]] = {
    cls.name: cls
    for cls in (QuarticDistanceSquared, QuadraticDistanceError, Manipulability,
                ConnectednessPreserving, CollisionZ4)
}


def make_family(name: str, params: dict) -> EdgeFamily:
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown edge family {name!r}; known: {sorted(FAMILIES)}") from None
    fam = cls(**params)
    for key in ("d", "delta"):
        v = getattr(fam, key, None)
        if v is not None and not v > 0:
            raise ValueError(f"{name}: parameter {key} must be positive, got {v!r}")
    return fam


def edge_family_eval(f: EdgeFamily, s: float) -> EdgeFamilyEval:
    return f.evaluate(s)


@dataclass(frozen=True)
class AreaTerm:
    """``K/2 (S - S*)^2`` on the ordered triangle ``(i, j, k)`` (1-based ids)."""

    triangle: tuple[int, int, int]
    S_star: float
    K: float

    def __post_init__(self):
        tri = tuple(int(v) for v in self.triangle)
        if len(tri) != 3 or len(set(tri)) != 3:
            raise ValueError(f"area term needs three distinct vertices, got {self.triangle!r}")
        if not self.K > 0:
            raise ValueError(f"area gain K must be positive, got {self.K!r}")
        object.__setattr__(self, "triangle", tri)

    @property
    def index0(self) -> tuple[int, int, int]:
        i, j, k = self.triangle
        return i - 1, j - 1, k - 1


@dataclass(frozen=True)
class PotentialSpec:
    """A graph, one edge family per edge (in edge order), and area terms."""

    graph: Graph
    families: tuple[EdgeFamily, ...]
    areas: tuple[AreaTerm, ...] = ()
    d: int = 2

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "areas", tuple(self.areas))
        if len(self.families) != self.graph.m:
            raise ValueError(f"{len(self.families)} edge families for {self.graph.m} edges")
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.areas and self.d != 2:
            raise ValueError("signed-area terms require d=2")
        for a in self.areas:
            if max(a.triangle) > self.graph.n:
                raise ValueError(f"area triangle {a.triangle} outside 1..{self.graph.n}")

    def check_config(self, c: Configuration) -> None:
        if c.n != self.graph.n or c.d != self.d:
            raise ValueError(f"configuration is {c.n} agents in R^{c.d}; "
                             f"spec expects {self.graph.n} in R^{self.d}")


def uniform_spec(g: Graph, family: EdgeFamily, d: int = 2, areas: Sequence[AreaTerm] = ()) -> PotentialSpec:
    """Spec with the same family on every edge."""
    return PotentialSpec(g, (family,) * g.m, tuple(areas), d)


def check_domain(spec: PotentialSpec, c: Configuration, margin: float = 0.0) -> np.ndarray:
    """Validate every edge length against its family, returning the lengths."""
    lengths = relative_positions(spec.graph, c).lengths
    for k, (fam, s) in enumerate(zip(spec.families, lengths)):
        try:
            fam.check(s, margin)
        except DomainError as exc:
            i, j = spec.graph.edges[k]
            raise DomainError(f"edge #{k + 1} ({i}, {j}): {exc}", edge=k) from None
    return lengths


def edge_evals(spec: PotentialSpec, c: Configuration) -> list[EdgeFamilyEval]:
    lengths = check_domain(spec, c)
    return [fam._evaluate(float(s)) for fam, s in zip(spec.families, lengths)]


def area_values(spec: PotentialSpec, c: Configuration) -> list[float]:
    P = c.positions
    return [signed_area(*(P[v] for v in a.index0)) for a in spec.areas]


def total_potential(spec: PotentialSpec, c: Configuration) -> float:
    """Sum of edge potentials (each undirected edge once) and area penalties."""
    spec.check_config(c)
    total = 0.0
    for ev in edge_evals(spec, c):
        total += ev.V
    for a, S in zip(spec.areas, area_values(spec, c)):
        total += 0.5 * a.K * (S - a.S_star) ** 2
    return total
