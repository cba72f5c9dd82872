"""Agent configurations and the geometric quantities built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from hesskit.graph import Graph, incidence_matrix

#: 90 degree rotation used by the signed-area terms.
J = np.array([[0.0, 1.0], [-1.0, 0.0]])
J.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Agent positions as an ``(n, d)`` array plus a set of pinned vertex ids.

    ``p`` is the stacked vector ``[p_1; p_2; ...; p_n]`` of length ``d * n``.
    """

    positions: np.ndarray
    pinned: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        P = np.array(self.positions, dtype=float)
        if P.ndim != 2 or P.shape[0] < 1:
            raise ValueError(f"positions must be an (n, d) array, got shape {P.shape}")
        if P.shape[1] not in (2, 3):
            raise ValueError(f"ambient dimension must be 2 or 3, got {P.shape[1]}")
        if not np.all(np.isfinite(P)):
            raise ValueError("positions must be finite")
        P.setflags(write=False)
        pinned = frozenset(int(v) for v in self.pinned)
        bad = [v for v in pinned if not 1 <= v <= P.shape[0]]
        if bad:
            raise ValueError(f"pinned vertices {sorted(bad)} outside 1..{P.shape[0]}")
        object.__setattr__(self, "positions", P)
        object.__setattr__(self, "pinned", pinned)

    @classmethod
    def from_stacked(cls, p, d: int, pinned: Iterable[int] = ()) -> "Configuration":
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or p.size % d:
            raise ValueError(f"stacked vector of length {p.size} is not a multiple of d={d}")
        return cls(p.reshape(-1, d), frozenset(pinned))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    @property
    def p(self) -> np.ndarray:
        return self.positions.reshape(-1)

    def with_positions(self, P) -> "Configuration":
        return Configuration(np.asarray(P, dtype=float).reshape(self.n, self.d), self.pinned)

    def free_mask(self) -> np.ndarray:
        """Boolean mask over the ``d * n`` stacked coordinates; False where pinned."""
        mask = np.ones((self.n, self.d), dtype=bool)
        for v in self.pinned:
            mask[v - 1] = False
        return mask.reshape(-1)

    def free_indices(self) -> np.ndarray:
        return np.flatnonzero(self.free_mask())

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.pinned == other.pinned and np.array_equal(self.positions, other.positions)

    __hash__ = None


class RelativePositions(NamedTuple):
    z: np.ndarray  # (m, d), row k = p_sink - p_source
    lengths: np.ndarray  # (m,)

    @property
    def stacked(self) -> np.ndarray:
        return self.z.reshape(-1)


def relative_positions(g: Graph, c: Configuration) -> RelativePositions:
    P = c.positions
    z = P[g.sinks] - P[g.sources]
    return RelativePositions(z, np.sqrt(np.einsum("ij,ij->i", z, z)))


def kron_incidence(g: Graph, d: int) -> np.ndarray:
    """``H (x) I_d``, mapping stacked positions to stacked edge vectors."""
    return np.kron(incidence_matrix(g), np.eye(d))


def edge_block_matrix(zr: RelativePositions) -> np.ndarray:
    """Block-diagonal ``Z = blkdiag(z_1, ..., z_m)`` of shape ``(d*m, m)``."""
    m, d = zr.z.shape
    Z = np.zeros((d * m, m))
    for k in range(m):
        Z[k * d:(k + 1) * d, k] = zr.z[k]
    return Z


def rigidity_matrix(g: Graph, c: Configuration) -> np.ndarray:
    """Distance rigidity matrix ``R = Z^T (H (x) I_d)``, shape ``(m, d*n)``.

    Row k holds ``z_k^T`` in the sink block and ``-z_k^T`` in the source block.
    """
    zr = relative_positions(g, c)
    d = c.d
    R = np.zeros((g.m, c.n * d))
    for k in range(g.m):
        i, j = g.sources[k], g.sinks[k]
        R[k, j * d:(j + 1) * d] = zr.z[k]
        R[k, i * d:(i + 1) * d] = -zr.z[k]
    return R


def signed_area(pi, pj, pk) -> float:
    """Signed area ``-1/2 (p_j - p_k)^T J (p_i - p_j)``; positive for counter-clockwise (i, j, k)."""
    pi, pj, pk = (np.asarray(v, dtype=float) for v in (pi, pj, pk))
    if pi.shape != (2,) or pj.shape != (2,) or pk.shape != (2,):
        raise ValueError("signed area is defined for planar points only (d=2)")
    return float(-0.5 * (pj - pk) @ J @ (pi - pj))


def area_gradient_vector(P: np.ndarray, tri: tuple[int, int, int]) -> np.ndarray:
    """The stacked vector ``Y`` with ``dS/dp = Y / 2``.

    Blocks: ``J(p_j - p_k)`` at i, ``J(p_k - p_i)`` at j, ``J(p_i - p_j)`` at k,
    zero elsewhere. ``tri`` holds 0-based vertex indices.
    """
    i, j, k = tri
    Y = np.zeros((P.shape[0], 2))
    Y[i] = J @ (P[j] - P[k])
    Y[j] = J @ (P[k] - P[i])
    Y[k] = J @ (P[i] - P[j])
    return Y.reshape(-1)
