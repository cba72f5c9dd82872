"""Analytic gradient and Hessian assembly.

Edge part (any family)::

    H_edge = (H^T (x) I) Z Omega Z^T (H (x) I) + (H^T W H) (x) I
           = R^T Omega R + L_W (x) I

with ``W = diag(omega_k)`` and ``Omega = diag(omega'_k / s_k)``. Each area term
``K/2 (S - S*)^2`` adds ``K/4 Y Y^T + K/2 (S - S*) M``.

Pinned agents are handled by restricting to the free coordinates.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from hesskit.graph import incidence_matrix
from hesskit.kinematics import (
    J,
    Configuration,
    area_gradient_vector,
    edge_block_matrix,
    kron_incidence,
    relative_positions,
)
from hesskit.potentials import CollisionZ4, PotentialSpec, area_values, check_domain, edge_evals


class WeightMatrices(NamedTuple):
    W: np.ndarray
    Omega: np.ndarray


def assemble_weight_matrices(spec: PotentialSpec, c: Configuration) -> WeightMatrices:
    evs = edge_evals(spec, c)
    return WeightMatrices(np.diag([ev.omega for ev in evs]), np.diag([ev.curvature for ev in evs]))


def reduce_to_free(c: Configuration, x: np.ndarray) -> np.ndarray:
    """Restrict a stacked vector or square matrix to the free coordinates of ``c``."""
    if not c.pinned:
        return x
    idx = c.free_indices()
    if x.ndim == 1:
        return x[idx]
    return x[np.ix_(idx, idx)]


def gradient(spec: PotentialSpec, c: Configuration) -> np.ndarray:
    """Full-length gradient ``dV/dp`` with pinned coordinates set to zero."""
    spec.check_config(c)
    g = spec.graph
    evs = edge_evals(spec, c)
    z = relative_positions(g, c).z
    G = np.zeros_like(c.positions)
    for k, ev in enumerate(evs):
        f = ev.omega * z[k]
        G[g.sinks[k]] += f
        G[g.sources[k]] -= f
    grad = G.reshape(-1)
    P = c.positions
    for a, S in zip(spec.areas, area_values(spec, c)):
        grad += 0.5 * a.K * (S - a.S_star) * area_gradient_vector(P, a.index0)
    if c.pinned:
        grad[~c.free_mask()] = 0.0
    return grad


def hessian_edge_general(spec: PotentialSpec, c: Configuration, symmetrize: bool = True) -> np.ndarray:
    """Full ``dn x dn`` Hessian of the edge potentials in matrix form."""
    spec.check_config(c)
    d, n = c.d, c.n
    if spec.graph.m == 0:
        return np.zeros((d * n, d * n))
    W, Omega = assemble_weight_matrices(spec, c)
    Hd = kron_incidence(spec.graph, d)
    Z = edge_block_matrix(relative_positions(spec.graph, c))
    A = Z.T @ Hd  # rigidity matrix
    Hinc = incidence_matrix(spec.graph)
    out = A.T @ Omega @ A + np.kron(Hinc.T @ W @ Hinc, np.eye(d))
    return 0.5 * (out + out.T) if symmetrize else out


def hessian_block(spec: PotentialSpec, c: Configuration, i: int, j: int) -> np.ndarray:
    """The d x d block (i, j) (1-based) of the edge Hessian, built edge by edge."""
    spec.check_config(c)
    n, d = c.n, c.d
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"block ({i}, {j}) outside 1..{n}")
    g = spec.graph
    z = relative_positions(g, c).z
    evs = edge_evals(spec, c)
    out = np.zeros((d, d))
    for k, ev in enumerate(evs):
        a, b = g.sources[k] + 1, g.sinks[k] + 1
        if i == j and i in (a, b):
            sign = 1.0
        elif {i, j} == {a, b}:
            sign = -1.0
        else:
            continue
        out += sign * (ev.curvature * np.outer(z[k], z[k]) + ev.omega * np.eye(d))
    return out


def area_matrix(n: int, tri: tuple[int, int, int]) -> np.ndarray:
    """Derivative of ``Y`` w.r.t. ``p``: blocks ``J`` at (i,j), (j,k), (k,i) and ``-J`` at the transposed places."""
    i, j, k = tri
    M = np.zeros((n, 2, n, 2))
    for a, b in ((i, j), (j, k), (k, i)):
        M[a, :, b, :] = J
        M[b, :, a, :] = -J
    return M.reshape(2 * n, 2 * n)


def hessian_area(spec: PotentialSpec, c: Configuration) -> np.ndarray:
    spec.check_config(c)
    if spec.d != 2:
        raise ValueError("area Hessian requires d=2")
    n = c.n
    out = np.zeros((2 * n, 2 * n))
    P = c.positions
    for a, S in zip(spec.areas, area_values(spec, c)):
        Y = area_gradient_vector(P, a.index0)
        out += 0.25 * a.K * np.outer(Y, Y) + 0.5 * a.K * (S - a.S_star) * area_matrix(n, a.index0)
    return 0.5 * (out + out.T)


def hessian_total(spec: PotentialSpec, c: Configuration, reduced: bool = True) -> np.ndarray:
    """Edge plus area Hessian; restricted to free coordinates when agents are pinned."""
    out = hessian_edge_general(spec, c)
    if spec.areas:
        out = out + hessian_area(spec, c)
    return reduce_to_free(c, out) if reduced else out


def hessian_z4_direct(spec: PotentialSpec, c: Configuration) -> np.ndarray:
    """Closed form for all-``collision_z4`` specs:
    ``2 (H (x) I)^T blkdiag(rho_k I + 4 d_k^4 / s_k^6 z_k z_k^T) (H (x) I)``
    with ``rho_k = (s_k^4 - d_k^4) / s_k^4``.
    """
    spec.check_config(c)
    if not all(isinstance(f, CollisionZ4) for f in spec.families):
        raise ValueError("closed-form z4 Hessian needs collision_z4 on every edge")
    d, n, m = c.d, c.n, spec.graph.m
    if m == 0:
        return np.zeros((d * n, d * n))
    s = check_domain(spec, c)
    z = relative_positions(spec.graph, c).z
    D = np.zeros((d * m, d * m))
    for k, fam in enumerate(spec.families):
        dk4 = fam.d ** 4
        s4 = s[k] ** 4
        rho = (s4 - dk4) / s4
        D[k * d:(k + 1) * d, k * d:(k + 1) * d] = rho * np.eye(d) + 4.0 * dk4 / s[k] ** 6 * np.outer(z[k], z[k])
    Hd = kron_incidence(spec.graph, d)
    return 2.0 * Hd.T @ D @ Hd

