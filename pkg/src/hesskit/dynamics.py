"""Gradient-flow integration and Hessian-inertia classification of equilibria."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hesskit.hessian import gradient, hessian_total
from hesskit.kinematics import Configuration
from hesskit.potentials import DomainError, PotentialSpec, total_potential

STRICT_MINIMUM = "strict-minimum"
PSD_DEGENERATE = "psd-degenerate"
SADDLE = "saddle"


class IntegrationError(DomainError):
    """The flow left a family domain or produced a non-finite state."""

    def __init__(self, message: str, step: int, edge: int | None = None):
        super().__init__(message, edge)
        self.step = step


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray  # (samples, n, d)
    V: np.ndarray
    grad_norm: np.ndarray  # infinity norm of the free gradient
    steps: int
    reason: str  # "converged" or "max_steps"
    final: Configuration

    @property
    def converged(self) -> bool:
        return self.reason == "converged"


@dataclass
class EquilibriumReport:
    eigenvalues: np.ndarray
    inertia: tuple[int, int, int]
    verdict: str
    tau: float
    configuration: Configuration | None = None
    grad_norm: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "inertia": {"n_minus": self.inertia[0], "n_zero": self.inertia[1], "n_plus": self.inertia[2]},
            "verdict": self.verdict,
            "tau": self.tau,
        }
        if self.grad_norm is not None:
            out["grad_norm_inf"] = self.grad_norm
        if self.configuration is not None:
            out["positions"] = self.configuration.positions.tolist()
            out["pinned"] = sorted(self.configuration.pinned)
        out.update(self.extra)
        return out


def _free_grad_norm(g: np.ndarray) -> float:
    return float(np.max(np.abs(g), initial=0.0))


def integrate(
    spec: PotentialSpec,
    c0: Configuration,
    dt: float = 1e-3,
    max_steps: int = 100_000,
    grad_tol: float = 1e-9,
    stride: int = 1,
) -> Trajectory:
    """Fixed-step RK4 on ``p' = -grad V`` with pinned agents frozen.

    Stops when ``|grad V|_inf < grad_tol`` or after ``max_steps`` steps.
    Samples are kept every ``stride`` steps, plus the terminal state.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride!r}")
    spec.check_config(c0)
    d, pinned = c0.d, c0.pinned

    def rhs(p, step):
        try:
            return -gradient(spec, Configuration.from_stacked(p, d, pinned))
        except DomainError as exc:
            raise IntegrationError(f"step {step}: {exc}", step, exc.edge) from None

    def potential(p, step):
        try:
            return total_potential(spec, Configuration.from_stacked(p, d, pinned))
        except DomainError as exc:
            raise IntegrationError(f"step {step}: {exc}", step, exc.edge) from None

    p = c0.p.copy()
    f = rhs(p, 0)
    gn = _free_grad_norm(f)
    ts, ps, vs, gs = [0.0], [p.copy()], [potential(p, 0)], [gn]
    step = 0
    reason = "converged" if gn < grad_tol else "max_steps"
    while reason != "converged" and step < max_steps:
        k1 = f
        k2 = rhs(p + 0.5 * dt * k1, step)
        k3 = rhs(p + 0.5 * dt * k2, step)
        k4 = rhs(p + dt * k3, step)
        p = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        step += 1
        if not np.all(np.isfinite(p)):
            raise IntegrationError(f"step {step}: non-finite state", step)
        f = rhs(p, step)
        gn = _free_grad_norm(f)
        if gn < grad_tol:
            reason = "converged"
        if step % stride == 0 or reason == "converged" or step == max_steps:
            ts.append(step * dt)
            ps.append(p.copy())
            vs.append(potential(p, step))
            gs.append(gn)
    return Trajectory(
        times=np.array(ts),
        positions=np.array(ps).reshape(len(ps), c0.n, d),
        V=np.array(vs),
        grad_norm=np.array(gs),
        steps=step,
        reason=reason,
        final=Configuration.from_stacked(p, d, pinned),
    )


def max_threads() -> int:
    """Parallelism cap from ``HESSKIT_THREADS`` (default: CPU count)."""
    env = os.environ.get("HESSKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def integrate_many(spec: PotentialSpec, starts: Sequence[Configuration], **kwargs) -> list[Trajectory]:
    """Independent trajectories in parallel; results keep the order of ``starts``."""
    with ThreadPoolExecutor(max_workers=max_threads()) as pool:
        return list(pool.map(lambda c: integrate(spec, c, **kwargs), starts))


def classify(hess: np.ndarray, tau_rel: float = 1e-8) -> EquilibriumReport:
    """Inertia of a symmetric matrix against the threshold ``tau_rel * max(1, max|lambda|)``."""
    A = np.asarray(hess, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    asym = float(np.max(np.abs(A - A.T), initial=0.0))
    if asym > 1e-10:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    lam = np.linalg.eigvalsh(0.5 * (A + A.T))
    tau = tau_rel * max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    inertia = (int(np.sum(lam < -tau)), int(np.sum(np.abs(lam) <= tau)), int(np.sum(lam > tau)))
    return EquilibriumReport(lam, inertia, verdict_for(inertia), tau)


def verdict_for(inertia: tuple[int, int, int]) -> str:
    n_minus, n_zero, _ = inertia
    if n_minus > 0:
        return SADDLE
    if n_zero == 0:
        return STRICT_MINIMUM
    return PSD_DEGENERATE


def classify_at(spec: PotentialSpec, c: Configuration, tau_rel: float = 1e-8) -> EquilibriumReport:
    rep = classify(hessian_total(spec, c), tau_rel)
    rep.configuration = c
    rep.grad_norm = _free_grad_norm(gradient(spec, c))
    return rep


def find_and_classify(
    spec: PotentialSpec,
    c0: Configuration,
    dt: float = 1e-3,
    max_steps: int = 100_000,
    grad_tol: float = 1e-9,
    tau_rel: float = 1e-8,
) -> EquilibriumReport:
    traj = integrate(spec, c0, dt=dt, max_steps=max_steps, grad_tol=grad_tol, stride=max(1, max_steps))
    rep = classify_at(spec, traj.final, tau_rel)
    rep.extra = {"termination": traj.reason, "steps": traj.steps}
    return rep
