"""Central finite-difference gradient and Hessian of the total potential.

``fd_gradient`` and ``fd_hessian`` only ever call :func:`total_potential`;
they share no code path with the analytic assembly that ``verify`` checks.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from hesskit.hessian import gradient, hessian_total
from hesskit.kinematics import Configuration
from hesskit.potentials import DomainError, PotentialSpec, check_domain, total_potential


@dataclass(frozen=True)
class FDParams:
    h: float = 1e-4
    scaled: bool = True  # step = h * max(1, |p|_inf)

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"finite-difference step must be positive, got {self.h!r}")

    def step(self, c: Configuration) -> float:
        if not self.scaled:
            return self.h
        return self.h * max(1.0, float(np.max(np.abs(c.p))))


def _stencil_guard(spec: PotentialSpec, c: Configuration, h: float) -> None:
    try:
        check_domain(spec, c, margin=2.0 * h)
    except DomainError as exc:
        raise DomainError(f"finite-difference stencil (h={h:.3g}) leaves the domain: {exc}",
                          edge=exc.edge) from None


def _potential_at(spec, c, p):
    return total_potential(spec, Configuration.from_stacked(p, c.d, c.pinned))


def fd_gradient(spec: PotentialSpec, c: Configuration, params: FDParams | None = None) -> np.ndarray:
    params = params or FDParams()
    h = params.step(c)
    _stencil_guard(spec, c, h)
    p0 = c.p.copy()
    grad = np.zeros_like(p0)
    for i in c.free_indices():
        e = np.zeros_like(p0)
        e[i] = h
        grad[i] = (_potential_at(spec, c, p0 + e) - _potential_at(spec, c, p0 - e)) / (2.0 * h)
    return grad


def fd_hessian(spec: PotentialSpec, c: Configuration, params: FDParams | None = None) -> np.ndarray:
    """Four-point central Hessian over the free coordinates, symmetrized."""
    params = params or FDParams()
    h = params.step(c)
    _stencil_guard(spec, c, h)
    p0 = c.p.copy()
    free = c.free_indices()
    nf = len(free)
    out = np.zeros((nf, nf))
    V = lambda p: _potential_at(spec, c, p)  # noqa: E731
    for a, i in enumerate(free):
        ei = np.zeros_like(p0)
        ei[i] = h
        for b in range(a, nf):
            ej = np.zeros_like(p0)
            ej[free[b]] = h
            val = (V(p0 + ei + ej) - V(p0 + ei - ej) - V(p0 - ei + ej) + V(p0 - ei - ej)) / (4.0 * h * h)
            out[a, b] = val
            out[b, a] = val
    return 0.5 * (out + out.T)


def _errors(analytic, numeric):
    diff = np.abs(np.asarray(analytic) - np.asarray(numeric))
    if diff.size == 0:
        return 0.0, 0.0, None
    scale = max(1.0, float(np.max(np.abs(analytic))))
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return float(diff[idx]), float(diff[idx]) / scale, tuple(int(v) for v in idx)


@dataclass
class VerifyReport:
    h: float
    tol: float
    grad_tol: float
    grad_max_abs_err: float = float("nan")
    grad_max_rel_err: float = float("nan")
    hess_max_abs_err: float = float("nan")
    hess_max_rel_err: float = float("nan")
    worst_hessian_entry: tuple[int, int] | None = None
    passed: bool = False
    error: str | None = None

    @property
    def max_abs_err(self) -> float:
        return max(self.grad_max_abs_err, self.hess_max_abs_err)

    @property
    def max_rel_err(self) -> float:
        return max(self.grad_max_rel_err, self.hess_max_rel_err)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["max_abs_err"] = self.max_abs_err
        out["max_rel_err"] = self.max_rel_err
        out["pass"] = out.pop("passed")
        if self.worst_hessian_entry is not None:
            out["worst_hessian_entry"] = list(self.worst_hessian_entry)
        for k, v in out.items():
            if isinstance(v, float) and not np.isfinite(v):
                out[k] = None
        return out


def verify(
    spec: PotentialSpec,
    c: Configuration,
    params: FDParams | None = None,
    tol: float = 1e-5,
    grad_tol: float = 1e-7,
    analytic_hessian: np.ndarray | None = None,
) -> VerifyReport:
    """Compare analytic and finite-difference derivatives.

    Errors are relative to ``max(1, max|analytic|)``. Domain problems are
    reported in ``error`` with ``passed=False`` instead of being raised.
    ``analytic_hessian`` overrides the assembled Hessian (fault injection).
    """
    params = params or FDParams()
    rep = VerifyReport(h=params.step(c), tol=tol, grad_tol=grad_tol)
    try:
        g_an = gradient(spec, c)
        g_fd = fd_gradient(spec, c, params)
        H_an = hessian_total(spec, c) if analytic_hessian is None else np.asarray(analytic_hessian)
        H_fd = fd_hessian(spec, c, params)
    except DomainError as exc:
        rep.error = str(exc)
        return rep
    free = c.free_indices()
    rep.grad_max_abs_err, rep.grad_max_rel_err, _ = _errors(g_an[free], g_fd[free])
    rep.hess_max_abs_err, rep.hess_max_rel_err, rep.worst_hessian_entry = _errors(H_an, H_fd)
    rep.passed = rep.grad_max_rel_err < grad_tol and rep.hess_max_rel_err < tol
    return rep


@dataclass
class StepSweep:
    hs: list[float]
    grad_errors: list[float]
    hess_errors: list[float]
    grad_slope: float = field(init=False)
    hess_slope: float = field(init=False)

    def __post_init__(self):
        self.grad_slope = _loglog_slope(self.hs, self.grad_errors)
        self.hess_slope = _loglog_slope(self.hs, self.hess_errors)


def _loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log10(x[ok]), np.log10(y[ok]), 1)[0])


def step_sweep(
    spec: PotentialSpec,
    c: Configuration,
    hs: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5),
) -> StepSweep:
    """Max-abs error of fd derivatives against the analytic ones for each step (unscaled)."""
    g_an = gradient(spec, c)
    H_an = hessian_total(spec, c)
    ge, he = [], []
    for h in hs:
        p = FDParams(h=h, scaled=False)
        ge.append(float(np.max(np.abs(fd_gradient(spec, c, p) - g_an), initial=0.0)))
        he.append(float(np.max(np.abs(fd_hessian(spec, c, p) - H_an), initial=0.0)))
    return StepSweep(list(hs), ge, he)
