import numpy as np
import pytest

from hesskit.fd import FDParams, fd_gradient, fd_hessian, step_sweep, verify
from hesskit.graph import build_graph
from hesskit.hessian import hessian_total
from hesskit.kinematics import Configuration
from hesskit.potentials import (
    CollisionZ4,
    ConnectednessPreserving,
    DomainError,
    PotentialSpec,
    QuadraticDistanceError,
    QuarticDistanceSquared,
    uniform_spec,
)


class _Bowl:
    """Stand-in spec whose potential is |p|^2 / 2 (patched in below)."""


@pytest.fixture
def bowl(monkeypatch):
    import hesskit.fd as fd

    monkeypatch.setattr(fd, "total_potential", lambda spec, c: 0.5 * float(c.p @ c.p))
    monkeypatch.setattr(fd, "check_domain", lambda spec, c, margin=0.0: None)
    return _Bowl()


def test_quadratic_bowl_gradient(bowl, rng):
    c = Configuration(rng.normal(size=(3, 2)))
    np.testing.assert_allclose(fd_gradient(bowl, c), c.p, atol=1e-10)


def test_quadratic_bowl_hessian(bowl, rng):
    c = Configuration(rng.normal(size=(3, 2)))
    np.testing.assert_allclose(fd_hessian(bowl, c), np.eye(6), atol=1e-8)


def test_pinned_coordinates_zero(bowl):
    c = Configuration([[1.0, 2.0], [3.0, 4.0]], pinned={1})
    np.testing.assert_allclose(fd_gradient(bowl, c), [0, 0, 3, 4], atol=1e-10)
    assert fd_hessian(bowl, c).shape == (2, 2)


def test_equilibrium_gradient_vanishes():
    spec = uniform_spec(build_graph(2, [(1, 2)]), QuarticDistanceSquared(1.0))
    c = Configuration([[0, 0], [1, 0]])
    # central difference of (s^2 - 1)^2 / 4 at s = 1 is exactly h^2 (pure truncation)
    for h in (1e-4, 1e-5):
        g = fd_gradient(spec, c, FDParams(h=h))
        np.testing.assert_allclose(g, [-h * h, 0, h * h, 0], rtol=1e-6, atol=1e-15)
    assert np.max(np.abs(fd_gradient(spec, c, FDParams(h=1e-5)))) < 1e-9


def test_fd_hessian_exactly_symmetric(rng):
    spec = uniform_spec(build_graph(3, [(1, 2), (2, 3), (1, 3)]), CollisionZ4(1.0))
    H = fd_hessian(spec, Configuration(rng.normal(size=(3, 2)) * 2))
    np.testing.assert_array_equal(H, H.T)


def test_pinned_triple_matches_closed_form():
    from hesskit.reproduce import pinned_triple_closed_form, pinned_triple_spec

    a, d, K, x, y = 1.0, 1.0, 1.0, 0.3, 0.7
    spec, c = pinned_triple_spec(a, d, K, x, y)
    expected = pinned_triple_closed_form(a, d, K, x, y)
    np.testing.assert_allclose(fd_hessian(spec, c), expected, rtol=1e-5)
    # the values by substitution
    np.testing.assert_allclose(expected, [[6 * .09 + 6 + 2 * .49 - 2, 4 * .21], [4 * .21, 2 * .09 + 2 + 6 * .49 - 2 + 1]])


def test_verify_pass(rng):
    spec = uniform_spec(build_graph(3, [(1, 2), (2, 3)]), QuadraticDistanceError(1.0), d=3)
    rep = verify(spec, Configuration(rng.uniform(-1, 1, size=(3, 3))))
    assert rep.passed and rep.error is None
    assert rep.max_rel_err < rep.tol


def test_verify_fault_injection(rng):
    spec = uniform_spec(build_graph(3, [(1, 2), (2, 3)]), QuadraticDistanceError(1.0))
    c = Configuration(rng.uniform(-1, 1, size=(3, 2)))
    H = hessian_total(spec, c).copy()
    H[2, 4] += 1e-2
    rep = verify(spec, c, analytic_hessian=H)
    assert not rep.passed
    assert rep.worst_hessian_entry == (2, 4)
    assert rep.hess_max_abs_err == pytest.approx(1e-2, rel=1e-3)


def test_verify_near_delta_boundary():
    h = 1e-4
    delta = 1.0
    spec = uniform_spec(build_graph(2, [(1, 2)]), ConnectednessPreserving(delta))
    c = Configuration([[0.0, 0.0], [delta - h / 2, 0.0]])
    rep = verify(spec, c, FDParams(h=h))
    assert not rep.passed
    assert "stencil" in rep.error and "edge #1" in rep.error
    assert rep.to_dict()["max_rel_err"] is None
    with pytest.raises(DomainError):
        fd_hessian(spec, c, FDParams(h=h))


def test_step_scaling():
    c = Configuration([[0.0, 0.0], [5.0, -8.0]])
    assert FDParams().step(c) == pytest.approx(8e-4)
    assert FDParams(h=1e-3, scaled=False).step(c) == 1e-3
    with pytest.raises(ValueError):
        FDParams(h=0)


def test_second_order_convergence():
    # near the target length the third derivative dominates the potential value,
    # so truncation error is visible all the way down to h = 1e-5
    g = build_graph(3, [(1, 2), (2, 3), (1, 3)])
    spec = PotentialSpec(g, (QuarticDistanceSquared(1.0), CollisionZ4(0.9), QuarticDistanceSquared(0.8)))
    c = Configuration([[0.0, 0.0], [1.05, 0.0], [0.3, 0.7]])
    sweep = step_sweep(spec, c)
    assert abs(sweep.grad_slope - 2.0) < 0.2
    ratios = np.array(sweep.grad_errors[:-1]) / np.array(sweep.grad_errors[1:])
    assert np.all(ratios > 60)  # ~100x per decade
