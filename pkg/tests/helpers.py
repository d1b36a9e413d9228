"""Shared test utilities: fixture cycles, wall sampling, finite differences."""

import numpy as np

from glasscert import build_graph, find_deterministic_cycles, load_fixture
from glasscert.flow import local_jacobian, local_second_derivatives, local_transition

# (fixture name, initial condition used for simulations)
FIXTURE_STARTS = {
    "two_negative_loops": (1.8, 1.9, 2.8),
    "complex_graph": (1.1, 1.1, 1.1),
    "multiple_thresholds": (0.5, 0.5),
    "negative_loop_2d": (0.5, 0.5),
}
PAPER_FIXTURES = ("two_negative_loops", "complex_graph", "multiple_thresholds")


def net_and_cycle(name):
    net = load_fixture(name)
    cycles = find_deterministic_cycles(build_graph(net))
    assert len(cycles) == 1
    return net, cycles[0]


def random_wall_point(rng, c, k, margin=0.02):
    """Point on wall ``k`` of the cycle with free coordinates away from the wall edges."""
    x = np.empty(len(c.wall_bounds[k]))
    for j, (lo, hi) in enumerate(c.wall_bounds[k]):
        w = hi - lo
        x[j] = lo + w * (margin + (1 - 2 * margin) * rng.random())
    x[c.directions[k]] = c.thresholds[k]
    return x


def fd_jacobian(f, x, free_in, free_out, h):
    """Central differences of ``f`` (one Richardson step) over ``free_in`` -> ``free_out``."""
    coarse = _fd_jacobian(f, x, free_in, free_out, h)
    fine = _fd_jacobian(f, x, free_in, free_out, h / 2)
    return (4 * fine - coarse) / 3


def _fd_jacobian(f, x, free_in, free_out, h):
    jac = np.empty((len(free_out), len(free_in)))
    for col, j in enumerate(free_in):
        e = np.zeros_like(x)
        e[j] = h
        jac[:, col] = (f(x + e)[free_out] - f(x - e)[free_out]) / (2 * h)
    return jac


def fd_hessian(f, x, free_in, free_out, h):
    """Second-order central differences with one Richardson step; ``H[k, m, j]``."""
    coarse = _fd_hessian(f, x, free_in, free_out, h)
    fine = _fd_hessian(f, x, free_in, free_out, h / 2)
    return (4 * fine - coarse) / 3


def _fd_hessian(f, x, free_in, free_out, h):
    m = len(free_in)
    hess = np.empty((len(free_out), m, m))
    for a, i in enumerate(free_in):
        for b, j in enumerate(free_in):
            ei = np.zeros_like(x)
            ej = np.zeros_like(x)
            ei[i] = h
            ej[j] = h
            val = f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            hess[:, a, b] = val[free_out] / (4 * h * h)
    return hess


def max_relative_error(analytic, approx, floor=1e-3):
    """Elementwise relative error.

    Entries below ``floor`` times the largest one are measured against that
    floor, so structurally zero entries are not judged on difference noise.
    """
    analytic = np.asarray(analytic)
    scale = np.max(np.abs(analytic)) or 1.0
    denom = np.maximum(np.abs(analytic), floor * scale)
    return float(np.max(np.abs(analytic - approx) / denom))


def local_step_fd(net, c, k, x, order):
    """Analytic derivative of local map ``k`` of the cycle and its difference estimate."""
    ell = len(c)
    a, sp, s, theta = c.domains[k % ell], c.directions[k - 1], c.directions[k % ell], c.thresholds[k % ell]
    free_in = [j for j in range(net.n) if j != sp]
    free_out = [j for j in range(net.n) if j != s]

    def f(z):
        return local_transition(net, a, z, s, theta).x

    # steps proportional to the distance from the pole of the map at x_s = phi_s
    scale = min(abs(net.focal(a)[s] - x[s]), 1.0)
    if order == 1:
        analytic = local_jacobian(net, a, sp, s, theta, x)
        return analytic, fd_jacobian(f, x, free_in, free_out, 1e-4 * scale)
    analytic = local_second_derivatives(net, a, sp, s, theta, x)
    return analytic, fd_hessian(f, x, free_in, free_out, 3e-3 * scale)
