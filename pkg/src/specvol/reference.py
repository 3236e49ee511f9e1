"""Reference solvers, exact solutions and error norms.

The workhorse reference is a first-order finite-volume scheme with the
classical (global) Lax-Friedrichs flux on a fine uniform grid, the same
yardstick the shock-tube comparisons use. Smooth and self-similar cases have
closed-form solutions instead.
"""

from dataclasses import dataclass, field

import numpy as np

from .riemann import PeriodicBC
from .systems import ConservationSystem
from .timeint import CellAverageField

__all__ = [
    "ReferenceSolution",
    "lax_friedrichs_solver",
    "exact_advection",
    "exact_burgers_rarefaction",
    "exact_euler_density_bump",
    "error_norms",
    "observed_order",
    "least_squares_order",
]


@dataclass(frozen=True)
class ReferenceSolution:
    positions: np.ndarray = field(repr=False)  # (n,) sorted cell centers
    values: np.ndarray = field(repr=False)  # (n, m)
    provenance: str = "fine-FV"

    def sample(self, x) -> np.ndarray:
        """Componentwise linear interpolation at positions x."""
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape + (self.values.shape[1],))
        for c in range(self.values.shape[1]):
            out[..., c] = np.interp(x, self.positions, self.values[:, c])
        return out


def lax_friedrichs_solver(
    system: ConservationSystem,
    u0,
    a: float,
    b: float,
    n_cells: int,
    cfl: float,
    t_end: float,
    bc,
) -> ReferenceSolution:
    """First-order FV reference with the global Lax-Friedrichs flux.

    Interface flux 0.5(f_l + f_r) - (dx / (2 dt))(u_r - u_l) on a uniform
    grid of midpoint-sampled cells. The step size follows the CFL condition
    against the current maximum signal speed (shock breakup can raise it
    well above the initial value), with a shortened final step onto t_end.
    """
    if n_cells < 10:
        raise ValueError(f"need at least 10 cells, got {n_cells}")
    dx = (b - a) / n_cells
    centers = a + dx * (np.arange(n_cells) + 0.5)
    u = np.stack([np.reshape(np.asarray(u0(x), dtype=float), (system.m,)) for x in centers])
    system.check_admissible(u, "reference initial data")

    periodic = isinstance(bc, PeriodicBC)
    if not periodic:
        ghost_l = np.asarray(bc.left, dtype=float)
        ghost_r = np.asarray(bc.right, dtype=float)
    ext = np.empty((n_cells + 2, system.m))

    t = 0.0
    check_every = 200
    steps = 0
    while t < t_end - 1e-14 * max(t_end, 1.0):
        c_now = float(np.max(system.max_signal_speed_raw(u, u)))
        if c_now <= 0.0:
            break  # nothing propagates; the field is already final
        dt = min(cfl * dx / c_now, t_end - t)
        ext[1:-1] = u
        if periodic:
            ext[0] = u[-1]
            ext[-1] = u[0]
        else:
            ext[0] = ghost_l
            ext[-1] = ghost_r
        f = system.flux_raw(ext)
        lam = dx / (2.0 * dt)
        flux = 0.5 * (f[:-1] + f[1:]) - lam * (ext[1:] - ext[:-1])
        u = u + (dt / dx) * (flux[:-1] - flux[1:])
        t += dt
        steps += 1
        if steps % check_every == 0:
            system.check_admissible(u, f"reference data at t={t:.6g}")
    system.check_admissible(u, "reference final data")
    return ReferenceSolution(positions=centers, values=u, provenance="fine-FV")


def exact_advection(u0, velocity: float, t: float, x, a: float, b: float):
    """Exact periodic advection: u0 evaluated at x - v t wrapped into [a, b]."""
    x = np.asarray(x, dtype=float)
    shifted = a + np.mod(x - velocity * t - a, b - a)
    if x.ndim == 0:
        return u0(float(shifted))
    return np.asarray([u0(float(s)) for s in shifted])


def exact_burgers_rarefaction(t: float, x):
    """Self-similar fan for the step -1 -> 1 at x = 1: valid while inside [0, 2].

    u = -1 for x <= 1 - t, (x - 1)/t inside the fan, 1 for x >= 1 + t.
    """
    x = np.asarray(x, dtype=float)
    if t <= 0.0:
        return np.where(x <= 1.0, -1.0, 1.0)
    return np.clip((x - 1.0) / t, -1.0, 1.0)


def exact_euler_density_bump(t: float, x, gamma: float = 1.4):
    """Advected Gaussian density bump: rho = 1 + exp(-(x-5-t)^2/2), v = p = 1.

    The velocity and pressure stay constant, so the density rides along the
    uniform flow unchanged. Returns primitive (rho, v, p) arrays.
    """
    x = np.asarray(x, dtype=float)
    rho = 1.0 + np.exp(-0.5 * (x - 5.0 - t) ** 2)
    return rho, np.ones_like(rho), np.ones_like(rho)


def _exact_cv_averages(exact, grid, m: int, quad_order: int = 12) -> np.ndarray:
    """Gauss-Legendre cell averages of an exact state function on the grid."""
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    lo = grid.cv_edges[:, :-1]
    hi = grid.cv_edges[:, 1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    out = np.zeros((grid.num_sv, grid.num_cv, m))
    for q, w in zip(nodes, weights):
        pts = mid + half * q
        vals = np.asarray(exact(pts.ravel()), dtype=float).reshape(grid.num_sv, grid.num_cv, m)
        out += 0.5 * w * vals
    return out


def error_norms(
    numerical: CellAverageField, reference, norm: str = "L1", component=None
) -> float:
    """Discrete L1 or L2 distance between a field and a reference.

    ``reference`` is either a callable x -> (n_points, m) of exact states
    (compared through exact CV averages) or a :class:`ReferenceSolution`
    (sampled at CV midpoints). ``component`` restricts the norm to one state
    component; by default all components contribute.
    """
    grid = numerical.grid
    m = numerical.system.m
    if callable(reference):
        ref = _exact_cv_averages(reference, grid, m)
    else:
        ref = reference.sample(grid.cv_centers().ravel()).reshape(grid.num_sv, grid.num_cv, m)
    diff = numerical.data - ref
    if component is not None:
        diff = diff[..., component : component + 1]
    if norm == "L1":
        return float(np.einsum("j,ijc->", grid.cv_widths, np.abs(diff)))
    if norm == "L2":
        return float(np.sqrt(np.einsum("j,ijc,ijc->", grid.cv_widths, diff, diff)))
    raise ValueError(f"unknown norm {norm!r}; use 'L1' or 'L2'")


def observed_order(errors, resolutions) -> np.ndarray:
    """Per-pair experimental order: ln(e1/e2) / ln(N2/N1) for consecutive runs."""
    errors = np.asarray(errors, dtype=float)
    ns = np.asarray(resolutions, dtype=float)
    if errors.size != ns.size or errors.size < 2:
        raise ValueError("need matching error/resolution sequences of length >= 2")
    return np.log(errors[:-1] / errors[1:]) / np.log(ns[1:] / ns[:-1])


def least_squares_order(errors, resolutions) -> float:
    """Slope of -ln(e) against ln(N); the overall convergence order."""
    errors = np.asarray(errors, dtype=float)
    ns = np.asarray(resolutions, dtype=float)
    slope = np.polyfit(np.log(ns), np.log(errors), 1)[0]
    return float(-slope)
