"""Conservation systems: flux, entropy pair, entropy gradient, wave speeds.

States are numpy arrays whose last axis holds the m conserved components, so
every operation is vectorized over arbitrary leading axes (cells, interfaces,
sample batches). Scalar systems use m = 1.

Entropy pairs (U, F) satisfy the compatibility relation U'(u) f'(u) = F'(u);
for Euler the physical pair U = -rho*S, F = -rho*v*S with S = ln(p rho^-gamma)
is used.
"""

import numpy as np

from .exceptions import InadmissibleStateError

__all__ = [
    "ConservationSystem",
    "LinearAdvection",
    "Burgers",
    "Euler",
    "advection_system",
    "burgers_system",
    "euler_system",
    "primitive_to_conserved",
    "conserved_to_primitive",
]


class ConservationSystem:
    """Interface shared by all systems; immutable value object."""

    m: int = 1
    name: str = "abstract"

    def flux(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def max_signal_speed(self, u_l: np.ndarray, u_r: np.ndarray) -> np.ndarray:
        """Bound on |signal speed| over the two states, shape = leading dims."""
        raise NotImplementedError

    def entropy(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def entropy_flux(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def entropy_gradient(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # Unchecked variants for hot loops that validate states once per stage.
    def flux_raw(self, u):
        return self.flux(u)

    def max_signal_speed_raw(self, u_l, u_r):
        return self.max_signal_speed(u_l, u_r)

    def entropy_raw(self, u):
        return self.entropy(u)

    def entropy_flux_raw(self, u):
        return self.entropy_flux(u)

    def entropy_gradient_raw(self, u):
        return self.entropy_gradient(u)

    def admissible(self, u: np.ndarray) -> np.ndarray:
        """Boolean mask over the leading axes; True where u is admissible."""
        u = np.asarray(u)
        return np.ones(u.shape[:-1], dtype=bool)

    def check_admissible(self, u: np.ndarray, context: str = "state") -> None:
        ok = self.admissible(u)
        if not np.all(ok):
            bad = np.argwhere(~np.atleast_1d(ok))
            where = tuple(int(i) for i in bad[0])
            raise InadmissibleStateError(
                f"inadmissible {self.name} {context} at index {where}", where=where
            )


class LinearAdvection(ConservationSystem):
    """u_t + v u_x = 0 with quadratic entropy U = u^2/2, F = v u^2/2."""

    m = 1
    name = "advection"

    def __init__(self, velocity: float):
        if not np.isfinite(velocity):
            raise ValueError(f"velocity must be finite, got {velocity}")
        self.velocity = float(velocity)

    def flux(self, u):
        return self.velocity * np.asarray(u, dtype=float)

    def max_signal_speed(self, u_l, u_r):
        u_l = np.asarray(u_l, dtype=float)
        return np.full(u_l.shape[:-1], abs(self.velocity))

    def entropy(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u[..., 0] ** 2

    def entropy_flux(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * self.velocity * u[..., 0] ** 2

    def entropy_gradient(self, u):
        return np.asarray(u, dtype=float).copy()


class Burgers(ConservationSystem):
    """u_t + (u^2/2)_x = 0 with U = u^2/2, F = u^3/3."""

    m = 1
    name = "burgers"

    def flux(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u * u

    def max_signal_speed(self, u_l, u_r):
        u_l = np.asarray(u_l, dtype=float)
        u_r = np.asarray(u_r, dtype=float)
        return np.maximum(np.abs(u_l[..., 0]), np.abs(u_r[..., 0]))

    def entropy(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u[..., 0] ** 2

    def entropy_flux(self, u):
        u = np.asarray(u, dtype=float)
        return u[..., 0] ** 3 / 3.0

    def entropy_gradient(self, u):
        return np.asarray(u, dtype=float).copy()


class Euler(ConservationSystem):
    """1D Euler equations for an ideal gas, state u = (rho, rho*v, E).

    Pressure closure p = (gamma - 1)(E - rho v^2 / 2); admissible means
    rho > 0 and p > 0. The entropy is U = -rho*S with S = ln(p rho^-gamma);
    its gradient (derived, since only the pair itself is standard) is

        dU/du = (gamma - S - (gamma-1) rho v^2 / (2p),
                 (gamma-1) rho v / p,
                 -(gamma-1) rho / p).
    """

    m = 3
    name = "euler"

    def __init__(self, gamma: float = 1.4):
        if not gamma > 1.0:
            raise ValueError(f"adiabatic index must exceed 1, got {gamma}")
        self.gamma = float(gamma)

    def pressure(self, u):
        u = np.asarray(u, dtype=float)
        rho, mom, energy = u[..., 0], u[..., 1], u[..., 2]
        return (self.gamma - 1.0) * (energy - 0.5 * mom**2 / rho)

    def sound_speed(self, u):
        return np.sqrt(self.gamma * self.pressure(u) / np.asarray(u)[..., 0])

    def admissible(self, u):
        u = np.asarray(u, dtype=float)
        rho = u[..., 0]
        with np.errstate(all="ignore"):
            p = self.pressure(u)
        return (rho > 0.0) & (p > 0.0) & np.all(np.isfinite(u), axis=-1)

    def flux(self, u):
        u = np.asarray(u, dtype=float)
        self.check_admissible(u, "flux argument")
        return self.flux_raw(u)

    def flux_raw(self, u):
        u = np.asarray(u, dtype=float)
        rho, mom, energy = u[..., 0], u[..., 1], u[..., 2]
        v = mom / rho
        p = (self.gamma - 1.0) * (energy - 0.5 * mom * v)
        return np.stack([mom, mom * v + p, v * (energy + p)], axis=-1)

    def max_signal_speed(self, u_l, u_r):
        u_l = np.asarray(u_l, dtype=float)
        u_r = np.asarray(u_r, dtype=float)
        self.check_admissible(u_l, "left state")
        self.check_admissible(u_r, "right state")
        return self.max_signal_speed_raw(u_l, u_r)

    def max_signal_speed_raw(self, u_l, u_r):
        u_l = np.asarray(u_l, dtype=float)
        u_r = np.asarray(u_r, dtype=float)
        s_l = np.abs(u_l[..., 1] / u_l[..., 0]) + np.sqrt(
            self.gamma * self.pressure(u_l) / u_l[..., 0]
        )
        s_r = np.abs(u_r[..., 1] / u_r[..., 0]) + np.sqrt(
            self.gamma * self.pressure(u_r) / u_r[..., 0]
        )
        return np.maximum(s_l, s_r)

    def _log_entropy(self, u):
        rho = np.asarray(u, dtype=float)[..., 0]
        return np.log(self.pressure(u)) - self.gamma * np.log(rho)

    def entropy(self, u):
        u = np.asarray(u, dtype=float)
        self.check_admissible(u, "entropy argument")
        return self.entropy_raw(u)

    def entropy_raw(self, u):
        u = np.asarray(u, dtype=float)
        return -u[..., 0] * self._log_entropy(u)

    def entropy_flux(self, u):
        u = np.asarray(u, dtype=float)
        self.check_admissible(u, "entropy-flux argument")
        return self.entropy_flux_raw(u)

    def entropy_flux_raw(self, u):
        u = np.asarray(u, dtype=float)
        return -u[..., 1] * self._log_entropy(u)

    def entropy_gradient(self, u):
        u = np.asarray(u, dtype=float)
        self.check_admissible(u, "entropy-gradient argument")
        return self.entropy_gradient_raw(u)

    def entropy_gradient_raw(self, u):
        u = np.asarray(u, dtype=float)
        rho, mom = u[..., 0], u[..., 1]
        v = mom / rho
        p = self.pressure(u)
        s = np.log(p) - self.gamma * np.log(rho)
        g = self.gamma
        return np.stack(
            [
                g - s - (g - 1.0) * rho * v**2 / (2.0 * p),
                (g - 1.0) * rho * v / p,
                -(g - 1.0) * rho / p,
            ],
            axis=-1,
        )


def advection_system(velocity: float) -> LinearAdvection:
    return LinearAdvection(velocity)


def burgers_system() -> Burgers:
    return Burgers()


def euler_system(gamma: float = 1.4) -> Euler:
    return Euler(gamma)


def primitive_to_conserved(rho, v, p, gamma: float = 1.4) -> np.ndarray:
    """(rho, v, p) -> (rho, rho*v, E) with E = p/(gamma-1) + rho v^2/2."""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(rho <= 0.0) or np.any(p <= 0.0):
        raise InadmissibleStateError("primitive state needs rho > 0 and p > 0")
    energy = p / (gamma - 1.0) + 0.5 * rho * v**2
    return np.stack(np.broadcast_arrays(rho, rho * v, energy), axis=-1)


def conserved_to_primitive(u, gamma: float = 1.4):
    """(rho, rho*v, E) -> (rho, v, p); raises on inadmissible input."""
    u = np.asarray(u, dtype=float)
    rho, mom, energy = u[..., 0], u[..., 1], u[..., 2]
    if np.any(rho <= 0.0):
        raise InadmissibleStateError("nonpositive density")
    v = mom / rho
    p = (gamma - 1.0) * (energy - 0.5 * rho * v**2)
    if np.any(p <= 0.0):
        raise InadmissibleStateError("nonpositive pressure")
    return rho, v, p
