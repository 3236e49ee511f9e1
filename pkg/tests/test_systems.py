import numpy as np
import pytest

from specvol.exceptions import InadmissibleStateError
from specvol.systems import (
    advection_system,
    burgers_system,
    conserved_to_primitive,
    euler_system,
    primitive_to_conserved,
)


def random_states(system, rng, n):
    """Admissible random states, shape (n, m)."""
    if system.m == 1:
        return rng.uniform(-3.0, 3.0, (n, 1))
    rho = rng.uniform(0.1, 3.0, n)
    v = rng.uniform(-2.0, 2.0, n)
    p = rng.uniform(0.05, 4.0, n)
    return primitive_to_conserved(rho, v, p, system.gamma)


def fd_gradient(fn, u, h=1e-6):
    """Central-difference gradient of a scalar fn of an m-vector."""
    grad = np.zeros_like(u)
    for c in range(u.size):
        up, dn = u.copy(), u.copy()
        up[c] += h
        dn[c] -= h
        grad[c] = (fn(up) - fn(dn)) / (2 * h)
    return grad


def fd_jacobian(fn, u, h=1e-6):
    cols = []
    for c in range(u.size):
        up, dn = u.copy(), u.copy()
        up[c] += h
        dn[c] -= h
        cols.append((fn(up) - fn(dn)) / (2 * h))
    return np.stack(cols, axis=-1)


class TestAdvection:
    def test_flux_speed_one(self):
        sys = advection_system(1.0)
        assert sys.flux(np.array([2.0]))[0] == 2.0

    def test_entropy_flux(self):
        sys = advection_system(1.0)
        assert sys.entropy_flux(np.array([2.0])) == pytest.approx(2.0)

    def test_zero_speed(self):
        sys = advection_system(0.0)
        xs = np.linspace(-5, 5, 11)[:, None]
        np.testing.assert_array_equal(sys.flux(xs), np.zeros_like(xs))

    def test_velocity_scales_entropy_flux(self):
        sys = advection_system(-2.5)
        u = np.array([1.5])
        assert sys.entropy_flux(u) == pytest.approx(-2.5 * 1.5**2 / 2)

    def test_nonfinite_velocity_rejected(self):
        with pytest.raises(ValueError):
            advection_system(np.inf)


class TestBurgers:
    def test_cubic_entropy_flux(self):
        assert burgers_system().entropy_flux(np.array([1.0])) == pytest.approx(1 / 3)

    def test_even_flux(self):
        assert burgers_system().flux(np.array([-2.0]))[0] == pytest.approx(2.0)

    def test_signal_speed(self):
        sys = burgers_system()
        assert sys.max_signal_speed(np.array([1.0]), np.array([-1.0])) == 1.0


class TestEuler:
    def test_unit_state_flux(self):
        sys = euler_system(1.4)
        u = primitive_to_conserved(1.0, 0.0, 1.0, 1.4)
        assert u[2] == pytest.approx(2.5)
        np.testing.assert_allclose(sys.flux(u), [0.0, 1.0, 0.0], atol=1e-15)

    def test_unit_state_entropy(self):
        sys = euler_system(1.4)
        u = primitive_to_conserved(1.0, 0.0, 1.0, 1.4)
        assert sys.entropy(u) == pytest.approx(0.0, abs=1e-15)

    def test_gamma_below_one_rejected(self):
        with pytest.raises(ValueError):
            euler_system(1.0)

    def test_inadmissible_flux_raises_with_location(self):
        sys = euler_system()
        states = np.stack(
            [primitive_to_conserved(1.0, 0.0, 1.0), np.array([1.0, 0.0, -1.0])]
        )
        with pytest.raises(InadmissibleStateError) as err:
            sys.flux(states)
        assert err.value.where == (1,)

    def test_entropy_gradient_matches_finite_differences(self):
        sys = euler_system(1.4)
        rng = np.random.default_rng(11)
        states = random_states(sys, rng, 200)
        grads = sys.entropy_gradient(states)
        for u, g in zip(states, grads):
            fd = fd_gradient(lambda w: float(sys.entropy(w)), u)
            np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-7)


class TestEntropyPairCompatibility:
    @pytest.mark.parametrize(
        "make", [lambda: advection_system(1.7), burgers_system, euler_system]
    )
    def test_gradient_chain_rule(self, make):
        system = make()
        rng = np.random.default_rng(5)
        states = random_states(system, rng, 1000)
        for u in states:
            du = system.entropy_gradient(u)
            jac = fd_jacobian(lambda w: system.flux(w), u)
            df = fd_gradient(lambda w: float(system.entropy_flux(w)), u)
            scale = max(1.0, np.max(np.abs(df)))
            np.testing.assert_allclose(du @ jac, df, atol=1e-5 * scale)

    @pytest.mark.parametrize(
        "make", [lambda: advection_system(1.0), burgers_system, euler_system]
    )
    def test_entropy_convexity(self, make):
        system = make()
        rng = np.random.default_rng(17)
        u1 = random_states(system, rng, 400)
        u2 = random_states(system, rng, 400)
        theta = rng.uniform(0.0, 1.0, 400)
        mix = theta[:, None] * u1 + (1 - theta[:, None]) * u2
        ok = system.admissible(mix)
        lhs = system.entropy(mix[ok])
        rhs = theta[ok] * system.entropy(u1[ok]) + (1 - theta[ok]) * system.entropy(u2[ok])
        assert np.all(lhs <= rhs + 1e-12)

    @pytest.mark.parametrize(
        "make", [lambda: advection_system(2.0), burgers_system, euler_system]
    )
    def test_flux_finite_on_admissible_states(self, make):
        system = make()
        rng = np.random.default_rng(23)
        states = random_states(system, rng, 500)
        assert np.all(np.isfinite(system.flux(states)))


class TestPrimitiveConversions:
    def test_unit_energy(self):
        u = primitive_to_conserved(1.0, 0.0, 1.0, 1.4)
        assert u[2] == pytest.approx(2.5)

    def test_lax_left_state(self):
        u = primitive_to_conserved(0.445, 0.698, 3.528, 1.4)
        assert u[1] == pytest.approx(0.31061, abs=1e-6)
        assert u[2] == pytest.approx(3.528 / 0.4 + 0.5 * 0.445 * 0.698**2, rel=1e-13)

    def test_round_trip(self):
        rng = np.random.default_rng(29)
        rho = rng.uniform(0.1, 5.0, 300)
        v = rng.uniform(-3.0, 3.0, 300)
        p = rng.uniform(0.01, 5.0, 300)
        r2, v2, p2 = conserved_to_primitive(primitive_to_conserved(rho, v, p), 1.4)
        np.testing.assert_allclose(r2, rho, rtol=1e-13)
        np.testing.assert_allclose(v2, v, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(p2, p, rtol=1e-13)

    @pytest.mark.parametrize("rho, p", [(-1.0, 1.0), (0.0, 1.0), (1.0, -0.5), (1.0, 0.0)])
    def test_nonpositive_primitive_rejected(self, rho, p):
        with pytest.raises(InadmissibleStateError):
            primitive_to_conserved(rho, 0.0, p)

    def test_nonpositive_pressure_in_conserved_rejected(self):
        with pytest.raises(InadmissibleStateError):
            conserved_to_primitive(np.array([1.0, 0.0, -2.0]), 1.4)
