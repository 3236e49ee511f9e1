import numpy as np
import pytest

from specvol.exceptions import DegenerateSpeedError
from specvol.filters import build_generator
from specvol.mesh import build_grid
from specvol.reconstruction import build_reconstruction
from specvol.riemann import FixedBC, PeriodicBC
from specvol.systems import advection_system, burgers_system, euler_system, primitive_to_conserved
from specvol.timeint import (
    SolverConfig,
    base_rhs,
    discrete_l2,
    euler_adapted,
    init_field,
    integrate,
    select_dt,
    ssp_rk3_step,
)


def setup_burgers(n_sv=20, k=4, domain=(0.0, 2.0)):
    grid = build_grid(domain[0], domain[1], n_sv, k)
    system = burgers_system()
    state = init_field(lambda x: np.sin(np.pi * x), grid, system, 8)
    return grid, system, state, build_reconstruction(grid), build_generator(grid.cv_widths)


class TestInitField:
    def test_constant(self):
        grid = build_grid(0.0, 1.0, 3, 4)
        state = init_field(lambda x: 2.5, grid, advection_system(1.0))
        np.testing.assert_allclose(state.data, 2.5, atol=1e-14)

    def test_linear_gives_midpoints(self):
        grid = build_grid(0.0, 1.0, 4, 4)
        state = init_field(lambda x: x, grid, advection_system(1.0))
        np.testing.assert_allclose(state.data[..., 0], grid.cv_centers(), atol=1e-14)

    def test_rectangle_jump_aligned_grid(self):
        grid = build_grid(0.0, 1.0, 60, 4)
        state = init_field(
            lambda x: 1.0 if 0.25 <= x <= 0.75 else 0.0,
            grid,
            advection_system(1.0),
            breakpoints=(0.25, 0.75),
        )
        vals = state.data[..., 0]
        # jumps at 0.25 and 0.75 coincide with SV boundaries at N=60
        assert set(np.round(np.unique(vals), 12)) == {0.0, 1.0}

    def test_breakpoints_make_straddling_cells_exact(self):
        grid = build_grid(0.0, 1.0, 7, 4)  # 0.25 falls inside a CV
        u0 = lambda x: 1.0 if 0.25 <= x <= 0.75 else 0.0
        state = init_field(u0, grid, advection_system(1.0), breakpoints=(0.25, 0.75))
        lo, hi = grid.cv_edges[:, :-1], grid.cv_edges[:, 1:]
        exact = (np.minimum(hi, 0.75) - np.maximum(lo, 0.25)).clip(0.0) / (hi - lo)
        np.testing.assert_allclose(state.data[..., 0], exact, atol=1e-13)

    def test_total_mass_is_integral(self):
        grid = build_grid(0.0, 2.0, 11, 4)
        state = init_field(lambda x: np.sin(np.pi * x), grid, burgers_system(), 8)
        assert state.total_mass()[0] == pytest.approx(0.0, abs=1e-13)


class TestBaseRhs:
    def test_constant_field_zero(self):
        grid, system, state, op, _ = setup_burgers()
        state = state.with_data(np.full_like(state.data, 1.7))
        rhs = base_rhs(state.data, op, system, PeriodicBC(), grid.cv_widths)
        np.testing.assert_allclose(rhs, 0.0, atol=1e-13)

    def test_periodic_total_telescopes(self):
        grid, system, state, op, _ = setup_burgers()
        rhs = base_rhs(state.data, op, system, PeriodicBC(), grid.cv_widths)
        assert abs(np.einsum("j,ijc->", grid.cv_widths, rhs)) <= 1e-12


class TestEulerAdapted:
    def test_constant_field_fixed_point(self):
        grid, system, state, op, gen = setup_burgers()
        state = state.with_data(np.full_like(state.data, 0.8))
        cfg = SolverConfig(t_end=1.0, bc=PeriodicBC())
        new, rep = euler_adapted(state, 1e-3, op, gen, cfg)
        np.testing.assert_allclose(new.data, 0.8, atol=1e-13)
        np.testing.assert_allclose(rep.lambda_final, 0.0, atol=1e-13)

    def test_mass_conserved(self):
        grid, system, state, op, gen = setup_burgers()
        cfg = SolverConfig(t_end=1.0, bc=PeriodicBC())
        new, _ = euler_adapted(state, 1e-3, op, gen, cfg)
        np.testing.assert_allclose(
            new.total_mass(), state.total_mass(), atol=1e-12
        )

    def test_stabilization_off_skips_report(self):
        grid, system, state, op, gen = setup_burgers()
        cfg = SolverConfig(t_end=1.0, bc=PeriodicBC(), stabilization_enabled=False)
        _, rep = euler_adapted(state, 1e-3, op, gen, cfg)
        assert rep is None

    def test_nonpositive_dt_rejected(self):
        grid, system, state, op, gen = setup_burgers()
        cfg = SolverConfig(t_end=1.0, bc=PeriodicBC())
        with pytest.raises(ValueError):
            euler_adapted(state, 0.0, op, gen, cfg)


class TestSspRk3:
    def test_constant_fixed_point(self):
        grid, system, state, op, gen = setup_burgers()
        state = state.with_data(np.full_like(state.data, -0.4))
        cfg = SolverConfig(t_end=1.0, bc=PeriodicBC())
        new, _ = ssp_rk3_step(state, 1e-3, op, gen, cfg)
        np.testing.assert_allclose(new.data, -0.4, atol=1e-13)
        assert new.time == pytest.approx(1e-3)

    def test_third_order_in_time(self):
        # smooth advection; Richardson: halving dt cuts the new-error by ~8
        grid = build_grid(0.0, 1.0, 16, 4)
        system = advection_system(1.0)
        state = init_field(lambda x: np.sin(2 * np.pi * x), grid, system, 10)
        op = build_reconstruction(grid)
        gen = build_generator(grid.cv_widths)
        cfg = SolverConfig(t_end=1.0, bc=PeriodicBC(), stabilization_enabled=False)

        def advance(dt, steps):
            s = state
            for _ in range(steps):
                s, _ = ssp_rk3_step(s, dt, op, gen, cfg)
            return s.data

        ref = advance(0.0025, 16)  # fine-dt proxy for the dt -> 0 limit
        err_coarse = np.max(np.abs(advance(0.02, 2) - ref))
        err_fine = np.max(np.abs(advance(0.01, 4) - ref))
        order = np.log2(err_coarse / err_fine)
        assert order > 2.5

    def test_conservation_over_steps(self):
        grid, system, state, op, gen = setup_burgers(n_sv=30)
        cfg = SolverConfig(t_end=1.0, bc=PeriodicBC())
        dt = select_dt(grid, state, system, 0.1)
        s = state
        for _ in range(20):
            s, _ = ssp_rk3_step(s, dt, op, gen, cfg)
        np.testing.assert_allclose(s.total_mass(), state.total_mass(), atol=1e-12)


class TestSelectDt:
    def test_advection_formula(self):
        grid = build_grid(0.0, 1.0, 60, 4)
        system = advection_system(1.0)
        state = init_field(lambda x: 1.0, grid, system)
        assert select_dt(grid, state, system, 0.1) == pytest.approx(
            0.1 * grid.cv_widths.min(), rel=1e-14
        )

    def test_speed_doubling_halves_dt(self):
        grid = build_grid(0.0, 1.0, 10, 4)
        s1 = advection_system(1.0)
        s2 = advection_system(2.0)
        state = init_field(lambda x: 1.0, grid, s1)
        assert select_dt(grid, state, s2, 0.1) == pytest.approx(
            0.5 * select_dt(grid, state, s1, 0.1), rel=1e-14
        )

    def test_sod_sound_speed(self):
        grid = build_grid(0.0, 10.0, 20, 4)
        system = euler_system(1.4)
        u0 = lambda x: (
            primitive_to_conserved(1.0, 0.0, 1.0)
            if x < 5
            else primitive_to_conserved(0.125, 0.0, 0.1)
        )
        state = init_field(u0, grid, system, 8, (5.0,))
        expected = 0.1 * grid.cv_widths.min() / np.sqrt(1.4)
        assert select_dt(grid, state, system, 0.1) == pytest.approx(expected, rel=1e-12)

    def test_zero_speed_advection_allowed(self):
        grid = build_grid(0.0, 1.0, 5, 4)
        system = advection_system(0.0)
        state = init_field(lambda x: x, grid, system)
        assert select_dt(grid, state, system, 0.1) == pytest.approx(
            0.1 * grid.cv_widths.min()
        )

    def test_zero_speed_nonlinear_rejected(self):
        grid = build_grid(0.0, 1.0, 5, 4)
        system = burgers_system()
        state = init_field(lambda x: 0.0, grid, system)
        with pytest.raises(DegenerateSpeedError):
            select_dt(grid, state, system, 0.1)


class TestIntegrate:
    def test_lands_exactly_on_t_end(self):
        grid, system, state, op, gen = setup_burgers(n_sv=10)
        cfg = SolverConfig(t_end=0.0371, cfl=0.1, bc=PeriodicBC())
        final, _ = integrate(state, cfg, op, gen)
        assert final.time == 0.0371

    def test_bitwise_deterministic(self):
        results = []
        for _ in range(2):
            grid, system, state, op, gen = setup_burgers(n_sv=15)
            cfg = SolverConfig(t_end=0.05, cfl=0.1, bc=PeriodicBC())
            final, _ = integrate(state, cfg, op, gen)
            results.append(final.data.copy())
        np.testing.assert_array_equal(results[0], results[1])

    def test_conservation_with_and_without_stabilization(self):
        for stab in (False, True):
            grid, system, state, op, gen = setup_burgers(n_sv=25)
            cfg = SolverConfig(t_end=0.1, cfl=0.1, bc=PeriodicBC(), stabilization_enabled=stab)
            final, _ = integrate(state, cfg, op, gen)
            drift = np.abs(final.total_mass() - state.total_mass())
            assert np.all(drift <= 1e-12)

    @pytest.mark.parametrize("name", ["advection", "burgers", "euler"])
    @pytest.mark.parametrize("stab", [False, True])
    def test_conservation_all_systems(self, name, stab):
        if name == "euler":
            grid = build_grid(0.0, 10.0, 12, 4)
            system = euler_system(1.4)
            u0 = lambda x: primitive_to_conserved(1.0 + np.exp(-0.5 * (x - 5.0) ** 2), 1.0, 1.0)
        else:
            grid = build_grid(0.0, 2.0, 12, 4)
            system = advection_system(1.0) if name == "advection" else burgers_system()
            u0 = lambda x: np.sin(np.pi * x)
        state = init_field(u0, grid, system, 8)
        cfg = SolverConfig(t_end=0.05, cfl=0.1, bc=PeriodicBC(), stabilization_enabled=stab)
        final, _ = integrate(state, cfg)
        scale = np.maximum(1.0, np.abs(state.total_mass()))
        assert np.all(np.abs(final.total_mass() - state.total_mass()) / scale <= 1e-12)

    def test_fixed_bc_burgers_step(self):
        grid = build_grid(0.0, 2.0, 40, 4)
        system = burgers_system()
        state = init_field(lambda x: -1.0 if x <= 1.0 else 1.0, grid, system, 8, (1.0,))
        bc = FixedBC(left=np.array([-1.0]), right=np.array([1.0]))
        cfg = SolverConfig(t_end=0.2, cfl=0.1, bc=bc)
        final, _ = integrate(state, cfg)
        assert final.data[0, 0, 0] == pytest.approx(-1.0, abs=1e-10)
        assert final.data[-1, -1, 0] == pytest.approx(1.0, abs=1e-10)

    def test_l2_diagnostics_recorded(self):
        grid, system, state, op, gen = setup_burgers(n_sv=10)
        cfg = SolverConfig(t_end=0.02, cfl=0.1, bc=PeriodicBC(), diagnostics_every=5)
        final, diag = integrate(state, cfg, op, gen)
        assert len(diag.l2_times) >= 2
        assert diag.l2_times[0] == 0.0
        assert diag.l2_times[-1] == pytest.approx(0.02)
        assert diag.l2_values[0] == pytest.approx(discrete_l2(state))
