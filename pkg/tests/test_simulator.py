import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from numbl.boundary_layer import build_corrector, build_profile
from numbl.initial import constant, gaussian_bump, linear
from numbl.scheme import builtin_scheme
from numbl.simulator import (
    AssumptionError,
    BlowUpError,
    Grid,
    approximate_solution,
    cell_averages,
    convergence_study,
    error_norms,
    exact_interior,
    initial_levels,
    n_steps,
    run,
    scheme_residuals,
    step,
    trace_average,
    weighted_norms,
)

from oracles import simpson


def zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def steps_time(spec, grid, n_step):
    """Final time reached after ``n_step`` calls of ``step``."""
    return (spec.k_levels - 1 + n_step) * grid.dt


def random_data(seed):
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 1.0, 33)
    ys = rng.normal(size=xs.size)
    return lambda x: np.interp(np.asarray(x, dtype=float), xs, ys)


class TestGrid:
    def test_spacing(self):
        g = Grid(216, 0.4)
        assert g.dx == pytest.approx(1 / 216)
        assert g.dt == pytest.approx(0.4 / 216)
        assert g.x[1] == pytest.approx(g.dx)

    def test_invalid(self):
        with pytest.raises(ValueError):
            Grid(0, 0.4)
        with pytest.raises(ValueError):
            Grid(10, -0.4)

    @pytest.mark.parametrize("t,dt,floor,ceil", [
        (0.5, 0.4 / 216, 270, 270), (1.0, 0.3, 3, 4), (0.125, 0.4 / 64, 20, 20), (0.1, 0.03, 3, 4)])
    def test_stopping_rules(self, t, dt, floor, ceil):
        assert n_steps(t, dt, "floor") == floor
        assert n_steps(t, dt, "ceil") == ceil
        with pytest.raises(ValueError):
            n_steps(t, dt, "round")


class TestInitialData:
    def test_constant(self, ab3):
        levels = initial_levels(ab3, Grid(40, 0.4), constant)
        assert levels.shape == (3, 40)
        np.testing.assert_allclose(levels, 1.0, rtol=0, atol=1e-15)

    def test_linear_average(self, ab3):
        g = Grid(50, 0.4)
        np.testing.assert_allclose(initial_levels(ab3, g, linear)[0], g.x + g.dx / 2, atol=1e-15)

    def test_linear_shifted_levels(self, ab3):
        g = Grid(50, 0.4)
        levels = initial_levels(ab3, g, linear)
        for n in range(3):
            np.testing.assert_allclose(levels[n], g.x + g.dx / 2 + n * g.dt, atol=1e-14)

    def test_zero_extension_splits_kink_cell(self):
        g = Grid(4, 0.4)
        avg = cell_averages(constant, 1.0, 0.1, g)
        np.testing.assert_allclose(avg, [0.6, 1.0, 1.0, 1.0], atol=1e-15)

    def test_bump_against_adaptive_oracle(self):
        g = Grid(216, 0.4)
        avg = cell_averages(gaussian_bump, -1.0, 0.0, g)
        ref = np.array([simpson(lambda x: float(np.exp(-100 * (x - 0.5) ** 2)), lo, lo + g.dx) / g.dx
                        for lo in g.x])
        np.testing.assert_allclose(avg, ref, rtol=0, atol=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            cell_averages(lambda x: np.full_like(x, np.nan), -1.0, 0.0, Grid(8, 0.4))


class TestExactData:
    def test_incoming_zero_extension(self):
        assert exact_interior(constant, 1.0, 0.2, 0.5) == 0.0
        assert exact_interior(constant, 1.0, 0.7, 0.5) == 1.0

    def test_linear_substitution(self):
        assert exact_interior(linear, -1.0, 0.25, 0.5) == pytest.approx(0.75)

    def test_bump_trace(self):
        assert exact_interior(gaussian_bump, -1.0, 0.0, 0.5) == pytest.approx(1.0)

    def test_trace_constant_and_linear(self):
        assert trace_average(lambda x: 3.0 * np.ones_like(x), -1.0, 5, 0.01) == pytest.approx(3.0)
        assert trace_average(linear, -1.0, 7, 0.01) == pytest.approx(0.07 + 0.005, abs=1e-15)

    def test_trace_bump_oracle(self):
        dt = 0.4 / 216
        n = int(np.floor(0.5 / dt + 1e-9))
        ref = simpson(lambda t: float(np.exp(-100 * (t - 0.5) ** 2)), n * dt, (n + 1) * dt) / dt
        assert trace_average(gaussian_bump, -1.0, n, dt) == pytest.approx(ref, abs=1e-12)

    def test_trace_incoming_rejected(self):
        with pytest.raises(ValueError):
            trace_average(linear, 1.0, 0, 0.1)


class TestStep:
    def test_upwind_hand_evaluation(self):
        spec = builtin_scheme("upwind", 1.0, 0.5)
        window = np.array([[0.0, 0.0, 1.0, 0.0, 0.0]])
        np.testing.assert_allclose(step(spec, window)[-1], [0.0, 0.0, 0.5, 0.5, 0.0])

    def test_zero_stays_zero(self, ab3):
        out = step(ab3, np.zeros((3, 30)))
        assert out.shape == (3, 30)
        assert np.all(out == 0.0)

    def test_window_shifts(self, ab3):
        rng = np.random.default_rng(0)
        window = rng.normal(size=(3, 20))
        out = step(ab3, window)
        np.testing.assert_array_equal(out[:2], window[1:])

    def test_constant_in_cone(self, ab3):
        window = np.ones((3, 40))
        out = step(ab3, window)
        np.testing.assert_allclose(out[-1, 2:38], 1.0, atol=1e-14)
        assert np.all(out[-1, :2] == 0.0)

    def test_blow_up(self, ab3):
        window = np.zeros((3, 20))
        window[2, 10] = np.inf
        with pytest.raises(BlowUpError) as err:
            step(ab3, window, n=4)
        assert err.value.n == 7


class TestRun:
    def test_zero_solution(self, ab3):
        sol = run(ab3, Grid(64, 0.4), zero, 0.5)
        assert np.all(sol.u == 0.0)

    def test_assumption_guard(self):
        spec = builtin_scheme("leap_frog", -1.0, 0.4)
        with pytest.raises(AssumptionError):
            run(spec, Grid(32, 0.4), gaussian_bump, 0.1)
        run(spec, Grid(32, 0.4), gaussian_bump, 0.1, force=True)

    def test_cfl_mismatch(self, ab3):
        with pytest.raises(ValueError):
            run(ab3, Grid(32, 0.5), gaussian_bump, 0.1)

    def test_floor_and_ceil(self, ab3):
        g = Grid(64, 0.4)
        assert run(ab3, g, gaussian_bump, 0.1).time <= 0.1
        assert run(ab3, g, gaussian_bump, 0.1, stopping="ceil").time >= 0.1

    def test_snapshots_and_history(self, ab3):
        g = Grid(64, 0.4)
        sol = run(ab3, g, gaussian_bump, 0.25, snapshot_times=(0.0, 0.1, 0.25), keep_history=True)
        assert sorted(sol.snapshots) == [0, n_steps(0.1, g.dt), n_steps(0.25, g.dt)]
        assert len(sol.history) == sol.time_index + 1
        np.testing.assert_array_equal(sol.history[-1], sol.u)
        assert len(sol.norms) == sol.time_index + 1

    def test_time_inside_initial_levels(self, ab3):
        g = Grid(64, 0.4)
        sol = run(ab3, g, gaussian_bump, g.dt)
        assert sol.time_index == 1
        np.testing.assert_array_equal(sol.u, initial_levels(ab3, g, gaussian_bump)[1])

    def test_linearity(self, ab3):
        g = Grid(64, 0.4)
        t = steps_time(ab3, g, 200)
        u0, v0 = random_data(1), random_data(2)
        al, be = 1.7, -0.6
        combo = lambda x: al * u0(x) + be * v0(x)
        lhs = run(ab3, g, combo, t).u
        rhs = al * run(ab3, g, u0, t).u + be * run(ab3, g, v0, t).u
        assert np.abs(lhs - rhs).max() <= 1e-10 * max(1.0, np.abs(rhs).max())

    def test_dirichlet_rows(self, ab3):
        g = Grid(64, 0.4)
        sol = run(ab3, g, random_data(3), steps_time(ab3, g, 200), keep_history=True)
        for n, level in enumerate(sol.history):
            if n >= ab3.k_levels:
                assert np.all(level[: ab3.r_left] == 0.0)

    def test_constant_preserved_in_cone(self, ab3):
        g = Grid(2000, 0.4)
        n_step = 200
        sol = run(ab3, g, constant, steps_time(ab3, g, n_step))
        width = n_step * max(ab3.r_left, ab3.p_right)
        inner = sol.u[ab3.r_left + width : g.n_cells - width]
        assert inner.size > 0
        np.testing.assert_allclose(inner, 1.0, rtol=0, atol=1e-12)

    def test_unit_cfl_upwind_is_exact(self):
        spec = builtin_scheme("upwind", 1.0, 1.0)
        res = convergence_study(spec, gaussian_bump, 0.3, [32, 64, 128])
        assert max(res.raw) < 1e-14

    def test_blow_up_flagged(self):
        # the coarse levels survive to T, the finest overflows first
        spec = builtin_scheme("ab3_five_point", -1.0, 4.0)
        res = convergence_study(spec, gaussian_bump, 20.0, [16, 32, 64], force=True)
        assert res.failed_at == 64
        assert res.n_cells == [16, 32]
        assert "non-finite" in res.message

    def test_study_needs_three_levels(self, ab3):
        with pytest.raises(ValueError):
            convergence_study(ab3, gaussian_bump, 0.1, [32, 64])


class TestApproximateSolution:
    def test_initial_levels_reproduced(self, ab3):
        g = Grid(64, 0.4)
        prof = build_corrector(ab3, build_profile(ab3))
        levels = initial_levels(ab3, g, gaussian_bump)
        for n in range(ab3.k_levels):
            np.testing.assert_array_equal(approximate_solution(ab3, prof, gaussian_bump, g, n), levels[n])

    def test_incoming_is_interior(self):
        spec = builtin_scheme("ab3_five_point", 1.0, 0.4)
        g = Grid(64, 0.4)
        prof = build_profile(spec)
        for n in (0, 5, 40):
            np.testing.assert_array_equal(approximate_solution(spec, prof, gaussian_bump, g, n),
                                          cell_averages(gaussian_bump, 1.0, n * g.dt, g))

    def test_zero_data(self, ab3):
        prof = build_profile(ab3)
        out = approximate_solution(ab3, prof, zero, Grid(64, 0.4), 30)
        assert np.all(out == 0.0)

    def test_parts_assemble(self, ab3):
        g = Grid(64, 0.4)
        prof = build_corrector(ab3, build_profile(ab3))
        u_int, bl0, bl1 = approximate_solution(ab3, prof, gaussian_bump, g, 50, parts=True)
        np.testing.assert_allclose(approximate_solution(ab3, prof, gaussian_bump, g, 50),
                                   u_int + bl0 + g.dx * bl1, rtol=0, atol=1e-15)
        # boundary rows: trace times w_j = -trace, corrector rows vanish
        assert bl0[0] == pytest.approx(-trace_average(gaussian_bump, -1.0, 50, g.dt))
        assert bl1[:2] == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_scheme_rows_vanish_for_numerical_solution(self, ab3):
        g = Grid(64, 0.4)
        sol = run(ab3, g, gaussian_bump, 0.3, keep_history=True)
        eps, eta = scheme_residuals(ab3, g, np.array(sol.history))
        assert np.abs(eps).max() < 1e-11
        assert np.all(eta == 0.0)

    def test_residuals_of_approximation_shrink(self, ab3):
        maxima = []
        for n_cells in (64, 128, 256):
            g = Grid(n_cells, 0.4)
            prof = build_corrector(ab3, build_profile(ab3))
            n_final = n_steps(0.5, g.dt)
            traj = np.array([approximate_solution(ab3, prof, gaussian_bump, g, n) for n in range(n_final + 1)])
            _, eta = scheme_residuals(ab3, g, traj)
            maxima.append(np.abs(eta).max())
        assert maxima[1] < 0.6 * maxima[0] and maxima[2] < 0.6 * maxima[1]


class TestNorms:
    def test_equal_vectors(self):
        u = np.arange(5.0)
        assert error_norms(u, u, 0.1) == 0.0

    def test_unit_difference(self):
        n = 40
        assert error_norms(np.ones(n), np.zeros(n), 2.0 / n) == pytest.approx(np.sqrt(2.0))

    def test_mismatch(self):
        with pytest.raises(ValueError):
            error_norms(np.ones(3), np.ones(4), 0.1)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(1e-4, 1.0))
    def test_direct_summation(self, vals, dx):
        u = np.array(vals)
        ref = u[::-1].copy()
        total = 0.0
        for i in reversed(range(u.size)):
            total += (u[i] - ref[i]) ** 2
        assert error_norms(u, ref, dx) == pytest.approx(np.sqrt(dx * total), rel=1e-12, abs=1e-300)

    def test_weighted_zero(self):
        assert weighted_norms(np.zeros((10, 8)), 1.0, 0.1, 0.05, 4) == (0.0, 0.0)

    def test_weighted_single_entry(self):
        e = np.zeros((10, 8))
        e[3, 1] = 1.0
        dx, dt, gamma = 0.1, 0.05, 2.0
        interior, boundary = weighted_norms(e, gamma, dx, dt, 4)
        assert interior == pytest.approx(dt * dx * np.exp(-2 * 3 * gamma * dt))
        assert boundary == pytest.approx(dt * np.exp(-2 * 3 * gamma * dt))
        _, outside = weighted_norms(e, gamma, dx, dt, 1)
        assert outside == 0.0

    def test_weighted_gamma(self):
        with pytest.raises(ValueError):
            weighted_norms(np.zeros((2, 2)), 0.0, 0.1, 0.1, 1)

    def test_weighted_ab3_ratio(self, ab3):
        sums = []
        for n_cells in (64, 128, 256):
            g = Grid(n_cells, 0.4)
            prof = build_corrector(ab3, build_profile(ab3))
            sol = run(ab3, g, gaussian_bump, 0.5, keep_history=True)
            err = [approximate_solution(ab3, prof, gaussian_bump, g, n) - u for n, u in enumerate(sol.history)]
            sums.append(weighted_norms(err, 1.0, g.dx, g.dt, ab3.r_left + ab3.p_right))
        for coarse, fine in zip(sums, sums[1:]):
            # the interior bound scales like dt^2, i.e. a factor 1/4 per refinement
            assert fine[0] <= 0.3 * coarse[0]
            assert fine[1] <= 0.3 * coarse[1]


class TestShowcase:
    def test_ab3_boundary_oscillation(self, ab3):
        g = Grid(216, 0.4)
        sol = run(ab3, g, gaussian_bump, 0.5)
        u_int = cell_averages(gaussian_bump, -1.0, sol.time, g)
        d = (sol.u - u_int)[2:12]
        assert np.all(np.sign(d[1:]) == -np.sign(d[:-1]))
        assert abs(d[0]) > 0.1

    def test_leap_frog_reflected_packet(self):
        spec = builtin_scheme("leap_frog", -1.0, 0.4)
        g = Grid(400, 0.4)
        sol = run(spec, g, gaussian_bump, 1.0, force=True)
        u = sol.u
        peak = int(np.argmax(np.abs(u)))
        assert abs(u[peak]) > 0.5
        assert abs(g.x[peak] - 0.5) < 0.15
        window = u[peak - 5 : peak + 6]
        assert np.all(np.sign(window[1:]) == -np.sign(window[:-1]))

    def test_corrected_beats_raw(self, ab3):
        res = convergence_study(ab3, gaussian_bump, 0.4, [64, 128, 256, 512])
        assert all(c < r for c, r in zip(res.corrected, res.raw))
