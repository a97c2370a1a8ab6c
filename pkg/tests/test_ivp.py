import math

import numpy as np
import pytest

from confcalc.core import (
    DomainError,
    EvaluationError,
    IvpSpec,
    LowerTerminal,
    Method,
    NonConvergence,
    Order,
    StepFailure,
    Trajectory,
    Interpolation,
    SolverMeta,
)
from confcalc.ivp import (
    linear_closed_form,
    regularize,
    residual,
    solve,
    solve_direct_singular,
    solve_picard,
    solve_regularized,
)

E2 = math.exp(2.0)


def make_spec(F, alpha=0.5, a=0.0, x0=1.0, T=1.0, tol=1e-8, method=Method.REGULARIZED):
    return IvpSpec(a=LowerTerminal(a), alpha=Order(alpha), x0=x0, F=F,
                   horizon_T=T, method=method, tol=tol)


class TestRegularize:
    def test_alpha_one_identity(self):
        spec = make_spec(lambda t, x: math.sin(t) + x, alpha=1.0, a=2.0, T=5.0)
        prob = regularize(spec)
        assert prob.u_end == pytest.approx(3.0)
        # right side passes through unchanged (1/alpha = 1, t = a + u)
        assert prob.rhs(1.0, 0.5) == pytest.approx(math.sin(3.0) + 0.5)
        assert prob.to_t(1.5) == pytest.approx(3.5)

    def test_linear_right_side_scaling(self):
        lam = 3.0
        spec = make_spec(lambda t, x: lam * x, alpha=0.5, T=4.0)
        prob = regularize(spec)
        assert prob.rhs(0.3, 2.0) == pytest.approx(2.0 * lam * 2.0)
        assert prob.u_end == pytest.approx(2.0)  # sqrt(T)

    def test_constant_right_side_example(self):
        spec = make_spec(lambda t, x: 1.0, alpha=0.5, x0=0.5, T=4.0)
        prob = regularize(spec)
        # dx/du = 2 on [0, 2]: x(u) = x0 + 2u, i.e. x(t) = x0 + 2 sqrt(t)
        assert prob.rhs(1.0, 0.0) == pytest.approx(2.0)
        assert prob.u_end == pytest.approx(2.0)
        assert prob.to_u(4.0) == pytest.approx(2.0)


class TestSolveRegularized:
    def test_linear_half_order_reaches_e_squared(self):
        traj = solve_regularized(make_spec(lambda t, x: x))
        assert traj.evaluate(1.0) == pytest.approx(E2, abs=1e-6)

    def test_zero_right_side_constant(self):
        traj = solve_regularized(make_spec(lambda t, x: 0.0, x0=2.5))
        for t in (0.0, 0.3, 1.0):
            assert traj.evaluate(t) == pytest.approx(2.5, abs=1e-12)

    def test_constant_right_side(self):
        traj = solve_regularized(make_spec(lambda t, x: 1.0, x0=0.0, T=4.0))
        assert traj.evaluate(4.0) == pytest.approx(4.0, abs=1e-8)

    def test_initial_condition_exact(self):
        traj = solve_regularized(make_spec(lambda t, x: x, x0=3.25))
        assert traj.ts[0] == 0.0
        assert traj.xs[0] == 3.25

    def test_sample_points_embedded(self):
        grid = np.linspace(0.0, 1.0, 11)
        traj = solve_regularized(make_spec(lambda t, x: x), sample_at=grid)
        closed = linear_closed_form(1.0, 0.0, 0.5, 1.0)
        for t in grid[1:]:
            assert traj.evaluate(float(t)) == pytest.approx(closed(t), abs=1e-7)

    def test_closed_form_agreement_along_path(self):
        spec = make_spec(lambda t, x: 2.0 * x, alpha=0.75, T=2.0)
        closed = linear_closed_form(2.0, 0.0, 0.75, 1.0)
        traj = solve_regularized(spec)
        for t in (0.25, 0.9, 1.7):
            assert traj.evaluate(t) == pytest.approx(closed(t), rel=1e-7)

    def test_alpha_one_matches_scipy_reference(self):
        import scipy.integrate
        spec = make_spec(lambda t, x: math.sin(t) * x, alpha=1.0, T=3.0, tol=1e-10)
        traj = solve_regularized(spec)
        ref = scipy.integrate.solve_ivp(
            lambda t, y: [math.sin(t) * y[0]], (0.0, 3.0), [1.0],
            rtol=1e-11, atol=1e-12, dense_output=True)
        for t in (0.5, 1.5, 3.0):
            assert traj.evaluate(t) == pytest.approx(float(ref.sol(t)[0]), rel=1e-7)

    def test_step_failure_on_blowup(self):
        # x' = x^2 with x(0)=3 blows up at t = 1/3 < T
        spec = make_spec(lambda t, x: x * x, alpha=1.0, x0=3.0, T=1.0)
        with pytest.raises((StepFailure, EvaluationError, OverflowError)):
            solve_regularized(spec)

    def test_non_finite_rhs_raises(self):
        spec = make_spec(lambda t, x: math.nan, alpha=0.5)
        with pytest.raises(EvaluationError):
            solve_regularized(spec)


class TestSolvePicard:
    def test_e_squared_grid_256(self):
        traj = solve_picard(make_spec(lambda t, x: x), grid_n=256)
        assert traj.evaluate(1.0) == pytest.approx(E2, abs=1e-5)

    def test_zero_right_side_single_iteration(self):
        traj = solve_picard(make_spec(lambda t, x: 0.0, x0=4.0), grid_n=32)
        assert traj.meta.iterations == 1
        assert traj.evaluate(0.7) == pytest.approx(4.0, abs=1e-14)

    def test_time_dependent_right_side(self):
        # F = t: x(1) = int_0^1 s^(-1/2) s ds = 2/3
        traj = solve_picard(make_spec(lambda t, x: t, x0=0.0), grid_n=256)
        assert traj.evaluate(1.0) == pytest.approx(2.0 / 3.0, abs=1e-6)

    def test_grid_minimum_enforced(self):
        with pytest.raises(ValueError):
            solve_picard(make_spec(lambda t, x: x), grid_n=8)

    def test_nonconvergence_carries_last_change(self):
        spec = make_spec(lambda t, x: x, tol=1e-30)
        with pytest.raises(NonConvergence) as exc:
            solve_picard(spec, grid_n=32, max_iters=5)
        assert math.isfinite(exc.value.last_change)
        assert exc.value.last_change > 1e-30

    def test_initial_condition_exact(self):
        traj = solve_picard(make_spec(lambda t, x: x, x0=-1.5), grid_n=64)
        assert traj.xs[0] == -1.5


class TestSolveDirectSingular:
    def test_constant_trajectory_any_epsilon(self):
        for eps in (1e-4, 1e-2, 0.1):
            traj = solve_direct_singular(make_spec(lambda t, x: 0.0, x0=1.25),
                                         epsilon_frac=eps)
            assert traj.evaluate(1.0) == pytest.approx(1.25, abs=1e-10)

    def test_e_squared_within_loose_tolerance(self):
        traj = solve_direct_singular(make_spec(lambda t, x: x), epsilon_frac=1e-4)
        assert traj.evaluate(1.0) == pytest.approx(E2, abs=1e-3)

    def test_power_closed_form(self):
        # F = 1, alpha = 3/4: x(t) = t^alpha / alpha; x(1) = 4/3
        traj = solve_direct_singular(
            make_spec(lambda t, x: 1.0, alpha=0.75, x0=0.0), epsilon_frac=1e-4)
        assert traj.evaluate(1.0) == pytest.approx(4.0 / 3.0, abs=1e-4)

    def test_epsilon_range_enforced(self):
        with pytest.raises(ValueError):
            solve_direct_singular(make_spec(lambda t, x: x), epsilon_frac=0.5)
        with pytest.raises(ValueError):
            solve_direct_singular(make_spec(lambda t, x: x), epsilon_frac=0.0)


BATTERY_F = [
    ("lam*x", lambda t, x: x),
    ("1", lambda t, x: 1.0),
    ("t", lambda t, x: t),
    ("t*x", lambda t, x: t * x),
    ("sin(t)", lambda t, x: math.sin(t)),
]
BATTERY_ALPHA = [0.3, 0.5, 0.75, 1.0]


class TestMethodAgreement:
    @pytest.mark.parametrize("alpha", BATTERY_ALPHA)
    @pytest.mark.parametrize("name,F", BATTERY_F)
    def test_pairwise_agreement(self, name, F, alpha):
        spec = make_spec(F, alpha=alpha, tol=1e-6)
        grid = np.linspace(0.0, 1.0, 101)
        reg = solve_regularized(spec, sample_at=grid)
        pic = solve_picard(spec, grid_n=1024, sample_at=grid)
        diro = solve_direct_singular(spec, epsilon_frac=1e-4, sample_at=grid)
        vr = reg.evaluate_many(grid)
        vp = pic.evaluate_many(grid)
        vd = diro.evaluate_many(grid)
        assert np.max(np.abs(vr - vp)) <= 1e-4, name
        assert np.max(np.abs(vr - vd)) <= 1e-3, name

    @pytest.mark.parametrize("alpha", [0.3, 0.75])
    def test_residual_within_budget(self, alpha):
        spec = make_spec(lambda t, x: t * x, alpha=alpha, tol=1e-6)
        pts = np.linspace(0.01, 1.0, 25)
        reg = solve_regularized(spec)
        pic = solve_picard(spec, grid_n=1024)
        assert residual(reg, spec, pts) <= 50 * spec.tol
        assert residual(pic, spec, pts) <= 50 * spec.tol


class TestResidual:
    def test_exact_closed_form_small_residual(self):
        # trajectory sampled from the exact solution on a u-graded fine grid
        lam, alpha = 1.0, 0.5
        spec = make_spec(lambda t, x: lam * x, alpha=alpha, tol=1e-6)
        closed = linear_closed_form(lam, 0.0, alpha, 1.0)
        us = np.linspace(0.0, 1.0, 2001)
        ts = us ** (1.0 / alpha)
        xs = np.array([closed(t) for t in ts])
        traj = Trajectory(ts, xs, Interpolation.CUBIC_LOCAL, SolverMeta("exact"))
        pts = np.linspace(0.05, 1.0, 20)
        assert residual(traj, spec, pts) <= 1e-6

    def test_constant_zero_residual(self):
        spec = make_spec(lambda t, x: 0.0, x0=2.0)
        traj = solve_regularized(spec)
        pts = np.linspace(0.1, 1.0, 10)
        assert residual(traj, spec, pts) == pytest.approx(0.0, abs=1e-11)

    def test_corrupted_trajectory_detected(self):
        # additive defect: for F = lam x the residual scales like lam * delta
        lam, delta = 1.0, 0.1
        spec = make_spec(lambda t, x: lam * x, tol=1e-8)
        traj = solve_regularized(spec)
        bad = Trajectory(traj.ts, traj.xs + delta, traj.interpolation, traj.meta)
        pts = np.linspace(0.1, 1.0, 10)
        assert residual(bad, spec, pts) > 1e-2
        assert residual(bad, spec, pts) == pytest.approx(lam * delta, rel=0.2)

    def test_sample_below_terminal_rejected(self):
        spec = make_spec(lambda t, x: x)
        traj = solve_regularized(spec)
        with pytest.raises(DomainError):
            residual(traj, spec, [-0.5])


class TestEquivalenceDirection:
    @pytest.mark.parametrize("alpha", [0.5, 0.75])
    def test_estimator_recovers_rhs_from_solution(self, alpha):
        # applying the derivative estimator to the interpolated solution
        # reproduces F(t, x(t)): the converse direction of the reduction
        from confcalc.deriv import conformable_derivative
        from confcalc.core import ScalarFunction, Verdict
        spec = make_spec(lambda t, x: x, alpha=alpha, tol=1e-10)
        traj = solve_regularized(spec)
        xfun = ScalarFunction(traj.evaluate, 0.0, "x(t)")
        for t in (0.3, 0.6, 0.9):
            est = conformable_derivative(xfun, 0.0, alpha, t)
            assert est.verdict is Verdict.EXISTS
            assert abs(est.value - traj.evaluate(t)) <= 1e-3


class TestLinearClosedForm:
    def test_zero_rate_constant(self):
        f = linear_closed_form(0.0, 0.0, 0.5, 3.0)
        assert f(2.0) == 3.0

    def test_alpha_one_ordinary_exponential(self):
        f = linear_closed_form(1.0, 0.0, 1.0, 1.0)
        assert f(2.0) == pytest.approx(math.exp(2.0), rel=1e-14)

    def test_e_squared_value(self):
        f = linear_closed_form(1.0, 0.0, 0.5, 1.0)
        assert f(1.0) == pytest.approx(7.3890560989306495, rel=1e-12)

    def test_satisfies_equation_by_substitution(self):
        lam, a, alpha = -0.7, 1.0, 0.3
        f = linear_closed_form(lam, a, alpha, 2.0)
        from oracles import conformable_derivative_oracle
        for t in (1.5, 2.5):
            lhs = conformable_derivative_oracle(f, a, alpha, t)
            assert lhs == pytest.approx(lam * f(t), rel=1e-7)


class TestDispatch:
    def test_method_routing(self):
        for method, cls in [(Method.REGULARIZED, "regularized"),
                            (Method.PICARD, "picard"),
                            (Method.DIRECT_SINGULAR, "direct")]:
            spec = make_spec(lambda t, x: 0.0, method=method)
            traj = solve(spec)
            assert traj.meta.method == cls
