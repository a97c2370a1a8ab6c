import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from confcalc.core import (
    CaseResult,
    DerivativeEstimate,
    DomainError,
    Interpolation,
    IvpSpec,
    LowerTerminal,
    Order,
    ScalarFunction,
    SpecError,
    Trajectory,
    Verdict,
    VerificationReport,
)


class TestOrder:
    @pytest.mark.parametrize("alpha", [0.0, -0.3, 1.0000001, 2.0, math.nan, math.inf])
    def test_rejects_out_of_range(self, alpha):
        with pytest.raises(DomainError):
            Order(alpha)

    @pytest.mark.parametrize("alpha", [1e-9, 0.25, 0.5, 1.0])
    def test_accepts_valid(self, alpha):
        assert Order(alpha).alpha == alpha

    @given(st.floats(allow_nan=True, allow_infinity=True))
    def test_never_constructs_invalid(self, alpha):
        try:
            order = Order(alpha)
        except DomainError:
            return
        assert 0.0 < order.alpha <= 1.0


class TestLowerTerminal:
    def test_any_finite_sign(self):
        assert LowerTerminal(-5.0).a == -5.0
        assert LowerTerminal(3.25).a == 3.25

    @pytest.mark.parametrize("a", [math.nan, math.inf, -math.inf])
    def test_rejects_nonfinite(self, a):
        with pytest.raises(DomainError):
            LowerTerminal(a)


class TestScalarFunction:
    def test_undefined_maps_to_none(self):
        f = ScalarFunction(math.sqrt, domain_start=0.0)
        assert f.eval_defined(4.0) == 2.0
        assert f.eval_defined(-1.0) is None   # below domain_start
        g = ScalarFunction(math.sqrt)
        assert g.eval_defined(-1.0) is None   # math domain error

    def test_nonfinite_result_is_undefined(self):
        f = ScalarFunction(lambda t: 1.0 / t if t != 0 else math.inf)
        assert f.eval_defined(0.0) is None

    def test_raw_call_passthrough(self):
        f = ScalarFunction(lambda t: t * 2)
        assert f(3.0) == 6.0


class TestDerivativeEstimate:
    def test_exists_requires_value(self):
        with pytest.raises(ValueError):
            DerivativeEstimate(value=None, error_estimate=0.0, verdict=Verdict.EXISTS)

    def test_mismatch_requires_sides(self):
        with pytest.raises(ValueError):
            DerivativeEstimate(value=None, error_estimate=1.0,
                               verdict=Verdict.LEFT_RIGHT_MISMATCH, left_value=1.0)

    def test_to_dict_field_order(self):
        est = DerivativeEstimate(value=1.0, error_estimate=1e-9, verdict=Verdict.EXISTS,
                                 left_value=1.0, right_value=1.0)
        assert list(est.to_dict()) == [
            "value", "error_estimate", "verdict", "left_value", "right_value"]


class TestIvpSpec:
    def good(self, **over):
        kw = dict(a=LowerTerminal(0.0), alpha=Order(0.5), x0=1.0,
                  F=lambda t, x: x, horizon_T=1.0, tol=1e-8)
        kw.update(over)
        return IvpSpec(**kw)

    def test_valid(self):
        assert self.good().horizon_T == 1.0

    def test_collects_all_problems(self):
        with pytest.raises(SpecError) as exc:
            self.good(horizon_T=-1.0, tol=-2.0, x0=math.nan)
        msgs = exc.value.problems
        assert len(msgs) == 3
        assert any("horizon_T" in m for m in msgs)
        assert any("tol" in m for m in msgs)
        assert any("x0" in m for m in msgs)


class TestTrajectory:
    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 1.0, 1.0]), np.array([0.0, 1.0, 2.0]))
        with pytest.raises(ValueError):
            Trajectory(np.array([0.0, 2.0, 1.0]), np.array([0.0, 1.0, 2.0]))

    def test_linear_interpolation(self):
        tr = Trajectory(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 4.0]),
                        Interpolation.LINEAR)
        assert tr.evaluate(0.5) == 1.0

    def test_cubic_beats_linear_on_smooth_data(self):
        ts = np.linspace(0.0, math.pi, 21)
        xs = np.sin(ts)
        mid = 0.5 * (ts[3] + ts[4])
        lin = Trajectory(ts, xs, Interpolation.LINEAR)
        cub = Trajectory(ts, xs, Interpolation.CUBIC_LOCAL)
        err_lin = abs(lin.evaluate(mid) - math.sin(mid))
        err_cub = abs(cub.evaluate(mid) - math.sin(mid))
        assert err_cub < err_lin / 10

    def test_range_enforced(self):
        tr = Trajectory(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        with pytest.raises(DomainError):
            tr.evaluate(1.5)


class TestVerificationReport:
    def test_passed_is_exactly_max_le_tol(self):
        cases = [CaseResult("f", (1.0,), 1e-6), CaseResult("g", (2.0,), 5e-5)]
        rep = VerificationReport.from_cases("id", cases, 5e-5)
        assert rep.passed and rep.max_residual == 5e-5
        rep2 = VerificationReport.from_cases("id", cases, 4.9999e-5)
        assert not rep2.passed

    def test_skipped_cases_excluded_from_max(self):
        cases = [CaseResult("f", (1.0,), math.nan, "skipped"),
                 CaseResult("g", (1.0,), 1e-8)]
        rep = VerificationReport.from_cases("id", cases, 1e-6)
        assert rep.passed and rep.max_residual == 1e-8

    def test_inconsistent_flag_rejected(self):
        with pytest.raises(ValueError):
            VerificationReport("id", (), max_residual=1.0, tolerance=0.5, passed=True)
