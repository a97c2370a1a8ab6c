"""Shared domain types for the conformable-calculus toolkit.

Everything here is an immutable value object; the numerical work lives in
the sibling modules (deriv, integ, identities, ivp).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ConformableError",
    "DomainError",
    "EvaluationError",
    "DivergenceError",
    "StepFailure",
    "NonConvergence",
    "SpecError",
    "Verdict",
    "Order",
    "LowerTerminal",
    "as_order",
    "as_terminal",
    "ScalarFunction",
    "DerivativeEstimate",
    "Method",
    "IvpSpec",
    "Interpolation",
    "SolverMeta",
    "Trajectory",
    "CaseResult",
    "VerificationReport",
]


class ConformableError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ConformableError):
    """An argument lies outside the mathematical domain of the operation."""


class EvaluationError(ConformableError):
    """A function could not be evaluated where the algorithm needed it."""


class DivergenceError(ConformableError):
    """An integral (or refinement sequence) grows without bound."""


class StepFailure(ConformableError):
    """The adaptive step controller cannot meet the tolerance."""


class NonConvergence(ConformableError):
    """Fixed-point iteration stalled before reaching the tolerance."""

    def __init__(self, message: str, last_change: float = math.nan):
        super().__init__(message)
        self.last_change = last_change


class SpecError(ConformableError):
    """Invalid problem specification; ``problems`` lists every offending field."""

    def __init__(self, problems: Sequence[str]):
        super().__init__("invalid spec: " + "; ".join(problems))
        self.problems = list(problems)


class Verdict(str, enum.Enum):
    """Outcome of a derivative-existence probe."""

    EXISTS = "Exists"
    LEFT_RIGHT_MISMATCH = "LeftRightMismatch"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Order:
    """Derivative/integral order, restricted to (0, 1]."""

    alpha: float

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and math.isfinite(self.alpha)):
            raise DomainError(f"order must be a finite real, got {self.alpha!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"order must lie in (0, 1], got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class LowerTerminal:
    """Anchor point of the conformable operators (any finite real)."""

    a: float

    def __post_init__(self):
        if not (isinstance(self.a, (int, float)) and math.isfinite(self.a)):
            raise DomainError(f"lower terminal must be a finite real, got {self.a!r}")
        object.__setattr__(self, "a", float(self.a))


def as_order(alpha: Order | float) -> Order:
    return alpha if isinstance(alpha, Order) else Order(alpha)


def as_terminal(a: LowerTerminal | float) -> LowerTerminal:
    return a if isinstance(a, LowerTerminal) else LowerTerminal(a)


# Exceptions a user-supplied function may legitimately raise for points
# outside its domain; they are mapped to the "undefined" signal.
_EVAL_EXCEPTIONS = (ValueError, ZeroDivisionError, OverflowError, ArithmeticError)


@dataclass(frozen=True)
class ScalarFunction:
    """An evaluable real -> real map with a declared left domain edge.

    ``fn`` must be deterministic and side-effect free.  Evaluation outside
    the domain, or any non-finite result, is reported as ``None`` by
    :meth:`eval_defined`; the numerical routines treat that as "undefined"
    rather than an error to crash on.
    """

    fn: Callable[[float], float]
    domain_start: float = -math.inf
    label: str = "f"

    def __call__(self, t: float) -> float:
        return self.fn(t)

    def eval_defined(self, t: float) -> float | None:
        """Evaluate, mapping domain violations and non-finite values to None."""
        if t < self.domain_start or not math.isfinite(t):
            return None
        try:
            v = self.fn(t)
        except _EVAL_EXCEPTIONS:
            return None
        v = float(v)
        return v if math.isfinite(v) else None


@dataclass(frozen=True)
class DerivativeEstimate:
    """Value + error estimate + existence verdict for a conformable derivative."""

    value: float | None
    error_estimate: float
    verdict: Verdict
    left_value: float | None = None
    right_value: float | None = None

    def __post_init__(self):
        if self.verdict is Verdict.EXISTS:
            if self.value is None or not math.isfinite(self.error_estimate):
                raise ValueError("Exists verdict requires a value and a finite error estimate")
        if self.verdict is Verdict.LEFT_RIGHT_MISMATCH:
            if self.left_value is None or self.right_value is None:
                raise ValueError("mismatch verdict requires both one-sided values")
        if self.error_estimate < 0:
            raise ValueError("error estimate must be >= 0")

    @property
    def exists(self) -> bool:
        return self.verdict is Verdict.EXISTS

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "verdict": self.verdict.value,
            "left_value": self.left_value,
            "right_value": self.right_value,
        }


class Method(str, enum.Enum):
    """IVP solution strategy."""

    REGULARIZED = "regularized"
    PICARD = "picard"
    DIRECT_SINGULAR = "direct"


@dataclass(frozen=True)
class IvpSpec:
    """Initial value problem  T^alpha_a x(t) = F(t, x(t)),  x(a) = x0,  on [a, T].

    Validation collects *all* field problems into a single :class:`SpecError`
    so callers can report them together.
    """

    a: LowerTerminal
    alpha: Order
    x0: float
    F: Callable[[float, float], float]
    horizon_T: float
    method: Method = Method.REGULARIZED
    tol: float = 1e-8

    def __post_init__(self):
        problems = []
        if not isinstance(self.a, LowerTerminal):
            problems.append("a: expected LowerTerminal")
        if not isinstance(self.alpha, Order):
            problems.append("alpha: expected Order")
        if not (isinstance(self.x0, (int, float)) and math.isfinite(self.x0)):
            problems.append(f"x0: must be a finite real, got {self.x0!r}")
        if not callable(self.F):
            problems.append("F: must be callable (t, x) -> real")
        if not (isinstance(self.horizon_T, (int, float)) and math.isfinite(self.horizon_T)):
            problems.append(f"horizon_T: must be a finite real, got {self.horizon_T!r}")
        elif isinstance(self.a, LowerTerminal) and self.horizon_T <= self.a.a:
            problems.append(f"horizon_T: must exceed the lower terminal {self.a.a}")
        if not isinstance(self.method, Method):
            problems.append(f"method: unknown method {self.method!r}")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            problems.append(f"tol: must be > 0, got {self.tol!r}")
        if problems:
            raise SpecError(problems)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "horizon_T", float(self.horizon_T))
        object.__setattr__(self, "tol", float(self.tol))


class Interpolation(str, enum.Enum):
    LINEAR = "linear"
    CUBIC_LOCAL = "cubic-local"


@dataclass(frozen=True)
class SolverMeta:
    """Bookkeeping attached to a trajectory by the solver that produced it."""

    method: str
    steps: int = 0
    rejected: int = 0
    achieved_tol: float = math.nan
    iterations: int = 0
    notes: str = ""


@dataclass(frozen=True)
class Trajectory:
    """Discretized IVP solution: strictly increasing sample times.

    Evaluation between samples uses only the declared interpolation rule;
    any extra accuracy a solver has (dense output) must be baked into the
    samples themselves.
    """

    ts: np.ndarray
    xs: np.ndarray
    interpolation: Interpolation = Interpolation.CUBIC_LOCAL
    meta: SolverMeta = field(default_factory=lambda: SolverMeta(method="unknown"))

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        xs = np.asarray(self.xs, dtype=float)
        if ts.ndim != 1 or ts.shape != xs.shape or ts.size < 2:
            raise ValueError("trajectory needs matching 1-d t and x arrays with >= 2 samples")
        if not np.all(np.diff(ts) > 0):
            raise ValueError("trajectory t values must be strictly increasing")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "xs", xs)
        if self.interpolation is Interpolation.CUBIC_LOCAL:
            object.__setattr__(self, "_slopes", _local_slopes(ts, xs))
        else:
            object.__setattr__(self, "_slopes", None)

    @property
    def t_start(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    def __call__(self, t: float) -> float:
        return self.evaluate(t)

    def evaluate(self, t: float) -> float:
        if t < self.ts[0] or t > self.ts[-1]:
            raise DomainError(f"t={t} outside trajectory range [{self.ts[0]}, {self.ts[-1]}]")
        if self.interpolation is Interpolation.LINEAR:
            return float(np.interp(t, self.ts, self.xs))
        return _hermite_eval(self.ts, self.xs, self._slopes, t)

    def evaluate_many(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self.evaluate(float(t)) for t in ts])


def _local_slopes(ts: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Second-order slope estimates at the nodes of a nonuniform grid."""
    n = ts.size
    d = np.empty(n)
    h = np.diff(ts)
    delta = np.diff(xs) / h
    if n == 2:
        d[:] = delta[0]
        return d
    # interior: derivative of the parabola through the three surrounding nodes
    hl, hr = h[:-1], h[1:]
    d[1:-1] = (delta[:-1] * hr + delta[1:] * hl) / (hl + hr)
    d[0] = ((2 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1])
    d[-1] = ((2 * h[-1] + h[-2]) * delta[-1] - h[-1] * delta[-2]) / (h[-1] + h[-2])
    return d


def _hermite_eval(ts: np.ndarray, xs: np.ndarray, slopes: np.ndarray, t: float) -> float:
    i = int(np.searchsorted(ts, t, side="right")) - 1
    i = max(0, min(i, ts.size - 2))
    h = ts[i + 1] - ts[i]
    w = (t - ts[i]) / h
    h00 = (1 + 2 * w) * (1 - w) ** 2
    h10 = w * (1 - w) ** 2
    h01 = w * w * (3 - 2 * w)
    h11 = w * w * (w - 1)
    return float(h00 * xs[i] + h10 * h * slopes[i] + h01 * xs[i + 1] + h11 * h * slopes[i + 1])


@dataclass(frozen=True)
class CaseResult:
    """One residual inside a verification report.

    A NaN residual marks a case that was skipped (hypotheses not met at that
    point); skipped cases do not enter the max.  An infinite residual marks a
    hard failure (a probe that should have converged and did not).
    """

    label: str
    points: tuple
    residual: float
    note: str = ""

    @property
    def skipped(self) -> bool:
        return math.isnan(self.residual)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "points": list(self.points),
            "residual": None if self.skipped else self.residual,
            "note": self.note,
        }


@dataclass(frozen=True)
class VerificationReport:
    """Per-identity residual summary; ``passed`` is exactly max <= tolerance."""

    identity_name: str
    cases: tuple[CaseResult, ...]
    max_residual: float
    tolerance: float
    passed: bool

    @classmethod
    def from_cases(cls, identity_name: str, cases: Sequence[CaseResult],
                   tolerance: float) -> "VerificationReport":
        cases = tuple(sorted(cases, key=lambda c: (c.label, c.points)))
        residuals = [c.residual for c in cases if not c.skipped]
        max_residual = max(residuals) if residuals else 0.0
        return cls(
            identity_name=identity_name,
            cases=cases,
            max_residual=max_residual,
            tolerance=tolerance,
            passed=max_residual <= tolerance,
        )

    def __post_init__(self):
        if self.passed != (self.max_residual <= self.tolerance):
            raise ValueError("passed must equal (max_residual <= tolerance)")

    def to_dict(self) -> dict:
        return {
            "identity_name": self.identity_name,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "cases": [c.to_dict() for c in self.cases],
        }
