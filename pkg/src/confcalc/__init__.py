"""confcalc: numerical conformable (fractional-like) calculus.

The toolkit computes conformable derivatives and integrals of order
alpha in (0, 1] with an arbitrary lower terminal, verifies the calculus
identities numerically over a function catalog, and solves conformable
initial value problems by three interchangeable routes (exact
regularizing substitution, Picard iteration on the Volterra form, and
direct integration of the weakly singular equation).

Quick start:

>>> import confcalc as cc
>>> f = cc.ScalarFunction(lambda t: 2 * t ** 0.5, domain_start=0.0, label="2*sqrt(t)")
>>> cc.conformable_derivative(f, a=0.0, alpha=0.5, t=4.0).value
1.00000...
"""

from .core import (
    CaseResult,
    ConformableError,
    DerivativeEstimate,
    DivergenceError,
    DomainError,
    EvaluationError,
    Interpolation,
    IvpSpec,
    LowerTerminal,
    Method,
    NonConvergence,
    Order,
    ScalarFunction,
    SolverMeta,
    SpecError,
    StepFailure,
    Trajectory,
    Verdict,
    VerificationReport,
)
from .deriv import (
    LimitOptions,
    Side,
    classify_alpha_differentiability,
    conformable_derivative,
    derivative_at_lower_terminal,
    one_sided_derivative,
    order_transfer,
)
from .exprparse import (
    ExprSyntaxError,
    MissingVariable,
    UnknownIdentifier,
    evaluate,
    parse,
    rhs_function,
    scalar_function,
    to_source,
)
from .identities import (
    CatalogEntry,
    build_catalog,
    counterexample_check,
    run_suite,
    verify_algebraic_rules,
    verify_left_inverse,
    verify_lower_terminal_vanishing,
    verify_order_change,
    verify_right_inverse,
)
from .integ import (
    ProbeResult,
    ProbeVerdict,
    QuadOptions,
    conformable_integral,
    divergence_probe,
)
from .ivp import (
    RegularizedProblem,
    linear_closed_form,
    regularize,
    residual,
    solve,
    solve_direct_singular,
    solve_picard,
    solve_regularized,
)

__version__ = "0.1.0"
