"""Numerical verification of the conformable-calculus identities.

Every check follows the same pattern: both sides of an identity are computed
through independent numerical routes (raw limit estimates, analytic
derivative formulas, quadrature) and the absolute residual per catalog
function and evaluation point is collected into a VerificationReport.

Default tolerances: 1e-5 for single-estimator identities, 1e-4 where two
numerical layers are chained (a derivative of a numerically computed
integral, or vice versa), since errors compound across nested estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    CaseResult,
    DomainError,
    LowerTerminal,
    Order,
    ScalarFunction,
    VerificationReport,
    Verdict,
    as_order,
    as_terminal,
)
from .deriv import (
    DEFAULT_LIMIT_OPTIONS,
    LimitOptions,
    conformable_derivative,
    derivative_at_lower_terminal,
)
from .integ import (
    ProbeVerdict,
    QuadOptions,
    conformable_integral,
    divergence_probe,
)

__all__ = [
    "CatalogEntry",
    "build_catalog",
    "default_points",
    "verify_algebraic_rules",
    "verify_order_change",
    "verify_left_inverse",
    "verify_right_inverse",
    "verify_lower_terminal_vanishing",
    "counterexample_check",
    "run_suite",
    "SUITE_NAMES",
    "DEFAULT_TOL",
    "CHAINED_TOL",
]

DEFAULT_TOL = 1e-5
CHAINED_TOL = 1e-4

# quadrature inside verification runs tighter than the residual tolerances,
# so the inner integral contributes negligible noise to the outer estimator
_INNER_QUAD = QuadOptions(tol=1e-12)


@dataclass(frozen=True)
class CatalogEntry:
    """A test function with optional analytic derivative and hypothesis flags.

    The flags record which corollary hypotheses the entry satisfies so suite
    runners can select admissible subsets; the verify_* operations themselves
    assume their stated preconditions and let violations surface as errors.
    """

    f: ScalarFunction
    f_prime: ScalarFunction | None
    smooth_on: tuple[float, float]
    notes: str = ""
    continuous_at_a: bool = True
    bounded_derivative_near_a: bool = True
    smooth_on_open_axis: bool = True  # differentiable on all of (a, oo)

    @property
    def label(self) -> str:
        return self.f.label


def build_catalog(a: LowerTerminal | float) -> list[CatalogEntry]:
    """Default function catalog anchored at the lower terminal a.

    Covers constants, monomials, a square root with unbounded derivative at
    a, transcendentals, a kink, and the power-law family from the inverse
    counterexample.  Entries carrying an analytic derivative are
    self-validated against a central difference at load time.
    """
    a = as_terminal(a).a
    lo, hi = a + 1e-3, a + 20.0
    entries = [
        CatalogEntry(
            f=ScalarFunction(lambda t: 1.0, a, "const(1)"),
            f_prime=ScalarFunction(lambda t: 0.0, a, "0"),
            smooth_on=(lo, hi), notes="constant"),
        CatalogEntry(
            f=ScalarFunction(lambda t: t, a, "t"),
            f_prime=ScalarFunction(lambda t: 1.0, a, "1"),
            smooth_on=(lo, hi)),
        CatalogEntry(
            f=ScalarFunction(lambda t: t * t, a, "t^2"),
            f_prime=ScalarFunction(lambda t: 2.0 * t, a, "2*t"),
            smooth_on=(lo, hi)),
        CatalogEntry(
            f=ScalarFunction(lambda t: t ** 3 + 1.0, a, "t^3+1"),
            f_prime=ScalarFunction(lambda t: 3.0 * t * t, a, "3*t^2"),
            smooth_on=(lo, hi)),
        CatalogEntry(
            f=ScalarFunction(lambda t: math.sqrt(t - a), a, "sqrt(t-a)"),
            f_prime=ScalarFunction(lambda t: 0.5 / math.sqrt(t - a), a, "1/(2*sqrt(t-a))"),
            smooth_on=(lo, hi),
            notes="derivative unbounded at the terminal",
            bounded_derivative_near_a=False),
        CatalogEntry(
            f=ScalarFunction(math.exp, a, "exp(t)"),
            f_prime=ScalarFunction(math.exp, a, "exp(t)"),
            smooth_on=(lo, hi)),
        CatalogEntry(
            f=ScalarFunction(math.sin, a, "sin(t)"),
            f_prime=ScalarFunction(math.cos, a, "cos(t)"),
            smooth_on=(lo, hi)),
        CatalogEntry(
            f=ScalarFunction(lambda t: abs(t - (a + 2.0)), a, "|t-c|"),
            f_prime=None,
            smooth_on=(lo, a + 1.9),
            notes="kink at c = a + 2; not differentiable there",
            smooth_on_open_axis=False),
    ]
    for alpha_r, beta_r in ((0.5, 0.75), (0.3, 0.9)):
        entries.append(remark_power_law(a, alpha_r, beta_r))
    for e in entries:
        _self_validate(e)
    return entries


def remark_power_law(a: LowerTerminal | float, alpha: float, beta: float) -> CatalogEntry:
    """The inverse-identity counterexample family f = alpha^-1 (t-a)^(alpha-beta),
    beta > alpha: unbounded at the terminal, so the left-inverse hypotheses fail."""
    a = as_terminal(a).a
    if not 0.0 < alpha < beta < 1.0:
        raise DomainError(f"power-law family needs 0 < alpha < beta < 1, got ({alpha}, {beta})")
    p = alpha - beta
    return CatalogEntry(
        f=ScalarFunction(lambda t: (t - a) ** p / alpha, a,
                         f"(t-a)^({p:.3g})/{alpha:.3g}"),
        f_prime=ScalarFunction(lambda t: p * (t - a) ** (p - 1.0) / alpha, a,
                               f"{p:.3g}*(t-a)^({p - 1.0:.3g})/{alpha:.3g}"),
        smooth_on=(a + 0.5, a + 20.0),
        notes=f"inverse counterexample, alpha={alpha}, beta={beta}",
        continuous_at_a=False,
        bounded_derivative_near_a=False)


def _self_validate(entry: CatalogEntry):
    """Check the declared analytic derivative against central differences."""
    if entry.f_prime is None:
        return
    lo, hi = entry.smooth_on
    for frac in (0.25, 0.5, 0.75):
        t = lo + frac * (hi - lo)
        h = 1e-5 * max(1.0, abs(t))
        y1, y2 = entry.f.eval_defined(t + h), entry.f.eval_defined(t - h)
        d = entry.f_prime.eval_defined(t)
        if y1 is None or y2 is None or d is None:
            raise ValueError(f"catalog entry {entry.label} not evaluable on smooth_on")
        fd = (y1 - y2) / (2.0 * h)
        if abs(fd - d) > 1e-6 * max(1.0, abs(d), abs(fd)):
            raise ValueError(
                f"catalog entry {entry.label}: f_prime disagrees with finite "
                f"differences at t={t} ({d} vs {fd})")


def smooth_subset(catalog: list[CatalogEntry]) -> list[CatalogEntry]:
    return [e for e in catalog
            if e.f_prime is not None and e.smooth_on_open_axis and e.continuous_at_a]


def default_points(a: LowerTerminal | float) -> tuple[float, ...]:
    """Near-terminal through far-field evaluation points."""
    a = as_terminal(a).a
    return tuple(a + 10.0 ** k for k in range(-2, 2))


def _theorem_v(entry: CatalogEntry, a: float, alpha: float, t: float) -> float | None:
    """T^alpha from the analytic derivative: (t-a)^(1-alpha) f'(t)."""
    if entry.f_prime is None:
        return None
    d = entry.f_prime.eval_defined(t)
    if d is None:
        return None
    return (t - a) ** (1.0 - alpha) * d


def _estimate(f: ScalarFunction, a: float, alpha: float, t: float,
              opts: LimitOptions):
    est = conformable_derivative(f, a, alpha, t, opts)
    return est.value if est.verdict is Verdict.EXISTS else None


def verify_algebraic_rules(catalog: list[CatalogEntry], a: LowerTerminal | float,
                           alpha: Order | float, points=None,
                           tol: float | None = None,
                           c: float = 2.0, d: float = -3.0,
                           opts: LimitOptions = DEFAULT_LIMIT_OPTIONS) -> VerificationReport:
    """Linearity, product, quotient, and constant rules, every operand
    estimated independently by the raw limit procedure.

    Product and quotient residuals are scaled by the magnitude of the
    identity's sides (absolute when that magnitude is <= 1): pairs like
    exp(t) * (t^3+1) at far-field points reach values of 1e7 where an
    absolute residual would only measure roundoff in the operands.
    """
    a = as_terminal(a).a
    alpha = as_order(alpha).alpha
    points = tuple(points) if points is not None else default_points(a)
    tol = DEFAULT_TOL if tol is None else tol
    entries = smooth_subset(catalog)
    cases: list[CaseResult] = []

    for t in points:
        one = _estimate(ScalarFunction(lambda s: 1.0, a, "1"), a, alpha, t, opts)
        cases.append(CaseResult("constant-rule", (t,), abs(one) if one is not None
                                else math.inf, "T(1) = 0"))

    base: dict[tuple[str, float], float | None] = {}
    for e in entries:
        for t in points:
            base[(e.label, t)] = _estimate(e.f, a, alpha, t, opts)

    for i, ef in enumerate(entries):
        for eg in entries[i + 1:]:
            fl, gl = ef.label, eg.label
            for t in points:
                tf, tg = base[(fl, t)], base[(gl, t)]
                fv, gv = ef.f.eval_defined(t), eg.f.eval_defined(t)
                if None in (tf, tg, fv, gv):
                    cases.append(CaseResult(f"{fl},{gl}", (t,), math.nan,
                                            "skipped: operand estimate missing"))
                    continue
                combo = ScalarFunction(
                    lambda s, F=ef.f, G=eg.f: c * F(s) + d * G(s), a, "combo")
                prod = ScalarFunction(
                    lambda s, F=ef.f, G=eg.f: F(s) * G(s), a, "prod")
                t_combo = _estimate(combo, a, alpha, t, opts)
                t_prod = _estimate(prod, a, alpha, t, opts)
                if t_combo is None or t_prod is None:
                    cases.append(CaseResult(f"{fl},{gl}", (t,), math.nan,
                                            "skipped: combination estimate inconclusive"))
                    continue
                lin_rhs = c * tf + d * tg
                cases.append(CaseResult(
                    f"linearity[{fl},{gl}]", (t,),
                    abs(t_combo - lin_rhs) / max(1.0, abs(t_combo), abs(lin_rhs))))
                prod_rhs = gv * tf + fv * tg
                cases.append(CaseResult(
                    f"product[{fl},{gl}]", (t,),
                    abs(t_prod - prod_rhs) / max(1.0, abs(t_prod), abs(prod_rhs))))
                if abs(gv) > 1e-6:
                    quot = ScalarFunction(
                        lambda s, F=ef.f, G=eg.f: F(s) / G(s), a, "quot")
                    t_quot = _estimate(quot, a, alpha, t, opts)
                    if t_quot is not None:
                        quot_rhs = (gv * tf - fv * tg) / (gv * gv)
                        cases.append(CaseResult(
                            f"quotient[{fl},{gl}]", (t,),
                            abs(t_quot - quot_rhs)
                            / max(1.0, abs(t_quot), abs(quot_rhs))))
    return VerificationReport.from_cases("algebraic-rules", cases, tol)


def verify_order_change(catalog: list[CatalogEntry], a: LowerTerminal | float,
                        alpha: Order | float, beta: Order | float, points=None,
                        tol: float | None = None,
                        opts: LimitOptions = DEFAULT_LIMIT_OPTIONS) -> VerificationReport:
    """Order-transfer identity T^beta = (t-a)^(alpha-beta) T^alpha, both sides
    estimated independently by the raw limit procedure."""
    a = as_terminal(a).a
    al, be = as_order(alpha).alpha, as_order(beta).alpha
    points = tuple(points) if points is not None else default_points(a)
    tol = DEFAULT_TOL if tol is None else tol
    cases = []
    for e in smooth_subset(catalog):
        for t in points:
            ta = _estimate(e.f, a, al, t, opts)
            tb = ta if be == al else _estimate(e.f, a, be, t, opts)
            if ta is None or tb is None:
                cases.append(CaseResult(e.label, (t,), math.nan,
                                        "skipped: estimate inconclusive"))
                continue
            residual = abs(tb - (t - a) ** (al - be) * ta)
            cases.append(CaseResult(e.label, (t,), residual))
    return VerificationReport.from_cases(
        f"order-change[alpha={al},beta={be}]", cases, tol)


def verify_left_inverse(catalog: list[CatalogEntry], a: LowerTerminal | float,
                        alpha: Order | float, points=None,
                        tol: float | None = None,
                        opts: LimitOptions = DEFAULT_LIMIT_OPTIONS) -> VerificationReport:
    """I^alpha[T^alpha f](t) = f(t) - f(a).

    Assumes the entries satisfy the corollary hypotheses (continuity at a);
    an entry violating them makes the inner integral diverge and the
    resulting DivergenceError propagates, by design.
    """
    a = as_terminal(a).a
    alpha = as_order(alpha).alpha
    points = tuple(points) if points is not None else _chained_points(a)
    tol = CHAINED_TOL if tol is None else tol
    cases = []
    for e in catalog:
        fa = e.f.eval_defined(a)
        if fa is None:
            # bounded first-kind jump at a is admissible: take the limit value
            fa = e.f.eval_defined(a + 1e-12)
        for t in points:
            phi = _t_alpha_function(e, a, alpha, opts)
            value = conformable_integral(phi, a, alpha, t, _INNER_QUAD)
            ft = e.f.eval_defined(t)
            if ft is None or fa is None:
                cases.append(CaseResult(e.label, (t,), math.nan, "skipped: f not evaluable"))
                continue
            cases.append(CaseResult(e.label, (t,), abs(value - (ft - fa))))
    return VerificationReport.from_cases(f"left-inverse[alpha={alpha}]", cases, tol)


def _t_alpha_function(entry: CatalogEntry, a: float, alpha: float,
                      opts: LimitOptions) -> ScalarFunction:
    """s -> T^alpha_a f(s), from the analytic derivative when available,
    otherwise from the limit estimator."""
    if entry.f_prime is not None:
        fp = entry.f_prime
        return ScalarFunction(
            lambda s: (s - a) ** (1.0 - alpha) * fp(s), a,
            f"T^{alpha}[{entry.label}]")

    def est(s: float) -> float:
        e = conformable_derivative(entry.f, a, alpha, s, opts)
        if e.verdict is not Verdict.EXISTS:
            raise ValueError(f"T^{alpha} of {entry.label} not defined at {s}")
        return e.value

    return ScalarFunction(est, a, f"T^{alpha}[{entry.label}]")


def verify_right_inverse(catalog: list[CatalogEntry], a: LowerTerminal | float,
                         alpha: Order | float, points=None,
                         tol: float | None = None,
                         opts: LimitOptions = DEFAULT_LIMIT_OPTIONS) -> VerificationReport:
    """T^alpha[I^alpha f](t) = f(t), the outer derivative taken by the limit
    estimator on the numerically defined inner integral."""
    a = as_terminal(a).a
    alpha = as_order(alpha).alpha
    points = tuple(points) if points is not None else _chained_points(a)
    tol = CHAINED_TOL if tol is None else tol
    cases = []
    for e in catalog:
        inner = ScalarFunction(
            lambda u, F=e.f: conformable_integral(F, a, alpha, u, _INNER_QUAD),
            a, f"I^{alpha}[{e.label}]")
        for t in points:
            ft = e.f.eval_defined(t)
            if ft is None:
                cases.append(CaseResult(e.label, (t,), math.nan, "skipped: f not evaluable"))
                continue
            est = conformable_derivative(inner, a, alpha, t, opts)
            if est.verdict is not Verdict.EXISTS:
                cases.append(CaseResult(e.label, (t,), math.inf,
                                        f"outer estimate {est.verdict.value}"))
                continue
            cases.append(CaseResult(e.label, (t,), abs(est.value - ft)))
    return VerificationReport.from_cases(f"right-inverse[alpha={alpha}]", cases, tol)


def verify_lower_terminal_vanishing(catalog: list[CatalogEntry],
                                    a: LowerTerminal | float,
                                    alpha_list=(0.25, 0.5, 0.75),
                                    tol: float | None = None,
                                    opts: LimitOptions = DEFAULT_LIMIT_OPTIONS,
                                    ) -> VerificationReport:
    """T^alpha f(a) = 0 for alpha < 1 whenever f has a bounded first
    derivative near a.  Inconclusive probes are recorded as failures."""
    a = as_terminal(a).a
    tol = DEFAULT_TOL if tol is None else tol
    cases = []
    for e in catalog:
        for alpha in alpha_list:
            al = as_order(alpha).alpha
            if al >= 1.0:
                raise DomainError("lower-terminal vanishing holds for alpha < 1 only")
            est = derivative_at_lower_terminal(e.f, a, al, opts)
            if est.verdict is Verdict.EXISTS:
                cases.append(CaseResult(e.label, (al,), abs(est.value)))
            else:
                cases.append(CaseResult(e.label, (al,), math.inf,
                                        f"probe verdict {est.verdict.value}"))
    return VerificationReport.from_cases("lower-terminal-vanishing", cases, tol)


def counterexample_check(alpha: Order | float, beta: float,
                         a: LowerTerminal | float, t: float,
                         quad: QuadOptions | None = None) -> VerificationReport:
    """The missing-hypothesis demonstration: for f = alpha^-1 (t-a)^(alpha-beta)
    with beta > alpha, T^alpha f is alpha^-1 (alpha-beta) (t-a)^(-beta) and its
    conformable integral diverges at every t > a.  Passes iff the probe says
    Divergent."""
    a = as_terminal(a).a
    al = as_order(alpha).alpha
    if not (isinstance(beta, (int, float)) and al < beta < 1.0):
        raise DomainError(
            f"counterexample requires 0 < alpha < beta < 1, got alpha={al}, beta={beta}")
    if not math.isfinite(t) or t <= a:
        raise DomainError(f"t={t} must exceed the lower terminal a={a}")
    coeff = (al - beta) / al
    t_alpha_f = ScalarFunction(lambda s: coeff * (s - a) ** (-beta), a,
                               f"{coeff:.3g}*(t-a)^(-{beta:.3g})")
    probe = divergence_probe(t_alpha_f, a, al, t, quad or QuadOptions())
    residual = 0.0 if probe.verdict is ProbeVerdict.DIVERGENT else math.inf
    cases = [CaseResult(f"alpha={al},beta={beta}", (t,), residual,
                        f"probe verdict {probe.verdict.value}")]
    return VerificationReport.from_cases("inverse-counterexample", cases, 0.0)


def _chained_points(a: float) -> tuple[float, ...]:
    # chained checks stay at moderate scale; far-field points make the inner
    # quadrature noise dominate the outer estimator
    return (a + 0.01, a + 0.1, a + 1.0, a + 3.0)


SUITE_NAMES = ("all", "algebra", "order-change", "inverses",
               "lower-terminal", "counterexample")

_GRID = (0.25, 0.5, 0.75, 1.0)


def run_suite(suite: str, a: LowerTerminal | float = 0.0,
              tol: float | None = None) -> list[VerificationReport]:
    """Run one named verification suite (or all of them) over the default
    catalog and return the reports in canonical order."""
    if suite not in SUITE_NAMES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITE_NAMES)}")
    a = as_terminal(a).a
    catalog = build_catalog(a)
    # hypothesis subsets for the inverse corollaries
    left_ok = [e for e in catalog if e.continuous_at_a and e.smooth_on_open_axis]
    right_ok = [e for e in catalog if e.continuous_at_a]
    reports: list[VerificationReport] = []
    if suite in ("all", "algebra"):
        for alpha in _GRID:
            reports.append(verify_algebraic_rules(catalog, a, alpha, tol=tol))
    if suite in ("all", "order-change"):
        for alpha in _GRID:
            for beta in _GRID:
                reports.append(verify_order_change(catalog, a, alpha, beta, tol=tol))
    if suite in ("all", "inverses"):
        for alpha in _GRID[:-1]:
            reports.append(verify_left_inverse(left_ok, a, alpha, tol=tol))
            reports.append(verify_right_inverse(right_ok, a, alpha, tol=tol))
    if suite in ("all", "lower-terminal"):
        bounded = [e for e in catalog if e.bounded_derivative_near_a]
        reports.append(verify_lower_terminal_vanishing(
            bounded, a, tol=tol))
    if suite in ("all", "counterexample"):
        cases: list[CaseResult] = []
        for al, be in ((0.5, 0.75), (0.3, 0.9)):
            rep = counterexample_check(al, be, a, a + 1.0)
            cases.extend(rep.cases)
        reports.append(VerificationReport.from_cases("inverse-counterexample", cases, 0.0))
    reports.sort(key=lambda r: r.identity_name)
    return reports
