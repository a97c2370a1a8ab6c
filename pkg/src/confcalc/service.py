"""HTTP service wrapping the toolkit: one POST endpoint per operation.

Request/response schemas mirror the CLI's JSON contract.  Mathematical
nonexistence (a Diverges verdict, a divergent integral) is a normal response
body, not an HTTP error; only malformed input turns into 422.

Run with `confcalc serve` or `uvicorn confcalc.service:app`.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import identities, ivp
from .core import (
    ConformableError,
    DivergenceError,
    DomainError,
    IvpSpec,
    LowerTerminal,
    Method,
    NonConvergence,
    Order,
    SpecError,
    StepFailure,
)
from .deriv import Side, conformable_derivative, derivative_at_lower_terminal, one_sided_derivative
from .exprparse import ExprSyntaxError, MissingVariable, rhs_function, scalar_function
from .integ import conformable_integral, divergence_probe


class DerivativeRequest(BaseModel):
    expr: str
    a: float
    alpha: float
    t: float | None = None
    side: str | None = Field(default=None, pattern="^(left|right)$")
    at_terminal: bool = False


class DerivativeResponse(BaseModel):
    value: float | None
    error_estimate: float | None
    verdict: str
    left_value: float | None
    right_value: float | None


class IntegralRequest(BaseModel):
    expr: str
    a: float
    alpha: float
    t: float
    probe: bool = False
    tol: float = 1e-10


class IntegralResponse(BaseModel):
    value: float | None = None
    verdict: str | None = None


class SolveRequest(BaseModel):
    a: float
    alpha: float
    x0: float
    F: str
    T: float
    method: str = "regularized"
    tol: float = 1e-8
    samples: int = Field(default=101, ge=2)


class SolveResponse(BaseModel):
    t: list[float]
    x: list[float]
    method: str
    steps: int
    iterations: int


class VerifyRequest(BaseModel):
    suite: str = "all"
    tol: float | None = None
    a: float = 0.0


class VerifyResponse(BaseModel):
    reports: list[dict]
    all_passed: bool


_METHODS = {"regularized": Method.REGULARIZED, "picard": Method.PICARD,
            "direct": Method.DIRECT_SINGULAR}


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


def _clean(v: float | None) -> float | None:
    # JSON has no inf/nan
    if v is None or not math.isfinite(v):
        return None
    return v


def create_app() -> FastAPI:
    app = FastAPI(title="confcalc", version="0.1.0",
                  description="conformable-calculus compute service")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/derivative", response_model=DerivativeResponse)
    def derivative(req: DerivativeRequest):
        try:
            f = scalar_function(req.expr)
            if req.at_terminal:
                est = derivative_at_lower_terminal(f, req.a, req.alpha)
            elif req.side is not None:
                if req.t is None:
                    raise DomainError("t is required for a one-sided derivative")
                side = Side.LEFT if req.side == "left" else Side.RIGHT
                est = one_sided_derivative(f, req.a, req.alpha, req.t, side)
            else:
                if req.t is None:
                    raise DomainError("t is required unless at_terminal is set")
                est = conformable_derivative(f, req.a, req.alpha, req.t)
        except (ExprSyntaxError, MissingVariable, DomainError, ConformableError) as exc:
            raise _bad_request(exc)
        return DerivativeResponse(
            value=_clean(est.value),
            error_estimate=_clean(est.error_estimate),
            verdict=est.verdict.value,
            left_value=_clean(est.left_value),
            right_value=_clean(est.right_value))

    @app.post("/integral", response_model=IntegralResponse)
    def integral(req: IntegralRequest):
        try:
            f = scalar_function(req.expr)
            from .integ import QuadOptions
            opts = QuadOptions(tol=req.tol)
            if req.probe:
                result = divergence_probe(f, req.a, req.alpha, req.t, opts)
                return IntegralResponse(value=_clean(result.value),
                                        verdict=result.verdict.value)
            try:
                value = conformable_integral(f, req.a, req.alpha, req.t, opts)
            except DivergenceError:
                return IntegralResponse(value=None, verdict="Divergent")
            return IntegralResponse(value=value, verdict="Convergent")
        except (ExprSyntaxError, MissingVariable, ValueError, ConformableError) as exc:
            raise _bad_request(exc)

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        if req.method not in _METHODS:
            raise _bad_request(ValueError(f"unknown method {req.method!r}"))
        try:
            spec = IvpSpec(a=LowerTerminal(req.a), alpha=Order(req.alpha),
                           x0=req.x0, F=rhs_function(req.F), horizon_T=req.T,
                           method=_METHODS[req.method], tol=req.tol)
            grid = np.linspace(spec.a.a, spec.horizon_T, req.samples)
            traj = ivp.solve(spec, sample_at=grid)
        except (ExprSyntaxError, MissingVariable, SpecError, DomainError) as exc:
            raise _bad_request(exc)
        except (NonConvergence, StepFailure) as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        xs = traj.evaluate_many(grid)
        return SolveResponse(t=[float(v) for v in grid], x=[float(v) for v in xs],
                             method=traj.meta.method, steps=traj.meta.steps,
                             iterations=traj.meta.iterations)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest):
        try:
            reports = identities.run_suite(req.suite, a=req.a, tol=req.tol)
        except (ValueError, ConformableError) as exc:
            raise _bad_request(exc)
        return VerifyResponse(reports=[r.to_dict() for r in reports],
                              all_passed=all(r.passed for r in reports))

    return app


app = create_app()
