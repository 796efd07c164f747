"""HTTP service wrapping the redesign toolkit.

Endpoints are synchronous; long simulations hold the request. Domain errors
surface as 400 responses with the exception message, schema violations as
422 with pydantic's field-level details.
"""

from __future__ import annotations

import json
from importlib.metadata import version as _pkg_version

import numpy as np
from fastapi import FastAPI, HTTPException

from ..differentiator import FilteringDifferentiator
from ..profiles import ProfileDomainError
from ..redesign import ContractViolationError
from ..runner import run_example, run_scenario
from ..scenarios import ProfileSpec, builtin_example
from ..sim import SimulationDivergedError
from ..signals import DisturbanceBoundError
from ..suites import run_suite
from .models import (
    DifferentiateRequest,
    DifferentiateResponse,
    ExampleRequest,
    HealthResponse,
    ProfileEvalRequest,
    ProfileEvalResponse,
    RunResponse,
    SimulateRequest,
    VerifyRequest,
    VerifyResponse,
)

_DOMAIN_ERRORS = (
    ProfileDomainError,
    ContractViolationError,
    DisturbanceBoundError,
    SimulationDivergedError,
    ValueError,
    ArithmeticError,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="fixedtime service",
        description="Prescribed settling-time redesign: simulation, "
                    "differentiation and verification",
        version=_version(),
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=_version())

    @app.post("/profiles/evaluate", response_model=ProfileEvalResponse)
    def profiles_evaluate(req: ProfileEvalRequest) -> ProfileEvalResponse:
        with _domain_errors():
            p = ProfileSpec.model_validate(req.profile).to_profile()
            return ProfileEvalResponse(
                eta=p.eta,
                rho=[p.rho(t) for t in req.tau],
                psi=[p.psi(t) for t in req.tau],
                kappa=[p.kappa(t) for t in req.t_hat],
            )

    @app.post("/simulate", response_model=RunResponse)
    def simulate(req: SimulateRequest) -> RunResponse:
        with _domain_errors():
            res = run_scenario(req.scenario)
        return RunResponse(report=res.report, csv=res.csv,
                           scenario=json.loads(req.scenario.model_dump_json()))

    @app.post("/examples/run", response_model=RunResponse)
    def examples_run(req: ExampleRequest) -> RunResponse:
        overrides = {k: getattr(req, k) for k in
                     ("h", "stride", "horizon", "kappa_max", "kappa_ref")
                     if getattr(req, k) is not None}
        with _domain_errors():
            res = run_example(req.example, noise=req.noise, **overrides)
        scenario = builtin_example(req.example, noise=req.noise, **overrides)
        return RunResponse(report=res.report, csv=res.csv,
                           scenario=json.loads(scenario.model_dump_json()))

    @app.post("/differentiate", response_model=DifferentiateResponse)
    def differentiate(req: DifferentiateRequest) -> DifferentiateResponse:
        sc = req.scenario
        if sc.mode != "differentiator":
            raise HTTPException(status_code=400,
                                detail="differentiation needs a differentiator-mode scenario")
        with _domain_errors():
            times, samples = _parse_ty_csv(req.csv)
            h = float(times[1] - times[0])
            diff = FilteringDifferentiator(
                sc.n_d, sc.n_f, sc.field.to_field(sc.r), sc.drift.gains,
                sc.to_profile(), t0=float(times[0]), kappa_ref=sc.step.kappa_ref)
            w0 = np.asarray(sc.x0[: sc.n_f], dtype=float)
            z0 = np.asarray(sc.x0[sc.n_f :], dtype=float)
            diff.reset(w0=w0, z0=z0)
            run = diff.run_batch(samples, h, stride=sc.stride)
        report = {
            "samples": int(times.size),
            "h": h,
            "max_kappa": float(run.gains.max()),
            "final_estimates": run.z_states[-1].tolist(),
        }
        return DifferentiateResponse(csv=run.to_csv(), report=report)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        with _domain_errors():
            report = run_suite(req.suite)
        return VerifyResponse(passed=report["passed"], report=report)

    return app


def _parse_ty_csv(text: str):
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty CSV input")
    start = 1 if lines[0].lower().replace(" ", "").startswith("t,") else 0
    rows = np.array([[float(v) for v in ln.split(",")[:2]] for ln in lines[start:]])
    if rows.ndim != 2 or rows.shape[0] < 2 or rows.shape[1] != 2:
        raise ValueError("CSV must hold at least two t,y rows")
    times, samples = rows[:, 0], rows[:, 1]
    steps = np.diff(times)
    if steps.min() <= 0 or (steps.max() - steps.min()) > 1e-9 * max(steps.max(), 1.0):
        raise ValueError("CSV time grid must be uniform and increasing")
    return times, np.ascontiguousarray(samples)


def _version() -> str:
    try:
        return _pkg_version("fixedtime")
    except Exception:
        return "0.0.0"


class _domain_errors:
    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, _DOMAIN_ERRORS):
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return False


app = create_app()
