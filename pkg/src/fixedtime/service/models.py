"""Request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..scenarios import Scenario, SignalSpec

__all__ = [
    "HealthResponse",
    "ProfileEvalRequest",
    "ProfileEvalResponse",
    "SimulateRequest",
    "RunResponse",
    "ExampleRequest",
    "DifferentiateRequest",
    "DifferentiateResponse",
    "VerifyRequest",
    "VerifyResponse",
]


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HealthResponse(BaseModel):
    status: str
    version: str


class ProfileEvalRequest(_StrictModel):
    """Evaluate a profile's maps on caller-supplied grids."""

    profile: dict
    tau: list[float] = Field(default_factory=list)
    t_hat: list[float] = Field(default_factory=list)


class ProfileEvalResponse(BaseModel):
    eta: float
    rho: list[float]
    psi: list[float]
    kappa: list[float]


class SimulateRequest(_StrictModel):
    scenario: Scenario


class RunResponse(BaseModel):
    """Report plus the full CSV text of the trajectory."""

    report: dict
    csv: str
    scenario: dict


class ExampleRequest(_StrictModel):
    example: Literal[1, 2, 3]
    noise: bool = False
    h: float | None = Field(default=None, gt=0)
    stride: int | None = Field(default=None, ge=1)
    horizon: float | None = Field(default=None, gt=0)
    kappa_max: float | None = Field(default=None, ge=1.0)
    kappa_ref: float | None = Field(default=None, gt=0)


class DifferentiateRequest(_StrictModel):
    """Batch differentiation of a sampled signal.

    ``csv`` holds ``t,y`` rows with a uniform time grid. The scenario must be
    in differentiator mode; its analytic signal (if any) is ignored in favor
    of the samples.
    """

    scenario: Scenario
    csv: str

    model_config = ConfigDict(extra="forbid")


class DifferentiateResponse(BaseModel):
    csv: str
    report: dict


class VerifyRequest(_StrictModel):
    suite: Literal["profiles", "equivalence", "ubst", "gains", "lyapunov", "lemma4", "all"]


class VerifyResponse(BaseModel):
    passed: bool
    report: dict


# re-exported so service clients can build signal fragments without reaching
# into the scenario module
SignalFragment = SignalSpec
