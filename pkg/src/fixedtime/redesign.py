"""Right-hand sides of the auxiliary and redesigned systems.

A :class:`SystemPair` ties one profile, one correction field and one terminal
drift together. In the auxiliary time variable the dynamics are

    dz/dtau = r*F(z1) + r*A0@z - (rho'/rho)*M@z + (r*rho)^(-n) * D*dhat,

with A0 the upper shift, M = diag(0, 1, ..., n-1) and D the last basis
vector. In real time the redesigned dynamics are

    dy/dt = H(y1, t) + A0@y + D*delta(t),

where H applies the gain ladder diag(rk, (rk)^2, ..., (rk)^n) with
k = kappa(t - t0) to the correction field during the transient window
[t0, t0 + eta*T_c) and falls back to the terminal drift afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import CorrectionField, DriftG
from .profiles import BlowUpProfile

__all__ = ["SystemPair", "ContractViolationError", "aux_rhs", "eval_H", "redesigned_rhs"]


class ContractViolationError(ValueError):
    """A runtime contract (such as a disturbance bound) was violated."""


@dataclass(frozen=True)
class SystemPair:
    """One profile and one field shared by the auxiliary and redesigned systems."""

    profile: BlowUpProfile
    field: CorrectionField
    drift: DriftG
    L: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.field.n != self.drift.n:
            raise ValueError(
                f"field order {self.field.n} and drift order {self.drift.n} disagree"
            )
        if not (math.isfinite(self.L) and self.L >= 0.0):
            raise ValueError(f"L must be finite and >= 0, got {self.L!r}")
        if not math.isfinite(self.t0):
            raise ValueError("t0 must be finite")

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def switch_time(self) -> float:
        """Absolute time at which the transient branch hands over to the drift."""
        return self.t0 + self.profile.eta * self.profile.T_c


def _check_bound(value: float, L: float, what: str) -> None:
    if abs(value) > L * (1.0 + 1e-12) + 1e-15:
        raise ContractViolationError(f"|{what}| = {abs(value)!r} exceeds the bound L = {L!r}")


def aux_rhs(sp: SystemPair, tau: float, z: np.ndarray, dhat: float = 0.0) -> np.ndarray:
    """Auxiliary-time derivative dz/dtau at (tau, z) under disturbance dhat."""
    _check_bound(dhat, sp.L, "dhat")
    z = np.asarray(z, dtype=float)
    n, r = sp.n, sp.field.r
    out = r * sp.field.eval(z[0], tau)
    out[:-1] += r * z[1:]  # r * A0 @ z
    drr = sp.profile.drho_over_rho(tau)
    out -= drr * np.arange(n) * z  # (rho'/rho) * M @ z
    out[-1] += dhat / (r * sp.profile.rho(tau)) ** n
    return out


def eval_H(sp: SystemPair, y1: float, t: float, switch_guard: float = 0.0) -> np.ndarray:
    """Gain-laddered correction during the transient, terminal drift after.

    ``switch_guard`` moves the branch point earlier by that amount so a
    fixed-step integrator can align the handover with a grid node; the
    default 0 keeps the exact branch at t0 + eta*T_c.
    """
    t_hat = t - sp.t0
    eta_Tc = sp.profile.eta * sp.profile.T_c
    if t_hat < eta_Tc - switch_guard and t_hat >= 0.0:
        rk = sp.field.r * sp.profile.kappa(t_hat)
        tau = _field_clock(sp, t_hat)
        return rk ** np.arange(1, sp.n + 1) * sp.field.eval(y1, tau)
    return sp.drift.eval(y1)


def _field_clock(sp: SystemPair, t_hat: float) -> float:
    # time-varying fields (early/late gain banks) switch on auxiliary time
    switch_tau = getattr(sp.field, "switch_tau", math.inf)
    if math.isinf(switch_tau):
        return math.inf
    return sp.profile.psi_inv(t_hat) if t_hat < sp.profile.eta * sp.profile.T_c else math.inf


def redesigned_rhs(
    sp: SystemPair, t: float, y: np.ndarray, delta: float = 0.0, switch_guard: float = 0.0
) -> np.ndarray:
    """Real-time derivative dy/dt at (t, y) under disturbance delta."""
    _check_bound(delta, sp.L, "delta")
    y = np.asarray(y, dtype=float)
    out = eval_H(sp, y[0], t, switch_guard)
    out[:-1] += y[1:]  # A0 @ y
    out[-1] += delta
    return out
