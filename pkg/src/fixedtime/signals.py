"""Analytic signal models and bounded disturbance inputs.

A :class:`SignalModel` is a finite sum of cosine terms plus a polynomial,
closed under differentiation, so exact derivatives of any order are
available for truth columns and for derivative-type disturbances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SignalModel", "DisturbanceSignal", "DisturbanceBoundError"]


class DisturbanceBoundError(ValueError):
    """A sampled disturbance exceeded its declared bound."""


@dataclass(frozen=True)
class SignalModel:
    """Sum of ``amp*cos(omega*t + phase)`` terms and ``sum_k poly[k]*t**k``."""

    cos_terms: tuple[tuple[float, float, float], ...] = ()
    poly: tuple[float, ...] = ()

    @classmethod
    def from_sin_cos(cls, sin_pairs=(), cos_pairs=(), poly=()) -> "SignalModel":
        """Build from (amplitude, frequency) pairs; sin enters as shifted cos."""
        terms = [(a, w, -0.5 * math.pi) for a, w in sin_pairs]
        terms += [(a, w, 0.0) for a, w in cos_pairs]
        return cls(cos_terms=tuple(terms), poly=tuple(float(c) for c in poly))

    @classmethod
    def harmonic(cls, pairs) -> "SignalModel":
        return cls.from_sin_cos(cos_pairs=pairs)

    def __neg__(self) -> "SignalModel":
        return SignalModel(
            cos_terms=tuple((-a, w, p) for a, w, p in self.cos_terms),
            poly=tuple(-c for c in self.poly),
        )

    def eval(self, t, order: int = 0):
        """Value of the signal's derivative of the given order at time(s) t."""
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, w, p in self.cos_terms:
            out += a * w**order * np.cos(w * t + p + 0.5 * math.pi * order)
        for k in range(order, len(self.poly)):
            c = self.poly[k] * math.factorial(k) / math.factorial(k - order)
            out += c * t ** (k - order)
        return float(out) if out.ndim == 0 else out

    def derivative_sup(self, order: int) -> float:
        """Upper bound of |derivative| from term amplitudes; inf if unbounded."""
        if any(c != 0.0 for c in self.poly[order + 1 :]):
            return math.inf
        bound = sum(abs(a) * w**order for a, w, _ in self.cos_terms)
        if len(self.poly) > order:
            bound += abs(self.poly[order]) * math.factorial(order)
        return bound


@dataclass(frozen=True)
class DisturbanceSignal:
    """Disturbance with a declared bound L, checked at every sample.

    Kinds:

    * ``zero``
    * ``harmonic``: sum of ``amp*cos(omega*t)`` pairs
    * ``signal_derivative``: an exact derivative of a :class:`SignalModel`
    * ``tau_harmonic``: a harmonic in the auxiliary time variable, evaluated
      as ``model(psi_inv(t - t0))``; used when matching an auxiliary-time
      disturbance from the redesigned-time side.
    """

    kind: str
    L: float
    model: SignalModel | None = None
    order: int = 0
    profile: object | None = None  # BlowUpProfile for tau_harmonic
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "harmonic", "signal_derivative", "tau_harmonic"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if not (math.isfinite(self.L) and self.L >= 0.0):
            raise ValueError(f"bound L must be finite and >= 0, got {self.L!r}")
        if self.kind != "zero" and self.model is None:
            raise ValueError(f"{self.kind} disturbance needs a signal model")
        if self.kind == "tau_harmonic" and self.profile is None:
            raise ValueError("tau_harmonic disturbance needs a profile")

    @classmethod
    def zero(cls) -> "DisturbanceSignal":
        return cls(kind="zero", L=0.0)

    @classmethod
    def harmonic(cls, pairs, L: float) -> "DisturbanceSignal":
        return cls(kind="harmonic", L=L, model=SignalModel.harmonic(pairs))

    @classmethod
    def derivative_of(cls, model: SignalModel, order: int, L: float) -> "DisturbanceSignal":
        return cls(kind="signal_derivative", L=L, model=model, order=order)

    def value(self, t: float) -> float:
        """Raw disturbance value without the bound check."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "harmonic":
            return self.model.eval(t, 0)
        if self.kind == "signal_derivative":
            return self.model.eval(t, self.order)
        t_hat = t - self.t0
        tau = self.profile.psi_inv(t_hat) if t_hat < self.profile.eta * self.profile.T_c else math.inf
        return self.model.eval(tau, 0) if math.isfinite(tau) else 0.0

    def sample(self, t: float) -> float:
        """Bound-checked sample; errors if |value| exceeds L beyond round-off."""
        v = self.value(t)
        if abs(v) > self.L * (1.0 + 1e-12) + 1e-15:
            raise DisturbanceBoundError(
                f"disturbance value {v!r} at t={t!r} exceeds declared bound L={self.L!r}"
            )
        return v
