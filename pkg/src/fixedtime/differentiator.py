"""Online differentiator with a prescribed settling-time bound.

The estimator carries ``n_f`` filtering states ``w`` ahead of the estimate
chain ``z_0..z_{n_d}``; ``z_i`` converges to the i-th derivative of the
input before ``t0 + eta*T_c`` and the recursion then switches to constant
sliding-mode gains that keep the estimates exact under the declared bound
on the (n_d+1)-th derivative. The innovation ``z_0 - y`` closes the chain
at the w-to-z junction; with ``n_f = 0`` it becomes the virtual first state
that drives the gains directly.

Streaming use feeds one sample per call to :meth:`FilteringDifferentiator.step`;
samples are zero-order-held across the gain-adaptive substeps of each base
step. Batch use hands an equally spaced sample array to
:meth:`FilteringDifferentiator.run_batch`, which runs the compiled kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .fields import CorrectionField, signed_power
from .profiles import BlowUpProfile
from .sim import SimulationDivergedError, Trajectory, _gain_trace
from .signals import SignalModel

__all__ = ["FilteringDifferentiator", "DifferentiatorRun"]


@dataclass(frozen=True)
class DifferentiatorRun:
    """Batch output: absolute times, internal states (w then z), gain trace."""

    times: np.ndarray
    states: np.ndarray
    gains: np.ndarray
    n_f: int
    n_d: int

    @property
    def w_states(self) -> np.ndarray:
        return self.states[:, : self.n_f]

    @property
    def z_states(self) -> np.ndarray:
        return self.states[:, self.n_f :]

    def error_states(self, signal: SignalModel) -> np.ndarray:
        """Map to the redesigned-system coordinates against the true signal."""
        cols = [self.states[:, i] for i in range(self.n_f)]
        for i in range(self.n_d + 1):
            cols.append(self.states[:, self.n_f + i] - signal.eval(self.times, i))
        return np.column_stack(cols)

    def to_csv(self) -> str:
        names = ["t"]
        names += [f"z{i}" for i in range(self.n_d + 1)]
        names += [f"w{i + 1}" for i in range(self.n_f)]
        names += ["kappa"]
        data = np.column_stack([self.times, self.z_states, self.w_states, self.gains])
        lines = [",".join(names)]
        lines.extend(",".join(f"{v:.17g}" for v in row) for row in data)
        return "\n".join(lines) + "\n"


class FilteringDifferentiator:
    """Single-owner mutable estimator; distinct instances are independent.

    Parameters
    ----------
    n_d, n_f:
        Number of derivatives to estimate and filter order; the internal
        order is ``n = n_d + n_f + 1`` and must match the field.
    field:
        Transient correction field (gains stored signed).
    terminal_gains:
        Signed sliding-mode gains used after the handover; component i uses
        the exponent ``(n - i)/n``.
    profile:
        Time-scale profile supplying the gain schedule.
    """

    def __init__(
        self,
        n_d: int,
        n_f: int,
        field: CorrectionField,
        terminal_gains,
        profile: BlowUpProfile,
        t0: float = 0.0,
        kappa_ref: float = 10.0,
    ):
        if n_d < 0 or n_f < 0:
            raise ValueError("n_d and n_f must be >= 0")
        n = n_d + n_f + 1
        if field.n != n:
            raise ValueError(f"field order {field.n} != n_d + n_f + 1 = {n}")
        if len(terminal_gains) != n:
            raise ValueError(f"expected {n} terminal gains")
        self.n_d = n_d
        self.n_f = n_f
        self.n = n
        self.field = field
        self.terminal_gains = tuple(float(g) for g in terminal_gains)
        self.terminal_exponents = tuple((n - (i + 1)) / n for i in range(n))
        self.profile = profile
        self.t0 = float(t0)
        self.kappa_ref = float(kappa_ref)
        self.w = np.zeros(n_f)
        self.z = np.zeros(n_d + 1)
        self.t_hat = 0.0

    # -- state management -----------------------------------------------------

    def reset(self, w0=None, z0=None, t0: float | None = None) -> None:
        self.w = np.zeros(self.n_f) if w0 is None else np.asarray(w0, dtype=float).copy()
        self.z = np.zeros(self.n_d + 1) if z0 is None else np.asarray(z0, dtype=float).copy()
        if self.w.shape != (self.n_f,) or self.z.shape != (self.n_d + 1,):
            raise ValueError("w0/z0 shapes do not match n_f and n_d")
        if t0 is not None:
            self.t0 = float(t0)
        self.t_hat = 0.0

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([self.w, self.z])

    @property
    def estimates(self) -> np.ndarray:
        """Current (y, dy, ..., d^{n_d} y) estimates."""
        return self.z.copy()

    def error_state(self, signal: SignalModel) -> np.ndarray:
        t = self.t0 + self.t_hat
        zerr = [self.z[i] - signal.eval(t, i) for i in range(self.n_d + 1)]
        return np.concatenate([self.w, zerr])

    # -- stepping ---------------------------------------------------------------

    def _bank_switch_that(self) -> float:
        switch_tau = getattr(self.field, "switch_tau", math.inf)
        return math.inf if math.isinf(switch_tau) else self.profile.psi(switch_tau)

    def step(self, y_sample: float, h: float):
        """Advance one base step of size h driven by the held sample.

        Returns (z estimates, w residuals) after the step. Call times must be
        monotone; the internal clock advances by h per call.
        """
        if not (math.isfinite(h) and h > 0.0):
            raise ValueError(f"h must be finite and > 0, got {h!r}")
        s = np.concatenate([self.w, self.z])
        n = self.n
        switch = self.profile.eta * self.profile.T_c
        transient = self.t_hat < switch - 0.5 * h
        if transient:
            kap = self.profile.kappa(self.t_hat)
            nsub = int(max(1.0, math.ceil(kap / self.kappa_ref)))
        else:
            kap = 1.0
            nsub = 1
        hs = h / nsub
        tau_clock = math.inf
        if transient and not math.isinf(self._bank_switch_that()):
            tau_clock = self.profile.psi_inv(self.t_hat)
        r = self.field.r
        for _ in range(nsub):
            w1 = s[0] if self.n_f > 0 else s[0] - y_sample
            if transient:
                fvec = self.field.eval(w1, tau_clock)
                rk = r * kap
                p = 1.0
                for j in range(n):
                    p *= rk
                    fvec[j] = p * fvec[j]
            else:
                fvec = np.array(
                    [g * signed_power(w1, e)
                     for g, e in zip(self.terminal_gains, self.terminal_exponents)]
                )
            for j in range(n):
                succ = s[j + 1] if j < n - 1 else 0.0
                if self.n_f > 0 and j == self.n_f - 1:
                    succ -= y_sample
                s[j] += hs * (fvec[j] + succ)
        if not np.all(np.isfinite(s)) or np.max(np.abs(s)) > _kernels.DIVERGENCE_GUARD:
            raise SimulationDivergedError(
                f"differentiator state diverged at t_hat={self.t_hat!r}", self.t0 + self.t_hat)
        self.w = s[: self.n_f]
        self.z = s[self.n_f :]
        self.t_hat += h
        return self.z.copy(), self.w.copy()

    # -- batch -------------------------------------------------------------------

    def run_batch(self, y_samples, h: float, stride: int = 1) -> DifferentiatorRun:
        """Consume equally spaced samples through the compiled kernel.

        Starts from the current state and leaves the instance at the final
        state, exactly as the equivalent sequence of :meth:`step` calls would.
        """
        y_samples = np.ascontiguousarray(y_samples, dtype=float)
        if y_samples.ndim != 1 or y_samples.size < 2:
            raise ValueError("need a 1-d array of at least two samples")
        if self.t_hat != 0.0:
            raise ValueError("run_batch starts at t0; reset() the instance first")
        T, S, m, status, last = _kernels.simulate_diff(
            self.n_f, self.n_d,
            *_kernels.pack_profile(self.profile),
            *_kernels.pack_field(self.field),
            self._bank_switch_that(),
            np.asarray(self.terminal_gains), np.asarray(self.terminal_exponents),
            y_samples, self.state, float(h), self.kappa_ref, int(stride),
        )
        if status != 0:
            raise SimulationDivergedError(
                f"differentiator state diverged near t_hat={last!r}", self.t0 + last)
        self.w = S[m - 1, : self.n_f].copy()
        self.z = S[m - 1, self.n_f :].copy()
        self.t_hat += (y_samples.size - 1) * h
        times = self.t0 + T[:m]
        return DifferentiatorRun(
            times, S[:m].copy(), _gain_trace(self.profile, self.t0, times),
            self.n_f, self.n_d)
