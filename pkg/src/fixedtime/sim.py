"""Fixed-step integration with gain-adaptive substepping.

The base grid has step ``h``; at each base node the step is split into
``max(1, ceil(kappa/kappa_ref))`` equal substeps so that the effective step
shrinks in proportion to the time-varying gain. Explicit Euler is the
default and the right choice for sign-bearing fields; classical Runge-Kutta
is available for smooth (linear) fields. The branch between the transient
gain ladder and the terminal drift is decided per base node with a half-step
guard, so the handover lands on a grid node instead of straddling one.

Trajectories keep every ``stride``-th base node. Recorded gains are the
profile's gain schedule evaluated at the recorded times.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _kernels
from .profiles import BlowUpProfile
from .redesign import SystemPair
from .signals import DisturbanceBoundError, DisturbanceSignal, SignalModel

__all__ = [
    "StepPolicy",
    "Trajectory",
    "SimulationDivergedError",
    "integrate",
    "simulate_pair",
    "simulate_aux",
]


class SimulationDivergedError(RuntimeError):
    """The state left the admissible region (norm guard or non-finite values)."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


@dataclass(frozen=True)
class StepPolicy:
    """Base step, integration method, substep gain ratio and output stride."""

    h: float = 1e-5
    method: str = "euler"
    kappa_ref: float = 10.0
    stride: int = 1

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise ValueError(f"h must be finite and > 0, got {self.h!r}")
        if self.method not in ("euler", "rk4"):
            raise ValueError(f"method must be 'euler' or 'rk4', got {self.method!r}")
        if not (math.isfinite(self.kappa_ref) and self.kappa_ref > 0.0):
            raise ValueError(f"kappa_ref must be finite and > 0, got {self.kappa_ref!r}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride!r}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: times, states (one row per sample), gain trace."""

    times: np.ndarray
    states: np.ndarray
    gains: np.ndarray
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory times must increase strictly")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory states must be finite at every sample")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def sup_norms(self) -> np.ndarray:
        return np.max(np.abs(self.states), axis=1)

    def to_csv(self, extra: dict[str, np.ndarray] | None = None) -> str:
        """CSV text with header ``t,x1,...,xn,kappa`` plus optional columns."""
        cols = [("t", self.times)]
        cols += [(f"x{i + 1}", self.states[:, i]) for i in range(self.n)]
        cols.append(("kappa", self.gains))
        for name, values in (extra or {}).items():
            if len(values) != len(self.times):
                raise ValueError(f"extra column {name!r} has wrong length")
            cols.append((name, np.asarray(values, dtype=float)))
        header = ",".join(name for name, _ in cols)
        data = np.column_stack([v for _, v in cols])
        lines = [header]
        lines.extend(",".join(f"{v:.17g}" for v in row) for row in data)
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str, extra: dict[str, np.ndarray] | None = None) -> None:
        _atomic_write(path, self.to_csv(extra))


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _raise_for_status(status: int, last: float, what: str) -> None:
    if status == 1:
        raise SimulationDivergedError(
            f"{what}: state norm exceeded {_kernels.DIVERGENCE_GUARD:g}; "
            f"last valid time {last!r}", last)
    if status == 2:
        raise SimulationDivergedError(f"{what}: state became non-finite after {last!r}", last)


def _gain_trace(p: BlowUpProfile, t0: float, times: np.ndarray) -> np.ndarray:
    return np.array([p.kappa(max(t - t0, 0.0)) for t in times])


def _check_disturbance_grid(d: DisturbanceSignal | None, t0: float, horizon: float, h: float) -> None:
    if d is None or d.kind == "zero":
        return
    if d.kind in ("harmonic", "signal_derivative"):
        ts = t0 + np.arange(int(round(horizon / h)) + 1) * h
        order = d.order if d.kind == "signal_derivative" else 0
        vals = d.model.eval(ts, order)
        bad = np.abs(vals) > d.L * (1.0 + 1e-12) + 1e-15
        if np.any(bad):
            t_bad = float(ts[np.argmax(bad)])
            raise DisturbanceBoundError(
                f"disturbance exceeds L={d.L!r} at t={t_bad!r} "
                f"(value {float(vals[np.argmax(bad)])!r})")
    else:
        # composed kinds: spot-check on a coarse grid
        for t in np.linspace(t0, t0 + horizon, 1001):
            d.sample(float(t))


def integrate(rhs, x0, span, policy: StepPolicy, gain_schedule=None) -> Trajectory:
    """Generic fixed-step integration of ``dx/dt = rhs(t, x)``.

    ``gain_schedule`` (a callable of absolute time) drives both the substep
    count and the recorded gain trace; without it the gain is 1 and the grid
    is uniform at ``h``. This path is pure Python and intended for modest
    step counts; scenario runs use the compiled kernels instead.
    """
    t_start, t_end = float(span[0]), float(span[1])
    if not t_end > t_start:
        raise ValueError("span must satisfy t_end > t_start")
    x = np.asarray(x0, dtype=float).copy()
    h = policy.h
    nsteps = int(round((t_end - t_start) / h))
    times, states, gains = [], [], []
    for i in range(nsteps + 1):
        t = t_start + i * h
        kap = float(gain_schedule(t)) if gain_schedule is not None else 1.0
        if i % policy.stride == 0 or i == nsteps:
            times.append(t)
            states.append(x.copy())
            gains.append(kap)
        if i == nsteps:
            break
        nsub = int(max(1.0, math.ceil(kap / policy.kappa_ref)))
        hs = h / nsub
        for s in range(nsub):
            ts = t + s * hs
            if policy.method == "euler":
                x = x + hs * np.asarray(rhs(ts, x), dtype=float)
            else:
                k1 = np.asarray(rhs(ts, x), dtype=float)
                k2 = np.asarray(rhs(ts + 0.5 * hs, x + 0.5 * hs * k1), dtype=float)
                k3 = np.asarray(rhs(ts + 0.5 * hs, x + 0.5 * hs * k2), dtype=float)
                k4 = np.asarray(rhs(ts + hs, x + hs * k3), dtype=float)
                x = x + hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        nrm = float(np.max(np.abs(x)))
        if not np.isfinite(nrm):
            raise SimulationDivergedError(f"state became non-finite after t={t!r}", t)
        if nrm > _kernels.DIVERGENCE_GUARD:
            raise SimulationDivergedError(
                f"state norm exceeded {_kernels.DIVERGENCE_GUARD:g} at t={t + h!r}; "
                f"last valid time {t!r}", t)
    return Trajectory(np.asarray(times), np.asarray(states), np.asarray(gains))


def _bank_switch_that(sp: SystemPair) -> float:
    switch_tau = getattr(sp.field, "switch_tau", math.inf)
    if math.isinf(switch_tau):
        return math.inf
    return sp.profile.psi(switch_tau)


def simulate_pair(
    sp: SystemPair,
    x0,
    horizon: float,
    policy: StepPolicy,
    disturbance: DisturbanceSignal | None = None,
    noise: SignalModel | None = None,
    meta: dict | None = None,
) -> Trajectory:
    """Integrate the redesigned system from t0 over the given horizon.

    ``noise`` models measurement noise on the output the correction field
    sees: the field and drift are driven by ``x1 - noise(t)`` instead of x1.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sp.n,):
        raise ValueError(f"x0 must have shape ({sp.n},)")
    if disturbance is not None and disturbance.kind != "zero" and disturbance.L > sp.L:
        raise DisturbanceBoundError(
            f"disturbance bound {disturbance.L!r} exceeds the system bound {sp.L!r}")
    if noise is not None and policy.method != "euler":
        raise ValueError("measurement noise is only supported with the euler method")
    _check_disturbance_grid(disturbance, sp.t0, horizon, policy.h)
    dkind, dorder, sig = _kernels.pack_disturbance(disturbance)
    noise_pack = _kernels.pack_signal(noise, 0)
    T, X, m, status, last = _kernels.simulate_system(
        sp.n,
        *_kernels.pack_profile(sp.profile),
        *_kernels.pack_field(sp.field),
        _bank_switch_that(sp),
        *_kernels.pack_drift(sp.drift),
        dkind, dorder, *sig,
        1 if noise is not None else 0, *noise_pack,
        sp.t0, x0, float(horizon), policy.h, policy.kappa_ref, policy.stride,
        0 if policy.method == "euler" else 1,
    )
    _raise_for_status(status, sp.t0 + last, "redesigned system")
    times = sp.t0 + T[:m]
    return Trajectory(times, X[:m].copy(), _gain_trace(sp.profile, sp.t0, times),
                      dict(meta or {}))


def simulate_aux(
    sp: SystemPair,
    z0,
    tau_end: float,
    policy: StepPolicy,
    disturbance: DisturbanceSignal | None = None,
    map_disturbance_time: bool = True,
    meta: dict | None = None,
) -> Trajectory:
    """Integrate the auxiliary system over [0, tau_end] in its own clock.

    With ``map_disturbance_time`` the disturbance is read at ``psi(tau) + t0``,
    matching what the redesigned system sees through the time map; otherwise
    it is read at ``tau`` directly. The gain trace records rho(tau).
    """
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (sp.n,):
        raise ValueError(f"z0 must have shape ({sp.n},)")
    dkind, dorder, sig = _kernels.pack_disturbance(disturbance)
    switch_tau = getattr(sp.field, "switch_tau", math.inf)
    T, Z, m, status, last = _kernels.simulate_aux(
        sp.n,
        *_kernels.pack_profile(sp.profile),
        *_kernels.pack_field(sp.field),
        switch_tau,
        dkind, dorder, *sig,
        1 if map_disturbance_time else 0, sp.t0,
        z0, float(tau_end), policy.h, policy.stride,
    )
    _raise_for_status(status, last, "auxiliary system")
    taus = T[:m]
    rhos = np.array([sp.profile.rho(t) for t in taus])
    return Trajectory(taus, Z[:m].copy(), rhos, dict(meta or {}))
