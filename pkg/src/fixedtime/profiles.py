"""Time-scale profiles for prescribed settling-time redesign.

A profile bundles the reciprocal pair (rho, Phi) with Phi = 1/(T_c * rho),
the time map psi(tau) = T_c * integral of Phi over [0, tau], its inverse,
and the time-varying gain kappa = rho o psi_inv. Phi integrates to 1 over
[0, inf), so psi maps the infinite tau-axis onto [0, T_c). The fraction of
T_c actually used is eta = psi(T_f)/T_c, where T_f bounds the settling time
of the auxiliary system driven through the profile.

Two closed-form kinds are built in:

* ``exponential``: rho(tau) = exp(alpha*tau)/(alpha*T_c),
  psi(tau) = T_c*(1 - exp(-alpha*tau)), kappa(s) = 1/(alpha*(T_c - s)).
* ``rational``: rho(tau) = pi*(tau^2 + 1)/(2*T_c),
  psi(tau) = (2*T_c/pi)*arctan(tau), kappa(s) = pi*sec^2(pi*s/(2*T_c))/(2*T_c).

A third kind interpolates user-supplied Phi samples piecewise linearly and
integrates them exactly (trapezoid within cells); its inverse time map is
found by bisection.

kappa is unbounded at eta*T_c whenever eta == 1, which no floating-point
simulation can follow, so every profile carries a configurable gain cap
``kappa_max`` (default 1e9) applied inside :meth:`BlowUpProfile.kappa`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BlowUpProfile",
    "ProfileDomainError",
    "exponential_profile",
    "rational_profile",
    "tabulated_profile",
    "compute_eta",
    "choose_alpha_for_slack",
]

_KINDS = ("exponential", "rational", "tabulated")


class ProfileDomainError(ValueError):
    """An evaluation was requested outside a profile's domain."""


def _require_finite_nonneg(x: float, what: str) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ProfileDomainError(f"{what} must be finite and >= 0, got {x!r}")
    return x


@dataclass(frozen=True)
class BlowUpProfile:
    """Immutable time-scale object; safe to share across workers.

    Use the factory helpers :func:`exponential_profile`,
    :func:`rational_profile` and :func:`tabulated_profile` rather than the
    raw constructor.
    """

    kind: str
    T_c: float
    alpha: float = 1.0
    T_f: float = math.inf
    kappa_max: float = 1e9
    tab_tau: np.ndarray | None = field(default=None, repr=False)
    tab_phi: np.ndarray | None = field(default=None, repr=False)
    # derived, filled in __post_init__
    eta: float = field(default=0.0, init=False)
    tab_psi: np.ndarray | None = field(default=None, init=False, repr=False)
    tab_dphi: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not (math.isfinite(self.T_c) and self.T_c > 0.0):
            raise ValueError(f"T_c must be finite and > 0, got {self.T_c!r}")
        if self.kind == "exponential" and not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha!r}")
        if not (self.T_f > 0.0):
            raise ValueError(f"T_f must be > 0 (may be inf), got {self.T_f!r}")
        if not (math.isfinite(self.kappa_max) and self.kappa_max >= 1.0):
            raise ValueError(f"kappa_max must be finite and >= 1, got {self.kappa_max!r}")
        if self.kind == "tabulated":
            self._init_tabulated()
        elif self.tab_tau is not None or self.tab_phi is not None:
            raise ValueError("tau/phi samples are only valid for the tabulated kind")
        object.__setattr__(self, "eta", compute_eta(self, self.T_f))

    def _init_tabulated(self) -> None:
        taus = np.asarray(self.tab_tau, dtype=float)
        phis = np.asarray(self.tab_phi, dtype=float)
        if taus.ndim != 1 or taus.shape != phis.shape or taus.size < 2:
            raise ValueError("tabulated profile needs matching 1-d tau and phi sample arrays")
        if taus[0] != 0.0 or np.any(np.diff(taus) <= 0.0):
            raise ValueError("tau samples must start at 0 and increase strictly")
        if not np.all(np.isfinite(phis)) or np.any(phis <= 0.0):
            raise ValueError("phi samples must be finite and > 0")
        cells = 0.5 * (phis[1:] + phis[:-1]) * np.diff(taus)
        psi = np.concatenate(([0.0], np.cumsum(cells)))
        mass = psi[-1]
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(
                f"phi samples must integrate to 1 over the grid (trapezoid mass {mass:.9f})"
            )
        if math.isfinite(self.T_f) and self.T_f > taus[-1]:
            raise ValueError("T_f must lie within the tabulated tau grid")
        # centered slope estimates, one-sided at the ends
        dphi = np.gradient(phis, taus)
        object.__setattr__(self, "tab_tau", taus)
        object.__setattr__(self, "tab_phi", phis)
        object.__setattr__(self, "tab_psi", self.T_c * psi)
        object.__setattr__(self, "tab_dphi", dphi)

    # -- pointwise evaluations -------------------------------------------------

    def phi(self, tau: float) -> float:
        """Density value Phi(tau); reciprocal of T_c*rho(tau)."""
        tau = _require_finite_nonneg(tau, "tau")
        if self.kind == "exponential":
            return self.alpha * math.exp(-self.alpha * tau)
        if self.kind == "rational":
            return 2.0 / (math.pi * (tau * tau + 1.0))
        return self._tab_interp(self.tab_phi, tau)

    def rho(self, tau: float) -> float:
        """Blow-up factor rho(tau) = 1/(T_c * Phi(tau)); positive and finite."""
        tau = _require_finite_nonneg(tau, "tau")
        if self.kind == "exponential":
            return math.exp(self.alpha * tau) / (self.alpha * self.T_c)
        if self.kind == "rational":
            return math.pi * (tau * tau + 1.0) / (2.0 * self.T_c)
        return 1.0 / (self.T_c * self._tab_interp(self.tab_phi, tau))

    def drho_over_rho(self, tau: float) -> float:
        """Logarithmic slope rho'(tau)/rho(tau), in closed form per kind."""
        tau = _require_finite_nonneg(tau, "tau")
        if self.kind == "exponential":
            return self.alpha
        if self.kind == "rational":
            return 2.0 * tau / (tau * tau + 1.0)
        # rho = 1/(T_c*phi)  =>  rho'/rho = -phi'/phi
        return -self._tab_interp(self.tab_dphi, tau) / self._tab_interp(self.tab_phi, tau)

    def psi(self, tau: float) -> float:
        """Time map psi(tau) in [0, T_c); strictly increasing, psi(0) = 0."""
        tau = _require_finite_nonneg(tau, "tau")
        if self.kind == "exponential":
            return self.T_c * -math.expm1(-self.alpha * tau)
        if self.kind == "rational":
            return (2.0 * self.T_c / math.pi) * math.atan(tau)
        return self._tab_psi(tau)

    def psi_inv(self, t_hat: float) -> float:
        """Inverse time map on [0, eta*T_c); errors at or beyond eta*T_c."""
        t_hat = _require_finite_nonneg(t_hat, "t_hat")
        if t_hat >= self.eta * self.T_c:
            raise ProfileDomainError(
                f"psi_inv is defined on [0, {self.eta * self.T_c!r}), got {t_hat!r}"
            )
        if self.kind == "exponential":
            return -math.log1p(-t_hat / self.T_c) / self.alpha
        if self.kind == "rational":
            return math.tan(math.pi * t_hat / (2.0 * self.T_c))
        return self._tab_psi_inv(t_hat)

    def kappa(self, t_hat: float) -> float:
        """Gain schedule: rho(psi_inv(t_hat)) on [0, eta*T_c), 1 afterwards.

        The value is clamped to ``kappa_max``.
        """
        t_hat = _require_finite_nonneg(t_hat, "t_hat")
        if t_hat >= self.eta * self.T_c:
            return 1.0
        if self.kind == "exponential":
            k = 1.0 / (self.alpha * (self.T_c - t_hat))
        elif self.kind == "rational":
            u = math.tan(math.pi * t_hat / (2.0 * self.T_c))
            k = math.pi * (u * u + 1.0) / (2.0 * self.T_c)
        else:
            k = self.rho(self._tab_psi_inv(t_hat))
        return min(k, self.kappa_max)

    # -- tabulated helpers -----------------------------------------------------

    def _tab_locate(self, tau: float) -> int:
        taus = self.tab_tau
        if tau > taus[-1]:
            raise ProfileDomainError(
                f"tau {tau!r} lies beyond the tabulated grid end {taus[-1]!r}"
            )
        return min(int(np.searchsorted(taus, tau, side="right")) - 1, taus.size - 2)

    def _tab_interp(self, values: np.ndarray, tau: float) -> float:
        i = self._tab_locate(tau)
        taus = self.tab_tau
        w = (tau - taus[i]) / (taus[i + 1] - taus[i])
        return float(values[i] * (1.0 - w) + values[i + 1] * w)

    def _tab_psi(self, tau: float) -> float:
        # exact integral of the piecewise-linear density up to tau
        i = self._tab_locate(tau)
        taus, phis = self.tab_tau, self.tab_phi
        dt = tau - taus[i]
        slope = (phis[i + 1] - phis[i]) / (taus[i + 1] - taus[i])
        return float(self.tab_psi[i] + self.T_c * (phis[i] * dt + 0.5 * slope * dt * dt))

    def _tab_psi_inv(self, t_hat: float) -> float:
        lo, hi = 0.0, float(self.tab_tau[-1])
        tol = 1e-12 * self.T_c
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._tab_psi(mid) < t_hat:
                lo = mid
            else:
                hi = mid
            if hi - lo <= tol:
                break
        return 0.5 * (lo + hi)


def exponential_profile(
    alpha: float, T_c: float, T_f: float = math.inf, kappa_max: float = 1e9
) -> BlowUpProfile:
    """Profile with rho(tau) = exp(alpha*tau)/(alpha*T_c); rho'/rho = alpha."""
    return BlowUpProfile(kind="exponential", T_c=T_c, alpha=alpha, T_f=T_f, kappa_max=kappa_max)


def rational_profile(T_c: float, T_f: float = math.inf, kappa_max: float = 1e9) -> BlowUpProfile:
    """Profile with rho(tau) = pi*(tau^2+1)/(2*T_c); rho'/rho vanishes at infinity."""
    return BlowUpProfile(kind="rational", T_c=T_c, T_f=T_f, kappa_max=kappa_max)


def tabulated_profile(
    tau_samples,
    phi_samples,
    T_c: float,
    T_f: float = math.inf,
    kappa_max: float = 1e9,
) -> BlowUpProfile:
    """Profile built from density samples on a tau grid starting at 0.

    The samples are interpolated piecewise linearly; their trapezoid mass over
    the grid must equal 1 to within 1e-6. Evaluations beyond the grid end
    raise :class:`ProfileDomainError`.
    """
    return BlowUpProfile(
        kind="tabulated",
        T_c=T_c,
        T_f=T_f,
        kappa_max=kappa_max,
        tab_tau=np.asarray(tau_samples, dtype=float),
        tab_phi=np.asarray(phi_samples, dtype=float),
    )


def compute_eta(p: BlowUpProfile, T_f: float) -> float:
    """Fraction of T_c consumed by tau in [0, T_f]: lim psi(tau)/T_c.

    Exactly 1.0 for infinite T_f on the built-in kinds.
    """
    if not T_f > 0.0:
        raise ValueError(f"T_f must be > 0, got {T_f!r}")
    if math.isinf(T_f):
        if p.kind == "tabulated":
            return float(p.tab_psi[-1] / p.T_c)
        return 1.0
    if p.kind == "exponential":
        return -math.expm1(-p.alpha * T_f)
    if p.kind == "rational":
        return (2.0 / math.pi) * math.atan(T_f)
    return p._tab_psi(T_f) / p.T_c


def choose_alpha_for_slack(
    T_f_star: float, T_max_star: float, T_c: float, eps: float
) -> tuple[float, float]:
    """Pick an exponential rate whose settling-bound slack is at most eps.

    For an exponential profile the slack between the tightest achievable bound
    and the prescribed one is
    ``s(alpha) = T_c*(exp(-alpha*T_f_star) - exp(-alpha*T_max_star))``.
    The function returns ``(alpha, s(alpha))`` with ``s(alpha) <= eps``, found
    by doubling on the decreasing tail of ``s`` followed by bisection.
    """
    if not (0.0 < T_f_star <= T_max_star < math.inf):
        raise ValueError("need 0 < T_f_star <= T_max_star < inf")
    if not eps > 0.0:
        raise ValueError("eps must be > 0")
    if T_f_star == T_max_star:
        return 1.0, 0.0

    def slack(a: float) -> float:
        return T_c * (math.exp(-a * T_f_star) - math.exp(-a * T_max_star))

    # s rises to a single peak then decays to 0; work on the tail only
    a_peak = math.log(T_max_star / T_f_star) / (T_max_star - T_f_star)
    lo = a_peak
    hi = max(2.0 * a_peak, 1.0)
    while slack(hi) > eps:
        hi *= 2.0
        if hi > 1e12:  # eps so small the tail never gets there in float
            break
    if slack(lo) <= eps:
        return lo, slack(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if slack(mid) > eps:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return hi, slack(hi)
