"""Numerical checks of the settling, equivalence and gain guarantees.

Every check returns a small report object (or dict) with the measured
quantities so callers can log evidence instead of bare booleans. The checks
are pure analyses over immutable inputs and can run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import BlowUpProfile, ProfileDomainError
from .redesign import SystemPair
from .sim import StepPolicy, Trajectory, simulate_aux, simulate_pair
from .signals import DisturbanceSignal

__all__ = [
    "SettlingReport",
    "estimate_settling_time",
    "EquivalenceReport",
    "equivalence_oracle",
    "lyapunov_solve",
    "lyapunov_solve_kron",
    "prop_r_min",
    "Lemma4Report",
    "exponential_growth_condition",
    "SweepReport",
    "check_ubst_sweep",
    "GainBoundReport",
    "check_gain_bound",
    "adaptive_simpson",
]

_HURWITZ_MARGIN = -1e-9


# -- settling --------------------------------------------------------------------


@dataclass(frozen=True)
class SettlingReport:
    """Outcome of the grid settling scan."""

    settled: bool
    settle_time: float | None
    epsilon: float
    dwell: float
    max_post_excursion: float | None
    t_end: float

    def as_dict(self) -> dict:
        return {
            "settled": self.settled,
            "settle_time": self.settle_time,
            "epsilon": self.epsilon,
            "dwell": self.dwell,
            "max_post_excursion": self.max_post_excursion,
            "t_end": self.t_end,
        }


def estimate_settling_time(traj: Trajectory, epsilon: float, dwell: float) -> SettlingReport:
    """Earliest grid time after which the sup-norm stays within epsilon.

    The norm must stay within epsilon through the end of the trajectory and
    the remaining span must cover at least ``dwell``; the scan walks backward
    from the last sample.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be > 0")
    t_end = float(traj.times[-1])
    if dwell > t_end - float(traj.times[0]):
        raise ValueError("dwell exceeds the trajectory span")
    sup = traj.sup_norms()
    above = np.flatnonzero(sup > epsilon)
    if above.size == 0:
        idx = 0
    elif above[-1] == len(sup) - 1:
        return SettlingReport(False, None, epsilon, dwell, None, t_end)
    else:
        idx = int(above[-1]) + 1
    settle = float(traj.times[idx])
    if t_end - settle < dwell:
        return SettlingReport(False, None, epsilon, dwell, None, t_end)
    return SettlingReport(True, settle, epsilon, dwell, float(sup[idx:].max()), t_end)


# -- time-scale equivalence --------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceReport:
    """Deviation between the mapped auxiliary run and the direct run."""

    max_deviation: float
    component_deviation: np.ndarray
    grid: np.ndarray
    h: float


def equivalence_oracle(
    sp: SystemPair,
    z0,
    tau_max: float,
    grid=None,
    h: float = 1e-5,
    kappa_ref: float = 10.0,
    disturbance: DisturbanceSignal | None = None,
) -> EquivalenceReport:
    """Integrate both systems and compare them through the time map.

    The auxiliary system runs over [0, tau_max] and its samples are carried
    to real time by ``y_i(psi(tau) + t0) = (r*rho(tau))**(i-1) * z_i(tau)``;
    the redesigned system runs directly from the mapped initial state. The
    deviation at each grid time is normalized per component by the sup of the
    mapped reference over the grid.
    """
    p = sp.profile
    t_span = p.psi(tau_max)
    if not t_span < p.eta * p.T_c:
        raise ProfileDomainError("psi(tau_max) must stay below eta*T_c")
    if grid is None:
        grid = np.linspace(0.0, t_span, 200)
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0.0) or np.any(grid > t_span * (1.0 + 1e-12)):
        raise ProfileDomainError("grid points must lie in [0, psi(tau_max)]")

    policy = StepPolicy(h=h, kappa_ref=kappa_ref, stride=1)
    aux = simulate_aux(sp, z0, tau_max, policy, disturbance, map_disturbance_time=True)

    r = sp.field.r
    powers = np.arange(sp.n)

    def map_state(tau: float, z: np.ndarray) -> np.ndarray:
        return (r * p.rho(tau)) ** powers * z

    y0 = map_state(0.0, np.asarray(z0, dtype=float))
    direct = simulate_pair(
        SystemPair(p, sp.field, sp.drift, sp.L, sp.t0), y0, t_span, policy, disturbance
    )

    taus = np.array([p.psi_inv(min(g, t_span * (1.0 - 1e-15))) if g < t_span else tau_max
                     for g in grid])
    mapped = np.empty((grid.size, sp.n))
    for j, tau in enumerate(taus):
        zj = _interp_rows(aux.times, aux.states, tau)
        mapped[j] = map_state(tau, zj)
    directed = np.empty_like(mapped)
    t_rel = direct.times - sp.t0
    for j, g in enumerate(grid):
        directed[j] = _interp_rows(t_rel, direct.states, g)

    scale = np.maximum(np.max(np.abs(mapped), axis=0), 1e-30)
    dev = np.abs(directed - mapped) / scale
    return EquivalenceReport(float(dev.max()), dev.max(axis=0), grid, h)


def _interp_rows(times: np.ndarray, rows: np.ndarray, t: float) -> np.ndarray:
    i = int(np.searchsorted(times, t, side="right")) - 1
    i = min(max(i, 0), len(times) - 2)
    w = (t - times[i]) / (times[i + 1] - times[i])
    w = min(max(w, 0.0), 1.0)
    return rows[i] * (1.0 - w) + rows[i + 1] * w


# -- Lyapunov bounds ----------------------------------------------------------------


def _require_hurwitz(A: np.ndarray) -> None:
    if np.linalg.eigvals(A).real.max() >= _HURWITZ_MARGIN:
        raise ValueError("matrix is not Hurwitz")


def lyapunov_solve(A) -> tuple[np.ndarray, float]:
    """Solve P A + A^T P = -I for symmetric positive-definite P.

    Uses the n(n+1)/2 symmetric parametrization with a dense solve, checks
    the residual to 1e-9 in the matrix infinity norm, and returns P together
    with its largest eigenvalue.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    _require_hurwitz(A)
    idx = {}
    for i in range(n):
        for j in range(i, n):
            idx[(i, j)] = len(idx)
    npar = len(idx)

    def at(i, j):
        return idx[(i, j)] if i <= j else idx[(j, i)]

    S = np.zeros((npar, npar))
    b = np.zeros(npar)
    for i in range(n):
        for j in range(i, n):
            row = idx[(i, j)]
            for k in range(n):
                S[row, at(i, k)] += A[k, j]   # (P A)_{ij}
                S[row, at(k, j)] += A[k, i]   # (A^T P)_{ij}
            b[row] = -1.0 if i == j else 0.0
    p = np.linalg.solve(S, b)
    P = np.empty((n, n))
    for (i, j), k in idx.items():
        P[i, j] = P[j, i] = p[k]
    residual = np.linalg.norm(P @ A + A.T @ P + np.eye(n), np.inf)
    if residual > 1e-9:
        raise ArithmeticError(f"Lyapunov residual {residual:.3e} exceeds 1e-9")
    lam_max = float(np.linalg.eigvalsh(P)[-1])
    return P, lam_max


def lyapunov_solve_kron(A) -> np.ndarray:
    """Independent route: vectorized Kronecker-form solve of the same equation."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    _require_hurwitz(A)
    K = np.kron(A.T, np.eye(n)) + np.kron(np.eye(n), A.T)
    vec = np.linalg.solve(K, -np.eye(n).reshape(-1))
    return vec.reshape(n, n)


def prop_r_min(A, n: int) -> float:
    """Rate threshold 2*lambda_max(P)*(n-1) for the linear redesign; 0 for n=1."""
    if n == 1:
        return 0.0
    _, lam_max = lyapunov_solve(A)
    return 2.0 * lam_max * (n - 1)


# -- exponential growth condition ----------------------------------------------------


@dataclass(frozen=True)
class Lemma4Report:
    """Check of decay rate c against (n-1) * log(rho(tau))/tau on a log grid."""

    holds: bool
    witness_tau: float | None
    sup_rhs: float
    asymptote: float | None

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "witness_tau": self.witness_tau,
            "sup_rhs": self.sup_rhs,
            "asymptote": self.asymptote,
        }


def exponential_growth_condition(
    c: float, p: BlowUpProfile, n: int, tau_star: float, grid_points: int = 400
) -> Lemma4Report:
    """Does ``c > (n-1)*log(rho(tau))/tau`` hold for all tau >= tau_star?

    Evaluated on a log-spaced grid over [tau_star, 1e4]. For exponential
    profiles the right side tends to ``(n-1)*alpha``, reported as the
    analytic asymptote.
    """
    if not c > 0.0 or not tau_star > 0.0:
        raise ValueError("need c > 0 and tau_star > 0")
    taus = np.logspace(math.log10(tau_star), 4.0, grid_points)
    if p.kind == "tabulated":
        taus = taus[taus <= p.tab_tau[-1]]
    rhs = np.array([(n - 1) * math.log(p.rho(t)) / t for t in taus])
    bad = np.flatnonzero(c <= rhs)
    asymptote = (n - 1) * p.alpha if p.kind == "exponential" else None
    if asymptote is not None and c <= asymptote:
        # the grid may end before the asymptote is reached; the limit decides
        witness = float(taus[bad[0]]) if bad.size else float(taus[-1])
        return Lemma4Report(False, witness, float(rhs.max()), asymptote)
    if bad.size:
        return Lemma4Report(False, float(taus[bad[0]]), float(rhs.max()), asymptote)
    return Lemma4Report(True, None, float(rhs.max()), asymptote)


# -- settling-bound sweep --------------------------------------------------------------


@dataclass(frozen=True)
class SweepReport:
    """Settling results for a family of initial conditions."""

    rows: tuple[dict, ...]
    bound: float
    all_within_bound: bool
    monotone_nondecreasing: bool
    signature: str

    def as_dict(self) -> dict:
        return {
            "rows": list(self.rows),
            "bound": self.bound,
            "all_within_bound": self.all_within_bound,
            "monotone_nondecreasing": self.monotone_nondecreasing,
            "signature": self.signature,
        }


def check_ubst_sweep(
    sp: SystemPair,
    inits,
    epsilon: float,
    dwell: float,
    policy: StepPolicy,
    horizon: float,
    disturbance: DisturbanceSignal | None = None,
) -> SweepReport:
    """Simulate each initial condition and compare settling to eta*T_c + 2h.

    Also classifies, on the tested grid only, whether settling times climb
    toward the bound as the initial condition grows or stay uniformly below.
    """
    bound = sp.profile.eta * sp.profile.T_c + 2.0 * policy.h
    rows = []
    for x0 in inits:
        x0 = np.asarray(x0, dtype=float)
        traj = simulate_pair(sp, x0, horizon, policy, disturbance)
        rep = estimate_settling_time(traj, epsilon, dwell)
        settle = rep.settle_time if rep.settled else math.inf
        rows.append({
            "x0": x0.tolist(),
            "norm": float(np.max(np.abs(x0))),
            "settled": rep.settled,
            "settle_time": None if math.isinf(settle) else settle,
            "within_bound": settle <= bound,
        })
    ok = all(r["within_bound"] for r in rows)
    # monotonicity over magnitudes (worst settle among inits of equal norm)
    by_norm: dict[float, float] = {}
    for r in rows:
        s = math.inf if r["settle_time"] is None else r["settle_time"]
        by_norm[r["norm"]] = max(by_norm.get(r["norm"], 0.0), s)
    norms = sorted(by_norm)
    settles = [by_norm[v] for v in norms]
    grid_tol = policy.h * policy.stride
    monotone = all(s2 >= s1 - grid_tol for s1, s2 in zip(settles, settles[1:]))
    top = settles[-1] if settles else math.inf
    eta_Tc = sp.profile.eta * sp.profile.T_c
    signature = (
        "settle_toward_bound"
        if monotone and math.isfinite(top) and top >= 0.86 * eta_Tc
        else "settle_uniformly_below_bound"
    )
    return SweepReport(tuple(rows), bound, ok, monotone, signature)


# -- gain bound --------------------------------------------------------------------------


@dataclass(frozen=True)
class GainBoundReport:
    """Recorded-gain check against the profile limit at the settling bound."""

    skipped: bool
    note: str
    max_recorded: float
    bound: float | None
    passed: bool

    def as_dict(self) -> dict:
        return {
            "skipped": self.skipped,
            "note": self.note,
            "max_recorded": self.max_recorded,
            "bound": self.bound,
            "passed": self.passed,
        }


def check_gain_bound(traj: Trajectory, p: BlowUpProfile, T_max_star: float) -> GainBoundReport:
    """Assert every recorded gain stays at or below rho(T_max_star).

    Designs without a finite settling bound on the auxiliary system have no
    gain bound; the check is then skipped with a note.
    """
    max_rec = float(traj.gains.max())
    if math.isinf(p.T_f):
        return GainBoundReport(True, "unbounded-gain design (T_f is infinite)",
                               max_rec, None, True)
    if not math.isfinite(T_max_star):
        raise ValueError("T_max_star must be finite")
    bound = p.rho(T_max_star)
    return GainBoundReport(False, "", max_rec, bound, bool(max_rec <= bound))


# -- quadrature -----------------------------------------------------------------------------


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature; independent route for checking closed forms."""

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, depth):
        x1 = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + x1)
        xr = 0.5 * (x1 + x2)
        fl, fr = f(xl), f(xr)
        left = simpson(x0, x1, f0, fl, f1)
        right = simpson(x1, x2, f1, fr, f2)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(x0, x1, f0, fl, f1, left, depth + 1)
                + recurse(x1, x2, f1, fr, f2, right, depth + 1))

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 0)
