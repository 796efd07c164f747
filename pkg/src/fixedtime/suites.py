"""Named verification suites exposed through the service and the CLI.

Each suite runs a fixed list of checks with frozen configurations and
returns a report dict with one entry per check, each carrying measured
values next to its pass flag. Ordering is deterministic.
"""

from __future__ import annotations

import math

import numpy as np

from .fields import DriftG, LinearField
from .profiles import (
    BlowUpProfile,
    choose_alpha_for_slack,
    compute_eta,
    exponential_profile,
    rational_profile,
)
from .redesign import SystemPair
from .runner import run_example
from .scenarios import builtin_example
from .sim import StepPolicy, simulate_pair
from .signals import DisturbanceSignal, SignalModel
from .verify import (
    adaptive_simpson,
    check_gain_bound,
    check_ubst_sweep,
    equivalence_oracle,
    estimate_settling_time,
    exponential_growth_condition,
    lyapunov_solve,
    lyapunov_solve_kron,
    prop_r_min,
)

__all__ = ["SUITES", "run_suite"]

SUITES = ("profiles", "equivalence", "ubst", "gains", "lyapunov", "lemma4", "all")


def _check(name: str, passed: bool, **measured) -> dict:
    return {"name": name, "passed": bool(passed), "measured": measured}


def _suite(name: str, checks: list[dict]) -> dict:
    return {"suite": name, "passed": all(c["passed"] for c in checks), "checks": checks}


# -- profiles -----------------------------------------------------------------------


def _profile_grid(p: BlowUpProfile, tau_hi: float, count: int = 200) -> np.ndarray:
    return np.concatenate(([0.0], np.logspace(-6, math.log10(tau_hi), count - 1)))


def suite_profiles() -> dict:
    checks = []
    # the exponential grid stops where the inverse time map stays well
    # conditioned in double precision; the rational map has no such limit
    cases = [
        ("exponential", exponential_profile(1.0, 1.0, T_f=14.0, kappa_max=1e25), 14.0),
        ("rational", rational_profile(1.0, kappa_max=1e25), 50.0),
    ]
    for label, p, tau_hi in cases:
        taus = _profile_grid(p, tau_hi)
        recip = max(abs(p.T_c * p.rho(t) * p.phi(t) - 1.0) for t in taus)
        checks.append(_check(f"reciprocal_identity_{label}", recip <= 1e-12, max_abs=recip))
        comp = 0.0
        for t in taus:
            that = p.psi(t)
            if that < p.eta * p.T_c:
                comp = max(comp, abs(p.kappa(that) - p.rho(t)) / p.rho(t))
        checks.append(_check(f"composition_identity_{label}", comp <= 1e-9, max_rel=comp))
        psis = [p.psi(t) for t in taus]
        checks.append(_check(f"psi_strictly_increasing_{label}",
                             all(b > a for a, b in zip(psis, psis[1:])),
                             samples=len(psis)))
        thats = np.linspace(0.0, p.eta * p.T_c * 0.999999, 200)
        kaps = [p.kappa(v) for v in thats]
        checks.append(_check(f"kappa_nondecreasing_{label}",
                             all(b >= a for a, b in zip(kaps, kaps[1:])),
                             max_kappa=max(kaps)))
        quad_dev = 0.0
        for t in np.linspace(0.05, min(20.0, tau_hi), 40):
            cf = p.psi(t)
            q = p.T_c * adaptive_simpson(p.phi, 0.0, t, tol=1e-12)
            quad_dev = max(quad_dev, abs(cf - q) / cf)
        checks.append(_check(f"quadrature_agreement_{label}", quad_dev <= 1e-8,
                             max_rel=quad_dev))
    p_exp = exponential_profile(1.0, 1.0)
    p_rat = rational_profile(1.0)
    checks.append(_check("eta_at_infinity",
                         compute_eta(p_exp, math.inf) == 1.0
                         and compute_eta(p_rat, math.inf) == 1.0))
    eta_dev = max(
        abs(compute_eta(p_exp, tf) - (1.0 - math.exp(-tf))) for tf in (math.log(2.0), 5.0)
    )
    checks.append(_check("eta_closed_form", eta_dev <= 1e-15, max_abs=eta_dev))
    alpha, slack = choose_alpha_for_slack(1.0, 233.7349, 1.0, 1e-3)
    checks.append(_check("slack_chooser", slack <= 1e-3, alpha=alpha, slack=slack))
    return _suite("profiles", checks)


# -- equivalence ---------------------------------------------------------------------


def _linear_pair(r: float) -> SystemPair:
    return SystemPair(
        profile=exponential_profile(1.0, 1.0),
        field=LinearField(n=2, r=r, K=(-2.0, -1.0)),
        drift=DriftG(n=2, m=0, l=(-2.0, -1.0)),
        L=3.0,
    )


def suite_equivalence() -> dict:
    checks = []
    sp = _linear_pair(3.0)
    rep = equivalence_oracle(sp, np.array([1.0, 0.0]), tau_max=3.0, h=1e-5)
    checks.append(_check("linear_deviation", rep.max_deviation <= 1e-3,
                         max_deviation=rep.max_deviation, h=1e-5))
    rep2 = equivalence_oracle(sp, np.array([1.0, 0.0]), tau_max=3.0, h=5e-6)
    ratio = rep2.max_deviation / rep.max_deviation
    checks.append(_check("first_order_halving", 0.4 <= ratio <= 0.6,
                         ratio=ratio, dev_h=rep.max_deviation, dev_h2=rep2.max_deviation))
    sc3 = builtin_example(3)
    sp3 = sc3.to_system_pair()
    dist = DisturbanceSignal(kind="tau_harmonic", L=2.5,
                             model=SignalModel.harmonic([(2.5, 1.0)]),
                             profile=sp3.profile, t0=sp3.t0)
    rep3 = equivalence_oracle(sp3, np.array([10.0, 0.0]), tau_max=3.0, h=1e-5,
                              disturbance=dist)
    checks.append(_check("composite_disturbed_deviation", rep3.max_deviation <= 1e-2,
                         max_deviation=rep3.max_deviation))
    checks.append(_check("zero_stays_zero",
                         equivalence_oracle(sp, np.zeros(2), tau_max=3.0,
                                            h=1e-4).max_deviation == 0.0))
    return _suite("equivalence", checks)


# -- settling-bound sweep ----------------------------------------------------------------


def _sweep_inits(n: int):
    out = []
    for k in range(3):
        for sign in (1.0, -1.0):
            x0 = np.zeros(n)
            x0[0] = sign * 10.0**k
            out.append(x0)
    return out


def sweep_family(family: str):
    """(SystemPair, StepPolicy, horizon) for one of the three field families."""
    if family == "linear":
        A = LinearField(n=2, r=1.0, K=(-2.0, -1.0)).closed_loop
        r = 1.1 * prop_r_min(A, 2)
        sp = _linear_pair(r)
        return sp, StepPolicy(h=1e-5, kappa_ref=10.0, stride=1), 2.0
    if family == "hosm":
        sc = builtin_example(1, horizon=2.0, stride=1)
        return sc.to_system_pair(), sc.to_policy(), 2.0
    if family == "canonical":
        sc = builtin_example(3, horizon=2.0, stride=1)
        return sc.to_system_pair(), sc.to_policy(), 2.0
    raise ValueError(f"unknown family {family!r}")


def suite_ubst() -> dict:
    checks = []
    expected_signature = {
        "linear": "settle_toward_bound",
        "hosm": "settle_toward_bound",
        "canonical": "settle_uniformly_below_bound",
    }
    for family in ("linear", "hosm", "canonical"):
        sp, policy, horizon = sweep_family(family)
        rep = check_ubst_sweep(sp, _sweep_inits(sp.n), 1e-2, 0.5, policy, horizon)
        checks.append(_check(f"sweep_within_bound_{family}", rep.all_within_bound,
                             bound=rep.bound,
                             settles=[r["settle_time"] for r in rep.rows]))
        if family == "linear":
            checks.append(_check("sweep_monotone_linear", rep.monotone_nondecreasing))
        checks.append(_check(f"sweep_signature_{family}",
                             rep.signature == expected_signature[family],
                             signature=rep.signature))
    return _suite("ubst", checks)


# -- gain bounds --------------------------------------------------------------------------


def suite_gains() -> dict:
    checks = []
    res = run_example(3)
    traj = res.trajectory
    sc3 = builtin_example(3)
    p3 = sc3.to_profile()
    rep = check_gain_bound(traj, p3, p3.T_f)
    checks.append(_check("bounded_gain_design", (not rep.skipped) and rep.passed,
                         max_recorded=rep.max_recorded, bound=rep.bound))
    checks.append(_check("max_gain_finite", math.isfinite(rep.max_recorded),
                         max_recorded=rep.max_recorded))
    p_rat = rational_profile(1.0)
    sp = SystemPair(p_rat, LinearField(n=2, r=4.0, K=(-2.0, -1.0)),
                    DriftG(n=2, m=0, l=(-2.0, -1.0)), L=0.0)
    tr = simulate_pair(sp, np.array([1.0, 0.0]), 1.5,
                       StepPolicy(h=1e-4, kappa_ref=10.0, stride=10))
    skip = check_gain_bound(tr, p_rat, math.nan)
    checks.append(_check("unbounded_design_skipped",
                         skip.skipped and "unbounded-gain" in skip.note,
                         note=skip.note))
    return _suite("gains", checks)


# -- Lyapunov -------------------------------------------------------------------------------


def _random_hurwitz(rng, n: int) -> np.ndarray:
    R = rng.normal(size=(n, n))
    shift = max(np.linalg.eigvals(R).real.max(), 0.0) + 0.5 + rng.uniform(0.1, 1.0)
    return R - shift * np.eye(n)


def suite_lyapunov() -> dict:
    checks = []
    rng = np.random.default_rng(20250810)
    worst_res = 0.0
    worst_gap = 0.0
    for i in range(20):
        n = 2 + i % 4
        A = _random_hurwitz(rng, n)
        P, _ = lyapunov_solve(A)
        res = np.linalg.norm(P @ A + A.T @ P + np.eye(n), np.inf)
        gap = np.abs(P - lyapunov_solve_kron(A)).max()
        worst_res = max(worst_res, res)
        worst_gap = max(worst_gap, gap)
    checks.append(_check("residual_20_random", worst_res <= 1e-9, max_residual=worst_res))
    checks.append(_check("two_route_agreement", worst_gap <= 1e-8, max_gap=worst_gap))
    P, lam = lyapunov_solve(-np.eye(2))
    checks.append(_check("identity_case", abs(lam - 0.5) <= 1e-14
                         and np.abs(P - 0.5 * np.eye(2)).max() <= 1e-14, lam_max=lam))
    checks.append(_check("r_min_first_order", prop_r_min(np.array([[-1.0]]), 1) == 0.0))
    A = LinearField(n=2, r=1.0, K=(-2.0, -1.0)).closed_loop
    r_min = prop_r_min(A, 2)
    sp = _linear_pair(1.1 * r_min)
    policy = StepPolicy(h=1e-5, kappa_ref=10.0, stride=1)
    rep = estimate_settling_time(simulate_pair(sp, np.array([10.0, 0.0]), 2.0, policy),
                                 1e-2, 0.5)
    checks.append(_check("settles_above_r_min", rep.settled and rep.settle_time <= 1.0,
                         r=1.1 * r_min, settle_time=rep.settle_time))
    sp0 = _linear_pair(0.0)
    rep0 = estimate_settling_time(simulate_pair(sp0, np.array([10.0, 0.0]), 2.0, policy),
                                  1e-2, 0.5)
    checks.append(_check("gain_removed_does_not_settle",
                         (not rep0.settled) or rep0.settle_time > 1.0,
                         settled=rep0.settled, settle_time=rep0.settle_time))
    return _suite("lyapunov", checks)


# -- exponential growth condition -----------------------------------------------------------


def suite_lemma4() -> dict:
    checks = []
    p = exponential_profile(1.0, 1.0)
    hold = exponential_growth_condition(2.5, p, 3, tau_star=1.0)
    checks.append(_check("holds_above_asymptote", hold.holds and hold.asymptote == 2.0,
                         **hold.as_dict()))
    fail = exponential_growth_condition(1.5, p, 3, tau_star=1.0)
    checks.append(_check("fails_below_asymptote", (not fail.holds) and fail.asymptote == 2.0,
                         **fail.as_dict()))
    triv = exponential_growth_condition(0.1, p, 1, tau_star=1.0)
    checks.append(_check("first_order_always_holds", triv.holds, sup_rhs=triv.sup_rhs))
    return _suite("lemma4", checks)


_SUITE_FNS = {
    "profiles": suite_profiles,
    "equivalence": suite_equivalence,
    "ubst": suite_ubst,
    "gains": suite_gains,
    "lyapunov": suite_lyapunov,
    "lemma4": suite_lemma4,
}


def run_suite(name: str) -> dict:
    """Run one named suite, or all of them in a fixed order."""
    if name == "all":
        parts = [_SUITE_FNS[s]() for s in SUITES if s != "all"]
        return {"suite": "all", "passed": all(p["passed"] for p in parts), "suites": parts}
    if name not in _SUITE_FNS:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    return _SUITE_FNS[name]()
