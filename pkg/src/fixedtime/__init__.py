"""Prescribed settling-time redesign toolkit.

Takes a stable chain-of-integrators design (linear, sliding-mode or
composite correction fields), wraps it in a time-varying gain ladder driven
by a blow-up profile, and produces a non-autonomous system whose settling
time is bounded by a user-chosen constant regardless of the initial state.
Ships simulation kernels for the stiff transient, an online differentiator
built on the same machinery, and verification suites for the settling,
equivalence and gain-bound guarantees.
"""

from .differentiator import DifferentiatorRun, FilteringDifferentiator
from .fields import (
    CanonicalField,
    CorrectionField,
    DriftG,
    FieldConstructionError,
    HosmField,
    LinearField,
    PowerSum,
    SignedPowerTerm,
    build_canonical_transform,
    signed_power,
)
from .profiles import (
    BlowUpProfile,
    ProfileDomainError,
    choose_alpha_for_slack,
    compute_eta,
    exponential_profile,
    rational_profile,
    tabulated_profile,
)
from .redesign import ContractViolationError, SystemPair, aux_rhs, eval_H, redesigned_rhs
from .runner import RunResult, run_example, run_scenario
from .scenarios import Scenario, builtin_example
from .sim import (
    SimulationDivergedError,
    StepPolicy,
    Trajectory,
    integrate,
    simulate_aux,
    simulate_pair,
)
from .signals import DisturbanceBoundError, DisturbanceSignal, SignalModel
from .suites import SUITES, run_suite
from .verify import (
    EquivalenceReport,
    GainBoundReport,
    Lemma4Report,
    SettlingReport,
    SweepReport,
    check_gain_bound,
    check_ubst_sweep,
    equivalence_oracle,
    estimate_settling_time,
    exponential_growth_condition,
    lyapunov_solve,
    lyapunov_solve_kron,
    prop_r_min,
)

__version__ = "0.1.0"

__all__ = [
    "BlowUpProfile",
    "CanonicalField",
    "ContractViolationError",
    "CorrectionField",
    "DifferentiatorRun",
    "DisturbanceBoundError",
    "DisturbanceSignal",
    "DriftG",
    "EquivalenceReport",
    "FieldConstructionError",
    "FilteringDifferentiator",
    "GainBoundReport",
    "HosmField",
    "Lemma4Report",
    "LinearField",
    "PowerSum",
    "ProfileDomainError",
    "RunResult",
    "SUITES",
    "Scenario",
    "SettlingReport",
    "SignalModel",
    "SignedPowerTerm",
    "SimulationDivergedError",
    "StepPolicy",
    "SweepReport",
    "SystemPair",
    "Trajectory",
    "aux_rhs",
    "build_canonical_transform",
    "builtin_example",
    "check_gain_bound",
    "check_ubst_sweep",
    "choose_alpha_for_slack",
    "compute_eta",
    "equivalence_oracle",
    "estimate_settling_time",
    "eval_H",
    "exponential_growth_condition",
    "exponential_profile",
    "integrate",
    "lyapunov_solve",
    "lyapunov_solve_kron",
    "prop_r_min",
    "rational_profile",
    "redesigned_rhs",
    "run_example",
    "run_scenario",
    "run_suite",
    "signed_power",
    "simulate_aux",
    "simulate_pair",
    "tabulated_profile",
]
