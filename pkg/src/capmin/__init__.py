"""capmin: global minimizers of 1-D thin-film energies under a mass constraint.

The energy is E[u] = integral of u'^2/2 + Q(u) over the line, minimized
among nonnegative profiles of fixed mass, for wetting potentials Q with a
mild short-range singularity Q(s) ~ A s^(1-m), 1 < m < 3. The package
classifies the large-mass regime (droplet, pancake or transition),
constructs the compactly supported symmetric minimizers by first-integral
quadrature with an independent ODE oracle, enumerates mass branches to
detect non-uniqueness, and evaluates the closed-form large-mass
asymptotics.
"""

from .errors import (
    CapminError,
    DomainError,
    NoBracket,
    NoMinimizerError,
    NotAdmissible,
    NotApplicable,
    ParamError,
    QuadratureError,
    ResolutionError,
    StepError,
    UsageError,
)
from .potential import (
    INF,
    CustomPotential,
    Family,
    Inf,
    PotentialSpec,
    PotentialValues,
    evaluate,
    is_inf,
    q_total,
    spec_from_json,
    spec_to_json,
    spreading_limit,
    validate,
)
from .landscape import (
    Classification,
    LandscapeReport,
    Regime,
    Thresholds,
    Uniqueness,
    Z0Interval,
    admissible_contains,
    admissible_intervals,
    classify,
    compute_e_star,
    compute_z0_interval,
    landscape_report,
    thresholds,
)
from .profile import (
    Profile,
    energy,
    mass,
    solve_profile,
    solve_profile_ode,
)
from .minimizer import (
    BranchSolution,
    MinimizerSolution,
    SweepTable,
    find_energy_crossing,
    global_minimizer,
    mass_sweep,
    solve_mass,
)
from .asymptotics import (
    AsymptoticPrediction,
    c_p,
    composite_profile,
    convergence_report,
    f_p,
    f_p0,
    f_p_inverse,
    predict,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "BranchSolution",
    "CapminError",
    "Classification",
    "CustomPotential",
    "DomainError",
    "Family",
    "INF",
    "Inf",
    "LandscapeReport",
    "MinimizerSolution",
    "NoBracket",
    "NoMinimizerError",
    "NotAdmissible",
    "NotApplicable",
    "ParamError",
    "PotentialSpec",
    "PotentialValues",
    "Profile",
    "QuadratureError",
    "Regime",
    "ResolutionError",
    "StepError",
    "SweepTable",
    "Thresholds",
    "Uniqueness",
    "UsageError",
    "Z0Interval",
    "admissible_contains",
    "admissible_intervals",
    "c_p",
    "classify",
    "composite_profile",
    "compute_e_star",
    "compute_z0_interval",
    "convergence_report",
    "energy",
    "evaluate",
    "f_p",
    "f_p0",
    "f_p_inverse",
    "find_energy_crossing",
    "global_minimizer",
    "is_inf",
    "landscape_report",
    "mass",
    "mass_sweep",
    "predict",
    "q_total",
    "solve_mass",
    "solve_profile",
    "solve_profile_ode",
    "spec_from_json",
    "spec_to_json",
    "spreading_limit",
    "thresholds",
    "validate",
]
