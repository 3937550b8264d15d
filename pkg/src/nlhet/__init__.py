"""Heteroclinic connections for strongly nonlocal equations.

Computes layer solutions of  L Q + a(x) W'(Q) = 0  (L a singular kernel
operator comparable to the fractional Laplacian with s in (1/4, 1/2]) by
constrained minimization of a renormalized energy with viscosity and
penalization continuation, plus the diagnostic suite: clean intervals,
stickiness, two-sided obstacle bounds, Hoelder/decay estimates, and the
norm-scaling benchmark families.
"""

from .model import (KernelSpec, ModulationSpec, PotentialSpec, ProblemSpec,
                    ReferenceProfile, kernel_eval, potential_eval_grad,
                    reference_profile_eval, verify_model)
from .discretize import (Grid, Profile, TailClosure, apply_full_operator,
                         apply_nonlocal, bilinear_form, seminorm_K)
from .energy import (EnergyBreakdown, energy_gradient, renormalized_interaction,
                     total_energy)
from .obstacles import (ObstacleConfig, ObstaclePair, build_envelopes,
                        project_admissible, solve_barrier)
from .solver import (ContinuationSchedule, SolveResult, SolverConfig,
                     continuation_run, minimize_constrained, residual_EL,
                     truncate_to_wells, verify_apriori_bounds)

__version__ = "0.1.0"

__all__ = [
    "KernelSpec", "ModulationSpec", "PotentialSpec", "ProblemSpec",
    "ReferenceProfile", "kernel_eval", "potential_eval_grad",
    "reference_profile_eval", "verify_model",
    "Grid", "Profile", "TailClosure", "apply_full_operator", "apply_nonlocal",
    "bilinear_form", "seminorm_K",
    "EnergyBreakdown", "energy_gradient", "renormalized_interaction",
    "total_energy",
    "ObstacleConfig", "ObstaclePair", "build_envelopes", "project_admissible",
    "solve_barrier",
    "ContinuationSchedule", "SolveResult", "SolverConfig", "continuation_run",
    "minimize_constrained", "residual_EL", "truncate_to_wells",
    "verify_apriori_bounds",
    "__version__",
]
