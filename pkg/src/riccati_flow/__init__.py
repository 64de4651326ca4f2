"""Structure-preserving doubling, Riccati flows on symplectic pairs and
Hamiltonian canonical forms.

Main entry points
-----------------
run_sda
    Doubling iteration for DARE and NME problems.
build_flow_problem, extended_X, singular_times
    The flow through a symplectic pair and its blow-up times.
JordanSpec, exp_J
    Canonical forms and their closed-form exponentials.
elementary_limit, general_limit, sda_class
    Long-time predictions for canonical flows and doubling runs.
"""

from .config import ExampleConfig, ScanConfig, SdaConfig, Tolerances
from .errors import (AssumptionError, BranchCutError, BreakdownError, DimensionError,
                     HypothesisError, IndexTooHighError, NotInClassError, NotRegularError,
                     NumericalBreakdown, PoleError, RiccatiFlowError, SingularityError,
                     SpecError, UsageError)
from .flow import (BLOWUP, build_flow_problem, crosscheck_linear_system, extended_X,
                   flow_pair, flow_singular_times, propagate, radon_residual, rde_solve,
                   sample_doubling, singular_times)
from .hjcf import CBlock, DBlock, EBlock, JordanSpec, RBlock, build_J, exp_J
from .pairs import HermitianBlock, PairClass, SymplecticPair, from_pair, to_pair
from .sda import CareProblem, DareProblem, NmeProblem, cayley, run_sda
from .asymptotics import (CanonicalFlow, blowup_period, elementary_limit, general_limit,
                          residual_scan, sda_class)

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "BLOWUP", "BranchCutError", "BreakdownError", "CBlock",
    "CanonicalFlow", "CareProblem", "DBlock", "DareProblem", "DimensionError", "EBlock",
    "ExampleConfig", "HermitianBlock", "HypothesisError", "IndexTooHighError",
    "JordanSpec", "NmeProblem", "NotInClassError", "NotRegularError", "NumericalBreakdown",
    "PairClass", "PoleError", "RBlock", "RiccatiFlowError", "ScanConfig", "SdaConfig",
    "SingularityError", "SpecError", "SymplecticPair", "Tolerances", "UsageError",
    "blowup_period", "build_J", "build_flow_problem", "cayley", "crosscheck_linear_system",
    "elementary_limit", "exp_J", "extended_X", "flow_pair", "flow_singular_times",
    "from_pair", "general_limit", "propagate", "radon_residual", "rde_solve",
    "residual_scan", "run_sda", "sample_doubling", "sda_class", "singular_times", "to_pair",
]
