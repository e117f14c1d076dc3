"""Probabilistic N-k interdiction solver for power transmission networks.

Finds the set of k line failures maximizing probability-weighted minimum
load shed, via a cutting-plane algorithm over network-flow, DC and
second-order-cone inner formulations, with a complete-enumeration oracle
for certification on small instances.
"""

from .enumeration import EnumerationTable, enumerate_scenarios
from .inner import (CutCoefficients, InnerOptions, InnerSolution, build_dc, build_soc,
                    cut_coefficients, soc_tightness, solve_inner)
from .master import (MasterProblem, SolveReport, cutting_plane, hamming,
                     initial_scenario, solve_master)
from .network import (Bus, Line, Network, Scenario, SubNetwork, apply_scenario,
                      from_json, parse_matpower, parse_probabilities)

__all__ = [
    "Bus", "Line", "Network", "Scenario", "SubNetwork",
    "apply_scenario", "from_json", "parse_matpower", "parse_probabilities",
    "InnerOptions", "InnerSolution", "CutCoefficients",
    "build_dc", "build_soc", "cut_coefficients", "soc_tightness", "solve_inner",
    "MasterProblem", "SolveReport", "cutting_plane", "hamming",
    "initial_scenario", "solve_master",
    "EnumerationTable", "enumerate_scenarios",
]
__version__ = "0.1.0"
