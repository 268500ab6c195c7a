"""linklock: planar tree-linkage analysis.

Locked self-touching trees, rule-based rigidity reduction, and a numerical
flattening solver with a delta-perturbation lockedness probe.
"""

from ._accel import backend_name
from .constants import FLAT_TOL, TOL_ANG, TOL_GEOM, TOL_LEN, TOL_RANK
from .flatten import FlattenResult, flatness, flatten, max_displacement
from .geom import SegmentPairClass, angle_at, classify_pair, convex_angle_surrounds
from .model import (Configuration, Edge, FormatError, Linkage, Motion,
                    ValidationError, edge_length_residual, is_nontouching)
from .probe import ProbeReport, run_probe
from .rigidity import (ReductionTrace, RuleApplication, detect_rule1,
                       detect_rule2, infinitesimal_dof, reduce)
from .touching import (CollocationGroup, TouchingConfig, add_zero_length_edges,
                       collocation_groups, perturb)

__all__ = [
    "backend_name",
    "FLAT_TOL", "TOL_ANG", "TOL_GEOM", "TOL_LEN", "TOL_RANK",
    "FlattenResult", "flatness", "flatten", "max_displacement",
    "SegmentPairClass", "angle_at", "classify_pair", "convex_angle_surrounds",
    "Configuration", "Edge", "FormatError", "Linkage", "Motion",
    "ValidationError", "edge_length_residual", "is_nontouching",
    "ProbeReport", "run_probe",
    "ReductionTrace", "RuleApplication", "detect_rule1", "detect_rule2",
    "infinitesimal_dof", "reduce",
    "CollocationGroup", "TouchingConfig", "add_zero_length_edges",
    "collocation_groups", "perturb",
]

__version__ = "0.1.0"
