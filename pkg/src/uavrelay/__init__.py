"""Power-optimal deployment of aerial relays between ground densities."""

from .density import Density, GridDensity, MomentSet, combine_w, combine_z, moments, p_norm, pdf, sample
from .cost import (
    Deployment,
    EvalConfig,
    PowerEstimate,
    Scenario,
    SelectionRule,
    evaluate,
    gr_side_cost,
    link_cost,
    select,
)
from .lloyd import LloydConfig, LloydResult, centroid_update, lagrangian_cost, optimize

__version__ = "0.1.0"

__all__ = [
    "Density",
    "GridDensity",
    "MomentSet",
    "combine_w",
    "combine_z",
    "moments",
    "p_norm",
    "pdf",
    "sample",
    "Deployment",
    "EvalConfig",
    "PowerEstimate",
    "Scenario",
    "SelectionRule",
    "evaluate",
    "gr_side_cost",
    "link_cost",
    "select",
    "LloydConfig",
    "LloydResult",
    "centroid_update",
    "lagrangian_cost",
    "optimize",
]
