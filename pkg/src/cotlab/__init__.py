"""Finite causal transport: compatible path laws, adapted approximations,
mixture decompositions, randomized stopping times and the causal LP."""

from .adapted import approximate_adapted
from .compat import check_ci, check_mgale, check_proj, check_reverse, is_compatible, run_all
from .errors import CotlabError, GranularityError, NotCompatible, NotRandomizedST
from .extreme import decompose_compatible, linear_opt_via_extremes, recompose
from .measure import Coupling, DiscreteMeasure, FiniteSpace, Kernel
from .paths import AdaptedMap, JointPathLaw, PathMeasure, PathSpace, push_adapted
from .stopping import RandomizedStoppingTime, StoppingTime, approximate_stopping, decompose_stopping
from .transport import causal_value, control_values, kantorovich

__version__ = "0.1.0"

__all__ = [
    "AdaptedMap", "Coupling", "CotlabError", "DiscreteMeasure", "FiniteSpace", "GranularityError",
    "JointPathLaw", "Kernel", "NotCompatible", "NotRandomizedST", "PathMeasure", "PathSpace",
    "RandomizedStoppingTime", "StoppingTime", "approximate_adapted", "approximate_stopping",
    "causal_value", "check_ci", "check_mgale", "check_proj", "check_reverse", "control_values",
    "decompose_compatible", "decompose_stopping", "is_compatible", "kantorovich",
    "linear_opt_via_extremes", "push_adapted", "recompose", "run_all",
]
