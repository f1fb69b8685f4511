from .equivalence import Verdict, bisimilar, compare, weak_trace_equivalent
from .explore import Exploration, ExplorationError, Explorer, Limits, LimitExceeded, explore, explore_system
from .lts import (TAU, AutFormatError, Lts, dump_structured, export_aut, hide_actions, import_aut,
                  reachable, rename_actions)
from .reduce import minimize, minimize_branching_bisim, minimize_strong_bisim

__all__ = [
    "TAU", "AutFormatError", "Exploration", "ExplorationError", "Explorer", "LimitExceeded", "Limits", "Lts", "Verdict",
    "bisimilar", "compare", "dump_structured", "explore", "explore_system", "export_aut", "hide_actions",
    "import_aut", "minimize", "minimize_branching_bisim", "minimize_strong_bisim", "reachable",
    "rename_actions", "weak_trace_equivalent",
]
