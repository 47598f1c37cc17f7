"""Circuit compilation of random forests and formally guaranteed explanations."""

from .circuits import FeatureSpace, NnfArena, NnfCircuit, StateSet
from .compile import ClassFormulaArtifact, nnf_size_report, rf_class_formula
from .dg import DecisionGraph, DgArena, apply
from .errors import (BudgetError, ForetError, NotInClassError, ResultCapError,
                     SchemaError, TargetClassError, WorldCapError)
from .explain import (Clause, RobustnessResult, Term, contrastive_explanations,
                      necessary_reasons, resolve, robustness, shortest_cnf,
                      shortest_flips, shortest_gnrs, sufficient_reasons)
from .forest import (Forest, classify, load_forest, save_forest,
                     tree_class_formula)
from .gen import gen_forest
from .reasons import (CompleteReason, GeneralReason, complete_reason,
                      general_reason)
from .sortnet import (ComparatorSemantics, boolean_semantics, merge,
                      nnf_semantics, sortnet, sortnet_presorted_pairs)

__version__ = "0.1.0"

__all__ = [
    "FeatureSpace", "StateSet", "NnfArena", "NnfCircuit",
    "DgArena", "DecisionGraph", "apply",
    "Forest", "load_forest", "save_forest", "classify", "tree_class_formula",
    "ComparatorSemantics", "sortnet", "merge", "sortnet_presorted_pairs",
    "boolean_semantics", "nnf_semantics",
    "ClassFormulaArtifact", "rf_class_formula", "nnf_size_report",
    "CompleteReason", "GeneralReason", "complete_reason", "general_reason",
    "Term", "Clause", "RobustnessResult", "sufficient_reasons",
    "necessary_reasons", "contrastive_explanations", "robustness",
    "shortest_cnf", "shortest_gnrs", "shortest_flips", "resolve",
    "gen_forest",
    "ForetError", "SchemaError", "WorldCapError", "BudgetError",
    "ResultCapError", "NotInClassError", "TargetClassError",
]
