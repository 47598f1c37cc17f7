"""Shared test fixtures: the two worked-example classifiers and equivalence
helpers based on world enumeration."""

import numpy as np

from foret import load_forest
from foret.oracle import all_columns

# Patient classifier: Age >= 55 gates everything; overweight patients are
# susceptible outright, others depending on blood type.
SUSAN_FOREST = {
    "features": [
        {"name": "Age", "states": ["ge55", "lt55"]},
        {"name": "Weight", "states": ["oWeight", "uWeight", "Nom"]},
        {"name": "BType", "states": ["tA", "tB", "tAB", "tO"]},
    ],
    "classes": ["no", "yes"],
    "trees": [{"node": {"var": 0, "edges": [
        {"states": [0], "child": {"node": {"var": 1, "edges": [
            {"states": [0], "child": {"leaf": 1}},
            {"states": [1], "child": {"node": {"var": 2, "edges": [
                {"states": [0, 1, 2], "child": {"leaf": 1}},
                {"states": [3], "child": {"leaf": 0}}]}}},
            {"states": [2], "child": {"node": {"var": 2, "edges": [
                {"states": [0, 1], "child": {"leaf": 1}},
                {"states": [2, 3], "child": {"leaf": 0}}]}}}]}}},
        {"states": [1], "child": {"leaf": 0}}]}}],
}

SUSAN_INSTANCE = {"Age": "ge55", "Weight": "oWeight", "BType": "tA"}

# Three ternary features; the shared c2 sink of the published decision graph
# is duplicated to serialize it as a tree.  Class formulas encode 12/11/4
# worlds respectively.
FIG1_FOREST = {
    "features": [
        {"name": "X", "states": ["x1", "x2", "x3"]},
        {"name": "Y", "states": ["y1", "y2", "y3"]},
        {"name": "Z", "states": ["z1", "z2", "z3"]},
    ],
    "classes": ["c1", "c2", "c3"],
    "trees": [{"node": {"var": 1, "edges": [
        {"states": [0], "child": {"leaf": 0}},
        {"states": [1, 2], "child": {"node": {"var": 0, "edges": [
            {"states": [0], "child": {"node": {"var": 1, "edges": [
                {"states": [2], "child": {"leaf": 0}},
                {"states": [0, 1], "child": {"leaf": 1}}]}}},
            {"states": [1, 2], "child": {"node": {"var": 2, "edges": [
                {"states": [0, 1], "child": {"leaf": 1}},
                {"states": [2], "child": {"leaf": 2}}]}}}]}}}]}}],
}


def susan_forest():
    return load_forest(SUSAN_FOREST)


def fig1_forest():
    return load_forest(FIG1_FOREST)


def truth_vector(obj, space):
    """Truth of a circuit / graph / artifact over every world of the space."""
    cols = all_columns(space)
    if hasattr(obj, "eval_block"):
        return obj.eval_block(cols)
    return obj.arena.eval_block(obj.root, cols)


def equivalent(a, b, space) -> bool:
    return bool(np.array_equal(truth_vector(a, space), truth_vector(b, space)))


def clause_set(space, clauses):
    """Readable form of a clause/term list for assertion messages."""
    return sorted(tuple((space.var_name(v),
                         tuple(space.states(v)[s]
                               for s in range(space.state_count(v))
                               if (m >> s) & 1))
                        for v, m in c.items)
                  for c in clauses)
