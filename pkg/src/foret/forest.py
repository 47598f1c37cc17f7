"""Decision trees and random forests over a shared feature space.

Trees use the interchange JSON schema; every internal node's edges carry
disjoint state sets that together cover the variable's full state set.
Classification is by majority vote, returning the full set of tied winners.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .circuits import FeatureSpace, NnfArena, mask_indices, mask_of
from .errors import SchemaError


@dataclass(frozen=True)
class Leaf:
    cls: int


@dataclass(frozen=True)
class Node:
    var: int
    edges: tuple  # of (state mask, Leaf | Node)


@dataclass(frozen=True)
class Forest:
    space: FeatureSpace
    classes: tuple
    trees: tuple  # of tree roots (Leaf | Node)

    @property
    def n_trees(self):
        return len(self.trees)

    @property
    def n_classes(self):
        return len(self.classes)

    def class_index(self, name):
        try:
            return self.classes.index(name)
        except ValueError:
            raise SchemaError(f"unknown class {name!r}") from None


def vote(tree, world) -> int:
    """Class index a single tree votes for at a world."""
    node = tree
    while isinstance(node, Node):
        state = world[node.var]
        for mask, child in node.edges:
            if (mask >> state) & 1:
                node = child
                break
        else:  # impossible: edges partition the state set
            raise AssertionError("tree edges do not cover state")
    return node.cls


def votes(forest: Forest, world) -> list:
    """Vote count per class."""
    counts = [0] * forest.n_classes
    for tree in forest.trees:
        counts[vote(tree, world)] += 1
    return counts


def classify(forest: Forest, world) -> set:
    """Set of class indices receiving the maximal vote count (ties included)."""
    forest.space.check_world(world)
    counts = votes(forest, world)
    best = max(counts)
    return {i for i, c in enumerate(counts) if c == best}


def tree_class_formula(tree, class_index, arena, polarity="positive"):
    """Class formula of one tree: leaves of `class_index` become true, others false.

    Negative polarity swaps the leaf labels, yielding the negated formula
    without a negation operation.  The target representation is set by the
    arena type: an NnfArena yields an NNF node handle, a DgArena a decision
    graph handle (trees are trivially weak test-once).
    """
    if polarity not in ("positive", "negative"):
        raise ValueError(f"polarity must be positive or negative, got {polarity!r}")
    keep = polarity == "positive"
    if isinstance(arena, NnfArena):
        return _tree_to_nnf(tree, class_index, keep, arena)
    return _tree_to_dg(tree, class_index, keep, arena)


def _tree_to_nnf(node, cls, keep, arena):
    if isinstance(node, Leaf):
        hit = node.cls == cls
        return arena.mk_and([]) if hit == keep else arena.mk_or([])
    parts = []
    for mask, child in node.edges:
        sub = _tree_to_nnf(child, cls, keep, arena)
        parts.append(arena.mk_and([arena.mk_lit(node.var, mask), sub]))
    return arena.mk_or(parts)


def _tree_to_dg(node, cls, keep, arena, feasible=None):
    # A tree may retest a variable deeper on a path (nested interval splits);
    # trimming every node's edges to the states still feasible on its path
    # makes the resulting graph weak test-once without changing its value on
    # any reachable world.
    if feasible is None:
        feasible = {}
    if isinstance(node, Leaf):
        hit = node.cls == cls
        return arena.true() if hit == keep else arena.false()
    feas = feasible.get(node.var, arena.space.full_mask(node.var))
    edges = []
    for mask, child in node.edges:
        mask &= feas
        if not mask:
            continue
        sub = dict(feasible)
        sub[node.var] = mask
        edges.append((mask, _tree_to_dg(child, cls, keep, arena, sub)))
    return arena.mk_decision(node.var, edges)


def _parse_tree(space, entry, n_classes, path="tree"):
    if not isinstance(entry, dict):
        raise SchemaError(f"{path}: tree node must be an object")
    if "leaf" in entry:
        cls = entry["leaf"]
        if not isinstance(cls, int) or not 0 <= cls < n_classes:
            raise SchemaError(f"{path}: leaf class {cls!r} out of range")
        return Leaf(cls)
    if "node" not in entry:
        raise SchemaError(f"{path}: expected 'node' or 'leaf'")
    body = entry["node"]
    var = body.get("var")
    if not isinstance(var, int) or not 0 <= var < space.n_vars:
        raise SchemaError(f"{path}: variable index {var!r} out of range")
    raw_edges = body.get("edges")
    if not isinstance(raw_edges, list) or not raw_edges:
        raise SchemaError(f"{path}: node needs a non-empty edge list")
    full = space.full_mask(var)
    covered = 0
    edges = []
    for i, e in enumerate(raw_edges):
        states = e.get("states") if isinstance(e, dict) else None
        if (not isinstance(states, list) or not states
                or any(not isinstance(s, int) or not 0 <= s < space.state_count(var)
                       for s in states)):
            raise SchemaError(f"{path}.edges[{i}]: invalid state list {states!r}")
        mask = mask_of(states)
        if mask & covered:
            raise SchemaError(f"{path}.edges[{i}]: edge state sets overlap")
        covered |= mask
        child = _parse_tree(space, e.get("child"), n_classes, f"{path}.edges[{i}]")
        edges.append((mask, child))
    if covered != full:
        raise SchemaError(
            f"{path}: edges cover {mask_indices(covered)} but the feature has "
            f"{space.state_count(var)} states")
    return Node(var, tuple(edges))


def forest_from_json(data) -> Forest:
    if not isinstance(data, dict):
        raise SchemaError("forest JSON must be an object")
    space = FeatureSpace.from_json(data.get("features", []))
    classes = data.get("classes")
    if not isinstance(classes, list) or len(classes) < 2:
        raise SchemaError("forest needs at least 2 classes")
    if len(set(classes)) != len(classes):
        raise SchemaError("duplicate class name")
    raw_trees = data.get("trees")
    if not isinstance(raw_trees, list) or not raw_trees:
        raise SchemaError("forest needs at least 1 tree")
    trees = tuple(
        _parse_tree(space, t, len(classes), f"trees[{i}]")
        for i, t in enumerate(raw_trees))
    return Forest(space, tuple(str(c) for c in classes), trees)


def load_forest(src) -> Forest:
    """Parse a forest from interchange JSON (bytes, text, or a parsed object)."""
    if isinstance(src, (bytes, bytearray)):
        src = src.decode("utf-8")
    if isinstance(src, str):
        try:
            src = json.loads(src)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
    return forest_from_json(src)


def _tree_to_json(node):
    if isinstance(node, Leaf):
        return {"leaf": node.cls}
    return {"node": {
        "var": node.var,
        "edges": [{"states": mask_indices(mask), "child": _tree_to_json(child)}
                  for mask, child in node.edges]}}


def forest_to_json(forest: Forest) -> dict:
    return {"features": forest.space.to_json(),
            "classes": list(forest.classes),
            "trees": [_tree_to_json(t) for t in forest.trees]}


def save_forest(forest: Forest) -> bytes:
    return json.dumps(forest_to_json(forest), indent=1).encode("utf-8")
