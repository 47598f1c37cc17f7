"""Deterministic synthetic forest generation for tests and benchmarks."""

from __future__ import annotations

import random

from .circuits import FeatureSpace, mask_of
from .errors import SchemaError
from .forest import Forest, Leaf, Node


def gen_forest(seed, n_features, states_per_feature, n_trees, depth,
               k, leaf_prob=0.2) -> Forest:
    """Pseudo-random forest: every internal node partitions its variable's
    full state set into 2 or 3 random blocks; same seed, same forest."""
    if n_features < 1 or n_trees < 1 or depth < 1:
        raise SchemaError("n_features, n_trees and depth must be positive")
    if k < 2:
        raise SchemaError("need at least 2 classes")
    if isinstance(states_per_feature, int):
        states_per_feature = [states_per_feature] * n_features
    if len(states_per_feature) != n_features or any(s < 2 for s in states_per_feature):
        raise SchemaError("every feature needs at least 2 states")
    rng = random.Random(seed)
    space = FeatureSpace(
        [(f"F{i}", [f"s{j}" for j in range(states_per_feature[i])])
         for i in range(n_features)])
    classes = tuple(f"c{i}" for i in range(k))

    def gen_node(remaining, at_root):
        if remaining == 0 or (not at_root and rng.random() < leaf_prob):
            return Leaf(rng.randrange(k))
        var = rng.randrange(n_features)
        states = list(range(states_per_feature[var]))
        rng.shuffle(states)
        blocks = rng.randint(2, min(3, len(states)))
        cuts = sorted(rng.sample(range(1, len(states)), blocks - 1))
        edges = []
        for lo, hi in zip([0] + cuts, cuts + [len(states)]):
            edges.append((mask_of(states[lo:hi]), gen_node(remaining - 1, False)))
        return Node(var, tuple(edges))

    trees = tuple(gen_node(depth, True) for _ in range(n_trees))
    return Forest(space, classes, trees)
