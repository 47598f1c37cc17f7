#!/usr/bin/env python3
"""Convert a fitted scikit-learn random forest into the forest interchange
JSON, discretizing continuous thresholds into interval states.

Split thresholds are pooled per feature across every tree, so all trees
share one state space; a node testing X <= t becomes a decision node whose
two edges carry the interval states at or below t and above t.  A value
equal to a threshold falls in the lower interval, matching the <= split.
Features never split by any tree cannot influence a prediction and are
omitted from the exported space (the interchange format requires at least
two states per feature).

Usage:
    export_forest.py --model model.pkl --out forest.json --names names.json

names.json is optional: {"features": [...], "classes": [...]}.
"""

from __future__ import annotations

import argparse
import bisect
import json
import pickle
import sys
import warnings
from dataclasses import dataclass

import numpy as np


class ExportError(Exception):
    pass


@dataclass
class ThresholdTable:
    """Per-feature sorted split thresholds; a feature with k thresholds has
    k + 1 interval states partitioning the real line."""

    thresholds: list  # one sorted list of distinct floats per source feature

    def n_states(self, feature) -> int:
        return len(self.thresholds[feature]) + 1

    def state_of(self, feature, value) -> int:
        """Interval index of a value; boundary values take the lower side.

        The value is cast to float32 first, mirroring what scikit-learn does
        to prediction inputs, so boundary behavior matches the source model.
        """
        if not np.isfinite(value):
            raise ExportError(f"non-finite value {value!r} for feature {feature}")
        return bisect.bisect_left(self.thresholds[feature], float(np.float32(value)))

    def state_names(self, feature) -> list:
        cuts = self.thresholds[feature]
        if not cuts:
            return ["(-inf, inf)"]
        names = [f"(-inf, {cuts[0]!r}]"]
        names += [f"({a!r}, {b!r}]" for a, b in zip(cuts, cuts[1:])]
        names.append(f"({cuts[-1]!r}, inf)")
        return names


def _estimators(model):
    if not hasattr(model, "estimators_"):
        raise ExportError(
            f"unsupported model type {type(model).__name__}: expected a fitted "
            f"tree ensemble with an estimators_ attribute")
    if not hasattr(model, "classes_") or len(model.classes_) < 2:
        raise ExportError("the model must be fitted on at least 2 classes")
    return list(model.estimators_)


def threshold_table(model, n_features=None) -> ThresholdTable:
    """Pool every split threshold per feature across all trees."""
    estimators = _estimators(model)
    if n_features is None:
        n_features = model.n_features_in_
    pools = [set() for _ in range(n_features)]
    for est in estimators:
        tree = est.tree_
        for node in range(tree.node_count):
            if tree.children_left[node] == -1:
                continue
            t = float(tree.threshold[node])
            if not np.isfinite(t):
                raise ExportError(f"non-finite split threshold {t!r}")
            pools[tree.feature[node]].add(t)
    return ThresholdTable([sorted(p) for p in pools])


def _tree_to_json(tree, node, var_index, table):
    if tree.children_left[node] == -1:
        counts = tree.value[node].reshape(-1)
        return {"leaf": int(np.argmax(counts))}
    feature = int(tree.feature[node])
    cut = bisect.bisect_left(table.thresholds[feature], float(tree.threshold[node]))
    n = table.n_states(feature)
    below = list(range(cut + 1))
    above = list(range(cut + 1, n))
    return {"node": {"var": var_index[feature], "edges": [
        {"states": below,
         "child": _tree_to_json(tree, tree.children_left[node], var_index, table)},
        {"states": above,
         "child": _tree_to_json(tree, tree.children_right[node], var_index, table)},
    ]}}


def export(model, feature_names=None, class_names=None) -> dict:
    """Interchange JSON for a fitted tree-ensemble classifier.

    The exported forest votes exactly like the source trees; ensembles that
    predict by probability averaging rather than hard majority voting are
    exported with a warning, and agreement is then only guaranteed against
    the hard-vote reconstruction of the source.
    """
    estimators = _estimators(model)
    n_features = model.n_features_in_
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(n_features)]
    if len(feature_names) != n_features:
        raise ExportError(
            f"{len(feature_names)} feature names for {n_features} features")
    if class_names is None:
        class_names = [str(c) for c in model.classes_]
    if len(class_names) != len(model.classes_):
        raise ExportError(
            f"{len(class_names)} class names for {len(model.classes_)} classes")
    if not _is_hard_voting(model):
        warnings.warn(
            "the source model predicts by probability averaging, not hard "
            "majority voting; the exported forest reproduces its hard-vote "
            "reconstruction", stacklevel=2)
    table = threshold_table(model, n_features)
    used = [f for f in range(n_features) if table.thresholds[f]]
    var_index = {f: i for i, f in enumerate(used)}
    features = [{"name": str(feature_names[f]), "states": table.state_names(f)}
                for f in used]
    trees = [_tree_to_json(est.tree_, 0, var_index, table) for est in estimators]
    return {"features": features, "classes": [str(c) for c in class_names],
            "trees": trees}


def _is_hard_voting(model):
    # sklearn forests average per-tree probabilities; a VotingClassifier with
    # voting="hard" is the usual genuinely hard-voting ensemble
    return getattr(model, "voting", None) == "hard"


def discretize_instance(values, table: ThresholdTable, feature_names=None) -> dict:
    """Instance JSON for a raw feature vector: each value mapped to the name
    of its enclosing interval; never-split features are omitted."""
    values = list(values)
    if len(values) != len(table.thresholds):
        raise ExportError(
            f"vector has {len(values)} values, table covers {len(table.thresholds)}")
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(len(values))]
    out = {}
    for f, value in enumerate(values):
        if not table.thresholds[f]:
            continue
        out[str(feature_names[f])] = table.state_names(f)[table.state_of(f, value)]
    return out


def hard_vote_predictions(model, X) -> np.ndarray:
    """Majority vote over the member trees, ties to the lowest class index:
    the documented convention the exported forest is checked against."""
    votes = np.stack([est.predict(X) for est in _estimators(model)])
    classes = model.classes_
    counts = np.stack([(votes == c).sum(axis=0) for c in classes])
    return classes[np.argmax(counts, axis=0)]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Export a pickled scikit-learn random forest to the "
                    "forest interchange JSON.")
    parser.add_argument("--model", required=True, help="pickled classifier")
    parser.add_argument("--out", required=True, help="output forest JSON path")
    parser.add_argument("--names",
                        help='optional JSON {"features": [...], "classes": [...]}')
    args = parser.parse_args(argv)
    with open(args.model, "rb") as fh:
        model = pickle.load(fh)
    feature_names = class_names = None
    if args.names:
        with open(args.names, "r", encoding="utf-8") as fh:
            names = json.load(fh)
        feature_names = names.get("features")
        class_names = names.get("classes")
    try:
        data = export(model, feature_names, class_names)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
    print(json.dumps({"written": args.out,
                      "features": len(data["features"]),
                      "classes": len(data["classes"]),
                      "trees": len(data["trees"])}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
