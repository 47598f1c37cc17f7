"""Compile a forest's per-class formula into circuit artifacts.

Three modes:
  nnf      sorting network over NNF constructors; one circuit per class
  dg-conj  sorting network over decision-graph apply; one weak test-once
           graph per opposing class, left unconjoined
  dg-full  dg-conj graphs conjoined into a single weak test-once graph

For two classes the network input is the per-tree class formulas padded
with false to a power of 2, and the output at position ceil(n/2) (1-based)
is the class formula.  For more classes, each opposing class j contributes
a network over interleaved (negated-j, positive-i) per-tree formulas whose
n-th output states "class i has no fewer votes than class j"; the class
formula is the conjunction of those outputs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .circuits import NnfArena, NnfCircuit
from .dg import AND, ApplyTask, DecisionGraph, DgArena, apply
from .errors import SchemaError
from .forest import Forest, tree_class_formula
from .sortnet import dg_semantics, nnf_semantics, sortnet, sortnet_presorted_pairs

MODES = ("nnf", "dg-conj", "dg-full")


@dataclass(frozen=True)
class ClassFormulaArtifact:
    """A compiled class formula plus provenance metadata."""

    class_index: int
    mode: str
    payload: object  # NnfCircuit | list[DecisionGraph] | DecisionGraph
    meta: dict

    @property
    def space(self):
        if self.mode == "dg-conj":
            return self.payload[0].space
        return self.payload.space

    def graphs(self) -> list:
        """The decision graphs whose conjunction is the class formula."""
        if self.mode == "dg-conj":
            return list(self.payload)
        if self.mode == "dg-full":
            return [self.payload]
        raise ValueError("an NNF artifact has no decision graphs")

    def evaluate(self, world) -> bool:
        if self.mode == "dg-conj":
            return all(g.evaluate(world) for g in self.payload)
        return self.payload.evaluate(world)

    def eval_block(self, cols):
        if self.mode == "nnf":
            return self.payload.arena.eval_block(self.payload.root, cols)
        graphs = self.graphs()
        acc = graphs[0].arena.eval_block(graphs[0].root, cols)
        for g in graphs[1:]:
            acc &= g.arena.eval_block(g.root, cols)
        return acc

    def node_count(self) -> int:
        """Unique arena nodes reachable from the artifact's root(s)."""
        if self.mode == "nnf":
            return self.payload.size()
        reached = set()
        for g in self.graphs():
            reached.update(g.arena.reachable(g.root))
        return len(reached)

    def to_json(self) -> dict:
        if self.mode == "dg-conj":
            payload = [g.to_json() for g in self.payload]
        else:
            payload = self.payload.to_json()
        return {"kind": "class-formula", "class_index": self.class_index,
                "mode": self.mode, "meta": dict(self.meta), "payload": payload}

    @classmethod
    def from_json(cls, data) -> "ClassFormulaArtifact":
        mode = data.get("mode")
        if mode not in MODES:
            raise SchemaError(f"unknown artifact mode {mode!r}")
        raw = data.get("payload")
        if mode == "nnf":
            payload = NnfCircuit.from_json(raw)
        elif mode == "dg-full":
            payload = DecisionGraph.from_json(raw)
        else:
            if not isinstance(raw, list) or not raw:
                raise SchemaError("dg-conj payload must be a non-empty list")
            first = DecisionGraph.from_json(raw[0])
            payload = [first] + [
                DecisionGraph.from_json(d, first.arena) for d in raw[1:]]
        return cls(data.get("class_index"), mode, payload, data.get("meta", {}))

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text) -> "ClassFormulaArtifact":
        return cls.from_json(json.loads(text))


def rf_class_formula(forest: Forest, class_index: int, mode="nnf", *,
                     presort=True, node_budget=None,
                     time_budget=None) -> ClassFormulaArtifact:
    """Compile the forest's class formula for one class.

    `presort` enables the first-layer omission for the interleaved
    multi-class inputs (a tree voting for class i cannot vote for class j,
    so each (negated-j, positive-i) pair arrives already sorted).
    `node_budget` caps arena growth and `time_budget` (seconds) the
    apply-based modes; both raise BudgetError when exhausted.
    """
    if not 0 <= class_index < forest.n_classes:
        raise SchemaError(f"class index {class_index} out of range")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    start = time.perf_counter()
    n = forest.n_trees
    k = forest.n_classes
    m = 1 << max(n - 1, 0).bit_length()
    task = None
    if mode == "nnf":
        arena = NnfArena(forest.space, node_budget=node_budget)
        sem = nnf_semantics(arena)
    else:
        arena = DgArena(forest.space, node_budget=node_budget)
        deadline = None
        if time_budget is not None:
            deadline = time.monotonic() + time_budget
        task = ApplyTask(deadline=deadline)
        sem = dg_semantics(arena, task)

    def formula(tree, cls, polarity):
        return tree_class_formula(tree, cls, arena, polarity)

    if k == 2:
        xs = [formula(t, class_index, "positive") for t in forest.trees]
        xs += [sem.false] * (m - n)
        outputs = sortnet(xs, sem)
        parts = [outputs[(n + 1) // 2 - 1]]  # 1-based ceil(n/2)
    else:
        parts = []
        for j in range(k):
            if j == class_index:
                continue
            pairs = [(formula(t, j, "negative"), formula(t, class_index, "positive"))
                     for t in forest.trees]
            pairs += [(sem.false, sem.false)] * (m - n)
            if presort:
                outputs = sortnet_presorted_pairs(pairs, sem)
            else:
                interleaved = [v for pair in pairs for v in pair]
                outputs = sortnet(interleaved, sem)
            parts.append(outputs[n - 1])  # 1-based output n of the 2m network

    if mode == "nnf":
        payload = NnfCircuit(arena, arena.mk_and(parts))
    elif mode == "dg-conj":
        payload = [DecisionGraph(arena, p) for p in parts]
    else:
        acc = parts[0]
        for p in parts[1:]:
            acc = apply(arena, acc, p, AND, task=task)
        payload = DecisionGraph(arena, acc)

    meta = {"class": forest.classes[class_index], "n_trees": n, "n_classes": k,
            "presort": bool(presort), "comparators": sem.comparators,
            "wall_time_s": time.perf_counter() - start}
    return ClassFormulaArtifact(class_index, mode, payload, meta)


def nnf_size_report(artifact: ClassFormulaArtifact) -> tuple:
    """(node count, compile wall time in seconds) for an artifact."""
    return artifact.node_count(), artifact.meta.get("wall_time_s")
