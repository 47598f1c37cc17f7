"""Weak test-once decision graphs with true/false leaves.

A decision node tests a variable and branches on disjoint state sets; states
never covered by any edge behave as an implicit false branch.  The `apply`
operation conjoins/disjoins two graphs while threading a path of feasible
states per variable, which is what preserves the weak test-once property.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .circuits import FeatureSpace, NnfArena, mask_indices, mask_of
from .errors import (BudgetError, RestrictInfeasibleError, SchemaError,
                     SpaceMismatchError)

TRUE = 0
FALSE = 1

_T = "true"
_F = "false"
_D = "decision"

AND = "and"
OR = "or"


class DgArena:
    """Arena of hash-consed decision-graph nodes over one feature space.

    `mk_decision` applies the standard reductions: edges to the same child
    are merged, and a node whose edges all lead to one child collapses to
    that child.  Handles are ints; TRUE and FALSE are preinstalled.
    """

    def __init__(self, space: FeatureSpace, node_budget=None):
        self.space = space
        self.node_budget = node_budget
        self._kind = [_T, _F]
        self._data = [None, None]
        self._varmask = [0, 0]
        self._unique = {}
        self._neg_memo = {TRUE: FALSE, FALSE: TRUE}

    def __len__(self):
        return len(self._kind)

    def true(self):
        return TRUE

    def false(self):
        return FALSE

    def is_leaf(self, u):
        return u < 2

    def kind(self, u):
        return self._kind[u]

    def var(self, u) -> int:
        return self._data[u][0]

    def edges(self, u):
        """Tuple of (state mask, child handle) pairs, sorted by mask."""
        return self._data[u][1]

    def var_mask(self, u) -> int:
        """Bitmask over variable indices tested anywhere under node `u`."""
        return self._varmask[u]

    def mk_decision(self, var, edges) -> int:
        by_child = {}
        order = []
        union = 0
        full = self.space.full_mask(var)
        for mask, child in edges:
            if mask <= 0:
                raise SchemaError("decision edge with empty state set")
            if mask & ~full:
                raise SchemaError("decision edge has states out of range")
            if mask & union:
                raise SchemaError("decision edges overlap")
            union |= mask
            if child in by_child:
                by_child[child] |= mask
            else:
                by_child[child] = mask
                order.append(child)
        if not order:
            raise SchemaError("decision node needs at least one edge")
        if len(order) == 1:
            return order[0]
        canon = tuple(sorted((by_child[c], c) for c in order))
        key = (var, canon)
        node = self._unique.get(key)
        if node is not None:
            return node
        node = len(self._kind)
        if self.node_budget is not None and node >= self.node_budget:
            raise BudgetError(f"decision-graph arena exceeded node budget "
                              f"{self.node_budget}")
        varmask = 1 << var
        for _, child in canon:
            varmask |= self._varmask[child]
        self._kind.append(_D)
        self._data.append((var, canon))
        self._varmask.append(varmask)
        self._unique[key] = node
        return node

    def evaluate(self, u, world) -> bool:
        self.space.check_world(world)
        while u >= 2:
            var, edges = self._data[u]
            state = world[var]
            for mask, child in edges:
                if (mask >> state) & 1:
                    u = child
                    break
            else:
                return False  # uncovered state: implicit false branch
        return u == TRUE

    def reachable(self, root) -> list:
        order = []
        visited = set()
        stack = [(root, False)]
        while stack:
            u, expanded = stack.pop()
            if expanded:
                order.append(u)
                continue
            if u in visited:
                continue
            visited.add(u)
            stack.append((u, True))
            if u >= 2:
                for _, child in self._data[u][1]:
                    if child not in visited:
                        stack.append((child, False))
        return order

    def eval_block(self, root, cols) -> np.ndarray:
        """Vectorized evaluation over per-variable state-index arrays."""
        n = len(cols[0]) if cols else 1
        vals = {}
        for u in self.reachable(root):
            if u == TRUE:
                vals[u] = np.ones(n, dtype=bool)
            elif u == FALSE:
                vals[u] = np.zeros(n, dtype=bool)
            else:
                var, edges = self._data[u]
                acc = np.zeros(n, dtype=bool)
                for mask, child in edges:
                    table = np.array(
                        [bool((mask >> s) & 1)
                         for s in range(self.space.state_count(var))])
                    acc |= table[cols[var]] & vals[child]
                vals[u] = acc
        return vals[root] if root in vals else np.zeros(n, dtype=bool)

    def negate(self, u) -> int:
        """Swap true/false leaves, sharing structure; an involution."""
        memo = self._neg_memo
        if u in memo:
            return memo[u]
        order = [w for w in self.reachable(u) if w not in memo]
        for w in order:
            var, edges = self._data[w]
            memo[w] = self.mk_decision(
                var, [(mask, memo[child]) for mask, child in edges])
        return memo[u]


def path_key(path, varmask):
    """Cache key for the portion of a path touching the given variables."""
    if not path:
        return ()
    return tuple((v, path[v]) for v in sorted(path) if (varmask >> v) & 1)


def _restrict(arena, u, path, memo):
    if u < 2:
        return u
    if not path:
        return u
    key = (u, path_key(path, arena.var_mask(u)))
    if key[1] == ():
        return u
    hit = memo.get(key)
    if hit is not None:
        return hit
    var, edges = arena._data[u]
    feasible = path.get(var)
    out = []
    for mask, child in edges:
        if feasible is not None:
            mask &= feasible
            if not mask:
                continue
        out.append((mask, _restrict(arena, child, path, memo)))
    result = FALSE if not out else arena.mk_decision(var, out)
    memo[key] = result
    return result


def restrict(arena, u, path, memo=None):
    """Drop states inconsistent with `path` (a sparse var -> feasible-mask map).

    Raises RestrictInfeasibleError if the root decision node loses every
    edge, which cannot happen for a path consistent with a reachable branch.
    """
    for var, mask in path.items():
        if mask <= 0:
            raise SchemaError("path maps a variable to an empty state set")
        if mask & ~arena.space.full_mask(var):
            raise SchemaError("path mask has states out of range")
    if memo is None:
        memo = {}
    was_decision = u >= 2
    result = _restrict(arena, u, path, memo)
    if was_decision and result == FALSE and _restrict_root_dropped(arena, u, path):
        raise RestrictInfeasibleError(
            f"no feasible edge left at the root (variable "
            f"{arena.space.var_name(arena.var(u))!r})")
    return result


def _restrict_root_dropped(arena, u, path):
    var, edges = arena._data[u]
    feasible = path.get(var)
    if feasible is None:
        return False
    return all(not (mask & feasible) for mask, _ in edges)


class ApplyTask:
    """Per-compilation state for `apply`: memo cache and resource budget.

    The cache persists across all the apply calls of one compilation task;
    it is keyed on both operand handles, the operation, and the portion of
    the path over variables occurring in either operand.
    """

    def __init__(self, deadline=None):
        self.cache = {}
        self.restrict_memo = {}
        self.deadline = deadline
        self.calls = 0

    def tick(self):
        self.calls += 1
        if self.deadline is not None and self.calls % 1024 == 0:
            if time.monotonic() > self.deadline:
                raise BudgetError("apply exceeded its time budget")


def apply(arena, u1, u2, op, path=None, task=None) -> int:
    """Combine two weak test-once graphs: the result is equivalent to
    `u1 op u2` on every world consistent with `path`, and is weak test-once.

    When the operands test different variables at their roots, the
    lower-indexed variable is expanded first (op is commutative), which
    fixes the branch the pseudocode leaves open and improves cache reuse.
    """
    if op not in (AND, OR):
        raise ValueError(f"op must be {AND!r} or {OR!r}")
    if task is None:
        task = ApplyTask()
    if path is None:
        path = {}
    return _apply(arena, u1, u2, dict(path), op, task)


def _apply(arena, u1, u2, path, op, task):
    task.tick()
    if u1 < 2 or u2 < 2:
        if op == AND:
            if u1 == FALSE or u2 == FALSE:
                return FALSE
            rest = u2 if u1 == TRUE else u1
        else:
            if u1 == TRUE or u2 == TRUE:
                return TRUE
            rest = u2 if u1 == FALSE else u1
        return _restrict(arena, rest, path, task.restrict_memo)
    if u2 < u1:
        u1, u2 = u2, u1
    pstar = path_key(path, arena.var_mask(u1) | arena.var_mask(u2))
    key = (u1, u2, op, pstar)
    hit = task.cache.get(key)
    if hit is not None:
        return hit
    v1 = arena.var(u1)
    v2 = arena.var(u2)
    if v2 < v1:
        u1, u2 = u2, u1
        v1, v2 = v2, v1
    feasible = path.get(v1, arena.space.full_mask(v1))
    edges = []
    if v1 == v2:
        for s1, c1 in arena.edges(u1):
            for s2, c2 in arena.edges(u2):
                s = s1 & s2 & feasible
                if s:
                    sub = dict(path)
                    sub[v1] = s
                    edges.append((s, _apply(arena, c1, c2, sub, op, task)))
    else:
        for s1, c1 in arena.edges(u1):
            s = s1 & feasible
            if s:
                sub = dict(path)
                sub[v1] = s
                edges.append((s, _apply(arena, c1, u2, sub, op, task)))
    result = FALSE if not edges else arena.mk_decision(v1, edges)
    task.cache[key] = result
    return result


def complete_coverage(arena, root) -> int:
    """Equivalent graph in which every decision node's edges cover exactly
    the states feasible along its paths.

    States that are feasible but uncovered get an explicit edge to false
    (they evaluate to false); uncovered infeasible states are left out.
    This is the normal form the reason computations expect: it separates
    "false branch" from "unreachable state" by construction.
    """
    memo = {}

    def walk(u, path):
        if u < 2:
            return u
        key = (u, path_key(path, arena.var_mask(u)))
        hit = memo.get(key)
        if hit is not None:
            return hit
        var, edges = arena._data[u]
        feasible = path.get(var, arena.space.full_mask(var))
        out = []
        covered = 0
        for mask, child in edges:
            mask &= feasible
            if not mask:
                continue
            covered |= mask
            sub = dict(path)
            sub[var] = mask
            out.append((mask, walk(child, sub)))
        gap = feasible & ~covered
        if gap:
            out.append((gap, FALSE))
        result = FALSE if not out else arena.mk_decision(var, out)
        memo[key] = result
        return result

    return walk(root, {})


def validate_weak_test_once(arena, root) -> list:
    """Check that every tested state set is feasible along every path.

    Returns a list of violations as (node, var, tested mask, feasible mask);
    an empty list means the graph is weak test-once.  Paths are collapsed by
    memoizing on (node, feasible restriction over the node's variables).
    """
    violations = []
    seen = set()
    stack = [(root, {})]
    while stack:
        u, path = stack.pop()
        if u < 2:
            continue
        key = (u, path_key(path, arena.var_mask(u)))
        if key in seen:
            continue
        seen.add(key)
        var, edges = arena._data[u]
        feasible = path.get(var, arena.space.full_mask(var))
        for mask, child in edges:
            if mask & ~feasible:
                violations.append((u, var, mask, feasible))
            sub_mask = mask & feasible
            if sub_mask:
                sub = dict(path)
                sub[var] = sub_mask
                stack.append((child, sub))
    return violations


def dg_to_nnf(arena, root, nnf_arena: NnfArena) -> int:
    """Equivalent NNF: each decision node becomes Or over And(edge literal, child)."""
    if arena.space != nnf_arena.space:
        raise SpaceMismatchError("decision graph and NNF arena spaces differ")
    memo = {}
    for u in arena.reachable(root):
        if u == TRUE:
            memo[u] = nnf_arena.mk_and([])
        elif u == FALSE:
            memo[u] = nnf_arena.mk_or([])
        else:
            var, edges = arena._data[u]
            parts = [nnf_arena.mk_and([nnf_arena.mk_lit(var, mask), memo[child]])
                     for mask, child in edges]
            memo[u] = nnf_arena.mk_or(parts)
    return memo[root]


@dataclass(frozen=True)
class DecisionGraph:
    """A root handle into a decision-graph arena."""

    arena: DgArena
    root: int

    @property
    def space(self):
        return self.arena.space

    def evaluate(self, world) -> bool:
        return self.arena.evaluate(self.root, world)

    def size(self) -> int:
        return len(self.arena.reachable(self.root))

    def stats(self) -> dict:
        nodes = self.arena.reachable(self.root)
        edge_count = sum(
            len(self.arena.edges(u)) for u in nodes if u >= 2)
        return {"nodes": len(nodes), "edges": edge_count}

    def negate(self) -> "DecisionGraph":
        return DecisionGraph(self.arena, self.arena.negate(self.root))

    def restrict(self, path) -> "DecisionGraph":
        return DecisionGraph(self.arena, restrict(self.arena, self.root, path))

    def to_nnf(self, nnf_arena=None):
        from .circuits import NnfCircuit
        if nnf_arena is None:
            nnf_arena = NnfArena(self.space)
        return NnfCircuit(nnf_arena, dg_to_nnf(self.arena, self.root, nnf_arena))

    def validate_weak_test_once(self) -> list:
        return validate_weak_test_once(self.arena, self.root)

    def to_json(self) -> dict:
        order = self.arena.reachable(self.root)
        index = {u: i for i, u in enumerate(order)}
        nodes = []
        for u in order:
            if u < 2:
                nodes.append({"op": self.arena.kind(u)})
            else:
                var, edges = self.arena._data[u]
                nodes.append({"op": _D, "var": var, "edges": [
                    {"states": mask_indices(mask), "child": index[child]}
                    for mask, child in edges]})
        return {"features": self.space.to_json(), "nodes": nodes,
                "root": index[self.root]}

    @classmethod
    def from_json(cls, data, arena=None) -> "DecisionGraph":
        space = FeatureSpace.from_json(data.get("features", []))
        if arena is None:
            arena = DgArena(space)
        elif arena.space != space:
            raise SpaceMismatchError("graph features do not match arena space")
        nodes = data.get("nodes")
        if not isinstance(nodes, list) or not nodes:
            raise SchemaError("decision graph needs a non-empty node list")
        handles = []
        for i, entry in enumerate(nodes):
            op = entry.get("op")
            if op == _T:
                handles.append(TRUE)
            elif op == _F:
                handles.append(FALSE)
            elif op == _D:
                var = entry.get("var")
                if not isinstance(var, int) or not 0 <= var < space.n_vars:
                    raise SchemaError(f"node {i}: invalid variable {var!r}")
                edges = []
                for e in entry.get("edges", []):
                    states = e.get("states")
                    child = e.get("child")
                    if (not isinstance(states, list) or not states
                            or not isinstance(child, int) or not 0 <= child < i):
                        raise SchemaError(f"node {i}: malformed edge {e!r}")
                    edges.append((mask_of(states), handles[child]))
                if not edges:
                    raise SchemaError(f"node {i}: decision node without edges")
                handles.append(arena.mk_decision(var, edges))
            else:
                raise SchemaError(f"unknown node op: {op!r}")
        root = data.get("root")
        if not isinstance(root, int) or not 0 <= root < len(handles):
            raise SchemaError("invalid graph root")
        return cls(arena, handles[root])
