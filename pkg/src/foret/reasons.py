"""Complete and general reasons of a decision, from weak test-once graphs.

Both notions abstract an instance with respect to a class formula given as
a conjunction of weak test-once decision graphs.  A world satisfies the
complete reason iff the literals it shares with the instance entail the
formula; it satisfies the general reason iff the conjunction of pair
literals {instance state, world state} does.  The translation is one
linear bottom-up pass per graph over its coverage-completed form, where a
node's edges cover exactly the states feasible along its paths.

At a decision node on X whose edge k carries the instance's state x:

  complete reason:  CR(child_k) and, for every other edge i, (x or CR(child_i))
  general reason:   GR(child_k) and, for every other edge i,
                    (complement(states_i) or GR(child_i))

At a node whose feasible states exclude x (X was retested under a branch
that moved X away from the instance), the edge-k conjunct simply drops:
CR is the plain conjunction of the children's reasons, GR the conjunction
of (complement(states_e) or GR(child_e)) over all edges.  Complements are
always relative to the variable's full state set, which is what keeps the
out-of-context branches vacuous at the worlds they do not speak about.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import circuits as _c
from .circuits import NnfArena, NnfCircuit
from .dg import complete_coverage
from .errors import NotInClassError, SpaceMismatchError


def _as_graph_list(graphs):
    if hasattr(graphs, "graphs"):
        return graphs.graphs()
    if hasattr(graphs, "arena"):
        return [graphs]
    return list(graphs)


def _translate(graph, instance, nnf: NnfArena, general: bool) -> int:
    arena = graph.arena
    space = arena.space
    root = complete_coverage(arena, graph.root)
    memo = {0: _c.TRUE, 1: _c.FALSE}
    for u in arena.reachable(root):
        if u < 2:
            continue
        var = arena.var(u)
        edges = arena.edges(u)
        state = instance[var]
        full = space.full_mask(var)
        on_edge = None
        others = []
        for mask, child in edges:
            if (mask >> state) & 1:
                on_edge = child
            else:
                others.append((mask, child))
        parts = [] if on_edge is None else [memo[on_edge]]
        for mask, child in others:
            if general:
                lit = nnf.mk_lit(var, full & ~mask)
            elif on_edge is not None:
                lit = nnf.mk_state(var, state)
            else:
                # the instance state is infeasible here, so every world this
                # branch speaks about disagrees with the instance on X and
                # must satisfy all children; no X-literal is needed
                parts.append(memo[child])
                continue
            parts.append(nnf.mk_or([lit, memo[child]]))
        memo[u] = nnf.mk_and(parts)
    return memo[root]


def _reason(graphs, instance, general: bool) -> NnfCircuit:
    graphs = _as_graph_list(graphs)
    if not graphs:
        raise ValueError("need at least one decision graph")
    space = graphs[0].space
    for g in graphs[1:]:
        if g.space != space:
            raise SpaceMismatchError("graphs range over different feature spaces")
    instance = tuple(instance)
    space.check_world(instance)
    for g in graphs:
        if not g.evaluate(instance):
            raise NotInClassError(
                "instance does not satisfy the class formula it is explained against")
    nnf = NnfArena(space)
    roots = [_translate(g, instance, nnf, general) for g in graphs]
    return NnfCircuit(nnf, nnf.mk_and(roots))


@dataclass(frozen=True)
class CompleteReason:
    """Monotone or-decomposable abstraction; literals are instance states."""

    circuit: NnfCircuit
    instance: tuple

    @property
    def space(self):
        return self.circuit.space


@dataclass(frozen=True)
class GeneralReason:
    """Locally fixated abstraction; literals are consistent with the instance."""

    circuit: NnfCircuit
    instance: tuple

    @property
    def space(self):
        return self.circuit.space


def complete_reason(graphs, instance) -> CompleteReason:
    """Complete reason of the decision that `instance` satisfies all `graphs`."""
    circuit = _reason(graphs, instance, general=False)
    instance = tuple(instance)
    assert is_monotone(circuit, instance), "complete reason must be monotone"
    assert is_or_decomposable(circuit), "complete reason must be or-decomposable"
    return CompleteReason(circuit, instance)


def general_reason(graphs, instance) -> GeneralReason:
    """General reason of the decision that `instance` satisfies all `graphs`."""
    circuit = _reason(graphs, instance, general=True)
    instance = tuple(instance)
    assert is_locally_fixated(circuit, instance), \
        "general reason must be locally fixated"
    return GeneralReason(circuit, instance)


def _lit_nodes(circuit: NnfCircuit):
    arena = circuit.arena
    for u in arena.reachable(circuit.root):
        if arena.kind(u) == "lit":
            yield arena.lit(u)


def is_monotone(circuit: NnfCircuit, instance) -> bool:
    """Every literal is the instance's own simple literal for its variable."""
    return all(mask == 1 << instance[var] for var, mask in _lit_nodes(circuit))


def is_locally_fixated(circuit: NnfCircuit, instance) -> bool:
    """Every literal contains the instance's state for its variable."""
    return all((mask >> instance[var]) & 1 for var, mask in _lit_nodes(circuit))


def is_or_decomposable(circuit: NnfCircuit) -> bool:
    """Disjuncts of every Or node mention pairwise disjoint variable sets."""
    arena = circuit.arena
    for u in arena.reachable(circuit.root):
        if arena.kind(u) == "or":
            seen = 0
            for c in arena.children(u):
                vm = arena.var_mask(c)
                if vm & seen:
                    return False
                seen |= vm
    return True
