"""Explanation queries over complete and general reasons.

Sufficient and necessary reasons are the prime implicants/implicates of the
complete reason, computed bottom-up; the circuit is monotone over instance
literals, so terms and clauses reduce to variable sets during the
computation.  Robustness, the shortest-clause CNF, and shortest general
necessary reasons follow the recursive schemes over the reason circuits,
with resolution closure done by per-variable depletion.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .circuits import mask_indices
from .errors import ResultCapError, SchemaError, TargetClassError
from .reasons import CompleteReason, GeneralReason, complete_reason

#: default cap on enumerated terms/clauses/flips; unbounded growth is a real
#: operating mode for wide feature spaces, so the cap is generous
DEFAULT_RESULT_CAP = 1_000_000


class _LiteralMap:
    """Immutable map variable -> non-empty state mask, canonically ordered."""

    __slots__ = ("items",)

    def __init__(self, items):
        if isinstance(items, dict):
            items = items.items()
        items = tuple(sorted(items))
        seen = set()
        for var, mask in items:
            if mask <= 0:
                raise SchemaError("literal with empty state set")
            if var in seen:
                raise SchemaError("duplicate variable in term/clause")
            seen.add(var)
        object.__setattr__(self, "items", items)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @classmethod
    def of(cls, space, mapping):
        """Build from {var index or name: state indices or names}, validated."""
        items = []
        for var, states in mapping.items():
            if isinstance(var, str):
                var = space.var_index(var)
            if isinstance(states, (int, str)):
                states = [states]
            mask = 0
            for s in states:
                if isinstance(s, str):
                    s = space.state_index(var, s)
                mask |= 1 << s
            if mask == space.full_mask(var):
                raise SchemaError("literal covers all states of its variable")
            items.append((var, mask))
        return cls(items)

    @property
    def vars(self):
        return frozenset(var for var, _ in self.items)

    def get(self, var) -> int:
        for v, mask in self.items:
            if v == var:
                return mask
        return 0

    def sort_key(self):
        return (len(self.items), self.items)

    def to_json(self, space):
        return [{"var": space.var_name(var),
                 "states": [space.states(var)[s] for s in mask_indices(mask)]}
                for var, mask in self.items]

    def __eq__(self, other):
        return type(self) is type(other) and self.items == other.items

    def __hash__(self):
        return hash((type(self).__name__, self.items))

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        body = ", ".join(f"{var}:{mask_indices(mask)}" for var, mask in self.items)
        return f"{type(self).__name__}({body})"


class Term(_LiteralMap):
    """Conjunction of literals."""


class Clause(_LiteralMap):
    """Disjunction of literals; no literals means the empty (false) clause."""


def term_subsumes(t1: Term, t2: Term) -> bool:
    """t1 subsumes t2 iff t2 implies t1."""
    for var, mask in t1.items:
        other = t2.get(var)
        if not other or other & ~mask:
            return False
    return True


def clause_subsumes(c1: Clause, c2: Clause) -> bool:
    """c1 subsumes c2 iff c1 implies c2."""
    for var, mask in c1.items:
        other = c2.get(var)
        if not other or mask & ~other:
            return False
    return True


def minimize_clauses(clauses) -> set:
    """Drop clauses subsumed by another (stronger) clause in the set."""
    clauses = set(clauses)
    drop = set()
    for c1 in clauses:
        for c2 in clauses:
            if c1 is not c2 and c1 != c2 and clause_subsumes(c1, c2):
                drop.add(c2)
    return clauses - drop


# ---------------------------------------------------------------------------
# prime implicants / implicates of the complete reason

def _minimal_varsets(family):
    out = []
    for s in sorted(family, key=len):
        if not any(t <= s for t in out):
            out.append(s)
    return set(out)


def _prime_varsets(cr: CompleteReason, product_kind: str, cap: int) -> set:
    """Var-set families of prime implicants (product on 'and') or prime
    implicates (product on 'or') of a monotone circuit over instance literals."""
    arena = cr.circuit.arena
    unit_family = {frozenset()}
    memo = {}
    for u in arena.reachable(cr.circuit.root):
        kind = arena.kind(u)
        if kind == "true":
            memo[u] = unit_family if product_kind == "and" else set()
        elif kind == "false":
            memo[u] = set() if product_kind == "and" else unit_family
        elif kind == "lit":
            var, _ = arena.lit(u)
            memo[u] = {frozenset((var,))}
        else:
            product = kind == product_kind
            children = arena.children(u)
            if product:
                acc = unit_family
                for c in children:
                    acc = _minimal_varsets(
                        a | b for a in acc for b in memo[c])
                    if len(acc) > cap:
                        raise ResultCapError(
                            f"more than {cap} terms/clauses during enumeration")
            else:
                acc = set()
                for c in children:
                    acc |= memo[c]
                acc = _minimal_varsets(acc)
            if len(acc) > cap:
                raise ResultCapError(
                    f"more than {cap} terms/clauses during enumeration")
            memo[u] = acc
    return memo[cr.circuit.root]


def _instance_literal_map(cls, varset, instance):
    return cls([(var, 1 << instance[var]) for var in sorted(varset)])


def sufficient_reasons(cr: CompleteReason, cap=DEFAULT_RESULT_CAP) -> list:
    """All prime implicants of the complete reason, as simple terms."""
    family = _prime_varsets(cr, "and", cap)
    terms = [_instance_literal_map(Term, vs, cr.instance) for vs in family]
    return sorted(terms, key=Term.sort_key)


def necessary_reasons(cr: CompleteReason, cap=DEFAULT_RESULT_CAP) -> list:
    """All prime implicates of the complete reason, as simple clauses."""
    family = _prime_varsets(cr, "or", cap)
    clauses = [_instance_literal_map(Clause, vs, cr.instance) for vs in family]
    return sorted(clauses, key=Clause.sort_key)


# ---------------------------------------------------------------------------
# robustness

@dataclass(frozen=True)
class RobustnessResult:
    """Minimum number of variables whose change flips the decision, plus the
    family of variable sets of the shortest necessary reasons."""

    r: object  # non-negative int, or math.inf when the decision cannot flip
    varsets: frozenset  # of frozenset of variable indices

    def to_json(self, space):
        return {"r": None if self.r == math.inf else self.r,
                "varsets": sorted(
                    sorted(space.var_name(v) for v in vs) for vs in self.varsets)}


def robustness(cr: CompleteReason) -> RobustnessResult:
    """Fold the complete reason: literals cost 1, conjunction takes the
    minimum (joining tied families), disjunction adds costs and crosses
    families (sound because the circuit is or-decomposable)."""
    arena = cr.circuit.arena
    memo = {}
    for u in arena.reachable(cr.circuit.root):
        kind = arena.kind(u)
        if kind == "true":
            memo[u] = (math.inf, frozenset())
        elif kind == "false":
            memo[u] = (0, frozenset((frozenset(),)))
        elif kind == "lit":
            var, _ = arena.lit(u)
            memo[u] = (1, frozenset((frozenset((var,)),)))
        elif kind == "and":
            best = math.inf
            fam = set()
            for c in arena.children(u):
                r, v = memo[c]
                if r < best:
                    best, fam = r, set(v)
                elif r == best:
                    fam |= v
            memo[u] = (best, frozenset(fam))
        else:
            total = 0
            fam = {frozenset()}
            for c in arena.children(u):
                r, v = memo[c]
                total += r
                fam = {a | b for a in fam for b in v}
            memo[u] = (total, frozenset(fam))
    r, fam = memo[cr.circuit.root]
    return RobustnessResult(r, fam)


# ---------------------------------------------------------------------------
# shortest clauses of the general reason, shortest GNRs, flips

def _fits(varset, varsets) -> bool:
    return any(varset <= v for v in varsets)


def _clause_or(space, c1: Clause, c2: Clause):
    """Disjunction of two clauses; None when it becomes valid."""
    items = dict(c1.items)
    for var, mask in c2.items:
        merged = items.get(var, 0) | mask
        if merged == space.full_mask(var):
            return None
        items[var] = merged
    return Clause(items)


def shortest_cnf(gr: GeneralReason, varsets, cap=DEFAULT_RESULT_CAP) -> set:
    """CNF of the general reason keeping only clauses over some set in
    `varsets`; subsumed clauses are removed as they appear.

    The empty clause stands for false, the empty set for true.
    """
    space = gr.space
    arena = gr.circuit.arena
    varsets = frozenset(frozenset(v) for v in varsets)
    memo = {}
    for u in arena.reachable(gr.circuit.root):
        kind = arena.kind(u)
        if kind == "true":
            memo[u] = set()
        elif kind == "false":
            memo[u] = {Clause(())}
        elif kind == "lit":
            var, mask = arena.lit(u)
            if _fits(frozenset((var,)), varsets):
                memo[u] = {Clause(((var, mask),))}
            else:
                # dropped, not false: a clause through this literal can never
                # fit a set in `varsets`, so it contributes no products
                memo[u] = set()
        elif kind == "and":
            acc = set()
            for c in arena.children(u):
                acc |= memo[c]
            memo[u] = minimize_clauses(acc)
        else:
            children = arena.children(u)
            acc = memo[children[0]]
            for c in children[1:]:
                nxt = set()
                for c1 in acc:
                    for c2 in memo[c]:
                        merged = _clause_or(space, c1, c2)
                        if merged is not None and _fits(merged.vars, varsets):
                            nxt.add(merged)
                            if len(nxt) > cap:
                                raise ResultCapError(
                                    f"more than {cap} clauses during CNF conversion")
                acc = minimize_clauses(nxt)
            memo[u] = acc
    return memo[gr.circuit.root]


def resolve(space, c1: Clause, c2: Clause, var: int):
    """The var-resolvent of two clauses: intersect their var-literals and
    union the rest, merging same-variable literals.  Returns None when the
    result is valid."""
    m1 = c1.get(var)
    m2 = c2.get(var)
    if not m1 or not m2:
        raise ValueError("both clauses must mention the resolution variable")
    items = {}
    for v, mask in itertools.chain(c1.items, c2.items):
        if v == var:
            continue
        merged = items.get(v, 0) | mask
        if merged == space.full_mask(v):
            return None
        items[v] = merged
    inter = m1 & m2
    if inter:
        items[var] = inter
    return Clause(items)


def shortest_gnrs(gr: GeneralReason, varsets) -> list:
    """All shortest general necessary reasons, given the variable-set family
    of the shortest necessary reasons.

    Clauses of the shortest-clause CNF are grouped by exact variable set and
    each group is closed under resolution by variable depletion: one
    variable at a time, in feature order, resolving to a fixpoint before
    moving on.  Subsumed clauses are dropped on insertion.
    """
    space = gr.space
    varsets = frozenset(frozenset(v) for v in varsets)
    cnf = shortest_cnf(gr, varsets)
    out = set()
    for vs in sorted(varsets, key=sorted):
        group = {c for c in cnf if c.vars == vs}
        for var in sorted(vs):
            changed = True
            while changed:
                changed = False
                members = sorted(group, key=Clause.sort_key)
                for c1, c2 in itertools.combinations(members, 2):
                    if not (c1.get(var) and c2.get(var)):
                        continue
                    res = resolve(space, c1, c2, var)
                    if res is None or res in group:
                        continue
                    # locally fixated clauses only resolve to full-length clauses
                    assert res.vars == c1.vars | c2.vars, \
                        "resolvent lost a variable on locally fixated clauses"
                    if any(clause_subsumes(c, res) for c in group):
                        continue
                    group = {c for c in group if not clause_subsumes(res, c)}
                    group.add(res)
                    changed = True
                    break
        out |= group
    return sorted(out, key=Clause.sort_key)


def shortest_flips(space, instance, gnrs, cap=DEFAULT_RESULT_CAP) -> list:
    """All worlds obtained by violating a shortest GNR: change exactly its
    variables, each to a state outside the clause's literal."""
    instance = tuple(instance)
    out = set()
    for clause in gnrs:
        options = []
        for var, mask in clause.items:
            states = [s for s in range(space.state_count(var))
                      if not (mask >> s) & 1]
            options.append((var, states))
        for combo in itertools.product(*(states for _, states in options)):
            world = list(instance)
            for (var, _), state in zip(options, combo):
                world[var] = state
            out.add(tuple(world))
            if len(out) > cap:
                raise ResultCapError(f"more than {cap} flip worlds")
    return sorted(out)


# ---------------------------------------------------------------------------
# contrastive explanations

def contrastive_explanations(forest, instance, target_index, *, presort=True,
                             node_budget=None, time_budget=None,
                             cap=DEFAULT_RESULT_CAP) -> list:
    """Clauses whose violation moves the instance into the target class
    (possibly tied): the necessary reasons of the decision "not in target",
    computed from the negated class formula of the target."""
    from .compile import rf_class_formula
    from .forest import classify
    if target_index in classify(forest, tuple(instance)):
        raise TargetClassError(
            f"instance already belongs to class {forest.classes[target_index]!r}")
    artifact = rf_class_formula(
        forest, target_index, "dg-full", presort=presort,
        node_budget=node_budget, time_budget=time_budget)
    negated = artifact.payload.negate()
    cr = complete_reason([negated], instance)
    return necessary_reasons(cr, cap)
