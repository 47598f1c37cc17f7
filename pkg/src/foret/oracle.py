"""Brute-force ground truth on enumerable feature spaces.

Everything here works directly from the forest's voting semantics by world
enumeration and never consults compiled artifacts; it is the reference the
fast paths are tested against, and what the `verify` subcommand runs.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import compile as _compile
from . import explain as _explain
from . import reasons as _reasons
from .circuits import world_columns
from .errors import TargetClassError, WorldCapError
from .explain import Clause, Term, clause_subsumes
from .forest import Forest, Leaf, classify

#: worlds above this are reported as skipped rather than sampled silently
ORACLE_WORLD_CAP = 2_000_000


def iter_worlds(space):
    """Every world of the space exactly once, in row-major order."""
    return itertools.product(*(range(space.state_count(v))
                               for v in range(space.n_vars)))


def world_at(space, index):
    states = []
    for var in range(space.n_vars - 1, -1, -1):
        n = space.state_count(var)
        states.append(index % n)
        index //= n
    return tuple(reversed(states))


def dvars(w1, w2) -> frozenset:
    """Variables on which two worlds disagree."""
    if len(w1) != len(w2):
        raise ValueError("worlds over different spaces")
    return frozenset(v for v, (a, b) in enumerate(zip(w1, w2)) if a != b)


def count_satisfying(formulas, world) -> int:
    """How many of the formulas the world satisfies."""
    return sum(1 for f in formulas if f.evaluate(world))


def all_columns(space, cap=ORACLE_WORLD_CAP):
    total = space.world_count()
    if cap is not None and total > cap:
        raise WorldCapError(f"{total} worlds exceeds enumeration cap {cap}")
    return world_columns(space, 0, total)


def tree_votes(space, tree, cols, n) -> np.ndarray:
    """Class index each of n worlds is voted into by one tree."""
    out = np.zeros(n, dtype=np.int32)
    stack = [(tree, np.ones(n, dtype=bool))]
    while stack:
        node, sel = stack.pop()
        if isinstance(node, Leaf):
            out[sel] = node.cls
            continue
        states = cols[node.var]
        for mask, child in node.edges:
            table = np.array([bool((mask >> s) & 1)
                              for s in range(space.state_count(node.var))])
            stack.append((child, sel & table[states]))
    return out


def vote_counts(forest: Forest, cols) -> np.ndarray:
    """(n_classes, n_worlds) matrix of vote counts."""
    n = len(cols[0]) if cols else 1
    counts = np.zeros((forest.n_classes, n), dtype=np.int32)
    for tree in forest.trees:
        v = tree_votes(forest.space, tree, cols, n)
        for c in range(forest.n_classes):
            counts[c] += v == c
    return counts


def membership(forest: Forest, class_index, cols) -> np.ndarray:
    """Boolean vector: class receives a maximal vote count at each world."""
    counts = vote_counts(forest, cols)
    return counts[class_index] == counts.max(axis=0)


def _agreement(space, cols, instance):
    return [cols[v] == instance[v] for v in range(space.n_vars)]


def _member_tensor(forest, class_index, cols):
    shape = tuple(forest.space.state_count(v) for v in range(forest.space.n_vars))
    return membership(forest, class_index, cols).reshape(shape)


def semantic_complete_reason(forest: Forest, instance, class_index,
                             cap=ORACLE_WORLD_CAP) -> np.ndarray:
    """Truth vector of the complete reason over all worlds, from its
    semantics: a world satisfies it iff the term of literals it shares with
    the instance entails the class formula."""
    space = forest.space
    cols = all_columns(space, cap)
    box = _member_tensor(forest, class_index, cols)
    for v in range(space.n_vars):
        # axis v factor: the instance state where the world agrees, else all
        everywhere = box.all(axis=v, keepdims=True)
        agree = box[(slice(None),) * v + (instance[v],)]
        box = np.broadcast_to(everywhere, box.shape).copy()
        box[(slice(None),) * v + (instance[v],)] = agree
    return box.reshape(-1)


def semantic_general_reason(forest: Forest, instance, class_index,
                            cap=ORACLE_WORLD_CAP) -> np.ndarray:
    """Truth vector of the general reason over all worlds, from its
    semantics: a world satisfies it iff the conjunction of pair literals
    {instance state, world state} entails the class formula."""
    space = forest.space
    cols = all_columns(space, cap)
    box = _member_tensor(forest, class_index, cols)
    for v in range(space.n_vars):
        at_instance = np.expand_dims(
            box[(slice(None),) * v + (instance[v],)], v)
        box = box & at_instance
    return box.reshape(-1)


def _minimal_triggering_varsets(space, member, agree):
    """Minimal variable subsets S such that fixing the instance on S forces
    membership on every completion.  Membership of fixing is monotone in S,
    so supersets of found sets are skipped."""
    n = space.n_vars
    found = []
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            s = frozenset(combo)
            if any(f <= s for f in found):
                continue
            sel = np.ones(len(member), dtype=bool)
            for v in combo:
                sel &= agree[v]
            if bool(np.all(member | ~sel)):
                found.append(s)
    return found


def _minimal_hitting_sets(varsets):
    if not varsets:
        return []
    if any(not s for s in varsets):
        return []  # the empty set cannot be hit
    universe = sorted(set().union(*varsets))
    found = []
    for size in range(1, len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            s = frozenset(combo)
            if any(f <= s for f in found):
                continue
            if all(s & target for target in varsets):
                found.append(s)
    return found


def brute_sr(forest: Forest, instance, class_index, cap=ORACLE_WORLD_CAP) -> list:
    """Sufficient reasons by minimal-subset search over instance subsets."""
    space = forest.space
    cols = all_columns(space, cap)
    member = membership(forest, class_index, cols)
    agree = _agreement(space, cols, instance)
    sets = _minimal_triggering_varsets(space, member, agree)
    terms = [_explain._instance_literal_map(Term, s, instance) for s in sets]
    return sorted(terms, key=Term.sort_key)


def brute_nr(forest: Forest, instance, class_index, cap=ORACLE_WORLD_CAP) -> list:
    """Necessary reasons: minimal hitting sets of the sufficient reasons'
    variable sets, as instance-literal clauses."""
    srs = brute_sr(forest, instance, class_index, cap)
    hits = _minimal_hitting_sets([t.vars for t in srs])
    clauses = [_explain._instance_literal_map(Clause, s, instance) for s in hits]
    return sorted(clauses, key=Clause.sort_key)


def brute_robustness(forest: Forest, instance, class_index, cap=ORACLE_WORLD_CAP):
    """(r, varsets, flip worlds) by scanning all worlds ordered by distance."""
    space = forest.space
    cols = all_columns(space, cap)
    member = membership(forest, class_index, cols)
    flips = ~member
    if not flips.any():
        return math.inf, frozenset(), []
    dist = np.zeros(len(member), dtype=np.int32)
    for v in range(space.n_vars):
        dist += cols[v] != instance[v]
    r = int(dist[flips].min())
    idx = np.flatnonzero(flips & (dist == r))
    worlds = [tuple(int(cols[v][i]) for v in range(space.n_vars)) for i in idx]
    varsets = frozenset(dvars(instance, w) for w in worlds)
    return r, varsets, sorted(worlds)


def brute_shortest_flips(forest, instance, class_index, cap=ORACLE_WORLD_CAP):
    return brute_robustness(forest, instance, class_index, cap)[2]


def brute_ce(forest: Forest, instance, target_index, cap=ORACLE_WORLD_CAP) -> list:
    """Contrastive explanations: necessary reasons of the decision that the
    instance is NOT in the target class."""
    space = forest.space
    if target_index in classify(forest, tuple(instance)):
        raise TargetClassError(
            f"instance already belongs to class {forest.classes[target_index]!r}")
    cols = all_columns(space, cap)
    not_member = ~membership(forest, target_index, cols)
    agree = _agreement(space, cols, instance)
    sets = _minimal_triggering_varsets(space, not_member, agree)
    hits = _minimal_hitting_sets([frozenset(s) for s in sets])
    clauses = [_explain._instance_literal_map(Clause, s, instance) for s in hits]
    return sorted(clauses, key=Clause.sort_key)


def _literal_choices(space, var, state):
    """All proper literals of `var` containing `state`."""
    others = [s for s in range(space.state_count(var)) if s != state]
    for r in range(len(others)):
        for extra in itertools.combinations(others, r):
            mask = 1 << state
            for s in extra:
                mask |= 1 << s
            if mask != space.full_mask(var):
                yield mask


def brute_shortest_gnrs(forest: Forest, instance, class_index,
                        cap=ORACLE_WORLD_CAP) -> list:
    """Shortest general necessary reasons, directly from their semantics:
    locally fixated clauses of minimal variable count whose violations all
    flip the decision, keeping only the strongest (unsubsumed) ones."""
    space = forest.space
    r, varsets, _ = brute_robustness(forest, instance, class_index, cap)
    if r == math.inf:
        return []
    cols = all_columns(space, cap)
    member = membership(forest, class_index, cols)
    total = space.world_count()
    strides = {}
    acc = total
    for var in range(space.n_vars):
        acc //= space.state_count(var)
        strides[var] = acc
    base = sum(instance[v] * strides[v] for v in range(space.n_vars))

    def all_violations_flip(clause):
        options = []
        for var, mask in clause.items:
            states = [s for s in range(space.state_count(var))
                      if not (mask >> s) & 1]
            options.append((var, states))
        for combo in itertools.product(*(sts for _, sts in options)):
            idx = base
            for (var, _), s in zip(options, combo):
                idx += (s - instance[var]) * strides[var]
            if member[idx]:
                return False
        return True

    qualifying = set()
    for vs in varsets:
        vs = sorted(vs)
        for masks in itertools.product(
                *(_literal_choices(space, v, instance[v]) for v in vs)):
            clause = Clause(tuple(zip(vs, masks)))
            if all_violations_flip(clause):
                qualifying.add(clause)
    out = [c for c in qualifying
           if not any(d != c and clause_subsumes(d, c) for d in qualifying)]
    return sorted(out, key=Clause.sort_key)


# ---------------------------------------------------------------------------
# cross-check battery

def _check(report, name, ok, detail=""):
    report["checks"].append(
        {"name": name, "status": "pass" if ok else "fail", "detail": detail})
    if not ok:
        report["failed"] += 1


def _skip(report, name, detail):
    report["checks"].append({"name": name, "status": "skip", "detail": detail})
    report["skipped"] += 1


def run_verify(forest: Forest, seed=0, trials=5, world_cap=ORACLE_WORLD_CAP,
               node_budget=None, time_budget=None, workers=1) -> dict:
    """Cross-check compiled artifacts and every explanation query against
    the brute-force definitions, on all worlds and `trials` sampled
    instances.  Returns a report dict; "ok" is True iff nothing failed."""
    import random
    from concurrent.futures import ThreadPoolExecutor

    report = {"checks": [], "failed": 0, "skipped": 0}
    space = forest.space
    total = space.world_count()
    if total > world_cap:
        _skip(report, "vote-equivalence",
              f"{total} worlds exceeds the cap {world_cap}")
        report["ok"] = report["failed"] == 0
        return report

    cols = all_columns(space, world_cap)
    members = {i: membership(forest, i, cols) for i in range(forest.n_classes)}
    combos = [(i, mode, presort)
              for i in range(forest.n_classes)
              for mode in _compile.MODES
              for presort in (True, False)]

    def build(combo):
        i, mode, presort = combo
        return combo, _compile.rf_class_formula(
            forest, i, mode, presort=presort,
            node_budget=node_budget, time_budget=time_budget)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            built = list(pool.map(build, combos))
    else:
        built = [build(c) for c in combos]

    artifacts = {}
    for (i, mode, presort), art in built:
        got = art.eval_block(cols)
        _check(report,
               f"vote-equivalence[class={forest.classes[i]},mode={mode},"
               f"presort={presort}]",
               bool(np.array_equal(got, members[i])))
        if mode != "nnf":
            bad = [g for g in art.graphs() if g.validate_weak_test_once()]
            _check(report,
                   f"weak-test-once[class={forest.classes[i]},mode={mode},"
                   f"presort={presort}]", not bad)
        artifacts[(i, mode, presort)] = art

    rng = random.Random(seed)
    picks = sorted(rng.sample(range(total), min(trials, total)))
    for w in picks:
        instance = world_at(space, w)
        classes = classify(forest, instance)
        cls = min(classes)
        label = f"inst={w},class={forest.classes[cls]}"
        art = artifacts[(cls, "dg-conj", True)]
        cr = _reasons.complete_reason(art, instance)
        gr = _reasons.general_reason(art, instance)
        _check(report, f"cr-semantics[{label}]",
               bool(np.array_equal(
                   cr.circuit.arena.eval_block(cr.circuit.root, cols),
                   semantic_complete_reason(forest, instance, cls, world_cap))))
        _check(report, f"gr-semantics[{label}]",
               bool(np.array_equal(
                   gr.circuit.arena.eval_block(gr.circuit.root, cols),
                   semantic_general_reason(forest, instance, cls, world_cap))))
        sr = _explain.sufficient_reasons(cr)
        nr = _explain.necessary_reasons(cr)
        rob = _explain.robustness(cr)
        gnrs = _explain.shortest_gnrs(gr, rob.varsets)
        flips = _explain.shortest_flips(space, instance, gnrs)
        b_sr = brute_sr(forest, instance, cls, world_cap)
        b_nr = brute_nr(forest, instance, cls, world_cap)
        b_r, b_vs, b_flips = brute_robustness(forest, instance, cls, world_cap)
        b_gnrs = brute_shortest_gnrs(forest, instance, cls, world_cap)
        _check(report, f"sr[{label}]", sr == b_sr)
        _check(report, f"nr[{label}]", nr == b_nr)
        _check(report, f"robustness[{label}]",
               rob.r == b_r and rob.varsets == b_vs)
        _check(report, f"sgnr[{label}]", gnrs == b_gnrs)
        _check(report, f"flips[{label}]", flips == b_flips)
        shortest = min((len(c.vars) for c in nr), default=math.inf)
        nr_vs = frozenset(c.vars for c in nr if len(c.vars) == shortest)
        gnr_vs = frozenset(c.vars for c in gnrs)
        _check(report, f"v-universality[{label}]",
               nr_vs == gnr_vs or (not nr and not gnrs))
        for target in range(forest.n_classes):
            if target in classes:
                continue
            ces = _explain.contrastive_explanations(
                forest, instance, target, node_budget=node_budget,
                time_budget=time_budget)
            b_ces = brute_ce(forest, instance, target, world_cap)
            tlabel = f"{label},target={forest.classes[target]}"
            _check(report, f"ce[{tlabel}]", ces == b_ces)
            landed = all(
                any(target in classify(forest, v)
                    for v in _explain.shortest_flips(space, instance, [ce]))
                for ce in ces)
            _check(report, f"ce-lands[{tlabel}]", landed)
    report["ok"] = report["failed"] == 0
    return report
