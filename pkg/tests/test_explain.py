import itertools
import math
import random

import pytest

from foret import (Clause, FeatureSpace, NnfArena, TargetClassError, Term,
                   complete_reason, contrastive_explanations, gen_forest,
                   general_reason, necessary_reasons, resolve, rf_class_formula,
                   robustness, shortest_cnf, shortest_flips, shortest_gnrs,
                   sufficient_reasons)
from foret.circuits import NnfCircuit
from foret.circuits import TRUE as NTRUE
from foret.dg import DecisionGraph, DgArena, FALSE, TRUE
from foret.explain import clause_subsumes, minimize_clauses
from foret.forest import classify
from foret.oracle import (brute_ce, brute_nr, brute_robustness,
                          brute_shortest_gnrs, brute_sr, world_at)
from foret.reasons import CompleteReason, GeneralReason
from helpers import fig1_forest, susan_forest


def susan_setting():
    forest = susan_forest()
    susan = forest.space.parse_instance(
        {"Age": "ge55", "Weight": "oWeight", "BType": "tA"})
    art = rf_class_formula(forest, forest.class_index("yes"), "dg-conj")
    return forest, susan, complete_reason(art, susan), general_reason(art, susan)


def test_susan_sufficient_and_necessary():
    forest, susan, cr, gr = susan_setting()
    sp = forest.space
    srs = sufficient_reasons(cr)
    assert srs == [Term.of(sp, {"Age": "ge55", "Weight": "oWeight"}),
                   Term.of(sp, {"Age": "ge55", "BType": "tA"})]
    nrs = necessary_reasons(cr)
    assert nrs == [Clause.of(sp, {"Age": "ge55"}),
                   Clause.of(sp, {"Weight": "oWeight", "BType": "tA"})]


def test_single_literal_reason():
    sp = FeatureSpace([("X", ["1", "2", "3"])])
    arena = DgArena(sp)
    g = DecisionGraph(arena, arena.mk_decision(0, [(0b011, TRUE), (0b100, FALSE)]))
    cr = complete_reason([g], (0,))
    assert sufficient_reasons(cr) == [Term(((0, 0b001),))]
    assert necessary_reasons(cr) == [Clause(((0, 0b001),))]


def test_independent_conjunction_unions_implicates():
    sp = FeatureSpace([("X", ["1", "2"]), ("Y", ["1", "2"])])
    arena = DgArena(sp)
    gx = DecisionGraph(arena, arena.mk_decision(0, [(0b01, TRUE), (0b10, FALSE)]))
    gy = DecisionGraph(arena, arena.mk_decision(1, [(0b01, TRUE), (0b10, FALSE)]))
    cr = complete_reason([gx, gy], (0, 0))
    assert necessary_reasons(cr) == [Clause(((0, 1),)), Clause(((1, 1),))]


def test_robustness_examples():
    forest, susan, cr, gr = susan_setting()
    rob = robustness(cr)
    assert rob.r == 1 and rob.varsets == frozenset({frozenset({0})})
    # a trivially true reason cannot be flipped
    arena = NnfArena(forest.space)
    trivial = CompleteReason(NnfCircuit(arena, NTRUE), susan)
    rob = robustness(trivial)
    assert rob.r == math.inf and rob.varsets == frozenset()
    # or of two literals: costs add and the variable sets join
    sp = FeatureSpace([("X", ["1", "2"]), ("Y", ["1", "2"])])
    a = NnfArena(sp)
    circ = NnfCircuit(a, a.mk_or([a.mk_state(0, 0), a.mk_state(1, 0)]))
    rob = robustness(CompleteReason(circ, (0, 0)))
    assert rob.r == 2 and rob.varsets == frozenset({frozenset({0, 1})})


def test_shortest_cnf_examples():
    sp = FeatureSpace([("X", ["1", "2"]), ("Y", ["1", "2"]), ("Z", ["1", "2"])])
    a = NnfArena(sp)
    # (x1 or y1) and z1, shortest sets {{Z}} -> the z1 clause alone
    circ = NnfCircuit(a, a.mk_and([
        a.mk_or([a.mk_state(0, 0), a.mk_state(1, 0)]), a.mk_state(2, 0)]))
    gr = GeneralReason(circ, (0, 0, 0))
    got = shortest_cnf(gr, {frozenset({2})})
    assert got == {Clause(((2, 1),))}
    # a literal whose variable fits is returned as itself
    lit = GeneralReason(NnfCircuit(a, a.mk_state(0, 0)), (0, 0, 0))
    assert shortest_cnf(lit, {frozenset({0})}) == {Clause(((0, 1),))}
    # true has no clauses
    top = GeneralReason(NnfCircuit(a, NTRUE), (0, 0, 0))
    assert shortest_cnf(top, {frozenset({0})}) == set()


def test_shortest_gnrs_disjunction_example():
    sp = FeatureSpace([("X", ["1", "2", "3"]), ("Y", ["1", "2", "3"])])
    a = NnfArena(sp)
    circ = NnfCircuit(a, a.mk_or([a.mk_lit(0, 0b011), a.mk_lit(1, 0b011)]))
    gr = GeneralReason(circ, (0, 0))
    got = shortest_gnrs(gr, {frozenset({0, 1})})
    assert got == [Clause(((0, 0b011), (1, 0b011)))]
    flips = shortest_flips(sp, (0, 0), got)
    assert flips == [(2, 2)]


def test_susan_gnrs_and_flip():
    forest, susan, cr, gr = susan_setting()
    sp = forest.space
    rob = robustness(cr)
    gnrs = shortest_gnrs(gr, rob.varsets)
    assert gnrs == [Clause.of(sp, {"Age": "ge55"})]
    flips = shortest_flips(sp, susan, gnrs)
    assert flips == [sp.parse_instance(
        {"Age": "lt55", "Weight": "oWeight", "BType": "tA"})]
    # at the variable sets of all NRs, the closure yields the full GNR list
    varsets = {c.vars for c in necessary_reasons(cr)}
    all_gnrs = shortest_gnrs(gr, varsets)
    assert all_gnrs == [
        Clause.of(sp, {"Age": "ge55"}),
        Clause.of(sp, {"Weight": "oWeight", "BType": ["tA", "tB", "tAB"]}),
        Clause.of(sp, {"Weight": ["oWeight", "uWeight"], "BType": ["tA", "tB"]})]


def test_resolve():
    sp2 = FeatureSpace([("X", ["0", "1"]), ("Y", ["0", "1"]), ("Z", ["0", "1"])])
    # boolean special case: resolve(x or y, not-x or z) = y or z
    c1 = Clause(((0, 0b10), (1, 0b10)))
    c2 = Clause(((0, 0b01), (2, 0b10)))
    assert resolve(sp2, c1, c2, 0) == Clause(((1, 0b10), (2, 0b10)))
    # discrete: (x12 or y1), (x23 or y2) on X = x2 or y12
    sp3 = FeatureSpace([("X", ["1", "2", "3"]), ("Y", ["1", "2", "3"])])
    c1 = Clause(((0, 0b011), (1, 0b001)))
    c2 = Clause(((0, 0b110), (1, 0b010)))
    assert resolve(sp3, c1, c2, 0) == Clause(((0, 0b010), (1, 0b011)))
    # union covering all states of a variable makes the resolvent valid
    c1 = Clause(((0, 0b001), (1, 0b001)))
    c2 = Clause(((0, 0b010), (1, 0b110)))
    assert resolve(sp3, c1, c2, 0) is None
    with pytest.raises(ValueError):
        resolve(sp3, Clause(((1, 0b001),)), c2, 0)


def test_empty_gnrs_mean_no_flips():
    sp = FeatureSpace([("X", ["1", "2"])])
    assert shortest_flips(sp, (0,), []) == []


def test_ce_precondition():
    forest = fig1_forest()
    inst = forest.space.parse_instance({"X": "x2", "Y": "y2", "Z": "z3"})
    with pytest.raises(TargetClassError):
        contrastive_explanations(forest, inst, forest.class_index("c3"))


def test_ce_binary_coincides_with_nrs():
    # odd tree count: no ties, so the two classes are complements
    for seed in (0, 1, 2):
        forest = gen_forest(seed, 4, 3, 5, 3, 2)
        rng = random.Random(seed)
        for _ in range(3):
            inst = world_at(forest.space, rng.randrange(forest.space.world_count()))
            cls = min(classify(forest, inst))
            other = 1 - cls
            art = rf_class_formula(forest, cls, "dg-conj")
            nrs = necessary_reasons(complete_reason(art, inst))
            ces = contrastive_explanations(forest, inst, other)
            assert ces == nrs


def test_ce_some_violation_lands_in_target():
    for seed in (5, 6):
        forest = gen_forest(seed, 4, 3, 5, 3, 3)
        rng = random.Random(seed)
        tried = 0
        while tried < 3:
            inst = world_at(forest.space, rng.randrange(forest.space.world_count()))
            targets = [t for t in range(3) if t not in classify(forest, inst)]
            if not targets:
                continue
            tried += 1
            for t in targets:
                ces = contrastive_explanations(forest, inst, t)
                assert ces == brute_ce(forest, inst, t)
                for ce in ces:
                    violations = shortest_flips(forest.space, inst, [ce])
                    assert any(t in classify(forest, v) for v in violations)


def test_explanations_match_oracle():
    for seed in range(6):
        forest = gen_forest(700 + seed, 5, 3, 2 * seed + 1, 3, 2 + seed % 2)
        rng = random.Random(seed)
        for _ in range(3):
            inst = world_at(forest.space, rng.randrange(forest.space.world_count()))
            cls = min(classify(forest, inst))
            art = rf_class_formula(forest, cls, "dg-conj")
            cr = complete_reason(art, inst)
            gr = general_reason(art, inst)
            assert sufficient_reasons(cr) == brute_sr(forest, inst, cls)
            nrs = necessary_reasons(cr)
            assert nrs == brute_nr(forest, inst, cls)
            rob = robustness(cr)
            b_r, b_vs, b_flips = brute_robustness(forest, inst, cls)
            assert rob.r == b_r and rob.varsets == b_vs
            gnrs = shortest_gnrs(gr, rob.varsets)
            assert gnrs == brute_shortest_gnrs(forest, inst, cls)
            assert shortest_flips(forest.space, inst, gnrs) == b_flips
            # every NR has some violation that flips, every GNR only flips
            member = lambda w: cls in classify(forest, w)
            for nr in nrs:
                viols = shortest_flips(forest.space, inst, [nr])
                assert any(not member(v) for v in viols)
            for gnr in gnrs:
                viols = shortest_flips(forest.space, inst, [gnr])
                assert viols and all(not member(v) for v in viols)
            # variable sets of shortest NRs equal those of the shortest GNRs
            if nrs:
                shortest = min(len(c.vars) for c in nrs)
                assert ({c.vars for c in nrs if len(c.vars) == shortest}
                        == {c.vars for c in gnrs})


# ---------------------------------------------------------------------------
# resolution closure properties

def naive_closure(space, clauses):
    """Fixpoint of resolving every pair on every variable, subsumption
    minimized at each insertion."""
    current = set(minimize_clauses(clauses))
    changed = True
    while changed:
        changed = False
        for c1, c2 in itertools.combinations(sorted(current, key=Clause.sort_key), 2):
            for var in sorted(c1.vars & c2.vars):
                res = resolve(space, c1, c2, var)
                if res is None or res in current:
                    continue
                if any(clause_subsumes(c, res) for c in current):
                    continue
                current = {c for c in current if not clause_subsumes(res, c)}
                current.add(res)
                changed = True
                break
            if changed:
                break
    return current


def depletion_closure(space, clauses, order):
    current = set(minimize_clauses(clauses))
    for var in order:
        changed = True
        while changed:
            changed = False
            for c1, c2 in itertools.combinations(
                    sorted(current, key=Clause.sort_key), 2):
                if not (c1.get(var) and c2.get(var)):
                    continue
                res = resolve(space, c1, c2, var)
                if res is None or res in current:
                    continue
                if any(clause_subsumes(c, res) for c in current):
                    continue
                current = {c for c in current if not clause_subsumes(res, c)}
                current.add(res)
                changed = True
                break
    return current


def random_clause(space, rng):
    n_vars = rng.randint(1, space.n_vars)
    chosen = rng.sample(range(space.n_vars), n_vars)
    items = []
    for var in chosen:
        mask = rng.randrange(1, space.full_mask(var))  # proper, non-empty
        items.append((var, mask))
    return Clause(items)


def test_variable_depletion_equals_naive_closure():
    rng = random.Random(2024)
    for trial in range(200):
        n = rng.randint(2, 5)
        space = FeatureSpace(
            [(f"F{i}", [f"s{j}" for j in range(rng.randint(2, 4))])
             for i in range(n)])
        clauses = {random_clause(space, rng) for _ in range(rng.randint(1, 4))}
        naive = naive_closure(space, clauses)
        depleted = depletion_closure(space, clauses, range(space.n_vars))
        assert naive == depleted, (trial, sorted(clauses, key=Clause.sort_key))
