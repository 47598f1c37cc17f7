import random

import numpy as np
import pytest

from foret import (FeatureSpace, NnfArena, NnfCircuit, NotInClassError,
                   complete_reason, gen_forest, general_reason,
                   rf_class_formula)
from foret.dg import DecisionGraph, DgArena, TRUE, FALSE
from foret.oracle import (all_columns, iter_worlds, semantic_complete_reason,
                          semantic_general_reason, world_at)
from foret.reasons import is_locally_fixated, is_monotone, is_or_decomposable
from helpers import equivalent, fig1_forest, susan_forest, truth_vector


def susan_cr_gr():
    forest = susan_forest()
    susan = forest.space.parse_instance(
        {"Age": "ge55", "Weight": "oWeight", "BType": "tA"})
    art = rf_class_formula(forest, forest.class_index("yes"), "dg-conj")
    return forest, susan, complete_reason(art, susan), general_reason(art, susan)


def test_susan_complete_reason_verbatim():
    forest, susan, cr, gr = susan_cr_gr()
    sp = forest.space
    a = NnfArena(sp)
    # Age>=55 and (BType=A or Weight=oWeight)
    want = NnfCircuit(a, a.mk_and([
        a.mk_state(0, 0),
        a.mk_or([a.mk_state(2, 0), a.mk_state(1, 0)])]))
    assert equivalent(cr.circuit, want, sp)
    assert sp.world_count() == 24


def test_susan_general_reason_verbatim():
    forest, susan, cr, gr = susan_cr_gr()
    sp = forest.space
    a = NnfArena(sp)
    # Age>=55 and (BType in {A,B,AB} or Weight in {oW,Nom})
    #         and (BType in {A,B} or Weight in {oW,uW})
    want = NnfCircuit(a, a.mk_and([
        a.mk_state(0, 0),
        a.mk_or([a.mk_lit(2, 0b0111), a.mk_lit(1, 0b101)]),
        a.mk_or([a.mk_lit(2, 0b0011), a.mk_lit(1, 0b011)])]))
    assert equivalent(gr.circuit, want, sp)


def test_structural_invariants():
    forest, susan, cr, gr = susan_cr_gr()
    assert is_monotone(cr.circuit, susan)
    assert is_or_decomposable(cr.circuit)
    assert is_locally_fixated(gr.circuit, susan)
    assert is_locally_fixated(cr.circuit, susan)  # monotone implies fixated
    # sufficiency: instance |= CR |= GR
    assert cr.circuit.evaluate(susan) and gr.circuit.evaluate(susan)
    crv = truth_vector(cr.circuit, forest.space)
    grv = truth_vector(gr.circuit, forest.space)
    assert not (crv & ~grv).any()


def test_single_node_graph_literal_shrinks():
    sp = FeatureSpace([("X", ["1", "2", "3"])])
    arena = DgArena(sp)
    g = DecisionGraph(arena, arena.mk_decision(0, [(0b011, TRUE), (0b100, FALSE)]))
    cr = complete_reason([g], (0,))
    a = cr.circuit.arena
    assert cr.circuit.root == a.mk_state(0, 0)


def test_fig1_complete_reason_is_whole_instance():
    forest = fig1_forest()
    inst = forest.space.parse_instance({"X": "x2", "Y": "y2", "Z": "z3"})
    art = rf_class_formula(forest, forest.class_index("c3"), "dg-conj")
    cr = complete_reason(art, inst)
    a = NnfArena(forest.space)
    want = NnfCircuit(a, a.mk_and(
        [a.mk_state(v, inst[v]) for v in range(3)]))
    assert equivalent(cr.circuit, want, forest.space)


def test_general_reason_of_disjunction():
    # class formula x12 or y12 over ternary X, Y at instance (x1, y1)
    sp = FeatureSpace([("X", ["1", "2", "3"]), ("Y", ["1", "2", "3"])])
    arena = DgArena(sp)
    y = arena.mk_decision(1, [(0b011, TRUE), (0b100, FALSE)])
    g = DecisionGraph(arena, arena.mk_decision(0, [(0b011, TRUE), (0b100, y)]))
    gr = general_reason([g], (0, 0))
    a = NnfArena(sp)
    want = NnfCircuit(a, a.mk_or([a.mk_lit(0, 0b011), a.mk_lit(1, 0b011)]))
    assert equivalent(gr.circuit, want, sp)


def test_binary_features_reasons_coincide():
    forest = gen_forest(77, 5, 2, 7, 3, 2)
    cols = all_columns(forest.space)
    rng = random.Random(0)
    for _ in range(5):
        inst = world_at(forest.space, rng.randrange(forest.space.world_count()))
        from foret.forest import classify
        cls = min(classify(forest, inst))
        art = rf_class_formula(forest, cls, "dg-conj")
        cr = complete_reason(art, inst)
        gr = general_reason(art, inst)
        assert np.array_equal(truth_vector(cr.circuit, forest.space),
                              truth_vector(gr.circuit, forest.space))


def test_precondition_reported():
    forest = fig1_forest()
    inst = forest.space.parse_instance({"X": "x2", "Y": "y2", "Z": "z3"})
    art = rf_class_formula(forest, forest.class_index("c1"), "dg-conj")
    with pytest.raises(NotInClassError):
        complete_reason(art, inst)
    with pytest.raises(NotInClassError):
        general_reason(art, inst)


def test_conjunction_rule_matches_dg_full():
    # per-graph reasons conjoined = reason of the conjoined graph
    for seed in (3, 4, 5):
        forest = gen_forest(seed, 4, 3, 5, 2, 3)
        cols = all_columns(forest.space)
        rng = random.Random(seed)
        conj = {i: rf_class_formula(forest, i, "dg-conj") for i in range(3)}
        full = {i: rf_class_formula(forest, i, "dg-full") for i in range(3)}
        for _ in range(4):
            inst = world_at(forest.space, rng.randrange(forest.space.world_count()))
            from foret.forest import classify
            cls = min(classify(forest, inst))
            for make in (complete_reason, general_reason):
                via_conj = make(conj[cls], inst)
                via_full = make(full[cls], inst)
                assert np.array_equal(
                    truth_vector(via_conj.circuit, forest.space),
                    truth_vector(via_full.circuit, forest.space))


def test_semantic_ground_truth():
    # circuit truth equals the definition-level semantics on random forests
    for seed in range(8):
        forest = gen_forest(400 + seed, 4, 3, 2 * (seed % 3) + 1, 3, 2 + seed % 2)
        cols = all_columns(forest.space)
        rng = random.Random(seed)
        for _ in range(4):
            inst = world_at(forest.space, rng.randrange(forest.space.world_count()))
            from foret.forest import classify
            cls = min(classify(forest, inst))
            art = rf_class_formula(forest, cls, "dg-conj")
            cr = complete_reason(art, inst)
            gr = general_reason(art, inst)
            assert np.array_equal(
                cr.circuit.arena.eval_block(cr.circuit.root, cols),
                semantic_complete_reason(forest, inst, cls))
            assert np.array_equal(
                gr.circuit.arena.eval_block(gr.circuit.root, cols),
                semantic_general_reason(forest, inst, cls))
