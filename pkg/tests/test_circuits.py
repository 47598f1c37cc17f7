import json
import random

import pytest

from foret import FeatureSpace, NnfArena, NnfCircuit, SchemaError, StateSet, WorldCapError
from foret.circuits import FALSE, TRUE
from foret.forest import tree_class_formula
from foret.oracle import iter_worlds
from helpers import fig1_forest


def ternary_space():
    return FeatureSpace([("X", ["x1", "x2", "x3"]),
                         ("Y", ["y1", "y2", "y3"]),
                         ("Z", ["z1", "z2", "z3"])])


def test_space_validation():
    with pytest.raises(SchemaError):
        FeatureSpace([("X", ["only"])])
    with pytest.raises(SchemaError):
        FeatureSpace([("X", ["a", "b"]), ("X", ["a", "b"])])
    with pytest.raises(SchemaError):
        FeatureSpace([("X", ["a", "a"])])
    with pytest.raises(SchemaError):
        FeatureSpace([("X", [f"s{i}" for i in range(70)])])
    FeatureSpace([("X", [f"s{i}" for i in range(70)])], max_states=128)


def test_state_set():
    sp = ternary_space()
    s = StateSet.of(sp, 0, ["x1", "x3"])
    assert s.indices() == [0, 2]
    assert s.contains(0) and not s.contains(1)
    assert s.complement(sp) == StateSet(0, 0b010)
    assert StateSet.of(sp, 0, [0, 1, 2]).complement(sp) is None
    with pytest.raises(SchemaError):
        StateSet(0, 0)


def test_instance_round_trip():
    sp = ternary_space()
    w = sp.parse_instance({"X": "x2", "Y": "y1", "Z": "z3"})
    assert w == (1, 0, 2)
    assert sp.format_instance(w) == {"X": "x2", "Y": "y1", "Z": "z3"}
    with pytest.raises(SchemaError):
        sp.parse_instance({"X": "x2", "Y": "y1"})
    with pytest.raises(SchemaError):
        sp.parse_instance({"X": "x2", "Y": "y1", "Z": "z3", "W": "w"})


def test_mk_simplifications():
    sp = ternary_space()
    a = NnfArena(sp)
    lit = a.mk_state(0, 0)
    assert a.mk_and([lit, TRUE]) == lit
    assert a.mk_or([lit, TRUE]) == TRUE
    assert a.mk_and([lit, FALSE]) == FALSE
    assert a.mk_or([lit, FALSE]) == lit
    assert a.mk_and([lit, lit]) == lit
    assert a.mk_and([]) == TRUE
    assert a.mk_or([]) == FALSE
    # full-mask literal normalizes to true, empty is rejected
    assert a.mk_lit(0, 0b111) == TRUE
    with pytest.raises(SchemaError):
        a.mk_lit(0, 0)
    # flattening: and(and(a,b),c) has three children
    b, c = a.mk_state(1, 0), a.mk_state(2, 0)
    nested = a.mk_and([a.mk_and([lit, b]), c])
    assert a.children(nested) == (lit, b, c)


def test_hash_consing_soundness():
    sp = ternary_space()
    a = NnfArena(sp)
    x, y = a.mk_state(0, 0), a.mk_state(1, 1)
    assert a.mk_and([x, y]) == a.mk_and([x, y])
    assert a.mk_or([x, y]) == a.mk_or([x, y])
    # different child order is a different structure
    assert a.mk_and([x, y]) != a.mk_and([y, x])
    assert a.mk_lit(0, 0b101) == a.mk_lit(0, 0b101)


def random_circuit(arena, rng, depth=4):
    sp = arena.space
    if depth == 0 or rng.random() < 0.3:
        var = rng.randrange(sp.n_vars)
        mask = rng.randrange(1, sp.full_mask(var) + 1)
        return arena.mk_lit(var, mask)
    kids = [random_circuit(arena, rng, depth - 1) for _ in range(rng.randint(2, 3))]
    return arena.mk_and(kids) if rng.random() < 0.5 else arena.mk_or(kids)


def test_evaluate_compositional():
    sp = ternary_space()
    rng = random.Random(5)
    arena = NnfArena(sp)
    worlds = list(iter_worlds(sp))
    for _ in range(30):
        kids = [random_circuit(arena, rng) for _ in range(3)]
        both = [(arena.mk_and(kids), all), (arena.mk_or(kids), any)]
        for w in rng.sample(worlds, 8):
            for node, combine in both:
                assert arena.evaluate(node, w) == combine(
                    arena.evaluate(c, w) for c in kids)


def test_evaluate_published_examples():
    sp = ternary_space()
    a = NnfArena(sp)
    # y1 or (x1 and y3) holds at (x2, y1, z1)
    c1 = a.mk_or([a.mk_state(1, 0), a.mk_and([a.mk_state(0, 0), a.mk_state(1, 2)])])
    assert a.evaluate(c1, (1, 0, 0))
    assert not a.evaluate(c1, (1, 1, 0))
    # x23 and y23 and z3 holds at (x2, y2, z3)
    c3 = a.mk_and([a.mk_lit(0, 0b110), a.mk_lit(1, 0b110), a.mk_state(2, 2)])
    assert a.evaluate(c3, (1, 1, 2))
    assert a.evaluate(TRUE, (0, 0, 0))


def test_fig1_model_counts():
    forest = fig1_forest()
    arena = NnfArena(forest.space)
    counts = []
    for cls in range(3):
        root = tree_class_formula(forest.trees[0], cls, arena)
        counts.append(NnfCircuit(arena, root).count_models())
    assert counts == [12, 11, 4]
    assert sum(counts) == forest.space.world_count() == 27
    assert NnfCircuit(arena, FALSE).count_models() == 0
    assert NnfCircuit(arena, TRUE).count_models() == 27


def test_count_models_cap():
    sp = FeatureSpace([(f"F{i}", ["a", "b"]) for i in range(12)])
    arena = NnfArena(sp)
    circ = NnfCircuit(arena, arena.mk_state(0, 0))
    with pytest.raises(WorldCapError):
        circ.count_models(cap=1000)
    assert circ.count_models() == 2 ** 11


def test_evaluate_checks_world():
    sp = ternary_space()
    arena = NnfArena(sp)
    circ = NnfCircuit(arena, arena.mk_state(0, 0))
    from foret.errors import SpaceMismatchError
    with pytest.raises(SpaceMismatchError):
        circ.evaluate((0, 0))
    with pytest.raises(SpaceMismatchError):
        circ.evaluate((0, 0, 5))


def test_circuit_json_round_trip():
    sp = ternary_space()
    rng = random.Random(11)
    arena = NnfArena(sp)
    for _ in range(10):
        circ = NnfCircuit(arena, random_circuit(arena, rng))
        again = NnfCircuit.loads(circ.dumps())
        assert again.space == sp
        for w in iter_worlds(sp):
            assert circ.evaluate(w) == again.evaluate(w)
    with pytest.raises(SchemaError):
        NnfCircuit.from_json({"features": sp.to_json(), "nodes": [
            {"op": "and", "args": [0, 1]}], "root": 0})
    with pytest.raises(SchemaError):
        NnfCircuit.from_json(
            json.loads('{"features": [], "nodes": [{"op": "nand"}], "root": 0}'))
