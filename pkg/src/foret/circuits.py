"""Discrete feature spaces, state-set literals, worlds, and hash-consed NNF circuits.

Variables are discrete with named states; a literal is a non-empty set of
states of one variable, stored as a bitmask.  NNF circuits live in an arena
of structurally unique nodes (true / false / literal / n-ary and / n-ary or).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError, SpaceMismatchError, WorldCapError

#: hard default on the number of states per variable (configurable per space)
MAX_STATES_DEFAULT = 64

#: default cap on world enumeration for model counting
WORLD_CAP_DEFAULT = 1 << 24

_CHUNK = 1 << 14

# A world assigns one state index per variable, in feature order.
World = tuple


class FeatureSpace:
    """An ordered list of named variables, each with >= 2 named states."""

    def __init__(self, features, max_states=MAX_STATES_DEFAULT):
        feats = []
        for name, states in features:
            feats.append((str(name), tuple(str(s) for s in states)))
        self.features = tuple(feats)
        names = [name for name, _ in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature name")
        for name, states in self.features:
            if len(states) < 2:
                raise SchemaError(f"feature {name!r} needs at least 2 states")
            if len(states) > max_states:
                raise SchemaError(
                    f"feature {name!r} has {len(states)} states, max is {max_states}")
            if len(set(states)) != len(states):
                raise SchemaError(f"duplicate state name in feature {name!r}")
        self._var_index = {name: i for i, (name, _) in enumerate(self.features)}
        self._state_index = [
            {s: j for j, s in enumerate(states)} for _, states in self.features]

    @property
    def n_vars(self):
        return len(self.features)

    def var_name(self, var):
        return self.features[var][0]

    def states(self, var):
        return self.features[var][1]

    def state_count(self, var):
        return len(self.features[var][1])

    def full_mask(self, var):
        return (1 << self.state_count(var)) - 1

    def var_index(self, name):
        try:
            return self._var_index[name]
        except KeyError:
            raise SchemaError(f"unknown feature {name!r}") from None

    def state_index(self, var, name):
        try:
            return self._state_index[var][name]
        except KeyError:
            raise SchemaError(
                f"unknown state {name!r} for feature {self.var_name(var)!r}") from None

    def world_count(self):
        n = 1
        for _, states in self.features:
            n *= len(states)
        return n

    def check_world(self, world):
        """Raise unless `world` assigns a valid state to every variable."""
        if len(world) != self.n_vars:
            raise SpaceMismatchError(
                f"world has {len(world)} assignments, space has {self.n_vars} variables")
        for var, s in enumerate(world):
            if not 0 <= s < self.state_count(var):
                raise SpaceMismatchError(
                    f"state {s} out of range for feature {self.var_name(var)!r}")

    def parse_instance(self, mapping) -> World:
        """Build a world from an instance JSON object {feature name: state name}."""
        missing = set(self._var_index) - set(mapping)
        if missing:
            raise SchemaError(f"instance missing features: {sorted(missing)}")
        extra = set(mapping) - set(self._var_index)
        if extra:
            raise SchemaError(f"instance has unknown features: {sorted(extra)}")
        return tuple(
            self.state_index(var, mapping[name])
            for var, (name, _) in enumerate(self.features))

    def format_instance(self, world: World) -> dict:
        self.check_world(world)
        return {name: states[world[var]]
                for var, (name, states) in enumerate(self.features)}

    def to_json(self):
        return [{"name": name, "states": list(states)}
                for name, states in self.features]

    @classmethod
    def from_json(cls, data, max_states=MAX_STATES_DEFAULT):
        if not isinstance(data, list):
            raise SchemaError("features must be a list")
        feats = []
        for item in data:
            try:
                feats.append((item["name"], item["states"]))
            except (TypeError, KeyError):
                raise SchemaError(f"malformed feature entry: {item!r}") from None
        return cls(feats, max_states=max_states)

    def __eq__(self, other):
        return isinstance(other, FeatureSpace) and self.features == other.features

    def __hash__(self):
        return hash(self.features)

    def __repr__(self):
        return f"FeatureSpace({len(self.features)} vars)"


@dataclass(frozen=True)
class StateSet:
    """A non-empty set of states of one variable, as a bitmask."""

    var: int
    mask: int

    def __post_init__(self):
        if self.mask <= 0:
            raise SchemaError("empty state set")

    @classmethod
    def of(cls, space, var, states):
        """Build from an iterable of state indices or state names."""
        mask = 0
        for s in states:
            if isinstance(s, str):
                s = space.state_index(var, s)
            if not 0 <= s < space.state_count(var):
                raise SchemaError(
                    f"state index {s} out of range for {space.var_name(var)!r}")
            mask |= 1 << s
        return cls(var, mask)

    def indices(self):
        return [s for s in range(self.mask.bit_length()) if (self.mask >> s) & 1]

    def contains(self, state):
        return bool((self.mask >> state) & 1)

    def is_full(self, space):
        return self.mask == space.full_mask(self.var)

    def complement(self, space):
        """The remaining states of the variable, or None if this set is full."""
        rest = space.full_mask(self.var) & ~self.mask
        return StateSet(self.var, rest) if rest else None


def mask_of(states) -> int:
    mask = 0
    for s in states:
        mask |= 1 << s
    return mask


def mask_indices(mask) -> list:
    return [s for s in range(mask.bit_length()) if (mask >> s) & 1]


TRUE = 0
FALSE = 1

_T = "true"
_F = "false"
_L = "lit"
_A = "and"
_O = "or"


class NnfArena:
    """Arena of hash-consed NNF nodes over one feature space.

    Node handles are ints; handle equality is structural equality.  And/Or
    nodes are n-ary, flattened, deduplicated, and constant-folded at
    construction, so an internal node never has a constant child and always
    has >= 2 children.
    """

    def __init__(self, space: FeatureSpace, node_budget=None):
        self.space = space
        self.node_budget = node_budget
        self._kind = [_T, _F]
        self._data = [None, None]
        self._varmask = [0, 0]
        self._unique = {}

    def __len__(self):
        return len(self._kind)

    def kind(self, u):
        return self._kind[u]

    def lit(self, u):
        """(var, state mask) of a literal node."""
        return self._data[u]

    def children(self, u):
        return self._data[u]

    def var_mask(self, u) -> int:
        """Bitmask over variable indices occurring under node `u`."""
        return self._varmask[u]

    def var_set(self, u):
        return frozenset(mask_indices(self._varmask[u]))

    def _intern(self, key, kind, data, varmask):
        node = self._unique.get(key)
        if node is not None:
            return node
        node = len(self._kind)
        if self.node_budget is not None and node >= self.node_budget:
            from .errors import BudgetError
            raise BudgetError(f"NNF arena exceeded node budget {self.node_budget}")
        self._kind.append(kind)
        self._data.append(data)
        self._varmask.append(varmask)
        self._unique[key] = node
        return node

    def mk_lit(self, var, mask) -> int:
        """Literal node for a state set; a full mask normalizes to TRUE."""
        full = self.space.full_mask(var)
        if mask <= 0:
            raise SchemaError("literal with empty state set")
        if mask & ~full:
            raise SchemaError("literal mask has states out of range")
        if mask == full:
            return TRUE
        return self._intern((_L, var, mask), _L, (var, mask), 1 << var)

    def mk_state(self, var, state) -> int:
        return self.mk_lit(var, 1 << state)

    def _mk_nary(self, kind, children, neutral, absorbing):
        flat = []
        seen = set()
        for c in children:
            if c == absorbing:
                return absorbing
            if c == neutral:
                continue
            if self._kind[c] == kind:
                for g in self._data[c]:
                    if g not in seen:
                        seen.add(g)
                        flat.append(g)
            elif c not in seen:
                seen.add(c)
                flat.append(c)
        if not flat:
            return neutral
        if len(flat) == 1:
            return flat[0]
        varmask = 0
        for c in flat:
            varmask |= self._varmask[c]
        return self._intern((kind, tuple(flat)), kind, tuple(flat), varmask)

    def mk_and(self, children) -> int:
        return self._mk_nary(_A, children, TRUE, FALSE)

    def mk_or(self, children) -> int:
        return self._mk_nary(_O, children, FALSE, TRUE)

    def reachable(self, root) -> list:
        """Nodes reachable from `root`, in topological (children-first) order."""
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
            if self._kind[u] in (_A, _O):
                for c in self._data[u]:
                    if c not in visited:
                        stack.append((c, False))
        return order

    def size(self, root) -> int:
        return len(self.reachable(root))

    def evaluate(self, root, world: World) -> bool:
        """Truth value of node `root` at a total world."""
        self.space.check_world(world)
        memo = {TRUE: True, FALSE: False}
        stack = [root]
        while stack:
            u = stack[-1]
            if u in memo:
                stack.pop()
                continue
            k = self._kind[u]
            if k == _L:
                var, mask = self._data[u]
                memo[u] = bool((mask >> world[var]) & 1)
                stack.pop()
                continue
            pending = [c for c in self._data[u] if c not in memo]
            if pending:
                stack.extend(pending)
                continue
            vals = (memo[c] for c in self._data[u])
            memo[u] = all(vals) if k == _A else any(vals)
            stack.pop()
        return memo[root]

    def eval_block(self, root, cols) -> np.ndarray:
        """Vectorized evaluation: `cols[var]` is an int array of state indices."""
        vals = {}
        n = len(cols[0]) if cols else 1
        for u in self.reachable(root):
            k = self._kind[u]
            if k == _T:
                vals[u] = np.ones(n, dtype=bool)
            elif k == _F:
                vals[u] = np.zeros(n, dtype=bool)
            elif k == _L:
                var, mask = self._data[u]
                table = np.array(
                    [bool((mask >> s) & 1) for s in range(self.space.state_count(var))])
                vals[u] = table[cols[var]]
            elif k == _A:
                vals[u] = np.logical_and.reduce([vals[c] for c in self._data[u]])
            else:
                vals[u] = np.logical_or.reduce([vals[c] for c in self._data[u]])
        return vals[root] if root in vals else np.zeros(n, dtype=bool)


def world_columns(space, start, stop):
    """Per-variable state-index arrays for worlds `start..stop` (row-major order)."""
    idx = np.arange(start, stop, dtype=np.int64)
    cols = []
    stride = space.world_count()
    for var in range(space.n_vars):
        stride //= space.state_count(var)
        cols.append((idx // stride) % space.state_count(var))
    return cols


@dataclass(frozen=True)
class NnfCircuit:
    """A root handle into an NNF arena."""

    arena: NnfArena
    root: int

    @property
    def space(self):
        return self.arena.space

    def evaluate(self, world: World) -> bool:
        return self.arena.evaluate(self.root, world)

    def size(self) -> int:
        return self.arena.size(self.root)

    def count_models(self, cap=WORLD_CAP_DEFAULT) -> int:
        """Number of worlds satisfying the circuit, by chunked enumeration."""
        total = self.space.world_count()
        if cap is not None and total > cap:
            raise WorldCapError(f"{total} worlds exceeds enumeration cap {cap}")
        count = 0
        for start in range(0, total, _CHUNK):
            cols = world_columns(self.space, start, min(start + _CHUNK, total))
            count += int(self.arena.eval_block(self.root, cols).sum())
        return count

    def to_json(self) -> dict:
        order = self.arena.reachable(self.root)
        index = {u: i for i, u in enumerate(order)}
        nodes = []
        for u in order:
            k = self.arena.kind(u)
            if k == _L:
                var, mask = self.arena.lit(u)
                nodes.append({"op": "lit", "var": var, "states": mask_indices(mask)})
            elif k in (_A, _O):
                nodes.append({"op": k, "args": [index[c] for c in self.arena.children(u)]})
            else:
                nodes.append({"op": k})
        return {"features": self.space.to_json(), "nodes": nodes,
                "root": index[self.root]}

    @classmethod
    def from_json(cls, data, arena=None) -> "NnfCircuit":
        space = FeatureSpace.from_json(data.get("features", []))
        if arena is None:
            arena = NnfArena(space)
        elif arena.space != space:
            raise SpaceMismatchError("circuit features do not match arena space")
        nodes = data.get("nodes")
        if not isinstance(nodes, list) or not nodes:
            raise SchemaError("circuit needs a non-empty node list")
        handles = []
        for i, entry in enumerate(nodes):
            op = entry.get("op")
            if op == "true":
                handles.append(TRUE)
            elif op == "false":
                handles.append(FALSE)
            elif op == "lit":
                var = entry.get("var")
                states = entry.get("states")
                if not isinstance(var, int) or not isinstance(states, list):
                    raise SchemaError(f"malformed literal node: {entry!r}")
                handles.append(arena.mk_lit(var, mask_of(states)))
            elif op in ("and", "or"):
                args = entry.get("args")
                if (not isinstance(args, list)
                        or any(not isinstance(a, int) or not 0 <= a < i for a in args)):
                    raise SchemaError(f"node {i} has invalid args (must reference earlier nodes)")
                kids = [handles[a] for a in args]
                handles.append(arena.mk_and(kids) if op == "and" else arena.mk_or(kids))
            else:
                raise SchemaError(f"unknown node op: {op!r}")
        root = data.get("root")
        if not isinstance(root, int) or not 0 <= root < len(handles):
            raise SchemaError("invalid circuit root")
        return cls(arena, handles[root])

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text) -> "NnfCircuit":
        return cls.from_json(json.loads(text))
