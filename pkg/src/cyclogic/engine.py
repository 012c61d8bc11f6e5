"""Hypothesis dynamics and the reachability-based four-valued classification.

A hypothesis assigns t/f to every node of a proposition.  Single-node flips
are licensed by five rules: nodes bound T may correct f to t, nodes bound F
the reverse, nodes bound L always flip, and unbound nodes flip either when
their own output disagrees with their operator applied to the current child
values, or when some parent's truth table rules the current configuration out
on a child subset while the flipped configuration matches a row.  Nodes bound
V never flip.

The truth value of a proposition is read off two reachability facts over the
full 2^N hypothesis space: whether every hypothesis assuming the star true
leads to one assuming it false, and the symmetric fact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import Formula, Node, UnknownNodeError
from .values import ALL_VALUES, BOOL_VALUES, Value, inf, sup

DEFAULT_NODE_CAP = 22

# full per-node allowed-flip arrays are materialized up to this many nodes
_PRECOMPUTE_MAX = 20

# vectorize the row/subset scan once tables get this many rows
_NUMPY_ROWS_MIN = 32

RULE_BOUND_T = "boundT"
RULE_BOUND_F = "boundF"
RULE_BOUND_L = "boundL"
RULE_OUTPUT = "output"
RULE_INPUT = "input"


class EvaluationError(ValueError):
    pass


class NodeCapExceededError(RuntimeError):
    pass


class FreeSetMismatchError(ValueError):
    pass


Hypothesis = Mapping[str, bool]
Evaluation = Mapping[str, Value]


class Proposition:
    """A formula together with a total evaluation of its free nodes."""

    def __init__(self, formula: Formula, evaluation: Evaluation | None = None):
        evaluation = dict(evaluation or {})
        if set(evaluation) != formula.free_set:
            missing = formula.free_set - set(evaluation)
            extra = set(evaluation) - formula.free_set
            raise EvaluationError(
                f"evaluation must cover the free nodes exactly "
                f"(missing {sorted(missing)}, extra {sorted(extra)})"
            )
        self.formula = formula
        self.evaluation: dict[str, Value] = evaluation

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Proposition):
            return NotImplemented
        return self.formula == other.formula and self.evaluation == other.evaluation

    def __hash__(self) -> int:
        return hash((self.formula, tuple(sorted((k, v.value) for k, v in self.evaluation.items()))))

    def __repr__(self) -> str:
        ev = {k: v.value for k, v in sorted(self.evaluation.items())}
        return f"Proposition(star={self.formula.star!r}, evaluation={ev})"


@dataclass(frozen=True)
class TraceStep:
    node: str
    old: bool
    new: bool
    rule: str


# --- single-flip licensing ---------------------------------------------------


def _output_licensed(node: Node, hyp: Hypothesis) -> bool:
    """Unbound parent rule: the node's value disagrees with its operator."""
    if node.is_letter or not node.children:
        return False
    return hyp[node.id] != node.table.value([hyp[c] for c in node.children])


def _input_licensed(parent: Node, hyp: Hypothesis, child: str) -> bool:
    """Unbound child rule, checked through one parent.

    There must be a child subset C containing ``child`` such that no table row
    matches the current values on C plus the parent's output, while some row
    matches after toggling exactly the input coordinates wired to ``child``.
    """
    table = parent.table
    arity = table.arity
    positions: dict[str, list[int]] = {}
    for j, c in enumerate(parent.children):
        positions.setdefault(c, []).append(j)
    if child not in positions:
        return False
    others = sorted(p for p in positions if p != child)
    out = hyp[parent.id]

    if 2**arity >= _NUMPY_ROWS_MIN:
        return _input_licensed_vec(table, positions, others, hyp, child, out)

    rows = list(table.rows())
    for pick in range(2 ** len(others)):
        members = [child] + [o for i, o in enumerate(others) if (pick >> i) & 1]
        cols = sorted(j for m in members for j in positions[m])
        current = [hyp[parent.children[j]] for j in cols]
        flipped = [
            (not hyp[parent.children[j]]) if parent.children[j] == child else hyp[parent.children[j]]
            for j in cols
        ]
        none_matches = True
        flip_matches = False
        for inputs, row_out in rows:
            if row_out != out:
                continue
            sub = [inputs[j] for j in cols]
            if sub == current:
                none_matches = False
                break
            if sub == flipped:
                flip_matches = True
        if none_matches and flip_matches:
            return True
    return False


def _input_licensed_vec(table, positions, others, hyp, child, out) -> bool:
    arity = table.arity
    rows = np.arange(2**arity, dtype=np.int64)
    outs = np.fromiter(table.outputs, dtype=bool, count=2**arity)
    out_ok = outs == out
    if not out_ok.any():
        return False

    def bitmask(cols: Iterable[int]) -> int:
        return sum(1 << (arity - 1 - j) for j in cols)

    h_inputs = 0
    for m, cols in positions.items():
        if hyp[m]:
            h_inputs |= bitmask(cols)
    child_mask = bitmask(positions[child])

    rows_ok = rows[out_ok]
    for pick in range(2 ** len(others)):
        sel = bitmask(positions[child])
        for i, o in enumerate(others):
            if (pick >> i) & 1:
                sel |= bitmask(positions[o])
        current = h_inputs & sel
        if not ((rows_ok & sel) == current).any():
            flipped = (h_inputs ^ child_mask) & sel
            if ((rows_ok & sel) == flipped).any():
                return True
    return False


def flip_rules(prop: Proposition, hyp: Hypothesis, node_id: str) -> tuple[str, ...]:
    """All rules licensing a flip of ``node_id`` under ``hyp``."""
    formula = prop.formula
    if node_id not in formula.nodes:
        raise UnknownNodeError(f"node {node_id!r} is not in the proposition")
    bound = prop.evaluation.get(node_id)
    if bound is Value.T:
        return (RULE_BOUND_T,) if not hyp[node_id] else ()
    if bound is Value.F:
        return (RULE_BOUND_F,) if hyp[node_id] else ()
    if bound is Value.L:
        return (RULE_BOUND_L,)
    if bound is Value.V:
        return ()
    tags = []
    node = formula.universe.node(node_id)
    if _output_licensed(node, hyp):
        tags.append(RULE_OUTPUT)
    for parent_id in _compiled(formula).parents[node_id]:
        if _input_licensed(formula.universe.node(parent_id), hyp, node_id):
            tags.append(RULE_INPUT)
            break
    return tuple(tags)


def flip_allowed(prop: Proposition, hyp: Hypothesis, node_id: str) -> bool:
    return bool(flip_rules(prop, hyp, node_id))


def successors(prop: Proposition, hyp: Hypothesis) -> list[dict[str, bool]]:
    """All hypotheses reachable from ``hyp`` by one licensed flip."""
    out = []
    for node_id in sorted(prop.formula.nodes):
        if flip_rules(prop, hyp, node_id):
            succ = dict(hyp)
            succ[node_id] = not succ[node_id]
            out.append(succ)
    return out


# --- compiled form -----------------------------------------------------------


@dataclass
class _Source:
    support: tuple[int, ...]  # node indices; bit i of the key is the state bit support[i]
    table: np.ndarray  # bool, size 2**len(support)


@dataclass
class _Compiled:
    order: tuple[str, ...]
    index: dict[str, int]
    parents: dict[str, tuple[str, ...]]
    sources: dict[str, list[_Source]]  # unbound-node license sources
    star_bit: int

    @property
    def n(self) -> int:
        return len(self.order)


def _build_source(formula: Formula, index, support_nodes: list[str], licensed) -> _Source:
    support = tuple(index[nid] for nid in support_nodes)
    size = 2 ** len(support)
    table = np.zeros(size, dtype=bool)
    for key in range(size):
        hyp = {nid: bool((key >> i) & 1) for i, nid in enumerate(support_nodes)}
        table[key] = licensed(hyp)
    return _Source(support, table)


@lru_cache(maxsize=512)
def _compiled(formula: Formula) -> _Compiled:
    order = tuple(sorted(formula.nodes))
    index = {nid: i for i, nid in enumerate(order)}
    parents = dict(formula.parents_within())
    sources: dict[str, list[_Source]] = {nid: [] for nid in order}

    for nid in order:
        node = formula.universe.node(nid)
        if node.children:
            support_nodes = sorted({nid, *node.children}, key=index.__getitem__)
            sources[nid].append(
                _build_source(formula, index, support_nodes, lambda h, n=node: _output_licensed(n, h))
            )
    for did in order:
        d = formula.universe.node(did)
        if not d.children:
            continue
        family = sorted({did, *d.children}, key=index.__getitem__)
        for cid in sorted(set(d.children), key=index.__getitem__):
            sources[cid].append(
                _build_source(
                    formula, index, family, lambda h, dn=d, c=cid: _input_licensed(dn, h, c)
                )
            )
    return _Compiled(order, index, parents, sources, index[formula.star])


class _AllowedFlips:
    """Per-proposition flip permissions, evaluated on numpy state arrays."""

    def __init__(self, compiled: _Compiled, evaluation: Evaluation):
        self.compiled = compiled
        self.evaluation = evaluation
        self._full: list[np.ndarray | None] | None = None
        if compiled.n <= _PRECOMPUTE_MAX:
            states = np.arange(2**compiled.n, dtype=np.int64)
            self._full = [self._compute(bit, states) for bit in range(compiled.n)]

    def _compute(self, bit: int, states: np.ndarray) -> np.ndarray:
        nid = self.compiled.order[bit]
        bound = self.evaluation.get(nid)
        node_bits = (states >> bit) & 1
        if bound is Value.T:
            return node_bits == 0
        if bound is Value.F:
            return node_bits == 1
        if bound is Value.L:
            return np.ones(states.shape, dtype=bool)
        if bound is Value.V:
            return np.zeros(states.shape, dtype=bool)
        allowed = np.zeros(states.shape, dtype=bool)
        for source in self.compiled.sources[nid]:
            key = np.zeros(states.shape, dtype=np.int64)
            for i, sbit in enumerate(source.support):
                key |= ((states >> sbit) & 1) << i
            allowed |= source.table[key]
        return allowed

    def __call__(self, bit: int, states: np.ndarray) -> np.ndarray:
        if self._full is not None:
            return self._full[bit][states]
        return self._compute(bit, states)


def _universal_escape(compiled: _Compiled, allowed: _AllowedFlips, goal: bool) -> bool:
    """Whether every hypothesis with the star at ``not goal`` can reach ``goal``."""
    n = compiled.n
    star_mask = 1 << compiled.star_bit
    states = np.arange(2**n, dtype=np.int64)
    star_set = (states & star_mask) != 0
    visited = star_set == goal
    frontier = states[visited]
    pending = int(2**n - frontier.size)
    while frontier.size and pending:
        parts = []
        for bit in range(n):
            cand = frontier ^ (1 << bit)
            fresh = ~visited[cand]
            cand = cand[fresh]
            if not cand.size:
                continue
            cand = cand[allowed(bit, cand)]
            if cand.size:
                visited[cand] = True
                pending -= cand.size
                parts.append(cand)
        frontier = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    return bool(visited[star_set != goal].all())


def _check_cap(formula: Formula, node_cap: int | None) -> _Compiled:
    cap = DEFAULT_NODE_CAP if node_cap is None else node_cap
    n = len(formula.nodes)
    if n > cap:
        raise NodeCapExceededError(f"{n} nodes exceed the state-space cap of {cap}")
    return _compiled(formula)


def truth_value(prop: Proposition, *, node_cap: int | None = None) -> Value:
    """Classify a proposition by exhaustive reachability over its hypotheses."""
    compiled = _check_cap(prop.formula, node_cap)
    allowed = _AllowedFlips(compiled, prop.evaluation)
    true_escapes = _universal_escape(compiled, allowed, goal=False)
    false_escapes = _universal_escape(compiled, allowed, goal=True)
    return Value.from_reachability(true_escapes, false_escapes)


def stuck_witness(prop: Proposition, star_value: bool, *, node_cap: int | None = None) -> dict[str, bool] | None:
    """A hypothesis with the star at ``star_value`` that can never leave it, if any."""
    compiled = _check_cap(prop.formula, node_cap)
    allowed = _AllowedFlips(compiled, prop.evaluation)
    n = compiled.n
    star_mask = 1 << compiled.star_bit
    states = np.arange(2**n, dtype=np.int64)
    star_set = (states & star_mask) != 0
    visited = star_set != star_value
    frontier = states[visited]
    while frontier.size:
        parts = []
        for bit in range(n):
            cand = frontier ^ (1 << bit)
            cand = cand[~visited[cand]]
            if not cand.size:
                continue
            cand = cand[allowed(bit, cand)]
            if cand.size:
                visited[cand] = True
                parts.append(cand)
        frontier = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    stuck = states[(star_set == star_value) & ~visited]
    if not stuck.size:
        return None
    state = int(stuck[0])
    return {nid: bool((state >> i) & 1) for i, nid in enumerate(compiled.order)}


def witness_trace(
    prop: Proposition,
    start: Hypothesis,
    goal: bool,
    *,
    node_cap: int | None = None,
) -> tuple[TraceStep, ...] | None:
    """A shortest licensed flip sequence taking the star to ``goal``, or None."""
    compiled = _check_cap(prop.formula, node_cap)
    order = compiled.order
    if set(start) != set(order):
        raise EvaluationError("hypothesis must assign every node of the proposition")
    state = sum((1 << i) for i, nid in enumerate(order) if start[nid])
    star_mask = 1 << compiled.star_bit
    target = star_mask if goal else 0

    if (state & star_mask) == target:
        return ()
    allowed = _AllowedFlips(compiled, prop.evaluation)
    seen = {state}
    parent: dict[int, tuple[int, int]] = {}
    frontier = [state]
    found = None
    while frontier and found is None:
        nxt = []
        for s in frontier:
            arr = np.array([s], dtype=np.int64)
            for bit in range(compiled.n):
                if not bool(allowed(bit, arr)[0]):
                    continue
                t = s ^ (1 << bit)
                if t in seen:
                    continue
                seen.add(t)
                parent[t] = (s, bit)
                if (t & star_mask) == target:
                    found = t
                    break
                nxt.append(t)
            if found is not None:
                break
        frontier = nxt
    if found is None:
        return None
    steps: list[TraceStep] = []
    cur = found
    while cur != state:
        prev, bit = parent[cur]
        nid = order[bit]
        old = bool((prev >> bit) & 1)
        hyp = {n: bool((prev >> i) & 1) for i, n in enumerate(order)}
        rule = flip_rules(prop, hyp, nid)[0]
        steps.append(TraceStep(nid, old, not old, rule))
        cur = prev
    return tuple(reversed(steps))


# --- truth tables ------------------------------------------------------------


def _table_order(formula: Formula, order: Sequence[str] | None) -> tuple[str, ...]:
    if order is None:
        return formula.free
    if sorted(order) != sorted(formula.free):
        raise FreeSetMismatchError(
            f"order {list(order)} is not a permutation of the free nodes {list(formula.free)}"
        )
    return tuple(order)


def truth_table(
    formula: Formula,
    order: Sequence[str] | None = None,
    *,
    node_cap: int | None = None,
) -> dict[tuple[Value, ...], Value]:
    """All 4^k rows, evaluations enumerated in T<F<L<V order per coordinate."""
    order = _table_order(formula, order)
    table = {}
    for row in itertools.product(ALL_VALUES, repeat=len(order)):
        prop = Proposition(formula, dict(zip(order, row)))
        table[row] = truth_value(prop, node_cap=node_cap)
    return table


def restricted_truth_table(
    formula: Formula,
    order: Sequence[str] | None = None,
    *,
    node_cap: int | None = None,
) -> dict[tuple[Value, ...], Value]:
    """The 2^k rows with every free node bound T or F."""
    order = _table_order(formula, order)
    table = {}
    for row in itertools.product(BOOL_VALUES, repeat=len(order)):
        prop = Proposition(formula, dict(zip(order, row)))
        table[row] = truth_value(prop, node_cap=node_cap)
    return table


def equivalence(
    f1: Formula,
    f2: Formula,
    mode: str = "full",
    *,
    order1: Sequence[str] | None = None,
    order2: Sequence[str] | None = None,
    node_cap: int | None = None,
) -> bool:
    """Table equality, with free nodes matched by declared order."""
    o1 = _table_order(f1, order1)
    o2 = _table_order(f2, order2)
    if len(o1) != len(o2):
        raise FreeSetMismatchError(f"free arities differ: {len(o1)} vs {len(o2)}")
    if mode == "full":
        return truth_table(f1, o1, node_cap=node_cap) == truth_table(f2, o2, node_cap=node_cap)
    if mode == "restricted":
        return restricted_truth_table(f1, o1, node_cap=node_cap) == restricted_truth_table(
            f2, o2, node_cap=node_cap
        )
    raise ValueError(f"mode must be 'full' or 'restricted', got {mode!r}")


def tautology_class(formula: Formula, *, node_cap: int | None = None) -> str | None:
    """None, "weak" (restricted table constant T) or "strong" (full table constant T)."""
    restricted = restricted_truth_table(formula, node_cap=node_cap)
    if any(v is not Value.T for v in restricted.values()):
        return None
    full = truth_table(formula, node_cap=node_cap)
    return "strong" if all(v is Value.T for v in full.values()) else "weak"


def inequality_bound(
    g: Mapping[tuple[Value, ...], Value], eps: Sequence[Value]
) -> Value:
    """Lower bound on a full-table entry from the restricted table alone.

    The infimum over T/F choices at the V coordinates of the supremum over
    T/F choices at the L coordinates, with the given T/F coordinates fixed.
    """
    eps = tuple(eps)
    v_idx = [i for i, e in enumerate(eps) if e is Value.V]
    l_idx = [i for i, e in enumerate(eps) if e is Value.L]
    outer = []
    for mv in itertools.product(BOOL_VALUES, repeat=len(v_idx)):
        inner = []
        for ml in itertools.product(BOOL_VALUES, repeat=len(l_idx)):
            key = list(eps)
            for i, v in zip(v_idx, mv):
                key[i] = v
            for i, v in zip(l_idx, ml):
                key[i] = v
            inner.append(g[tuple(key)])
        outer.append(sup(inner))
    return inf(outer)
