"""Brute-force reference classifier, independent of the optimized engine.

States are explicit dicts, the one-flip relation is materialized edge by edge
by reading the licensing rules literally (all parents, all nonempty child
subsets, all truth-table rows), and reachability is computed by repeatedly
closing the target set under predecessors until nothing changes.  Used only
to cross-check the fast path; intentionally sharing no code with it.
"""

from __future__ import annotations

import itertools
from typing import Mapping

from .graph import Formula, Node
from .values import Value

ORACLE_NODE_CAP = 14


class OracleCapError(RuntimeError):
    pass


def _subset_rule_applies(node: Node, hyp: Mapping[str, bool], flip_output: bool, child: str | None) -> bool:
    """The subset form of the unbound-flip rules.

    With ``flip_output`` the candidate row must match after negating the output
    coordinate (the parent flips); otherwise after negating every input
    coordinate wired to ``child`` (the child flips).
    """
    table = node.table
    children = node.children
    distinct = []
    for c in children:
        if c not in distinct:
            distinct.append(c)
    if child is not None and child not in distinct:
        return False
    pool = [c for c in distinct if c != child]
    required = [child] if child is not None else []

    for r in range(len(pool) + 1):
        for extra in itertools.combinations(pool, r):
            members = set(required) | set(extra)
            if not members:
                continue
            cols = [j for j, c in enumerate(children) if c in members]
            current = tuple(hyp[children[j]] for j in cols) + (hyp[node.id],)
            if flip_output:
                candidate = tuple(hyp[children[j]] for j in cols) + (not hyp[node.id],)
            else:
                candidate = tuple(
                    (not hyp[children[j]]) if children[j] == child else hyp[children[j]]
                    for j in cols
                ) + (hyp[node.id],)
            some_row_is_current = False
            some_row_is_candidate = False
            for inputs, out in table.rows():
                restricted = tuple(inputs[j] for j in cols) + (out,)
                if restricted == current:
                    some_row_is_current = True
                    break
                if restricted == candidate:
                    some_row_is_candidate = True
            if not some_row_is_current and some_row_is_candidate:
                return True
    return False


def _licensed_flips(formula: Formula, evaluation: Mapping[str, Value], hyp: Mapping[str, bool]):
    universe = formula.universe
    nodes = sorted(formula.nodes)
    for nid in nodes:
        bound = evaluation.get(nid)
        if bound is Value.T:
            if not hyp[nid]:
                yield nid
            continue
        if bound is Value.F:
            if hyp[nid]:
                yield nid
            continue
        if bound is Value.L:
            yield nid
            continue
        if bound is Value.V:
            continue
        node = universe.node(nid)
        if node.children and _subset_rule_applies(node, hyp, flip_output=True, child=None):
            yield nid
            continue
        fired = False
        for pid in nodes:
            parent = universe.node(pid)
            if nid in parent.children and _subset_rule_applies(parent, hyp, flip_output=False, child=nid):
                fired = True
                break
        if fired:
            yield nid


def oracle_truth_value(prop, *, node_cap: int = ORACLE_NODE_CAP) -> Value:
    """Same contract as the engine's classifier, computed the slow plain way."""
    formula: Formula = prop.formula
    evaluation: Mapping[str, Value] = prop.evaluation
    nodes = sorted(formula.nodes)
    if len(nodes) > node_cap:
        raise OracleCapError(f"{len(nodes)} nodes exceed the oracle cap of {node_cap}")

    states = [dict(zip(nodes, bits)) for bits in itertools.product((False, True), repeat=len(nodes))]
    keys = [tuple(s[n] for n in nodes) for s in states]
    key_index = {k: i for i, k in enumerate(keys)}

    edges: list[tuple[int, int]] = []
    for i, hyp in enumerate(states):
        for nid in _licensed_flips(formula, evaluation, hyp):
            succ = dict(hyp)
            succ[nid] = not succ[nid]
            edges.append((i, key_index[tuple(succ[n] for n in nodes)]))

    star = formula.star
    predecessors: dict[int, list[int]] = {}
    for src, dst in edges:
        predecessors.setdefault(dst, []).append(src)

    def reaches_everywhere(from_value: bool) -> bool:
        # close the set of states that can reach the opposite star value
        target = {i for i, s in enumerate(states) if s[star] == (not from_value)}
        work = list(target)
        while work:
            dst = work.pop()
            for src in predecessors.get(dst, ()):
                if src not in target:
                    target.add(src)
                    work.append(src)
        return all(i in target for i, s in enumerate(states) if s[star] == from_value)

    true_escapes = reaches_everywhere(True)
    false_escapes = reaches_everywhere(False)
    return Value.from_reachability(true_escapes, false_escapes)
