"""Formulas as pointed graphs.

A node universe holds propositional letters and labelled boolean operators
with ordered child lists.  Child lists may repeat nodes and may contain the
node itself; cycles encode self-reference.  A formula selects a starred node,
an ordered free-node list, and optionally extra root nodes whose descendant
closure belongs to the formula's graph even though the star cannot reach it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence


class GraphError(ValueError):
    """Base for structural errors in universes and formulas."""


class DuplicateNameError(GraphError):
    pass


class UnknownNodeError(GraphError):
    pass


class SharedNodesError(GraphError):
    pass


class NotALetterError(GraphError):
    pass


class InvalidFormulaError(GraphError):
    def __init__(self, issues: Sequence["ValidationIssue"]):
        self.issues = tuple(issues)
        super().__init__("; ".join(str(i) for i in issues))


@dataclass(frozen=True)
class OperatorTable:
    """A k-ary boolean operator given by its output column.

    Row ``i`` holds the inputs whose bit ``(arity - 1 - j)`` of ``i`` is the
    value at child position ``j`` (1 = true, first child is the most
    significant bit); ``outputs[i]`` is the operator's result for that row.
    """

    name: str
    arity: int
    outputs: tuple[bool, ...]

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise GraphError(f"operator {self.name}: negative arity")
        if len(self.outputs) != 2**self.arity:
            raise GraphError(
                f"operator {self.name}: expected {2 ** self.arity} outputs for "
                f"arity {self.arity}, got {len(self.outputs)}"
            )

    @staticmethod
    def from_bits(name: str, arity: int, bits: str) -> "OperatorTable":
        if len(bits) != 2**arity or any(ch not in "01" for ch in bits):
            raise GraphError(
                f"operator {name}: bit string must be {2 ** arity} chars of 0/1, got {bits!r}"
            )
        return OperatorTable(name, arity, tuple(ch == "1" for ch in bits))

    @property
    def bits(self) -> str:
        return "".join("1" if b else "0" for b in self.outputs)

    def row_index(self, inputs: Sequence[bool]) -> int:
        idx = 0
        for b in inputs:
            idx = (idx << 1) | int(b)
        return idx

    def value(self, inputs: Sequence[bool]) -> bool:
        if len(inputs) != self.arity:
            raise GraphError(f"operator {self.name}: expected {self.arity} inputs")
        return self.outputs[self.row_index(inputs)]

    def rows(self) -> Iterator[tuple[tuple[bool, ...], bool]]:
        """All (input tuple, output) rows in index order."""
        for i, out in enumerate(self.outputs):
            inputs = tuple(bool((i >> (self.arity - 1 - j)) & 1) for j in range(self.arity))
            yield inputs, out


NOT = OperatorTable.from_bits("NOT", 1, "10")
AND = OperatorTable.from_bits("AND", 2, "0001")
OR = OperatorTable.from_bits("OR", 2, "0111")
IMPLIES = OperatorTable.from_bits("IMPLIES", 2, "1101")
IFF = OperatorTable.from_bits("IFF", 2, "1001")
ID = OperatorTable.from_bits("ID", 1, "01")
TRUE = OperatorTable.from_bits("TRUE", 0, "1")
FALSE = OperatorTable.from_bits("FALSE", 0, "0")

BUILTIN_TABLES: dict[str, OperatorTable] = {
    t.name: t for t in (NOT, AND, OR, IMPLIES, IFF, ID, TRUE, FALSE)
}


def nary_and(n: int) -> OperatorTable:
    if n == 2:
        return AND
    return OperatorTable("AND%d" % n, n, tuple(i == 2**n - 1 for i in range(2**n)))


def nary_or(n: int) -> OperatorTable:
    if n == 2:
        return OR
    return OperatorTable("OR%d" % n, n, tuple(i != 0 for i in range(2**n)))


@dataclass(frozen=True)
class Node:
    id: str
    table: OperatorTable | None  # None marks a propositional letter
    children: tuple[str, ...] = ()

    @property
    def is_letter(self) -> bool:
        return self.table is None


class NodeUniverse:
    """A mutable-while-building set of nodes sharing one label namespace.

    Treat as frozen once formulas over it are in use; all operations on
    formulas are pure and never mutate an existing node.
    """

    def __init__(self) -> None:
        self._nodes: dict[str, Node] = {}
        self._tables: dict[str, OperatorTable] = {}

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def __iter__(self) -> Iterator[str]:
        return iter(self._nodes)

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def nodes(self) -> Iterator[Node]:
        return iter(self._nodes.values())

    def table(self, name: str) -> OperatorTable:
        if name in self._tables:
            return self._tables[name]
        if name in BUILTIN_TABLES:
            return BUILTIN_TABLES[name]
        raise UnknownNodeError(f"unknown operator {name!r}")

    def tables(self) -> dict[str, OperatorTable]:
        return dict(self._tables)

    def register_table(self, table: OperatorTable) -> OperatorTable:
        known = self._tables.get(table.name, BUILTIN_TABLES.get(table.name))
        if known is not None:
            if known.arity != table.arity or known.outputs != table.outputs:
                raise DuplicateNameError(
                    f"operator {table.name!r} already declared with a different column"
                )
            return known
        self._tables[table.name] = table
        return table

    def add_letter(self, node_id: str) -> str:
        self._check_fresh(node_id)
        self._nodes[node_id] = Node(node_id, None, ())
        return node_id

    def add_operator(self, node_id: str, table: OperatorTable, children: Sequence[str]) -> str:
        self._check_fresh(node_id)
        table = self.register_table(table)
        self._nodes[node_id] = Node(node_id, table, tuple(children))
        return node_id

    def _check_fresh(self, node_id: str) -> None:
        if node_id in self._nodes:
            raise DuplicateNameError(f"node {node_id!r} already declared")

    def copy(self) -> "NodeUniverse":
        """A detached snapshot; node objects are shared (they are immutable)."""
        dup = NodeUniverse()
        dup._nodes = dict(self._nodes)
        dup._tables = dict(self._tables)
        return dup

    def fresh_id(self, prefix: str) -> str:
        if prefix not in self._nodes:
            return prefix
        for i in itertools.count(2):
            candidate = f"{prefix}{i}"
            if candidate not in self._nodes:
                return candidate
        raise AssertionError("unreachable")

    def closure(self, roots: Iterable[str]) -> frozenset[str]:
        """Descendant closure of ``roots`` (the roots themselves included)."""
        seen: set[str] = set()
        stack = [r for r in roots]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            node = self._nodes.get(nid)
            if node is not None:
                stack.extend(c for c in node.children if c not in seen)
        return frozenset(seen)

    def letters(self) -> frozenset[str]:
        return frozenset(n.id for n in self._nodes.values() if n.is_letter)


@dataclass(frozen=True)
class Formula:
    """A pointed subgraph: star node, ordered free nodes, extra roots.

    The formula's node set is the descendant closure of the star, the free
    nodes and the extra roots together.  Extra roots let a formula carry
    ancestors of the star (needed when the watched node sits below the
    operators that constrain it).
    """

    universe: NodeUniverse
    star: str
    free: tuple[str, ...] = ()
    roots: tuple[str, ...] = ()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        return (
            self.universe is other.universe
            and self.star == other.star
            and self.free == other.free
            and self.roots == other.roots
        )

    def __hash__(self) -> int:
        return hash((id(self.universe), self.star, self.free, self.roots))

    @cached_property
    def nodes(self) -> frozenset[str]:
        return self.universe.closure((self.star, *self.free, *self.roots))

    @property
    def free_set(self) -> frozenset[str]:
        return frozenset(self.free)

    def node(self, node_id: str) -> Node:
        return self.universe.node(node_id)

    def parents_within(self) -> Mapping[str, tuple[str, ...]]:
        """Parent lists restricted to this formula's node set, children resolved."""
        parents: dict[str, list[str]] = {n: [] for n in self.nodes}
        for nid in self.nodes:
            node = self.universe.node(nid)
            for child in set(node.children):
                if child in parents:
                    parents[child].append(nid)
        return {n: tuple(sorted(ps)) for n, ps in parents.items()}

    def letter_nodes(self) -> frozenset[str]:
        return frozenset(n for n in self.nodes if self.universe.node(n).is_letter)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    node: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.node}: {self.message}"


def validate(formula: Formula) -> list[ValidationIssue]:
    """Check universe and formula invariants; empty list means valid."""
    issues: list[ValidationIssue] = []
    universe = formula.universe
    for nid in (formula.star, *formula.free, *formula.roots):
        if nid not in universe:
            issues.append(ValidationIssue("star-outside-graph", nid, "declared node is not in the universe"))
    if issues:
        return issues
    for nid in sorted(formula.nodes):
        node = universe.node(nid)
        for child in node.children:
            if child not in universe:
                issues.append(ValidationIssue("dangling-child", nid, f"child {child!r} does not resolve"))
        if node.is_letter:
            if node.children:
                issues.append(ValidationIssue("arity-mismatch", nid, "letters take no children"))
        elif len(node.children) != node.table.arity:
            issues.append(
                ValidationIssue(
                    "arity-mismatch",
                    nid,
                    f"operator {node.table.name} is {node.table.arity}-ary but has "
                    f"{len(node.children)} children",
                )
            )
    seen_letters: set[str] = set()
    for nid in sorted(formula.nodes):
        node = universe.node(nid)
        if node.is_letter:
            if nid in seen_letters:
                issues.append(ValidationIssue("duplicate-letter-node", nid, "letter occurs twice"))
            seen_letters.add(nid)
    return issues


def ensure_valid(formula: Formula) -> Formula:
    issues = validate(formula)
    if issues:
        raise InvalidFormulaError(issues)
    return formula


def subformula_at(formula: Formula, node_id: str) -> Formula:
    """The pointed subgraph rooted at ``node_id``: descendant closure, star moved."""
    if node_id not in formula.nodes:
        raise UnknownNodeError(f"node {node_id!r} is not in the formula")
    closure = formula.universe.closure((node_id,))
    free = tuple(n for n in formula.free if n in closure)
    return Formula(formula.universe, node_id, free)


def proper_subformula_roots(formula: Formula) -> frozenset[str]:
    return frozenset(n for n in formula.nodes if n != formula.star)


def descends_from(formula: Formula, ancestor: str, node_id: str) -> bool:
    return node_id in formula.universe.closure((ancestor,))


def is_well_grounded(formula: Formula) -> bool:
    """No node descends from itself and the star reaches every node."""
    nodes = formula.nodes
    if formula.universe.closure((formula.star,)) != nodes:
        return False
    color: dict[str, int] = {}

    def cyclic(start: str) -> bool:
        stack = [(start, iter(formula.universe.node(start).children))]
        color[start] = 1
        while stack:
            nid, it = stack[-1]
            advanced = False
            for child in it:
                state = color.get(child)
                if state == 1:
                    return True
                if state is None:
                    color[child] = 1
                    stack.append((child, iter(formula.universe.node(child).children)))
                    advanced = True
                    break
            if not advanced:
                color[nid] = 2
                stack.pop()
        return False

    return not cyclic(formula.star)


def is_strongly_well_grounded(formula: Formula) -> bool:
    """Well-grounded with the free nodes exactly the propositional letters."""
    return is_well_grounded(formula) and formula.free_set == formula.letter_nodes()


def substitute(psi: Formula, phi: Formula, letter: str) -> Formula:
    """Replace the letter node ``letter`` of ``phi`` by the whole of ``psi``.

    The two formulas must have no node ids in common; edges into the letter
    are redirected to psi's star and the letter disappears.
    """
    shared = phi.nodes & psi.nodes
    if shared:
        raise SharedNodesError(f"formulas share nodes: {sorted(shared)}")
    if letter not in phi.nodes or not phi.universe.node(letter).is_letter:
        raise NotALetterError(f"{letter!r} is not a letter of the host formula")

    merged = NodeUniverse()
    for src, nodes in ((phi.universe, phi.nodes), (psi.universe, psi.nodes)):
        for nid in sorted(nodes):
            if nid == letter:
                continue
            node = src.node(nid)
            if node.is_letter:
                merged.add_letter(nid)
            else:
                children = tuple(psi.star if c == letter else c for c in node.children)
                table = node.table
                try:
                    merged.register_table(table)
                except DuplicateNameError:
                    # same name, different column in the other universe
                    table = OperatorTable(f"{table.name}_of_{nid}", table.arity, table.outputs)
                merged.add_operator(nid, table, children)

    star = psi.star if phi.star == letter else phi.star
    free = tuple(n for n in phi.free if n != letter) + psi.free
    roots = tuple(psi.star if r == letter else r for r in phi.roots)
    return Formula(merged, star, free, roots)


def make_completely_connected(formula: Formula) -> Formula:
    """Give every operator the full node list as children.

    Each operator's table becomes the old table composed with the projection
    onto its original child positions, so the two formulas have the same
    hypothesis dynamics.  Child order: original children (first occurrence)
    first, then the remaining nodes sorted by id.
    """
    nodes = sorted(formula.nodes)
    m = len(nodes)
    rebuilt = NodeUniverse()
    for nid in nodes:
        node = formula.universe.node(nid)
        if node.is_letter:
            rebuilt.add_letter(nid)
            continue
        ordered: list[str] = []
        for child in node.children:
            if child not in ordered:
                ordered.append(child)
        ordered.extend(n for n in nodes if n not in ordered)
        slot = {c: i for i, c in enumerate(ordered)}
        positions = tuple(slot[c] for c in node.children)
        outputs = []
        for i in range(2**m):
            bits = tuple(bool((i >> (m - 1 - j)) & 1) for j in range(m))
            outputs.append(node.table.value(tuple(bits[p] for p in positions)))
        table = OperatorTable(f"cc_{nid}", m, tuple(outputs))
        rebuilt.add_operator(nid, table, tuple(ordered))
    return Formula(rebuilt, formula.star, formula.free, formula.roots)
