"""Bridge between tree-shaped sentential formulas and graph formulas.

Strongly well-grounded graph formulas over the builtin connectives correspond
one-to-one with classical sentential formulas (repeated letter mentions share
one letter node on the graph side).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .graph import (
    AND,
    BUILTIN_TABLES,
    IFF,
    IMPLIES,
    NOT,
    OR,
    Formula,
    GraphError,
    Node,
    NodeUniverse,
    OperatorTable,
    is_strongly_well_grounded,
    nary_and,
    nary_or,
)


class NotStronglyWellGroundedError(GraphError):
    pass


class NonBuiltinOperatorError(GraphError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    arg: "ClassicalFormula"

    def __str__(self) -> str:
        return f"~{_wrap(self.arg)}"


@dataclass(frozen=True)
class BinOp:
    left: "ClassicalFormula"
    right: "ClassicalFormula"

    SYMBOL = "?"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} {self.SYMBOL} {_wrap(self.right)}"


class And(BinOp):
    SYMBOL = "&"


class Or(BinOp):
    SYMBOL = "|"


class Implies(BinOp):
    SYMBOL = "->"


class Iff(BinOp):
    SYMBOL = "<->"


ClassicalFormula = Union[Var, Not, And, Or, Implies, Iff]


def _wrap(cf: ClassicalFormula) -> str:
    return str(cf) if isinstance(cf, (Var, Not)) else f"({cf})"


def letters(cf: ClassicalFormula) -> tuple[str, ...]:
    seen: list[str] = []

    def walk(f: ClassicalFormula) -> None:
        if isinstance(f, Var):
            if f.name not in seen:
                seen.append(f.name)
        elif isinstance(f, Not):
            walk(f.arg)
        else:
            walk(f.left)
            walk(f.right)

    walk(cf)
    return tuple(sorted(seen))


def classical_value(cf: ClassicalFormula, assignment: Mapping[str, bool]) -> bool:
    if isinstance(cf, Var):
        return assignment[cf.name]
    if isinstance(cf, Not):
        return not classical_value(cf.arg, assignment)
    a = classical_value(cf.left, assignment)
    b = classical_value(cf.right, assignment)
    if isinstance(cf, And):
        return a and b
    if isinstance(cf, Or):
        return a or b
    if isinstance(cf, Implies):
        return (not a) or b
    if isinstance(cf, Iff):
        return a == b
    raise TypeError(f"not a classical formula: {cf!r}")


def graph_classical_value(formula: Formula, assignment: Mapping[str, bool]) -> bool:
    """Evaluate a well-grounded graph formula bottom-up with boolean letters."""
    memo: dict[str, bool] = {}

    def walk(nid: str) -> bool:
        if nid in memo:
            return memo[nid]
        node = formula.universe.node(nid)
        if node.is_letter:
            value = assignment[nid]
        else:
            value = node.table.value([walk(c) for c in node.children])
        memo[nid] = value
        return value

    return walk(formula.star)


# --- DNF -------------------------------------------------------------------

Literal = tuple[str, bool]  # (letter, positive?)


def _nnf(cf: ClassicalFormula, positive: bool) -> ClassicalFormula:
    if isinstance(cf, Var):
        return cf if positive else Not(cf)
    if isinstance(cf, Not):
        return _nnf(cf.arg, not positive)
    if isinstance(cf, And):
        cls = And if positive else Or
        return cls(_nnf(cf.left, positive), _nnf(cf.right, positive))
    if isinstance(cf, Or):
        cls = Or if positive else And
        return cls(_nnf(cf.left, positive), _nnf(cf.right, positive))
    if isinstance(cf, Implies):
        return _nnf(Or(Not(cf.left), cf.right), positive)
    if isinstance(cf, Iff):
        both = Or(And(cf.left, cf.right), And(Not(cf.left), Not(cf.right)))
        return _nnf(both, positive)
    raise TypeError(f"not a classical formula: {cf!r}")


def _dnf_clauses(cf: ClassicalFormula) -> list[list[Literal]]:
    if isinstance(cf, Var):
        return [[(cf.name, True)]]
    if isinstance(cf, Not):
        assert isinstance(cf.arg, Var), "argument must be in negation normal form"
        return [[(cf.arg.name, False)]]
    if isinstance(cf, Or):
        return _dnf_clauses(cf.left) + _dnf_clauses(cf.right)
    if isinstance(cf, And):
        out = []
        for lc in _dnf_clauses(cf.left):
            for rc in _dnf_clauses(cf.right):
                merged = list(lc)
                merged.extend(lit for lit in rc if lit not in merged)
                out.append(merged)
        return out
    raise TypeError(f"unexpected connective in NNF: {cf!r}")


def dnf_clauses(cf: ClassicalFormula) -> list[list[Literal]]:
    """Distribute into a disjunction of conjunctions of literals."""
    clauses = _dnf_clauses(_nnf(cf, True))
    unique: list[list[Literal]] = []
    for clause in clauses:
        if clause not in unique:
            unique.append(clause)
    return unique


def to_dnf(cf: ClassicalFormula) -> ClassicalFormula:
    def literal(lit: Literal) -> ClassicalFormula:
        name, positive = lit
        return Var(name) if positive else Not(Var(name))

    def conj(clause: list[Literal]) -> ClassicalFormula:
        out = literal(clause[0])
        for lit in clause[1:]:
            out = And(out, literal(lit))
        return out

    clauses = dnf_clauses(cf)
    out = conj(clauses[0])
    for clause in clauses[1:]:
        out = Or(out, conj(clause))
    return out


# --- graph <-> tree ----------------------------------------------------------

_TABLE_FOR = {Not: NOT, And: AND, Or: OR, Implies: IMPLIES, Iff: IFF}


def from_classical(
    cf: ClassicalFormula, universe: NodeUniverse | None = None, prefix: str = ""
) -> Formula:
    """Build the graph form; repeated letter mentions merge into one node."""
    universe = universe if universe is not None else NodeUniverse()
    letter_ids: dict[str, str] = {}

    def walk(f: ClassicalFormula) -> str:
        if isinstance(f, Var):
            if f.name not in letter_ids:
                name = prefix + f.name
                letter_ids[f.name] = name if name in universe else universe.add_letter(name)
            return letter_ids[f.name]
        if isinstance(f, Not):
            child = walk(f.arg)
            return universe.add_operator(universe.fresh_id(prefix + "not"), NOT, (child,))
        table = _TABLE_FOR[type(f)]
        left = walk(f.left)
        right = walk(f.right)
        name = universe.fresh_id(prefix + table.name.lower())
        return universe.add_operator(name, table, (left, right))

    star = walk(cf)
    return Formula(universe, star, tuple(sorted(letter_ids.values())))


def to_classical(formula: Formula) -> ClassicalFormula:
    """Unfold a strongly well-grounded builtin-connective formula into a tree."""
    if not is_strongly_well_grounded(formula):
        raise NotStronglyWellGroundedError(
            f"formula starred at {formula.star!r} is not strongly well-grounded"
        )

    def walk(nid: str) -> ClassicalFormula:
        node = formula.universe.node(nid)
        if node.is_letter:
            return Var(nid)
        for cls, table in _TABLE_FOR.items():
            if node.table.arity == table.arity and node.table.outputs == table.outputs:
                if cls is Not:
                    return Not(walk(node.children[0]))
                return cls(walk(node.children[0]), walk(node.children[1]))
        raise NonBuiltinOperatorError(
            f"node {nid!r} uses non-builtin operator {node.table.name!r}"
        )

    return walk(formula.star)


def expand_dnf(
    cf: ClassicalFormula, universe: NodeUniverse | None = None, prefix: str = ""
) -> Formula:
    """Graph of a DNF formula with an identity node above every non-star node.

    The result is a closed formula (no free nodes); its letters are shared by
    name with any letters already present in the universe.
    """
    universe = universe if universe is not None else NodeUniverse()
    clauses = dnf_clauses(cf)

    def shield(nid: str) -> str:
        eq = universe.fresh_id(prefix + "eq")
        return universe.add_operator(eq, BUILTIN_TABLES["ID"], (nid,))

    def letter(name: str) -> str:
        nid = prefix + name
        return nid if nid in universe else universe.add_letter(nid)

    def literal(lit: Literal) -> str:
        name, positive = lit
        leaf = letter(name)
        if positive:
            return leaf
        return universe.add_operator(universe.fresh_id(prefix + "not"), NOT, (shield(leaf),))

    def conj(clause: list[Literal]) -> str:
        if len(clause) == 1:
            return literal(clause[0])
        children = tuple(shield(literal(lit)) for lit in clause)
        table = universe.register_table(nary_and(len(children)))
        return universe.add_operator(universe.fresh_id(prefix + "and"), table, children)

    if len(clauses) == 1:
        star = conj(clauses[0])
    else:
        children = tuple(shield(conj(clause)) for clause in clauses)
        table = universe.register_table(nary_or(len(children)))
        star = universe.add_operator(universe.fresh_id(prefix + "or"), table, children)
    return Formula(universe, star)
