"""Constructing formulas that realize prescribed truth tables.

Every restricted table (T/F inputs only) is realizable by one completely
connected operator that reads its own value back as its last input.  Full
tables are realized by extending that operator with one "lie detector" input
per nonempty letter subset: a conjunction-and-negated-disjunction gadget that
is constantly false classically but can fire exactly when its letters are
bound L, triggering a prescribed extra escape of the starred node.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .engine import restricted_truth_table, truth_table
from .graph import AND, NOT, Formula, GraphError, NodeUniverse, OperatorTable, nary_and, nary_or
from .values import ALL_VALUES, BOOL_VALUES, Value, inf, leq, sup


class RealizationError(GraphError):
    pass


class BoundViolatedError(RealizationError):
    def __init__(self, eps: tuple[Value, ...], got: Value, bound: Value):
        self.eps = eps
        super().__init__(
            f"table entry at {_code(eps)} is {got}, below its lattice bound {bound}"
        )


class UnrealizableVCoordinateError(RealizationError):
    def __init__(self, eps: tuple[Value, ...], got: Value, forced: Value):
        self.eps = eps
        super().__init__(
            f"table entry at {_code(eps)} is {got}; a V coordinate freezes either way, "
            f"forcing exactly {forced}"
        )


class NotAGateError(GraphError):
    pass


def _code(values: Iterable[Value]) -> str:
    return "".join(v.value for v in values)


def _rows(k: int, values: Sequence[Value]) -> Iterable[tuple[Value, ...]]:
    return itertools.product(values, repeat=k)


@dataclass(frozen=True)
class RestrictedTable:
    k: int
    entries: Mapping[tuple[Value, ...], Value]

    def __post_init__(self) -> None:
        expected = set(_rows(self.k, BOOL_VALUES))
        if set(self.entries) != expected:
            raise GraphError(f"restricted table must cover all {2 ** self.k} T/F rows")

    @staticmethod
    def from_string(text: str) -> "RestrictedTable":
        k = (len(text) - 1).bit_length()
        if 2**k != len(text):
            raise GraphError(f"restricted table string length must be a power of 2, got {len(text)}")
        rows = list(_rows(k, BOOL_VALUES))
        return RestrictedTable(k, {row: Value(ch) for row, ch in zip(rows, text.upper())})

    def __getitem__(self, row: tuple[Value, ...]) -> Value:
        return self.entries[row]


@dataclass(frozen=True)
class FullTable:
    k: int
    entries: Mapping[tuple[Value, ...], Value]

    def __post_init__(self) -> None:
        expected = set(_rows(self.k, ALL_VALUES))
        if set(self.entries) != expected:
            raise GraphError(f"full table must cover all {4 ** self.k} rows")

    @staticmethod
    def from_string(text: str) -> "FullTable":
        k = 0
        while 4**k < len(text):
            k += 1
        if 4**k != len(text):
            raise GraphError(f"full table string length must be a power of 4, got {len(text)}")
        rows = list(_rows(k, ALL_VALUES))
        return FullTable(k, {row: Value(ch) for row, ch in zip(rows, text.upper())})

    def restricted(self) -> RestrictedTable:
        return RestrictedTable(
            self.k, {row: self.entries[row] for row in _rows(self.k, BOOL_VALUES)}
        )

    def __getitem__(self, row: tuple[Value, ...]) -> Value:
        return self.entries[row]


@dataclass(frozen=True)
class GateSignature:
    """The four-entry table of a one-letter formula, in T, F, L, V input order."""

    at_t: Value
    at_f: Value
    at_l: Value
    at_v: Value

    @property
    def code(self) -> str:
        return _code(self.as_tuple)

    @property
    def as_tuple(self) -> tuple[Value, Value, Value, Value]:
        return (self.at_t, self.at_f, self.at_l, self.at_v)

    @staticmethod
    def from_code(code: str) -> "GateSignature":
        if len(code) != 4:
            raise GraphError(f"gate signature must be 4 letters, got {code!r}")
        return GateSignature(*(Value(ch) for ch in code.upper()))

    def full_table(self) -> FullTable:
        return FullTable(1, {(v,): e for v, e in zip(ALL_VALUES, self.as_tuple)})

    def __str__(self) -> str:
        return self.code


def _letters(k: int) -> list[str]:
    return [f"p{i + 1}" for i in range(k)]


def _base_output(entry: Value, self_bit: bool) -> bool:
    if entry is Value.T:
        return True
    if entry is Value.F:
        return False
    if entry is Value.V:
        return self_bit
    return not self_bit


def realize_restricted(g: RestrictedTable) -> Formula:
    """A completely connected formula whose restricted table is ``g``.

    The star is a (k+1)-ary operator over the k free letters plus itself; its
    output copies the prescribed T/F entries and echoes (negates) its own last
    input where the entry is V (L).
    """
    k = g.k
    universe = NodeUniverse()
    letters = [universe.add_letter(p) for p in _letters(k)]
    outputs = []
    for bits in itertools.product((False, True), repeat=k + 1):
        row = tuple(Value.T if b else Value.F for b in bits[:k])
        outputs.append(_base_output(g[row], bits[k]))
    table = OperatorTable(f"gate{k}", k + 1, tuple(outputs))
    star = universe.add_operator("s", table, (*letters, "s"))
    formula = Formula(universe, star, tuple(letters))
    got = restricted_truth_table(formula)
    for row, want in g.entries.items():
        if got[row] is not want:
            raise RealizationError(
                f"restricted realization failed at {_code(row)}: wanted {want}, built {got[row]}"
            )
    return formula


def detector_gadget(universe: NodeUniverse, letters: Sequence[str], prefix: str = "det") -> Formula:
    """The lie detector over ``letters``: (and of all) and not (or of all).

    Classically constant false; it can reach true only while some input is
    bound L.  Letters are created in the universe when missing.
    """
    if not letters:
        raise GraphError("detector needs at least one letter")
    for p in letters:
        if p not in universe:
            universe.add_letter(p)
    if len(letters) == 1:
        neg = universe.add_operator(universe.fresh_id(f"{prefix}_not"), NOT, (letters[0],))
        root = universe.add_operator(universe.fresh_id(f"{prefix}_root"), AND, (letters[0], neg))
    else:
        conj_table = universe.register_table(nary_and(len(letters)))
        disj_table = universe.register_table(nary_or(len(letters)))
        conj = universe.add_operator(universe.fresh_id(f"{prefix}_all"), conj_table, tuple(letters))
        disj = universe.add_operator(universe.fresh_id(f"{prefix}_any"), disj_table, tuple(letters))
        neg = universe.add_operator(universe.fresh_id(f"{prefix}_not"), NOT, (disj,))
        root = universe.add_operator(universe.fresh_id(f"{prefix}_root"), AND, (conj, neg))
    return Formula(universe, root, tuple(letters))


def check_realizable(h: FullTable) -> None:
    """Raise unless ``h`` meets the two realizability preconditions.

    Every entry must dominate the inf-sup bound computed from the restricted
    part, and every V-containing row must equal the inf of its T/F
    resolutions exactly (a V-bound letter freezes, so those rows have no
    freedom).
    """
    from .engine import inequality_bound

    g = h.restricted()
    for eps in _rows(h.k, ALL_VALUES):
        bound = inequality_bound(g.entries, eps)
        if not leq(bound, h[eps]):
            raise BoundViolatedError(eps, h[eps], bound)
    for eps in _rows(h.k, ALL_VALUES):
        v_idx = [i for i, e in enumerate(eps) if e is Value.V]
        if not v_idx:
            continue
        resolutions = []
        for bits in itertools.product(BOOL_VALUES, repeat=len(v_idx)):
            row = list(eps)
            for i, b in zip(v_idx, bits):
                row[i] = b
            resolutions.append(h[tuple(row)])
        forced = inf(resolutions)
        if h[eps] is not forced:
            raise UnrealizableVCoordinateError(eps, h[eps], forced)


def _subset_order(k: int) -> list[tuple[int, ...]]:
    out = []
    for size in range(1, k + 1):
        out.extend(itertools.combinations(range(k), size))
    return out


def realize_full(h: FullTable) -> Formula:
    """A formula whose full truth table is ``h``; verified before returning."""
    check_realizable(h)
    k = h.k
    g = h.restricted()
    universe = NodeUniverse()
    letters = [universe.add_letter(p) for p in _letters(k)]
    subsets = _subset_order(k)
    detector_roots = []
    for s in subsets:
        name = "d" + "".join(str(i + 1) for i in s)
        gadget = detector_gadget(universe, [letters[i] for i in s], prefix=name)
        detector_roots.append(gadget.star)

    m = len(subsets)
    arity = k + m + 1
    outputs = []
    for bits in itertools.product((False, True), repeat=arity):
        letter_bits = bits[:k]
        det_bits = bits[k : k + m]
        self_bit = bits[k + m]
        active = [i for i, b in enumerate(det_bits) if b]
        row = tuple(Value.T if b else Value.F for b in letter_bits)
        if not active:
            outputs.append(_base_output(g[row], self_bit))
            continue
        if len(active) > 1:
            outputs.append(self_bit)  # neutral: never the source of a flip
            continue
        s = subsets[active[0]]
        eps = tuple(
            Value.L if i in s else (Value.T if letter_bits[i] else Value.F) for i in range(k)
        )
        completions = []
        for fill in itertools.product(BOOL_VALUES, repeat=len(s)):
            full_row = list(eps)
            for i, v in zip(s, fill):
                full_row[i] = v
            completions.append(g[tuple(full_row)])
        sigma = sup(completions)
        want = h[eps]
        clear_true = sigma.flags[0] and not want.flags[0]
        clear_false = sigma.flags[1] and not want.flags[1]
        if clear_true and clear_false:
            outputs.append(not self_bit)
        elif clear_true:
            outputs.append(False)
        elif clear_false:
            outputs.append(True)
        else:
            outputs.append(self_bit)

    table = OperatorTable(f"gate{k}x{m}", arity, tuple(outputs))
    star = universe.add_operator("s", table, (*letters, *detector_roots, "s"))
    formula = Formula(universe, star, tuple(letters))

    built = truth_table(formula)
    for eps in _rows(k, ALL_VALUES):
        if built[eps] is not h[eps]:
            raise RealizationError(
                f"construction does not reproduce the requested table at {_code(eps)}: "
                f"wanted {h[eps]}, built {built[eps]}"
            )
    return formula


def classify_gate(formula: Formula, *, node_cap: int | None = None) -> GateSignature:
    """The four-entry table of a formula with a single free letter node."""
    if len(formula.free) != 1 or not formula.universe.node(formula.free[0]).is_letter:
        raise NotAGateError("a gate has exactly one free node, and it must be a letter")
    table = truth_table(formula, node_cap=node_cap)
    return GateSignature(*(table[(v,)] for v in ALL_VALUES))


def enumerate_gates() -> dict[GateSignature, Formula]:
    """All realizable one-letter tables, each with its verified witness."""
    atlas: dict[GateSignature, Formula] = {}
    for values in itertools.product(ALL_VALUES, repeat=4):
        sig = GateSignature(*values)
        try:
            atlas[sig] = realize_full(sig.full_table())
        except RealizationError:
            continue
    return atlas
