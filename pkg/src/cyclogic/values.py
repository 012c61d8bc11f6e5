"""The four truth values T, F, L, V and their diamond lattice.

T and F are the classical values.  L ("lie") marks contradictory statements:
assuming them true forces them false and vice versa.  V ("vacuous") marks
independent statements that can settle either way.  The lattice order puts V
at the bottom, L at the top, with T and F incomparable in between: lower
values are more prone to getting stuck.
"""

from __future__ import annotations

import enum
from typing import Iterable


class Value(enum.Enum):
    T = "T"
    F = "F"
    L = "L"
    V = "V"

    def __str__(self) -> str:
        return self.value

    @property
    def flags(self) -> tuple[bool, bool]:
        """The (can-stick-true, can-stick-false) pair for this value."""
        return _FLAGS[self]

    @staticmethod
    def from_flags(stuck_true: bool, stuck_false: bool) -> "Value":
        return _FROM_FLAGS[(stuck_true, stuck_false)]

    @staticmethod
    def from_reachability(true_escapes: bool, false_escapes: bool) -> "Value":
        """Classification from the two universal-escape facts.

        ``true_escapes``: every hypothesis assuming the star true leads to one
        assuming it false.  ``false_escapes``: the symmetric fact.
        """
        return Value.from_flags(not true_escapes, not false_escapes)


_FLAGS = {
    Value.T: (True, False),
    Value.F: (False, True),
    Value.V: (True, True),
    Value.L: (False, False),
}

_FROM_FLAGS = {flags: value for value, flags in _FLAGS.items()}

BOOL_VALUES = (Value.T, Value.F)
ALL_VALUES = (Value.T, Value.F, Value.L, Value.V)


def sup(values: Iterable[Value]) -> Value:
    """Least upper bound; componentwise AND of the stuck flags."""
    st, sf = True, True
    empty = True
    for v in values:
        empty = False
        ft, ff = v.flags
        st, sf = st and ft, sf and ff
    if empty:
        raise ValueError("sup of no values")
    return Value.from_flags(st, sf)


def inf(values: Iterable[Value]) -> Value:
    """Greatest lower bound; componentwise OR of the stuck flags."""
    st, sf = False, False
    empty = True
    for v in values:
        empty = False
        ft, ff = v.flags
        st, sf = st or ft, sf or ff
    if empty:
        raise ValueError("inf of no values")
    return Value.from_flags(st, sf)


def leq(a: Value, b: Value) -> bool:
    """True when ``a`` precedes ``b`` in the diamond order (V lowest, L highest)."""
    at, af = a.flags
    bt, bf = b.flags
    return at >= bt and af >= bf


def parse_value(text: str) -> Value:
    try:
        return Value(text.strip().upper())
    except ValueError:
        raise ValueError(f"not a truth value: {text!r} (expected one of T, F, L, V)") from None
