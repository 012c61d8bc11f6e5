"""Models that admit contradictions, and truth of formulas inside them.

A model fixes four disjoint sets of closed axiom formulas (true, false,
contradictory, independent) over one shared node universe.  Axioms take their
value from their set.  Proper subformulas of axioms ("subaxioms") inherit a
value from above through a nondecreasing fixpoint: evaluate each containing
axiom with its star moved down to the subaxiom and all axioms (and, from the
second round, all other subaxioms) bound.  Everything else is valued from
below, with embedded axioms and subaxioms bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .classical import (
    ClassicalFormula,
    classical_value,
    expand_dnf,
    graph_classical_value,
    letters as classical_letters,
)
from .engine import Proposition, tautology_class, truth_value
from .graph import (
    AND,
    BUILTIN_TABLES,
    IMPLIES,
    NOT,
    OR,
    Formula,
    GraphError,
    NodeUniverse,
    is_well_grounded,
)
from .values import ALL_VALUES, Value, leq, sup


class ModelError(ValueError):
    pass


class NonMonotoneRError(ModelError):
    pass


class FixpointCapError(ModelError):
    pass


class NotSimpleError(ModelError):
    pass


_FLAVORS = (
    (Value.T, "true_axioms"),
    (Value.F, "false_axioms"),
    (Value.L, "lie_axioms"),
    (Value.V, "vacuous_axioms"),
)


@dataclass(frozen=True)
class Model:
    universe: NodeUniverse
    letters: frozenset[str]
    true_axioms: tuple[Formula, ...] = ()
    false_axioms: tuple[Formula, ...] = ()
    lie_axioms: tuple[Formula, ...] = ()
    vacuous_axioms: tuple[Formula, ...] = ()

    def axioms(self) -> Iterable[tuple[Formula, Value]]:
        for value, attr in _FLAVORS:
            for formula in getattr(self, attr):
                yield formula, value

    def axiom_values(self) -> dict[str, Value]:
        return {formula.star: value for formula, value in self.axioms()}


@dataclass(frozen=True)
class ModelIssue:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.subject}: {self.message}"


def validate_model(model: Model) -> list[ModelIssue]:
    issues: list[ModelIssue] = []
    if not model.letters:
        issues.append(ModelIssue("letter-outside-M", "-", "letter set must be nonempty"))
    seen: dict[str, Value] = {}
    for formula, value in model.axioms():
        if formula.free:
            issues.append(ModelIssue("free-axiom", formula.star, "axioms must have no free nodes"))
        if formula.star in seen:
            issues.append(
                ModelIssue(
                    "overlapping-axioms",
                    formula.star,
                    f"axiom appears as both {seen[formula.star]} and {value}",
                )
            )
        seen[formula.star] = value
        for nid in formula.nodes:
            node = model.universe.node(nid)
            if node.is_letter and nid not in model.letters:
                issues.append(
                    ModelIssue("letter-outside-M", nid, "axiom uses a letter outside the model")
                )
    return issues


def subaxioms(model: Model) -> dict[str, tuple[Formula, ...]]:
    """Every proper-subformula root of an axiom, with the axioms containing it."""
    containing: dict[str, list[Formula]] = {}
    for axiom, _ in model.axioms():
        for nid in axiom.nodes:
            if nid != axiom.star:
                containing.setdefault(nid, []).append(axiom)
    return {nid: tuple(axs) for nid, axs in sorted(containing.items())}


@dataclass(frozen=True)
class NodeValuation:
    value: Value
    provenance: str  # axiom | subaxiom | computed
    r_trace: tuple[Value, ...] | None = None


class _Valuation:
    """Cached per-model machinery: axiom values and the subaxiom R fixpoint."""

    def __init__(self, model: Model, node_cap: int | None):
        self.model = model
        self.node_cap = node_cap
        self.axiom_value = model.axiom_values()
        self.containing = subaxioms(model)
        self.pure_roots = tuple(r for r in self.containing if r not in self.axiom_value)
        self.r_value: dict[str, Value] = {}
        self.r_trace: dict[str, tuple[Value, ...]] = {}
        self._run_fixpoint()

    def _axiom_pass(self, axiom: Formula, root: str, extra: Mapping[str, Value]) -> Value:
        bindings = {
            nid: self.axiom_value[nid] for nid in axiom.nodes if nid in self.axiom_value
        }
        for nid, value in extra.items():
            if nid in axiom.nodes and nid != root and nid not in self.axiom_value:
                bindings[nid] = value
        moved = Formula(
            self.model.universe,
            root,
            tuple(sorted(bindings)),
            roots=(axiom.star, *axiom.roots),
        )
        return truth_value(Proposition(moved, bindings), node_cap=self.node_cap)

    def _run_fixpoint(self) -> None:
        if not self.pure_roots:
            return
        traces: dict[str, list[Value]] = {r: [] for r in self.pure_roots}
        current: dict[str, Value] = {}
        cap = 4 * len(self.pure_roots)
        for step in range(cap + 1):
            nxt = {
                r: sup(
                    self._axiom_pass(axiom, r, current) for axiom in self.containing[r]
                )
                for r in self.pure_roots
            }
            for r in self.pure_roots:
                if current and not leq(current[r], nxt[r]):
                    raise NonMonotoneRError(
                        f"subaxiom {r!r} decreased from {current[r]} to {nxt[r]}"
                    )
                traces[r].append(nxt[r])
            if current == nxt:
                break
            current = nxt
        else:
            raise FixpointCapError(f"subaxiom values did not stabilize within {cap} rounds")
        self.r_value = current
        self.r_trace = {r: tuple(tr) for r, tr in traces.items()}

    def value(self, phi: Formula) -> Value:
        if phi.star in self.axiom_value:
            return self.axiom_value[phi.star]
        if phi.star in self.r_value:
            return self.r_value[phi.star]
        bindings = {}
        for nid in phi.nodes:
            if nid == phi.star:
                continue
            if nid in self.axiom_value:
                bindings[nid] = self.axiom_value[nid]
            elif nid in self.r_value:
                bindings[nid] = self.r_value[nid]
        bound = Formula(
            self.model.universe, phi.star, tuple(sorted(bindings)), roots=(phi.star, *phi.roots)
        )
        return truth_value(Proposition(bound, bindings), node_cap=self.node_cap)

    def node_valuation(self, nid: str) -> NodeValuation:
        if nid in self.axiom_value:
            return NodeValuation(self.axiom_value[nid], "axiom")
        if nid in self.r_value:
            return NodeValuation(self.r_value[nid], "subaxiom", self.r_trace[nid])
        return NodeValuation(self.value(Formula(self.model.universe, nid)), "computed")


@lru_cache(maxsize=64)
def _valuation(model: Model, node_cap: int | None) -> _Valuation:
    return _Valuation(model, node_cap)


def _check_in_model(model: Model, phi: Formula) -> None:
    if phi.free:
        raise ModelError(f"formula starred at {phi.star!r} has free nodes")
    for nid in phi.nodes:
        node = model.universe.node(nid) if nid in model.universe else phi.universe.node(nid)
        if node.is_letter and nid not in model.letters:
            raise ModelError(f"letter {nid!r} is not in the model")


def value_in_model(model: Model, phi: Formula, *, node_cap: int | None = None) -> Value:
    """The truth value of a closed formula in the model."""
    _check_in_model(model, phi)
    return _valuation(model, node_cap).value(phi)


def value_report(model: Model, phi: Formula, *, node_cap: int | None = None) -> dict[str, NodeValuation]:
    """Per-node values with provenance for every node of the formula's graph."""
    _check_in_model(model, phi)
    valuation = _valuation(model, node_cap)
    return {nid: valuation.node_valuation(nid) for nid in sorted(phi.nodes)}


def satisfies(model: Model, phi: Formula, flavor: Value = Value.T, *, node_cap: int | None = None) -> bool:
    return value_in_model(model, phi, node_cap=node_cap) is flavor


def is_complete(model: Model, corpus: Iterable[Formula], *, node_cap: int | None = None) -> bool:
    """No well-grounded corpus formula is valued V."""
    return not any(
        is_well_grounded(phi) and value_in_model(model, phi, node_cap=node_cap) is Value.V
        for phi in corpus
    )


# --- classical correspondence ------------------------------------------------


@dataclass(frozen=True)
class ClassicalTheoryModel:
    """A classical theory plus a total T/F assignment to its letters."""

    theory: tuple[ClassicalFormula, ...]
    assignment: tuple[tuple[str, bool], ...]

    @staticmethod
    def build(theory: Sequence[ClassicalFormula], assignment: Mapping[str, bool]) -> "ClassicalTheoryModel":
        return ClassicalTheoryModel(tuple(theory), tuple(sorted(assignment.items())))

    @property
    def assignment_map(self) -> dict[str, bool]:
        return dict(self.assignment)

    def is_classical_model(self) -> bool:
        values = self.assignment_map
        return all(classical_value(cf, values) for cf in self.theory)


def build_classical_model(tm: ClassicalTheoryModel, universe: NodeUniverse | None = None) -> Model:
    """The model whose true axioms are the expanded-DNF theory plus the true letters."""
    universe = universe if universe is not None else NodeUniverse()
    assignment = tm.assignment_map
    for cf in tm.theory:
        missing = [p for p in classical_letters(cf) if p not in assignment]
        if missing:
            raise ModelError(f"assignment misses theory letters {missing}")
    for name in assignment:
        if name not in universe:
            universe.add_letter(name)
    expanded = tuple(expand_dnf(cf, universe) for cf in tm.theory)
    true_letters = tuple(Formula(universe, p) for p, b in sorted(assignment.items()) if b)
    false_letters = tuple(Formula(universe, p) for p, b in sorted(assignment.items()) if not b)
    return Model(
        universe,
        frozenset(assignment),
        true_axioms=expanded + true_letters,
        false_axioms=false_letters,
    )


@dataclass
class CorrespondenceVerdict:
    model: Model
    is_classical_model: bool
    well_grounded_l: tuple[str, ...]  # star ids of well-grounded corpus formulas valued L
    agreement: dict[str, tuple[Value, Value]]  # star -> (value in model, classical value)
    iff_holds: bool
    values_agree: bool


def check_classical_correspondence(
    tm: ClassicalTheoryModel,
    corpus: Sequence[Formula] = (),
    universe: NodeUniverse | None = None,
    *,
    node_cap: int | None = None,
) -> CorrespondenceVerdict:
    """Classical modelhood against well-grounded L formulas, over a finite corpus.

    Every subformula of every axiom is always part of the checked corpus;
    ``corpus`` supplies additional formulas over the same universe.
    """
    if universe is None:
        universe = corpus[0].universe if corpus else NodeUniverse()
    model = build_classical_model(tm, universe)
    checked: dict[str, Formula] = {}
    for axiom, _ in model.axioms():
        for nid in sorted(axiom.nodes):
            checked.setdefault(nid, Formula(universe, nid))
    for phi in corpus:
        checked.setdefault(phi.star, phi)
    assignment = tm.assignment_map
    is_classical = tm.is_classical_model()
    wg_l = []
    agreement: dict[str, tuple[Value, Value]] = {}
    for star, phi in sorted(checked.items()):
        if not is_well_grounded(phi):
            continue
        value = value_in_model(model, phi, node_cap=node_cap)
        if value is Value.L:
            wg_l.append(phi.star)
        classical = Value.T if graph_classical_value(phi, assignment) else Value.F
        agreement[phi.star] = (value, classical)
    values_agree = all(v is c for v, c in agreement.values())
    return CorrespondenceVerdict(
        model=model,
        is_classical_model=is_classical,
        well_grounded_l=tuple(sorted(wg_l)),
        agreement=agreement,
        iff_holds=is_classical == (not wg_l),
        values_agree=values_agree if is_classical else True,
    )


# --- a model where the Liar is false -----------------------------------------


def _strictly_below_roots(phi: Formula) -> Iterable[str]:
    """Proper subformula roots that do not conversely contain the formula.

    On cyclic graphs two distinct formulas can each be a proper subformula of
    the other; such mutual pairs sit at the same level of the subformula
    order, so neither blocks the other's minimality.
    """
    for nid in sorted(phi.nodes):
        if nid == phi.star:
            continue
        if phi.star not in phi.universe.closure((nid,)):
            yield nid


def build_liar_false_model(
    tm: ClassicalTheoryModel,
    corpus: Sequence[Formula],
    max_iter: int = 8,
    *,
    universe: NodeUniverse | None = None,
    node_cap: int | None = None,
) -> list[Model]:
    """Falsify minimal contradictory formulas round by round.

    Starts from the classical-correspondence model and repeatedly adds every
    corpus formula that is L with no strictly smaller L subformula to the
    false axioms, until no corpus formula is L.  Returns the whole sequence.
    """
    if universe is None:
        universe = corpus[0].universe if corpus else NodeUniverse()
    current = build_classical_model(tm, universe)
    sequence = [current]
    for _ in range(max_iter):
        valuation_value = lambda phi: value_in_model(current, phi, node_cap=node_cap)
        l_formulas = [phi for phi in corpus if valuation_value(phi) is Value.L]
        if not l_formulas:
            return sequence
        axiom_stars = set(current.axiom_values())
        minimal = []
        for phi in l_formulas:
            below = (
                value_in_model(current, Formula(universe, nid), node_cap=node_cap)
                for nid in _strictly_below_roots(phi)
            )
            if not any(v is Value.L for v in below):
                minimal.append(phi)
        fresh = [phi for phi in minimal if phi.star not in axiom_stars]
        if not fresh:
            raise FixpointCapError(
                "contradictory corpus formulas remain but none is minimal"
            )
        current = replace(
            current,
            false_axioms=current.false_axioms
            + tuple(Formula(universe, phi.star) for phi in fresh),
        )
        sequence.append(current)
        if not any(value_in_model(current, phi, node_cap=node_cap) is Value.L for phi in corpus):
            return sequence
    raise FixpointCapError(f"no fixpoint within {max_iter} rounds")


# --- simple models and external rules ----------------------------------------


def is_simple(model: Model) -> bool:
    """Axioms are exactly the letters, each assumed true or false."""
    if model.lie_axioms or model.vacuous_axioms:
        return False
    axiom_letters = set()
    for formula, _ in model.axioms():
        node = model.universe.node(formula.star)
        if not node.is_letter:
            return False
        axiom_letters.add(formula.star)
    return axiom_letters == set(model.letters)


@dataclass
class RuleCheck:
    rule: str
    checked: int = 0
    counterexamples: list[tuple[str, ...]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


@dataclass
class RRuleCase:
    star: str
    is_strong_tautology: bool
    holds_universally: bool

    @property
    def ok(self) -> bool:
        return self.is_strong_tautology == self.holds_universally


@dataclass
class ExternalRulesReport:
    rules: dict[str, RuleCheck]
    r_rule: list[RRuleCase]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rules.values()) and all(c.ok for c in self.r_rule)


RULE_NAMES = (
    "modus_ponens",
    "modus_tollens",
    "contrapositive",
    "chain_rule",
    "disjunctive_inference",
    "double_negation",
    "de_morgan",
    "simplification",
    "conjunction",
    "disjunctive_syllogism",
)


class _Workbench:
    """Scratch universe for combining sample formulas with fresh connectives."""

    def __init__(self, model: Model, node_cap: int | None):
        self.universe = model.universe.copy()
        self.model = Model(
            self.universe,
            model.letters,
            tuple(Formula(self.universe, a.star, roots=a.roots) for a in model.true_axioms),
            tuple(Formula(self.universe, a.star, roots=a.roots) for a in model.false_axioms),
        )
        self.node_cap = node_cap
        self._memo: dict[str, Value] = {}

    def value_of_star(self, star: str) -> Value:
        if star not in self._memo:
            self._memo[star] = value_in_model(
                self.model, Formula(self.universe, star), node_cap=self.node_cap
            )
        return self._memo[star]

    def holds(self, star: str) -> bool:
        return self.value_of_star(star) is Value.T

    def combine(self, table, *stars: str) -> str:
        return self.universe.add_operator(
            self.universe.fresh_id("w_" + table.name.lower()), table, stars
        )


def check_external_rules(
    model: Model,
    samples: Sequence[Formula],
    *,
    pair_limit: int | None = None,
    seed: int = 0,
    node_cap: int | None = None,
) -> ExternalRulesReport:
    """Verify the classical inference rules from outside the object language.

    Rules are implications between satisfaction facts; combined formulas use
    fresh connective nodes over the sample stars.  ``pair_limit`` caps how
    many pairs (triples for the chain rule) each rule examines; pairs are
    drawn deterministically from ``seed``.
    """
    import random

    if not is_simple(model):
        raise NotSimpleError("external rules are checked on simple models only")
    bench = _Workbench(model, node_cap)
    stars = [phi.star for phi in samples]
    rng = random.Random(seed)

    pairs = [(a, b) for a in stars for b in stars]
    if pair_limit is not None and len(pairs) > pair_limit:
        pairs = rng.sample(pairs, pair_limit)
    triples = [(a, b, c) for a in stars for b in stars for c in stars]
    if pair_limit is not None and len(triples) > pair_limit:
        triples = rng.sample(triples, pair_limit)

    checks = {name: RuleCheck(name) for name in RULE_NAMES}
    neg = {s: bench.combine(NOT, s) for s in stars}
    arrows: dict[tuple[str, str], str] = {}

    def arrow(a: str, b: str) -> str:
        if (a, b) not in arrows:
            arrows[(a, b)] = bench.combine(IMPLIES, a, b)
        return arrows[(a, b)]

    def record(name: str, premises_hold: bool, conclusion: bool, witness: tuple[str, ...]) -> None:
        check = checks[name]
        check.checked += 1
        if premises_hold and not conclusion:
            check.counterexamples.append(witness)

    for a, b in pairs:
        imp = arrow(a, b)
        record("modus_ponens", bench.holds(a) and bench.holds(imp), bench.holds(b), (a, b))
        record(
            "modus_tollens",
            bench.holds(imp) and bench.holds(neg[b]),
            bench.holds(neg[a]),
            (a, b),
        )
        contra = bench.combine(IMPLIES, neg[b], neg[a])
        record("contrapositive", bench.holds(imp), bench.holds(contra), (a, b))

        conj = bench.combine(AND, a, b)
        disj = bench.combine(OR, a, b)
        record("disjunctive_inference", bench.holds(a), bench.holds(disj), (a, b))
        record(
            "simplification",
            bench.holds(conj),
            bench.holds(a) and bench.holds(b),
            (a, b),
        )
        record("conjunction", bench.holds(a) and bench.holds(b), bench.holds(conj), (a, b))
        record(
            "disjunctive_syllogism",
            bench.holds(disj) and bench.holds(neg[a]),
            bench.holds(b),
            (a, b),
        )
        not_conj = bench.combine(NOT, conj)
        not_or = bench.combine(OR, neg[a], neg[b])
        not_disj = bench.combine(NOT, disj)
        not_and = bench.combine(AND, neg[a], neg[b])
        record(
            "de_morgan",
            bench.holds(not_conj),
            bench.holds(not_or),
            (a, b),
        )
        record(
            "de_morgan",
            bench.holds(not_disj),
            bench.holds(not_and),
            (a, b),
        )

    for s in stars:
        nn = bench.combine(NOT, neg[s])
        record("double_negation", bench.holds(nn), bench.holds(s), (s,))
        record("double_negation", bench.holds(s), bench.holds(nn), (s,))

    for a, b, c in triples:
        record(
            "chain_rule",
            bench.holds(arrow(a, b)) and bench.holds(arrow(b, c)),
            bench.holds(arrow(a, c)),
            (a, b, c),
        )

    r_cases = [
        _r_rule_case(bench, model, phi, node_cap=node_cap) for phi in samples
    ]
    return ExternalRulesReport(checks, r_cases)


def _r_rule_case(bench: _Workbench, model: Model, phi: Formula, *, node_cap: int | None) -> RRuleCase:
    """Does the rule "this formula is satisfied" hold in every model?

    Strong tautologies hold everywhere.  Anything else is refuted by binding
    the letters according to a non-T row of the formula's truth table, which a
    model can express by axiomatizing letters as true/false/lie/vacuous.
    """
    from .engine import restricted_truth_table, truth_table as full_truth_table

    letter_ids = tuple(sorted(phi.letter_nodes()))
    freed = Formula(bench.universe, phi.star, letter_ids, roots=phi.roots)
    restricted = restricted_truth_table(freed, node_cap=node_cap)
    refuting_row = next((row for row, v in restricted.items() if v is not Value.T), None)
    strong = refuting_row is None
    if strong:
        full = full_truth_table(freed, node_cap=node_cap)
        refuting_row = next((row for row, v in full.items() if v is not Value.T), None)
        strong = refuting_row is None
    if strong:
        holds_universally = bench.holds(phi.star)
    else:
        refuting = _letter_model(bench.universe, model.letters, dict(zip(letter_ids, refuting_row)))
        value = value_in_model(refuting, Formula(bench.universe, phi.star), node_cap=node_cap)
        holds_universally = value is Value.T
    return RRuleCase(phi.star, strong, holds_universally)


def _letter_model(universe: NodeUniverse, all_letters: frozenset[str], binding: Mapping[str, Value]) -> Model:
    """A model axiomatizing the given letters with arbitrary flavors, rest true."""
    groups: dict[Value, list[Formula]] = {v: [] for v in ALL_VALUES}
    for letter in sorted(all_letters):
        flavor = binding.get(letter, Value.T)
        groups[flavor].append(Formula(universe, letter))
    return Model(
        universe,
        all_letters,
        tuple(groups[Value.T]),
        tuple(groups[Value.F]),
        tuple(groups[Value.L]),
        tuple(groups[Value.V]),
    )


# --- special and generically inconsistent formulas ----------------------------


def is_generically_inconsistent(phi: Formula, model: Model, *, node_cap: int | None = None) -> bool:
    """Value in the model differs from the value with only axiom letters bound."""
    _check_in_model(model, phi)
    axiom_values = model.axiom_values()
    bindings = {
        nid: axiom_values[nid]
        for nid in phi.nodes
        if nid != phi.star and nid in axiom_values and model.universe.node(nid).is_letter
    }
    bound = Formula(model.universe, phi.star, tuple(sorted(bindings)), roots=(phi.star, *phi.roots))
    letters_only = truth_value(Proposition(bound, bindings), node_cap=node_cap)
    return value_in_model(model, phi, node_cap=node_cap) is not letters_only


_ID_TABLE = BUILTIN_TABLES["ID"]


def _is_conjunction(table) -> bool:
    return all(out == (i == 2**table.arity - 1) for i, out in enumerate(table.outputs))


def _is_disjunction(table) -> bool:
    return all(out == (i != 0) for i, out in enumerate(table.outputs))


def _is_identity(table) -> bool:
    return table.arity == 1 and table.outputs == (False, True)


def _is_negation(table) -> bool:
    return table.arity == 1 and table.outputs == (True, False)


def _is_identity_node(universe: NodeUniverse, nid: str) -> bool:
    node = universe.node(nid)
    return not node.is_letter and _is_identity(node.table)


def is_special(phi: Formula, model: Model) -> bool:
    """Well-grounded over and/or/not/identity/letters, with shielded subaxioms.

    No identity-rooted subformula may be an axiom; whenever a non-identity
    subformula is a subaxiom of an axiom, an identity node over it must be a
    subaxiom of that axiom too (so the identity is bound at least as high as
    its target); and axiom stars inside the formula point only at identity
    nodes.
    """
    if not is_well_grounded(phi):
        return False
    universe = model.universe
    for nid in phi.nodes:
        node = universe.node(nid)
        if node.is_letter:
            continue
        t = node.table
        if not (_is_conjunction(t) or _is_disjunction(t) or _is_negation(t) or _is_identity(t)):
            return False
    axiom_values = model.axiom_values()
    sub_roots = subaxioms(model)
    for nid in phi.nodes:
        if _is_identity_node(universe, nid) and nid in axiom_values:
            return False
    for nid in phi.nodes:
        if _is_identity_node(universe, nid):
            continue
        for axiom in sub_roots.get(nid, ()):
            shielded = any(
                mid != axiom.star
                and _is_identity_node(universe, mid)
                and universe.node(mid).children == (nid,)
                for mid in axiom.nodes
            )
            if not shielded:
                return False
    for nid in phi.nodes:
        if nid in axiom_values:
            for child in universe.node(nid).children:
                if not _is_identity_node(universe, child):
                    return False
    return True
