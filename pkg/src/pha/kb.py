"""Validated, indexed knowledge base built from a parsed program."""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .errors import Diagnostic, KBValidationError, NonGroundAssumption, UnknownHypothesis
from .syntax import AssumableDecl, Clause, Program, parse_program
from .terms import (
    FALSE,
    Atom,
    Substitution,
    apply,
    canonical,
    is_ground,
    match_ground,
    new_counter,
    predicate_key,
    rename_apart,
    unify,
)

Key = Tuple[str, int]

# Shared by callers that do not supply their own counter.  Renamed variables
# carry a '#' so they never clash with variables of a parsed query atom.
_default_counter = new_counter()


@dataclass(frozen=True)
class KnowledgeBase:
    rules: Dict[Key, Tuple[Clause, ...]]
    constraints: Tuple[Clause, ...]
    assumables: Tuple[AssumableDecl, ...]
    warnings: Tuple[Diagnostic, ...] = ()
    _ground: Dict[Atom, float] = field(default_factory=dict, repr=False)
    _open: Dict[Key, Tuple[AssumableDecl, ...]] = field(default_factory=dict, repr=False)

    @property
    def cyclic(self) -> bool:
        return any(w.code == "cyclic" for w in self.warnings)

    def matching_rules(self, a: Atom, counter: Optional[Iterator[int]] = None) -> List[Tuple[Clause, Substitution]]:
        """Clauses whose head unifies with ``a``, renamed apart, in source order.

        ``false`` matches the constraints.
        """
        counter = counter if counter is not None else _default_counter
        candidates = self.constraints if a == FALSE else self.rules.get(predicate_key(a), ())
        out = []
        for clause in candidates:
            if is_ground(clause.head) and not clause.body:
                renamed = clause
            else:
                head, *body = rename_apart([clause.head, *clause.body], counter)
                renamed = Clause(head, tuple(body), clause.line)
            s = unify(renamed.head, a)
            if s is not None:
                out.append((renamed, s))
        return out

    def assumable_matches(self, a: Atom, counter: Optional[Iterator[int]] = None) -> List[Tuple[Atom, float, Substitution]]:
        """Every assumable instance ``a`` can be bound to.

        Each entry is ``(instance, prior, unifier)``.  An open atom such as
        ``fire(Fi)`` matches one entry per ground template.  Raises
        :class:`NonGroundAssumption` when an instance would contain variables.
        """
        a_ground = is_ground(a)
        if a_ground:
            prior = self._ground.get(a)
            if prior is not None:
                return [(a, prior, {})]
        counter = counter if counter is not None else _default_counter
        out = []
        for decl in self._open.get(predicate_key(a), ()):
            template = decl.template
            if is_ground(template):
                if a_ground:
                    continue
                s = match_ground(a, template)
            else:
                s = unify(rename_apart([template], counter)[0], a)
            if s is None:
                continue
            instance = apply(s, a)
            if not is_ground(instance):
                raise NonGroundAssumption(
                    f"{a} matches assumable {decl.template} but the instance {instance} is not ground")
            out.append((instance, decl.prior, s))
        return out

    def assumable_match(self, a: Atom) -> Optional[Tuple[Atom, float]]:
        """The ground assumable instance of ``a`` and its prior, if any."""
        matches = self.assumable_matches(a)
        if not matches:
            return None
        if len(matches) > 1:
            raise NonGroundAssumption(f"{a} is open and matches {len(matches)} assumables")
        instance, prior, _ = matches[0]
        return instance, prior

    def is_assumable(self, a: Atom) -> bool:
        try:
            return self.assumable_match(a) is not None
        except NonGroundAssumption:
            return True

    def prior_of(self, h: Atom) -> float:
        """Declared prior of the ground hypothesis ``h``."""
        try:
            m = self.assumable_match(h) if is_ground(h) else None
        except NonGroundAssumption:
            m = None
        if m is None:
            raise UnknownHypothesis(f"{h} is not an assumable instance")
        return m[1]

    def predicates(self) -> List[Key]:
        return list(self.rules)

    def statements(self) -> list:
        """Clauses and declarations, suitable for printing."""
        out: list = []
        for clauses in self.rules.values():
            out.extend(clauses)
        out.extend(self.constraints)
        out.extend(self.assumables)
        return out


def _err(code: str, message: str, line: Optional[int]) -> Diagnostic:
    return Diagnostic("error", code, message, line)


def _uses_false(a: Atom) -> bool:
    return predicate_key(a)[0] == "false"


def build_kb(program: Program) -> KnowledgeBase:
    """Index ``program`` and check its invariants.

    Raises :class:`KBValidationError` carrying every error found.  Warnings
    (duplicate clauses, cyclic predicate dependencies) are kept on the result.
    """
    errors: list = []
    warnings: list = []
    rules: Dict[Key, List[Clause]] = {}
    constraints: List[Clause] = []
    seen_clauses = set()

    for clause in program.clauses:
        if any(_uses_false(b) for b in clause.body):
            errors.append(_err("false-in-body", f"'false' may only head a constraint: {clause}", clause.line))
            continue
        if _uses_false(clause.head) and clause.head != FALSE:
            errors.append(_err("false-in-body", f"'false' is a reserved nullary atom: {clause}", clause.line))
            continue
        shape = canonical([clause.head, *clause.body])
        if shape in seen_clauses:
            warnings.append(Diagnostic("warning", "duplicate-clause", f"duplicate clause dropped: {clause}", clause.line))
            continue
        seen_clauses.add(shape)
        if clause.is_constraint:
            constraints.append(clause)
        else:
            rules.setdefault(predicate_key(clause.head), []).append(clause)

    assumables: List[AssumableDecl] = []
    by_key: Dict[Key, List[AssumableDecl]] = {}
    ground: Dict[Atom, float] = {}
    counter = new_counter()
    for decl in program.assumables:
        if not 0.0 <= decl.prior <= 1.0:
            errors.append(_err("prior-out-of-range", f"prior {decl.prior} of {decl.template} is outside [0, 1]", decl.line))
            continue
        if _uses_false(decl.template):
            errors.append(_err("false-assumable", "'false' cannot be assumable", decl.line))
            continue
        key = predicate_key(decl.template)
        clash = None
        if is_ground(decl.template):
            if decl.template in ground:
                clash = decl.template
        if clash is None:
            renamed = rename_apart([decl.template], counter)[0]
            for other in by_key.get(key, ()):
                if (not is_ground(other.template) or not is_ground(decl.template)) and unify(other.template, renamed) is not None:
                    clash = other.template
                    break
        if clash is not None:
            errors.append(_err("overlapping-assumables", f"assumable {decl.template} overlaps {clash}", decl.line))
            continue
        assumables.append(decl)
        by_key.setdefault(key, []).append(decl)
        if is_ground(decl.template):
            ground[decl.template] = decl.prior

    for key, clauses in rules.items():
        for clause in clauses:
            head = rename_apart([clause.head], counter)[0]
            for decl in by_key.get(key, ()):
                if unify(head, decl.template) is not None:
                    errors.append(_err("head-is-assumable",
                                       f"rule head {clause.head} unifies with assumable {decl.template}", clause.line))
                    break

    if errors:
        raise KBValidationError(errors)

    graph = graphlib.TopologicalSorter()
    for key, clauses in rules.items():
        graph.add(key)
        for clause in clauses:
            for b in clause.body:
                graph.add(key, predicate_key(b))
    try:
        graph.prepare()
    except graphlib.CycleError as exc:
        cycle = " -> ".join(f"{n}/{a}" for n, a in exc.args[1])
        warnings.append(Diagnostic("warning", "cyclic", f"predicate dependencies are cyclic: {cycle}"))

    return KnowledgeBase(
        rules={k: tuple(v) for k, v in rules.items()},
        constraints=tuple(constraints),
        assumables=tuple(assumables),
        warnings=tuple(warnings),
        _ground=ground,
        _open={k: tuple(v) for k, v in by_key.items()},
    )


def load_kb(text: str) -> KnowledgeBase:
    return build_kb(parse_program(text))
