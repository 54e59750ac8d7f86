"""Brute-force reference computations.

Exponential by design.  Nothing here uses the search engine: network
quantities come from summing the chain-rule product over assignments, and
explanations come from trying every hypothesis subset with a bottom-up
closure over the grounded program.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Set

from .bayesnet import BayesianNetwork
from .errors import ZeroProbabilityObservation
from .syntax import AssumableDecl, Clause, Program
from .terms import FALSE, Atom, Compound, Const, apply, is_ground, variables

Assignment = Mapping[str, str]


def joint_probability(bn: BayesianNetwork, assignment: Assignment) -> float:
    """Product of the cpt entries selected by a total assignment."""
    p = 1.0
    for node in bn.nodes:
        given = tuple(assignment[q] for q in node.parents)
        p *= node.probability(assignment[node.name], given)
    return p


def completions(bn: BayesianNetwork, partial: Assignment):
    free = [n for n in bn.nodes if n.name not in partial]
    for combo in itertools.product(*(n.values for n in free)):
        full = dict(partial)
        full.update(zip((n.name for n in free), combo))
        yield full


def marginal(bn: BayesianNetwork, partial: Assignment) -> float:
    """Sum of the joint over every total extension of ``partial``."""
    for name, value in partial.items():
        if value not in bn[name].values:
            raise ValueError(f"{value!r} is not a value of {name}")
    return math.fsum(joint_probability(bn, a) for a in completions(bn, partial))


def posterior_exact(bn: BayesianNetwork, variable: str, value: str, obs: Assignment) -> float:
    if obs.get(variable, value) != value:
        numerator = 0.0
    else:
        numerator = marginal(bn, {**obs, variable: value})
    denominator = marginal(bn, obs)
    if denominator == 0:
        raise ZeroProbabilityObservation(f"observation {dict(obs)} has probability zero")
    return numerator / denominator


def map_assignment(bn: BayesianNetwork, obs: Assignment):
    """Most probable total assignment extending ``obs`` and its probability."""
    best, best_p = None, -1.0
    for a in completions(bn, obs):
        p = joint_probability(bn, a)
        if p > best_p:
            best, best_p = a, p
    return best, best_p


# -- explanations by exhaustive subset search ----------------------------------


@dataclass
class GroundProgram:
    rules: List[tuple]  # (head, body atoms)
    assumables: Dict[Atom, float]


def _constants(program: Program, extra: Iterable[Atom]) -> List[Const]:
    found: Set[Const] = set()

    def visit(t):
        if isinstance(t, Compound):
            for arg in t.args:
                visit(arg)
        elif isinstance(t, Const):
            found.add(t)

    atoms = list(extra)
    for s in program.statements:
        atoms.extend([s.head, *s.body] if isinstance(s, Clause) else [s.template])
    for a in atoms:
        if isinstance(a, Compound):
            visit(a)
    return sorted(found, key=lambda c: c.name)


def _instances(terms: Sequence, constants: Sequence[Const]):
    vs = sorted({v for t in terms for v in variables(t)}, key=lambda v: v.name)
    for combo in itertools.product(constants, repeat=len(vs)):
        s = dict(zip(vs, combo))
        yield [apply(s, t) for t in terms]


def ground_program(program: Program, extra: Iterable[Atom] = ()) -> GroundProgram:
    """Instantiate every variable over the constants of the program."""
    constants = _constants(program, extra)
    rules = []
    assumables: Dict[Atom, float] = {}
    for s in program.statements:
        if isinstance(s, Clause):
            for head, *body in _instances([s.head, *s.body], constants):
                rules.append((head, tuple(body)))
        else:
            assert isinstance(s, AssumableDecl)
            for (inst,) in _instances([s.template], constants):
                assumables[inst] = s.prior
    return GroundProgram(rules, assumables)


def closure(ground: GroundProgram, facts: Iterable[Atom]) -> Set[Atom]:
    """Everything derivable from ``facts`` with the ground rules."""
    derived = set(facts)
    changed = True
    while changed:
        changed = False
        for head, body in ground.rules:
            if head not in derived and all(b in derived for b in body):
                derived.add(head)
                changed = True
    return derived


def relevant_assumables(ground: GroundProgram, goal: Sequence[Atom]) -> List[Atom]:
    """Assumables that occur in some ground proof tree of a goal atom."""
    reach = set(goal)
    frontier = list(goal)
    by_head: Dict[Atom, list] = {}
    for head, body in ground.rules:
        by_head.setdefault(head, []).append(body)
    while frontier:
        a = frontier.pop()
        for body in by_head.get(a, ()):
            for b in body:
                if b not in reach:
                    reach.add(b)
                    frontier.append(b)
    return sorted((h for h in ground.assumables if h in reach), key=str)


@dataclass
class Enumeration:
    explanations: List[FrozenSet[Atom]]
    priors: List[float]
    complete: bool


def enumerate_explanations(program: Program, goal: Sequence[Atom], hypothesis_budget: int) -> Enumeration:
    """All minimal consistent hypothesis sets of size <= budget entailing ``goal``.

    ``complete`` is True when every set of the maximum size explains the
    goal, is inconsistent or contains an explanation, which rules out larger
    minimal explanations.  False only means they were not ruled out.
    """
    goal = tuple(goal)
    if not all(is_ground(a) for a in goal):
        raise ValueError("goal must be ground")
    ground = ground_program(program, goal)
    candidates = relevant_assumables(ground, goal)
    found: List[FrozenSet[Atom]] = []
    nogoods: List[FrozenSet[Atom]] = []
    complete = True
    for size in range(0, min(hypothesis_budget, len(candidates)) + 1):
        open_at_size = False
        for combo in itertools.combinations(candidates, size):
            d = frozenset(combo)
            if any(n <= d for n in nogoods) or any(e <= d for e in found):
                continue
            derived = closure(ground, d)
            if FALSE in derived:
                nogoods.append(d)
            elif all(a in derived for a in goal):
                found.append(d)
            else:
                open_at_size = True
        if size == hypothesis_budget and open_at_size and size < len(candidates):
            complete = False
    priors = [math.prod(ground.assumables[h] for h in d) for d in found]
    return Enumeration(found, priors, complete)
