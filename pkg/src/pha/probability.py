"""Probabilities from explanations: priors, masses and posteriors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from .engine import EXHAUST, Explanation, Search, SearchResult, StopCriteria
from .errors import UndefinedPosterior
from .kb import KnowledgeBase
from .terms import Atom, Compound, Const, is_ground


def explanation_prior(kb: KnowledgeBase, hypotheses: Iterable[Atom]) -> float:
    """Product of the declared priors; raises UnknownHypothesis."""
    return math.prod(kb.prior_of(h) for h in hypotheses)


@dataclass
class MassResult:
    query: tuple
    lower: float
    upper: float
    explanations: List[Explanation]
    exact: bool
    search: Optional[SearchResult] = field(default=None, repr=False)

    @property
    def value(self) -> float:
        if not self.exact:
            raise ValueError("mass is only bounded; search was stopped early")
        return self.lower


def mass(kb: KnowledgeBase, query: Sequence[Atom], stop: StopCriteria = EXHAUST, **options) -> MassResult:
    """Sum of the priors of the minimal explanations of ``query``.

    When ``stop`` ends the search early the result is an interval.
    """
    result = Search(kb, query, **options).run(stop)
    return MassResult(tuple(query), result.lower, result.upper, result.explanations, result.exact, result)


@dataclass
class PosteriorResult:
    atom: Atom
    observation: tuple
    lower: float
    upper: float
    numerator: MassResult
    denominator: MassResult

    @property
    def exact(self) -> bool:
        return self.numerator.exact and self.denominator.exact

    @property
    def value(self) -> float:
        if not self.exact:
            raise ValueError("posterior is only bounded; search was stopped early")
        return self.lower


def _ratio(atom: Atom, obs: tuple, num: MassResult, den: MassResult) -> PosteriorResult:
    if num.exact and den.exact:
        lower = upper = min(1.0, num.lower / den.lower)
    else:
        lower = min(1.0, num.lower / den.upper)
        upper = 1.0 if den.lower == 0 else min(1.0, num.upper / den.lower)
    return PosteriorResult(atom, obs, lower, upper, num, den)


def _conj(atoms: Sequence[Atom]) -> str:
    return ", ".join(str(a) for a in atoms) or "true"


def posterior(kb: KnowledgeBase, atom: Atom, obs: Sequence[Atom] = (), stop: StopCriteria = EXHAUST,
              **options) -> PosteriorResult:
    """``M(obs & atom) / M(obs)``, as an interval when the searches are cut short.

    Raises :class:`UndefinedPosterior` when the observation has no mass.
    """
    obs = tuple(obs)
    den = mass(kb, obs, stop, **options)
    return _posterior_given(kb, atom, obs, den, stop, options)


def _posterior_given(kb, atom, obs, den, stop, options) -> PosteriorResult:
    if den.upper == 0 or (den.exact and den.lower == 0):
        raise UndefinedPosterior(f"observation {_conj(obs)} has zero mass")
    num = mass(kb, obs + (atom,), stop, **options)
    return _ratio(atom, obs, num, den)


def value_domain(kb: KnowledgeBase, name: str) -> List[str]:
    """Values of a unary predicate, as found in the knowledge base.

    Looks at ground assumables ``name(v)``, ground rule heads ``name(v)``
    and the first argument of ``c_name`` assumables, in that order.
    """
    def first_args(atoms, functor, arity=None) -> List[str]:
        out: List[str] = []
        for a in atoms:
            if (isinstance(a, Compound) and a.functor == functor and (arity is None or len(a.args) == arity)
                    and isinstance(a.args[0], Const) and a.args[0].name not in out):
                out.append(a.args[0].name)
        return out

    templates = [d.template for d in kb.assumables]
    values = first_args(templates, name, 1)
    if not values:
        heads = [c.head for c in kb.rules.get((name, 1), ()) if is_ground(c.head)]
        values = first_args(heads, name, 1)
    if not values:
        values = first_args(templates, f"c_{name}")
    return values


def distribution(kb: KnowledgeBase, name: str, obs: Sequence[Atom] = (), stop: StopCriteria = EXHAUST,
                 values: Optional[Sequence[str]] = None, **options) -> Dict[str, PosteriorResult]:
    """Posterior of every value of the variable ``name`` given ``obs``.

    The observation mass is computed once and shared by every value.
    """
    obs = tuple(obs)
    if values is None:
        values = value_domain(kb, name)
    if not values:
        raise ValueError(f"no values known for {name!r}")
    den = mass(kb, obs, stop, **options)
    return {v: _posterior_given(kb, Compound(name, (Const(v),)), obs, den, stop, options) for v in values}
