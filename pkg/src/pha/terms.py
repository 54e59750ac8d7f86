"""Logic terms, unification and substitution.

Terms are immutable values.  A substitution is a plain ``dict`` mapping
:class:`Var` to :class:`Term`; :func:`unify` always returns one in resolved
(idempotent) form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Optional, Union


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple
    ground: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.args:
            raise ValueError(f"compound {self.functor!r} needs at least one argument")
        object.__setattr__(self, "ground", all(
            isinstance(a, Const) or (isinstance(a, Compound) and a.ground) for a in self.args))

    def __str__(self) -> str:
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


Term = Union[Var, Const, Compound]
Atom = Union[Const, Compound]
Substitution = Dict[Var, Term]

FALSE = Const("false")


def atom(functor: str, *args: Union[Term, str]) -> Atom:
    """Build an atom; string arguments become variables when capitalised.

    >>> str(atom("c_smoke", "yes", "Fi"))
    'c_smoke(yes,Fi)'
    """
    if not args:
        return Const(functor)
    return Compound(functor, tuple(_coerce(a) for a in args))


def _coerce(x: Union[Term, str]) -> Term:
    if not isinstance(x, str):
        return x
    if x[:1].isupper() or x[:1] == "_":
        return Var(x)
    return Const(x)


def predicate_key(a: Atom) -> tuple[str, int]:
    if isinstance(a, Compound):
        return a.functor, len(a.args)
    if isinstance(a, Const):
        return a.name, 0
    raise TypeError(f"not an atom: {a}")


def variables(t: Term) -> Iterator[Var]:
    """Yield the variables of ``t`` left to right (with repeats)."""
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Compound):
        for arg in t.args:
            yield from variables(arg)


def is_ground(t: Term) -> bool:
    if isinstance(t, Compound):
        return t.ground
    return not isinstance(t, Var)


def apply(s: Substitution, t: Term) -> Term:
    if not s:
        return t
    if isinstance(t, Var):
        return s.get(t, t)
    if isinstance(t, Compound) and not t.ground:
        return Compound(t.functor, tuple(apply(s, arg) for arg in t.args))
    return t


def match_ground(pattern: Term, ground: Term, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """One-way match of ``pattern`` against a ground term, or None."""
    s: Substitution = dict(subst) if subst else {}
    stack = [(pattern, ground)]
    while stack:
        p, g = stack.pop()
        if isinstance(p, Var):
            bound = s.get(p)
            if bound is None:
                s[p] = g
            elif bound != g:
                return None
        elif isinstance(p, Compound):
            if not (isinstance(g, Compound) and p.functor == g.functor and len(p.args) == len(g.args)):
                return None
            if p.ground:
                if p != g:
                    return None
            else:
                stack.extend(zip(p.args, g.args))
        elif p != g:
            return None
    return s


def _walk(t: Term, s: Substitution) -> Term:
    while isinstance(t, Var) and t in s:
        t = s[t]
    return t


def _resolve(t: Term, s: Substitution) -> Term:
    t = _walk(t, s)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_resolve(arg, s) for arg in t.args))
    return t


def _occurs(v: Var, t: Term, s: Substitution) -> bool:
    t = _walk(t, s)
    if t == v:
        return True
    if isinstance(t, Compound):
        return any(_occurs(v, arg, s) for arg in t.args)
    return False


def unify(t1: Term, t2: Term, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Most general unifier of ``t1`` and ``t2`` (extending ``subst``), or None.

    The occurs check is always performed.
    """
    s: Substitution = dict(subst) if subst else {}
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = _walk(a, s)
        b = _walk(b, s)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs(a, b, s):
                return None
            s[a] = b
        elif isinstance(b, Var):
            if _occurs(b, a, s):
                return None
            s[b] = a
        elif (
            isinstance(a, Compound)
            and isinstance(b, Compound)
            and a.functor == b.functor
            and len(a.args) == len(b.args)
        ):
            stack.extend(zip(a.args, b.args))
        else:
            return None
    return {v: _resolve(t, s) for v, t in s.items()}


def compose(s1: Substitution, s2: Substitution) -> Substitution:
    """The substitution equivalent to applying ``s1`` then ``s2``."""
    out = {v: apply(s2, t) for v, t in s1.items()}
    for v, t in s2.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if t != v}


def fresh_name(v: Var, n: int) -> Var:
    # '#' cannot occur in parsed variable names, so renamed variables never
    # collide with user variables.
    base = v.name.split("#", 1)[0]
    return Var(f"{base}#{n}")


def rename_apart(terms: Iterable[Term], counter: Iterator[int]) -> list:
    """Consistently replace every variable in ``terms`` by a fresh one."""
    terms = list(terms)
    mapping: Substitution = {}
    for t in terms:
        for v in variables(t):
            if v not in mapping:
                mapping[v] = fresh_name(v, next(counter))
    return [apply(mapping, t) for t in terms]


def canonical(terms: Iterable[Term]) -> tuple:
    """Rename variables to ``_0, _1, ...`` by first occurrence.

    Two term sequences are equal up to variable renaming iff their canonical
    forms are equal.
    """
    terms = list(terms)
    mapping: Substitution = {}
    for t in terms:
        for v in variables(t):
            if v not in mapping:
                mapping[v] = Var(f"_{len(mapping)}")
    return tuple(apply(mapping, t) for t in terms)


def new_counter() -> Iterator[int]:
    return itertools.count(1)
