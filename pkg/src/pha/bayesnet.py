"""Discrete Bayesian networks and their translation into ``.pha`` programs.

Network files are JSON::

    {"variables": [
        {"name": "fire", "values": ["yes", "no"], "parents": [],
         "cpt": [{"given": [], "probabilities": [0.01, 0.99]}]},
        {"name": "smoke", "values": ["yes", "no"], "parents": ["fire"],
         "cpt": [{"given": ["yes"], "probabilities": [0.9, 0.1]},
                 {"given": ["no"], "probabilities": [0.01, 0.99]}]}]}

Each cpt row gives the parent values (in ``parents`` order) and a
distribution over ``values``.  Numbers keep their written form, so ``0.50``
in the file is emitted as ``0.50``.
"""

from __future__ import annotations

import graphlib
import itertools
import json
import random
from dataclasses import dataclass, field
from decimal import Decimal
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import BNValidationError, Diagnostic
from .syntax import IDENT_RE, AssumableDecl, Clause, Program, format_probability, format_program
from .terms import FALSE, Compound, Const, Var

Number = Union[float, Decimal]
ROW_SUM_TOLERANCE = 1e-6
RESERVED_NAMES = {"false", "assumable"}


@dataclass(frozen=True)
class Node:
    name: str
    values: Tuple[str, ...]
    parents: Tuple[str, ...]
    # parent-value tuple -> probabilities in ``values`` order
    cpt: Dict[Tuple[str, ...], Tuple[Number, ...]]

    def probability(self, value: str, given: Tuple[str, ...]) -> float:
        return float(self.cpt[given][self.values.index(value)])


@dataclass(frozen=True)
class BayesianNetwork:
    nodes: Tuple[Node, ...]

    @cached_property
    def _by_name(self) -> Dict[str, Node]:
        return {n.name: n for n in self.nodes}

    def __getitem__(self, name: str) -> Node:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def names(self) -> List[str]:
        return [n.name for n in self.nodes]

    def domains(self) -> Dict[str, List[str]]:
        return {n.name: list(n.values) for n in self.nodes}

    def children(self, name: str) -> List[str]:
        return [n.name for n in self.nodes if name in n.parents]

    def topological_order(self) -> List[str]:
        ts = graphlib.TopologicalSorter({n.name: n.parents for n in self.nodes})
        return list(ts.static_order())

    def size_bits(self) -> float:
        """Size measured in binary-equivalent variables."""
        import math
        return sum(math.log2(len(n.values)) for n in self.nodes)

    def to_dict(self) -> dict:
        return {"variables": [
            {"name": n.name, "values": list(n.values), "parents": list(n.parents),
             "cpt": [{"given": list(g), "probabilities": [_json_number(p) for p in row]}
                     for g, row in n.cpt.items()]}
            for n in self.nodes]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _json_number(p: Number):
    return float(p) if isinstance(p, Decimal) else p


def depth(bn: BayesianNetwork, name: str) -> int:
    """Length of the longest directed path into ``name``."""
    memo: Dict[str, int] = {}

    def go(v: str) -> int:
        if v not in memo:
            parents = bn[v].parents
            memo[v] = 0 if not parents else 1 + max(go(p) for p in parents)
        return memo[v]

    return go(name)


def terminals(bn: BayesianNetwork) -> List[str]:
    """Variables that influence no other variable."""
    has_child = {p for n in bn.nodes for p in n.parents}
    return [n.name for n in bn.nodes if n.name not in has_child]


# -- reading ---------------------------------------------------------------

class _Collector:
    def __init__(self):
        self.errors: List[Diagnostic] = []

    def error(self, path: str, code: str, message: str) -> None:
        self.errors.append(Diagnostic("error", code, message, path=path))


def _is_number(x) -> bool:
    return isinstance(x, (int, float, Decimal)) and not isinstance(x, bool)


def parse_bn(text: str) -> BayesianNetwork:
    """Read and validate a JSON network description.

    Raises :class:`BNValidationError` with one located diagnostic per problem.
    """
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise BNValidationError([Diagnostic("error", "json", exc.msg, exc.lineno, exc.colno)]) from None
    return network_from_dict(data)


def network_from_dict(data) -> BayesianNetwork:
    c = _Collector()
    if not isinstance(data, dict) or not isinstance(data.get("variables"), list):
        c.error("$", "format", "expected an object with a 'variables' list")
        raise BNValidationError(c.errors)

    raw = []
    names = set()
    for i, var in enumerate(data["variables"]):
        path = f"variables[{i}]"
        if not isinstance(var, dict):
            c.error(path, "format", "variable entry must be an object")
            continue
        name = var.get("name")
        values = var.get("values")
        parents = var.get("parents", [])
        cpt = var.get("cpt")
        if not isinstance(name, str) or not IDENT_RE.match(name) or name in RESERVED_NAMES:
            c.error(f"{path}.name", "bad-name", f"variable name {name!r} is not a valid identifier")
            continue
        if name in names:
            c.error(f"{path}.name", "duplicate-variable", f"variable {name!r} defined twice")
            continue
        names.add(name)
        if not isinstance(values, list) or len(values) < 2:
            c.error(f"{path}.values", "bad-values", f"{name}: needs a list of at least two values")
            continue
        bad = [v for v in values if not isinstance(v, str) or not IDENT_RE.match(v)]
        if bad:
            c.error(f"{path}.values", "bad-name", f"{name}: values {bad!r} are not valid identifiers")
            continue
        if len(set(values)) != len(values):
            c.error(f"{path}.values", "duplicate-value", f"{name}: duplicate values")
            continue
        if not isinstance(parents, list) or not all(isinstance(p, str) for p in parents):
            c.error(f"{path}.parents", "format", f"{name}: parents must be a list of names")
            continue
        if len(set(parents)) != len(parents):
            c.error(f"{path}.parents", "duplicate-parent", f"{name}: a parent is listed twice")
            continue
        if not isinstance(cpt, list):
            c.error(f"{path}.cpt", "format", f"{name}: cpt must be a list of rows")
            continue
        raw.append((path, name, tuple(values), tuple(parents), cpt))

    domains = {name: values for _, name, values, _, _ in raw}
    for path, name, _, parents, _ in raw:
        for j, p in enumerate(parents):
            if p not in names:
                c.error(f"{path}.parents[{j}]", "unknown-parent", f"{name}: unknown parent {p!r}")
    if c.errors:
        raise BNValidationError(c.errors)

    try:
        graphlib.TopologicalSorter({name: parents for _, name, _, parents, _ in raw}).prepare()
    except graphlib.CycleError as exc:
        cycle = " -> ".join(exc.args[1])
        c.error("variables", "cycle", f"parent graph has a cycle: {cycle}")
        raise BNValidationError(c.errors) from None

    nodes = []
    for path, name, values, parents, cpt in raw:
        table: Dict[Tuple[str, ...], Tuple[Number, ...]] = {}
        for k, row in enumerate(cpt):
            rpath = f"{path}.cpt[{k}]"
            if not isinstance(row, dict):
                c.error(rpath, "format", f"{name}: cpt row must be an object")
                continue
            given = row.get("given", [])
            probs = row.get("probabilities")
            if not isinstance(given, list) or len(given) != len(parents):
                c.error(f"{rpath}.given", "bad-given", f"{name}: 'given' must list one value per parent")
                continue
            wrong = [(p, g) for p, g in zip(parents, given) if g not in domains[p]]
            if wrong:
                p, g = wrong[0]
                c.error(f"{rpath}.given", "bad-value", f"{name}: {g!r} is not a value of {p}")
                continue
            given = tuple(given)
            if given in table:
                c.error(f"{rpath}.given", "duplicate-row", f"{name}: duplicate cpt row for {list(given)}")
                continue
            if not isinstance(probs, list) or len(probs) != len(values) or not all(_is_number(p) for p in probs):
                c.error(f"{rpath}.probabilities", "bad-row", f"{name}: expected {len(values)} probabilities")
                continue
            if any(p < 0 or p > 1 for p in probs):
                c.error(f"{rpath}.probabilities", "out-of-range", f"{name}: probabilities must lie in [0, 1]")
                continue
            total = sum(float(p) for p in probs)
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                c.error(f"{rpath}.probabilities", "row-sum", f"{name}: row for {list(given)} sums to {total:g}")
                continue
            table[given] = tuple(probs)
        for combo in itertools.product(*(domains[p] for p in parents)):
            if combo not in table and not any(d.path and d.path.startswith(f"{path}.cpt") for d in c.errors):
                c.error(f"{path}.cpt", "missing-row", f"{name}: no cpt row for {list(combo)}")
        nodes.append(Node(name, values, parents, table))

    if c.errors:
        raise BNValidationError(c.errors)
    return BayesianNetwork(tuple(nodes))


def load_bn(path: str) -> BayesianNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_bn(fh.read())


# -- compiling ---------------------------------------------------------------

@dataclass
class CompiledProgram:
    program: Program
    # statement index -> (variable, parent values of the cpt row or None)
    provenance: Dict[int, Tuple[str, Optional[Tuple[str, ...]]]] = field(default_factory=dict)
    domains: Dict[str, List[str]] = field(default_factory=dict)

    def text(self) -> str:
        return format_program(self.program)


def c_predicate(name: str) -> str:
    return f"c_{name}"


def _variable_names(bn: BayesianNetwork, node: Node) -> List[Var]:
    """Readable rule variables: ``Sm`` for smoke, ``Fi`` for fire..."""
    used: set = set()
    out = []
    for name in (node.name, *node.parents):
        stem = "".join(ch for ch in name if ch.isalnum())[:2] or "V"
        stem = stem[0].upper() + stem[1:]
        if not stem[0].isalpha():
            stem = "V" + stem
        candidate, k = stem, 1
        while candidate in used:
            k += 1
            candidate = f"{stem}{k}"
        used.add(candidate)
        out.append(Var(candidate))
    return out


def _decl(template, p: Number) -> AssumableDecl:
    return AssumableDecl(template, float(p), literal=format_probability(p))


def compile_bn(bn: BayesianNetwork, *, both_orders: bool = False, c_constraints: bool = False) -> CompiledProgram:
    """Translate ``bn`` into rules, exclusivity constraints and assumables.

    For every variable ``a`` with parents ``b1..bm`` this emits the rule
    ``a(V) <- b1(V1), ..., bm(Vm), c_a(V, V1, ..., Vm)`` and one
    ``assumable(c_a(v, v1, ..., vm), p)`` per cpt entry; roots are assumable
    directly.  Every pair of distinct values gets ``false <- a(v), a(w)``
    (both orders with ``both_orders``).  ``c_constraints`` adds direct
    constraints between c-hypotheses of the same parent context.
    """
    out = CompiledProgram(Program(), domains=bn.domains())
    statements = out.program.statements

    def emit(statement, origin) -> None:
        out.provenance[len(statements)] = origin
        statements.append(statement)

    for node in bn.nodes:
        value_atoms = [Compound(node.name, (Const(v),)) for v in node.values]
        pairs = (itertools.permutations(value_atoms, 2) if both_orders
                 else itertools.combinations(value_atoms, 2))
        constraints = [Clause(FALSE, (x, y)) for x, y in pairs]

        if not node.parents:
            for value, p in zip(value_atoms, node.cpt[()]):
                emit(_decl(value, p), (node.name, ()))
            for clause in constraints:
                emit(clause, (node.name, None))
            continue

        own, *parent_vars = _variable_names(bn, node)
        body = [Compound(p, (v,)) for p, v in zip(node.parents, parent_vars)]
        body.append(Compound(c_predicate(node.name), (own, *parent_vars)))
        emit(Clause(Compound(node.name, (own,)), tuple(body)), (node.name, None))
        for clause in constraints:
            emit(clause, (node.name, None))
        for given, row in node.cpt.items():
            ctx = tuple(Const(g) for g in given)
            for value, p in zip(node.values, row):
                emit(_decl(Compound(c_predicate(node.name), (Const(value), *ctx)), p), (node.name, given))
            if c_constraints:
                cs = [Compound(c_predicate(node.name), (Const(v), *ctx)) for v in node.values]
                for x, y in itertools.combinations(cs, 2):
                    emit(Clause(FALSE, (x, y)), (node.name, given))
    return out


# -- random networks ---------------------------------------------------------

def random_network(seed: int, *, n_vars: Tuple[int, int] = (3, 5), n_values: Tuple[int, int] = (2, 3),
                   max_parents: int = 2) -> BayesianNetwork:
    """A random network; variables are ``x0, x1, ...`` in topological order.

    Cpt rows are uniform draws normalised to sum to one.
    """
    rng = random.Random(seed)
    count = rng.randint(*n_vars)
    nodes = []
    for i in range(count):
        k = rng.randint(*n_values)
        values = tuple(f"v{j}" for j in range(k))
        parents = tuple(f"x{j}" for j in sorted(rng.sample(range(i), rng.randint(0, min(i, max_parents)))))
        domains = [nodes[int(p[1:])].values for p in parents]
        cpt = {}
        for combo in itertools.product(*domains):
            weights = [rng.uniform(0.05, 1.0) for _ in values]
            total = sum(weights)
            row = [w / total for w in weights]
            row[-1] = 1.0 - sum(row[:-1])
            cpt[tuple(combo)] = tuple(row)
        nodes.append(Node(f"x{i}", values, parents, cpt))
    return BayesianNetwork(tuple(nodes))
