import json

import pytest

from pha.bayesnet import compile_bn, depth, network_from_dict, parse_bn, random_network, terminals
from pha.errors import BNValidationError
from pha.kb import build_kb
from pha.syntax import AssumableDecl, Clause, format_program, parse_program


def net(*variables):
    return network_from_dict({"variables": list(variables)})


def root(name, values, probs):
    return {"name": name, "values": values, "parents": [], "cpt": [{"given": [], "probabilities": probs}]}


def codes(text):
    with pytest.raises(BNValidationError) as info:
        parse_bn(text)
    return [d.code for d in info.value.diagnostics]


def test_smoke_alarm_shape(alarm_bn):
    assert alarm_bn.names == ["fire", "smoke", "tampering", "alarm", "leaving", "report"]
    assert all(n.values == ("yes", "no") for n in alarm_bn.nodes)
    assert alarm_bn["alarm"].parents == ("fire", "tampering")
    assert alarm_bn.size_bits() == 6


def test_depth_and_terminals(alarm_bn):
    assert depth(alarm_bn, "fire") == 0
    assert depth(alarm_bn, "smoke") == 1
    assert depth(alarm_bn, "report") == 3
    assert terminals(alarm_bn) == ["smoke", "report"]
    assert terminals(net(root("x", ["a", "b"], [0.3, 0.7]))) == ["x"]


def test_chain_terminal():
    chain = net(
        root("a", ["t", "f"], [0.5, 0.5]),
        {"name": "b", "values": ["t", "f"], "parents": ["a"],
         "cpt": [{"given": ["t"], "probabilities": [0.1, 0.9]}, {"given": ["f"], "probabilities": [0.2, 0.8]}]},
        {"name": "c", "values": ["t", "f"], "parents": ["b"],
         "cpt": [{"given": ["t"], "probabilities": [0.1, 0.9]}, {"given": ["f"], "probabilities": [0.2, 0.8]}]},
    )
    assert terminals(chain) == ["c"]
    assert chain.topological_order() == ["a", "b", "c"]


def test_self_parent_is_a_cycle():
    doc = {"variables": [{"name": "alarm", "values": ["yes", "no"], "parents": ["alarm"],
                          "cpt": [{"given": ["yes"], "probabilities": [0.5, 0.5]},
                                  {"given": ["no"], "probabilities": [0.5, 0.5]}]}]}
    assert codes(json.dumps(doc)) == ["cycle"]


def test_row_sum():
    assert codes(json.dumps({"variables": [root("x", ["a", "b"], [0.6, 0.6])]})) == ["row-sum"]


@pytest.mark.parametrize("variable, code", [
    (root("X", ["a", "b"], [0.5, 0.5]), "bad-name"),
    (root("x", ["a"], [1.0]), "bad-values"),
    (root("x", ["a", "a"], [0.5, 0.5]), "duplicate-value"),
    (root("x", ["a", "b"], [1.5, -0.5]), "out-of-range"),
    (root("x", ["a", "b"], [0.5]), "bad-row"),
    ({"name": "x", "values": ["a", "b"], "parents": ["y"], "cpt": []}, "unknown-parent"),
])
def test_validation_codes(variable, code):
    assert code in codes(json.dumps({"variables": [variable]}))


def test_missing_row_is_located():
    doc = {"variables": [root("r", ["t", "f"], [0.5, 0.5]),
                         {"name": "x", "values": ["a", "b"], "parents": ["r"],
                          "cpt": [{"given": ["t"], "probabilities": [0.5, 0.5]}]}]}
    with pytest.raises(BNValidationError) as info:
        parse_bn(json.dumps(doc))
    [d] = info.value.diagnostics
    assert d.code == "missing-row" and d.path.startswith("variables[1]")


def test_bad_json():
    assert codes("{not json") == ["json"]


def test_compile_single_root():
    compiled = compile_bn(net(root("x", ["a", "b"], [0.3, 0.7])))
    assert compiled.text() == "assumable(x(a), 0.3).\nassumable(x(b), 0.7).\nfalse <- x(a), x(b).\n"
    assert compiled.domains == {"x": ["a", "b"]}


def test_three_values_give_three_constraints():
    compiled = compile_bn(net(root("x", ["a", "b", "c"], [0.2, 0.3, 0.5])))
    assert len([s for s in compiled.program.clauses if s.is_constraint]) == 3
    exact = compile_bn(net(root("x", ["a", "b", "c"], [0.2, 0.3, 0.5])), both_orders=True)
    assert len(exact.program.clauses) == 6


def test_compile_smoke_alarm_counts(alarm_compiled):
    prog = alarm_compiled.program
    assert len(prog.assumables) == 24
    rules = [c for c in prog.clauses if not c.is_constraint]
    assert [r.head.functor for r in rules] == ["smoke", "alarm", "leaving", "report"]
    assert len([c for c in prog.clauses if c.is_constraint]) == 6
    assert "assumable(c_alarm(yes,yes,yes), 0.50)." in alarm_compiled.text()


def test_provenance(alarm_compiled):
    prog = alarm_compiled.program
    for i, s in enumerate(prog.statements):
        name, given = alarm_compiled.provenance[i]
        if isinstance(s, AssumableDecl):
            assert given is not None
        if isinstance(s, Clause) and not s.is_constraint:
            assert s.head.functor == name


def test_c_constraints_option(alarm_bn):
    plain = compile_bn(alarm_bn)
    extra = compile_bn(alarm_bn, c_constraints=True)
    # one constraint per non-root cpt row
    assert len(extra.program.clauses) - len(plain.program.clauses) == 2 + 4 + 2 + 2


def test_compiled_text_reparses(alarm_compiled):
    again = parse_program(alarm_compiled.text())
    assert again.statements == alarm_compiled.program.statements
    build_kb(again)


@pytest.mark.parametrize("seed", range(20))
def test_random_networks_are_valid(seed):
    bn = random_network(seed)
    assert 3 <= len(bn.nodes) <= 5
    for node in bn.nodes:
        assert 2 <= len(node.values) <= 3 and len(node.parents) <= 2
        for row in node.cpt.values():
            assert abs(sum(row) - 1) < 1e-12 and min(row) > 0
    # survives a JSON round trip through the validator
    assert parse_bn(bn.dumps()).domains() == bn.domains()


def test_random_network_is_reproducible():
    assert random_network(7) == random_network(7)
    assert format_program(compile_bn(random_network(7)).program) == format_program(compile_bn(random_network(7)).program)
