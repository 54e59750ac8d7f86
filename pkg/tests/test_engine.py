import math

import pytest

from pha.engine import (
    EXHAUST,
    Goal,
    Search,
    StepKind,
    StopCriteria,
    Termination,
    explain,
    init_search,
)
from pha.errors import NonGroundQuery
from pha.kb import load_kb
from pha.syntax import parse_query
from pha.terms import atom


def hyp_sets(result):
    return [frozenset(str(h) for h in e.hypotheses) for e in result.explanations]


def test_init_search_seeds(listing_kb):
    s = init_search(listing_kb, parse_query("smoke(yes)"))
    assert s.queue_size == 2
    assert s.bounds() == (0.0, 1.0)
    assert s.p_q == 1.0
    goals = {e.goal for e in s.queue()}
    assert goals == {Goal.USER, Goal.FALSE}


def test_conjunction_seeds_one_entry(listing_kb):
    s = init_search(listing_kb, parse_query("smoke(yes), report(yes)"))
    [user] = [e for e in s.queue() if e.goal is Goal.USER]
    assert user.remaining == parse_query("smoke(yes), report(yes)")


@pytest.mark.parametrize("query", ["smoke(X)", "false"])
def test_query_must_be_ground(listing_kb, query):
    with pytest.raises(NonGroundQuery):
        init_search(listing_kb, parse_query(query))


def test_first_step_uses_smoke_rule(listing_kb):
    s = init_search(listing_kb, parse_query("smoke(yes)"))
    # The false seed wins the tie at prior 1, so drive the user seed first.
    outcomes = []
    while not any(o.entry is not None and o.entry.goal is Goal.USER for o in outcomes):
        outcomes.append(s.step())
    out = outcomes[-1]
    assert out.kind is StepKind.EXPANDED
    [child] = out.children
    assert child.prior == 1.0 and child.hypotheses == frozenset()
    assert [a.functor for a in child.remaining] == ["fire", "c_smoke"]
    assert child.remaining[1].args[0] == atom("yes")


def test_assumption_step_multiplies_priors(listing_kb):
    s = init_search(listing_kb, parse_query("smoke(yes)"))
    target = frozenset({atom("fire", "yes")})
    seen = []

    def watch(search, outcome):
        e = outcome.entry
        if e is not None and e.goal is Goal.USER and e.hypotheses == target and e.remaining:
            seen.append(outcome)

    s.run(on_step=watch)
    [out] = seen
    assert out.entry.remaining == (atom("c_smoke", "yes", "yes"),)
    [child] = out.children
    assert child.remaining == ()
    assert child.hypotheses == {atom("fire", "yes"), atom("c_smoke", "yes", "yes")}
    assert child.prior == pytest.approx(0.009, abs=1e-15)


def test_exhausted_step():
    kb = load_kb("assumable(a, 0.5).")
    s = Search(kb, parse_query("a"))
    kinds = []
    while True:
        out = s.step()
        kinds.append(out.kind)
        if out.kind is StepKind.EXHAUSTED:
            break
    assert kinds.count(StepKind.EXPLANATION) == 1


def test_run_smoke_yes(listing_kb):
    r = explain(listing_kb, parse_query("smoke(yes)"))
    assert hyp_sets(r) == [{"fire(no)", "c_smoke(yes,no)"}, {"fire(yes)", "c_smoke(yes,yes)"}]
    assert [e.prior for e in r.explanations] == pytest.approx([0.0099, 0.009], abs=1e-15)
    assert r.termination is Termination.EXHAUSTED and r.exact
    assert r.lower == r.upper == pytest.approx(0.0189, abs=1e-12)


def test_run_contradiction(listing_kb):
    r = explain(listing_kb, parse_query("smoke(yes), smoke(no)"))
    assert r.explanations == [] and r.exact and r.lower == 0


def test_zero_budget(listing_kb):
    r = explain(listing_kb, parse_query("smoke(yes)"), StopCriteria(max_expansions=0))
    assert r.explanations == []
    assert (r.lower, r.upper) == (0.0, 1.0)
    assert r.termination is Termination.MAX_EXPANSIONS


def test_bounds_hold_every_step(listing_kb):
    s = init_search(listing_kb, parse_query("smoke(yes)"))
    widths = []

    def check(search, _):
        lo, hi = search.bounds()
        assert lo - 1e-12 <= 0.0189 <= hi + 1e-12
        widths.append(hi - lo)

    r = s.run(on_step=check)
    assert r.upper - r.lower < 1e-12
    assert widths[0] >= widths[-1]


def test_max_explanations_and_epsilon(alarm_kb):
    q = parse_query("report(yes)")
    r = explain(alarm_kb, q, StopCriteria(max_explanations=3))
    assert len(r.explanations) == 3 and r.termination is Termination.MAX_EXPLANATIONS
    assert r.lower <= 0.0281261583492 <= r.upper
    r = explain(alarm_kb, q, StopCriteria(epsilon=0.5))
    assert r.termination is Termination.EPSILON
    assert r.upper - r.lower <= 0.5 * r.lower + 1e-15


def test_emission_order_non_increasing(alarm_kb):
    r = explain(alarm_kb, parse_query("report(yes), smoke(no)"))
    priors = [e.prior for e in r.explanations]
    assert priors == sorted(priors, reverse=True)
    assert len(priors) == 16


def test_drain_finds_remaining_nogoods(listing_kb):
    q = parse_query("smoke(yes)")
    plain = explain(listing_kb, q)
    drained = Search(listing_kb, q).run(drain=True)
    assert hyp_sets(plain) == hyp_sets(drained)
    assert len(drained.nogoods) >= len(plain.nogoods)


def test_false_preferred_on_ties():
    # The nogood {a, b} and the explanation {d} share prior 0.25; the
    # superset explanation {a, b} must never be emitted.
    kb = load_kb("""
        g <- a, b.
        g <- d.
        false <- a, b.
        assumable(a, 0.5). assumable(b, 0.5). assumable(d, 0.25).
    """)
    emitted = []
    r = Search(kb, parse_query("g")).run(
        on_step=lambda s, o: emitted.append(o.explanation) if o.kind is StepKind.EXPLANATION else None)
    assert [e.hypotheses for e in emitted] == [{atom("d")}]
    assert r.retracted == 0
    assert [n.hypotheses for n in r.nogoods] == [{atom("a"), atom("b")}]
    assert r.lower == 0.25


def test_add_nogood_retracts():
    kb = load_kb("g <- a. g <- b. assumable(a, 0.6). assumable(b, 0.3).")
    s = Search(kb, parse_query("g"))
    s.run()
    assert s.p_d == pytest.approx(0.9)
    s.add_nogood([atom("a")])
    assert [e.hypotheses for e in s.found] == [{atom("b")}]
    assert s.retracted == 1 and s.p_d == pytest.approx(0.3)


def test_initial_nogoods_prune():
    kb = load_kb("g <- a. g <- b. assumable(a, 0.6). assumable(b, 0.3).")
    r = Search(kb, parse_query("g"), nogoods=[[atom("a")]]).run()
    assert hyp_sets(r) == [{"b"}]


def test_smaller_explanation_retracts_superset():
    # {a, c} and {a} have the same prior, so either may complete first;
    # only the minimal one survives.
    kb = load_kb("""
        g <- a, c.
        g <- a.
        assumable(a, 0.5). assumable(c, 1.0).
    """)
    r = explain(kb, parse_query("g"))
    assert hyp_sets(r) == [{"a"}]
    assert r.lower == 0.5
    assert r.retracted + r.nonminimal == 1


def test_duplicate_proofs_flag_disjointness():
    kb = load_kb("g <- p. g <- q. p <- a. q <- a. assumable(a, 0.4).")
    r = explain(kb, parse_query("g"))
    assert hyp_sets(r) == [{"a"}]
    assert r.duplicates == 1 and r.disjointness_warning


def test_zero_priors_pruned_unless_kept():
    kb = load_kb("g <- a. assumable(a, 0.0).")
    assert explain(kb, parse_query("g")).explanations == []
    kept = explain(kb, parse_query("g"), keep_zero=True)
    assert hyp_sets(kept) == [{"a"}] and kept.explanations[0].prior == 0.0


def test_log_space_agrees(alarm_kb):
    q = parse_query("report(yes)")
    linear = explain(alarm_kb, q)
    logs = explain(alarm_kb, q, log_space=True)
    assert hyp_sets(linear) == hyp_sets(logs)
    for a, b in zip(linear.explanations, logs.explanations):
        assert math.isclose(a.prior, b.prior, rel_tol=1e-12)


def test_log_space_handles_underflow():
    # 400 hypotheses of prior 0.1: the product underflows to 0 in linear space.
    n = 400
    body = ", ".join(f"h{i}" for i in range(n))
    decls = " ".join(f"assumable(h{i}, 0.1)." for i in range(n))
    kb = load_kb(f"g <- {body}. {decls}")
    r = explain(kb, parse_query("g"), log_space=True)
    assert len(r.explanations) == 1
    assert explain(kb, parse_query("g")).explanations == []


def test_cyclic_program_stops_on_budget():
    kb = load_kb("p <- p. p <- a. assumable(a, 0.5).")
    assert kb.cyclic
    r = explain(kb, parse_query("p"), StopCriteria(max_expansions=50))
    assert r.termination is Termination.MAX_EXPANSIONS
    assert r.lower <= 0.5 <= r.upper


def test_open_assumable_atoms_branch():
    kb = load_kb("""
        wet <- rain(W).
        assumable(rain(light), 0.2). assumable(rain(heavy), 0.1).
        false <- rain(light), rain(heavy).
    """)
    r = explain(kb, parse_query("wet"))
    assert hyp_sets(r) == [{"rain(light)"}, {"rain(heavy)"}]
    assert r.lower == pytest.approx(0.3)


def test_exhaust_is_default():
    assert EXHAUST == StopCriteria()
