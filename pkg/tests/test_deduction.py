import json
from itertools import product

import pytest

from quantal.coevents import Coevent, check_rules, evaluate
from quantal.deduction import (
    CLASSICAL,
    MULTIPLICATIVE,
    EventIdentity,
    Judgment,
    Proof,
    Rule,
    Status,
    Step,
    check_proof,
    check_step,
    load_proof,
    proof_from_dict,
    semantic_crosscheck,
)
from quantal.errors import ProofError
from quantal.events import make_space
from quantal.measure import MeasureSpec, enumerate_precluded


@pytest.fixture
def slit_proof():
    return load_proof("appendix_3slit")


def one_step(space, cited, concl, rules, identity=None):
    premises = tuple(cited)
    step = Step(concl, tuple(rules), tuple(("p", i) for i in range(len(cited))), identity)
    return Proof(space, premises, (step,), concl)


def test_slit_proof_classical(slit_proof):
    verdict = check_proof(slit_proof, CLASSICAL)
    assert verdict.proven
    assert str(verdict) == "Proven"


def test_slit_proof_multiplicative(slit_proof):
    verdict = check_proof(slit_proof, MULTIPLICATIVE)
    assert not verdict.proven
    assert verdict.blocked_at == 3
    assert verdict.step_verdict.status is Status.RULE_INADMISSIBLE
    assert str(verdict) == "BlockedAt step 3: Negation inadmissible"


def test_slit_proof_step_verdicts(slit_proof):
    assert check_step(slit_proof, 1, CLASSICAL).valid
    assert check_step(slit_proof, 3, MULTIPLICATIVE).status is Status.RULE_INADMISSIBLE
    assert all(check_step(slit_proof, i, MULTIPLICATIVE).valid for i in (0, 1, 2, 4, 5))


def test_slit_proof_rule_inventory(slit_proof):
    used = {r for s in slit_proof.steps for r in s.rules}
    assert used == set(Rule)
    assert slit_proof.steps[1].rules == (Rule.CONJUNCTION, Rule.TOTALITY)
    assert slit_proof.steps[3].rules == (Rule.NEGATION,)
    assert slit_proof.steps[4].rules == (Rule.MONOTONICITY,)


def test_monotonicity_side_condition(ev, slit_space):
    proof = one_step(slit_space, [Judgment(ev("AB"), 1)], Judgment(ev("C"), 1), [Rule.MONOTONICITY])
    assert check_step(proof, 0, CLASSICAL).status is Status.MALFORMED


def test_false_identity_is_malformed(ev, slit_space):
    bad = EventIdentity(ev("B"), "complement", (ev("AB"),))
    proof = one_step(slit_space, [Judgment(ev("AB"), 0)], Judgment(ev("C"), 1), [Rule.NEGATION], bad)
    assert check_step(proof, 0, CLASSICAL).status is Status.MALFORMED


def test_identity_arity(ev):
    with pytest.raises(ProofError):
        EventIdentity(ev("C"), "complement", (ev("A"), ev("B"))).holds()
    assert EventIdentity(ev("ABC"), "implies", (ev("A"), ev("AC"))).holds()


def test_empty_proof_goal_is_premise(ev, slit_space):
    j = Judgment(ev("AB"), 0)
    assert check_proof(Proof(slit_space, (j,), (), j), MULTIPLICATIVE).proven


def test_goal_under_open_supposition_not_proven(ev, slit_space):
    j = Judgment(ev("A"), 1)
    proof = Proof(slit_space, (), (Step(j, (Rule.SUPPOSITION,)),), j)
    verdict = check_proof(proof, CLASSICAL)
    assert not verdict.proven and verdict.blocked_at is None


def test_contradiction_goal(ev, slit_space):
    a0, a1 = Judgment(ev("A"), 0), Judgment(ev("A"), 1)
    assert check_proof(Proof(slit_space, (a0, a1), (), "contradiction"), CLASSICAL).proven
    assert not check_proof(Proof(slit_space, (a0,), (), "contradiction"), CLASSICAL).proven


def test_dangling_citation(ev, slit_space):
    j = Judgment(ev("A"), 1)
    proof = Proof(slit_space, (), (Step(j, (Rule.MONOTONICITY,), (("s", 0),)),), j)
    with pytest.raises(ProofError):
        check_step(proof, 0, CLASSICAL)
    proof = Proof(slit_space, (), (Step(j, (Rule.MONOTONICITY,), (("p", 2),)),), j)
    with pytest.raises(ProofError):
        check_proof(proof, CLASSICAL)


def test_crosscheck_three_slit(slit_proof, slit_nulls):
    rows = {r.source: r for r in semantic_crosscheck(slit_proof, slit_nulls)}
    assert (rows["goal"].satisfied, rows["goal"].total) == (0, 1)
    assert rows["step 1"].satisfied == 1
    assert rows["step 0"].satisfied == 1


def test_crosscheck_omega_always(slit_space, slit_nulls):
    j = Judgment(slit_space.omega, 1)
    rows = semantic_crosscheck(Proof(slit_space, (j,), (), j), slit_nulls)
    assert all(r.satisfied == r.total for r in rows)


def test_crosscheck_rejects_unprecluded_denial(ev, slit_space, slit_nulls):
    j = Judgment(ev("A"), 0)
    with pytest.raises(ProofError):
        semantic_crosscheck(Proof(slit_space, (j,), (), j), slit_nulls)


def test_negation_unsound_witness(ev, slit_nulls):
    phi = Coevent.of(ev("AC"))
    witness = check_rules(phi, slit_nulls).r1b.witness[0]
    assert witness == ev("A")
    # the Negation schema is satisfied syntactically but its conclusion is false under phi
    proof = one_step(ev("A").space, [Judgment(witness, 0)], Judgment(~witness, 1), [Rule.NEGATION])
    assert check_step(proof, 0, CLASSICAL).valid
    assert evaluate(phi, witness) == 0 and evaluate(phi, ~witness) == 0


def _judgments(space):
    return [Judgment(e, v) for e in space.all_events() for v in (0, 1)]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_admitted_rules_sound_via_checker(n):
    """Every step the checker accepts under the multiplicative profile is true for every F*."""
    space = make_space([f"h{i}" for i in range(n)])
    js = _judgments(space)
    coevents = [Coevent(space, f) for f in range(1, 1 << n)]
    holds = lambda phi, j: evaluate(phi, j.event) == j.value
    forms = [((Rule.CONJUNCTION,), 2), ((Rule.TOTALITY,), 1), ((Rule.MONOTONICITY,), 1),
             ((Rule.CONJUNCTION, Rule.TOTALITY), 2)]
    for rules, arity in forms:
        accepted = 0
        for cited in product(js, repeat=arity):
            for concl in js:
                if not check_step(one_step(space, cited, concl, rules), 0, MULTIPLICATIVE).valid:
                    continue
                accepted += 1
                for phi in coevents:
                    if all(holds(phi, c) for c in cited):
                        assert holds(phi, concl), (rules, cited, concl, phi)
        assert accepted > 0


@pytest.mark.parametrize("n", [4, 5, 6])
def test_admitted_rules_sound_exhaustive(n):
    full = (1 << n) - 1
    phi = lambda f, a: (a & f) == f
    for f in range(1, full + 1):
        for a in range(full + 1):
            for b in range(full + 1):
                # Conjunction
                if phi(f, a) and phi(f, b):
                    assert phi(f, a & b)
                # Monotonicity
                if a & ~b == 0 and phi(f, a):
                    assert phi(f, b)
                # Conjunction then Totality: phi(a)=1, phi(a & b)=0 => phi(b)=0
                if phi(f, a) and not phi(f, a & b):
                    assert not phi(f, b)


def _doc():
    return json.loads(json.dumps({
        "space": ["A", "B"],
        "premises": [{"event": ["A"], "value": 1}],
        "steps": [{"conclude": {"event": ["A", "B"], "value": 1}, "rule": "Monotonicity", "from": ["p0"]}],
        "goal": {"event": ["A", "B"], "value": 1},
    }))


def test_proof_from_dict_roundtrip():
    proof = proof_from_dict(_doc())
    assert check_proof(proof, MULTIPLICATIVE).proven


@pytest.mark.parametrize("mutate", [
    lambda d: d["steps"][0].update(rule="Modus"),
    lambda d: d["steps"][0].update({"from": ["q0"]}),
    lambda d: d.pop("goal"),
    lambda d: d["premises"][0].update(value=2),
    lambda d: d["premises"][0].update(event=["Z"]),
])
def test_malformed_proof_documents(mutate):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ProofError):
        proof_from_dict(doc)


def test_load_proof_json_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"space": ["A",\n  ]}')
    with pytest.raises(ProofError, match="line 2"):
        load_proof(p)


def test_load_proof_missing_file(tmp_path):
    with pytest.raises(ProofError):
        load_proof(tmp_path / "nope.json")


def test_crosscheck_classical_measure():
    # with no interference the classical conclusion is semantically fine
    space = make_space(["A", "B", "C"])
    nulls = enumerate_precluded(MeasureSpec.classical(space, [0, 0, 1]))
    a = Judgment(space.event(["A", "B"]), 0)
    rows = semantic_crosscheck(Proof(space, (a,), (), a), nulls)
    assert rows[0].satisfied == rows[0].total == 1
