"""Checking rule-cited derivations about a coevent ``phi``.

A proof is a list of judgments ``phi(E) = v``, each justified by one inference
rule (or a short fixed chain of rules) applied to earlier judgments.  A
:class:`SchemeProfile` says which rules are admissible.  The checker does not
search for proofs; it only replays them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Union

from .errors import ProofError, QuantalError
from .events import Event, HistorySpace, complement, implies_event, intersect, is_subset, make_space, same_space
from .events import symmetric_difference, union


class Rule(str, Enum):
    CONJUNCTION = "Conjunction"
    TOTALITY = "Totality"
    NEGATION = "Negation"
    MONOTONICITY = "Monotonicity"
    SUPPOSITION = "Supposition"
    CONTRADICTION_DISCHARGE = "ContradictionDischarge"


@dataclass(frozen=True)
class SchemeProfile:
    name: str
    admissible: frozenset

    def admits(self, rule: Rule) -> bool:
        return rule in self.admissible


CLASSICAL = SchemeProfile("classical", frozenset(Rule))
MULTIPLICATIVE = SchemeProfile("multiplicative", frozenset(Rule) - {Rule.NEGATION})
PROFILES = {p.name: p for p in (CLASSICAL, MULTIPLICATIVE)}


@dataclass(frozen=True)
class Judgment:
    event: Event
    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ProofError(f"judgment values are 0 or 1, got {self.value!r}")

    def __str__(self) -> str:
        return f"phi({self.event.label()})={self.value}"


# Citation: ("p", i) for premise i, ("s", i) for step i.
Ref = tuple[str, int]

_IDENTITY_OPS = {
    "complement": lambda args: complement(*args),
    "union": lambda args: _fold(union, args),
    "intersect": lambda args: _fold(intersect, args),
    "symmetric_difference": lambda args: _fold(symmetric_difference, args),
    "implies": lambda args: implies_event(*args),
}


def _fold(op, args):
    out = args[0]
    for a in args[1:]:
        out = op(out, a)
    return out


@dataclass(frozen=True)
class EventIdentity:
    """Side condition ``lhs == op(args)`` checked with the event algebra."""

    lhs: Event
    op: str
    args: tuple[Event, ...]

    def holds(self) -> bool:
        if self.op not in _IDENTITY_OPS:
            raise ProofError(f"unknown event operation {self.op!r}")
        arity = {"complement": 1, "implies": 2}.get(self.op)
        if arity is not None and len(self.args) != arity or not self.args:
            raise ProofError(f"wrong number of arguments for {self.op!r}")
        return _IDENTITY_OPS[self.op](self.args) == self.lhs


@dataclass(frozen=True)
class Step:
    conclusion: Judgment
    rules: tuple[Rule, ...]
    cites: tuple[Ref, ...] = ()
    identity: EventIdentity | None = None
    note: str = ""


CONTRADICTION = "contradiction"


@dataclass(frozen=True)
class Proof:
    space: HistorySpace
    premises: tuple[Judgment, ...]
    steps: tuple[Step, ...]
    goal: Union[Judgment, str]
    names: dict = field(default_factory=dict, compare=False, hash=False)


class Status(str, Enum):
    VALID = "Valid"
    RULE_INADMISSIBLE = "RuleInadmissible"
    MALFORMED = "MalformedApplication"


@dataclass(frozen=True)
class StepVerdict:
    status: Status
    reason: str = ""
    rule: Rule | None = None

    @property
    def valid(self) -> bool:
        return self.status is Status.VALID


@dataclass(frozen=True)
class ProofVerdict:
    proven: bool
    blocked_at: int | None = None
    step_verdict: StepVerdict | None = None
    reason: str = ""

    def __str__(self) -> str:
        if self.proven:
            return "Proven"
        if self.blocked_at is None:
            return f"NotProven: {self.reason}"
        sv = self.step_verdict
        if sv.status is Status.RULE_INADMISSIBLE:
            return f"BlockedAt step {self.blocked_at}: {sv.rule.value} inadmissible"
        return f"BlockedAt step {self.blocked_at}: {sv.status.value} ({sv.reason})"


def _resolve(proof: Proof, ref: Ref, before: int) -> Judgment:
    kind, i = ref
    if kind == "p":
        if not 0 <= i < len(proof.premises):
            raise ProofError(f"step {before} cites missing premise p{i}")
        return proof.premises[i]
    if not 0 <= i < before:
        raise ProofError(f"step {before} cites step {i}, which is not an earlier step")
    return proof.steps[i].conclusion


def _schema(proof: Proof, index: int) -> str | None:
    """Return ``None`` when the step's conclusion follows by its rule, else a reason."""
    step = proof.steps[index]
    got = [_resolve(proof, r, index) for r in step.cites]
    concl = step.conclusion
    rules = step.rules

    if rules == (Rule.SUPPOSITION,):
        return None if not got else "a supposition cites nothing"

    if rules == (Rule.CONJUNCTION,):
        if len(got) != 2 or any(j.value != 1 for j in got):
            return "conjunction needs two affirmed judgments"
        if concl.value != 1 or concl.event != got[0].event & got[1].event:
            return "conclusion is not the affirmed intersection"
        return None

    if rules == (Rule.TOTALITY,):
        # judgments are two-valued already, so "not 1" is "0"
        if len(got) != 1 or got[0].event != concl.event or got[0].value != 0 or concl.value != 0:
            return "totality restates a denial of the same event"
        return None

    if rules == (Rule.NEGATION,):
        if len(got) != 1 or got[0].value != 0:
            return "negation needs one denied judgment"
        if concl.value != 1 or concl.event != ~got[0].event:
            return "conclusion is not the affirmed complement"
        return None

    if rules == (Rule.MONOTONICITY,):
        if len(got) != 1 or got[0].value != 1 or concl.value != 1:
            return "monotonicity needs one affirmed judgment and an affirmed conclusion"
        if not is_subset(got[0].event, concl.event):
            return f"{got[0].event.label()} is not contained in {concl.event.label()}"
        return None

    if rules == (Rule.CONJUNCTION, Rule.TOTALITY):
        # phi(X)=1 and phi(X & Y)=0: affirming Y would affirm X & Y, so Y is denied
        ones = [j for j in got if j.value == 1]
        zeros = [j for j in got if j.value == 0]
        if len(got) != 2 or len(ones) != 1 or len(zeros) != 1 or concl.value != 0:
            return "needs one affirmed and one denied judgment and a denied conclusion"
        if ones[0].event & concl.event != zeros[0].event:
            return "the denied event is not the intersection with the conclusion"
        return None

    if rules == (Rule.CONTRADICTION_DISCHARGE,):
        sups = [r for r in step.cites if r[0] == "s" and proof.steps[r[1]].rules == (Rule.SUPPOSITION,)]
        if len(step.cites) != 3 or len(sups) < 1:
            return "discharge cites two contradictory judgments and the supposition"
        sup_ref = sups[-1]
        others = [_resolve(proof, r, index) for r in step.cites if r != sup_ref]
        a, b = others
        if a.event != b.event or a.value == b.value:
            return "cited judgments do not contradict each other"
        sup = proof.steps[sup_ref[1]].conclusion
        if concl.event != sup.event or concl.value != 1 - sup.value:
            return "conclusion must reverse the supposition"
        return None

    return "unsupported rule combination " + "+".join(r.value for r in rules)


def check_step(proof: Proof, index: int, profile: SchemeProfile) -> StepVerdict:
    step = proof.steps[index]
    for r in step.cites:
        _resolve(proof, r, index)
    for rule in step.rules:
        if not profile.admits(rule):
            return StepVerdict(Status.RULE_INADMISSIBLE, f"{rule.value} is not admissible in {profile.name}", rule)
    if step.identity is not None and not step.identity.holds():
        return StepVerdict(Status.MALFORMED, "stated event identity is false")
    reason = _schema(proof, index)
    if reason is not None:
        return StepVerdict(Status.MALFORMED, reason)
    return StepVerdict(Status.VALID)


def _dependencies(proof: Proof) -> list[frozenset]:
    """Open suppositions each step depends on."""
    deps: list[frozenset] = []
    for i, step in enumerate(proof.steps):
        d = frozenset()
        for kind, j in step.cites:
            if kind == "s":
                d |= deps[j]
        if step.rules == (Rule.SUPPOSITION,):
            d |= {i}
        if step.rules == (Rule.CONTRADICTION_DISCHARGE,):
            sup = [j for kind, j in step.cites if kind == "s" and proof.steps[j].rules == (Rule.SUPPOSITION,)]
            d -= {sup[-1]}
        deps.append(d)
    return deps


def check_proof(proof: Proof, profile: SchemeProfile) -> ProofVerdict:
    for i in range(len(proof.steps)):
        v = check_step(proof, i, profile)
        if not v.valid:
            return ProofVerdict(False, i, v)
    deps = _dependencies(proof)
    closed = list(proof.premises) + [s.conclusion for s, d in zip(proof.steps, deps) if not d]
    if proof.goal == CONTRADICTION:
        seen = {}
        everything = list(proof.premises) + [s.conclusion for s in proof.steps]
        for j in everything:
            if seen.get(j.event, j.value) != j.value:
                return ProofVerdict(True)
            seen[j.event] = j.value
        return ProofVerdict(False, reason="no contradiction derived")
    if proof.goal in closed:
        return ProofVerdict(True)
    return ProofVerdict(False, reason=f"goal {proof.goal} not reached outside open suppositions")


# -- semantics ---------------------------------------------------------------


@dataclass(frozen=True)
class CrosscheckRow:
    source: str
    judgment: Judgment
    satisfied: int
    total: int


def semantic_crosscheck(proof: Proof, nulls) -> list[CrosscheckRow]:
    """How many primitive coevents satisfy each judgment in the proof."""
    from .coevents import enumerate_primitives, evaluate

    same_space(proof.space, nulls.space)
    precluded = set(nulls.precluded_masks)
    for k, p in enumerate(proof.premises):
        if p.value == 0 and p.event.mask not in precluded:
            raise ProofError(f"premise p{k} denies {p.event.label()}, which is not precluded")
    prims = enumerate_primitives(nulls)
    rows = []
    labelled = [(f"p{k}", j) for k, j in enumerate(proof.premises)]
    labelled += [(f"step {k}", s.conclusion) for k, s in enumerate(proof.steps)]
    if isinstance(proof.goal, Judgment):
        labelled.append(("goal", proof.goal))
    for src, j in labelled:
        hits = sum(1 for phi in prims if evaluate(phi, j.event) == j.value)
        rows.append(CrosscheckRow(src, j, hits, len(prims)))
    return rows


# -- proof files -------------------------------------------------------------


BUILTIN_PROOFS = ("appendix_3slit",)


def _parse_ref(x) -> Ref:
    if isinstance(x, bool):
        raise ProofError(f"bad citation {x!r}")
    if isinstance(x, int):
        return ("s", x)
    if isinstance(x, str) and x[:1] in ("p", "P") and x[1:].isdigit():
        return ("p", int(x[1:]))
    if isinstance(x, str) and x.isdigit():
        return ("s", int(x))
    raise ProofError(f"bad citation {x!r}; use step indices or 'p<k>' for premises")


def proof_from_dict(doc: dict) -> Proof:
    try:
        space = make_space(doc["space"])
        names = {k: space.event(v) for k, v in doc.get("events", {}).items()}

        def event(x) -> Event:
            if isinstance(x, str):
                if x in names:
                    return names[x]
                raise ProofError(f"unknown event name {x!r}")
            return space.event(x)

        def judgment(x) -> Judgment:
            return Judgment(event(x["event"]), int(x["value"]))

        premises = tuple(judgment(p) for p in doc.get("premises", []))
        steps = []
        for k, st in enumerate(doc.get("steps", [])):
            raw_rules = st["rule"]
            raw_rules = [raw_rules] if isinstance(raw_rules, str) else raw_rules
            try:
                rules = tuple(Rule(r) for r in raw_rules)
            except ValueError as exc:
                raise ProofError(f"step {k}: {exc}") from None
            ident = None
            if st.get("event_identity"):
                ei = st["event_identity"]
                ident = EventIdentity(event(ei["lhs"]), ei["op"], tuple(event(a) for a in ei["args"]))
            steps.append(
                Step(
                    judgment(st["conclude"]),
                    rules,
                    tuple(_parse_ref(r) for r in st.get("from", [])),
                    ident,
                    st.get("note", ""),
                )
            )
        goal = doc["goal"]
        goal = CONTRADICTION if goal == CONTRADICTION else judgment(goal)
    except ProofError:
        raise
    except (KeyError, TypeError, ValueError, QuantalError) as exc:
        raise ProofError(f"malformed proof document: {exc!r}") from None
    return Proof(space, premises, tuple(steps), goal, names)


def load_proof(source: Union[str, Path]) -> Proof:
    """Load a proof from a JSON file path or a built-in proof name."""
    name = str(source)
    if name in BUILTIN_PROOFS:
        text = resources.files("quantal.data.proofs").joinpath(f"{name}.json").read_text()
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ProofError(f"cannot read proof file {source}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProofError(f"{name}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return proof_from_dict(doc)
