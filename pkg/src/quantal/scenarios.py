"""Scenario files, the built-in scenario library and the analysis pipeline.

A scenario is a JSON document::

    {
      "name": "three_slit",
      "histories": ["A", "B", "C"],
      "measure": {"kind": "amplitude", "amplitudes": ["1", "-1", "1"]},
      "tolerance": "exact",                      # or {"epsilon": 1e-9}
      "partitions": {"name": [["A", "C"], ["B"]]},
      "bipartitions": {"name": [["A"], ["B", "C"]]},
      "expected": {"precluded_count": 3, "primitives": [["A", "C"]]}
    }

Reals are integers, ``"p/q"`` strings or floats; complex numbers are
``[re, im]`` pairs.  Any float literal switches the whole measure to float
mode.  Measure kinds are ``classical`` (``weights``), ``amplitude``
(``amplitudes``), ``decoherence`` (``matrix``) and ``hopper``, which builds a
decoherence matrix for a particle hopping between two sites (``unitary``,
``steps``, optional ``start``).
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Any

from .classicality import (
    Bipartition,
    check_theorem1_condition,
    check_theorem2_condition,
    restrict_and_check,
    verify_separability,
)
from .coevents import (
    EXHAUSTIVE_PAIR_CAP,
    affirmed_filter,
    brute_force_primitives,
    check_rules,
    enumerate_primitives,
    is_homomorphic,
    is_maximal_preclusive_filter,
)
from .errors import QuantalError, ScenarioError
from .events import MAX_HISTORIES, Event, HistorySpace, Partition, iter_bits, make_space
from .measure import (
    ORACLE_CAP,
    Epsilon,
    Exact,
    MeasureSpec,
    enumerate_precluded,
    mu,
    naive_precluded,
    parse_complex,
    validate,
)

SCHEMA_VERSION = 1
MU_TABLE_CAP = 10
TEXT_TABLE_CAP = 6
TEXT_AFFIRMED_CAP = 8
BUILTIN_SCENARIOS = (
    "three_slit",
    "classical_die",
    "classical_with_null_history",
    "double_three_slit",
    "two_site_hopper",
)


@dataclass
class Scenario:
    name: str
    space: HistorySpace
    measure: MeasureSpec
    partitions: dict[str, Partition] = field(default_factory=dict)
    bipartitions: dict[str, Bipartition] = field(default_factory=dict)
    expected: dict[str, Any] | None = None
    description: str = ""


# -- loading -----------------------------------------------------------------


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _conj(a):
    return (a[0], -a[1])


def hopper_matrix(unitary, steps: int, start: int = 0) -> tuple[list[str], list[list]]:
    """Decoherence matrix for a particle hopping on two sites.

    Histories are the position sequences after each step (the start site is
    fixed).  Two histories interfere only when they end on the same site:
    ``D[g][h] = amp(g) * conj(amp(h))`` if their final sites agree, else 0.
    """
    if steps < 1:
        raise ScenarioError("hopper needs at least one step")
    if start not in (0, 1):
        raise ScenarioError("hopper start site must be 0 or 1")
    if len(unitary) != 2 or any(len(r) != 2 for r in unitary):
        raise ScenarioError("hopper unitary must be 2x2")
    parsed = [[parse_complex(x) for x in row] for row in unitary]
    exact = all(e for row in parsed for _, e in row)
    u = [[v if exact else (float(v[0]), float(v[1])) for v, _ in row] for row in parsed]
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    tol = 0 if exact else 1e-12
    for i in range(2):
        for j in range(2):
            # (U^dagger U)[i][j]
            acc = (zero, zero)
            for k in range(2):
                t = _cmul(_conj(u[k][i]), u[k][j])
                acc = (acc[0] + t[0], acc[1] + t[1])
            target = one if i == j else zero
            if abs(acc[0] - target) > tol or abs(acc[1]) > tol:
                raise ScenarioError("hopper matrix is not unitary")
    paths = list(product((0, 1), repeat=steps))
    labels = ["".join(map(str, p)) for p in paths]
    amps = []
    for p in paths:
        a, here = (one, zero), start
        for nxt in p:
            a = _cmul(u[nxt][here], a)
            here = nxt
        amps.append(a)
    n = len(paths)
    matrix = [
        [_cmul(amps[g], _conj(amps[h])) if paths[g][-1] == paths[h][-1] else (zero, zero) for h in range(n)]
        for g in range(n)
    ]
    return labels, [[[str(x[0]) if exact else x[0], str(x[1]) if exact else x[1]] for x in row] for row in matrix]


def _tolerance(doc) -> Any:
    tol = doc.get("tolerance")
    if tol is None:
        return None
    if tol == "exact":
        return Exact()
    if isinstance(tol, dict) and "epsilon" in tol:
        return Epsilon(float(tol["epsilon"]))
    raise ScenarioError(f"bad tolerance {tol!r}; use \"exact\" or {{\"epsilon\": x}}")


def scenario_from_dict(doc: dict, cap: int = MAX_HISTORIES) -> Scenario:
    try:
        name = doc.get("name", "unnamed")
        m = doc["measure"]
        kind = m["kind"]
        tol = _tolerance(doc)
        if kind == "hopper":
            labels, matrix = hopper_matrix(m["unitary"], int(m["steps"]), int(m.get("start", 0)))
            if "histories" in doc:
                raise ScenarioError("hopper scenarios generate their own history labels")
            space = make_space(labels, cap=cap)
            spec = MeasureSpec.decoherence(space, matrix, tol)
        else:
            space = make_space(doc["histories"], cap=cap)
            if kind == "classical":
                spec = MeasureSpec.classical(space, m["weights"], tol)
            elif kind == "amplitude":
                spec = MeasureSpec.amplitude(space, m["amplitudes"], tol)
            elif kind == "decoherence":
                spec = MeasureSpec.decoherence(space, m["matrix"], tol)
            else:
                raise ScenarioError(f"unknown measure kind {kind!r}")
        partitions = {k: Partition.from_labels(space, v) for k, v in doc.get("partitions", {}).items()}
        bips = {}
        for k, v in doc.get("bipartitions", {}).items():
            if len(v) != 2:
                raise ScenarioError(f"bipartition {k!r} needs exactly two sides")
            bips[k] = Bipartition(space, space.event(v[0]), space.event(v[1]))
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc!r}") from None
    except QuantalError as exc:
        raise ScenarioError(str(exc)) from None
    rep = validate(spec, cap=cap)
    if not rep.ok:
        raise ScenarioError("; ".join(rep.errors()))
    return Scenario(name, space, spec, partitions, bips, doc.get("expected"), doc.get("description", ""))


def builtin_path(name: str):
    return resources.files("quantal.data.scenarios").joinpath(f"{name}.json")


def load_scenario(source: str | Path, cap: int = MAX_HISTORIES) -> Scenario:
    """Parse and validate a scenario from a JSON file path or a built-in name."""
    name = str(source)
    if name in BUILTIN_SCENARIOS:
        text = builtin_path(name).read_text()
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {source}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{name}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{name}: top level must be an object")
    return scenario_from_dict(doc, cap=cap)


# -- reports ------------------------------------------------------------------


def fmt_value(v) -> Any:
    return str(v) if isinstance(v, Fraction) else v


def _labels(e: Event | int, space: HistorySpace) -> list[str]:
    mask = e if isinstance(e, int) else e.mask
    return [space.labels[i] for i in iter_bits(mask)]


def _check_dict(check, space) -> dict:
    out = {"passed": bool(check.passed)}
    if not check.passed:
        out["witness"] = [_labels(w, space) for w in check.witness]
    return out


def _support_key(labels_list, space: HistorySpace) -> list[int]:
    return sorted(space.event(x).mask for x in labels_list)


def run_scenario(
    s: Scenario,
    oracle: bool | None = None,
    workers: int = 1,
    timing: bool = False,
    cap: int = MAX_HISTORIES,
) -> dict:
    """Full pipeline on one scenario; returns a JSON-ready report.

    ``oracle=None`` runs the brute-force primitive oracle whenever N <= 12;
    ``True`` also re-derives the null events by direct summation and fails for
    larger N.
    """
    space = s.space
    spec = s.measure
    n = space.size
    clock: dict[str, float] = {}
    t0 = time.perf_counter()

    if oracle and n > ORACLE_CAP:
        raise ScenarioError(f"oracle cross-checks are limited to {ORACLE_CAP} histories")
    nulls = enumerate_precluded(spec, workers=workers, cap=cap)
    clock["preclusions"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    prims = enumerate_primitives(nulls, workers=workers, cap=cap)
    clock["primitives"] = time.perf_counter() - t1

    report: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "scenario": s.name,
        "histories": list(space.labels),
        "measure": {
            "kind": spec.kind,
            "mode": "exact" if spec.exact else "float",
            "tolerance": "exact" if isinstance(spec.tolerance, Exact) else {"epsilon": spec.tolerance.eps},
        },
        "mu_omega": fmt_value(mu(spec, space.omega)),
    }
    if n <= MU_TABLE_CAP:
        pre = set(nulls.precluded_masks)
        report["mu_table"] = [
            {"event": _labels(m, space), "mu": fmt_value(mu(spec, Event(space, m))), "precluded": m in pre}
            for m in range(1 << n)
        ]
    else:
        report["mu_table"] = None
    report["null_structure"] = {
        "precluded_count": len(nulls.precluded_masks),
        "precluded": [_labels(m, space) for m in nulls.precluded_masks] if n <= MU_TABLE_CAP else None,
        "maximal": [_labels(m, space) for m in nulls.maximal_masks],
    }

    prim_rows = []
    for phi in prims:
        rules = check_rules(phi, nulls)
        row: dict[str, Any] = {
            "support": _labels(phi.support_mask, space),
            "homomorphic": bool(is_homomorphic(phi)),
            "rules": {k: _check_dict(v, space) for k, v in rules.as_dict().items()},
            "pairs_exhaustive": rules.exhaustive,
        }
        if n <= EXHAUSTIVE_PAIR_CAP:
            aff = affirmed_filter(phi)
            row["affirmed"] = [_labels(e, space) for e in aff]
            row["maximal_preclusive_filter"] = is_maximal_preclusive_filter(aff, nulls)
        prim_rows.append(row)
    report["primitive_count"] = len(prims)
    report["primitives"] = prim_rows

    run_oracle = n <= ORACLE_CAP if oracle is None else oracle
    if run_oracle:
        agree = brute_force_primitives(nulls).supports == prims.supports
        if oracle:
            agree = agree and naive_precluded(spec) == list(nulls.precluded_masks)
        report["oracle"] = {"ran": True, "agrees": agree}
    else:
        report["oracle"] = {"ran": False, "agrees": None}

    report["classicality"] = {name: classify(s, name, prims) for name in s.partitions}
    report["separability"] = {name: separability(s, name, nulls, prims) for name in s.bipartitions}
    report["expectations"] = compare_expectations(s, report)
    if timing:
        clock["total"] = time.perf_counter() - t0
        report["timing"] = clock
    return report


def classify(s: Scenario, partition: str, prims=None) -> dict:
    if partition not in s.partitions:
        raise ScenarioError(f"scenario {s.name!r} has no partition {partition!r}")
    p = s.partitions[partition]
    if prims is None:
        prims = enumerate_primitives(enumerate_precluded(s.measure))
    rows = []
    for phi in prims:
        r = restrict_and_check(phi, p)
        row = {"support": _labels(phi.support_mask, s.space), "classical": r.classical}
        if r.containing_block is not None:
            row["block"] = _labels(r.containing_block, s.space)
        if r.witness is not None:
            row["witness"] = _labels(r.witness, s.space)
        rows.append(row)
    return {
        "blocks": [_labels(b, s.space) for b in p.blocks],
        "classical_count": sum(1 for r in rows if r["classical"]),
        "results": rows,
    }


def separability(s: Scenario, bipartition: str, nulls=None, prims=None) -> dict:
    if bipartition not in s.bipartitions:
        raise ScenarioError(f"scenario {s.name!r} has no bipartition {bipartition!r}")
    b = s.bipartitions[bipartition]
    if nulls is None:
        nulls = enumerate_precluded(s.measure)
    if prims is None:
        prims = enumerate_primitives(nulls)
    return {
        "sides": [_labels(b.omega1, s.space), _labels(b.omega2, s.space)],
        "theorem1_condition": _check_dict(check_theorem1_condition(nulls, b), s.space),
        "theorem2_condition": [
            _check_dict(check_theorem2_condition(nulls, b.omega1), s.space),
            _check_dict(check_theorem2_condition(nulls, b.omega2), s.space),
        ],
        "separable": _check_dict(verify_separability(prims, b), s.space),
    }


def compare_expectations(s: Scenario, report: dict) -> dict:
    exp = s.expected or {}
    space = s.space
    mismatches = []
    checked = []

    def check(key, want, got):
        checked.append(key)
        if want != got:
            mismatches.append({"key": key, "expected": want, "actual": got})

    if "precluded_count" in exp:
        check("precluded_count", exp["precluded_count"], report["null_structure"]["precluded_count"])
    if "maximal_precluded" in exp:
        got = sorted(space.event(x).mask for x in report["null_structure"]["maximal"])
        if got != _support_key(exp["maximal_precluded"], space):
            mismatches.append({"key": "maximal_precluded", "expected": exp["maximal_precluded"],
                               "actual": report["null_structure"]["maximal"]})
        checked.append("maximal_precluded")
    if "primitive_count" in exp:
        check("primitive_count", exp["primitive_count"], report["primitive_count"])
    if "primitives" in exp:
        got = [r["support"] for r in report["primitives"]]
        if _support_key(got, space) != _support_key(exp["primitives"], space):
            mismatches.append({"key": "primitives", "expected": exp["primitives"], "actual": got})
        checked.append("primitives")
    if "all_primitives_homomorphic" in exp:
        check("all_primitives_homomorphic", exp["all_primitives_homomorphic"],
              all(r["homomorphic"] for r in report["primitives"]))
    for name, want in exp.get("separable", {}).items():
        got = report["separability"].get(name, {}).get("separable", {}).get("passed")
        check(f"separable.{name}", want, got)
    for name, want in exp.get("theorem1_condition", {}).items():
        got = report["separability"].get(name, {}).get("theorem1_condition", {}).get("passed")
        check(f"theorem1_condition.{name}", want, got)
    for name, want in exp.get("classical_count", {}).items():
        got = report["classicality"].get(name, {}).get("classical_count")
        check(f"classical_count.{name}", want, got)
    if report["oracle"]["ran"]:
        check("oracle_agrees", True, report["oracle"]["agrees"])
    return {"checked": checked, "mismatches": mismatches, "ok": not mismatches}


def render_text(report: dict) -> str:
    lines = [f"scenario: {report['scenario']}  ({len(report['histories'])} histories, "
             f"{report['measure']['kind']}, {report['measure']['mode']})"]
    lines.append(f"mu(Omega) = {report['mu_omega']}")
    table = report["mu_table"]
    if table is not None and len(table) > 1 << TEXT_TABLE_CAP:
        lines.append(f"mu table: {len(table)} rows (see --report json or --mu-table)")
    elif table is not None:
        lines.append("mu table:")
        for row in report["mu_table"]:
            mark = "  precluded" if row["precluded"] else ""
            lines.append(f"  {{{','.join(row['event'])}}}: {row['mu']}{mark}")
    ns = report["null_structure"]
    lines.append(f"precluded events: {ns['precluded_count']}")
    lines.append("maximal precluded: " + " ".join("{" + ",".join(e) + "}" for e in ns["maximal"]))
    lines.append(f"primitive coevents: {report['primitive_count']}")
    for row in report["primitives"]:
        failed = [k for k, v in row["rules"].items() if not v["passed"]]
        lines.append(
            f"  {{{','.join(row['support'])}}}*  homomorphic={row['homomorphic']}"
            + (f"  fails: {', '.join(failed)}" if failed else "")
        )
        if "affirmed" in row and len(row["affirmed"]) <= TEXT_AFFIRMED_CAP:
            lines.append("    affirms: " + " ".join("{" + ",".join(e) + "}" for e in row["affirmed"]))
        elif "affirmed" in row:
            lines.append(f"    affirms {len(row['affirmed'])} events")
    if report["oracle"]["ran"]:
        lines.append(f"oracle agrees: {report['oracle']['agrees']}")
    for name, c in report["classicality"].items():
        lines.append(f"partition {name}: {c['classical_count']}/{len(c['results'])} primitives classical")
    for name, sep in report["separability"].items():
        lines.append(
            f"bipartition {name}: bipartition condition={sep['theorem1_condition']['passed']}  "
            f"local conditions={[t['passed'] for t in sep['theorem2_condition']]}  "
            f"separable={sep['separable']['passed']}"
        )
    exp = report["expectations"]
    if exp["checked"]:
        lines.append("expectations: " + ("ok" if exp["ok"] else f"{len(exp['mismatches'])} mismatch(es)"))
        for m in exp["mismatches"]:
            lines.append(f"  {m['key']}: expected {m['expected']!r}, got {m['actual']!r}")
    if "timing" in report:
        lines.append("timing: " + ", ".join(f"{k}={v:.4f}s" for k, v in report["timing"].items()))
    return "\n".join(lines)


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2)


def write_mu_table(s: Scenario, path: str | Path, delimiter: str = ",") -> int:
    """Write the full mu table (one row per event) as delimited text; returns the row count."""
    space = s.space
    space.check_cap()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(["mask", "event", "mu"])
        for m in range(1 << space.size):
            w.writerow([m, " ".join(_labels(m, space)), fmt_value(mu(s.measure, Event(space, m)))])
    return 1 << space.size
