"""Command-line front end.

    judgebench simulate <scenario>
    judgebench check <scenario>
    judgebench export-model <scenario> --out <path>
    judgebench avnet --preset toy --n 1 --all

Scenarios are JSON files, or ``builtin:<name>`` for the shipped ones.  Every
command prints one JSON document.  Exit codes: 0 all expectations met,
1 some expectation mismatched, 2 bad input, 3 capacity exceeded.
"""

from __future__ import annotations

import argparse
import collections
import itertools
import json
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema

from . import anonspec, avnet
from .errors import CapacityError, FormulaSyntaxError, ParameterError, ValidationError
from .kripke import OBS_MODES, build_model, export_model
from .mck import Checker, explain, parse_formula, validate
from .protocols import DEFAULT_BOUND, OT_MODES, PROTOCOLS, Sampled, enumerate_runs, expected_outcome

SCHEMA_VERSION = "judgebench/1"
EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["protocol", "n"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "protocol": {"enum": list(PROTOCOLS)},
        "n": {"type": "integer", "minimum": 1},
        "decisions": {
            "oneOf": [
                {"const": "all"},
                {"type": "array", "minItems": 1, "items": {"enum": [0, 1]}},
                {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 1, "items": {"enum": [0, 1]}},
                },
            ]
        },
        "randomness": {
            "oneOf": [
                {"const": "exhaustive"},
                {
                    "type": "object",
                    "required": ["sampled"],
                    "additionalProperties": False,
                    "properties": {
                        "sampled": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
            ]
        },
        "ot_mode": {"enum": list(OT_MODES)},
        "obs_mode": {"enum": list(OBS_MODES)},
        "step5": {"enum": ["prose", "printed"]},
        "formulas": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "text": {"type": "string"},
                    "suite": {"enum": sorted(anonspec.SUITES)},
                    "expected": {"enum": list(anonspec.EXPECTED)},
                },
                "oneOf": [
                    {"required": ["name", "text"]},
                    {"required": ["suite"], "not": {"required": ["text"]}},
                ],
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "report": {"type": "string"},
                "traces": {"type": "string"},
                "model": {"type": "string"},
            },
        },
    },
}


class InputError(Exception):
    """Bad scenario or arguments; maps to exit code 2."""


# -- scenarios ----------------------------------------------------------------


def builtin_names() -> list[str]:
    root = resources.files("judgebench") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read_scenario_text(ref: str) -> str:
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in builtin_names():
            raise InputError(f"unknown builtin scenario {name!r}; known: {builtin_names()}")
        return (resources.files("judgebench") / "scenarios" / f"{name}.json").read_text(encoding="utf-8")
    try:
        return Path(ref).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read scenario {ref}: {exc.strerror or exc}") from exc


def _field_path(err: jsonschema.ValidationError) -> str:
    path = "$"
    for part in err.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def load_scenario(ref: str) -> dict:
    text = _read_scenario_text(ref)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise InputError(f"scenario field {_field_path(err)}: {err.message}")
    decisions = doc.get("decisions", "all")
    size = 2 * doc["n"] + 1
    if decisions != "all":
        vectors = [decisions] if isinstance(decisions[0], int) else decisions
        for k, vec in enumerate(vectors):
            if len(vec) != size:
                where = "$.decisions" if vectors is not decisions else f"$.decisions[{k}]"
                raise InputError(f"scenario field {where}: expected {size} decisions, got {len(vec)}")
    if doc["protocol"] == "three_judges_mm" and doc["n"] != 1:
        raise InputError("scenario field $.n: three_judges_mm requires n = 1")
    doc.setdefault("name", ref)
    return doc


def _randomness(doc: dict, seed: int | None):
    r = doc.get("randomness", "exhaustive")
    if r == "exhaustive":
        return r
    return Sampled(r["sampled"], r.get("seed", seed if seed is not None else 0))


def _decisions(doc: dict):
    d = doc.get("decisions", "all")
    return d if d == "all" else [tuple(x) for x in ([d] if isinstance(d[0], int) else d)]


def resolve_formulas(doc: dict) -> list[anonspec.SuiteEntry]:
    entries: list[anonspec.SuiteEntry] = []
    ns = anonspec.namespace_for(doc["protocol"])
    for k, item in enumerate(doc.get("formulas", [])):
        if "suite" in item:
            try:
                listed = anonspec.suite(item["suite"], doc["n"], ns)
            except ParameterError as exc:
                raise InputError(f"scenario field $.formulas[{k}].suite: {exc}") from exc
            if "expected" in item:
                listed = [anonspec.SuiteEntry(e.name, e.formula, item["expected"]) for e in listed]
            entries.extend(listed)
        else:
            try:
                f = parse_formula(item["text"])
            except FormulaSyntaxError as exc:
                raise InputError(f"formula {item['name']!r} ($.formulas[{k}].text): {exc}") from exc
            entries.append(anonspec.SuiteEntry(item["name"], f, item.get("expected", "unknown")))
    names = [e.name for e in entries]
    dup = [n for n, c in collections.Counter(names).items() if c > 1]
    if dup:
        raise InputError(f"duplicate formula names: {dup}")
    return entries


def _echo(doc: dict) -> dict:
    keys = ("name", "protocol", "n", "decisions", "randomness", "ot_mode", "obs_mode", "step5")
    return {k: doc[k] for k in keys if k in doc}


def _emit(doc: dict, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")


def _write(path: str, doc) -> None:
    try:
        Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _model_for(doc: dict, state_cap: int):
    return build_model(
        doc["protocol"],
        doc["n"],
        doc.get("obs_mode", "full-local-state"),
        state_cap,
        decisions=_decisions(doc),
        randomness=_randomness(doc, doc.get("_seed")),
        ot_mode=doc.get("ot_mode", "ideal"),
        step5=doc.get("step5", "prose"),
    )


# -- commands -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    doc = load_scenario(args.scenario)
    started = time.time()
    runs = enumerate_runs(
        doc["protocol"],
        doc["n"],
        _decisions(doc),
        _randomness(doc, args.seed),
        ot_mode=doc.get("ot_mode", "ideal"),
        bound=args.state_cap,
        step5=doc.get("step5", "prose"),
        record=bool(doc.get("output", {}).get("traces")),
    )
    traces_path = doc.get("output", {}).get("traces")
    dist: collections.Counter = collections.Counter()
    per_vector: dict[tuple, set] = collections.defaultdict(set)
    total = correct = 0
    fh = None
    try:
        if traces_path:
            try:
                fh = open(traces_path, "w", encoding="utf-8")
            except OSError as exc:
                raise InputError(f"cannot write {traces_path}: {exc.strerror or exc}") from exc
        for run in runs:
            total += 1
            dist[run.outcome] += 1
            per_vector[run.decisions].add(run.outcome)
            correct += run.outcome == expected_outcome(run.protocol, run.decisions)
            if fh:
                fh.write(json.dumps(run.to_json(), separators=(",", ":")) + "\n")
    finally:
        if fh:
            fh.close()
    classes = collections.Counter(
        "mixed" if len(vs) > 1 else _verdict_label(doc["protocol"], next(iter(vs))) for vs in per_vector.values()
    )
    report = {
        "schema": SCHEMA_VERSION,
        "command": "simulate",
        "scenario": _echo(doc),
        "runs": total,
        "correct": correct,
        "verdict_distribution": {_verdict_label(doc["protocol"], k): v for k, v in sorted(dist.items())},
        "decision_classes": dict(sorted(classes.items())),
        "volatile": {"seconds": round(time.time() - started, 4)},
    }
    if traces_path:
        report["traces"] = traces_path
    _emit(report)
    return EXIT_OK if correct == total else EXIT_MISMATCH


def _verdict_label(protocol: str, outcome: int) -> str:
    if protocol == "dcp_sum":
        return str(outcome)
    return "guilty" if outcome == 1 else "innocent"


def cmd_check(args) -> int:
    doc = load_scenario(args.scenario)
    doc["_seed"] = args.seed
    entries = resolve_formulas(doc)
    t0 = time.time()
    model = _model_for(doc, args.state_cap)
    build_s = time.time() - t0
    for e in entries:
        try:
            validate(e.formula, model)
        except ValidationError as exc:
            raise InputError(f"formula {e.name!r}: {exc}") from exc
    checker = Checker(model)
    timings = {}

    def run_one(entry):
        t = time.time()
        res = checker.check(entry.formula)
        timings[entry.name] = round(time.time() - t, 4)
        return res

    if args.jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, entries))
    else:
        results = [run_one(e) for e in entries]

    rows = []
    all_match = True
    for entry, res in sorted(zip(entries, results), key=lambda er: er[0].name):
        expected = entry.expected
        match = expected == "unknown" or (expected == "hold") == res.holds_on_init
        all_match &= match
        row = {
            "name": entry.name,
            "formula": entry.text,
            "holds_on_init": res.holds_on_init,
            "expected": expected,
            "match": match,
            "satisfying_states": res.count,
        }
        if not res.holds_on_init:
            row["counterexample"] = explain(model, entry.formula, res).to_json(model)
        rows.append(row)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "check",
        "scenario": _echo(doc),
        "model": model.stats(),
        "formulas": rows,
        "summary": {
            "total": len(rows),
            "holding": sum(r["holds_on_init"] for r in rows),
            "mismatched": sum(not r["match"] for r in rows),
        },
        "volatile": {"build_seconds": round(build_s, 4), "formula_seconds": dict(sorted(timings.items()))},
    }
    if doc.get("output", {}).get("report"):
        _write(doc["output"]["report"], report)
    if doc.get("output", {}).get("model"):
        export_model(model, doc["output"]["model"])
    _emit(report)
    return EXIT_OK if all_match else EXIT_MISMATCH


def cmd_export_model(args) -> int:
    doc = load_scenario(args.scenario)
    doc["_seed"] = args.seed
    model = _model_for(doc, args.state_cap)
    try:
        export_model(model, args.out)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    _emit({"schema": SCHEMA_VERSION, "command": "export-model", "out": args.out, "model": model.stats()})
    return EXIT_OK


def _parse_group(text: str) -> avnet.GroupParams:
    try:
        p, q, g = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"--group expects P,Q,G integers, got {text!r}") from exc
    return avnet.setup_group(p=p, q=q, g=g)


def cmd_avnet(args) -> int:
    gp = _parse_group(args.group) if args.group else avnet.setup_group(args.preset)
    n = args.n
    if n < 1:
        raise InputError("--n must be >= 1")
    if args.all:
        vectors = list(itertools.product((0, 1), repeat=2 * n + 1))
    elif args.votes is not None:
        vectors = [tuple(args.votes)]
        if len(args.votes) != 2 * n + 1:
            raise InputError(f"--votes needs {2 * n + 1} bits for n = {n}")
    else:
        raise InputError("give --votes or --all")
    import random

    rng = random.Random(args.seed if args.seed is not None else 0)
    rows = []
    for votes in vectors:
        tr = avnet.run_avnet(gp, votes, rng=rng)
        expected = int(sum(votes) >= n + 1)
        rows.append({"votes": list(votes), "verdict": tr.verdict, "majority": expected, "match": tr.verdict == expected})
        last = tr
    matches = sum(r["match"] for r in rows)
    report = {
        "schema": SCHEMA_VERSION,
        "command": "avnet",
        "group": gp.to_json(),
        "n": n,
        "results": rows,
        "summary": {"total": len(rows), "matching": matches},
    }
    if len(rows) == 1:
        report["transcript"] = last.to_json()
    _emit(report)
    return EXIT_OK if matches == len(rows) else EXIT_MISMATCH


# -- entry point ----------------------------------------------------------------


def _bits(text: str) -> int:
    if text not in ("0", "1"):
        raise argparse.ArgumentTypeError(f"vote must be 0 or 1, got {text!r}")
    return int(text)


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=_positive, default=1, help="worker threads for formula checks")
    common.add_argument("--state-cap", type=_positive, default=DEFAULT_BOUND, help="maximum runs / states")
    common.add_argument("--seed", type=_seed, default=None, help="seed for sampled randomness")

    parser = _Parser(prog="judgebench", description=__doc__.split("\n")[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="run a protocol over a scenario's input space")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", parents=[common], help="build the model and check the scenario's formulas")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export-model", parents=[common], help="write the scenario's model as JSON")
    p.add_argument("scenario")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_model)

    p = sub.add_parser("avnet", parents=[common], help="run the group-based majority protocol")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--preset", choices=sorted(avnet.PRESETS), default="small")
    g.add_argument("--group", help="explicit P,Q,G")
    p.add_argument("--n", type=int, default=1)
    v = p.add_mutually_exclusive_group()
    v.add_argument("--votes", type=_bits, nargs="+")
    v.add_argument("--all", action="store_true")
    p.set_defaults(func=cmd_avnet)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParameterError, ValidationError, FormulaSyntaxError) as exc:
        print(f"judgebench: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapacityError as exc:
        print(f"judgebench: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
