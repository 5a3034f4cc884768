"""Command-line driver.

Subcommands: `contexts` (generate and export a context poset), `das`
(daseinisation tables), `truth` (sieve-valued truth values), `check`
(invariant suites), `translate-sum`, `translate-tensor`, and `gap-search`.
All output is deterministic given the seed and input files.

Exit codes: 0 ok, 1 check failure, 2 usage or parse error, 3 invariant
violation, 4 unknown symbol, 5 bad state vector.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checks, compose, contexts, quantum
from .errors import (
    NotUnitVector,
    ToposQTError,
    UnknownSymbol,
)
from .linalg import (
    HermitianOperator,
    ProjectionOperator,
    matrix_from_json,
    matrix_to_json,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INVARIANT = 3
EXIT_UNKNOWN_SYMBOL = 4
EXIT_BAD_STATE = 5


@dataclass
class SessionConfig:
    tol: float = 1e-8
    seed: int = checks.DEFAULT_SEED
    out: Path | None = None
    fmt: str = "json"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def load_system(path: str) -> dict:
    """Parse a system definition file.

    Schema: {"name", "kind", "dim" | "states", "symbols": [{"name",
    "matrix" | "values"}]}; matrices use [re, im] entry pairs.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    kind = raw.get("kind", "quantum")
    out = {"name": raw.get("name", Path(path).stem), "kind": kind, "symbols": {}}
    if kind == "quantum":
        out["dim"] = int(raw["dim"])
        for spec in raw.get("symbols", ()):
            out["symbols"][spec["name"]] = HermitianOperator(
                matrix_from_json(spec["matrix"])
            )
    elif kind == "classical":
        out["states"] = tuple(raw["states"])
        for spec in raw.get("symbols", ()):
            out["symbols"][spec["name"]] = {
                s: float(x) for s, x in spec["values"].items()
            }
    else:
        raise ValueError(f"unsupported system kind {kind!r}")
    return out


def _emit(config: SessionConfig, payload, filename: str, text: str | None = None):
    if config.fmt == "text" and text is not None:
        body = text
        suffix = ".txt"
    elif config.fmt == "dot" and isinstance(payload, str):
        body = payload
        suffix = ".dot"
    else:
        body = json.dumps(payload, sort_keys=True, indent=2) + "\n"
        suffix = ".json"
    if config.out:
        config.out.mkdir(parents=True, exist_ok=True)
        target = config.out / (filename + suffix)
        target.write_text(body, encoding="utf-8")
        print(f"wrote {target}")
    else:
        sys.stdout.write(body if body.endswith("\n") else body + "\n")


def _poset_from_system(sysdef: dict, include_trivial: bool = True):
    if sysdef["kind"] != "quantum":
        raise ToposQTError("context posets require a quantum system definition")
    generators = [
        op for name, op in sorted(sysdef["symbols"].items()) if name != "I"
    ]
    return contexts.generate_context_poset(
        generators, include_trivial=include_trivial, dim=sysdef["dim"]
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_contexts(args, config: SessionConfig) -> int:
    sysdef = load_system(args.system)
    poset = _poset_from_system(sysdef, include_trivial=not args.no_trivial)
    if config.fmt == "dot":
        _emit(config, poset.to_dot(), f"{sysdef['name']}_poset")
    else:
        payload = poset.to_json()
        payload["counts"] = {
            "contexts": len(poset),
            "comparable_pairs": len(poset.comparable_id_pairs()),
        }
        _emit(config, payload, f"{sysdef['name']}_poset")
    return EXIT_OK


def cmd_das(args, config: SessionConfig) -> int:
    sysdef = load_system(args.system)
    if args.op not in sysdef["symbols"]:
        raise UnknownSymbol(f"system has no symbol {args.op!r}")
    poset = _poset_from_system(sysdef)
    op = sysdef["symbols"][args.op]
    rows = []
    for i, v in enumerate(poset.contexts):
        if args.context is not None and i != args.context:
            continue
        das = quantum.outer_das_operator(op, v)
        rows.append(
            {
                "context": i,
                "atoms": [
                    {"rank": p.rank, "value": round(val, 9)}
                    for p, val in zip(v.projections, das.values)
                ],
            }
        )
    text_lines = [f"{'context':>8}  {'atom rank':>9}  {'value':>12}"]
    for row in rows:
        for atom in row["atoms"]:
            text_lines.append(
                f"{row['context']:>8}  {atom['rank']:>9}  {atom['value']:>12.6f}"
            )
    _emit(
        config,
        {"operator": args.op, "table": rows},
        f"das_{args.op}",
        text="\n".join(text_lines) + "\n",
    )
    return EXIT_OK


def _parse_state(raw: str) -> np.ndarray:
    try:
        return np.array([complex(tok) for tok in raw.split(",")], dtype=complex)
    except ValueError as exc:
        raise NotUnitVector(f"cannot parse state vector: {exc}") from exc


def cmd_truth(args, config: SessionConfig) -> int:
    sysdef = load_system(args.system)
    if args.prop not in sysdef["symbols"]:
        raise UnknownSymbol(f"system has no symbol {args.prop!r}")
    prop = ProjectionOperator(sysdef["symbols"][args.prop].matrix)
    poset = _poset_from_system(sysdef)
    psi = _parse_state(args.state)
    at = args.at if args.at is not None else len(poset) - 1
    if not 0 <= at < len(poset):
        raise ToposQTError(f"context id {at} out of range")
    sieve = quantum.truth_value(prop, psi, poset.contexts[at], poset)
    maximal = sieve.members == frozenset(poset.down_set_ids(at))
    payload = {
        "proposition": args.prop,
        "at": at,
        "members": sorted(sieve.members),
        "totally_true": maximal,
    }
    text = (
        f"truth value of {args.prop} at context {at}\n"
        f"  sieve members: {sorted(sieve.members)}\n"
        f"  totally true: {'yes' if maximal else 'no'}\n"
    )
    _emit(config, payload, f"truth_{args.prop}", text=text)
    return EXIT_OK


def cmd_check(args, config: SessionConfig) -> int:
    names = args.suite
    if "all" in names:
        results = checks.run_all(seed=config.seed, perturb=args.perturb, tol=config.tol)
    else:
        results = checks.run_suites(
            names, seed=config.seed, perturb=args.perturb, tol=config.tol
        )
    for result in results:
        print(result.line())
    summary = {
        "passed": all(r.passed for r in results),
        "results": [r.to_json() for r in results],
    }
    if config.out:
        _emit(config, summary, "check_summary")
    return EXIT_OK if summary["passed"] else EXIT_CHECK_FAILED


def cmd_translate_sum(args, config: SessionConfig) -> int:
    s1 = load_system(args.system1)
    s2 = load_system(args.system2)
    for name, sysdef in ((args.op1, s1), (args.op2, s2)):
        if name not in sysdef["symbols"]:
            raise UnknownSymbol(f"missing symbol {name!r}")
    p1 = _poset_from_system(s1)
    p2 = _poset_from_system(s2)
    psum = contexts.direct_sum_poset(p1, p2)
    arrow = compose.sum_translation(
        s1["symbols"][args.op1], s2["symbols"][args.op2], p1, psum
    )
    payload = {
        "op1": args.op1,
        "op2": args.op2,
        "component_contexts": len(p1),
        "sum_contexts": len(psum),
        "commutes": True,  # sum_translation raises otherwise
        "tables": _tables_payload(arrow),
    }
    _emit(config, payload, f"translate_sum_{args.op1}")
    return EXIT_OK


def cmd_translate_tensor(args, config: SessionConfig) -> int:
    s1 = load_system(args.system1)
    s2 = load_system(args.system2)
    if args.op not in s1["symbols"]:
        raise UnknownSymbol(f"missing symbol {args.op!r}")
    p1 = _poset_from_system(s1)
    p2 = _poset_from_system(s2)
    poset_w = contexts.tensor_composite_poset(p1, p2)
    bundle = compose.tensor_translation_bundle(s1["symbols"][args.op], poset_w)
    payload = {
        "op": args.op,
        "contexts": len(poset_w),
        "stages": [
            {
                "context": i,
                "factor_context": bundle.n_map[i],
                "stage_operator": matrix_to_json(bundle.stage_operator(i)),
            }
            for i in range(len(poset_w))
        ],
    }
    _emit(config, payload, f"translate_tensor_{args.op}")
    return EXIT_OK


def cmd_gap_search(args, config: SessionConfig) -> int:
    sysdef = load_system(args.system)
    if args.op not in sysdef["symbols"]:
        raise UnknownSymbol(f"missing symbol {args.op!r}")
    records = compose.gap_search(
        sysdef["symbols"][args.op],
        args.n2,
        generator_budget=args.budget,
        seed=config.seed,
        family=args.family,
    )
    payload = {
        "op": args.op,
        "n2": args.n2,
        "family": args.family,
        "seed": config.seed,
        "witnesses": [
            {
                "gap_norm": round(rec.gap_norm, 9),
                "witness_projections": [
                    matrix_to_json(p.matrix) for p in rec.witness.projections
                ],
                "factor_projections": [
                    matrix_to_json(p.matrix) for p in rec.factor.projections
                ],
                "lhs": matrix_to_json(rec.lhs),
                "rhs": matrix_to_json(rec.rhs),
            }
            for rec in records
        ],
    }
    _emit(config, payload, "gap_report")
    print(f"{len(records)} witnesses")
    return EXIT_OK


def _tables_payload(arrow) -> dict:
    out = {}
    for stage in sorted(arrow.components):
        out[str(stage)] = {
            str(point): [[entry, value] for entry, value in table]
            for point, table in sorted(arrow.components[stage].items())
        }
    return out


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toposqt",
        description="Topos representations of finite quantum and classical systems.",
    )
    parser.add_argument("--tol", type=float, default=None, help="tolerance override")
    parser.add_argument("--seed", type=int, default=checks.DEFAULT_SEED)
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--format", choices=("json", "text", "dot"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("contexts", help="generate and export a context poset")
    p.add_argument("system")
    p.add_argument("--no-trivial", action="store_true")
    p.set_defaults(fn=cmd_contexts)

    p = sub.add_parser("das", help="daseinisation table of one symbol")
    p.add_argument("system")
    p.add_argument("--op", required=True)
    p.add_argument("--context", type=int, default=None)
    p.set_defaults(fn=cmd_das)

    p = sub.add_parser("truth", help="sieve-valued truth value of a proposition")
    p.add_argument("system")
    p.add_argument("--state", required=True, help="comma-separated amplitudes")
    p.add_argument("--prop", required=True)
    p.add_argument("--at", type=int, default=None, help="context id (default: top)")
    p.set_defaults(fn=cmd_truth)

    p = sub.add_parser("check", help="run invariant suites")
    p.add_argument(
        "--suite",
        action="append",
        required=True,
        choices=["all"] + sorted(checks.SUITES),
    )
    p.add_argument("--perturb", type=float, default=0.0)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("translate-sum", help="pull a block arrow back to a component")
    p.add_argument("system1")
    p.add_argument("system2")
    p.add_argument("--op1", required=True)
    p.add_argument("--op2", required=True)
    p.set_defaults(fn=cmd_translate_sum)

    p = sub.add_parser("translate-tensor", help="translate a factor quantity")
    p.add_argument("system1")
    p.add_argument("system2")
    p.add_argument("--op", required=True)
    p.set_defaults(fn=cmd_translate_tensor)

    p = sub.add_parser("gap-search", help="hunt for entanglement-gap witnesses")
    p.add_argument("system")
    p.add_argument("--op", required=True)
    p.add_argument("--n2", type=int, default=2, help="second-factor dimension")
    p.add_argument("--budget", type=int, default=8)
    p.add_argument("--family", choices=("all", "product", "entangled"), default="all")
    p.set_defaults(fn=cmd_gap_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    tol = args.tol
    if tol is None:
        env = os.environ.get("TOPOSQT_TOL")
        tol = float(env) if env else 1e-8
    try:
        config = SessionConfig(tol=tol, seed=args.seed, out=args.out, fmt=args.format)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args, config)
    except (json.JSONDecodeError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnknownSymbol as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_SYMBOL
    except NotUnitVector as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_STATE
    except ToposQTError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
