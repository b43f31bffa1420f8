"""Command-line front end: ``hmnc <command> ...``.

Exit codes: 0 success, 1 verification failed, 2 malformed instance or unknown
reference, 3 numerical failure (the message carries a replay token).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from .algebra import AlgebraDesc, ShapeError
from .measures import MEASURES, OPERATOR_MEASURES, MncParams, lambda_profile, op_mnc, seminorm_mnc_bounds, \
    seminorm_stream, star_aggregate
from .module import ModuleOperator, operator_from_json
from .sets import SetExpr, expr_from_dict
from .suite import SELECTIONS, SuiteConfig, run_suite
from .witness import PrecompactError, WitnessCertificationError, WitnessSearchError, discrete_witness

SCHEMA = "hmnc-instance/1"
SEED_ENV = "HMNC_SEED"

DEFAULT_INSTANCE = {
    "schema": SCHEMA,
    "algebra": {"blocks": [1]},
    "N": 8,
    "sets": {
        "unit_ball": {"kind": "ball", "radius": 1.0},
        "big_ball": {"kind": "ball", "radius": 2.0},
        "pair": {"kind": "finite", "points": [{"basis": 0}, {"basis": 1, "element": 2.0}]},
    },
    "operators": {
        "identity": "identity",
        "rank_one": {"kind": "theta", "y": {"basis": 0}, "z": {"basis": 1}},
    },
}


class InstanceError(Exception):
    """A malformed instance file or an unresolved reference (exit status 2)."""


@dataclass
class Instance:
    desc: AlgebraDesc
    N: int
    seed: int | None
    mnc: MncParams
    raw_sets: dict
    raw_operators: dict
    source: str = "<builtin>"
    sets: dict = field(default_factory=dict)
    operators: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"schema": SCHEMA, "algebra": {"blocks": list(self.desc.blocks)}, "N": self.N,
             "mnc": self.mnc.to_dict(), "sets": self.raw_sets, "operators": self.raw_operators}
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def get_set(self, name: str) -> SetExpr:
        if name not in self.raw_sets:
            raise InstanceError(f"{self.source}: sets: unknown set reference {name!r}")
        return self.sets[name]

    def get_operator(self, name: str) -> ModuleOperator:
        if name not in self.raw_operators:
            raise InstanceError(f"{self.source}: operators: unknown operator reference {name!r}")
        return self.operators[name]


def _require(cond: bool, source: str, path: str, message: str):
    if not cond:
        raise InstanceError(f"{source}: {path}: {message}")


def parse_instance(data, source: str = "<instance>") -> Instance:
    """Validate and resolve an instance; sets and operators may reference each other by name."""
    _require(isinstance(data, dict), source, "$", "instance must be a JSON object")
    _require(data.get("schema") == SCHEMA, source, "schema", f"expected {SCHEMA!r}, got {data.get('schema')!r}")
    alg = data.get("algebra")
    blocks = alg.get("blocks") if isinstance(alg, dict) else alg
    _require(isinstance(blocks, list) and blocks and all(isinstance(k, int) and k >= 1 for k in blocks),
             source, "algebra.blocks", "need a non-empty list of positive block sizes")
    N = data.get("N")
    _require(isinstance(N, int) and N >= 1, source, "N", "need a positive integer module length")
    seed = data.get("seed")
    _require(seed is None or isinstance(seed, int), source, "seed", "need an integer")
    mnc = data.get("mnc", {})
    _require(isinstance(mnc, dict), source, "mnc", "need an object")
    known = {f.name for f in fields(MncParams)}
    for k in mnc:
        _require(k in known, source, f"mnc.{k}", f"unknown field; expected one of {sorted(known)}")
    try:
        params = MncParams(**mnc)
        params.resolved_horizon(N)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{source}: mnc: {exc}") from None
    raw_sets, raw_ops = data.get("sets", {}), data.get("operators", {})
    _require(isinstance(raw_sets, dict), source, "sets", "need an object of named set expressions")
    _require(isinstance(raw_ops, dict), source, "operators", "need an object of named operators")
    for k in data:
        _require(k in ("schema", "algebra", "N", "seed", "mnc", "sets", "operators"), source, k, "unknown field")
    inst = Instance(AlgebraDesc(tuple(blocks)), N, seed, params, raw_sets, raw_ops, source)
    _resolve(inst)
    return inst


class _Lazy(dict):
    """Name table that parses entries on first access, detecting cycles."""

    def __init__(self, raw, parse, source, section):
        super().__init__()
        self.raw, self.parse, self.source, self.section = raw, parse, source, section
        self.active = set()

    def __contains__(self, name):
        return name in self.raw

    def __getitem__(self, name):
        if dict.__contains__(self, name):
            return dict.__getitem__(self, name)
        if name not in self.raw:
            raise InstanceError(f"{self.source}: {self.section}: unknown reference {name!r}")
        if name in self.active:
            raise InstanceError(f"{self.source}: {self.section}.{name}: circular reference")
        self.active.add(name)
        try:
            value = self.parse(self.raw[name])
        except InstanceError:
            raise
        except (KeyError, ValueError, TypeError, IndexError, ShapeError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
            raise InstanceError(f"{self.source}: {self.section}.{name}: {msg}") from None
        finally:
            self.active.discard(name)
        dict.__setitem__(self, name, value)
        return value


def _resolve(inst: Instance):
    ops = _Lazy(inst.raw_operators, lambda d: operator_from_json(inst.desc, inst.N, d, ops),
                inst.source, "operators")
    sets = _Lazy(inst.raw_sets, lambda d: expr_from_dict(d, inst.desc, inst.N, sets, ops),
                 inst.source, "sets")
    for name in inst.raw_operators:
        ops[name]
    for name in inst.raw_sets:
        sets[name]
    inst.operators, inst.sets = ops, sets


def load_instance(path: str | None) -> Instance:
    if path is None:
        return parse_instance(DEFAULT_INSTANCE, "<builtin>")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InstanceError(f"{path}: cannot read: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno} column {exc.colno}: invalid JSON: {exc.msg}") from None
    return parse_instance(data, path)


# output -----------------------------------------------------------------

def fmt(x) -> str:
    return f"{float(x):.12g}"


def _round(obj):
    """Round floats to 12 significant digits for JSON output."""
    if isinstance(obj, float) or isinstance(obj, np.floating):
        return float(fmt(obj)) if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit(args, payload: dict, text: list[str]):
    if getattr(args, "json", False):
        print(json.dumps(_round(payload), indent=2, sort_keys=True))
    else:
        print("\n".join(text))


def _seed(args, inst: Instance) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    if inst.seed is not None:
        return inst.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InstanceError(f"environment: {SEED_ENV}: not an integer: {env!r}") from None
    return 0


def _params(args, inst: Instance) -> MncParams:
    p = inst.mnc
    over = {"seed": _seed(args, inst)}
    if getattr(args, "seminorms", None) is not None:
        over["seminorms"] = args.seminorms
    if getattr(args, "samples", None) is not None:
        over["samples"] = args.samples
    return MncParams(**{**p.to_dict(), **over})


def _estimate_lines(e) -> list[str]:
    return [f"measure: {e.kind}", f"lower: {fmt(e.lower)}", f"upper: {fmt(e.upper)}",
            f"validity: {e.validity} (lower {e.lower_validity}, upper {e.upper_validity})"]


def _profile_lines(prof) -> list[str]:
    lines = ["profile: " + " ".join(fmt(v.hi) for v in prof.values)]
    if any(v.lo != v.hi for v in prof.values):
        lines.append("profile lower: " + " ".join(fmt(v.lo) for v in prof.values))
    lines += [f"estimate: {fmt(prof.estimate.hi)}", f"note: {prof.note}"]
    return lines


# commands ---------------------------------------------------------------

def cmd_lambda(args, inst):
    E = inst.get_set(args.set)
    if args.nmax is not None and not 0 <= args.nmax <= inst.N:
        raise InstanceError(f"--nmax: must lie in 0..{inst.N}")
    prof = lambda_profile(E, args.nmax, seed=_seed(args, inst))
    emit(args, {"set": args.set, **prof.to_dict()}, _profile_lines(prof))
    return 0


def cmd_bounds(args, inst):
    E = inst.get_set(args.set)
    params = _params(args, inst)
    if args.star:
        est = star_aggregate(E, args.measure, params)
    else:
        p = seminorm_stream(E, params, args.seminorm_index + 1)[args.seminorm_index]
        est = seminorm_mnc_bounds(E, p, args.measure, params)
    payload = {"set": args.set, "star": bool(args.star), "params": params.to_dict(), **est.to_dict()}
    payload.pop("details", None)
    emit(args, payload, _estimate_lines(est))
    return 0


def cmd_opnorm(args, inst):
    T = inst.get_operator(args.operator)
    emit(args, {"operator": args.operator, "norm": T.norm()}, [f"norm: {fmt(T.norm())}"])
    return 0


def cmd_opmnc(args, inst):
    T = inst.get_operator(args.operator)
    params = _params(args, inst)
    res = op_mnc(T, args.measure, params, n_max=args.nmax)
    if args.measure == "lambda0":
        emit(args, {"operator": args.operator, "measure": "lambda0", **res.to_dict()}, _profile_lines(res))
    else:
        payload = {"operator": args.operator, "params": params.to_dict(), **res.to_dict()}
        payload.pop("details", None)
        emit(args, payload, _estimate_lines(res))
    return 0


def cmd_witness(args, inst):
    E = inst.get_set(args.set)
    seed = _seed(args, inst)
    try:
        w = discrete_witness(E, args.eps, n_max=args.nmax, twist=args.twist, seed=seed,
                             max_points=args.max_points)
    except (PrecompactError, WitnessSearchError, WitnessCertificationError) as exc:
        raise NumericalFailure(f"{type(exc).__name__}: {exc}", f"witness {args.set} --eps {args.eps} --seed {seed}")
    except ValueError as exc:
        raise InstanceError(f"witness: {exc}") from None
    d = w.to_dict()
    if not args.trace:
        d.pop("trace")
        d.pop("seminorm")
    text = [f"points: {len(w.points)}", f"certified separation: {fmt(w.separation)}",
            f"min pairwise distance: {fmt(w.min_separation())}", f"delta: {fmt(w.delta)}",
            f"set norm: {fmt(w.set_norm)}", f"C1: {fmt(w.c1)}", f"C2: {fmt(w.c2)}",
            "cuts: " + " ".join(str(k) for k in w.cuts),
            f"istratescu lower bound: {fmt(w.istratescu_lower)}"]
    if args.trace:
        text += [json.dumps(_round(t), sort_keys=True) for t in w.trace]
    emit(args, {"set": args.set, **d}, text)
    return 0


def _suite_config(args, inst) -> SuiteConfig:
    kw = {"seed": _seed(args, inst)}
    if args.cases is not None:
        kw["cases"] = args.cases
        kw["exploration_cases"] = max(1, min(args.cases, SuiteConfig.exploration_cases))
    return SuiteConfig(**kw)


def cmd_verify(args, inst):
    report = run_suite(_suite_config(args, inst), args.suite)
    if getattr(args, "json", False):
        print(report.to_json(timings=False))
    else:
        print(report.table())
    return 0 if report.passed else 1


def cmd_report(args, inst):
    report = run_suite(_suite_config(args, inst), args.suite)
    out = report.to_json(args.timings) if args.format == "json" else report.to_csv(args.timings).rstrip("\n")
    print(out)
    return 0 if report.passed else 1


def cmd_instance(args, inst):
    print(inst.to_json())
    return 0


class NumericalFailure(Exception):
    def __init__(self, message: str, replay: str):
        super().__init__(message)
        self.replay = replay


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", metavar="FILE", default=argparse.SUPPRESS,
                        help="instance file (JSON); a built-in A = C, N = 8 instance otherwise")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help=f"master seed (default: instance seed, then ${SEED_ENV}, then 0)")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit JSON")

    ap = argparse.ArgumentParser(prog="hmnc", parents=[common],
                                 description="Noncompactness measures on A^N over a finite-dimensional C*-algebra.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambda", parents=[common], help="tail profile and lambda estimate of a set")
    p.add_argument("set")
    p.add_argument("--nmax", type=int)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("bounds", parents=[common], help="bracket a semi-norm measure of a set")
    p.add_argument("set")
    p.add_argument("--measure", choices=MEASURES, required=True)
    p.add_argument("--star", action="store_true", help="supremum over sampled semi-norms")
    p.add_argument("--seminorms", type=int, help="number of sampled semi-norms for --star")
    p.add_argument("--seminorm-index", type=int, default=0, help="which sampled semi-norm without --star")
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("opnorm", parents=[common], help="operator norm")
    p.add_argument("operator")
    p.set_defaults(func=cmd_opnorm)

    p = sub.add_parser("opmnc", parents=[common], help="measure of noncompactness of an operator")
    p.add_argument("operator")
    p.add_argument("--measure", choices=tuple(OPERATOR_MEASURES), required=True)
    p.add_argument("--nmax", type=int)
    p.add_argument("--seminorms", type=int)
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_opmnc)

    p = sub.add_parser("witness", parents=[common], help="separated sequence certifying an I* lower bound")
    p.add_argument("set")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--nmax", type=int)
    p.add_argument("--max-points", type=int)
    p.add_argument("--twist", action="store_true", help="rotate points so one state sees every segment")
    p.add_argument("--trace", action="store_true", help="include the construction trace")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", parents=[common], help="run the property suite")
    p.add_argument("--suite", choices=SELECTIONS, default="all")
    p.add_argument("--cases", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", parents=[common], help="run the property suite and emit a report")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--suite", choices=SELECTIONS, default="all")
    p.add_argument("--cases", type=int)
    p.add_argument("--timings", action="store_true", help="include elapsed times (not byte-stable)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("instance", parents=[common], help="print the normalised instance")
    p.set_defaults(func=cmd_instance)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        inst = load_instance(getattr(args, "instance", None))
        return args.func(args, inst)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}\nreplay: hmnc {exc.replay}", file=sys.stderr)
        return 3
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}\nreplay: hmnc {' '.join(argv or sys.argv[1:])}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
