"""Command-line front end: solve, verify, fit.

Exit codes: 0 ok, 1 config/domain error, 2 not converged, 3 verification
violations found, 4 fit infeasible.  All reports are single-line JSON with
sorted keys, so identical configuration and seed reproduce byte-identical
output.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .contractions import (
    ContractionSpec,
    Family,
    MappingPair,
    contraction_rate,
    fit_constants,
    verify_sampled,
)
from .errors import ConefixError
from .ordered_space import ORTHANT_NORMAL_CONSTANT
from .pcm_core import check_axioms
from .solver import StopConfig, apriori_bound, solve, trace_records
from .spaces_catalog import (
    cos_deficit_third,
    get_entry,
    identity,
    make_l1_max_space,
    make_r2_max_space,
    make_r2_min_space,
    scale_map,
    sin_third,
    tan_third,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_VIOLATIONS = 3
EXIT_INFEASIBLE = 4

SEED_ENV_VAR = "CONEFIX_SEED"

_FAMILY_FLAGS = {
    "kannan": Family.KANNAN,
    "kannan-sym": Family.KANNAN,
    "reich": Family.REICH,
    "rational": Family.RATIONAL,
    "implicit": Family.IMPLICIT_LINEAR,
    "max": Family.MAX_TYPE,
}

INLINE_HELP = (
    "inline definition SPACE[/T-FORM[/S-FORM]]; spaces: r2max[:k], l1max[:dim], "
    "min-metric[:k]; maps: scale:c, tanthird, sinthird, cosform, identity "
    "(maps default to identity)"
)


class UsageError(ConefixError):
    """Bad flags, config, or inline form."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _make_map(form: str):
    name, _, arg = form.partition(":")
    if name == "scale":
        try:
            return scale_map(float(arg or "1"))
        except ValueError:
            raise UsageError(f"bad numeric parameter in map form '{form}'") from None
    if arg:
        raise UsageError(f"map form '{name}' takes no parameter")
    if name == "identity":
        return identity
    if name == "tanthird":
        return tan_third
    if name == "sinthird":
        return sin_third
    if name == "cosform":
        return cos_deficit_third
    raise UsageError(f"unknown map form '{form}'")


def _make_space(form: str):
    name, _, arg = form.partition(":")
    try:
        if name == "r2max":
            return make_r2_max_space(float(arg or "1"))
        if name == "l1max":
            return make_l1_max_space(int(arg or "8"))
        if name == "min-metric":
            return make_r2_min_space(float(arg or "1"))
    except ValueError:
        raise UsageError(f"bad numeric parameter in space form '{form}'") from None
    raise UsageError(f"unknown space form '{form}'")


def _resolve_target(args):
    """Entry id or inline form to (space, maps, default spec)."""
    if bool(args.entry) == bool(args.inline):
        raise UsageError("exactly one of --entry / --inline is required")
    if args.entry:
        entry = get_entry(args.entry)
        return entry.space, entry.maps, entry.spec
    parts = args.inline.split("/")
    if len(parts) > 3:
        raise UsageError("inline form has at most 3 segments: space/T/S")
    space = _make_space(parts[0])
    t_map = _make_map(parts[1]) if len(parts) > 1 else identity
    s_map = _make_map(parts[2]) if len(parts) > 2 else identity
    return space, MappingPair(T=t_map, S=s_map), None


def _spec_from_flags(args):
    if not args.family:
        return None
    family = _FAMILY_FLAGS[args.family]
    spec = ContractionSpec(
        family,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        s=args.s,
        r=args.r,
    )
    if args.family == "kannan-sym":
        spec = ContractionSpec(family, alpha=args.alpha, beta=args.alpha)
    return spec


def _parse_x0(text: str, space, rng):
    if text == "max":
        return space.upper.copy()
    if text == "zero":
        return np.zeros(space.point_dimension)
    if text == "rand":
        return rng.uniform(space.lower, space.upper)
    try:
        vals = [float(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"bad --x0 value '{text}'") from None
    if len(vals) == 1 and space.point_dimension > 1:
        vals = vals * space.point_dimension
    if len(vals) != space.point_dimension:
        raise UsageError(
            f"--x0 needs {space.point_dimension} coordinates, got {len(vals)}"
        )
    return np.array(vals)


def _finite_or_none(value):
    value = float(value)
    return value if np.isfinite(value) else None


def _vec(arr):
    return [float(c) for c in arr]


def _emit(doc, out_path=None):
    text = json.dumps(doc, sort_keys=True)
    print(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")


def _write_trace(result, path, fmt):
    records = trace_records(result)
    if fmt == "json-lines":
        with open(path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return
    small = result.trace.point_dimension <= 8
    header = ["n", "step_norm", "self_norm"]
    header += [f"p{i}" for i in range(result.trace.point_dimension)] if small else ["point_norm"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rec, step in zip(records, result.trace.steps):
            row = [rec["n"], repr(rec["step_norm"]), repr(rec["self_norm"])]
            if small:
                row += [repr(c) for c in rec["point"]]
            else:
                row.append(repr(step.point_norm))
            writer.writerow(row)


def cmd_solve(args) -> int:
    space, maps, spec = _resolve_target(args)
    flag_spec = _spec_from_flags(args)
    if flag_spec is not None:
        spec = flag_spec
    rng = np.random.default_rng(args.seed)
    x0 = _parse_x0(args.x0, space, rng)
    stop = StopConfig(tol=args.tol, max_iters=args.max_iters)
    result = solve(space, maps, x0, stop, spec)
    if args.out:
        _write_trace(result, args.out, args.format)
    doc = {
        "status": result.status,
        "iterations": result.iterations,
        "residual_T": _finite_or_none(result.residual_T),
        "residual_S": _finite_or_none(result.residual_S),
        "self_distance": float(result.self_distance),
        "x_star_norm": float(np.max(np.abs(result.x_star))),
    }
    if space.point_dimension <= 8:
        doc["x_star"] = _vec(result.x_star)
    if spec is not None:
        rate = contraction_rate(spec)
        first = result.trace.steps[0].step_norm if len(result.trace) else 0.0
        doc["rate"] = rate
        doc["apriori_bound"] = apriori_bound(
            rate, ORTHANT_NORMAL_CONSTANT, first, len(result.trace)
        )
    _emit(doc)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_verify(args) -> int:
    space, maps, spec = _resolve_target(args)
    if args.what == "axioms":
        report = check_axioms(space, sampler_seed=args.seed, n=args.n)
        doc = {
            "pass": report.ok,
            "samples": report.samples_checked,
            "violations": [
                {
                    "axiom": v.axiom,
                    "witness": [_vec(w) for w in v.witness],
                    "slack": _vec(v.slack),
                }
                for v in report.violations
            ],
        }
        _emit(doc, args.out)
        return EXIT_OK if report.ok else EXIT_VIOLATIONS
    flag_spec = _spec_from_flags(args)
    if flag_spec is not None:
        spec = flag_spec
    if spec is None:
        raise UsageError("contraction verification needs --family or a catalog entry")
    cert = verify_sampled(spec, space, maps, sampler_seed=args.seed, n=args.n)
    doc = {
        "pass": cert.ok,
        "samples": cert.samples_checked,
        "violations": [
            {"x": _vec(v.x), "y": _vec(v.y), "slack": _vec(v.slack)}
            for v in cert.violations
        ],
        "worst_slack": cert.worst_slack,
    }
    _emit(doc, args.out)
    return EXIT_OK if cert.ok else EXIT_VIOLATIONS


def cmd_fit(args) -> int:
    space, maps, _ = _resolve_target(args)
    if not args.family:
        raise UsageError("--family is required for fit")
    if args.family == "implicit":
        raise UsageError("unsupported family for fitting")
    family = _FAMILY_FLAGS[args.family]
    spec = fit_constants(
        family,
        space,
        maps,
        sampler_seed=args.seed,
        n=args.n,
        symmetric=args.family.endswith("-sym"),
    )
    if spec is None:
        _emit({"family": family.value, "infeasible": True}, args.out)
        return EXIT_INFEASIBLE
    doc = {
        "family": spec.family.value,
        "alpha": spec.alpha,
        "beta": spec.beta,
        "gamma": spec.gamma,
        "s": spec.s,
        "r": spec.r,
        "rate": contraction_rate(spec),
    }
    _emit(doc, args.out)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="conefix",
        description="Fixed points of mapping pairs on partial cone metric spaces: "
        "solve, verify, and fit contraction constants.",
        epilog="Config file: flat 'key = value' lines using the long flag names "
        "(e.g. 'tol = 1e-8'); flags override the file.  CONEFIX_SEED sets the "
        "default seed.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_n):
        p.add_argument("--entry", help="catalog entry id")
        p.add_argument("--inline", help=INLINE_HELP)
        p.add_argument("--seed", type=int, default=None,
                       help=f"sampler seed (default: ${SEED_ENV_VAR} or 0)")
        p.add_argument("-n", type=int, default=default_n, dest="n",
                       help="sample count")
        p.add_argument("--family",
                       choices=sorted(_FAMILY_FLAGS),
                       help="contraction family (kannan-sym ties alpha=beta)")
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--beta", type=float, default=0.0)
        p.add_argument("--gamma", type=float, default=0.0)
        p.add_argument("--s", type=float, default=0.0)
        p.add_argument("--r", type=float, default=0.0)
        p.add_argument("--out", help="write the trace (solve) or report to this path")
        p.add_argument("--format", choices=("json-lines", "csv"), default="json-lines")
        p.add_argument("--config", help="flat key=value config file; flags override")

    p_solve = sub.add_parser("solve", help="run the alternating iteration")
    common(p_solve, 1000)
    p_solve.add_argument("--x0", default="max",
                         help="start point: scalar, comma vector, max, zero, or rand")
    p_solve.add_argument("--tol", type=float, default=1e-10)
    p_solve.add_argument("--max-iters", type=int, default=100_000, dest="max_iters")

    p_verify = sub.add_parser("verify", help="sampled axiom or contraction checks")
    common(p_verify, 10_000)
    p_verify.add_argument("--what", choices=("axioms", "contraction"), required=True)

    p_fit = sub.add_parser("fit", help="fit minimal contraction constants")
    common(p_fit, 1024)
    return parser


_CONFIG_TYPES = {
    "entry": str,
    "inline": str,
    "x0": str,
    "tol": float,
    "max_iters": int,
    "seed": int,
    "n": int,
    "family": str,
    "alpha": float,
    "beta": float,
    "gamma": float,
    "s": float,
    "r": float,
    "out": str,
    "format": str,
    "what": str,
}


def _load_config(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                dest = key.strip().replace("-", "_")
                if dest not in _CONFIG_TYPES:
                    raise UsageError(f"{path}:{lineno}: unknown config key '{key.strip()}'")
                try:
                    values[dest] = _CONFIG_TYPES[dest](val.strip())
                except ValueError:
                    raise UsageError(
                        f"{path}:{lineno}: bad value for '{key.strip()}'"
                    ) from None
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    return values


def _flag_present(argv, dest: str) -> bool:
    flags = {f"--{dest}", f"--{dest.replace('_', '-')}"}
    if dest == "n":
        flags.add("-n")
    for token in argv:
        name = token.split("=", 1)[0]
        if name in flags:
            return True
    return False


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            for dest, value in _load_config(args.config).items():
                if hasattr(args, dest) and not _flag_present(argv, dest):
                    setattr(args, dest, value)
        if args.seed is None:
            raw = os.environ.get(SEED_ENV_VAR, "0")
            try:
                args.seed = int(raw)
            except ValueError:
                raise UsageError(f"bad {SEED_ENV_VAR} value '{raw}'") from None
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_fit(args)
    except ConefixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # downstream consumer closed the pipe; not an error of ours
        try:
            sys.stdout.close()
        except OSError:
            pass
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
