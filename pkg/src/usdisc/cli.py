"""Command-line front end.

    usdisc check       ensemble.json [--tol X]
    usdisc optimize    ensemble.json [--equal-p | --oracle] [--tol X] [--resolution H]
    usdisc measure     ensemble.json [--shots N] [--seed S] [--threads T] [--tol X] [--cond-probs P1,P2,..]
    usdisc concentrate schmidt.json  [--shots N] [--seed S] [--threads T]
    usdisc bounds      ensemble.json [--tradeoff-samples K]

One JSON document is written to stdout. Exit status is 0 on success, 1 for
dependent, infeasible or otherwise unusable input, 2 when the input cannot be
read or parsed.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import bounds
from .concentration import apply_concentration, load_schmidt
from .ensemble import INDEPENDENCE_TOL, check_independence, load_ensemble, reciprocal_states
from .errors import InvalidInput, USDError
from .measurement import build_measurement, outcome_distribution
from .optimizer import jaeger_shimony, optimize
from .simulator import simulate, simulate_concentration

log = logging.getLogger("usdisc")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PARSE = 2

SIGNIFICANT_DIGITS = 12


def round_sig(x: float) -> float:
    if not math.isfinite(x) or x == 0.0:
        return float(x)
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def to_jsonable(obj):
    """Recursively convert numpy values; floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": round_sig(obj.real), "im": round_sig(obj.imag)}
    return obj


# Output schemas, one per subcommand, plus the error envelope.
_NUM = {"type": "number"}
_COMPLEX = {
    "type": "object",
    "properties": {"re": _NUM, "im": _NUM},
    "required": ["re", "im"],
    "additionalProperties": False,
}
_SIM = {
    "type": "object",
    "properties": {
        "shots": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "generator": {"type": "string"},
        "outcome_labels": {"type": "array", "items": {"type": "string"}},
        "tallies": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "error_count": {"type": "integer", "minimum": 0},
        "empirical_P_D": _NUM,
    },
    "required": ["shots", "seed", "generator", "outcome_labels", "tallies", "error_count", "empirical_P_D"],
}
_OPT = {
    "type": "object",
    "properties": {
        "method": {"enum": ["two-state-closed-form", "equal-p", "general-iterative", "grid-oracle"]},
        "P_D": _NUM,
        "P_I": _NUM,
        "cond_probs": {"type": "array", "items": _NUM},
        "boundary_eigenvalue": _NUM,
    },
    "required": ["method", "P_D", "P_I", "cond_probs", "boundary_eigenvalue"],
}
SCHEMAS = {
    "check": {
        "type": "object",
        "properties": {
            "independent": {"type": "boolean"},
            "smallest_gram_eigenvalue": _NUM,
            "largest_gram_eigenvalue": _NUM,
            "gram_eigenvalues": {"type": "array", "items": _NUM},
            "tolerance": _NUM,
            "n": {"type": "integer"},
            "dim": {"type": "integer"},
        },
        "required": ["independent", "smallest_gram_eigenvalue", "largest_gram_eigenvalue", "gram_eigenvalues"],
    },
    "optimize": _OPT,
    "measure": {
        "type": "object",
        "properties": {
            "optimization": _OPT,
            "cond_probs": {"type": "array", "items": _NUM},
            "outcome_probabilities": {"type": "array", "items": {"type": "array", "items": _NUM}},
            "completeness_residual": _NUM,
            "simulation": _SIM,
        },
        "required": ["cond_probs", "outcome_probabilities", "completeness_residual", "simulation"],
    },
    "concentrate": {
        "type": "object",
        "properties": {
            "P_C": _NUM,
            "failure_prob": _NUM,
            "success_weights": {"type": "array", "items": _NUM},
            "failure_weights": {"anyOf": [{"type": "null"}, {"type": "array", "items": _NUM}]},
            "failure_schmidt_rank": {"type": "integer"},
            "orthogonalisation_op": {"type": "array", "items": {"type": "array", "items": _COMPLEX}},
            "simulation": _SIM,
        },
        "required": ["P_C", "failure_prob", "success_weights", "failure_weights", "orthogonalisation_op"],
    },
    "bounds": {
        "type": "object",
        "properties": {
            "overlap": _NUM,
            "P_IDP": _NUM,
            "helstrom": _NUM,
            "jaeger_shimony_P_I": _NUM,
            "tradeoff": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"P_I": _NUM, "P_E": _NUM},
                    "required": ["P_I", "P_E"],
                },
            },
        },
        "required": ["overlap", "P_IDP", "helstrom", "tradeoff"],
    },
    "error": {
        "type": "object",
        "properties": {
            "error": {
                "type": "object",
                "properties": {"kind": {"type": "string"}, "detail": {"type": "string"}},
                "required": ["kind", "detail"],
            }
        },
        "required": ["error"],
    },
}


class ParseFailure(Exception):
    """Input file missing, unreadable or not matching its schema."""

    def __init__(self, kind: str, detail: str):
        super().__init__(detail)
        self.kind = kind
        self.detail = detail


def _load(loader, path):
    try:
        return loader(path)
    except FileNotFoundError as exc:
        raise ParseFailure("FileNotFound", str(exc)) from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseFailure("Unreadable", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseFailure("MalformedJSON", str(exc)) from exc
    except InvalidInput as exc:
        raise ParseFailure("InvalidInput", str(exc)) from exc


def cmd_check(args) -> tuple[dict, int]:
    ens = _load(load_ensemble, args.input)
    rep = check_independence(ens, args.tol)
    out = {
        "independent": rep.independent,
        "smallest_gram_eigenvalue": rep.smallest_eigenvalue,
        "largest_gram_eigenvalue": rep.largest_eigenvalue,
        "gram_eigenvalues": rep.eigenvalues,
        "tolerance": rep.rel_tol,
        "n": ens.n,
        "dim": ens.dim,
    }
    return out, EXIT_OK if rep.independent else EXIT_INPUT


def _method(args) -> str | None:
    if getattr(args, "oracle", False):
        return "grid-oracle"
    if getattr(args, "equal_p", False):
        return "equal-p"
    return None


def _resolution(args, n: int) -> float:
    if getattr(args, "resolution", None) is not None:
        return args.resolution
    return 1e-3 if n <= 3 else 2e-2


def cmd_optimize(args) -> tuple[dict, int]:
    ens = _load(load_ensemble, args.input)
    res = optimize(ens, _method(args), rel_tol=args.tol, resolution=_resolution(args, ens.n))
    return res.to_json(), EXIT_OK


def cmd_measure(args) -> tuple[dict, int]:
    ens = _load(load_ensemble, args.input)
    recip = reciprocal_states(ens, args.tol)
    out = {}
    if args.cond_probs is None:
        res = optimize(ens, rel_tol=args.tol)
        out["optimization"] = res.to_json()
        cond_probs = res.cond_probs
    else:
        cond_probs = args.cond_probs
    m = build_measurement(ens, recip, cond_probs)
    out["cond_probs"] = m.cond_probs
    out["outcome_probabilities"] = outcome_distribution(m, ens).probs
    out["completeness_residual"] = m.completeness_residual()
    out["simulation"] = simulate(m, ens, args.shots, args.seed, args.threads).to_json()
    return out, EXIT_OK


def cmd_concentrate(args) -> tuple[dict, int]:
    state = _load(load_schmidt, args.input)
    out = apply_concentration(state).to_json()
    if args.shots is not None:
        out["simulation"] = simulate_concentration(state, args.shots, args.seed, args.threads).to_json()
    return out, EXIT_OK


def cmd_bounds(args) -> tuple[dict, int]:
    ens = _load(load_ensemble, args.input)
    c = bounds.pair_overlap(ens)
    out = {
        "overlap": c,
        "P_IDP": bounds.idp_bound(ens),
        "helstrom": bounds.helstrom_bound(c),
        "tradeoff": [{"P_I": pi, "P_E": pe} for pi, pe in bounds.tradeoff_curve(c, args.tradeoff_samples)],
    }
    if c < 1.0:
        out["jaeger_shimony_P_I"] = jaeger_shimony(ens).inconclusive_prob
    return out, EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usdisc", description="Unambiguous state discrimination toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", help="input JSON file")
        p.set_defaults(func=func)
        return p

    p = add("check", cmd_check, "Gram spectrum and linear-independence verdict")
    p.add_argument("--tol", type=float, default=INDEPENDENCE_TOL)

    p = add("optimize", cmd_optimize, "optimal conditional probabilities")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--equal-p", action="store_true", help="restrict to equal conditional probabilities")
    group.add_argument("--oracle", action="store_true", help="brute-force grid search")
    p.add_argument("--resolution", type=float, default=None, help="grid spacing for --oracle")
    p.add_argument("--tol", type=float, default=INDEPENDENCE_TOL)

    p = add("measure", cmd_measure, "build the optimal measurement and simulate it")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tol", type=float, default=INDEPENDENCE_TOL)
    p.add_argument(
        "--cond-probs", type=_float_list, default=None, metavar="P1,P2,...",
        help="use these conditional probabilities instead of the optimum",
    )

    p = add("concentrate", cmd_concentrate, "entanglement concentration of a Schmidt state")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=1)

    p = add("bounds", cmd_bounds, "two-state IDP, Helstrom and error/inconclusive tradeoff")
    p.add_argument("--tradeoff-samples", type=int, default=11)
    return parser


def _error(kind: str, detail: str) -> dict:
    return {"error": {"kind": kind, "detail": detail}}


def run(argv=None, stdout=None) -> int:
    """Parse ``argv``, dispatch, print one JSON document and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if not exc.code:
            return EXIT_OK
        stdout.write(json.dumps(_error("UsageError", "invalid command line; see --help")) + "\n")
        return EXIT_PARSE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)

    try:
        out, code = args.func(args)
    except ParseFailure as exc:
        log.error("%s: %s", exc.kind, exc.detail)
        out, code = _error(exc.kind, exc.detail), EXIT_PARSE
    except USDError as exc:
        log.error("%s: %s", exc.kind, exc)
        out, code = _error(exc.kind, str(exc)), EXIT_INPUT
    except ValueError as exc:
        log.error("%s", exc)
        out, code = _error("InvalidArgument", str(exc)), EXIT_INPUT
    stdout.write(json.dumps(to_jsonable(out)) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
