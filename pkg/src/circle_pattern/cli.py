"""Command-line front end: ``circle-pattern {check,solve,flow,compare,bigon}``.

Every subcommand prints one JSON object on stdout with sorted keys and
floats at 17 significant digits.  Exit codes:

    0  success (including zero targets)
    1  input error: unreadable or invalid files, wrong target length,
       target class not accepted by the chosen method
    2  infeasible target
    3  support too large for exhaustive classification
    4  ``compare``: mixed and reduced answers differ by more than 1e-6
    5  solver failure (time/iteration budget, line search, singular Jacobian)
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from .bigon import bigon
from .complex import CellComplex, ComplexError, load_complex
from .curvature import curvature_from_k
from .feasibility import INFEASIBLE, STRATUM, ZERO, SupportTooLargeError, classify_target
from .flows import (
    ConvergenceError,
    FlowOptions,
    InvalidTargetError,
    SingularJacobianError,
    embed,
    flow_interior,
    flow_mixed,
    flow_reduced,
    newton_solve,
)
from .generators import random_start
from .integrate import StepSizeError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_SUPPORT_CAP = 3
EXIT_DISCREPANCY = 4
EXIT_BUDGET = 5

COMPARE_TOL = 1e-6

log = logging.getLogger("circle_pattern.cli")


class InputError(Exception):
    pass


class Infeasible(Exception):
    def __init__(self, target_class):
        super().__init__("infeasible target")
        self.target_class = target_class


def dumps(obj) -> str:
    """Compact JSON with sorted keys and ``%.17g`` floats; non-finite floats become null."""
    if isinstance(obj, dict):
        items = (json.dumps(str(k)) + ":" + dumps(obj[k]) for k in sorted(obj))
        return "{" + ",".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        # keep floats visibly floats
        return s if any(ch in s for ch in ".en") else s + ".0"
    return json.dumps(obj)


def read_target(value: str, n: int) -> np.ndarray:
    """Target from a JSON file path, or inline when ``value`` starts with ``[``."""
    text = value if value.lstrip().startswith("[") else _read(value)
    try:
        values = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"target is not valid JSON: {exc}") from exc
    if not isinstance(values, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    ):
        raise InputError("target must be a JSON array of numbers")
    L = np.array(values, dtype=float)
    if L.shape != (n,):
        raise InputError(f"target must have {n} entries, got {L.size}")
    if not np.all(np.isfinite(L)) or np.any(L < 0):
        raise InputError("target entries must be finite and non-negative")
    return L


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load(args) -> tuple[CellComplex, np.ndarray]:
    if args.complex is None or args.target is None:
        raise InputError("--complex and --target are required")
    try:
        complex = load_complex(args.complex)
    except OSError as exc:
        raise InputError(f"cannot read {args.complex}: {exc.strerror or exc}") from exc
    except ComplexError as exc:
        raise InputError(str(exc)) from exc
    return complex, read_target(args.target, complex.num_faces)


def _options(args) -> FlowOptions:
    try:
        return FlowOptions() if args.tol is None else FlowOptions(residual_tol=args.tol)
    except ValueError as exc:
        raise InputError(f"--tol: {exc}") from exc


def _classify(complex, L):
    tc = classify_target(complex, L)
    if tc.kind == INFEASIBLE:
        raise Infeasible(tc)
    return tc


def _start(args, n: int) -> np.ndarray:
    if args.seed is None:
        return np.ones(n)
    return random_start(np.random.default_rng(args.seed), n)


def _state_report(complex, k) -> dict:
    k = np.asarray(k, dtype=float)
    L = curvature_from_k(complex, k)
    L[k == 0.0] = 0.0
    return {"k_final": k, "r_final": np.arctan2(1.0, k), "L_final": L}


def _zero_report(complex) -> dict:
    out = _state_report(complex, np.zeros(complex.num_faces))
    out.update(residual=0.0, iterations=0, steps=0)
    return out


def _write_trace(trace, path):
    if path is None:
        return None
    with open(path, "w", encoding="utf-8", newline="") as fh:
        trace.write_csv(fh)
    return str(path)


def cmd_check(args) -> tuple[dict, int]:
    complex, L = _load(args)
    tc = classify_target(complex, L)
    return tc.to_dict(), EXIT_INFEASIBLE if tc.kind == INFEASIBLE else EXIT_OK


def cmd_solve(args) -> tuple[dict, int]:
    complex, L = _load(args)
    tc = _classify(complex, L)
    K0 = None if args.seed is None else np.log(_start(args, complex.num_faces))
    result = newton_solve(complex, L, K0, _options(args))
    out = _state_report(complex, result.k)
    out.update(residual=result.residual, iterations=result.iterations)
    out["class"] = tc.kind
    return out, EXIT_OK


def _run_flow(kind, complex, L, tc, k0, opts):
    """Returns ``(trace, k_full)`` for the named flow."""
    if kind == "interior":
        return flow_interior(complex, L, k0, opts)
    if kind == "mixed":
        return flow_mixed(complex, L, k0, opts)
    sup = list(tc.support)
    if tc.kind != STRATUM:
        raise InvalidTargetError(f"reduced flow requires target class stratum, got {tc.kind}", tc)
    trace, k_sup = flow_reduced(complex, sup, L[sup], k0[sup], opts)
    return trace, embed(complex, sup, k_sup)


def cmd_flow(args) -> tuple[dict, int]:
    complex, L = _load(args)
    tc = _classify(complex, L)
    if tc.kind == ZERO:
        out = _zero_report(complex)
    else:
        trace, k = _run_flow(args.flow, complex, L, tc, _start(args, complex.num_faces),
                             _options(args))
        out = _state_report(complex, k)
        out.update(residual=trace.final.residual, steps=trace.steps,
                   trace=_write_trace(trace, args.trace))
    out.update({"class": tc.kind, "flow": args.flow})
    return out, EXIT_OK


def cmd_compare(args) -> tuple[dict, int]:
    complex, L = _load(args)
    tc = _classify(complex, L)
    if tc.kind == ZERO:
        out = _zero_report(complex)
        out.update({"class": tc.kind, "discrepancy": 0.0})
        return out, EXIT_OK
    if tc.kind != STRATUM:
        raise InvalidTargetError(f"compare requires target class stratum, got {tc.kind}", tc)
    k0 = _start(args, complex.num_faces)
    opts = _options(args)
    trace_m, k_m = _run_flow("mixed", complex, L, tc, k0, opts)
    trace_r, k_r = _run_flow("reduced", complex, L, tc, k0, opts)
    gap = float(np.max(np.abs(k_m - k_r)))
    out = _state_report(complex, k_m)
    out.update({
        "class": tc.kind,
        "k_reduced": k_r,
        "discrepancy": gap,
        "residual": trace_m.final.residual,
        "steps": trace_m.steps,
        "steps_reduced": trace_r.steps,
        "trace": _write_trace(trace_m, args.trace),
    })
    return out, EXIT_OK if gap <= COMPARE_TOL else EXIT_DISCREPANCY


def cmd_bigon(args) -> tuple[dict, int]:
    try:
        return bigon(args.r1, args.r2, args.phi).to_dict(), EXIT_OK
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--complex", metavar="PATH", help="cell complex JSON file")
    common.add_argument("--target", metavar="PATH|JSON",
                        help="target file, or an inline array such as '[1.5, 0.3]'")
    common.add_argument("--trace", metavar="PATH", help="write the flow trace as CSV")
    common.add_argument("--tol", type=float, help="residual tolerance (inf-norm)")
    common.add_argument("--seed", type=int, help="draw a random start from this seed")
    common.add_argument("--flow", choices=("interior", "mixed", "reduced"), default="interior")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="circle-pattern",
        description="Spherical circle pattern metrics with prescribed total geodesic curvature.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="classify a target").set_defaults(fn=cmd_check)
    sub.add_parser("solve", parents=[common], help="damped Newton solve").set_defaults(fn=cmd_solve)
    sub.add_parser("flow", parents=[common], help="integrate a curvature flow").set_defaults(
        fn=cmd_flow)
    sub.add_parser("compare", parents=[common],
                   help="mixed vs reduced flow on a stratum target").set_defaults(fn=cmd_compare)
    p = sub.add_parser("bigon", parents=[common], help="geometry of a single bigon")
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.set_defaults(fn=cmd_bigon)
    return parser


def run(argv=None) -> tuple[dict, int]:
    """Parse ``argv`` and dispatch; returns ``(report, exit_code)`` without printing."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        out, code = args.fn(args)
    except InputError as exc:
        out, code = {"error": str(exc)}, EXIT_INPUT
    except Infeasible as exc:
        out, code = exc.target_class.to_dict(), EXIT_INFEASIBLE
        out["error"] = "infeasible target"
    except SupportTooLargeError as exc:
        out, code = {"error": str(exc)}, EXIT_SUPPORT_CAP
    except InvalidTargetError as exc:
        out, code = {"error": str(exc)}, EXIT_INPUT
    except (ConvergenceError, StepSizeError, SingularJacobianError) as exc:
        out, code = {"error": str(exc)}, EXIT_BUDGET
    out["command"] = args.command
    if args.command != "bigon":
        out["wall_time"] = time.perf_counter() - t0
    return out, code


def main(argv=None) -> int:
    out, code = run(argv)
    stream = sys.stdout
    stream.write(dumps(out) + "\n")
    if "error" in out:
        log.error("%s", out["error"])
    return code


if __name__ == "__main__":
    sys.exit(main())
