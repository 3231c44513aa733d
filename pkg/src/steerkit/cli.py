"""Command-line front end.

Inputs come from a YAML/JSON document (``--input``) and/or inline flags that
take YAML snippets, e.g.::

    steerkit overlap --spectrum "[1/3, 2/3]" --phi "[0.7071, 0.7071]"
    steerkit decompose --matrix "[[1/sqrt(3), 1/sqrt(3)], [1/sqrt(3), 0]]"

Complex entries are written as ``[re, im]`` pairs; scalar entries may be
plain numbers or small arithmetic expressions (``1/3``, ``sqrt(2)/2``).

Exit codes: 0 ok, 2 parse error, 3 invalid input, 4 zero-probability
request, 5 off-support steering request.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__
from .core_states import (
    NORM_TOL,
    PHASE_TOL,
    KetVector,
    SchmidtSpectrum,
    Side,
    generic_steer,
    inner_product,
    schmidt_decompose,
)
from .exceptions import InvariantError, OffSupportError, SteerkitError, ZeroProbabilityError
from .fr_scenario import compute_ok_probabilities
from .ladder import DEFAULT_MAX_STEPS, DEFAULT_RESIDUAL_TOL, fixed_point, run_ladder
from .min_overlap import brute_force_oracle, closed_form_min, optimal_phi, solve_by_reduction
from .steering import (
    classify_report,
    cross_overlap,
    mutual_overlap,
    steered_state,
    steering_state,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_ZERO_PROB = 4
EXIT_OFF_SUPPORT = 5

SEED_ENV = "STEERKIT_SEED"
DEFAULT_SAMPLES = 10_000


class ParseError(Exception):
    pass


# -- input parsing -----------------------------------------------------------

_BINOPS: dict[type, Callable[[Any, Any], Any]] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "cos": math.cos, "sin": math.sin, "log": math.log}
_NAMES = {"pi": math.pi, "e": math.e}


def _eval_node(node: ast.AST) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ParseError(f"unsupported expression element: {ast.dump(node)}")


def parse_real(value: Any) -> float:
    if isinstance(value, bool):
        raise ParseError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            tree = ast.parse(value.strip(), mode="eval")
            return float(_eval_node(tree.body))
        except (SyntaxError, ZeroDivisionError, ValueError, OverflowError) as exc:
            raise ParseError(f"cannot parse number {value!r}: {exc}") from exc
    raise ParseError(f"expected a number, got {value!r}")


def parse_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ParseError(f"complex entries are [re, im] pairs, got {value!r}")
        return complex(parse_real(value[0]), parse_real(value[1]))
    return complex(parse_real(value), 0.0)


def parse_vector(value: Any, name: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        raise ParseError(f"{name} must be a non-empty list")
    return np.array([parse_complex(v) for v in value], dtype=complex)


def parse_ket(value: Any, name: str) -> KetVector:
    """Parse and rescale to unit norm; kets are rays, so ``[1, 1]`` is accepted."""
    vec = parse_vector(value, name)
    if not np.all(np.isfinite(vec)) or np.linalg.norm(vec) == 0.0:
        raise InvariantError(f"{name} must be a finite non-zero vector")
    return KetVector.normalized(vec)


def parse_matrix(value: Any) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        raise ParseError("matrix must be a non-empty list of rows")
    rows = [parse_vector(r, "matrix row") for r in value]
    if len({r.size for r in rows}) != 1:
        raise ParseError("matrix rows must have equal length")
    return np.vstack(rows)


def parse_spectrum(value: Any, norm_tol: float) -> SchmidtSpectrum:
    if not isinstance(value, (list, tuple)) or len(value) == 0:
        raise ParseError("spectrum must be a non-empty list")
    p = np.array([parse_real(v) for v in value])
    if abs(p.sum() - 1.0) > norm_tol:
        raise InvariantError(f"spectrum sums to {float(p.sum())!r}, not 1 within {norm_tol}")
    return SchmidtSpectrum(p / p.sum())


@dataclass
class StateInput:
    spectrum: SchmidtSpectrum | None = None
    matrix: np.ndarray | None = None
    labels: list[str] | None = None
    raw: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.spectrum is None) == (self.matrix is None):
            raise ParseError("provide exactly one of 'spectrum' or 'matrix'")


def _load_yaml(text: str, what: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"cannot parse {what}: {exc}") from exc


def load_document(args: argparse.Namespace) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if args.input:
        if args.input == "-":
            text = sys.stdin.read()
        else:
            try:
                with open(args.input, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ParseError(f"cannot read {args.input}: {exc}") from exc
        loaded = _load_yaml(text, args.input)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ParseError("input document must be a mapping")
        doc.update(loaded)
    for key in ("spectrum", "matrix", "phi", "phi_prime", "psi0", "reports", "labels"):
        inline = getattr(args, key, None)
        if inline is not None:
            doc[key] = _load_yaml(inline, f"--{key.replace('_', '-')}")
    return doc


def state_input(doc: dict[str, Any], norm_tol: float) -> StateInput:
    has_s, has_m = doc.get("spectrum") is not None, doc.get("matrix") is not None
    if has_s == has_m:
        raise ParseError("provide exactly one of 'spectrum' or 'matrix'")
    labels = doc.get("labels")
    if has_s:
        return StateInput(spectrum=parse_spectrum(doc["spectrum"], norm_tol), labels=labels, raw=doc)
    return StateInput(matrix=parse_matrix(doc["matrix"]), labels=labels, raw=doc)


def require_spectrum(si: StateInput, command: str) -> SchmidtSpectrum:
    if si.spectrum is None:
        raise ParseError(f"'{command}' needs a 'spectrum' input")
    return si.spectrum


def require(doc: dict[str, Any], key: str) -> Any:
    if doc.get(key) is None:
        raise ParseError(f"missing required input '{key}'")
    return doc[key]


# -- output ------------------------------------------------------------------


def _round(x: float) -> float:
    return float(f"{x:.15g}")


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, KetVector):
        return to_jsonable(obj.amplitudes)
    if isinstance(obj, SchmidtSpectrum):
        return to_jsonable(obj.probs)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(obj.real), _round(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def _fmt_complex(z: complex) -> str:
    if z.imag == 0.0:
        return f"{z.real:.7g}"
    if z.real == 0.0:
        return f"{z.imag:.7g}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.7g}{sign}{abs(z.imag):.7g}i"


def format_human(obj: Any) -> str:
    if isinstance(obj, KetVector):
        return format_human(obj.amplitudes)
    if isinstance(obj, SchmidtSpectrum):
        return format_human(obj.probs)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "(" + ", ".join(format_human(v) for v in obj) + ")"
    if isinstance(obj, (complex, np.complexfloating)):
        return _fmt_complex(complex(obj))
    if isinstance(obj, (bool, np.bool_)):
        return str(bool(obj))
    if isinstance(obj, (float, np.floating)):
        return f"{float(obj):.7g}"
    if obj is None:
        return "-"
    return str(obj)


@dataclass
class RunReport:
    command: str
    inputs: dict[str, Any]
    outputs: dict[str, Any]
    seed: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    wall_time: float | None = None
    # Plot-ready per-step series; structured output only.
    columns: dict[str, list[float]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "tolerances": self.tolerances,
        }
        if self.columns:
            out["columns"] = self.columns
        if self.wall_time is not None:
            out["wall_time_s"] = self.wall_time
        return to_jsonable(out)

    def render_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def render_human(self) -> str:
        lines = [f"steerkit {self.command}"]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        for section in ("inputs", "outputs", "tolerances"):
            entries = getattr(self, section)
            if not entries:
                continue
            lines.append(f"{section}:")
            for k, v in entries.items():
                lines.append(f"  {k}: {format_human(v)}")
        if self.wall_time is not None:
            lines.append(f"wall time: {self.wall_time:.3f} s")
        return "\n".join(lines)


# -- commands ----------------------------------------------------------------


def _tolerances(args: argparse.Namespace, **extra: float) -> dict[str, float]:
    tol = {"compare": args.tol, "normalization": args.norm_tol}
    tol.update(extra)
    return tol


def cmd_decompose(args: argparse.Namespace, doc: dict[str, Any]) -> RunReport:
    si = state_input(doc, args.norm_tol)
    if si.matrix is None:
        raise ParseError("'decompose' needs a 'matrix' input")
    state = schmidt_decompose(si.matrix)
    m = state.spectrum.n
    outputs = {
        "spectrum": state.spectrum,
        "support": state.spectrum.support,
        "schmidt_vectors_A": state.basis_A[:, :m].T,
        "schmidt_vectors_B": state.basis_B[:, :m].T,
        "reassembly_error": float(np.max(np.abs(state.amplitude_matrix() - si.matrix / np.linalg.norm(si.matrix)))),
    }
    return RunReport("decompose", {"matrix": si.matrix}, outputs, tolerances=_tolerances(args))


def cmd_steer(args: argparse.Namespace, doc: dict[str, Any]) -> RunReport:
    si = state_input(doc, args.norm_tol)
    phi = parse_ket(require(doc, "phi"), "phi")
    if si.matrix is not None:
        state = schmidt_decompose(si.matrix)
        res = generic_steer(state, Side(args.side), phi)
        inputs = {"matrix": si.matrix, "side": args.side, "outcome": phi}
        outputs = {"remote_state": res.remote_state, "probability": res.probability}
        return RunReport("steer", inputs, outputs, tolerances=_tolerances(args))
    spectrum = si.spectrum
    left = steered_state(spectrum, phi)
    right = steering_state(spectrum, phi)
    outputs = {
        "chi_steered": left.remote_state,
        "P_beta": left.probability,
        "chi_steering": right.remote_state,
        "P_alpha": right.probability,
    }
    return RunReport("steer", {"spectrum": spectrum, "phi": phi}, outputs, tolerances=_tolerances(args))


def cmd_overlap(args: argparse.Namespace, doc: dict[str, Any]) -> RunReport:
    spectrum = require_spectrum(state_input(doc, args.norm_tol), "overlap")
    phi = parse_ket(require(doc, "phi"), "phi")
    left = steered_state(spectrum, phi)
    right = steering_state(spectrum, phi)
    outputs: dict[str, Any] = {
        "chi_steered": left.remote_state,
        "chi_steering": right.remote_state,
        "P_beta": left.probability,
        "P_alpha": right.probability,
        "overlap": mutual_overlap(spectrum, phi),
    }
    inputs: dict[str, Any] = {"spectrum": spectrum, "phi": phi}
    if doc.get("phi_prime") is not None:
        phi_prime = parse_ket(doc["phi_prime"], "phi_prime")
        inputs["phi_prime"] = phi_prime
        outputs["cross_overlap"] = cross_overlap(spectrum, phi, phi_prime)
        outputs["phi_prime_dot_phi"] = inner_product(phi_prime, phi)
    return RunReport("overlap", inputs, outputs, tolerances=_tolerances(args))


def cmd_min_overlap(args: argparse.Namespace, doc: dict[str, Any]) -> RunReport:
    si = state_input(doc, args.norm_tol)
    spectrum = si.spectrum if si.spectrum is not None else schmidt_decompose(si.matrix).spectrum
    closed = closed_form_min(spectrum)
    sol = solve_by_reduction(spectrum)
    oracle = brute_force_oracle(spectrum, args.samples, args.seed, workers=args.threads)
    t = sol.trace
    outputs = {
        "closed_form": closed,
        "optimal_phi": optimal_phi(spectrum, 0.0),
        "reduction_value": sol.value,
        "reduction_k0": t.k0,
        "reduction_k1": t.k1,
        "reduction_s_star": t.s_star,
        "reduction_a_star": t.a_star,
        "reduction_ratio_r": t.ratio_r,
        "K_min": list(t.K_min),
        "K_max": list(t.K_max),
        "reduction_phi": sol.optimal_phi,
        "reduction_alpha": sol.optimal_alpha,
        "oracle_value": oracle.value,
        "oracle_phi": oracle.argmin_phi,
        "reduction_minus_closed_form": sol.value - closed,
        "oracle_minus_closed_form": oracle.value - closed,
    }
    inputs = {"spectrum": spectrum, "samples": args.samples}
    return RunReport("min-overlap", inputs, outputs, seed=args.seed, tolerances=_tolerances(args))


def cmd_ladder(args: argparse.Namespace, doc: dict[str, Any]) -> RunReport:
    spectrum = require_spectrum(state_input(doc, args.norm_tol), "ladder")
    if doc.get("psi0") is None:
        psi0 = KetVector.normalized(np.ones(spectrum.n))
    else:
        psi0 = parse_ket(doc["psi0"], "psi0")
    trace = run_ladder(spectrum, psi0, max_steps=args.max_steps, residual_tol=args.residual_tol)
    outputs: dict[str, Any] = {
        "steps_taken": trace.steps_taken,
        "converged": trace.converged,
        "limit": trace.limit,
    }
    try:
        fp = fixed_point(spectrum, psi0)
    except ZeroProbabilityError as exc:
        outputs["fixed_point"] = None
        outputs["fixed_point_note"] = str(exc)
    else:
        outputs["fixed_point"] = fp
        outputs["limit_vs_fixed_point_defect"] = 1.0 - abs(inner_product(trace.limit, fp))
        outputs["limit_matches_fixed_point"] = abs(abs(inner_product(trace.limit, fp)) - 1.0) < args.tol
    inputs = {"spectrum": spectrum, "psi0": psi0, "max_steps": args.max_steps}
    tol = _tolerances(args, ladder_residual=args.residual_tol)
    columns = {"step": list(range(len(trace.residuals))), "residual": list(trace.residuals)}
    return RunReport("ladder", inputs, outputs, tolerances=tol, columns=columns)


def cmd_fr(args: argparse.Namespace, doc: dict[str, Any]) -> RunReport:
    table = compute_ok_probabilities()
    outputs: dict[str, Any] = {}
    for (label, ket), prob in zip(table.inference_chain, (None,) + table.chain_probabilities):
        key = label.lower().replace(" ", "_").replace("(", "").replace(")", "")
        outputs[f"chain_{key}"] = ket
        if prob is not None:
            outputs[f"chain_{key}_probability"] = prob
    outputs["p_ok_ok_quantum"] = table.p_ok_ok
    outputs["p_ok_ok_naive"] = table.p_naive
    for k, v in table.joint.items():
        outputs[f"P({k})"] = v
    outputs["outcome_total"] = sum(table.joint.values())
    return RunReport("fr", {}, outputs, tolerances=_tolerances(args))


def cmd_classify(args: argparse.Namespace, doc: dict[str, Any]) -> RunReport:
    spectrum = require_spectrum(state_input(doc, args.norm_tol), "classify")
    raw = require(doc, "reports")
    if not isinstance(raw, list) or not raw:
        raise ParseError("'reports' must be a non-empty list of vectors")
    reports = [parse_ket(r, f"reports[{i}]") for i, r in enumerate(raw)]
    verdict = classify_report(spectrum, reports, tol=args.tol)
    inputs = {"spectrum": spectrum, "reports": reports}
    return RunReport("classify", inputs, {"classification": verdict.value}, tolerances=_tolerances(args))


COMMANDS = {
    "decompose": (cmd_decompose, "Schmidt-decompose an amplitude matrix"),
    "steer": (cmd_steer, "steered/steering states (spectrum) or generic steering (matrix)"),
    "overlap": (cmd_overlap, "overlap of steered and steering states"),
    "min-overlap": (cmd_min_overlap, "minimum overlap: closed form, reduction and oracle"),
    "ladder": (cmd_ladder, "iterate the steering ladder to its fixed point"),
    "fr": (cmd_fr, "Frauchiger-Renner inference chain and probabilities"),
    "classify": (cmd_classify, "classify per-round state reports"),
}


def _seed_type(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a structured JSON document")
    common.add_argument("--seed", type=_seed_type, default=None, help=f"RNG seed (fallback: ${SEED_ENV}, then 0)")
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="oracle sample count")
    common.add_argument("--tol", type=float, default=PHASE_TOL, help="comparison tolerance")
    common.add_argument("--norm-tol", type=float, default=NORM_TOL, help="input normalization tolerance")
    common.add_argument("--threads", type=int, default=1, help="oracle worker threads (does not change results)")
    common.add_argument("--timing", action="store_true", help="include wall time in the report")
    common.add_argument("--input", "-i", help="YAML/JSON input document ('-' for stdin)")
    common.add_argument("--spectrum", help="Schmidt probabilities, ascending (YAML list)")
    common.add_argument("--matrix", help="amplitude matrix (YAML list of rows)")
    common.add_argument("--phi", help="Bob's state in the Schmidt basis (YAML list)")
    common.add_argument("--phi-prime", dest="phi_prime", help="second state for the cross overlap")
    common.add_argument("--psi0", help="ladder start state (default: uniform)")
    common.add_argument("--reports", help="reported states for classify (YAML list of vectors)")
    common.add_argument("--labels", help="optional basis labels (YAML list)")
    common.add_argument("--side", choices=["A", "B"], default="B", help="measured side for matrix steering")
    common.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    common.add_argument("--residual-tol", type=float, default=DEFAULT_RESIDUAL_TOL)

    parser = argparse.ArgumentParser(prog="steerkit", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"steerkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            args.seed = _seed_type(env) if env else 0
        except (ValueError, argparse.ArgumentTypeError):
            print(f"steerkit: invalid {SEED_ENV}={env!r}", file=sys.stderr)
            return EXIT_PARSE
    if args.samples < 1 or args.threads < 1 or args.max_steps < 0:
        print("steerkit: --samples and --threads must be >= 1, --max-steps >= 0", file=sys.stderr)
        return EXIT_PARSE

    handler = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        doc = load_document(args)
        report = handler(args, doc)
        if doc.get("labels") is not None:
            if not isinstance(doc["labels"], list):
                raise ParseError("'labels' must be a list")
            report.inputs["labels"] = [str(x) for x in doc["labels"]]
    except ParseError as exc:
        print(f"steerkit: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OffSupportError as exc:
        print(f"steerkit: off-support steering request: {exc}", file=sys.stderr)
        return EXIT_OFF_SUPPORT
    except ZeroProbabilityError as exc:
        print(f"steerkit: zero-probability request: {exc}", file=sys.stderr)
        return EXIT_ZERO_PROB
    except SteerkitError as exc:
        print(f"steerkit: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if args.timing:
        report.wall_time = time.perf_counter() - start

    print(report.render_json() if args.json else report.render_human())
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
