"""Command-line front end.

Every JSON document carries ``schema_version`` and the fully resolved
``config``; CSV output starts with a ``#``-prefixed JSON line holding the
same header. Exit codes: 0 success, 2 invalid input, 3 internal
inconsistency (a closed-form separability verdict that disagrees with PPT).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import asdict
from typing import Any

import numpy as np

from . import __version__
from .config import DEFAULT, Config
from .correlations import discord, left_zero_condition_closed_form, zero_discord_certify
from .discrimination import (
    equal_overlap_optimal,
    equal_overlap_region,
    optimal_probability,
    run_monte_carlo,
    success_probability_d,
    success_probability_parameterized,
)
from .ensembles import ProtocolState, build_d_state, build_two_state
from .errors import Infeasible, UnsupportedDimension, USDError
from .matrixcore import DensityMatrix
from .separability import d_state_condition, ppt_test, two_state_condition, verdict

SCHEMA_VERSION = "usdiscord/1"
EXIT_OK, EXIT_INVALID, EXIT_INCONSISTENT = 0, 2, 3

_FIELDS = {
    "two_state": {"kind", "p_plus", "p_minus", "alpha", "alpha_plus"},
    "d_state": {"kind", "priors", "alphas"},
    "density_matrix": {"kind", "dims", "matrix"},
    "overlaps": {"kind", "priors", "overlaps"},
}


class InputError(USDError):
    pass


class Inconsistency(Exception):
    def __init__(self, message: str, payload: dict):
        super().__init__(message)
        self.payload = payload


def parse_complex(obj: Any, where: str) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        raise InputError(f"{where}: complex numbers are objects {{re, im}}")
    if not isinstance(obj, dict) or set(obj) != {"re", "im"}:
        raise InputError(f"{where}: expected exactly the fields re, im")
    re, im = obj["re"], obj["im"]
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
        raise InputError(f"{where}: re and im must be numbers")
    return complex(float(re), float(im))


def encode_complex(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _number(obj: Any, where: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise InputError(f"{where}: expected a number")
    return float(obj)


def _number_list(obj: Any, where: str) -> list[float]:
    if not isinstance(obj, list):
        raise InputError(f"{where}: expected a list")
    return [_number(v, f"{where}[{k}]") for k, v in enumerate(obj)]


def parse_spec(spec: Any) -> dict:
    """Validate an input document strictly; returns it with complex fields decoded."""
    if not isinstance(spec, dict):
        raise InputError("input must be a JSON object")
    kind = spec.get("kind")
    if kind not in _FIELDS:
        raise InputError(f"kind must be one of {sorted(_FIELDS)}")
    keys = set(spec)
    if keys - _FIELDS[kind]:
        raise InputError(f"unknown fields for {kind}: {sorted(keys - _FIELDS[kind])}")
    if _FIELDS[kind] - keys:
        raise InputError(f"missing fields for {kind}: {sorted(_FIELDS[kind] - keys)}")
    out: dict = {"kind": kind}
    if kind == "two_state":
        out["p_plus"] = _number(spec["p_plus"], "p_plus")
        out["p_minus"] = _number(spec["p_minus"], "p_minus")
        out["alpha"] = parse_complex(spec["alpha"], "alpha")
        out["alpha_plus"] = parse_complex(spec["alpha_plus"], "alpha_plus")
    elif kind == "d_state":
        out["priors"] = _number_list(spec["priors"], "priors")
        if not isinstance(spec["alphas"], list):
            raise InputError("alphas: expected a list")
        out["alphas"] = [parse_complex(a, f"alphas[{k}]") for k, a in enumerate(spec["alphas"])]
    elif kind == "overlaps":
        out["priors"] = _number_list(spec["priors"], "priors")
        if not isinstance(spec["overlaps"], list):
            raise InputError("overlaps: expected a list")
        out["overlaps"] = [parse_complex(a, f"overlaps[{k}]") for k, a in enumerate(spec["overlaps"])]
    else:
        dims = spec["dims"]
        if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(x, int) and x > 0 for x in dims)):
            raise InputError("dims: expected two positive integers")
        rows = spec["matrix"]
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise InputError("matrix: expected a list of rows")
        out["dims"] = tuple(dims)
        out["matrix"] = np.array(
            [[parse_complex(z, f"matrix[{i}][{j}]") for j, z in enumerate(r)] for i, r in enumerate(rows)]
        )
    return out


def encode_spec(spec: dict) -> dict:
    out: dict = {}
    for key, value in spec.items():
        if isinstance(value, complex):
            out[key] = encode_complex(value)
        elif key in ("alphas", "overlaps"):
            out[key] = [encode_complex(z) for z in value]
        elif key == "matrix":
            out[key] = [[encode_complex(z) for z in row] for row in value]
        elif key == "dims":
            out[key] = list(value)
        else:
            out[key] = value
    return out


def state_from_spec(spec: dict) -> ProtocolState | DensityMatrix:
    kind = spec["kind"]
    if kind == "two_state":
        return build_two_state(spec["p_plus"], spec["p_minus"], spec["alpha"], spec["alpha_plus"])
    if kind == "d_state":
        return build_d_state(spec["priors"], spec["alphas"])
    if kind == "density_matrix":
        return DensityMatrix(spec["matrix"], spec["dims"])
    raise InputError(f"kind {kind!r} does not describe a state")


def checksum(rho: DensityMatrix) -> str:
    """sha256 of the entries printed to 12 significant decimals (stable across platforms)."""
    parts = []
    for z in rho.mat.ravel():
        parts.append(f"{z.real + 0.0:.12e},{z.imag + 0.0:.12e}")
    return hashlib.sha256(";".join(parts).encode()).hexdigest()


def _matrix_of(state) -> DensityMatrix:
    return state.rho if isinstance(state, ProtocolState) else state


def _discord_entry(rho: DensityMatrix, side: str, cfg: Config) -> dict:
    try:
        return discord(rho, side, cfg).to_dict()
    except UnsupportedDimension as exc:
        ok, res = zero_discord_certify(rho, side, cfg.tol)
        return {"side": side, "discord": None, "unsupported": str(exc), "zero_certified": ok, "commutator_residual": res}


def cmd_analyze(spec: dict, cfg: Config) -> dict:
    state = state_from_spec(spec)
    rho = _matrix_of(state)
    result: dict = {"dims": list(rho.dims), "checksum": checksum(rho)}
    if isinstance(state, ProtocolState):
        ens = state.ensemble
        result["success_probability"] = success_probability_d(ens.priors, ens.alphas)
        v = verdict(state, cfg.tol)
        result["separability"] = v.to_dict()
        conditions = {"d_state": list(d_state_condition(ens, cfg.tol))}
        if ens.d == 2:
            conditions["two_state"] = list(two_state_condition(ens, cfg.tol))
        lz = left_zero_condition_closed_form(ens, cfg.tol)
        conditions["left_zero"] = {
            "holds": lz.holds,
            "equal_success_weights": lz.equal_success_weights,
            "weights_residual": lz.weights_residual,
            "separable": lz.separable,
        }
        result["conditions"] = conditions
    else:
        ok, w = ppt_test(rho, cfg.tol)
        result["separability"] = {"ppt": ok, "min_pt_eigenvalue": w}
    result["discord"] = {side: _discord_entry(rho, side, cfg) for side in ("left", "right")}
    if isinstance(state, ProtocolState) and not result["separability"]["consistent"]:
        raise Inconsistency("closed-form separability condition disagrees with the PPT test", result)
    return result


def cmd_discord(spec: dict, cfg: Config, side: str) -> dict:
    rho = _matrix_of(state_from_spec(spec))
    sides = ("left", "right") if side == "both" else (side,)
    out = {}
    for s in sides:
        try:
            out[s] = discord(rho, s, cfg).to_dict()
        except UnsupportedDimension as exc:
            raise InputError(str(exc)) from exc
    return out


def cmd_ppt(spec: dict, cfg: Config) -> dict:
    state = state_from_spec(spec)
    if isinstance(state, ProtocolState):
        v = verdict(state, cfg.tol)
        if not v.consistent:
            raise Inconsistency("closed-form separability condition disagrees with the PPT test", v.to_dict())
        return v.to_dict()
    ok, w = ppt_test(state, cfg.tol)
    return {"ppt": ok, "min_pt_eigenvalue": w}


def _overlap_inputs(spec: dict) -> tuple[list[float], list[complex]]:
    if spec["kind"] != "overlaps":
        raise InputError("this command needs an input of kind 'overlaps'")
    return spec["priors"], spec["overlaps"]


def cmd_optimal(spec: dict) -> dict:
    priors, overlaps = _overlap_inputs(spec)
    return optimal_probability(priors, overlaps).to_dict()


def parse_grid(text: str) -> tuple[str, float, float, int]:
    """``<axis>:<start>:<stop>:<num>`` with axis ``gamma`` or ``alpha1``."""
    try:
        axis, start, stop, num = text.split(":")
        start_f, stop_f, num_i = float(start), float(stop), int(num)
    except ValueError as exc:
        raise InputError(f"grid {text!r} is not <axis>:<start>:<stop>:<num>") from exc
    if axis not in ("gamma", "alpha1"):
        raise InputError("grid axis must be gamma or alpha1")
    if not (0.0 <= start_f <= 1.0 and 0.0 <= stop_f <= 1.0) or start_f > stop_f or num_i < 1:
        raise InputError("grid bounds must satisfy 0 <= start <= stop <= 1 and num >= 1")
    return axis, start_f, stop_f, num_i


GAMMA_COLUMNS = ["d", "gamma", "region", "alpha1_opt", "P_opt"]
ALPHA1_COLUMNS = ["d", "alpha1", "feasible", "P"]


def cmd_sweep(grid: str, d: int | None, spec: dict | None) -> tuple[list[str], list[list]]:
    axis, start, stop, num = parse_grid(grid)
    values = np.linspace(start, stop, num)
    if axis == "gamma":
        if d is None or d < 2:
            raise InputError("gamma sweeps need --d >= 2")
        rows = []
        for g in values:
            region, a1 = equal_overlap_region(d, g)
            rows.append([d, float(g), region, float(a1), float(equal_overlap_optimal(d, g))])
        return GAMMA_COLUMNS, rows
    if spec is None:
        raise InputError("alpha1 sweeps need an overlaps input")
    priors, overlaps = _overlap_inputs(spec)
    rows = []
    for x in values:
        try:
            rows.append([len(priors), float(x), True, success_probability_parameterized(x, priors, overlaps)])
        except Infeasible:
            rows.append([len(priors), float(x), False, float("nan")])
    return ALPHA1_COLUMNS, rows


def cmd_montecarlo(spec: dict, trials: int, seed: int, workers: int) -> dict:
    if trials < 1:
        raise InputError("trials must be >= 1")
    if workers < 1:
        raise InputError("workers must be >= 1")
    state = state_from_spec(spec)
    if not isinstance(state, ProtocolState):
        raise InputError("montecarlo needs a two_state or d_state input")
    stats = run_monte_carlo(state, trials, seed, workers)
    out = stats.to_dict()
    out["analytic_probability"] = success_probability_d(state.ensemble.priors, state.ensemble.alphas)
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usdiscord", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        src = p.add_mutually_exclusive_group(required=needs_input)
        src.add_argument("--input", help="path to a JSON input document")
        src.add_argument("--inline", help="JSON input document given inline")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--tol", type=float, help="override the condition/PPT/commutator tolerances")
        p.add_argument("--seed", type=int, default=0)
        return p

    common(sub.add_parser("analyze", help="full correlation and separability report"))
    p = common(sub.add_parser("discord", help="optimized discord"))
    p.add_argument("--side", choices=["left", "right", "both"], default="both")
    common(sub.add_parser("ppt", help="PPT verdict"))
    common(sub.add_parser("optimal", help="optimal success probability"))
    p = common(sub.add_parser("sweep", help="P_opt over a gamma or alpha1 grid"), needs_input=False)
    p.set_defaults(format="csv")
    p.add_argument("--grid", required=True, help="<gamma|alpha1>:<start>:<stop>:<num>")
    p.add_argument("--d", type=int)
    p = common(sub.add_parser("montecarlo", help="seeded protocol simulation"))
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _load_input(args) -> tuple[dict | None, Any]:
    if args.inline is None and args.input is None:
        return None, None
    try:
        if args.inline is not None:
            raw = json.loads(args.inline)
        else:
            with open(args.input, encoding="utf-8") as fh:
                raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read input: {exc}") from exc
    spec = parse_spec(raw)
    return spec, encode_spec(spec)


def _resolved_config(args, cfg: Config, echoed_input) -> dict:
    conf = {"command": args.command, "input": echoed_input, "format": args.format, "seed": args.seed}
    for name in ("side", "grid", "d", "trials", "workers"):
        if hasattr(args, name):
            conf[name] = getattr(args, name)
    conf["tolerances"] = asdict(cfg.tol)
    conf["optimizer"] = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg.optimizer).items()}
    return conf


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_doc(header: dict, **body) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "config": header, **body}, allow_nan=True) + "\n"


def _csv_doc(header: dict, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps({"schema_version": SCHEMA_VERSION, "config": header}) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _flatten(result: dict) -> tuple[list[str], list[list]]:
    """Single-row CSV view of a JSON result: dotted keys, scalars only."""
    flat: dict = {}

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(obj, list):
            for k, v in enumerate(obj):
                walk(f"{prefix}.{k}", v)
        else:
            flat[prefix] = obj

    walk("", result)
    return list(flat), [list(flat.values())]


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK

    cfg = DEFAULT
    header: dict = {"command": args.command}
    try:
        if args.tol is not None:
            if not args.tol > 0:
                raise InputError("--tol must be positive")
            cfg = cfg.with_tol(condition=args.tol, ppt=args.tol, commutator=args.tol)
        spec, echoed = _load_input(args)
        header = _resolved_config(args, cfg, echoed)
        cmd = args.command
        if cmd == "analyze":
            result = cmd_analyze(spec, cfg)
        elif cmd == "discord":
            result = cmd_discord(spec, cfg, args.side)
        elif cmd == "ppt":
            result = cmd_ppt(spec, cfg)
        elif cmd == "optimal":
            result = cmd_optimal(spec)
        elif cmd == "sweep":
            columns, rows = cmd_sweep(args.grid, args.d, spec)
            if args.format == "csv":
                _emit(_csv_doc(header, columns, rows), args.out)
            else:
                _emit(_json_doc(header, result={"columns": columns, "rows": rows}), args.out)
            return EXIT_OK
        elif cmd == "montecarlo":
            result = cmd_montecarlo(spec, args.trials, args.seed, args.workers)
        else:  # pragma: no cover - argparse restricts choices
            raise InputError(f"unknown command {cmd}")
    except Inconsistency as exc:
        _emit(_json_doc(header, error={"type": "Inconsistency", "message": str(exc)}, result=exc.payload), args.out)
        return EXIT_INCONSISTENT
    except (USDError, ValueError) as exc:
        _emit(_json_doc(header, error={"type": type(exc).__name__, "message": str(exc)}), args.out)
        return EXIT_INVALID

    if args.format == "csv":
        columns, rows = _flatten(result)
        _emit(_csv_doc(header, columns, rows), args.out)
    else:
        _emit(_json_doc(header, result=result), args.out)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
