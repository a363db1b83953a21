"""``esd-lab`` command line interface.

Exit codes: 0 success, 1 Monte Carlo validation failed, 2 bad input data,
3 bad flags, 4 unsupported state/model combination.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from esdlab import channels, measures, stochastic
from esdlab.channels import DephasingRates
from esdlab.errors import NonPhysicalStateError
from esdlab.qmat import DensityMatrix, XState, as_x_state, embed, x_state

EXIT_OK, EXIT_FAIL, EXIT_DATA, EXIT_FLAGS, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4

CSV_HEADER = "t,concurrence,negativity,re_rho14,re_rho23"
FIG1_CASES = {
    "I": x_state(1 / 3, 1 / 6, 1 / 6, 1 / 3, w=1 / 3, z=0),
    "II": x_state(1 / 3, 0, 1 / 3, 1 / 3, w=1 / 6, z=0),
}
MIN_RELIABLE_TRAJECTORIES = 1000


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def fmt(value: float) -> str:
    return format(float(value), ".17g")


# --- state files -----------------------------------------------------------

def _complex(node, where: str) -> complex:
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return complex(node)
    if isinstance(node, dict) and set(node) <= {"re", "im"} and "re" in node:
        try:
            return complex(float(node["re"]), float(node.get("im", 0.0)))
        except (TypeError, ValueError):
            pass
    raise CliError(EXIT_DATA, f"{where}: expected a number or {{re, im}} pair")


def parse_state(doc) -> DensityMatrix:
    """Build a density matrix from a parsed state document."""
    if not isinstance(doc, dict):
        raise CliError(EXIT_DATA, "state file must hold an object")
    keys = {"x_state", "matrix"} & set(doc)
    if len(keys) != 1:
        raise CliError(EXIT_DATA, "state file needs exactly one of 'x_state' or 'matrix'")
    try:
        if "x_state" in doc:
            p = doc["x_state"]
            if not isinstance(p, dict):
                raise CliError(EXIT_DATA, "x_state must be an object")
            missing = [k for k in "abcd" if k not in p]
            if missing:
                raise CliError(EXIT_DATA, f"x_state is missing {', '.join(missing)}")
            try:
                pops = [float(p[k]) for k in "abcd"]
            except (TypeError, ValueError):
                raise CliError(EXIT_DATA, "x_state populations must be numbers") from None
            w = _complex(p.get("w", 0.0), "x_state.w")
            z = _complex(p.get("z", 0.0), "x_state.z")
            return embed(XState(*pops, w=w, z=z))
        rows = doc["matrix"]
        if not (isinstance(rows, list) and len(rows) == 4
                and all(isinstance(r, list) and len(r) == 4 for r in rows)):
            raise CliError(EXIT_DATA, "matrix must be a 4x4 array")
        m = np.array([[_complex(v, f"matrix[{i}][{j}]") for j, v in enumerate(r)]
                      for i, r in enumerate(rows)])
        return DensityMatrix(m)
    except NonPhysicalStateError as exc:
        raise CliError(EXIT_DATA, f"invalid state ({exc.branch}): {exc}") from None


def load_state(path: str) -> DensityMatrix:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_DATA, f"cannot read state file: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_DATA, f"state file is not valid JSON: {exc}") from None
    return parse_state(doc)


def state_document(rho, **meta) -> dict:
    m = np.asarray(rho)
    doc = {"matrix": [[{"re": float(v.real), "im": float(v.imag)} for v in row] for row in m]}
    if meta:
        doc["meta"] = meta
    return doc


# --- shared flag handling --------------------------------------------------

def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("global", "local"), default="global")
    p.add_argument("--gamma", type=float, help="collective dephasing rate")
    p.add_argument("--gamma-a", type=float, help="dephasing rate of qubit A")
    p.add_argument("--gamma-b", type=float, help="dephasing rate of qubit B")
    p.add_argument("--units", choices=("gammat", "seconds"), default="gammat",
                   help="gammat: times are reference-rate * t; seconds: rates in Hz")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output path (default: stdout)")


def resolve_rates(args) -> DephasingRates:
    """Turn the rate flags into DephasingRates, rejecting conflicts with exit 3."""
    seconds = args.units == "seconds"
    try:
        if args.model == "global":
            if args.gamma_a is not None or args.gamma_b is not None:
                raise CliError(EXIT_FLAGS, "--gamma-a/--gamma-b conflict with --model global; use --gamma")
            if args.gamma is None and seconds:
                raise CliError(EXIT_FLAGS, "--units seconds requires an explicit --gamma")
            rates = DephasingRates.global_(1.0 if args.gamma is None else args.gamma)
        else:
            if args.gamma is not None:
                raise CliError(EXIT_FLAGS, "--gamma conflicts with --model local; use --gamma-a/--gamma-b")
            if seconds and (args.gamma_a is None or args.gamma_b is None):
                raise CliError(EXIT_FLAGS, "--units seconds requires explicit --gamma-a and --gamma-b")
            rates = DephasingRates.local(
                1.0 if args.gamma_a is None else args.gamma_a,
                1.0 if args.gamma_b is None else args.gamma_b)
    except ValueError as exc:
        raise CliError(EXIT_FLAGS, str(exc)) from None
    if not seconds and rates.reference_rate <= 0:
        raise CliError(EXIT_FLAGS, "--units gammat needs a positive rate")
    return rates


def time_scale(args, rates: DephasingRates) -> float:
    """Factor converting a physical time into the displayed time unit."""
    return 1.0 if args.units == "seconds" else rates.reference_rate


def _check_time(name: str, value: float) -> None:
    if not (math.isfinite(value) and value >= 0):
        raise CliError(EXIT_FLAGS, f"{name} must be a finite non-negative number")


def evolve_state(rho: DensityMatrix, t: float, rates: DephasingRates) -> DensityMatrix:
    x = as_x_state(rho)
    if x is not None:
        return embed(channels.evolve_x_state(x, t, rates))
    return channels.evolve(rho, t, rates)


def concurrence_of(rho: DensityMatrix) -> float:
    x = as_x_state(rho)
    if x is not None:
        return measures.concurrence_x_state(x).value
    return measures.concurrence_general(rho).value


class _Output:
    def __init__(self, path: str | None, stdout: TextIO):
        self.path, self.stdout = path, stdout

    def __enter__(self) -> TextIO:
        if self.path is None:
            return self.stdout
        self._fh = open(self.path, "w", encoding="utf-8", newline="\n")
        return self._fh

    def __exit__(self, *exc):
        if self.path is not None:
            self._fh.close()


# --- commands --------------------------------------------------------------

def cmd_evolve(args, out: TextIO) -> int:
    rates = resolve_rates(args)
    _check_time("--t", args.t)
    rho = load_state(args.state)
    t = args.t / time_scale(args, rates)
    evolved = evolve_state(rho, t, rates)
    doc = state_document(evolved, model=rates.model, t=args.t, units=args.units)
    with _Output(args.out, out) as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def curve_rows(rho: DensityMatrix, rates: DephasingRates, times: np.ndarray, scale: float):
    for shown in times:
        evolved = evolve_state(rho, shown / scale, rates)
        yield (shown, concurrence_of(evolved), measures.negativity(evolved),
               evolved[0, 3].real, evolved[1, 2].real)


def write_curve(fh: TextIO, rows) -> None:
    fh.write(CSV_HEADER + "\n")
    for row in rows:
        fh.write(",".join(fmt(v) for v in row) + "\n")


def cmd_curve(args, out: TextIO) -> int:
    rates = resolve_rates(args)
    if args.steps < 2:
        raise CliError(EXIT_FLAGS, "--steps must be at least 2")
    if not (math.isfinite(args.t_max) and args.t_max > 0):
        raise CliError(EXIT_FLAGS, "--t-max must be positive")
    rho = load_state(args.state)
    times = np.linspace(0.0, args.t_max, args.steps)
    with _Output(args.out, out) as fh:
        write_curve(fh, curve_rows(rho, rates, times, time_scale(args, rates)))
    return EXIT_OK


def esd_document(x: XState, rates: DephasingRates) -> dict:
    report = measures.esd_time(x, rates)
    ref = rates.reference_rate
    horizon = 20.0 / ref
    if report.finite:
        horizon = max(horizon, 2 * report.t_c)
    numeric = measures.esd_time_numeric(
        measures.concurrence_curve(x, rates), horizon, 1e-9 / ref)
    return {
        "model": rates.model,
        "rates": ({"gamma": rates.gamma} if rates.model == "global"
                  else {"gamma_a": rates.gamma_a, "gamma_b": rates.gamma_b}),
        "classification": report.classification.value,
        "binding_branch": report.binding_branch,
        "t_c": report.t_c,
        "gamma_t_c": None if report.t_c is None else ref * report.t_c,
        "numeric": {
            "classification": numeric.classification.value,
            "t_c": numeric.t_c,
            "gamma_t_c": None if numeric.t_c is None else ref * numeric.t_c,
            "horizon_gamma_t": ref * horizon,
            "tolerance_gamma_t": 1e-9,
        },
    }


def cmd_esd(args, out: TextIO) -> int:
    rates = resolve_rates(args)
    rho = load_state(args.state)
    x = as_x_state(rho)
    if x is None:
        raise CliError(EXIT_UNSUPPORTED, "ESD times are defined for standard-form (X) states only")
    if rates.reference_rate <= 0:
        raise CliError(EXIT_UNSUPPORTED, "no dephasing: every rate is zero")
    if rates.model == "global" and x.z != 0:
        raise CliError(
            EXIT_UNSUPPORTED,
            "z != 0 under global noise: the |+-><-+| coherence lies in a decoherence-free "
            "subspace and never decays, so no death time exists on that branch")
    doc = esd_document(x, rates)
    with _Output(args.out, out) as fh:
        fh.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _element_table(report: stochastic.ComparisonReport) -> list[str]:
    lines = [f"{'element':<10}{'estimate':>24}{'prediction':>24}{'stderr':>24}{'z':>12}"]
    for i in range(4):
        for j in range(4):
            for part, z, se in (("re", report.z_re, report.stderr_re),
                                ("im", report.z_im, report.stderr_im)):
                est = getattr(report.estimate[i, j], "real" if part == "re" else "imag")
                pred = getattr(report.predicted[i, j], "real" if part == "re" else "imag")
                lines.append(f"{part}(r{i + 1}{j + 1}){'':<3}{fmt(est):>24}{fmt(pred):>24}"
                             f"{fmt(se[i, j]):>24}{z[i, j]:>12.4f}")
    return lines


def cmd_validate(args, out: TextIO) -> int:
    rates = resolve_rates(args)
    _check_time("--t", args.t)
    if args.trajectories < 1:
        raise CliError(EXIT_FLAGS, "--trajectories must be at least 1")
    if not 0 <= args.seed < 2 ** 64:
        raise CliError(EXIT_FLAGS, "--seed must be an unsigned 64-bit integer")
    if args.workers < 1:
        raise CliError(EXIT_FLAGS, "--workers must be at least 1")
    if args.trajectories < MIN_RELIABLE_TRAJECTORIES:
        print(f"warning: {args.trajectories} trajectories is below "
              f"{MIN_RELIABLE_TRAJECTORIES}; 5-sigma bounds are unreliable", file=sys.stderr)
    rho = load_state(args.state) if args.state else embed(FIG1_CASES["I"])
    t = args.t / time_scale(args, rates)
    cfg = stochastic.StochasticConfig(rates, args.trajectories, seed=args.seed,
                                      mode=args.mode, workers=args.workers)
    est = stochastic.ensemble_evolve(rho, t, cfg)
    predicted = channels.evolve(rho, t, rates)
    report = stochastic.compare_to_channel(est, predicted)
    lines = [
        f"model: {rates.model}",
        f"t ({args.units}): {fmt(args.t)}",
        f"trajectories: {args.trajectories}",
        f"seed: {args.seed}",
        f"mode: {args.mode}",
        *_element_table(report),
        f"max z: {report.max_z:.4f} (threshold {report.threshold:g})",
        "PASS" if report.passed else "FAIL",
    ]
    with _Output(args.out, out) as fh:
        fh.write("\n".join(lines) + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_fig1(args, out: TextIO) -> int:
    directory = Path(args.out or ".")
    directory.mkdir(parents=True, exist_ok=True)
    rates = DephasingRates.global_(1.0)
    times = np.linspace(0.0, 2.0, 401)
    for name, x in FIG1_CASES.items():
        path = directory / f"fig1_case_{name}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            write_curve(fh, curve_rows(embed(x), rates, times, 1.0))
        out.write(f"wrote {path}\n")
    t_c = measures.esd_time_global(FIG1_CASES["I"], 1.0).t_c
    out.write(f"case I analytic gamma*t_c = {fmt(t_c)}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="esd-lab", description=(
        "Two-qubit entanglement under classical dephasing noise."))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="evolve a state to time --t")
    p.add_argument("state", help="state file (JSON), or - for stdin")
    _add_model_flags(p)
    p.add_argument("--t", type=float, required=True)
    _add_out(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("curve", help="concurrence curve as CSV")
    p.add_argument("state")
    _add_model_flags(p)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=201)
    _add_out(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("esd", help="entanglement sudden death report")
    p.add_argument("state")
    _add_model_flags(p)
    _add_out(p)
    p.set_defaults(func=cmd_esd)

    p = sub.add_parser("validate", help="Monte Carlo check of the Kraus channel")
    p.add_argument("state", nargs="?", help="state file (default: the case I reference state)")
    _add_model_flags(p)
    p.add_argument("--t", type=float, default=0.35)
    p.add_argument("--trajectories", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--mode", choices=("exact", "euler"), default="exact")
    _add_out(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fig1", help="write the case I and case II reference concurrence curves")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.set_defaults(func=cmd_fig1)
    return parser


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, stdout or sys.stdout)
    except CliError as exc:
        print(f"esd-lab: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"esd-lab: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
