"""Command-line entry point.

Results go to stdout as JSON (or CSV with ``--csv`` where a table exists).
Exit codes: 0 success, 1 infeasible input or failed constraint check,
2 usage error. Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .encoding import EncodingMatrix, check_constraints, random_unitary
from .errors import InfeasibleError, SingularQFIM
from .fisher import numerical_qfim, qcrb, qfim
from .protocol import MAX_ENHANCEMENT, run_protocol
from .schemes import (
    Scheme,
    n_mode_scheme,
    partition_modes,
    three_mode_scheme,
    two_mode_scheme,
)
from .simulate import (
    ExperimentConfig,
    curve_csv,
    ellipse_csv,
    ellipse_trace,
    enhancement_curve,
    run_experiment,
    run_individual_baseline,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, message: str, payload: dict):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive of ``hi``) or a comma-separated list."""
    if ":" not in text:
        return parse_floats(text)
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be lo:hi:step, got {text!r}")
    lo, hi, step = (float(v) for v in parts)
    if step <= 0 or hi < lo:
        raise UsageError(f"grid needs step > 0 and hi >= lo, got {text!r}")
    count = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, count).tolist()


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _load_encoding(args) -> EncodingMatrix:
    if not args.encoding:
        raise UsageError("--encoding is required")
    return EncodingMatrix.from_dict(_load_json(args.encoding))


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name.replace('_', '-')} is required")
    return value


def _params(args, count: int | None = None) -> list[float]:
    values = parse_floats(_need(args, "params"))
    if count is not None and len(values) != count:
        raise UsageError(f"--params needs {count} values, got {len(values)}")
    return values


def _build_scheme(kind: str, args) -> Scheme:
    if kind == "two":
        return two_mode_scheme(_need(args, "T"))
    if kind == "three":
        params = _params(args, 3)
        return three_mode_scheme(_need(args, "T1"), _need(args, "T2"), params[1], params[2])
    if kind == "n":
        if args.encoding:
            return n_mode_scheme(_load_encoding(args).entries)
        modes = _need(args, "modes")
        rng = np.random.default_rng(args.seed)
        return n_mode_scheme(random_unitary(modes, rng))
    return Scheme.from_dict(_load_json(kind))


def cmd_qfim(args):
    E = _load_encoding(args)
    F = numerical_qfim(E, _params(args, E.modes), args.step, args.richardson) if args.numerical else qfim(E)
    try:
        bound = qcrb(F, 1).tolist()
    except SingularQFIM:
        bound = None
    return {"qfim": F.matrix.tolist(), "eigenvalues": F.eigenvalues().tolist(), "qcrb": bound}


def cmd_check(args):
    report = check_constraints(_load_encoding(args), args.tol).to_dict()
    if not report["satisfied"]:
        raise CheckFailed("encoding violates the optimality constraints", report)
    return report


def cmd_scheme(args):
    scheme = _build_scheme(args.kind, args)
    out = {"scheme": scheme.to_dict()}
    if args.params:
        params = _params(args, scheme.modes)
        out["encoded"] = scheme.encode(params).tolist()
        out["output_means"] = scheme.output_means(params).tolist()
    return out


def cmd_simulate(args):
    scheme = _build_scheme(_need(args, "scheme"), args)
    config = ExperimentConfig(
        scheme, _params(args, scheme.modes), args.shots, args.trials, args.seed, workers=args.workers
    )
    return run_experiment(config).to_dict()


def cmd_baseline(args):
    result = run_individual_baseline(_need(args, "T"), _params(args, 2), args.shots, args.seed, args.trials)
    return result.to_dict()


def cmd_curve(args):
    params = _params(args, 2) if args.params else (2.0, 1.0)
    points = enhancement_curve(parse_grid(_need(args, "grid")), args.shots, args.seed, params)
    if args.csv:
        return curve_csv(points)
    return {
        "columns": ["T", "ratio_analytic", "ratio_empirical", "ci_low", "ci_high"],
        "rows": [[p.T, p.ratio_analytic, p.ratio_empirical, p.ci_low, p.ci_high] for p in points],
        "shots": args.shots,
        "seed": args.seed,
    }


def cmd_ellipse(args):
    a, b = _params(args, 2)
    rows = ellipse_trace(a, b, parse_grid(_need(args, "grid")))
    if args.csv:
        return ellipse_csv(rows)
    return {"columns": ["T", "x1", "p1", "x2", "p2"], "rows": [list(r) for r in rows]}


def cmd_protocol(args):
    given = parse_floats(_need(args, "given"))
    if args.max_enhancement and args.params:
        raise UsageError("give either --params or --max-enhancement")
    choice = MAX_ENHANCEMENT if args.max_enhancement else (_params(args, 2) if args.params else None)
    transcript = run_protocol(given, choice, args.shots, args.seed, args.trials)
    if args.transcript:
        Path(args.transcript).write_text(transcript.to_jsonl())
    return transcript.to_dict()


def cmd_partition(args):
    return {"modes": _need(args, "modes"), "blocks": [list(b) for b in partition_modes(args.modes)]}


COMMANDS = {
    "qfim": (cmd_qfim, "QFIM of an encoding (closed form or finite differences)"),
    "check": (cmd_check, "check the energy/precision/attainability constraints"),
    "scheme": (cmd_scheme, "build an optimal two-, three- or n-mode scheme"),
    "simulate": (cmd_simulate, "Monte Carlo run of a scheme"),
    "baseline": (cmd_baseline, "individual homodyne measurements without the beam splitter"),
    "curve": (cmd_curve, "enhancement ratio versus transmittance"),
    "ellipse": (cmd_ellipse, "phase-space points of the optimal two-mode family"),
    "protocol": (cmd_protocol, "settings negotiation for two given coherent states"),
    "partition": (cmd_partition, "split n modes into optimal pairs and a triple"),
}

CSV_COMMANDS = {"curve", "ellipse"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--encoding", help="encoding matrix JSON file")
    common.add_argument("--params", help="parameter values a,b[,c...]")
    common.add_argument("-T", type=float, help="beam-splitter transmittance")
    common.add_argument("--T1", type=float)
    common.add_argument("--T2", type=float)
    common.add_argument("--shots", type=int, default=100_000)
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--grid", help="lo:hi:step or comma-separated values")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--modes", type=int)
    common.add_argument("--csv", action="store_true")
    common.add_argument("--output", help="write the result here instead of stdout")

    parser = _Parser(prog="coherent-estimation", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "qfim":
            p.add_argument("--numerical", action="store_true", help="finite-difference oracle")
            p.add_argument("--step", type=float, default=1e-4)
            p.add_argument("--richardson", action="store_true", help="extrapolate over step and step/2")
        elif name == "scheme":
            p.add_argument("kind", choices=["two", "three", "n"])
        elif name == "simulate":
            p.add_argument("--scheme", help="two, three, n, or a scheme JSON file")
        elif name == "protocol":
            p.add_argument("--given", help="x1,p1,x2,p2 of the given states")
            p.add_argument("--max-enhancement", action="store_true")
            p.add_argument("--transcript", help="write the message log as JSON lines")
    return parser


def _emit(result, args) -> None:
    text = result if isinstance(result, str) else json.dumps(result, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _fail(kind: str, message: str, code: int, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.csv and args.command not in CSV_COMMANDS:
            raise UsageError(f"--csv is only available for {', '.join(sorted(CSV_COMMANDS))}")
        handler = COMMANDS[args.command][0]
        _emit(handler(args), args)
        return EXIT_OK
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except CheckFailed as exc:
        _emit(exc.payload, args)
        return _fail("constraint", str(exc), EXIT_FAILED, max_residual=exc.payload["max_residual"])
    except (InfeasibleError, SingularQFIM) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_FAILED)
    except ValueError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
