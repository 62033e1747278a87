"""
Batch front-end::

    spikelab <task> --config <file> [--out <dir>] [--seed <u64>]

Exit codes: 0 on success, 2 for invalid input (config schema, expression
syntax, violated preconditions), 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from spikelab import __version__
from spikelab.auxiliary import (
    ProblemData,
    build_problem,
    constants,
    gamma,
    halfspace_mass,
    sigma,
    sigma_bar,
)
from spikelab.config import RunConfig, Task, build_domain, load_config
from spikelab.errors import NumericalError, PreconditionError
from spikelab.expansion import (
    QuadratureSettings,
    verify_expansion,
    verify_gradient_expansion,
    verify_proposition,
)
from spikelab.geometry import BoundaryPoint, project_to_boundary, sample_boundary
from spikelab.groundstate import profile_summary, save_profile, solve_ground_state
from spikelab.logging_config import bind_run, configure_logging, get_logger
from spikelab.predictor import Function, predict_concentration, scan_landscape

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

GRAMMAR_HELP = """\
J, V and implicit domains are expressions in x1..xN:
  expr    := term (("+" | "-") term)*
  term    := unary (("*" | "/") unary)*
  unary   := "-" unary | "+" unary | power
  power   := atom ("^" unary)?
  atom    := number | variable | func "(" expr ")" | "(" expr ")"
  func    := "exp" | "sin" | "cos" | "sqrt"
"""


def _builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__}")


class OutputWriter:
    """Writes JSON reports and CSV tables stamped with the config hash."""

    def __init__(self, directory: Path, config_hash: str) -> None:
        self.directory = directory
        self.config_hash = config_hash
        self.written: List[Path] = []
        directory.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.directory / name
        body = dict(payload, config_sha256=self.config_hash)
        path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_builtin) + "\n")
        self.written.append(path)
        return path

    def csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
        path = self.directory / name
        with path.open("w", newline="") as fh:
            fh.write(f"# config_sha256={self.config_hash}\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        self.written.append(path)
        return path


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _settings(config: RunConfig) -> QuadratureSettings:
    return QuadratureSettings(radius=config.quadrature.radius, depth=config.quadrature.depth)


def _problem(config: RunConfig) -> ProblemData:
    return build_problem(
        config.N,
        config.p,
        build_domain(config.domain, config.N),
        config.J,
        config.V,
        tol=config.tolerances.ground_state,
        assumption_samples=config.samples.assumptions,
        constancy_samples=config.samples.constancy,
        constancy_threshold=config.tolerances.boundary_constancy,
        seed=config.seed,
    )


def _anchor(config: RunConfig, data: ProblemData) -> BoundaryPoint:
    log = get_logger("cli")
    if config.point is None:
        q = sample_boundary(data.domain, 1, seed=config.seed)[0]
        log.info("anchor_sampled", Q=q.point.tolist())
        return q
    q = project_to_boundary(data.domain, config.point)
    log.info(
        "anchor_projected",
        requested=list(config.point),
        Q=q.point.tolist(),
        distance=float(np.linalg.norm(q.point - np.asarray(config.point))),
    )
    return q


def _landscape_function(config: RunConfig, data: ProblemData) -> Function:
    if config.function != "auto":
        return Function(config.function.upper())
    func = Function.SIGMA_BAR if data.is_boundary_constant("GAMMA") else Function.GAMMA
    get_logger("cli").info(
        "landscape_dispatch",
        function=func.value,
        gamma_variation=data.boundary_variation["GAMMA"],
        threshold=data.constancy_threshold,
    )
    return func


def run_ground_state(config: RunConfig, out: OutputWriter) -> None:
    profile = solve_ground_state(config.N, config.p, config.tolerances.ground_state)
    csv_path, json_path = save_profile(profile, out.directory / "profile", out.config_hash)
    out.written += [csv_path, json_path]
    out.json("profile_summary.json", profile_summary(profile))


def run_constants(config: RunConfig, out: OutputWriter) -> None:
    data = _problem(config)
    q = _anchor(config, data)
    payload: Dict[str, Any] = {
        "Q": q.as_dict(),
        "constants": constants(data, q).as_dict(),
        "gamma": gamma(data, q),
        "sigma": sigma(data, q),
        "halfspace_mass": halfspace_mass(data.profile),
        "profile": profile_summary(data.profile),
        "boundary_variation": data.boundary_variation,
    }
    if data.is_boundary_constant("J") and data.is_boundary_constant("V"):
        payload["sigma_bar"] = sigma_bar(data, q)
    out.json("constants.json", payload)


def run_landscape(config: RunConfig, out: OutputWriter) -> None:
    data = _problem(config)
    func = _landscape_function(config, data)
    rows = scan_landscape(data, func, config.samples.boundary, seed=config.seed)
    coords = [f"x{i + 1}" for i in range(config.N)]
    out.csv(
        "landscape.csv",
        coords + ["H", "value", "gamma", "sigma_bar"],
        [
            list(row.point.point) + [row.point.mean_curvature, row.value, row.gamma, row.sigma_bar]
            for row in rows
        ],
    )


def run_predict(config: RunConfig, out: OutputWriter) -> None:
    data = _problem(config)
    reports = predict_concentration(
        data,
        seeds=config.samples.seeds,
        workers=config.workers,
        seed=config.seed,
        stationarity_tol=config.tolerances.stationarity,
        degeneracy_tol=config.tolerances.degeneracy,
    )
    out.json(
        "predictions.json",
        {
            "function": reports[0].function.value if reports else None,
            "boundary_variation": data.boundary_variation,
            "reports": [r.as_dict() for r in reports],
        },
    )


def run_verify_expansion(config: RunConfig, out: OutputWriter) -> None:
    data = _problem(config)
    report = verify_expansion(
        data, _anchor(config, data), config.eps_schedule, _settings(config), workers=config.workers
    )
    out.json("expansion.json", report.as_dict())
    header = ["eps", "E", "slope", "target_sigma", "mismatch"]
    out.csv("expansion.csv", header, [[row[k] for k in header] for row in report.rows()])


def run_verify_proposition(config: RunConfig, out: OutputWriter) -> None:
    data = _problem(config)
    report = verify_proposition(
        data,
        _anchor(config, data),
        config.eps_schedule,
        _settings(config),
        workers=config.workers,
        include_derivatives=config.include_derivatives,
    )
    out.json("proposition.json", report.as_dict())
    header = ["estimate", "eps", "lhs", "rhs", "residual"]
    rows = [
        [row["estimate"], row["eps"], row["lhs"], row["rhs"], row["residual"]]
        for row in report.rows()
        if not isinstance(row["lhs"], list)
    ]
    out.csv("proposition.csv", header, rows)


def run_verify_gradient(config: RunConfig, out: OutputWriter) -> None:
    data = _problem(config)
    report = verify_gradient_expansion(
        data, _anchor(config, data), config.eps_schedule, _settings(config)
    )
    out.json("gradient.json", report.as_dict())
    m = config.N - 1
    header = (
        ["eps"] + [f"fd{i + 1}" for i in range(m)] + [f"target{i + 1}" for i in range(m)] + ["mismatch"]
    )
    out.csv(
        "gradient.csv",
        header,
        [[row["eps"], *row["fd"], *row["target"], row["mismatch"]] for row in report.rows()],
    )


TASKS: Dict[Task, Callable[[RunConfig, OutputWriter], None]] = {
    Task.GROUND_STATE: run_ground_state,
    Task.CONSTANTS: run_constants,
    Task.LANDSCAPE: run_landscape,
    Task.PREDICT: run_predict,
    Task.VERIFY_EXPANSION: run_verify_expansion,
    Task.VERIFY_PROPOSITION: run_verify_proposition,
    Task.VERIFY_GRADIENT: run_verify_gradient,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikelab",
        description="Predict boundary spike locations and verify the two-term energy expansion.",
        epilog=GRAMMAR_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("task", choices=[t.value for t in Task])
    parser.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    parser.add_argument("--out", type=Path, default=None, help="output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides seed)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def _validation_message(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        field = ".".join(str(part) for part in err["loc"]) or "config"
        lines.append(f"{field}: {err['msg']}")
    return "; ".join(lines)


def _fail(code: int, kind: str, message: str) -> int:
    get_logger("cli").error("run_failed", kind=kind, message=message, exit_code=code)
    sys.stderr.write(f"spikelab: {message}\n")
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    bind_run(task=args.task)
    log = get_logger("cli")

    overrides: Dict[str, Any] = {"seed": args.seed}
    if args.out is not None:
        overrides["output_dir"] = str(args.out)
    try:
        config = load_config(args.config, overrides, defaults={"task": args.task})
    except ValidationError as exc:
        return _fail(EXIT_INVALID, "ValidationError", _validation_message(exc))
    except (OSError, ValueError) as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, f"config {args.config}: {exc}")
    if config.task.value != args.task:
        return _fail(
            EXIT_INVALID,
            "ValidationError",
            f"task: config says {config.task.value!r} but {args.task!r} was requested",
        )

    config_hash = config.config_hash()
    bind_run(task=config.task.value, config_sha256=config_hash)
    log.info(
        "run_manifest",
        version=__version__,
        config=config.model_dump(mode="json"),
        quadrature=asdict(_settings(config)),
    )
    out = OutputWriter(Path(config.output_dir), config_hash)
    try:
        TASKS[config.task](config, out)
    except PreconditionError as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, str(exc))
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, type(exc).__name__, str(exc))
    log.info(
        "run_finished",
        outputs=[str(p) for p in out.written],
    )
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
