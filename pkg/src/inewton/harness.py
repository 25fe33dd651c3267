"""Experiment harness: config parsing, strategy-vs-problem sweeps, trace
emission and the verification suite. The CLI in `cli` is a thin wrapper
around this module.

A sweep produces one CSV row per (problem, strategy) pair plus one JSON
trace file per run holding every outer-iteration record. All files are
written atomically (temp file, then rename).
"""

from __future__ import annotations

import dataclasses
import json
import os
import time

import numpy as np
from dataclasses import dataclass

from .forcing import ForcingConfig, ForcingInputs, Strategy, parse_strategy
from .krylov import KrylovConfig
from .newton import NewtonConfig, solve
from .problems import TwoPhaseBC, bratu2d, chandrasekhar_h
from .timestepping import TransientConfig, run_transient
from .verification import (
    HolderConstants,
    check_lemma1,
    check_scale_independence,
    estimate_order,
    make_affine_problem,
    make_quadratic_problem,
    p_schedule_shapes_ok,
    synthetic_error_sequence,
)

CSV_HEADER = "case,strategy,inner,outer,cuts,ms"

# ILU(0) is an exact factorization for the 1-D banded and the dense Jacobian
# patterns, which turns every inner solve into a single iteration and hides
# the very tolerance effects a sweep is meant to expose; only the 2-D
# problem keeps it by default.
DEFAULT_PRECONDITIONER = {"bratu2d": "ilu0", "heq": "none", "twophase1d": "none"}


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass
class ExperimentConfig:
    problem_name: str
    problem_params: dict
    strategies: list[Strategy]
    forcing: ForcingConfig
    newton: NewtonConfig
    krylov: KrylovConfig
    transient: TransientConfig
    output_dir: str
    seed: int


@dataclass
class SweepRow:
    case: str
    strategy: str
    inner: int
    outer: int
    cuts: int
    ms: int
    completed: bool


_PROBLEM_PARAM_KEYS = {
    "bratu2d": {"grid_n", "lam"},
    "heq": {"n_points", "c"},
    "twophase1d": {"cells", "velocity", "inflow", "mobility_ratio",
                   "initial_saturation"},
}

_TOP_KEYS = {"problem", "strategies", "forcing", "newton", "krylov",
             "transient", "output_dir", "seed"}


def _build_dataclass(cls, overrides, section):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(overrides) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {sorted(unknown)}")
    try:
        return cls(**overrides)
    except ValueError as exc:
        raise ConfigError(f"invalid '{section}' settings: {exc}") from exc


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")

    problem = doc.get("problem")
    if not isinstance(problem, dict) or "name" not in problem:
        raise ConfigError("'problem' must be an object with a 'name'")
    extra = set(problem) - {"name", "params"}
    if extra:
        raise ConfigError(f"unknown key(s) in 'problem': {sorted(extra)}")
    name = problem["name"]
    if name not in _PROBLEM_PARAM_KEYS:
        raise ConfigError(f"unknown problem {name!r}; "
                          f"expected one of {sorted(_PROBLEM_PARAM_KEYS)}")
    params = problem.get("params", {})
    bad = set(params) - _PROBLEM_PARAM_KEYS[name]
    if bad:
        raise ConfigError(f"unknown parameter(s) for {name}: {sorted(bad)}")

    labels = doc.get("strategies")
    if not isinstance(labels, list) or not labels:
        raise ConfigError("'strategies' must be a non-empty list")
    try:
        strategies = [parse_strategy(str(lbl)) for lbl in labels]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    krylov_overrides = dict(doc.get("krylov", {}))
    krylov_overrides.setdefault("preconditioner", DEFAULT_PRECONDITIONER[name])

    return ExperimentConfig(
        problem_name=name,
        problem_params=dict(params),
        strategies=strategies,
        forcing=_build_dataclass(ForcingConfig, doc.get("forcing", {}), "forcing"),
        newton=_build_dataclass(NewtonConfig, doc.get("newton", {}), "newton"),
        krylov=_build_dataclass(KrylovConfig, krylov_overrides, "krylov"),
        transient=_build_dataclass(TransientConfig, doc.get("transient", {}),
                                   "transient"),
        output_dir=str(doc.get("output_dir", "out")),
        seed=int(doc.get("seed", 0)),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_config(doc)


def resolve_output_dir(config: ExperimentConfig, cli_out: str | None) -> str:
    if cli_out:
        return cli_out
    return os.environ.get("INEWTON_OUT") or config.output_dir


def _build_static_problem(config: ExperimentConfig):
    p = config.problem_params
    if config.problem_name == "bratu2d":
        return bratu2d(int(p.get("grid_n", 16)), float(p.get("lam", 2.0)))
    if config.problem_name == "heq":
        return chandrasekhar_h(int(p.get("n_points", 100)), float(p.get("c", 0.9)))
    raise ConfigError(f"{config.problem_name} is not a single-solve problem")


def _transient_args(config: ExperimentConfig):
    p = config.problem_params
    bc = TwoPhaseBC(velocity=float(p.get("velocity", 1.0)),
                    inflow=float(p.get("inflow", 1.0)))
    cells = int(p.get("cells", 100))
    initial = np.full(cells, float(p.get("initial_saturation", 0.0)))
    return cells, bc, float(p.get("mobility_ratio", 2.0)), initial


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-." else "_" for ch in text)


def _write_atomic(path: str, payload: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _record_dict(rec):
    d = {
        "nu": rec.nu,
        "res_norm": rec.res_norm,
        "eta_used": rec.eta_used,
        "inner_iterations": rec.inner_iterations,
        "linear_model_residual_norm": rec.linear_model_residual_norm,
        "disagreement_norm": rec.disagreement_norm,
        "actual_reduction": rec.actual_reduction,
        "predicted_reduction": rec.predicted_reduction,
        "residual_change_norm": rec.residual_change_norm,
    }
    if rec.error_norm is not None:
        d["error_norm"] = rec.error_norm
    if rec.oversolving_trace is not None:
        d["oversolving_trace"] = [[lin, nonlin] for lin, nonlin in rec.oversolving_trace]
    return d


def _run_one(config: ExperimentConfig, strategy: Strategy):
    """Execute one (problem, strategy) run; returns (row, trace_payload)."""
    t0 = time.perf_counter()
    if config.problem_name == "twophase1d":
        cells, bc, mob, initial = _transient_args(config)
        rep = run_transient(cells, config.transient, strategy, config.forcing,
                            config.newton, config.krylov, bc=bc,
                            mobility_ratio=mob, initial_state=initial,
                            keep_reports=True)
        ms = int(round(1000.0 * (time.perf_counter() - t0)))
        case = f"twophase1d_c{cells}"
        row = SweepRow(case, strategy.label, rep.cumulative_inner,
                       rep.cumulative_outer, rep.cuts, ms, rep.completed)
        payload = {
            "case": case,
            "strategy": strategy.label,
            "completed": rep.completed,
            "steps_attempted": rep.steps_attempted,
            "steps_accepted": rep.steps_accepted,
            "cuts": rep.cuts,
            "attempts": [
                {
                    "t": step.t,
                    "dt": step.dt,
                    "accepted": step.accepted,
                    "records": [_record_dict(r) for r in nrep.iterations],
                }
                for step, nrep in zip(rep.per_step, rep.newton_reports)
            ],
        }
        return row, payload

    problem = _build_static_problem(config)
    rep = solve(problem, problem.initial_guess, strategy, config.forcing,
                config.newton, config.krylov)
    ms = int(round(1000.0 * (time.perf_counter() - t0)))
    case = _slug(problem.name)
    row = SweepRow(case, strategy.label, rep.total_inner, rep.total_outer,
                   0, ms, True)
    payload = {
        "case": case,
        "strategy": strategy.label,
        "converged": rep.converged,
        "final_res_norm": rep.final_res_norm,
        "records": [_record_dict(r) for r in rep.iterations],
    }
    return row, payload


def run_sweep(config: ExperimentConfig, out_dir: str):
    """Run every configured strategy, write results.csv plus one JSON trace
    per run, and return the rows. `all_completed` is False when any run hit
    an unrecoverable failure (e.g. time-step underflow)."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for strategy in config.strategies:
        row, payload = _run_one(config, strategy)
        rows.append(row)
        trace_path = os.path.join(
            out_dir, f"{row.case}__{_slug(strategy.label)}.json")
        _write_atomic(trace_path, json.dumps(payload, indent=1))
    lines = [CSV_HEADER]
    lines += [f"{r.case},{r.strategy},{r.inner},{r.outer},{r.cuts},{r.ms}"
              for r in rows]
    _write_atomic(os.path.join(out_dir, "results.csv"), "\n".join(lines) + "\n")
    all_completed = all(r.completed for r in rows)
    return rows, all_completed


def emit_oversolving_trace(config: ExperimentConfig, step_index: int, out_dir: str):
    """Write, per strategy, the per-inner-iteration (linear relative
    residual, nonlinear residual norm) arrays for each outer iteration of
    the selected step. Static problems have a single step, index 0."""
    os.makedirs(out_dir, exist_ok=True)
    ncfg = dataclasses.replace(config.newton, probe_oversolving=True)
    paths = []
    for strategy in config.strategies:
        if config.problem_name == "twophase1d":
            cells, bc, mob, initial = _transient_args(config)
            rep = run_transient(cells, config.transient, strategy, config.forcing,
                                ncfg, config.krylov, bc=bc, mobility_ratio=mob,
                                initial_state=initial, keep_reports=True)
            accepted = [nrep for step, nrep in zip(rep.per_step, rep.newton_reports)
                        if step.accepted]
            if not 0 <= step_index < len(accepted):
                raise ConfigError(f"step {step_index} out of range: run accepted "
                                  f"{len(accepted)} steps")
            newton_report = accepted[step_index]
            case = f"twophase1d_c{cells}"
        else:
            if step_index != 0:
                raise ConfigError("static problems have a single step, index 0")
            problem = _build_static_problem(config)
            newton_report = solve(problem, problem.initial_guess, strategy,
                                  config.forcing, ncfg, config.krylov)
            case = _slug(problem.name)
        payload = {
            "case": case,
            "strategy": strategy.label,
            "step": step_index,
            "outer": [
                {
                    "nu": rec.nu,
                    "eta_used": rec.eta_used,
                    "linear_rel_residual": [lin for lin, _ in rec.oversolving_trace],
                    "nonlinear_res_norm": [nl for _, nl in rec.oversolving_trace],
                }
                for rec in newton_report.iterations
            ],
        }
        path = os.path.join(
            out_dir, f"trace_{case}__{_slug(strategy.label)}_step{step_index}.json")
        _write_atomic(path, json.dumps(payload, indent=1))
        paths.append(path)
    return paths


def run_verification(seed: int = 0) -> dict:
    """Machine-readable pass/fail summary of the verification suite."""
    checks = []

    def add(name, passed, detail):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    affine = make_affine_problem(seed=seed)
    res = check_lemma1(affine, HolderConstants(1.0, 1.0), samples=1000, seed=seed)
    add("lemma1_affine", res.ok, f"worst margin {res.worst_margin:.3e}")

    quad = make_quadratic_problem(seed=seed)
    res = check_lemma1(quad, HolderConstants(2.0, 1.0), samples=1000, seed=seed)
    add("lemma1_quadratic", res.ok, f"worst margin {res.worst_margin:.3e}")

    res = check_lemma1(quad, HolderConstants(1e-4, 1.0), samples=1000, seed=seed)
    add("lemma1_detects_undersized_constant", not res.ok,
        "violation expected with a constant far below the Lipschitz bound")

    for q in (1.0, 1.3, 1.618, 2.0):
        errors = synthetic_error_sequence(0.1, q, 8)
        est = estimate_order(errors, window=min(6, len(errors)))
        add(f"order_estimator_q{q:g}", abs(est.order - q) <= 0.01,
            f"estimated {est.order:.4f} for target {q:g}")

    fcfg = ForcingConfig()
    scenario = ForcingInputs(
        nu=3, res_norm_current=0.7, res_norm_prev=2.1,
        linear_model_residual_norm_prev=0.12, disagreement_norm_prev=0.34,
        actual_reduction_prev=1.4, predicted_reduction_prev=1.98,
        residual_change_norm_prev=1.6, eta_prev=0.3)
    for label in ("ew1", "ew2", "botti", "an", "fixed:0.01",
                  "inex1steep", "inex1exp", "inex1cub",
                  "inex2steep", "inex2exp", "inex2cub"):
        ok = check_scale_independence(parse_strategy(label), fcfg, scenario)
        add(f"scale_independence_{_slug(label)}", ok, "eta invariant under 1e+/-6 scaling")

    ok, detail = p_schedule_shapes_ok(fcfg)
    add("schedule_shapes", ok, detail)

    return {"checks": checks, "all_passed": all(c["passed"] for c in checks)}
