"""Transient driver for the implicit two-phase column.

Marches backward-Euler steps to t_end. A failed Newton solve cuts the step
by cut_factor and retries from the same old state; iterations spent on
failed attempts are counted in the cumulative totals (accepted-only totals
are tracked separately). dt grows by growth_factor after success, capped by
dt_max and by the time remaining.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forcing import ForcingConfig, Strategy
from .krylov import KrylovConfig
from .newton import NewtonConfig, NewtonReport, solve
from .problems import TwoPhaseBC, twophase1d


@dataclass(frozen=True)
class TransientConfig:
    t_end: float = 0.5
    dt_init: float = 0.01
    dt_min: float = 1e-6
    dt_max: float = 0.05
    cut_factor: float = 0.5
    growth_factor: float = 1.5

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not 0 < self.cut_factor < 1:
            raise ValueError("cut_factor must lie in (0, 1)")
        if self.growth_factor <= 1:
            raise ValueError("growth_factor must exceed 1")


@dataclass
class StepRecord:
    t: float          # start time of the attempt
    dt: float
    accepted: bool
    outer: int
    inner: int


@dataclass
class TransientReport:
    steps_attempted: int
    steps_accepted: int
    cuts: int
    cumulative_outer: int        # all outer iterations, failed attempts included
    cumulative_inner: int
    cumulative_outer_accepted: int
    cumulative_inner_accepted: int
    per_step: list[StepRecord]
    completed: bool
    t_reached: float
    final_state: np.ndarray
    failure_reason: str | None = None
    newton_reports: list[NewtonReport] | None = None


def run_transient(cells: int, cfg: TransientConfig, strategy: Strategy,
                  fcfg: ForcingConfig | None = None,
                  ncfg: NewtonConfig | None = None,
                  kcfg: KrylovConfig | None = None,
                  bc: TwoPhaseBC | None = None,
                  mobility_ratio: float = 2.0,
                  initial_state: np.ndarray | None = None,
                  keep_reports: bool = False) -> TransientReport:
    fcfg = fcfg or ForcingConfig()
    ncfg = ncfg or NewtonConfig()
    kcfg = kcfg or KrylovConfig(preconditioner="none")
    bc = bc or TwoPhaseBC()
    state = (np.zeros(cells) if initial_state is None
             else np.array(initial_state, dtype=np.float64, copy=True))

    per_step: list[StepRecord] = []
    reports: list[NewtonReport] | None = [] if keep_reports else None
    attempted = accepted = cuts = 0
    cum_outer = cum_inner = 0
    acc_outer = acc_inner = 0

    def report(completed, t, reason=None):
        return TransientReport(
            steps_attempted=attempted,
            steps_accepted=accepted,
            cuts=cuts,
            cumulative_outer=cum_outer,
            cumulative_inner=cum_inner,
            cumulative_outer_accepted=acc_outer,
            cumulative_inner_accepted=acc_inner,
            per_step=per_step,
            completed=completed,
            t_reached=t,
            final_state=state,
            failure_reason=reason,
            newton_reports=reports,
        )

    t = 0.0
    dt = cfg.dt_init
    while cfg.t_end - t > 1e-12 * cfg.t_end:
        dt_step = min(dt, cfg.t_end - t)
        problem = twophase1d(cells, dt_step, state, bc, mobility_ratio)
        res = solve(problem, state, strategy, fcfg, ncfg, kcfg)
        attempted += 1
        cum_outer += res.total_outer
        cum_inner += res.total_inner
        per_step.append(StepRecord(t, dt_step, res.converged,
                                   res.total_outer, res.total_inner))
        if reports is not None:
            reports.append(res)
        if res.converged:
            accepted += 1
            acc_outer += res.total_outer
            acc_inner += res.total_inner
            state = res.solution
            t += dt_step
            dt = min(dt * cfg.growth_factor, cfg.dt_max)
        else:
            cuts += 1
            dt = dt_step * cfg.cut_factor
            if dt < cfg.dt_min:
                return report(False, t, "time step underflow after repeated cuts")
    return report(True, t)
