"""Forcing-term strategies for the inexact Newton iteration.

The forcing term eta_nu is the relative tolerance handed to the inner linear
solve at outer iteration nu. Eight strategies are provided behind one
dispatch function:

    fixed:<v>    constant eta
    brownsaad    eta_nu = (1/2)^nu
    ew1          ratio of the previous step's linear-model disagreement to
                 the previous residual norm
    ew2          gamma * (residual contraction ratio)^r
    an           trust-ratio update: compare achieved vs predicted residual
                 reduction and rescale the previous eta
    botti        predictor-corrector ratio built from the previous linear
                 model residual and the achieved residual change
    inex1<s>     ew1 numerator ratio raised to a power p(nu) that grows from
                 1 to 2 with the iteration count (s in steep|exp|cub)
    inex2<s>     ew2 with the constant gamma replaced by a coefficient
                 phi(nu) that decays with the iteration count

All adaptive outputs are clamped into [eps0, eta_max]. The fixed strategy is
exempt from the eps0 floor: an explicitly requested tight tolerance (e.g.
fixed:1e-12 as an exact-Newton reference) must be honoured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

SCHEDULES = ("steep", "exp", "cub")

STRATEGY_LABELS = (
    "brownsaad", "ew1", "ew2", "an", "botti",
    "inex1steep", "inex1exp", "inex1cub",
    "inex2steep", "inex2exp", "inex2cub",
)


class DegenerateHistoryError(ValueError):
    """Previous residual norm is zero: the outer iteration should already
    have been declared converged."""


@dataclass(frozen=True)
class Strategy:
    kind: str
    value: float | None = None      # fixed only
    schedule: str | None = None     # inex1/inex2 only

    def __post_init__(self):
        if self.kind == "fixed":
            if self.value is None or not 0.0 < self.value < 1.0:
                raise ValueError("fixed strategy needs a value in (0, 1)")
        elif self.kind in ("inex1", "inex2"):
            if self.schedule not in SCHEDULES:
                raise ValueError(f"schedule must be one of {SCHEDULES}")
        elif self.kind not in ("brownsaad", "ew1", "ew2", "an", "botti"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.value:g}"
        if self.kind in ("inex1", "inex2"):
            return f"{self.kind}{self.schedule}"
        return self.kind

    @property
    def uses_history(self) -> bool:
        return self.kind not in ("fixed", "brownsaad")


def parse_strategy(label: str) -> Strategy:
    """Parse a CLI strategy label, e.g. 'fixed:1e-6', 'ew1', 'inex2steep'."""
    label = label.strip().lower()
    if label.startswith("fixed:"):
        try:
            value = float(label.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad fixed strategy value in {label!r}") from None
        return Strategy("fixed", value=value)
    for kind in ("inex1", "inex2"):
        if label.startswith(kind):
            return Strategy(kind, schedule=label[len(kind):])
    if label in ("brownsaad", "ew1", "ew2", "an", "botti"):
        return Strategy(label)
    raise ValueError(f"unknown strategy {label!r}")


@dataclass(frozen=True)
class ForcingConfig:
    eta0: float = 0.5        # first-step forcing term for history-based strategies
    eta_max: float = 0.9     # upper clamp, keeps the inexact-Newton condition meaningful
    eps0: float = 1e-6       # minimum tolerance for the linear solver
    gamma: float = 0.5
    r: float = 1.618
    phi0: float = 0.5
    an_p1: float = 0.1
    an_p2: float = 0.25
    an_p3: float = 0.75
    botti_alpha: float = 1.5
    safeguard: bool = False  # classical eta >= gamma*eta_prev^r floor; off by default

    def __post_init__(self):
        if not 0.0 <= self.eta0 < 1.0:
            raise ValueError("eta0 must lie in [0, 1)")
        if not 0.0 < self.eta_max < 1.0:
            raise ValueError("eta_max must lie in (0, 1)")
        if self.eps0 <= 0.0:
            raise ValueError("eps0 must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 1.0 < self.r <= 2.0:
            raise ValueError("r must lie in (1, 2]")
        if not 0.0 < self.phi0 < 1.0:
            raise ValueError("phi0 must lie in (0, 1)")
        if not (0.0 < self.an_p1 < self.an_p2 < self.an_p3 < 1.0 and self.an_p1 < 0.5):
            raise ValueError("need 0 < an_p1 < an_p2 < an_p3 < 1 with an_p1 < 0.5")
        if not 1.0 < self.botti_alpha <= 2.0:
            raise ValueError("botti_alpha must lie in (1, 2]")


@dataclass(frozen=True)
class ForcingInputs:
    """Per-iteration quantities the strategies consume.

    The *_prev fields describe the step from iterate nu-1 to nu and are
    absent at nu = 0. All norms are Euclidean and non-negative; the two
    reduction fields are norm differences and may be negative when a step
    grew the residual.
    """

    nu: int
    res_norm_current: float
    res_norm_prev: float | None = None
    linear_model_residual_norm_prev: float | None = None
    disagreement_norm_prev: float | None = None
    actual_reduction_prev: float | None = None
    predicted_reduction_prev: float | None = None
    residual_change_norm_prev: float | None = None
    eta_prev: float | None = None

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be non-negative")
        for name in ("res_norm_current", "res_norm_prev",
                     "linear_model_residual_norm_prev", "disagreement_norm_prev",
                     "residual_change_norm_prev"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v < math.inf):
                raise ValueError(f"{name} must be a finite non-negative norm")
        for name in ("actual_reduction_prev", "predicted_reduction_prev"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{name} must be finite")


def p_schedule(schedule: str, nu: int) -> float:
    """Exponent applied to the inex1 ratio; climbs from 1 toward 2."""
    if nu < 1:
        raise ValueError("schedules are defined for nu >= 1")
    if schedule == "steep":
        return min(2.0, 2.0 - (2.5 / nu) * math.exp(-nu))
    if schedule == "exp":
        return min(2.0, 2.0 - math.exp(1.0 - nu ** 0.7))
    if schedule == "cub":
        return min(2.0, nu ** 3 / 250.0 + nu ** 2 / 250.0 + nu / 250.0 + 1.0)
    raise ValueError(f"unknown schedule {schedule!r}")


def phi_schedule(schedule: str, nu: int, cfg: ForcingConfig) -> float:
    """Decaying inex2 coefficient, capped at phi0 and floored at eps0."""
    if nu < 1:
        raise ValueError("schedules are defined for nu >= 1")
    if schedule == "steep":
        val = cfg.phi0 * math.exp(1.0 - nu)
    elif schedule == "exp":
        val = cfg.phi0 * math.exp(1.0 - nu ** 0.7)
    elif schedule == "cub":
        val = cfg.phi0 * (-(nu ** 3) / 250.0 + nu ** 2 / 250.0 + nu / 250.0 + 1.0)
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    return max(cfg.eps0, min(cfg.phi0, val))


def trust_ratio(actual: float, predicted: float) -> float:
    """Achieved over predicted residual reduction for the an strategy."""
    if predicted == 0.0:
        raise ValueError("degenerate step: predicted reduction is zero")
    return actual / predicted


def botti_eta(linear_model_norm: float, actual_change_norm: float, alpha: float) -> float:
    """lr / (lr + alpha * ac): small when the step changed the residual far
    more than the linear model left behind, i.e. when the solve paid off."""
    if linear_model_norm < 0.0 or actual_change_norm < 0.0:
        raise ValueError("norms must be non-negative")
    if linear_model_norm == 0.0 and actual_change_norm == 0.0:
        raise ValueError("linear model norm and residual change are both zero")
    return linear_model_norm / (linear_model_norm + alpha * actual_change_norm)


def new_choice1_eta(cfg: ForcingConfig, inputs: ForcingInputs, schedule: str) -> float:
    """(disagreement ratio)^p(nu), pre-clamp. Equals the ew1 value wherever
    p(nu) = 1."""
    _require(inputs, "disagreement_norm_prev")
    ratio = inputs.disagreement_norm_prev / _prev_norm(inputs)
    return ratio ** p_schedule(schedule, inputs.nu)


def new_choice2_eta(cfg: ForcingConfig, inputs: ForcingInputs, schedule: str) -> float:
    """phi(nu) * (residual contraction ratio)^r, pre-clamp."""
    ratio = inputs.res_norm_current / _prev_norm(inputs)
    return phi_schedule(schedule, inputs.nu, cfg) * ratio ** cfg.r


def _prev_norm(inputs: ForcingInputs) -> float:
    _require(inputs, "res_norm_prev")
    if inputs.res_norm_prev == 0.0:
        raise DegenerateHistoryError(
            "previous residual norm is zero at nu >= 1; the caller should "
            "have declared convergence")
    return inputs.res_norm_prev


def _require(inputs: ForcingInputs, *fields: str):
    for name in fields:
        if getattr(inputs, name) is None:
            raise ValueError(f"{name} is required at nu = {inputs.nu}")


def raw_eta(strategy: Strategy, cfg: ForcingConfig, inputs: ForcingInputs) -> float:
    """Strategy formula value before clamping into [eps0, eta_max]."""
    kind = strategy.kind
    if kind == "fixed":
        return strategy.value
    if kind == "brownsaad":
        return 0.5 ** inputs.nu
    if inputs.nu == 0:
        return cfg.eta0
    if kind == "ew1":
        _require(inputs, "disagreement_norm_prev")
        return inputs.disagreement_norm_prev / _prev_norm(inputs)
    if kind == "ew2":
        return cfg.gamma * (inputs.res_norm_current / _prev_norm(inputs)) ** cfg.r
    if kind == "an":
        _require(inputs, "actual_reduction_prev", "predicted_reduction_prev", "eta_prev")
        t = trust_ratio(inputs.actual_reduction_prev, inputs.predicted_reduction_prev)
        if t < cfg.an_p1:
            return 1.0 - 2.0 * cfg.an_p1
        if t < cfg.an_p2:
            return inputs.eta_prev
        if t < cfg.an_p3:
            return 0.8 * inputs.eta_prev
        return 0.5 * inputs.eta_prev
    if kind == "botti":
        _require(inputs, "linear_model_residual_norm_prev", "residual_change_norm_prev")
        return botti_eta(inputs.linear_model_residual_norm_prev,
                         inputs.residual_change_norm_prev, cfg.botti_alpha)
    if kind == "inex1":
        return new_choice1_eta(cfg, inputs, strategy.schedule)
    if kind == "inex2":
        return new_choice2_eta(cfg, inputs, strategy.schedule)
    raise ValueError(f"unknown strategy kind {kind!r}")


def next_eta(strategy: Strategy, cfg: ForcingConfig, inputs: ForcingInputs) -> float:
    """Forcing term for the next linear solve, clamped into [eps0, eta_max]
    (fixed strategies only capped from above)."""
    eta = raw_eta(strategy, cfg, inputs)
    if strategy.kind == "fixed":
        return min(eta, cfg.eta_max)
    if (cfg.safeguard and strategy.uses_history and inputs.nu >= 1
            and inputs.eta_prev is not None):
        guard = cfg.gamma * inputs.eta_prev ** cfg.r
        if guard > 0.1:
            eta = max(eta, guard)
    return min(cfg.eta_max, max(cfg.eps0, eta))


def scale_history(inputs: ForcingInputs, factor: float) -> ForcingInputs:
    """Multiply every norm-derived field by `factor`, as if the residual map
    itself had been rescaled. Used by the scale-independence checks."""
    scaled = {}
    for name in ("res_norm_current", "res_norm_prev", "linear_model_residual_norm_prev",
                 "disagreement_norm_prev", "actual_reduction_prev",
                 "predicted_reduction_prev", "residual_change_norm_prev"):
        v = getattr(inputs, name)
        if v is not None:
            scaled[name] = v * factor
    return replace(inputs, **scaled)
