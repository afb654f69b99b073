"""Trajectory diagnostics: steady-state detection, largest-Lyapunov-exponent
estimation, tail statistics, response classification, and a seeded Monte
Carlo sweep over inputs and initial conditions.

The central question these answer: does a forced run settle to a constant
(steady state) or keep moving — and if it keeps moving, is it chaotic-like
(positive largest Lyapunov exponent) or merely oscillating?
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .blocks import ComposedSystem
from .signals import Constant, InputSignal, Sinusoid
from .solver import IntegrationError, IntegratorConfig, Trajectory, integrate

__all__ = [
    "SteadyStateReport",
    "LyapunovEstimate",
    "TailStats",
    "VerdictRecord",
    "MonteCarloRow",
    "detect_steady_state",
    "lyapunov_max",
    "tail_stats",
    "classify_response",
    "entrainment_verdict",
    "monte_carlo",
    "VERDICT_STEADY_STATE",
    "VERDICT_OSCILLATION",
    "VERDICT_CHAOTIC",
    "VERDICT_INCONCLUSIVE",
    "VERDICT_DIVERGENCE",
]

VERDICT_STEADY_STATE = "steady_state"
VERDICT_OSCILLATION = "sustained_oscillation"
VERDICT_CHAOTIC = "chaotic_like"
VERDICT_INCONCLUSIVE = "inconclusive"
VERDICT_DIVERGENCE = "divergence"

# Largest-exponent threshold separating "chaotic_like" from
# "sustained_oscillation": comfortably above estimator noise, comfortably
# below the ~0.9 of a Lorenz-type attractor.
CHAOS_THRESHOLD = 0.05

_MIN_SPAN = 10.0
_MIN_RENORM_EVENTS = 50


@dataclass(frozen=True)
class SteadyStateReport:
    """Outcome of the asymptotically-constant test on a trajectory tail."""

    converged: bool
    tail_window: tuple[float, float]
    max_component_variation: float
    final_state: np.ndarray
    velocity_norm_at_end: float


@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest Lyapunov exponent from two-trajectory renormalization.

    Only estimates backed by at least 50 renormalization events are
    produced; ``lyapunov_max`` raises otherwise.
    """

    lambda_max: float
    renorm_interval: float
    renorm_count: int
    transient_discarded: float
    perturbation_size: float


@dataclass(frozen=True)
class TailStats:
    """Mean/min/max of one state variable over a trailing window."""

    variable: str
    window: tuple[float, float]
    mean: float
    min: float
    max: float


def _tail_mask(times: np.ndarray, fraction: float) -> tuple[np.ndarray, float, float]:
    span = float(times[-1] - times[0])
    start = float(times[-1]) - fraction * span
    return times >= start - 1e-12, start, float(times[-1])


def detect_steady_state(
    traj: Trajectory, tail_fraction: float = 0.2, eps: float = 1e-5
) -> SteadyStateReport:
    """Decide whether ``traj`` has become asymptotically constant.

    Converged means every state component's (max - min) over the trailing
    ``tail_fraction`` of the time span is at most eps * (1 + |component
    mean|). The relative form keeps the verdict scale-free when inputs of
    size 10 push equilibria far from the origin.
    """
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError(f"tail_fraction must be in (0, 1), got {tail_fraction}")
    span = traj.span()
    if span < _MIN_SPAN:
        raise ValueError(
            f"trajectory spans {span:.3g} time units; need at least {_MIN_SPAN:g} "
            "for a steady-state verdict"
        )
    mask, t_lo, t_hi = _tail_mask(traj.times, tail_fraction)
    tail = traj.states[mask]
    if tail.shape[0] < 2:
        raise ValueError("tail window contains fewer than 2 samples")

    variation = tail.max(axis=0) - tail.min(axis=0)
    mean = tail.mean(axis=0)
    converged = bool(np.all(variation <= eps * (1.0 + np.abs(mean))))

    dt = traj.times[-1] - traj.times[-2]
    velocity = float(np.linalg.norm((traj.states[-1] - traj.states[-2]) / dt))
    return SteadyStateReport(
        converged=converged,
        tail_window=(t_lo, t_hi),
        max_component_variation=float(variation.max()),
        final_state=traj.final_state.copy(),
        velocity_norm_at_end=velocity,
    )


def tail_stats(
    traj: Trajectory, variable: str, window_fraction: float = 0.2
) -> TailStats:
    """Mean/min/max of one named variable over the trailing window."""
    if not 0.0 < window_fraction < 1.0:
        raise ValueError(f"window_fraction must be in (0, 1), got {window_fraction}")
    col = traj.column(variable)  # KeyError for unknown names
    mask, t_lo, t_hi = _tail_mask(traj.times, window_fraction)
    vals = col[mask]
    return TailStats(
        variable=variable,
        window=(t_lo, t_hi),
        mean=float(vals.mean()),
        min=float(vals.min()),
        max=float(vals.max()),
    )


def _joint_system(sys: ComposedSystem) -> ComposedSystem:
    n = sys.dim

    def rhs(t: float, state: np.ndarray, u: float) -> np.ndarray:
        out = np.empty_like(state)
        out[:n] = sys.rhs(t, state[:n], u)
        out[n:] = sys.rhs(t, state[n:], u)
        return out

    return ComposedSystem(
        dim=2 * n,
        rhs=rhs,
        layout={"z": tuple(range(2 * n))},
        state_names=tuple(f"a{i}" for i in range(n))
        + tuple(f"b{i}" for i in range(n)),
        scenario_id=sys.scenario_id,
    )


def lyapunov_max(
    sys: ComposedSystem,
    input_signal: InputSignal,
    x0: np.ndarray,
    cfg: IntegratorConfig = IntegratorConfig(),
    *,
    transient: float = 100.0,
    horizon: float = 400.0,
    d0: float = 1e-8,
    renorm_dt: float = 0.5,
) -> LyapunovEstimate:
    """Estimate the largest Lyapunov exponent by two-trajectory
    renormalization.

    A copy of the state perturbed by ``d0`` in its first z-component is
    integrated jointly with the reference. Every ``renorm_dt`` the
    separation d is measured, log(d/d0) is accumulated (only after
    ``transient``), and the perturbed copy is pulled back to distance d0
    along the current separation direction. The estimate is the mean
    logarithmic growth rate over the accumulated events.

    The perturbation lives in the z-subsystem because the filter cascade
    contracts by construction; perturbing it would only slow convergence of
    the estimate.
    """
    if d0 <= 0:
        raise ValueError("d0 must be positive")
    if renorm_dt <= 0:
        raise ValueError("renorm_dt must be positive")
    if horizon < 100 * renorm_dt:
        raise ValueError(
            f"horizon {horizon:g} too short: need at least 100 renormalization "
            f"intervals ({100 * renorm_dt:g})"
        )
    if not 0.0 <= transient < horizon:
        raise ValueError("need 0 <= transient < horizon")

    x0 = np.asarray(x0, dtype=float)
    n = sys.dim
    z_first = sys.z_indices()[0]
    joint = _joint_system(sys)

    state = np.concatenate([x0, x0])
    state[n + z_first] += d0

    n_windows = int(math.floor(horizon / renorm_dt + 1e-9))
    log_sum = 0.0
    count = 0
    t = 0.0
    for k in range(1, n_windows + 1):
        t_next = k * renorm_dt
        traj = integrate(joint, input_signal, state, (t, t_next), cfg,
                         output_grid=np.array([t_next]))
        state = traj.final_state.copy()
        delta = state[n:] - state[:n]
        d = float(np.linalg.norm(delta))
        if d == 0.0:
            raise ValueError(
                "perturbation collapsed to exactly zero; cannot renormalize"
            )
        if t_next > transient + 1e-12:
            log_sum += math.log(d / d0)
            count += 1
        state[n:] = state[:n] + delta * (d0 / d)
        t = t_next

    if count < _MIN_RENORM_EVENTS:
        raise ValueError(
            f"only {count} renormalization events after the transient; "
            f"need at least {_MIN_RENORM_EVENTS}"
        )
    return LyapunovEstimate(
        lambda_max=log_sum / (count * renorm_dt),
        renorm_interval=renorm_dt,
        renorm_count=count,
        transient_discarded=transient,
        perturbation_size=d0,
    )


@dataclass(frozen=True)
class VerdictRecord:
    """Verdict plus the evidence behind it.

    ``lyapunov`` is None when the steady-state test already settled the
    verdict (or when the Lyapunov run diverged); ``trajectory`` is the run
    the steady-state test saw.
    """

    verdict: str
    steady: SteadyStateReport | None
    lyapunov: LyapunovEstimate | None
    trajectory: Trajectory | None


def classify_response(
    sys: ComposedSystem,
    input_signal: InputSignal,
    x0: np.ndarray,
    cfg: IntegratorConfig = IntegratorConfig(),
    *,
    ss_horizon: float = 200.0,
    grid_step: float = 0.05,
    always_lyapunov: bool = False,
    lyapunov_opts: dict | None = None,
) -> VerdictRecord:
    """Run the steady-state test and, when needed, the Lyapunov estimate.

    Verdict rule: steady_state if the tail is asymptotically constant;
    otherwise chaotic_like when lambda_max > 0.05, sustained_oscillation
    when |lambda_max| <= 0.05, and inconclusive when the tail keeps moving
    yet the exponent reads clearly negative (diagnostics disagree).
    A diverging run yields the "divergence" verdict rather than an
    exception.
    """
    grid = np.arange(0.0, ss_horizon + grid_step / 2, grid_step)
    try:
        traj = integrate(sys, input_signal, x0, (0.0, ss_horizon), cfg,
                         output_grid=grid)
    except IntegrationError:
        return VerdictRecord(VERDICT_DIVERGENCE, None, None, None)
    steady = detect_steady_state(traj)

    estimate = None
    if always_lyapunov or not steady.converged:
        try:
            estimate = lyapunov_max(sys, input_signal, x0, cfg,
                                    **(lyapunov_opts or {}))
        except IntegrationError:
            if not steady.converged:
                return VerdictRecord(VERDICT_DIVERGENCE, steady, None, traj)

    if steady.converged:
        verdict = VERDICT_STEADY_STATE
    elif estimate.lambda_max > CHAOS_THRESHOLD:
        verdict = VERDICT_CHAOTIC
    elif abs(estimate.lambda_max) <= CHAOS_THRESHOLD:
        verdict = VERDICT_OSCILLATION
    else:
        verdict = VERDICT_INCONCLUSIVE
    return VerdictRecord(verdict, steady, estimate, traj)


def entrainment_verdict(
    sys: ComposedSystem,
    input_signal: InputSignal,
    x0: np.ndarray,
    cfg: IntegratorConfig = IntegratorConfig(),
    **kwargs,
) -> str:
    """Classify the forced response; see ``classify_response`` for the rule."""
    return classify_response(sys, input_signal, x0, cfg, **kwargs).verdict


@dataclass(frozen=True)
class MonteCarloRow:
    """One sample of the random-input/random-IC sweep.

    ``to_json_dict`` emits exactly the documented JSON-lines fields; the
    extra ``final_state_const`` array stays in-process for convergence
    checks.
    """

    sample: int
    u0: float
    x0: np.ndarray
    verdict_const: str
    verdict_sin: str
    lambda_const: float | None
    lambda_sin: float | None
    p_tail_mean_const: float | None
    p_tail_mean_sin: float | None
    final_state_const: np.ndarray | None

    def to_json_dict(self) -> dict:
        return {
            "sample": self.sample,
            "u0": self.u0,
            "x0": [float(v) for v in self.x0],
            "verdict_const": self.verdict_const,
            "verdict_sin": self.verdict_sin,
            "lambda_const": self.lambda_const,
            "lambda_sin": self.lambda_sin,
            "p_tail_mean_const": self.p_tail_mean_const,
            "p_tail_mean_sin": self.p_tail_mean_sin,
        }


def _leg(sys, input_signal, x0, cfg):
    """One input leg of a Monte Carlo sample: verdict, exponent, p-tail mean."""
    record = classify_response(sys, input_signal, x0, cfg, always_lyapunov=True)
    lam = record.lyapunov.lambda_max if record.lyapunov else None
    p_tail = None
    if record.trajectory is not None and "p" in record.trajectory.state_names:
        p_tail = tail_stats(record.trajectory, "p").mean
    final = (record.trajectory.final_state.copy()
             if record.trajectory is not None else None)
    return record.verdict, lam, p_tail, final


def _mc_sample(task) -> MonteCarloRow:
    sample, scenario, u0, x0, cfg = task
    from .scenarios import build_system  # deferred: keeps workers light

    sys = build_system(scenario)
    v_const, lam_const, p_const, final_const = _leg(sys, Constant(u0), x0, cfg)
    v_sin, lam_sin, p_sin, _ = _leg(sys, Sinusoid(), x0, cfg)
    return MonteCarloRow(
        sample=sample,
        u0=u0,
        x0=x0,
        verdict_const=v_const,
        verdict_sin=v_sin,
        lambda_const=lam_const,
        lambda_sin=lam_sin,
        p_tail_mean_const=p_const,
        p_tail_mean_sin=p_sin,
        final_state_const=final_const,
    )


def monte_carlo(
    scenario: str,
    n_samples: int,
    seed: int = 0,
    sample_range: tuple[float, float] = (-10.0, 10.0),
    *,
    cfg: IntegratorConfig = IntegratorConfig(),
    jobs: int = 1,
) -> list[MonteCarloRow]:
    """Sweep ``n_samples`` random (constant-input, initial-condition) draws.

    Each sample draws a constant-input magnitude u0 and a full initial
    state uniformly from ``sample_range``, then classifies the response to
    u = u0 and to u = sin t. Draws come from per-sample generators split
    off one seed, so results are reproducible and independent of ``jobs``;
    sample i's draw does not change when n_samples grows.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    lo, hi = sample_range
    if not hi > lo:
        raise ValueError(f"sample range must increase, got {sample_range}")

    from .scenarios import build_system

    dim = build_system(scenario).dim
    children = np.random.SeedSequence(seed).spawn(n_samples)
    tasks = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        u0 = float(rng.uniform(lo, hi))
        x0 = rng.uniform(lo, hi, size=dim)
        tasks.append((i, scenario, u0, x0, cfg))

    if jobs <= 1:
        return [_mc_sample(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_mc_sample, tasks))
