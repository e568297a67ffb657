"""Explicit ODE integration for trajectories and fundamental matrices.

Two schemes: a classic fixed-step RK4 and an adaptive Runge-Kutta-Fehlberg
4(5) pair with the 5th-order solution propagated (local extrapolation) and
the embedded difference used for step control. Dense output between accepted
nodes is cubic Hermite on the stored derivatives, giving locally 4th-order
samples, which matches the integration order.

Fundamental matrices of linear time-varying systems are integrated column by
column with the same machinery; the transition-bound checker then compares
propagator norms against the exponential envelopes built from integrals of
the logarithmic norm along the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, DivergedError, InvalidInputError
from .linalg import NormKind, cond_2, induced_matrix_norm, solve, vec_norm
from .lognorm import log_norm_pair
from .system import SystemSpec, eval_rhs

# Fehlberg 4(5) tableau
_C2, _C3, _C4, _C5, _C6 = 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5
_A21 = 0.25
_A31, _A32 = 3.0 / 32.0, 9.0 / 32.0
_A41, _A42, _A43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
_A51, _A52, _A53, _A54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
_A61, _A62, _A63, _A64, _A65 = -8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0
_B51, _B53, _B54, _B55, _B56 = 16.0 / 135.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0
# b5 - b4, the embedded local error weights
_E1, _E3, _E4, _E5, _E6 = 1.0 / 360.0, -128.0 / 4275.0, -2197.0 / 75240.0, 1.0 / 50.0, 2.0 / 55.0


@dataclass
class IntegratorConfig:
    """Step-size and tolerance knobs for both integration schemes.

    ``step`` is the fixed step for rk4 and the initial step for rkf45.
    ``max_step`` caps adaptive growth; stiff late-time dynamics (rates like
    -t^3) otherwise provoke large rejected excursions.
    """

    method: str = "rkf45"  # "rk4" | "rkf45"
    step: float = 0.01
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 0.1
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in ("rk4", "rkf45"):
            raise InvalidInputError(f"unknown integrator method {self.method!r}")
        if self.step <= 0.0 or self.max_step <= 0.0:
            raise InvalidInputError("step sizes must be positive")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise InvalidInputError("tolerances must be positive")
        if self.max_steps <= 0:
            raise InvalidInputError("max_steps must be positive")


@dataclass
class Trajectory:
    """Time-stamped states of one integration run.

    ``derivs`` holds the field evaluations at the grid nodes when the
    trajectory is the integrator's own grid (used for dense resampling);
    resampled trajectories carry None. ``error_estimate`` accumulates the
    embedded local-error estimates of accepted steps (0 for fixed-step runs).
    """

    times: np.ndarray
    states: np.ndarray
    derivs: Optional[np.ndarray] = None
    error_estimate: float = 0.0
    n_steps: int = 0
    n_rejected: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.times.ndim != 1:
            raise InvalidInputError("trajectory needs 1-D times and 2-D states")
        if self.times.shape[0] != self.states.shape[0]:
            raise InvalidInputError("times and states lengths differ")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0.0):
            raise InvalidInputError("trajectory times must strictly increase")
        if not np.all(np.isfinite(self.states)):
            raise InvalidInputError("trajectory states must be finite")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def sample(self, ts) -> np.ndarray:
        """States at the requested times via cubic Hermite interpolation."""
        if self.derivs is None:
            raise InvalidInputError("trajectory has no stored derivatives to interpolate with")
        return _hermite_sample(self.times, self.states, self.derivs, np.asarray(ts, dtype=float))


@dataclass
class FundamentalTrajectory:
    """Fundamental matrix solution on a shared time grid, matrices[0] = I."""

    times: np.ndarray
    matrices: np.ndarray
    error_estimate: float = 0.0
    n_steps: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.matrices = np.asarray(self.matrices, dtype=float)
        if self.matrices.ndim != 3 or self.matrices.shape[1] != self.matrices.shape[2]:
            raise InvalidInputError("matrices must be a stack of square matrices")
        if self.times.shape[0] != self.matrices.shape[0]:
            raise InvalidInputError("times and matrices lengths differ")
        if not np.allclose(self.matrices[0], np.eye(self.matrices.shape[1])):
            raise InvalidInputError("fundamental trajectory must start at the identity")
        if not np.all(np.isfinite(self.matrices)):
            raise InvalidInputError("fundamental matrices must be finite")

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]


def _hermite_sample(times, states, derivs, ts) -> np.ndarray:
    idx = np.clip(np.searchsorted(times, ts, side="right") - 1, 0, len(times) - 2)
    h = times[idx + 1] - times[idx]
    s = (ts - times[idx]) / h
    s2 = s * s
    s3 = s2 * s
    h00 = (2.0 * s3 - 3.0 * s2 + 1.0)[:, None]
    h10 = (s3 - 2.0 * s2 + s)[:, None]
    h01 = (-2.0 * s3 + 3.0 * s2)[:, None]
    h11 = (s3 - s2)[:, None]
    hcol = h[:, None]
    return (
        h00 * states[idx]
        + h10 * hcol * derivs[idx]
        + h01 * states[idx + 1]
        + h11 * hcol * derivs[idx + 1]
    )


def _validate_sample_times(ts, t0: float, tf: float) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise InvalidInputError("sample_times must be a non-empty 1-D sequence")
    if ts.size > 1 and not np.all(np.diff(ts) > 0.0):
        raise InvalidInputError("sample_times must strictly increase")
    slack = 1e-9 * max(1.0, abs(t0), abs(tf))
    if ts[0] < t0 - slack or ts[-1] > tf + slack:
        raise InvalidInputError(f"sample_times must lie within [{t0}, {tf}]")
    return np.clip(ts, t0, tf)


def integrate(
    sys: SystemSpec,
    x0,
    t0: float,
    tf: float,
    cfg: IntegratorConfig | None = None,
    sample_times=None,
) -> Trajectory:
    """Integrate dx/dt = f(x,t) + delta(t) from t0 to tf.

    Returns the integrator's own grid, or a dense resampling when
    ``sample_times`` is given. Raises DivergedError (carrying the last valid
    time) on state blow-up, step underflow, or step-budget exhaustion.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    if tf <= t0:
        raise InvalidInputError(f"need tf > t0, got [{t0}, {tf}]")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.dim,):
        raise DimensionError(f"x0 has shape {x0.shape}, system dimension is {sys.dim}")

    eval_rhs(sys, x0, t0)  # validated once; the loop uses the fast path

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return sys.f(y, t) + sys.delta(t)

    if cfg.method == "rk4":
        traj = _integrate_rk4(rhs, x0, t0, tf, cfg)
    else:
        traj = _integrate_rkf45(rhs, x0, t0, tf, cfg)

    if sample_times is None:
        return traj
    ts = _validate_sample_times(sample_times, t0, tf)
    states = traj.sample(ts)
    return Trajectory(
        times=ts,
        states=states,
        derivs=None,
        error_estimate=traj.error_estimate,
        n_steps=traj.n_steps,
        n_rejected=traj.n_rejected,
    )


def _integrate_rk4(rhs, x0, t0, tf, cfg: IntegratorConfig) -> Trajectory:
    h_target = min(cfg.step, cfg.max_step)
    n = max(1, int(np.ceil((tf - t0) / h_target - 1e-12)))
    if n > cfg.max_steps:
        raise DivergedError(f"fixed-step run needs {n} steps, budget is {cfg.max_steps}", t0)
    h = (tf - t0) / n
    times = np.empty(n + 1)
    states = np.empty((n + 1, x0.size))
    derivs = np.empty((n + 1, x0.size))
    t, y = t0, x0.copy()
    times[0] = t
    states[0] = y
    f_cur = rhs(t, y)
    derivs[0] = f_cur
    for k in range(n):
        k1 = f_cur
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (k + 1) * h
        if not np.all(np.isfinite(y)):
            raise DivergedError(f"state blew up near t={t}", times[k])
        f_cur = rhs(t, y)
        times[k + 1] = t
        states[k + 1] = y
        derivs[k + 1] = f_cur
    times[-1] = tf
    return Trajectory(times, states, derivs, error_estimate=0.0, n_steps=n)


def _integrate_rkf45(rhs, x0, t0, tf, cfg: IntegratorConfig) -> Trajectory:
    times = [t0]
    states = [x0.copy()]
    f_cur = rhs(t0, x0)
    derivs = [np.asarray(f_cur, dtype=float)]
    t = t0
    y = x0.copy()
    h = min(cfg.step, cfg.max_step, tf - t0)
    total_err = 0.0
    n_steps = 0
    n_rejected = 0
    tiny = 1e-12 * max(1.0, abs(tf - t0))

    while t < tf - tiny:
        if n_steps + n_rejected >= cfg.max_steps:
            raise DivergedError(f"step budget {cfg.max_steps} exhausted at t={t}", t)
        h = min(h, tf - t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise DivergedError(f"step size underflow at t={t}", t)
        k1 = f_cur
        k2 = rhs(t + _C2 * h, y + (h * _A21) * k1)
        k3 = rhs(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2))
        k4 = rhs(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = rhs(t + _C5 * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = rhs(t + _C6 * h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        y5 = y + h * (_B51 * k1 + _B53 * k3 + _B54 * k4 + _B55 * k5 + _B56 * k6)
        err_vec = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6)
        if not (np.all(np.isfinite(y5)) and np.all(np.isfinite(err_vec))):
            n_rejected += 1
            h *= 0.1
            continue

        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            t = t + h
            y = y5
            f_cur = rhs(t, y)
            if not np.all(np.isfinite(f_cur)):
                raise DivergedError(f"field non-finite after step to t={t}", times[-1])
            times.append(t)
            states.append(y)
            derivs.append(np.asarray(f_cur, dtype=float))
            total_err += float(np.max(np.abs(err_vec)))
            n_steps += 1
            grow = 0.9 * err ** -0.2 if err > 0.0 else 5.0
            h = min(h * min(5.0, max(0.2, grow)), cfg.max_step)
        else:
            n_rejected += 1
            h *= max(0.1, 0.9 * err ** -0.2)

    return Trajectory(
        np.array(times),
        np.array(states),
        np.array(derivs),
        error_estimate=total_err,
        n_steps=n_steps,
        n_rejected=n_rejected,
    )


def integrate_fundamental(
    a_fn: Callable[[float], np.ndarray],
    t0: float,
    tf: float,
    cfg: IntegratorConfig | None = None,
    sample_times=None,
) -> FundamentalTrajectory:
    """Solve dPhi/dt = A(t) Phi, Phi(t0) = I, column by column.

    The first column runs on its own adaptive grid; the remaining columns are
    dense-resampled onto that grid (or onto ``sample_times`` when given) so
    the stack shares one set of time stamps.
    """
    a0 = np.asarray(a_fn(t0), dtype=float)
    if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
        raise DimensionError(f"A(t) must be square, got shape {a0.shape}")
    n = a0.shape[0]

    def make_system() -> SystemSpec:
        return SystemSpec(dim=n, f=lambda x, t: a_fn(t) @ x, jac=lambda x, t: np.asarray(a_fn(t), dtype=float))

    sys0 = make_system()
    eye = np.eye(n)
    first = integrate(sys0, eye[:, 0], t0, tf, cfg)
    if sample_times is None:
        grid = first.times
        cols = [first.states]
    else:
        grid = _validate_sample_times(sample_times, t0, tf)
        cols = [first.sample(grid)]
    total_err = first.error_estimate
    total_steps = first.n_steps
    for j in range(1, n):
        traj = integrate(make_system(), eye[:, j], t0, tf, cfg, sample_times=grid)
        cols.append(traj.states)
        total_err += traj.error_estimate
        total_steps += traj.n_steps

    mats = np.stack(cols, axis=2)  # states are columns of Phi
    mats[0] = eye
    return FundamentalTrajectory(grid, mats, error_estimate=total_err, n_steps=total_steps)


def _cumulative_simpson(g: Callable[[float], float], times: np.ndarray) -> np.ndarray:
    """Cumulative integral of g on the grid, Simpson per subinterval."""
    out = np.zeros(times.size)
    g_nodes = [g(t) for t in times]
    for i in range(times.size - 1):
        h = times[i + 1] - times[i]
        mid = g(0.5 * (times[i] + times[i + 1]))
        out[i + 1] = out[i] + (h / 6.0) * (g_nodes[i] + 4.0 * mid + g_nodes[i + 1])
    return out


@dataclass
class TransitionBoundReport:
    """Worst-case slack of the propagator-norm and state-norm envelopes.

    Violations are relative to the corresponding exponential bound, so 0
    means the bound is exactly attained and negative values mean slack. The
    report fails when any violation exceeds the tolerance budget.
    """

    kind_tag: str
    t0: float
    tf: float
    n_pairs: int
    n_states: int
    worst_upper_violation: float
    worst_lower_violation: float
    worst_state_upper_violation: float
    worst_state_lower_violation: float
    tolerance: float
    max_condition: float
    passed: bool


def check_transition_bounds(
    a_fn: Callable[[float], np.ndarray],
    kind: NormKind,
    t0: float,
    tf: float,
    n_pairs: int = 20,
    cfg: IntegratorConfig | None = None,
    n_states: int = 5,
    seed: int = 0,
    tol_base: float = 1e-6,
) -> TransitionBoundReport:
    """Verify the exponential transition-matrix and state-norm envelopes.

    For sampled grid pairs tau <= t the propagator norm ||Phi(t) Phi(tau)^-1||
    must sit between exp(-int mu[-A]) and exp(int mu[A]); random initial
    states are checked against the same envelopes from t0. The mu-integrals
    use Simpson on the integrator's own grid, so their error is dominated by
    the ODE tolerance. Tolerance budget: tol_base + 10x the accumulated
    local-error estimate.
    """
    fund = integrate_fundamental(a_fn, t0, tf, cfg)
    times = fund.times
    mu_plus_nodes = {}
    mu_minus_nodes = {}

    def mu_plus(t: float) -> float:
        if t not in mu_plus_nodes:
            mp, mm = log_norm_pair(np.asarray(a_fn(t), dtype=float), kind)
            mu_plus_nodes[t] = mp
            mu_minus_nodes[t] = mm
        return mu_plus_nodes[t]

    def mu_minus(t: float) -> float:
        if t not in mu_minus_nodes:
            mu_plus(t)
        return mu_minus_nodes[t]

    int_plus = _cumulative_simpson(mu_plus, times)
    int_minus = _cumulative_simpson(mu_minus, times)

    rng = np.random.default_rng(seed)
    m = times.size
    worst_up = -np.inf
    worst_lo = -np.inf
    max_cond = 1.0
    for _ in range(n_pairs):
        i_tau = int(rng.integers(0, m))
        i_t = int(rng.integers(i_tau, m))
        phi_tau = fund.matrices[i_tau]
        phi_t = fund.matrices[i_t]
        max_cond = max(max_cond, cond_2(phi_tau))
        prop = solve(phi_tau.T, phi_t.T).T  # Phi(t) Phi(tau)^-1
        norm_val = induced_matrix_norm(prop, kind)
        upper = float(np.exp(int_plus[i_t] - int_plus[i_tau]))
        lower = float(np.exp(-(int_minus[i_t] - int_minus[i_tau])))
        worst_up = max(worst_up, (norm_val - upper) / upper)
        worst_lo = max(worst_lo, (lower - norm_val) / lower)

    worst_sup = -np.inf
    worst_slo = -np.inf
    t_idx = rng.integers(0, m, size=max(1, n_pairs // 2))
    for _ in range(n_states):
        x0 = rng.normal(size=fund.dim)
        x0n = vec_norm(x0, kind)
        for i_t in t_idx:
            xt = fund.matrices[int(i_t)] @ x0
            xtn = vec_norm(xt, kind)
            upper = x0n * float(np.exp(int_plus[int(i_t)]))
            lower = x0n * float(np.exp(-int_minus[int(i_t)]))
            worst_sup = max(worst_sup, (xtn - upper) / upper)
            worst_slo = max(worst_slo, (lower - xtn) / lower)

    tolerance = tol_base + 10.0 * fund.error_estimate
    passed = max(worst_up, worst_lo, worst_sup, worst_slo) <= tolerance
    return TransitionBoundReport(
        kind_tag=kind.tag,
        t0=t0,
        tf=tf,
        n_pairs=n_pairs,
        n_states=n_states,
        worst_upper_violation=float(worst_up),
        worst_lower_violation=float(worst_lo),
        worst_state_upper_violation=float(worst_sup),
        worst_state_lower_violation=float(worst_slo),
        tolerance=float(tolerance),
        max_condition=float(max_cond),
        passed=bool(passed),
    )
