"""Time integration of the gradient flow and identification of its limit.

Single trajectories run through a scalar RK4 loop (or scipy's Dormand-Prince
stepper).  :func:`limit_points` advances many initial states at once with a
vectorised RK4 that retires states as they converge; it is what basin sweeps
use.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import RK45

from .equilibria import CriticalPointId, enumerate_critical_points
from .errors import StepUnderflow
from .model import Coupling, DiffCoords, as_state, diff_coords, energy, rhs_components, torus_distance, wrap_angle

MIN_STEP = 1e-12
MATCH_TOL = 1e-3
MAX_SAMPLES = 100_000
FULL_STORAGE_TMAX = 100.0


class Method(enum.Enum):
    RK4_FIXED = "rk4"
    RK45_ADAPTIVE = "rk45"


class StopReason(enum.Enum):
    CONVERGED = "converged"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class IntegratorConfig:
    method: Method = Method.RK4_FIXED
    dt: float = 1e-2
    rtol: float = 1e-9
    atol: float = 1e-12
    t_max: float = 1e4
    convergence_eps: float = 1e-10
    convergence_window: int = 10

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > 0 and self.rtol > 0 and self.atol > 0 and self.convergence_eps > 0):
            raise ValueError("dt, t_max, tolerances and convergence_eps must be positive")
        if self.dt > self.t_max:
            raise ValueError("dt must not exceed t_max")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be a positive integer")

    @property
    def local_tolerance(self) -> float:
        """Rough size of the per-step error, used as slack in energy checks."""
        if self.method is Method.RK4_FIXED:
            return self.dt ** 5
        return self.atol + self.rtol

    def with_(self, **changes) -> "IntegratorConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    stop: StopReason

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class LimitResult:
    target: CriticalPointId | None
    final_diff_coords: DiffCoords
    wrapped_distance: float
    stop: StopReason

    @property
    def label(self) -> str:
        return self.target.value if self.target is not None else "unclassified"


Field = Callable[[float, float, float], tuple]


def model_field(coupling: Coupling, offset=(0.0, 0.0, 0.0)) -> Field:
    """Velocity field of the model, optionally evaluated at ``y + offset``."""
    k1, k2 = coupling.k1, coupling.k2
    o1, o2, o3 = (float(o) for o in offset)
    sin = math.sin

    def field(a, b, c):
        t1, t2, t3 = a + o1, b + o2, c + o3
        s31 = sin(t3 - t1)
        s21 = sin(t2 - t1)
        s32 = sin(t3 - t2)
        return ((k2 * s31 + k1 * s21) / 3.0, (k2 * s32 - k1 * s21) / 3.0, -(k2 * s31 + k2 * s32) / 3.0)

    return field


def _sample_stride(config: IntegratorConfig) -> int:
    if config.t_max <= FULL_STORAGE_TMAX:
        return 1
    return max(1, math.ceil(config.t_max / config.dt / MAX_SAMPLES))


def _rk4_fixed(field: Field, y0, config: IntegratorConfig):
    dt = config.dt
    h2 = 0.5 * dt
    h6 = dt / 6.0
    n_steps = math.ceil(config.t_max / dt - 1e-9)
    stride = _sample_stride(config)
    eps, window = config.convergence_eps, config.convergence_window

    a, b, c = (float(v) for v in y0)
    times, states = [0.0], [(a, b, c)]
    streak = 0
    step = 0
    stop = StopReason.TIME_LIMIT
    while True:
        k1 = field(a, b, c)
        if max(abs(k1[0]), abs(k1[1]), abs(k1[2])) < eps:
            streak += 1
            if streak >= window:
                stop = StopReason.CONVERGED
                break
        else:
            streak = 0
        if step >= n_steps:
            break
        k2 = field(a + h2 * k1[0], b + h2 * k1[1], c + h2 * k1[2])
        k3 = field(a + h2 * k2[0], b + h2 * k2[1], c + h2 * k2[2])
        k4 = field(a + dt * k3[0], b + dt * k3[1], c + dt * k3[2])
        a += h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        b += h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        c += h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        step += 1
        if step % stride == 0:
            times.append(step * dt)
            states.append((a, b, c))
    if times[-1] != step * dt:
        times.append(step * dt)
        states.append((a, b, c))
    return np.array(times), np.array(states), stop


def _rk45_adaptive(field: Field, y0, config: IntegratorConfig):
    solver = RK45(
        lambda t, y: field(y[0], y[1], y[2]),
        0.0,
        np.array(y0, dtype=float),
        config.t_max,
        rtol=config.rtol,
        atol=config.atol,
        first_step=min(config.dt, config.t_max),
    )
    eps, window = config.convergence_eps, config.convergence_window
    times, states = [0.0], [solver.y.copy()]
    streak = 0
    stop = StopReason.TIME_LIMIT
    while True:
        v = field(*solver.y)
        if max(abs(v[0]), abs(v[1]), abs(v[2])) < eps:
            streak += 1
            if streak >= window:
                stop = StopReason.CONVERGED
                break
        else:
            streak = 0
        if solver.status != "running":
            break
        message = solver.step()
        if solver.status == "failed" or (solver.status == "running" and solver.step_size < MIN_STEP):
            raise StepUnderflow(f"adaptive step fell below {MIN_STEP:g} at t={solver.t:g}: {message}")
        times.append(solver.t)
        states.append(solver.y.copy())

    times, states = np.array(times), np.array(states)
    if config.t_max > FULL_STORAGE_TMAX and len(times) > MAX_SAMPLES:
        keep = np.unique(np.linspace(0, len(times) - 1, MAX_SAMPLES).round().astype(int))
        times, states = times[keep], states[keep]
    return times, states, stop


def solve_flow(field: Field, y0, config: IntegratorConfig):
    """Integrate ``y' = field(y)`` from ``t = 0``; returns ``(times, states, stop)``."""
    if config.method is Method.RK4_FIXED:
        return _rk4_fixed(field, y0, config)
    return _rk45_adaptive(field, y0, config)


def integrate(initial, coupling: Coupling, config: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the model from ``initial`` until convergence or ``t_max``."""
    config = config or IntegratorConfig()
    y0 = as_state(initial)
    times, states, stop = solve_flow(model_field(coupling), y0, config)
    energies = np.array([energy(s, coupling) for s in states])
    return Trajectory(times, states, energies, stop)


def _match(final_dc, points) -> tuple[CriticalPointId | None, float]:
    best, best_d = None, math.inf
    for p in points:
        d = torus_distance(final_dc, diff_coords(p.phases))
        if d < best_d:
            best, best_d = p.id, d
    return (best if best_d < MATCH_TOL else None), best_d


def limit_point(initial, coupling: Coupling, config: IntegratorConfig | None = None) -> LimitResult:
    """Integrate and name the equilibrium the run settles on.

    Runs that hit ``t_max`` are left unclassified even when they happen to sit
    near an equilibrium.
    """
    traj = integrate(initial, coupling, config)
    final_dc = diff_coords(traj.final)
    target, dist = _match(final_dc, enumerate_critical_points(coupling))
    if traj.stop is not StopReason.CONVERGED:
        target = None
    return LimitResult(target, final_dc, dist, traj.stop)


def energy_monotonicity_check(traj: Trajectory) -> float:
    """Largest energy increase between consecutive samples (0 if none)."""
    if len(traj.energies) < 2:
        return 0.0
    return float(max(0.0, np.max(np.diff(traj.energies))))


def _batch_field(y: np.ndarray, k1: float, k2: float, out: np.ndarray) -> np.ndarray:
    v1, v2, v3 = rhs_components(y[:, 0], y[:, 1], y[:, 2], k1, k2)
    out[:, 0] = v1
    out[:, 1] = v2
    out[:, 2] = v3
    return out


def limit_points(initials, coupling: Coupling, config: IntegratorConfig | None = None):
    """Vectorised :func:`limit_point` for an ``(n, 3)`` array of initial states.

    Only fixed-step RK4 is vectorised; other methods fall back to a loop.
    Each row evolves independently of the others, so results do not depend
    on how rows are batched.

    Returns
    -------
    codes : int8 array, critical point index 1..6 or 0 for unclassified
    finals : (n, 2) array of final diff coordinates
    distances : wrapped distance to the nearest critical point
    """
    config = config or IntegratorConfig()
    y = np.array(initials, dtype=float).reshape(-1, 3)
    n = len(y)
    if config.method is not Method.RK4_FIXED:
        codes = np.zeros(n, dtype=np.int8)
        finals = np.zeros((n, 2))
        dists = np.zeros(n)
        for i, row in enumerate(y):
            res = limit_point(row, coupling, config)
            codes[i] = res.target.index if res.target else 0
            finals[i] = res.final_diff_coords
            dists[i] = res.wrapped_distance
        return codes, finals, dists

    k1, k2 = coupling.k1, coupling.k2
    dt = config.dt
    n_steps = math.ceil(config.t_max / dt - 1e-9)
    final = y.copy()
    converged = np.zeros(n, dtype=bool)
    active = np.arange(n)
    streak = np.zeros(n, dtype=np.int64)
    ka, kb, kc, kd = (np.empty_like(y) for _ in range(4))
    step = 0
    while len(active):
        _batch_field(y, k1, k2, ka[: len(y)])
        small = np.max(np.abs(ka[: len(y)]), axis=1) < config.convergence_eps
        streak = np.where(small, streak + 1, 0)
        done = streak >= config.convergence_window
        if step >= n_steps:
            final[active] = y
            break
        if done.any():
            final[active[done]] = y[done]
            converged[active[done]] = True
            keep = ~done
            active, y, streak = active[keep], y[keep], streak[keep]
            ka[: len(y)] = ka[: len(keep)][keep]
        m = len(y)
        k_1, k_2, k_3, k_4 = ka[:m], kb[:m], kc[:m], kd[:m]
        _batch_field(y + (0.5 * dt) * k_1, k1, k2, k_2)
        _batch_field(y + (0.5 * dt) * k_2, k1, k2, k_3)
        _batch_field(y + dt * k_3, k1, k2, k_4)
        y = y + (dt / 6.0) * (k_1 + 2.0 * k_2 + 2.0 * k_3 + k_4)
        step += 1

    finals = np.stack([wrap_angle(final[:, 0] - final[:, 2]), wrap_angle(final[:, 1] - final[:, 2])], axis=1)
    points = enumerate_critical_points(coupling)
    refs = np.array([diff_coords(p.phases) for p in points])
    ids = np.array([p.id.index for p in points], dtype=np.int8)
    delta = wrap_angle(finals[:, None, :] - refs[None, :, :])
    dist_all = np.hypot(delta[..., 0], delta[..., 1])
    nearest = np.argmin(dist_all, axis=1)
    dists = dist_all[np.arange(n), nearest]
    codes = np.where(converged & (dists < MATCH_TOL), ids[nearest], 0).astype(np.int8)
    return codes, finals, dists
