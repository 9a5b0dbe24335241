"""Gradient-play simulation.

Both players follow their own gradient: player 1 descends ``f`` in ``x1``
and player 2 ascends it in ``x2``.  In terms of the game form this is
``x' = -omega(x)`` in continuous time and ``x+ = x - Gamma omega(x)`` in
discrete time, with ``Gamma = blockdiag(gamma1 I, gamma2 I)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GameformError, PreconditionError
from .form import omega
from .games import JointPoint, as_flat, rps_policy

__all__ = [
    "StepSizes",
    "Trajectory",
    "OBSERVABLES",
    "gradient_play_discrete",
    "flow_rk4",
    "observable_values",
    "time_average_observable",
    "write_trajectory_csv",
]

OBSERVABLES = ("identity", "policy1", "policy2")


@dataclass(frozen=True)
class StepSizes:
    gamma1: float
    gamma2: float

    def __post_init__(self):
        for g in (self.gamma1, self.gamma2):
            if not (g > 0 and math.isfinite(g)):
                raise ValueError(f"step sizes must be positive and finite, got {g}")

    @classmethod
    def uniform(cls, gamma):
        return cls(gamma, gamma)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded states of one simulation.

    ``states[i]`` is the joint state after ``steps[i]`` iterations, at time
    ``times[i]`` (equal to the iteration index for discrete play).  If a
    non-finite state was hit, ``error`` says so and ``failed_at`` is the
    offending iteration; the recorded prefix is still valid.
    """

    states: np.ndarray
    steps: np.ndarray
    times: np.ndarray
    dims: object
    dt_or_step: float
    mode: str
    recorded_every: int
    error: Optional[str] = None
    failed_at: Optional[int] = None

    def __len__(self):
        return len(self.states)

    @property
    def points(self):
        return [JointPoint.from_flat(s, self.dims) for s in self.states]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _check_record_every(k):
    if int(k) != k or k < 1:
        raise PreconditionError("record_every must be a positive integer")
    return int(k)


def _safe_omega(game, x):
    try:
        w = omega(game, x)
    except (GameformError, ValueError, OverflowError):
        return None
    return w if np.all(np.isfinite(w)) else None


class _Recorder:
    def __init__(self, x0, every):
        self.every = every
        self.states = [x0.copy()]
        self.steps = [0]

    def offer(self, k, x, last):
        if k % self.every == 0 or last:
            self.states.append(x.copy())
            self.steps.append(k)


def gradient_play_discrete(game, x0, steps: StepSizes, n_iters: int, record_every: int = 1) -> Trajectory:
    """Iterate ``x+ = x - Gamma omega(x)`` for ``n_iters`` steps.

    Records the initial state, every ``record_every``-th state and the final
    state.  Divergence is not an error; only a non-finite state stops the
    run early.
    """
    if int(n_iters) != n_iters or n_iters < 1:
        raise PreconditionError("n_iters must be a positive integer")
    every = _check_record_every(record_every)
    dims = game.dims
    x = as_flat(x0, dims).copy()
    rates = np.concatenate([np.full(dims.m1, steps.gamma1), np.full(dims.m2, steps.gamma2)])
    rec = _Recorder(x, every)
    error = failed_at = None
    for k in range(1, int(n_iters) + 1):
        w = _safe_omega(game, x)
        x_next = None if w is None else x - rates * w
        if x_next is None or not np.all(np.isfinite(x_next)):
            error, failed_at = f"non-finite state at iteration {k}", k
            break
        x = x_next
        rec.offer(k, x, k == n_iters)
    steps_arr = np.array(rec.steps)
    return Trajectory(
        np.array(rec.states), steps_arr, steps_arr.astype(float), dims,
        steps.gamma1, "discrete", every, error, failed_at,
    )


def flow_rk4(game, x0, dt: float, t_final: float, record_every: int = 1) -> Trajectory:
    """Classical fourth-order Runge-Kutta on ``x' = -omega(x)``.

    The step is shrunk slightly if needed so that an integer number of
    steps lands exactly on ``t_final``.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise PreconditionError("dt must be positive")
    if not t_final >= dt:
        raise PreconditionError("t_final must be >= dt")
    every = _check_record_every(record_every)
    n = int(math.ceil(t_final / dt - 1e-9))
    h = t_final / n
    dims = game.dims
    x = as_flat(x0, dims).copy()
    rec = _Recorder(x, every)
    error = failed_at = None

    def f(y):
        w = _safe_omega(game, y)
        return None if w is None else -w

    for k in range(1, n + 1):
        k1 = f(x)
        k2 = None if k1 is None else f(x + 0.5 * h * k1)
        k3 = None if k2 is None else f(x + 0.5 * h * k2)
        k4 = None if k3 is None else f(x + h * k3)
        x_next = None if k4 is None else x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if x_next is None or not np.all(np.isfinite(x_next)):
            error, failed_at = f"non-finite state at step {k}", k
            break
        x = x_next
        rec.offer(k, x, k == n)
    steps_arr = np.array(rec.steps)
    return Trajectory(
        np.array(rec.states), steps_arr, steps_arr * h, dims, h, "rk4", every, error, failed_at,
    )


def observable_values(traj: Trajectory, observable: str, beta: float = 1.0) -> np.ndarray:
    """Observable evaluated at every recorded state, one row per state."""
    m1 = traj.dims.m1
    if observable == "identity":
        return traj.states
    if observable == "policy1":
        return rps_policy(traj.states[:, :m1], beta)
    if observable == "policy2":
        return rps_policy(traj.states[:, m1:], beta)
    raise ValueError(f"unknown observable {observable!r}; expected one of {OBSERVABLES}")


def time_average_observable(traj: Trajectory, observable: str, beta: float = 1.0) -> np.ndarray:
    """Arithmetic mean of the observable over the recorded states."""
    if len(traj) == 0:
        raise PreconditionError("empty trajectory")
    return observable_values(traj, observable, beta).mean(axis=0)


def write_trajectory_csv(traj: Trajectory, fh, observable: Optional[str] = None, beta: float = 1.0):
    """Write ``step,t,x0..x{m-1}`` plus optional policy columns, 17 significant digits."""
    m = traj.dims.m
    header = ["step", "t"] + [f"x{j}" for j in range(m)]
    extra = None
    if observable in ("policy1", "policy2"):
        extra = observable_values(traj, observable, beta)
        tag = "pi1" if observable == "policy1" else "pi2"
        header += [f"{tag}_{j}" for j in range(extra.shape[1])]
    elif observable not in (None, "identity"):
        raise ValueError(f"unknown observable {observable!r}")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for i in range(len(traj)):
        row = [str(int(traj.steps[i])), f"{traj.times[i]:.17g}"]
        row += [f"{v:.17g}" for v in traj.states[i]]
        if extra is not None:
            row += [f"{v:.17g}" for v in extra[i]]
        writer.writerow(row)
