"""Perturbation experiments: equilibrium continuation and random-game sampling.

:func:`continuation` follows a critical point of ``f + t g`` as ``t`` grows
from zero.  :func:`genericity_sample` draws random games, finds their
critical points by multistart Newton and tallies how they classify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import ordered_map
from .classify import NewtonOptions, Tolerances, classify_point, multistart, newton_find
from .errors import PreconditionError
from .form import omega
from .games import BlockDims, Composite, JointPoint, QuadraticSaddle, as_flat, game_to_dict, random_polynomial

__all__ = [
    "ContinuationEntry",
    "ContinuationPath",
    "continuation",
    "structural_stability_check",
    "MultistartSpec",
    "GenericityStats",
    "sample_game",
    "genericity_sample",
]

MAX_HALVINGS = 6


@dataclass(frozen=True, eq=False)
class ContinuationEntry:
    t: float
    point: JointPoint
    report: object
    residual: float
    newton_iters: int

    def to_dict(self):
        return {
            "t": self.t,
            "point": {"x1": self.point.x1.tolist(), "x2": self.point.x2.tolist()},
            "residual": self.residual,
            "newton_iters": self.newton_iters,
            "report": self.report.to_dict(),
        }


@dataclass(eq=False)
class ContinuationPath:
    """Accepted points along ``t``.

    ``status`` is ``"Complete"``, ``"CorrectorFailed"`` (path stops at
    ``status_t``) or ``"LostNash"`` (the Nash property held at ``t = 0`` was
    first lost at ``status_t``; the path itself carries on).
    """

    entries: list = field(default_factory=list)
    status: str = "Complete"
    status_t: Optional[float] = None
    lost_nash_at: Optional[float] = None
    tracked_flag: Optional[str] = None

    @property
    def ts(self):
        return np.array([e.t for e in self.entries])

    @property
    def points(self):
        return np.array([e.point.flat for e in self.entries])

    def to_dict(self):
        return {
            "status": self.status,
            "status_t": self.status_t,
            "lost_nash_at": self.lost_nash_at,
            "tracked_flag": self.tracked_flag,
            "entries": [e.to_dict() for e in self.entries],
        }


def _polish(game, x0, opts):
    flat = as_flat(x0, game.dims)
    w0 = float(np.max(np.abs(omega(game, flat))))
    if w0 > 1e-6 * (1.0 + float(np.max(np.abs(flat)))):
        raise PreconditionError(f"x0 is not a critical point of the base game (|omega|_inf = {w0:.3e})")
    res = newton_find(game, flat, opts)
    if not res.converged:
        raise PreconditionError("polishing Newton did not converge from x0")
    return res


def continuation(
    base,
    pert,
    x0,
    t_max: float,
    n_steps: int,
    opts: NewtonOptions = NewtonOptions(),
    tols: Tolerances = Tolerances(),
) -> ContinuationPath:
    """Natural-parameter continuation of a critical point along ``base + t * pert``.

    The predictor is the previous point and the corrector is
    :func:`~gameform.classify.newton_find` on the composite game.  A failed
    corrector halves the step, up to six times, before the path is
    abandoned.
    """
    if base.dims != pert.dims:
        raise PreconditionError("base and perturbation have different dims")
    if int(n_steps) != n_steps or n_steps < 1:
        raise PreconditionError("n_steps must be a positive integer")
    if not (math.isfinite(t_max) and t_max > 0):
        raise PreconditionError("t_max must be positive")

    start = _polish(base, x0, opts)
    x = start.point.flat
    rep0 = classify_point(base, x, tols)
    path = ContinuationPath()
    path.entries.append(ContinuationEntry(0.0, start.point, rep0, rep0.omega_inf_norm, start.iters))
    if rep0.is_dne:
        path.tracked_flag = "is_dne"
    elif rep0.lne_necessary:
        path.tracked_flag = "lne_necessary"

    t_cur = 0.0
    for k in range(1, int(n_steps) + 1):
        t_target = k * t_max / n_steps
        h = t_target - t_cur
        halvings = 0
        while t_cur < t_target:
            t_try = t_target if t_cur + h >= t_target else t_cur + h
            game_t = Composite(base, pert, t_try)
            res = newton_find(game_t, x, opts)
            if not res.converged:
                halvings += 1
                if halvings > MAX_HALVINGS:
                    path.status, path.status_t = "CorrectorFailed", t_try
                    return path
                h *= 0.5
                continue
            x = res.point.flat
            rep = classify_point(game_t, x, tols)
            path.entries.append(ContinuationEntry(t_try, res.point, rep, rep.omega_inf_norm, res.iters))
            if path.tracked_flag and path.lost_nash_at is None and not getattr(rep, path.tracked_flag):
                path.lost_nash_at = t_try
            t_cur = t_try

    if path.lost_nash_at is not None:
        path.status, path.status_t = "LostNash", path.lost_nash_at
    return path


def structural_stability_check(
    base,
    pert,
    x0,
    t_max: float,
    n_steps: int,
    opts: NewtonOptions = NewtonOptions(),
    tols: Tolerances = Tolerances(),
    lipschitz_slack: float = 10.0,
):
    """Check that a differential Nash point persists along ``base + t * pert``.

    Returns ``(ok, path)``.  ``ok`` requires a complete path, every point
    differential Nash, and every step displacement at most
    ``lipschitz_slack * C * dt`` where ``C`` is the rate of the first step
    (plus an absolute 1e-9 allowance for corrector noise).
    """
    start = _polish(base, x0, opts)
    if not classify_point(base, start.point, tols).is_dne:
        raise PreconditionError("x0 is not a differential Nash equilibrium of the base game")
    path = continuation(base, pert, start.point, t_max, n_steps, opts, tols)
    if path.status != "Complete" or not all(e.report.is_dne for e in path.entries):
        return False, path
    ts, pts = path.ts, path.points
    dts = np.diff(ts)
    moves = np.max(np.abs(np.diff(pts, axis=0)), axis=1)
    rate = moves[0] / dts[0]
    ok = bool(np.all(moves <= lipschitz_slack * rate * dts + 1e-9))
    return ok, path


# -- genericity sampling ------------------------------------------------------


@dataclass(frozen=True)
class MultistartSpec:
    box_lo: float = -2.0
    box_hi: float = 2.0
    n_seeds: int = 16


@dataclass(eq=False)
class GenericityStats:
    n_games: int = 0
    n_critical_points: int = 0
    n_degenerate: int = 0
    n_lne_necessary: int = 0
    n_dne: int = 0
    n_hyperbolic: int = 0
    n_dne_hyperbolic: int = 0
    n_unconverged_seeds: int = 0
    degenerate_examples: list = field(default_factory=list)

    def check(self):
        if not self.n_dne <= self.n_lne_necessary <= self.n_critical_points:
            raise AssertionError("count ordering violated: n_dne <= n_lne_necessary <= n_critical_points")
        if self.n_hyperbolic < self.n_dne or self.n_dne_hyperbolic != self.n_dne:
            raise AssertionError("a differential Nash point was not hyperbolic")

    def to_dict(self):
        return {
            "n_games": self.n_games,
            "n_critical_points": self.n_critical_points,
            "n_degenerate": self.n_degenerate,
            "n_lne_necessary": self.n_lne_necessary,
            "n_dne": self.n_dne,
            "n_hyperbolic": self.n_hyperbolic,
            "n_dne_hyperbolic": self.n_dne_hyperbolic,
            "n_unconverged_seeds": self.n_unconverged_seeds,
            "degenerate_examples": self.degenerate_examples,
        }


FAMILIES = ("random_quadratic_pd", "random_polynomial")


def _spd(k, rng):
    B = rng.standard_normal((k, k))
    return B.T @ B + 0.1 * np.eye(k)


def sample_game(family_spec, dims: BlockDims, rng):
    """Draw one game; ``family_spec`` is a family name or a dict with ``family`` and options."""
    spec = {"family": family_spec} if isinstance(family_spec, str) else dict(family_spec)
    fam = spec.get("family")
    if fam == "random_quadratic_pd":
        Q = _spd(dims.m1, rng)
        R = _spd(dims.m2, rng)
        S = rng.standard_normal((dims.m1, dims.m2))
        # symmetrize exactly; B^T B is symmetric only up to rounding
        return QuadraticSaddle(0.5 * (Q + Q.T), S, 0.5 * (R + R.T))
    if fam == "random_polynomial":
        degree = int(spec.get("degree", 3))
        if not 1 <= degree <= 3:
            raise PreconditionError("random_polynomial degree must lie in [1, 3]")
        return random_polynomial(dims, degree, rng, scale=float(spec.get("scale", 1.0)))
    raise PreconditionError(f"unknown family {fam!r}; expected one of {FAMILIES}")


def genericity_sample(
    family_spec,
    n_games: int,
    rng_seed: int,
    multistart_spec: MultistartSpec = MultistartSpec(),
    tols: Tolerances = Tolerances(),
    dims: BlockDims = BlockDims(1, 1),
    opts: NewtonOptions = NewtonOptions(),
) -> GenericityStats:
    """Classification counts over ``n_games`` random games.

    Game ``i`` draws from its own stream seeded by ``(rng_seed, i)``, so
    the result does not depend on how games are spread over workers.
    """
    if n_games < 1:
        raise PreconditionError("n_games must be >= 1")

    def one(i):
        rng = np.random.default_rng([rng_seed, i])
        game = sample_game(family_spec, dims, rng)
        ms_seed = int(rng.integers(2**63 - 1))
        res = multistart(
            game, multistart_spec.box_lo, multistart_spec.box_hi, multistart_spec.n_seeds,
            ms_seed, opts, tols, parallel=False,
        )
        return game, res

    stats = GenericityStats(n_games=n_games)
    for game, res in ordered_map(one, range(n_games)):
        stats.n_unconverged_seeds += res.n_unconverged
        for r in res.reports:
            stats.n_critical_points += 1
            stats.n_lne_necessary += r.lne_necessary
            stats.n_dne += r.is_dne
            stats.n_hyperbolic += r.hyperbolic
            stats.n_dne_hyperbolic += r.is_dne and r.hyperbolic
            if not r.nondegenerate:
                stats.n_degenerate += 1
                if len(stats.degenerate_examples) < 10:
                    stats.degenerate_examples.append(
                        {"game": game_to_dict(game), "point": r.point.flat.tolist(), "det_scaled": r.det_scaled}
                    )
    stats.check()
    return stats
