"""Critical-point classification and root finding on the game form.

A point is classified by the chain of conditions

* critical: ``omega(x) = 0``
* local Nash necessary: critical, ``D11 f >= 0`` and ``-D22 f >= 0``
* differential Nash: critical, ``D11 f > 0`` and ``-D22 f > 0``
* non-degenerate: ``det Domega(x) != 0``
* hyperbolic: no eigenvalue of ``Domega(x)`` on the imaginary axis

each realized with an explicit numerical threshold from :class:`Tolerances`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._parallel import ordered_map
from .errors import GameformError, NoConvergence, NonFiniteEncountered, PreconditionError, SingularMatrix
from .form import omega, omega_and_jacobian
from .games import JointPoint, as_flat
from .spectra import (
    Definiteness,
    DefinitenessVerdict,
    Spectrum,
    determinant,
    eigenvalues,
    lu_solve,
    sym_definiteness,
)

__all__ = [
    "Tolerances",
    "NewtonOptions",
    "NewtonResult",
    "CriticalPointReport",
    "MultistartResult",
    "classify_point",
    "newton_find",
    "multistart",
    "scaled_determinant",
]

LABELS = ("NotCritical", "CriticalNonNash", "NashCandidateDegeneratePlayerBlocks", "DifferentialNash")
DEDUP_RADIUS = 1e-6


@dataclass(frozen=True)
class Tolerances:
    """Thresholds turning the exact conditions into numerical tests.

    ``tol_omega=None`` means ``1e-9 * (1 + |x|_inf)`` at the point being
    classified.
    """

    tol_omega: Optional[float] = None
    tol_psd: float = 1e-8
    tol_pd: float = 1e-8
    tol_det: float = 1e-8
    tol_re: float = 1e-8

    def __post_init__(self):
        for name in ("tol_omega", "tol_psd", "tol_pd", "tol_det", "tol_re"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v}")

    def omega_threshold(self, x):
        if self.tol_omega is not None:
            return self.tol_omega
        return 1e-9 * (1.0 + float(np.max(np.abs(x))))


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-11
    max_iter: int = 100
    armijo_c: float = 1e-4
    min_step: float = 1e-12
    lm_damping: float = 1e-6
    max_backtracks: int = 10
    stall_window: int = 8
    divergence_radius: float = 1e8

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


class NewtonResult(NamedTuple):
    point: JointPoint
    converged: bool
    iters: int


@dataclass(frozen=True, eq=False)
class CriticalPointReport:
    point: JointPoint
    omega_inf_norm: float
    is_critical: bool
    block1_verdict: DefinitenessVerdict
    block2_verdict: DefinitenessVerdict
    lne_necessary: bool
    is_dne: bool
    det_domega: float
    det_scaled: float
    nondegenerate: bool
    spectrum: Spectrum
    min_abs_re: float
    hyperbolic: bool
    label: str
    partial: bool = False

    @property
    def flags(self):
        return (self.is_critical, self.lne_necessary, self.is_dne, self.nondegenerate, self.hyperbolic)

    def to_dict(self):
        return {
            "point": {"x1": self.point.x1.tolist(), "x2": self.point.x2.tolist()},
            "omega_inf_norm": self.omega_inf_norm,
            "is_critical": self.is_critical,
            "block1_verdict": self.block1_verdict.to_dict(),
            "block2_verdict": self.block2_verdict.to_dict(),
            "lne_necessary": self.lne_necessary,
            "is_dne": self.is_dne,
            "det_domega": self.det_domega,
            "det_scaled": self.det_scaled,
            "nondegenerate": self.nondegenerate,
            "spectrum": self.spectrum.as_pairs(),
            "min_abs_re": self.min_abs_re,
            "hyperbolic": self.hyperbolic,
            "label": self.label,
            "partial": self.partial,
        }


def scaled_determinant(J) -> float:
    """Determinant after dividing each row by its Euclidean norm (so ``|det| <= 1``)."""
    norms = np.sqrt(np.sum(J * J, axis=1))
    if np.any(norms == 0.0):
        return 0.0
    return determinant(J / norms[:, None])


def _label(is_critical, lne_necessary, is_dne):
    if not is_critical:
        return "NotCritical"
    if is_dne:
        return "DifferentialNash"
    if lne_necessary:
        return "NashCandidateDegeneratePlayerBlocks"
    return "CriticalNonNash"


def classify_point(game, x, tols: Tolerances = Tolerances()) -> CriticalPointReport:
    """Full classification verdict for ``x``.

    The two player blocks are ``D11 f`` and ``-D22 f`` (player 2 maximizes),
    so a differential Nash point has both verdicts positive definite.
    """
    flat = as_flat(x, game.dims)
    m1 = game.dims.m1
    w, J = omega_and_jacobian(game, flat)
    w_norm = float(np.max(np.abs(w)))
    is_critical = w_norm <= tols.omega_threshold(flat)

    b1 = sym_definiteness(J[:m1, :m1], tols.tol_psd)
    # rows of player 2 are already negated in Domega
    b2 = sym_definiteness(J[m1:, m1:], tols.tol_psd)
    lne = is_critical and b1.min_eig >= -tols.tol_psd and b2.min_eig >= -tols.tol_psd
    is_dne = is_critical and b1.min_eig > tols.tol_pd and b2.min_eig > tols.tol_pd

    det = determinant(J)
    det_s = scaled_determinant(J)
    nondegenerate = abs(det_s) > tols.tol_det

    partial = False
    try:
        spec = eigenvalues(J)
    except NoConvergence as exc:
        spec = Spectrum(np.where(exc.valid, exc.eigenvalues, np.nan))
        partial = True
    min_abs_re = float(np.nanmin(np.abs(spec.eigenvalues.real))) if not np.all(np.isnan(spec.eigenvalues)) else math.nan
    hyperbolic = (not partial) and nondegenerate and min_abs_re > tols.tol_re

    if is_dne and not (hyperbolic and nondegenerate):
        # zero-sum structure: a differential Nash point has Re(lambda) >= min block eigenvalue > 0
        raise AssertionError(
            f"differential Nash point classified non-hyperbolic: min|Re| = {min_abs_re:.3e}, scaled det = {det_s:.3e}"
        )

    return CriticalPointReport(
        point=JointPoint.from_flat(flat, game.dims),
        omega_inf_norm=w_norm,
        is_critical=bool(is_critical),
        block1_verdict=b1,
        block2_verdict=b2,
        lne_necessary=bool(lne),
        is_dne=bool(is_dne),
        det_domega=float(det),
        det_scaled=float(det_s),
        nondegenerate=bool(nondegenerate),
        spectrum=spec,
        min_abs_re=min_abs_re,
        hyperbolic=bool(hyperbolic),
        label=_label(is_critical, lne, is_dne),
        partial=partial,
    )


def _half_sq(w):
    return 0.5 * float(w @ w)


def _try_omega(game, x):
    try:
        w = omega(game, x)
    except (GameformError, ValueError):
        return None
    return w if np.all(np.isfinite(w)) else None


def newton_find(game, seed, opts: NewtonOptions = NewtonOptions()) -> NewtonResult:
    """Damped Newton on ``omega(x) = 0`` with a Levenberg fallback.

    The Newton direction solves ``Domega d = -omega``; the step length is
    chosen by Armijo backtracking on ``1/2 |omega|^2``.  When ``Domega`` is
    singular or backtracking stalls, a Levenberg step
    ``(J^T J + lam I) d = -J^T omega`` is taken, increasing ``lam`` tenfold
    until the merit decreases.

    The run gives up early when the merit fails to halve over
    ``stall_window`` iterations (a nonzero local minimum of the merit) or
    when ``|x|_inf`` exceeds ``divergence_radius``.
    """
    x = as_flat(seed, game.dims).copy()
    m = x.size
    w, J = omega_and_jacobian(game, x)
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(J))):
        raise NonFiniteEncountered("non-finite omega at the seed", iteration=0)
    phi = _half_sq(w)
    lam = opts.lm_damping
    c = opts.armijo_c
    history = [phi]

    for it in range(opts.max_iter):
        if np.max(np.abs(w)) < opts.tol:
            return NewtonResult(JointPoint.from_flat(x, game.dims), True, it)

        x_new = w_new = None
        try:
            d = lu_solve(J, -w)
        except SingularMatrix:
            d = None
        if d is not None and np.all(np.isfinite(d)):
            alpha = 1.0
            for _ in range(opts.max_backtracks):
                if alpha < opts.min_step:
                    break
                xt = x + alpha * d
                wt = _try_omega(game, xt)
                # grad(phi) . d = -|omega|^2 for the exact Newton direction
                if wt is not None and _half_sq(wt) <= (1.0 - 2.0 * c * alpha) * phi:
                    x_new, w_new = xt, wt
                    break
                alpha *= 0.5

        if x_new is None:
            g = J.T @ w
            JtJ = J.T @ J
            for _ in range(40):
                try:
                    d = lu_solve(JtJ + lam * np.eye(m), -g)
                except SingularMatrix:
                    lam *= 10.0
                    continue
                xt = x + d
                wt = _try_omega(game, xt)
                if wt is not None and _half_sq(wt) <= phi + c * float(g @ d):
                    x_new, w_new = xt, wt
                    lam = max(lam * 0.1, 1e-16)
                    break
                lam *= 10.0
            if x_new is None:
                break

        x, w = x_new, w_new
        _, J = omega_and_jacobian(game, x)
        if not np.all(np.isfinite(J)):
            raise NonFiniteEncountered("non-finite game Jacobian", iteration=it + 1)
        phi = _half_sq(w)
        history.append(phi)
        if np.max(np.abs(x)) > opts.divergence_radius:
            it += 1
            break
        if len(history) > opts.stall_window and phi > 0.5 * history[-1 - opts.stall_window]:
            it += 1
            break
    else:
        it = opts.max_iter

    converged = bool(np.max(np.abs(w)) < opts.tol)
    return NewtonResult(JointPoint.from_flat(x, game.dims), converged, it)


@dataclass(frozen=True, eq=False)
class MultistartResult:
    """Deduplicated, classified critical points from a batch of Newton runs."""

    reports: list
    n_seeds: int
    n_unconverged: int
    seeds: np.ndarray = field(repr=False, default=None)

    def __len__(self):
        return len(self.reports)

    def __iter__(self):
        return iter(self.reports)

    def __getitem__(self, i):
        return self.reports[i]

    def to_dict(self):
        return {
            "reports": [r.to_dict() for r in self.reports],
            "footer": {"n_seeds": self.n_seeds, "n_unconverged": self.n_unconverged, "n_found": len(self.reports)},
        }


def multistart(
    game,
    box_lo: float,
    box_hi: float,
    n_seeds: int,
    rng_seed: int,
    opts: NewtonOptions = NewtonOptions(),
    tols: Tolerances = Tolerances(),
    parallel: bool = True,
) -> MultistartResult:
    """Newton from ``n_seeds`` uniform seeds in ``[box_lo, box_hi]^m``.

    Converged roots closer than 1e-6 (inf-norm) are merged, keeping the one
    from the earliest seed.  Output is sorted lexicographically by
    coordinates and does not depend on the worker count.
    """
    if not box_lo < box_hi:
        raise PreconditionError(f"empty box [{box_lo}, {box_hi}]")
    if n_seeds < 1:
        raise PreconditionError("n_seeds must be >= 1")
    rng = np.random.default_rng(rng_seed)
    seeds = rng.uniform(box_lo, box_hi, size=(n_seeds, game.dims.m))

    def run(s):
        try:
            return newton_find(game, s, opts)
        except (NonFiniteEncountered, ArithmeticError, GameformError):
            return None

    mapper = ordered_map if parallel else (lambda fn, items: [fn(it) for it in items])
    results = mapper(run, seeds)
    roots = []
    n_bad = 0
    for res in results:
        if res is None or not res.converged:
            n_bad += 1
            continue
        p = res.point.flat
        if any(np.max(np.abs(p - q)) <= DEDUP_RADIUS for q in roots):
            continue
        roots.append(p)
    roots.sort(key=tuple)
    reports = mapper(lambda p: classify_point(game, p, tols), roots)
    return MultistartResult(reports, n_seeds, n_bad, seeds)
