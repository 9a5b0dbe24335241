"""Cost functions of two-player zero-sum games and their exact derivatives.

A game is described by a single cost ``f(x1, x2)``.  Player 1 minimizes it
over ``x1`` and player 2 maximizes it over ``x2``.  Each family below knows
how to build its cost from a :class:`~gameform.jets.Jet` of the joint
variable, so one code path yields the value, the gradient and the Hessian.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jets
from .errors import ConfigError, DimensionMismatch, NumericalOverflow

__all__ = [
    "RPS_MATRIX",
    "MAX_DEGREE",
    "BlockDims",
    "JointPoint",
    "PolyTerm",
    "Polynomial",
    "Bilinear",
    "PerturbedBilinear",
    "QuadraticSaddle",
    "RpsSoftmax",
    "Composite",
    "Jet2",
    "as_flat",
    "evaluate",
    "gradient",
    "jet2",
    "fd_jet2",
    "rps_policy",
    "random_polynomial",
    "game_to_dict",
    "game_from_dict",
    "parse_game_config",
    "emit_game_config",
]

# rock-paper-scissors payoff: row action j against column action k
RPS_MATRIX = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])

MAX_DEGREE = 8
_RPS_SIGNS = np.array([-1.0, -1.0, -1.0, 1.0, 1.0, 1.0])
_SYM_TOL = 1e-12


@dataclass(frozen=True)
class BlockDims:
    m1: int
    m2: int

    def __post_init__(self):
        if int(self.m1) != self.m1 or int(self.m2) != self.m2 or self.m1 < 1 or self.m2 < 1:
            raise ValueError(f"block dimensions must be positive integers, got ({self.m1}, {self.m2})")

    @property
    def m(self) -> int:
        return self.m1 + self.m2


@dataclass(frozen=True, eq=False)
class JointPoint:
    """A strategy profile ``(x1, x2)``."""

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        x1 = np.array(self.x1, dtype=float).ravel()
        x2 = np.array(self.x2, dtype=float).ravel()
        if x1.size < 1 or x2.size < 1:
            raise ValueError("both strategy blocks must be non-empty")
        if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
            raise ValueError("strategy entries must be finite")
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    @classmethod
    def from_flat(cls, x, dims: BlockDims) -> "JointPoint":
        x = np.asarray(x, dtype=float).ravel()
        if x.size != dims.m:
            raise DimensionMismatch("joint point", dims.m, x.size)
        return cls(x[: dims.m1], x[dims.m1:])

    @property
    def dims(self) -> BlockDims:
        return BlockDims(self.x1.size, self.x2.size)

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.x1, self.x2])

    def __eq__(self, other):
        if not isinstance(other, JointPoint):
            return NotImplemented
        return np.array_equal(self.x1, other.x1) and np.array_equal(self.x2, other.x2)

    def __repr__(self):
        return f"JointPoint(x1={self.x1.tolist()}, x2={self.x2.tolist()})"


@dataclass(frozen=True)
class PolyTerm:
    coeff: float
    e1: tuple
    e2: tuple

    @property
    def degree(self) -> int:
        return sum(self.e1) + sum(self.e2)


def _matrix(a, name):
    a = np.array(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    a.setflags(write=False)
    return a


def _check_symmetric(a, name):
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.shape[0] != a.shape[1] or np.max(np.abs(a - a.T), initial=0.0) > _SYM_TOL * scale:
        raise ValueError(f"{name} not symmetric")


class _Game:
    """Shared behaviour of the concrete game families."""

    dims: BlockDims

    def cost(self, X):
        raise NotImplementedError

    def evaluate(self, x) -> float:
        return evaluate(self, x)

    def jet2(self, x) -> "Jet2":
        return jet2(self, x)


def _prod_without(F, cols):
    G = F.copy()
    G[:, cols] = 1.0
    return np.multiply.reduce(G, axis=1)


@dataclass(frozen=True, eq=False)
class Polynomial(_Game):
    """Sum of monomials ``c * prod(x1**e1) * prod(x2**e2)``."""

    dims: BlockDims
    terms: tuple = ()
    max_degree: int = MAX_DEGREE

    def __post_init__(self):
        if not 0 <= self.max_degree <= MAX_DEGREE:
            raise ValueError(f"max_degree must lie in [0, {MAX_DEGREE}]")
        terms = []
        for t in self.terms:
            if not isinstance(t, PolyTerm):
                t = PolyTerm(*t)
            e1, e2 = tuple(int(e) for e in t.e1), tuple(int(e) for e in t.e2)
            if len(e1) != self.dims.m1 or len(e2) != self.dims.m2:
                raise DimensionMismatch("monomial exponent vector", (self.dims.m1, self.dims.m2), (len(e1), len(e2)))
            if min(e1 + e2) < 0:
                raise ValueError("exponents must be non-negative")
            if sum(e1) + sum(e2) > self.max_degree:
                raise ValueError(f"term degree {sum(e1) + sum(e2)} exceeds max_degree {self.max_degree}")
            if not math.isfinite(t.coeff):
                raise ValueError("coefficient must be finite")
            terms.append(PolyTerm(float(t.coeff), e1, e2))
        object.__setattr__(self, "terms", tuple(terms))
        if terms:
            exps = np.array([t.e1 + t.e2 for t in terms], dtype=int)
            coeffs = np.array([t.coeff for t in terms])
        else:
            exps = np.zeros((0, self.dims.m), dtype=int)
            coeffs = np.zeros(0)
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_coeffs", coeffs)

    def cost(self, X):
        if not self.terms:
            return jets.constant(0.0, X[0])
        order = X.order
        x = X.val
        E, c = self._exps, self._coeffs
        m = x.size
        # factor tables: x_i**e, d/dx_i and d2/dx_i2 of it, one row per term
        F = x ** E
        value = float(c @ np.multiply.reduce(F, axis=1))
        if order == 0:
            return jets.compose(X, value)
        dF = E * x ** np.maximum(E - 1, 0)
        rest = [_prod_without(F, [i]) for i in range(m)]
        grad = np.array([c @ (dF[:, i] * rest[i]) for i in range(m)])
        if order == 1:
            return jets.compose(X, value, grad)
        d2F = E * (E - 1) * x ** np.maximum(E - 2, 0)
        hess = np.empty((m, m))
        for i in range(m):
            hess[i, i] = c @ (d2F[:, i] * rest[i])
            for j in range(i + 1, m):
                others = _prod_without(F, [i, j])
                hess[i, j] = hess[j, i] = c @ (dF[:, i] * dF[:, j] * others)
        return jets.compose(X, value, grad, hess)


@dataclass(frozen=True, eq=False)
class Bilinear(_Game):
    """``f = x1^T A x2``."""

    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _matrix(self.A, "A"))

    @property
    def dims(self):
        return BlockDims(*self.A.shape)

    def cost(self, X):
        m1 = self.dims.m1
        return jets.dot(X[:m1], X[m1:].rmatvec(self.A))


@dataclass(frozen=True, eq=False)
class PerturbedBilinear(_Game):
    """``f = x1^T A x2 - (eps/2) |x1|^2``."""

    A: np.ndarray
    eps: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "A", _matrix(self.A, "A"))
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise ValueError("eps must be finite and non-negative")

    @property
    def dims(self):
        return BlockDims(*self.A.shape)

    def cost(self, X):
        m1 = self.dims.m1
        x1 = X[:m1]
        return jets.dot(x1, X[m1:].rmatvec(self.A)) - (x1 * x1).sum() * (0.5 * self.eps)


@dataclass(frozen=True, eq=False)
class QuadraticSaddle(_Game):
    """``f = 1/2 x1^T Q x1 + x1^T S x2 - 1/2 x2^T R x2``."""

    Q: np.ndarray
    S: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        for name in ("Q", "S", "R"):
            object.__setattr__(self, name, _matrix(getattr(self, name), name))
        _check_symmetric(self.Q, "Q")
        _check_symmetric(self.R, "R")
        if self.S.shape != (self.Q.shape[0], self.R.shape[0]):
            raise DimensionMismatch("S", (self.Q.shape[0], self.R.shape[0]), self.S.shape)

    @property
    def dims(self):
        return BlockDims(self.Q.shape[0], self.R.shape[0])

    def cost(self, X):
        m1 = self.dims.m1
        x1, x2 = X[:m1], X[m1:]
        return (
            jets.dot(x1, x1.rmatvec(self.Q)) * 0.5
            + jets.dot(x1, x2.rmatvec(self.S))
            - jets.dot(x2, x2.rmatvec(self.R)) * 0.5
        )


def _softmax_jet(w, beta):
    return (w * (-beta)).softmax()


@dataclass(frozen=True, eq=False)
class RpsSoftmax(_Game):
    """Rock-paper-scissors with softmax policies over weight vectors.

    ``f(w1, w2) = pi1^T M pi2 + eps * (|w2|^2 - |w1|^2)`` with
    ``pi_i = softmax(-beta_i * w_i)``.
    """

    beta1: float = 1.0
    beta2: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        if not (self.beta1 > 0 and self.beta2 > 0 and math.isfinite(self.beta1) and math.isfinite(self.beta2)):
            raise ValueError("beta1 and beta2 must be positive")
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise ValueError("eps must be finite and non-negative")

    @property
    def dims(self):
        return BlockDims(3, 3)

    def cost(self, X):
        w1, w2 = X[:3], X[3:]
        p1 = _softmax_jet(w1, self.beta1)
        p2 = _softmax_jet(w2, self.beta2)
        f = jets.dot(p1, p2.rmatvec(RPS_MATRIX))
        if self.eps:
            f = f + (X * X * _RPS_SIGNS).sum() * self.eps
        return f


@dataclass(frozen=True, eq=False)
class Composite(_Game):
    """``f = f_base + t * f_perturbation``."""

    base: _Game
    perturbation: _Game
    t: float = 0.0

    def __post_init__(self):
        if self.base.dims != self.perturbation.dims:
            raise DimensionMismatch("composite perturbation dims", self.base.dims, self.perturbation.dims)
        if not math.isfinite(self.t):
            raise ValueError("t must be finite")

    @property
    def dims(self):
        return self.base.dims

    def cost(self, X):
        return self.base.cost(X) + self.perturbation.cost(X) * self.t


GameDefinition = Union[Polynomial, Bilinear, PerturbedBilinear, QuadraticSaddle, RpsSoftmax, Composite]


@dataclass(frozen=True, eq=False)
class Jet2:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


def as_flat(x, dims: BlockDims) -> np.ndarray:
    """Coerce a JointPoint or flat array-like to a validated flat float vector."""
    if isinstance(x, JointPoint):
        if x.x1.size != dims.m1:
            raise DimensionMismatch("x1", dims.m1, x.x1.size)
        if x.x2.size != dims.m2:
            raise DimensionMismatch("x2", dims.m2, x.x2.size)
        return x.flat
    x = np.asarray(x, dtype=float).ravel()
    if x.size != dims.m:
        raise DimensionMismatch("joint point", dims.m, x.size)
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    return x


def _run(game, x, order):
    X = jets.variables(as_flat(x, game.dims), order=order)
    with np.errstate(over="ignore", invalid="ignore"):
        out = game.cost(X)
    bad = not np.isfinite(out.val)
    if order >= 1:
        bad = bad or not np.all(np.isfinite(out.grad))
    if order >= 2:
        bad = bad or not np.all(np.isfinite(out.hess))
    if bad:
        raise NumericalOverflow(
            "non-finite cost or derivative; softmax exponentials are already max-shifted, "
            "so the overflow comes from the magnitude of the point itself"
        )
    return out


def evaluate(game, x) -> float:
    """Cost ``f(x1, x2)`` of the game at ``x``."""
    return float(_run(game, x, 0).val)


def gradient(game, x) -> np.ndarray:
    """Gradient of the cost; bitwise equal to ``jet2(game, x).gradient``."""
    return _run(game, x, 1).grad


def jet2(game, x) -> Jet2:
    out = _run(game, x, 2)
    return Jet2(float(out.val), out.grad, out.hess)


def fd_jet2(game, x, h: float) -> Jet2:
    """Central-difference gradient and Hessian; a test oracle for :func:`jet2`."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = as_flat(x, game.dims)
    m = x.size
    f0 = evaluate(game, x)

    def f(dx):
        return evaluate(game, x + dx)

    E = np.eye(m) * h
    g = np.empty(m)
    H = np.empty((m, m))
    fp = np.array([f(E[i]) for i in range(m)])
    fm = np.array([f(-E[i]) for i in range(m)])
    g[:] = (fp - fm) / (2 * h)
    for i in range(m):
        H[i, i] = (fp[i] - 2 * f0 + fm[i]) / h**2
        for j in range(i + 1, m):
            v = (f(E[i] + E[j]) - f(E[i] - E[j]) - f(E[j] - E[i]) + f(-E[i] - E[j])) / (4 * h**2)
            H[i, j] = H[j, i] = v
    return Jet2(f0, g, H)


def rps_policy(w, beta: float) -> np.ndarray:
    """Softmax policy ``exp(-beta w_j) / sum_k exp(-beta w_k)``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    z = -beta * np.asarray(w, dtype=float)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def random_polynomial(dims: BlockDims, degree: int, rng, scale: float = 1.0, min_degree: int = 0) -> Polynomial:
    """Polynomial with one normal(0, scale) coefficient per monomial of degree in [min_degree, degree]."""
    terms = []
    for exps in _monomials(dims.m, degree):
        if sum(exps) >= min_degree:
            terms.append(PolyTerm(float(scale * rng.standard_normal()), exps[: dims.m1], exps[dims.m1:]))
    return Polynomial(dims, tuple(terms), max_degree=max(degree, 0))


def _monomials(m, degree):
    """All exponent tuples of length m with total degree <= degree, in graded order."""
    exps = [e for e in itertools.product(range(degree + 1), repeat=m) if sum(e) <= degree]
    return sorted(exps, key=lambda e: (sum(e), tuple(-v for v in e)))


# -- JSON configuration -------------------------------------------------------

_FAMILIES = ("polynomial", "bilinear", "perturbed_bilinear", "quadratic", "rps", "composite")


def _num(obj, key, path, *, positive=False, nonneg=False, default=None):
    if key not in obj:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}", "missing required field")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", "expected a finite number")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}", "must be > 0")
    if nonneg and v < 0:
        raise ConfigError(f"{path}.{key}", "must be >= 0")
    return float(v)


def _int(obj, key, path):
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing required field")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{path}.{key}", "expected a positive integer")
    return v


def _mat(obj, key, path, shape=None):
    p = f"{path}.{key}"
    if key not in obj:
        raise ConfigError(p, "missing required field")
    rows = obj[key]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(p, "expected a non-empty array of arrays")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width or width == 0:
            raise ConfigError(f"{p}[{i}]", "ragged or empty row")
        for j, v in enumerate(r):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{p}[{i}][{j}]", "expected a finite number")
    a = np.array(rows, dtype=float)
    if shape is not None and a.shape != shape:
        raise ConfigError(p, f"shape {a.shape} does not match dims {shape}")
    return a


def _dims_of(obj, path, default):
    if "m1" in obj or "m2" in obj:
        return (_int(obj, "m1", path), _int(obj, "m2", path))
    return default


def game_from_dict(obj, path="$"):
    """Build a game from the decoded JSON schema; errors carry the JSON path."""
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    fam = obj.get("family")
    if fam not in _FAMILIES:
        raise ConfigError(f"{path}.family", f"expected one of {list(_FAMILIES)}, got {fam!r}")

    if fam == "polynomial":
        m1, m2 = _int(obj, "m1", path), _int(obj, "m2", path)
        max_deg = obj.get("max_degree", MAX_DEGREE)
        if isinstance(max_deg, bool) or not isinstance(max_deg, int) or not 0 <= max_deg <= MAX_DEGREE:
            raise ConfigError(f"{path}.max_degree", f"expected an integer in [0, {MAX_DEGREE}]")
        raw = obj.get("terms")
        if not isinstance(raw, list):
            raise ConfigError(f"{path}.terms", "expected an array of terms")
        terms = []
        for i, t in enumerate(raw):
            tp = f"{path}.terms[{i}]"
            if not isinstance(t, dict):
                raise ConfigError(tp, "expected an object")
            c = _num(t, "c", tp)
            exps = []
            for key, want in (("e1", m1), ("e2", m2)):
                e = t.get(key)
                if (
                    not isinstance(e, list)
                    or len(e) != want
                    or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in e)
                ):
                    raise ConfigError(f"{tp}.{key}", f"expected {want} non-negative integers")
                exps.append(tuple(e))
            if sum(exps[0]) + sum(exps[1]) > max_deg:
                raise ConfigError(tp, f"degree exceeds max_degree {max_deg}")
            terms.append(PolyTerm(c, *exps))
        return Polynomial(BlockDims(m1, m2), tuple(terms), max_degree=max_deg)

    if fam in ("bilinear", "perturbed_bilinear"):
        A = _mat(obj, "A", path)
        dims = _dims_of(obj, path, A.shape)
        if A.shape != tuple(dims):
            raise ConfigError(f"{path}.A", f"shape {A.shape} does not match dims {tuple(dims)}")
        if fam == "bilinear":
            return Bilinear(A)
        return PerturbedBilinear(A, _num(obj, "eps", path, nonneg=True))

    if fam == "quadratic":
        Q = _mat(obj, "Q", path)
        R = _mat(obj, "R", path)
        dims = _dims_of(obj, path, (Q.shape[0], R.shape[0]))
        for name, a, k in (("Q", Q, dims[0]), ("R", R, dims[1])):
            if a.shape != (k, k):
                raise ConfigError(f"{path}.{name}", f"shape {a.shape} does not match dims ({k}, {k})")
            try:
                _check_symmetric(a, name)
            except ValueError as exc:
                raise ConfigError(f"{path}.{name}", str(exc)) from None
        S = _mat(obj, "S", path, shape=tuple(dims))
        return QuadraticSaddle(Q, S, R)

    if fam == "rps":
        dims = _dims_of(obj, path, (3, 3))
        if tuple(dims) != (3, 3):
            raise ConfigError(path, "rps games have dims (3, 3)")
        return RpsSoftmax(
            _num(obj, "beta1", path, positive=True, default=1.0),
            _num(obj, "beta2", path, positive=True, default=1.0),
            _num(obj, "eps", path, nonneg=True, default=0.0),
        )

    base = game_from_dict(obj.get("base"), f"{path}.base")
    pert = game_from_dict(obj.get("perturbation"), f"{path}.perturbation")
    if base.dims != pert.dims:
        raise ConfigError(f"{path}.perturbation", f"dims {pert.dims} differ from base dims {base.dims}")
    return Composite(base, pert, _num(obj, "t", path))


def game_to_dict(game) -> dict:
    if isinstance(game, Polynomial):
        return {
            "family": "polynomial",
            "m1": game.dims.m1,
            "m2": game.dims.m2,
            "max_degree": game.max_degree,
            "terms": [{"c": t.coeff, "e1": list(t.e1), "e2": list(t.e2)} for t in game.terms],
        }
    if isinstance(game, Bilinear):
        return {"family": "bilinear", "m1": game.dims.m1, "m2": game.dims.m2, "A": game.A.tolist()}
    if isinstance(game, PerturbedBilinear):
        return {
            "family": "perturbed_bilinear",
            "m1": game.dims.m1,
            "m2": game.dims.m2,
            "A": game.A.tolist(),
            "eps": game.eps,
        }
    if isinstance(game, QuadraticSaddle):
        return {
            "family": "quadratic",
            "m1": game.dims.m1,
            "m2": game.dims.m2,
            "Q": game.Q.tolist(),
            "S": game.S.tolist(),
            "R": game.R.tolist(),
        }
    if isinstance(game, RpsSoftmax):
        return {"family": "rps", "beta1": game.beta1, "beta2": game.beta2, "eps": game.eps}
    if isinstance(game, Composite):
        return {
            "family": "composite",
            "base": game_to_dict(game.base),
            "perturbation": game_to_dict(game.perturbation),
            "t": game.t,
        }
    raise TypeError(f"not a game: {type(game).__name__}")


def parse_game_config(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return game_from_dict(obj)


def emit_game_config(game) -> str:
    return json.dumps(game_to_dict(game), indent=2)
