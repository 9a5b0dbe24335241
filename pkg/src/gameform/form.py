"""The differential game form and its Jacobian.

For a cost ``f`` with blocks ``x = (x1, x2)``::

    omega(x)  = (D1 f, -D2 f)
    Domega(x) = [[ D11 f,    D12 f],
                 [-D12 f^T, -D22 f]]  = P @ H(x),   P = blockdiag(I, -I)

All matrices are dense numpy arrays.
"""

import numpy as np

from .games import BlockDims, as_flat, gradient, jet2

__all__ = ["omega", "game_jacobian", "full_hessian", "p_matrix", "omega_and_jacobian", "block_hessians"]


def omega(game, x) -> np.ndarray:
    """First block: gradient in ``x1``; second block: negated gradient in ``x2``."""
    g = gradient(game, x)
    g[game.dims.m1:] *= -1.0
    return g


def full_hessian(game, x) -> np.ndarray:
    return jet2(game, x).hessian


def _negate_player2_rows(H, m1):
    D = H.copy()
    D[m1:] *= -1.0
    return D


def game_jacobian(game, x) -> np.ndarray:
    return _negate_player2_rows(full_hessian(game, x), game.dims.m1)


def omega_and_jacobian(game, x):
    """``(omega, Domega)`` from a single second-order pass."""
    j = jet2(game, x)
    m1 = game.dims.m1
    g = j.gradient.copy()
    g[m1:] *= -1.0
    return g, _negate_player2_rows(j.hessian, m1)


def block_hessians(game, x):
    """``(D11 f, -D22 f)``: the matrices that must be definite at a Nash point."""
    H = full_hessian(game, as_flat(x, game.dims))
    m1 = game.dims.m1
    return H[:m1, :m1].copy(), -H[m1:, m1:]


def p_matrix(dims: BlockDims) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(dims.m1), -np.ones(dims.m2)]))
