"""Second-order forward-mode differentiation by truncated Taylor arithmetic.

A :class:`Jet` carries an array of values together with their gradients and
Hessians with respect to ``n`` independent variables.  Value axes come
first and derivative axes last, so for a value of shape ``s`` the gradient
has shape ``s + (n,)`` and the Hessian ``s + (n, n)``.  Ordinary numpy
broadcasting therefore lines up derivative axes automatically.

The order of a jet is 0 (values only), 1 (values and gradients) or 2.
Lower orders skip the work for the missing parts but use the same formulas
for the parts they keep, so e.g. the gradient of an order-1 evaluation is
bitwise identical to the gradient of the order-2 evaluation.

Products are arranged so that Hessians come out exactly symmetric, not
merely symmetric to rounding.
"""

import numpy as np

__all__ = ["Jet", "variables", "constant", "stack", "dot", "compose"]


def _cross(ga, gb):
    c = ga[..., :, None] * gb[..., None, :]
    return c + np.swapaxes(c, -1, -2)


def _outer2(g):
    return g[..., :, None] * g[..., None, :]


class Jet:
    __slots__ = ("val", "grad", "hess", "n")
    # make ``ndarray * Jet`` dispatch to Jet.__rmul__
    __array_ufunc__ = None

    def __init__(self, val, grad=None, hess=None, n=0):
        self.val = val
        self.grad = grad
        self.hess = hess
        self.n = n

    @property
    def order(self):
        if self.grad is None:
            return 0
        return 1 if self.hess is None else 2

    @property
    def shape(self):
        return self.val.shape

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.shape}, val={self.val!r})"

    # -- construction helpers -------------------------------------------------

    def _const_like(self, c):
        """Lift a constant to a jet with zero derivatives and this jet's order."""
        c = np.array(c, dtype=float)
        grad = hess = None
        if self.grad is not None:
            grad = np.zeros(c.shape + (self.n,))
        if self.hess is not None:
            hess = np.zeros(c.shape + (self.n, self.n))
        return Jet(c, grad, hess, self.n)

    # -- linear operations ----------------------------------------------------

    def __neg__(self):
        return Jet(
            -self.val,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
            self.n,
        )

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.val + other.val,
                None if self.grad is None else self.grad + other.grad,
                None if self.hess is None else self.hess + other.hess,
                self.n,
            )
        c = np.asarray(other, dtype=float)
        grad, hess = self.grad, self.hess
        if c.ndim > self.val.ndim:
            # broadcasting a constant over a lower-rank jet widens the derivative arrays
            shape = np.broadcast_shapes(c.shape, self.val.shape)
            grad = None if grad is None else np.broadcast_to(grad, shape + (self.n,)).copy()
            hess = None if hess is None else np.broadcast_to(hess, shape + (self.n, self.n)).copy()
        return Jet(self.val + c, grad, hess, self.n)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(
                self.val * c,
                None if self.grad is None else self.grad * c[..., None],
                None if self.hess is None else self.hess * c[..., None, None],
                self.n,
            )
        a, b = self, other
        val = a.val * b.val
        grad = hess = None
        if a.grad is not None:
            grad = a.val[..., None] * b.grad + b.val[..., None] * a.grad
        if a.hess is not None:
            hess = (
                a.val[..., None, None] * b.hess
                + b.val[..., None, None] * a.hess
                + _cross(a.grad, b.grad)
            )
        return Jet(val, grad, hess, a.n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __getitem__(self, idx):
        return Jet(
            self.val[idx],
            None if self.grad is None else self.grad[idx],
            None if self.hess is None else self.hess[idx],
            self.n,
        )

    def sum(self):
        """Sum over all value axes, leaving a scalar jet."""
        k = self.val.size
        return Jet(
            np.add.reduce(self.val.reshape(k)),
            None if self.grad is None else np.add.reduce(self.grad.reshape(k, self.n)),
            None if self.hess is None else np.add.reduce(self.hess.reshape(k, self.n, self.n)),
            self.n,
        )

    def rmatvec(self, A):
        """``A @ self`` for a constant matrix ``A`` and a vector jet."""
        A = np.asarray(A, dtype=float)
        grad = hess = None
        if self.grad is not None:
            grad = A @ self.grad
        if self.hess is not None:
            # explicit reduction keeps entry (p, q) and (q, p) on identical arithmetic
            hess = (A[:, :, None, None] * self.hess[None]).sum(axis=1)
        return Jet(A @ self.val, grad, hess, self.n)

    # -- nonlinear elementary functions ---------------------------------------

    def exp(self):
        e = np.exp(self.val)
        grad = hess = None
        if self.grad is not None:
            grad = e[..., None] * self.grad
        if self.hess is not None:
            hess = e[..., None, None] * (self.hess + _outer2(self.grad))
        return Jet(e, grad, hess, self.n)

    def reciprocal(self):
        r = 1.0 / self.val
        grad = hess = None
        if self.grad is not None:
            r2 = r * r
            grad = -r2[..., None] * self.grad
        if self.hess is not None:
            hess = -r2[..., None, None] * self.hess + (2.0 * r2 * r)[..., None, None] * _outer2(self.grad)
        return Jet(r, grad, hess, self.n)

    def softmax(self):
        """Softmax of a vector jet, max-shifted before exponentiation.

        With ``d_j = u'_j - sum_a p_a u'_a`` the rules are
        ``p'_j = p_j d_j`` and
        ``p''_j = p_j (d_j d_j^T - sum_a p_a d_a d_a^T + u''_j - sum_a p_a u''_a)``.
        """
        u = self.val
        e = np.exp(u - u.max())
        p = e / np.add.reduce(e)
        grad = hess = None
        if self.grad is not None:
            d = self.grad - p @ self.grad
            grad = p[:, None] * d
        if self.hess is not None:
            dd = _outer2(d)
            inner = dd - np.add.reduce(p[:, None, None] * dd) + self.hess - np.add.reduce(p[:, None, None] * self.hess)
            hess = p[:, None, None] * inner
        return Jet(p, grad, hess, self.n)

    def square(self):
        return self * self

    def ipow(self, k):
        """Non-negative integer power by repeated multiplication."""
        if k < 0:
            raise ValueError("negative exponent")
        out = self._const_like(np.ones_like(self.val))
        for _ in range(k):
            out = out * self
        return out


def variables(x, order=2):
    """Independent variables at ``x``: identity gradient and zero Hessian."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    grad = np.eye(n) if order >= 1 else None
    hess = np.zeros((n, n, n)) if order >= 2 else None
    return Jet(x.copy(), grad, hess, n)


def constant(c, like):
    return like._const_like(c)


def stack(jets):
    first = jets[0]
    return Jet(
        np.stack([j.val for j in jets]),
        None if first.grad is None else np.stack([j.grad for j in jets]),
        None if first.hess is None else np.stack([j.hess for j in jets]),
        first.n,
    )


def dot(a, b):
    """Inner product of two vector jets (or a jet and a constant vector)."""
    return (a * b).sum()


def compose(x, value, grad=None, hess=None):
    """Scalar ``phi(x)`` of a vector jet ``x`` given ``phi``'s own derivatives at ``x.val``.

    ``grad`` and ``hess`` are the first and second derivatives of ``phi``
    with respect to the entries of ``x``; the chain rule carries them onto
    ``x``'s variables.  The Hessian is symmetrized exactly.
    """
    g = h = None
    if x.grad is not None:
        g = grad @ x.grad
    if x.hess is not None:
        M = x.grad.T @ hess @ x.grad
        h = 0.5 * (M + M.T) + np.einsum("i,ijk->jk", grad, x.hess)
    return Jet(np.asarray(value, dtype=float), g, h, x.n)
