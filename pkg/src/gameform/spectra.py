"""Dense kernels for small matrices: LU solves, determinants, eigenvalues.

Everything here is written out by hand (partial-pivot LU, Householder
reduction to Hessenberg form followed by Francis double-shift QR, cyclic
Jacobi for symmetric matrices).  Sizes are at most a few dozen, so clarity
wins over blocking.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotSymmetric, SingularMatrix

__all__ = [
    "Definiteness",
    "DefinitenessVerdict",
    "Spectrum",
    "lu_factor",
    "lu_solve",
    "determinant",
    "hessenberg",
    "eigenvalues",
    "sym_eigenvalues",
    "sym_definiteness",
]

PIVOT_RTOL = 1e-13


def _inf_norm(A):
    return float(np.max(np.sum(np.abs(A), axis=1))) if A.size else 0.0


def _square(A):
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


# -- LU -----------------------------------------------------------------------


def lu_factor(A):
    """Partial-pivot LU in compact form.

    Returns ``(LU, perm, sign, min_pivot)`` where ``LU`` stores the unit
    lower factor below the diagonal and the upper factor on and above it.
    """
    LU = _square(A)
    n = LU.shape[0]
    perm = np.arange(n)
    sign = 1.0
    min_pivot = math.inf
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        if p != k:
            LU[[k, p]] = LU[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        piv = LU[k, k]
        min_pivot = min(min_pivot, abs(piv))
        if piv != 0.0:
            LU[k + 1:, k] /= piv
            LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, perm, sign, min_pivot


def lu_solve(A, b):
    """Solve ``A x = b``; raises :class:`SingularMatrix` on a tiny pivot."""
    A = _square(A)
    b = np.asarray(b, dtype=float).ravel()
    if b.size != A.shape[0]:
        raise ValueError(f"rhs has length {b.size}, matrix is {A.shape[0]}x{A.shape[0]}")
    LU, perm, _, min_pivot = lu_factor(A)
    scale = _inf_norm(A)
    if scale == 0.0 or min_pivot < PIVOT_RTOL * scale:
        raise SingularMatrix(f"pivot {min_pivot:.3e} below {PIVOT_RTOL:g} * |A|_inf = {PIVOT_RTOL * scale:.3e}")
    n = b.size
    y = b[perm].copy()
    for i in range(1, n):
        y[i] -= LU[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - LU[i, i + 1:] @ y[i + 1:]) / LU[i, i]
    return y


def determinant(A) -> float:
    LU, _, sign, _ = lu_factor(A)
    return sign * float(np.prod(np.diag(LU)))


# -- nonsymmetric eigenvalues -------------------------------------------------


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues of a real matrix, sorted by (real part, imaginary part)."""

    eigenvalues: np.ndarray

    @property
    def real(self):
        return self.eigenvalues.real

    @property
    def min_abs_re(self) -> float:
        return float(np.min(np.abs(self.eigenvalues.real)))

    @property
    def min_re(self) -> float:
        return float(np.min(self.eigenvalues.real))

    def as_pairs(self):
        return [[float(z.real), float(z.imag)] for z in self.eigenvalues]

    def __len__(self):
        return len(self.eigenvalues)


def hessenberg(A):
    """Upper Hessenberg matrix orthogonally similar to ``A`` (Householder)."""
    H = _square(A)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        norm = math.sqrt(float(x @ x))
        if norm == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(norm, x[0])
        v /= math.sqrt(float(v @ v))
        H[k + 1:, :] -= 2.0 * np.outer(v, v @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v)
        H[k + 2:, k] = 0.0
    return H


def _sign(a, b):
    return abs(a) if b >= 0.0 else -abs(a)


def _hqr(a, max_sweeps):
    """Francis double-shift QR on an upper Hessenberg matrix (modified in place).

    Returns ``(wr, wi)``.  Eigenvalues deflate from the bottom of the matrix;
    on failure the entries above the active window are still valid.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(a[i, j])
    nn = n - 1
    t = 0.0
    sweeps = 0
    p = q = r = x = y = z = w = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
            else:
                y = a[nn - 1, nn - 1]
                w = a[nn, nn - 1] * a[nn - 1, nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = math.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + _sign(z, p)
                        wr[nn - 1] = wr[nn] = x + z
                        if z != 0.0:
                            wr[nn] = x - w / z
                        wi[nn - 1] = wi[nn] = 0.0
                    else:
                        wr[nn - 1] = wr[nn] = x + p
                        wi[nn] = z
                        wi[nn - 1] = -z
                    nn -= 2
                else:
                    if sweeps >= max_sweeps:
                        valid = np.zeros(n, dtype=bool)
                        valid[nn + 1:] = True
                        raise NoConvergence(
                            f"QR iteration did not converge in {max_sweeps} sweeps",
                            eigenvalues=wr + 1j * wi,
                            valid=valid,
                        )
                    if its > 0 and its % 10 == 0:
                        # exceptional shift
                        t += x
                        for i in range(nn + 1):
                            a[i, i] -= x
                        s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                        y = x = 0.75 * s
                        w = -0.4375 * s * s
                    its += 1
                    sweeps += 1
                    m = nn - 2
                    while m >= l:
                        z = a[m, m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                        q = a[m + 1, m + 1] - z - r - s
                        r = a[m + 2, m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                        if u + v == v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        a[i, i - 2] = 0.0
                        if i != m + 2:
                            a[i, i - 3] = 0.0
                    for k in range(m, nn):
                        if k != m:
                            p = a[k, k - 1]
                            q = a[k + 1, k - 1]
                            r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = _sign(math.sqrt(p * p + q * q + r * r), p)
                        if s == 0.0:
                            continue
                        if k == m:
                            if l != m:
                                a[k, k - 1] = -a[k, k - 1]
                        else:
                            a[k, k - 1] = -s * x
                        p += s
                        x = p / s
                        y = q / s
                        z = r / s
                        q /= p
                        r /= p
                        # row transformation on columns k..nn
                        if k != nn - 1:
                            pr = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1] + r * a[k + 2, k:nn + 1]
                            a[k + 2, k:nn + 1] -= pr * z
                        else:
                            pr = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1]
                        a[k + 1, k:nn + 1] -= pr * y
                        a[k, k:nn + 1] -= pr * x
                        # column transformation on rows l..min(nn, k+3)
                        hi = min(nn, k + 3) + 1
                        if k != nn - 1:
                            pc = x * a[l:hi, k] + y * a[l:hi, k + 1] + z * a[l:hi, k + 2]
                            a[l:hi, k + 2] -= pc * r
                        else:
                            pc = x * a[l:hi, k] + y * a[l:hi, k + 1]
                        a[l:hi, k + 1] -= pc * q
                        a[l:hi, k] -= pc
            if not l < nn - 1:
                break
    return wr, wi


def eigenvalues(A) -> Spectrum:
    """All eigenvalues of a real square matrix.

    Raises
    ------
    NoConvergence
        After ``100 * m`` QR sweeps; the exception carries the eigenvalues
        deflated so far and a mask of which ones are valid.
    """
    A = _square(A)
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    wr, wi = _hqr(hessenberg(A), max_sweeps=100 * n)
    ev = wr + 1j * wi
    order = np.lexsort((ev.imag, ev.real))
    return Spectrum(ev[order])


# -- symmetric eigenvalues ----------------------------------------------------


def _check_sym(A, rtol=1e-10):
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if np.max(np.abs(A - A.T), initial=0.0) > rtol * scale:
        raise NotSymmetric(f"matrix is not symmetric to {rtol:g} (relative)")


def sym_eigenvalues(A, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    A = _square(A)
    _check_sym(A)
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    total = float(np.sum(A * A))
    for _ in range(max_sweeps):
        off = float(np.sum(np.triu(A, 1) ** 2))
        if off <= 1e-30 * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                g = 100.0 * abs(apq)
                if abs(diff) + g == abs(diff):
                    # rotation angle below resolution of tan: t ~ apq / diff
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = _sign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
    else:
        raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(A))


class Definiteness(str, enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
    INDEFINITE = "Indefinite"
    NEGATIVE_SEMIDEFINITE = "NegativeSemidefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    ZERO = "Zero"

    @property
    def is_psd(self):
        return self in (Definiteness.POSITIVE_DEFINITE, Definiteness.POSITIVE_SEMIDEFINITE, Definiteness.ZERO)


_MIRROR = {
    Definiteness.POSITIVE_DEFINITE: Definiteness.NEGATIVE_DEFINITE,
    Definiteness.POSITIVE_SEMIDEFINITE: Definiteness.NEGATIVE_SEMIDEFINITE,
    Definiteness.INDEFINITE: Definiteness.INDEFINITE,
    Definiteness.NEGATIVE_SEMIDEFINITE: Definiteness.POSITIVE_SEMIDEFINITE,
    Definiteness.NEGATIVE_DEFINITE: Definiteness.POSITIVE_DEFINITE,
    Definiteness.ZERO: Definiteness.ZERO,
}


@dataclass(frozen=True)
class DefinitenessVerdict:
    kind: Definiteness
    min_eig: float
    max_eig: float

    def mirrored(self):
        return DefinitenessVerdict(_MIRROR[self.kind], -self.max_eig, -self.min_eig)

    def to_dict(self):
        return {"kind": self.kind.value, "min_eig": self.min_eig, "max_eig": self.max_eig}


def sym_definiteness(A, tol=None) -> DefinitenessVerdict:
    """Classify a symmetric matrix by the signs of its extreme eigenvalues.

    ``tol`` defaults to ``1e-8 * (1 + |A|_inf)``.  Eigenvalues within
    ``tol`` of zero count as zero.
    """
    A = _square(A)
    if tol is None:
        tol = 1e-8 * (1.0 + _inf_norm(A))
    ev = sym_eigenvalues(A)
    lo, hi = float(ev[0]), float(ev[-1])
    if -tol <= lo and hi <= tol:
        kind = Definiteness.ZERO
    elif lo > tol:
        kind = Definiteness.POSITIVE_DEFINITE
    elif lo >= -tol:
        kind = Definiteness.POSITIVE_SEMIDEFINITE
    elif hi < -tol:
        kind = Definiteness.NEGATIVE_DEFINITE
    elif hi <= tol:
        kind = Definiteness.NEGATIVE_SEMIDEFINITE
    else:
        kind = Definiteness.INDEFINITE
    return DefinitenessVerdict(kind, lo, hi)
