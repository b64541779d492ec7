"""Exact matrix arithmetic over F_p (int64 arrays) and Q (Fraction arrays)."""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np


class NotSolvable(ValueError):
    pass


class Field:
    """A prime field ``F_p`` or, with ``p=0``, the rationals."""

    def __init__(self, p: int = 0):
        if p and any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        if p == 1:
            raise ValueError("1 is not prime")
        self.p = p
        self.dtype = np.int64 if p else object

    def __repr__(self):
        return f"F{self.p}" if self.p else "Q"

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("field", self.p))

    @property
    def is_finite(self):
        return self.p > 0

    # -- scalars --------------------------------------------------------
    def scalar(self, a):
        if self.p:
            if isinstance(a, Fraction):
                return int(a.numerator) * pow(int(a.denominator), -1, self.p) % self.p
            return int(a) % self.p
        return Fraction(a)

    def inv(self, a):
        if self.p:
            return pow(int(a), -1, self.p)
        return 1 / Fraction(a)

    def elements(self):
        if not self.p:
            raise ValueError("Q is infinite")
        return list(range(self.p))

    # -- matrices -------------------------------------------------------
    def zeros(self, m, n):
        if self.p:
            return np.zeros((m, n), dtype=np.int64)
        Z = np.empty((m, n), dtype=object)
        Z.fill(Fraction(0))
        return Z

    def eye(self, n):
        E = self.zeros(n, n)
        for i in range(n):
            E[i, i] = 1 if self.p else Fraction(1)
        return E

    def mat(self, M, shape=None):
        """Coerce ``M`` into a matrix over this field."""
        if isinstance(M, np.ndarray) and M.dtype == self.dtype and shape is None and M.ndim == 2:
            return M
        A = np.array(M, dtype=object)
        if shape is not None:
            A = A.reshape(shape)
        if A.ndim != 2:
            raise ValueError("expected a 2-d matrix")
        if self.p:
            out = np.zeros(A.shape, dtype=np.int64)
            for idx, v in np.ndenumerate(A):
                out[idx] = self.scalar(v)
            return out
        out = np.empty(A.shape, dtype=object)
        for idx, v in np.ndenumerate(A):
            out[idx] = Fraction(v)
        return out

    def reduce(self, A):
        return A % self.p if self.p else A

    def matmul(self, A, B):
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
        if A.shape[1] == 0:
            return self.zeros(A.shape[0], B.shape[1])
        if self.p:
            return (A @ B) % self.p
        return A.dot(B)

    def add(self, A, B):
        return self.reduce(A + B)

    def sub(self, A, B):
        return self.reduce(A - B)

    def neg(self, A):
        return self.reduce(-A)

    def smul(self, c, A):
        return self.reduce(self.scalar(c) * A)

    def is_zero(self, A):
        return not np.any(A != 0)

    def equal(self, A, B):
        return A.shape == B.shape and self.is_zero(self.sub(A, B))

    def kron(self, A, B):
        if A.size == 0 or B.size == 0:
            return self.zeros(A.shape[0] * B.shape[0], A.shape[1] * B.shape[1])
        return self.reduce(np.kron(A, B))

    def block(self, rows):
        """Assemble a block matrix from a list of lists of matrices."""
        return np.vstack([np.hstack(r) for r in rows]) if rows else self.zeros(0, 0)

    # -- elimination ----------------------------------------------------
    def rref(self, A):
        """Reduced row echelon form and pivot columns."""
        M = np.array(A, dtype=self.dtype, copy=True)
        rows, cols = M.shape
        piv = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            nz = np.nonzero(M[r:, c])[0]
            if len(nz) == 0:
                continue
            i = r + int(nz[0])
            if i != r:
                M[[r, i]] = M[[i, r]]
            M[r] = self.reduce(M[r] * self.inv(M[r, c]))
            others = np.nonzero(M[:, c])[0]
            others = others[others != r]
            if len(others):
                M[others] = self.reduce(M[others] - np.outer(M[others, c], M[r]))
            piv.append(c)
            r += 1
        return M, piv

    def rank(self, A):
        if A.size == 0:
            return 0
        return len(self.rref(A)[1])

    def nullspace(self, A):
        """Columns forming a basis of ``{x : A x = 0}``."""
        n = A.shape[1]
        if A.shape[0] == 0 or n == 0:
            return self.eye(n)
        R, piv = self.rref(A)
        free = [c for c in range(n) if c not in set(piv)]
        N = self.zeros(n, len(free))
        for k, f in enumerate(free):
            N[f, k] = 1
            for i, pc in enumerate(piv):
                N[pc, k] = self.reduce(-R[i, f])
        return N

    def colspace(self, A):
        """A subset of the columns of ``A`` forming a basis of its span."""
        if A.size == 0:
            return self.zeros(A.shape[0], 0)
        _, piv = self.rref(A)
        return A[:, piv].copy()

    def solve(self, A, B):
        """Some ``X`` with ``A X = B``; raises :class:`NotSolvable`."""
        m, n = A.shape
        if B.shape[1] == 0:
            return self.zeros(n, 0)
        if n == 0:
            if self.is_zero(B):
                return self.zeros(0, B.shape[1])
            raise NotSolvable("no solution")
        R, piv = self.rref(np.hstack([A, B]))
        if piv and piv[-1] >= n:
            raise NotSolvable("no solution")
        X = self.zeros(n, B.shape[1])
        for i, pc in enumerate(piv):
            X[pc] = R[i, n:]
        return X

    def in_span(self, A, v):
        try:
            self.solve(A, v)
            return True
        except NotSolvable:
            return False

    def complement(self, B, Z):
        """Columns of ``Z`` extending a basis of span(B) to span(B)+span(Z)."""
        if Z.shape[1] == 0:
            return Z.copy()
        M = np.hstack([B, Z])
        _, piv = self.rref(M)
        keep = [c - B.shape[1] for c in piv if c >= B.shape[1]]
        return Z[:, keep].copy()

    def intersect(self, A, B):
        """Basis of span(A) cap span(B)."""
        N = self.nullspace(np.hstack([A, self.neg(B)]))
        return self.colspace(self.matmul(A, N[: A.shape[1]]))

    def all_matrices(self, m, n):
        """Every ``m x n`` matrix (finite fields only)."""
        for vals in itertools.product(self.elements(), repeat=m * n):
            yield np.array(vals, dtype=self.dtype).reshape(m, n)

    def count(self, dim):
        """Cardinality of a vector space of dimension ``dim``."""
        if not self.p:
            raise ValueError("Q-vector spaces are infinite")
        return self.p**dim


@lru_cache(maxsize=None)
def field(p: int) -> Field:
    return Field(p)


GF2 = field(2)
GF3 = field(3)
QQ = field(0)
