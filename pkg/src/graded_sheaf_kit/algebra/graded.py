"""Graded modules over a grading group, and graded finite-rank algebras."""
from __future__ import annotations

import itertools

import numpy as np

from .groups import GradingGroup
from .linalg import Field
from .modules import FgModule, direct_sum_modules, hom_module, tensor_module


class GradingMismatch(ValueError):
    pass


class GradedModule:
    """Finite direct sum of FgModules indexed by normal-form degrees."""

    def __init__(self, grading: GradingGroup, ring, parts=None):
        self.grading = grading
        self.ring = ring
        self.parts = {}
        for deg, M in (parts or {}).items():
            deg = grading.nf(deg)
            if deg in self.parts:
                raise ValueError(f"degree {deg} given twice")
            if not M.is_zero:
                self.parts[deg] = M

    @classmethod
    def concentrated(cls, grading, ring, deg, M):
        return cls(grading, ring, {deg: M})

    def __getitem__(self, deg):
        return self.parts.get(self.grading.nf(deg), FgModule.zero(self.ring))

    @property
    def support(self):
        return sorted(self.parts)

    @property
    def is_zero(self):
        return not self.parts

    def __eq__(self, other):
        return (
            isinstance(other, GradedModule)
            and self.grading == other.grading
            and self.parts.keys() == other.parts.keys()
            and all(self.parts[d].isomorphic(other.parts[d]) for d in self.parts)
        )

    def __repr__(self):
        body = ", ".join(f"{d}: {M}" for d, M in sorted(self.parts.items()))
        return f"GradedModule[{self.grading}]({{{body}}})"

    def table(self):
        return {d: M.invariants for d, M in sorted(self.parts.items())}


def _check(A, B):
    if A.grading != B.grading:
        raise GradingMismatch(f"{A.grading} vs {B.grading}")
    if A.ring != B.ring:
        raise GradingMismatch(f"{A.ring} vs {B.ring}")


def shift_module(A: GradedModule, lam) -> GradedModule:
    """``A<lam>`` with ``A<lam>_mu = A_{mu+lam}``."""
    G = A.grading
    return GradedModule(G, A.ring, {G.sub(d, lam): M for d, M in A.parts.items()})


def graded_tensor(A: GradedModule, B: GradedModule) -> GradedModule:
    _check(A, B)
    G = A.grading
    acc = {}
    for (da, Ma), (db, Mb) in itertools.product(A.parts.items(), B.parts.items()):
        acc.setdefault(G.add(da, db), []).append(tensor_module(Ma, Mb))
    return GradedModule(G, A.ring, {d: direct_sum_modules(A.ring, ms) for d, ms in acc.items()})


def graded_hom(A: GradedModule, B: GradedModule) -> GradedModule:
    """Part ``lam`` = degree-preserving maps ``A -> B<lam>``."""
    _check(A, B)
    G = A.grading
    acc = {}
    for (da, Ma), (db, Mb) in itertools.product(A.parts.items(), B.parts.items()):
        acc.setdefault(G.sub(db, da), []).append(hom_module(Ma, Mb))
    return GradedModule(G, A.ring, {d: direct_sum_modules(A.ring, ms) for d, ms in acc.items()})


class GradedRingData:
    """A commutative graded algebra of finite rank over a field.

    ``dims[deg]`` is the dimension of the degree-``deg`` part; ``mult[(a, b)]``
    is an array of shape ``(dims[a+b], dims[a], dims[b])`` with the structure
    constants; ``unit`` is a vector in degree 0.  Validated on construction.
    """

    def __init__(self, K: Field, grading: GradingGroup, dims, mult, unit):
        self.K = K
        self.grading = grading
        self.dims = {grading.nf(d): n for d, n in dims.items() if n}
        self.mult = {}
        for (a, b), T in mult.items():
            a, b = grading.nf(a), grading.nf(b)
            self.mult[(a, b)] = np.asarray(T, dtype=K.dtype) % K.p if K.p else np.asarray(T, dtype=object)
        self.unit = K.mat(unit, (-1, 1))
        self.validate()

    @classmethod
    def base(cls, K, grading):
        return cls(K, grading, {grading.zero: 1}, {(grading.zero, grading.zero): [[[1]]]}, [1])

    @classmethod
    def truncated_polynomial(cls, K, grading, m, t_degree):
        """``k[t]/t^m`` with ``t`` in degree ``t_degree``.

        Distinct powers must land in distinct degrees or share one; parts
        collect every power of the same degree.
        """
        G = grading
        degs = [G.scale(i, t_degree) for i in range(m)]
        dims, index = {}, {}
        for i, d in enumerate(degs):
            index[i] = (d, dims.get(d, 0))
            dims[d] = dims.get(d, 0) + 1
        mult = {}
        for a in dims:
            for b in dims:
                mult[(a, b)] = np.zeros((dims.get(G.add(a, b), 0), dims[a], dims[b]), dtype=object)
        for i in range(m):
            for j in range(m):
                if i + j < m:
                    da, ia = index[i]
                    db, ib = index[j]
                    dc, ic = index[i + j]
                    mult[(da, db)][ic, ia, ib] = 1
        unit = [0] * dims[G.zero]
        unit[index[0][1]] = 1
        ring = cls(K, G, dims, mult, unit)
        ring.power_index = index
        return ring

    @classmethod
    def periodic_polynomial(cls, K, grading, m, t_degree):
        """``k[t]/(t^m - 1)``; homogeneous when ``m * t_degree = 0``."""
        G = grading
        if G.scale(m, t_degree) != G.zero:
            raise ValueError(f"t^{m} - 1 is not homogeneous for deg t = {t_degree}")
        ring = cls.truncated_polynomial(K, G, m, t_degree)
        index = ring.power_index
        for i in range(m):
            for j in range(m):
                if i + j >= m:
                    da, ia = index[i]
                    db, ib = index[j]
                    dc, ic = index[i + j - m]
                    ring.mult[(da, db)][ic, ia, ib] = 1
        ring.validate()
        return ring

    def dim(self, d):
        return self.dims.get(self.grading.nf(d), 0)

    @property
    def support(self):
        return sorted(self.dims)

    def product(self, a, x, b, y):
        """Product of ``x`` (degree ``a``) and ``y`` (degree ``b``) as a vector."""
        K = self.K
        c = self.grading.add(a, b)
        T = self.mult.get((a, b))
        out = K.zeros(self.dim(c), 1)
        if T is None or T.size == 0 or out.shape[0] == 0:
            return out
        x = K.mat(x, (-1, 1))
        y = K.mat(y, (-1, 1))
        for k in range(T.shape[0]):
            M = K.mat(T[k])
            v = K.matmul(K.matmul(x.T, M), y)
            out[k, 0] = v[0, 0]
        return out

    def left_matrix(self, a, x, b):
        """Matrix of ``y -> x*y`` from degree ``b`` to degree ``a+b``."""
        K = self.K
        cols = []
        for j in range(self.dim(b)):
            e = K.zeros(self.dim(b), 1)
            e[j, 0] = 1
            cols.append(self.product(a, x, b, e))
        c = self.grading.add(a, b)
        return np.hstack(cols) if cols else K.zeros(self.dim(c), 0)

    def basis(self, d):
        K = self.K
        n = self.dim(d)
        return [K.eye(n)[:, [i]] for i in range(n)]

    def validate(self):
        K, G = self.K, self.grading
        z = G.zero
        if self.unit.shape[0] != self.dim(z):
            raise ValueError("unit must live in degree 0")
        for a in self.dims:
            for b in self.dims:
                T = self.mult.get((a, b))
                shape = (self.dim(G.add(a, b)), self.dims[a], self.dims[b])
                if T is None:
                    if shape[0]:
                        self.mult[(a, b)] = np.zeros(shape, dtype=K.dtype)
                    continue
                if T.shape != shape:
                    raise ValueError(f"structure constants for {(a, b)} have shape {T.shape}, want {shape}")
        for a in self.dims:
            for x in self.basis(a):
                if not K.equal(self.product(z, self.unit, a, x), x):
                    raise ValueError("unit law fails")
                for b in self.dims:
                    for y in self.basis(b):
                        if not K.equal(self.product(a, x, b, y), self.product(b, y, a, x)):
                            raise ValueError("multiplication is not commutative")
                        for c in self.dims:
                            for w in self.basis(c):
                                left = self.product(G.add(a, b), self.product(a, x, b, y), c, w)
                                right = self.product(a, x, G.add(b, c), self.product(b, y, c, w))
                                if not K.equal(left, right):
                                    raise ValueError("multiplication is not associative")
