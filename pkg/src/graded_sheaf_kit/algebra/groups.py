"""Finitely generated abelian groups in cyclic coordinates.

A :class:`GradingGroup` is ``Z/o_1 + ... + Z/o_k`` where each order ``o_i`` is
either ``0`` (a copy of ``Z``) or at least 2.  Elements are tuples of ints and
the normal form reduces each torsion coordinate modulo its order, so element
equality is tuple equality after :meth:`GradingGroup.nf`.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import gcd

import numpy as np

from .snf import (
    as_int_matrix,
    diagonal,
    int_eye,
    int_matmul,
    int_zeros,
    integer_inverse,
    integer_kernel,
    integer_solve,
    lattice_basis,
    smith_normal_form,
)


class InfiniteSupport(Exception):
    """A graded object would need infinitely many nonzero degrees.

    ``where`` carries the offending point/degree data.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


@dataclass(frozen=True)
class GradingGroup:
    orders: tuple = ()

    def __post_init__(self):
        for o in self.orders:
            if o < 0 or o == 1:
                raise ValueError(f"invalid cyclic order {o}")

    # -- construction -------------------------------------------------
    @classmethod
    def parse(cls, spec: str) -> "GradingGroup":
        """Parse ``0``, ``Z``, ``Z/3``, ``Z+Z/2``, ``Z^2+Z/4``."""
        spec = spec.replace(" ", "")
        if spec in ("0", ""):
            return cls(())
        orders = []
        for term in spec.split("+"):
            m = re.fullmatch(r"Z(?:/(\d+))?(?:\^(\d+))?", term)
            if not m:
                raise ValueError(f"bad group spec {spec!r}")
            o = int(m.group(1)) if m.group(1) else 0
            k = int(m.group(2)) if m.group(2) else 1
            if o == 1:
                continue
            orders.extend([o] * k)
        return cls(tuple(orders))

    @classmethod
    def from_presentation(cls, relations, ngens):
        """Group ``Z^ngens / rowspace(relations)``.

        Returns ``(G, to_canonical, section)``: ``to_canonical`` maps generator
        coordinates to coordinates of ``G``; ``section`` maps back.
        """
        if ngens == 0:
            return cls(()), int_zeros(0, 0), int_zeros(0, 0)
        R = as_int_matrix(relations, (-1, ngens)) if np.size(relations) else int_zeros(0, ngens)
        if R.shape[0] == 0:
            E = int_eye(ngens)
            return cls((0,) * ngens), E, E.copy()
        D, U, V = smith_normal_form(R)
        d = diagonal(D) + [0] * (ngens - min(R.shape))
        kept = [i for i in range(ngens) if d[i] != 1]
        # rows are relations: x -> x V turns them into the rows of D
        Vinv = integer_inverse(V)
        return cls(tuple(d[i] for i in kept)), V[:, kept].T.copy(), Vinv[kept, :].T.copy()

    def __str__(self):
        if not self.orders:
            return "0"
        return "+".join("Z" if o == 0 else f"Z/{o}" for o in self.orders)

    # -- elements -------------------------------------------------------
    @property
    def ngens(self):
        return len(self.orders)

    @property
    def rank(self):
        return sum(1 for o in self.orders if o == 0)

    @property
    def is_finite(self):
        return self.rank == 0

    @property
    def order(self):
        if not self.is_finite:
            return 0
        n = 1
        for o in self.orders:
            n *= o
        return n

    @property
    def zero(self):
        return (0,) * len(self.orders)

    def nf(self, a) -> tuple:
        a = tuple(int(v) for v in a)
        if len(a) != len(self.orders):
            raise ValueError(f"element {a} has wrong length for {self}")
        return tuple(v % o if o else v for v, o in zip(a, self.orders))

    def add(self, a, b):
        return self.nf(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return self.nf(x - y for x, y in zip(a, b))

    def neg(self, a):
        return self.nf(-x for x in a)

    def scale(self, n, a):
        return self.nf(n * x for x in a)

    def elements(self):
        if not self.is_finite:
            raise InfiniteSupport(f"cannot enumerate the infinite group {self}", where=self)
        return list(itertools.product(*[range(o) for o in self.orders]))

    def window(self, radius):
        """Elements whose free coordinates lie in ``[-radius, radius]``."""
        ranges = [range(o) if o else range(-radius, radius + 1) for o in self.orders]
        return list(itertools.product(*ranges))

    def invariants(self):
        """``(rank, torsion invariant factors)``; equal iff isomorphic."""
        tors = [o for o in self.orders if o]
        if not tors:
            return (self.rank, ())
        D, _, _ = smith_normal_form(np.diag(np.array(tors, dtype=object)))
        return (self.rank, tuple(x for x in diagonal(D) if x != 1))

    def isomorphic(self, other) -> bool:
        return self.invariants() == other.invariants()


def direct_sum(*groups):
    """``(G, injections, projections)`` for the direct sum of ``groups``."""
    orders = tuple(o for g in groups for o in g.orders)
    G = GradingGroup(orders)
    inj, proj = [], []
    off = 0
    for g in groups:
        n = g.ngens
        M = int_zeros(len(orders), n)
        for i in range(n):
            M[off + i, i] = 1
        inj.append(GroupHom(g, G, M))
        proj.append(GroupHom(G, g, M.T.copy()))
        off += n
    return G, inj, proj


class GroupHom:
    """Homomorphism given by an integer matrix on cyclic coordinates."""

    def __init__(self, src: GradingGroup, dst: GradingGroup, matrix=None, check=True):
        self.src = src
        self.dst = dst
        if matrix is None:
            matrix = int_zeros(dst.ngens, src.ngens)
        self.matrix = as_int_matrix(matrix, (dst.ngens, src.ngens)) if np.size(matrix) else int_zeros(dst.ngens, src.ngens)
        self._reduce()
        if check:
            self.check()

    def _reduce(self):
        for i, o in enumerate(self.dst.orders):
            if o:
                for j in range(self.src.ngens):
                    self.matrix[i, j] %= o

    def check(self):
        for j, o in enumerate(self.src.orders):
            if o and any(v != 0 for v in self.dst.nf(o * self.matrix[:, j])):
                raise ValueError(f"not a homomorphism: generator {j} of order {o}")

    @classmethod
    def identity(cls, G):
        return cls(G, G, int_eye(G.ngens), check=False)

    @classmethod
    def zero_map(cls, src, dst):
        return cls(src, dst, None, check=False)

    def __call__(self, a) -> tuple:
        if self.src.ngens == 0:
            return self.dst.zero
        v = self.matrix.dot(np.array(list(a), dtype=object))
        return self.dst.nf(v)

    def __matmul__(self, other: "GroupHom") -> "GroupHom":
        """Composition ``self o other``."""
        if other.dst != self.src:
            raise ValueError("composition of mismatched homomorphisms")
        return GroupHom(other.src, self.dst, int_matmul(self.matrix, other.matrix), check=False)

    def __eq__(self, other):
        if not isinstance(other, GroupHom):
            return NotImplemented
        return (
            self.src == other.src
            and self.dst == other.dst
            and all(self(e) == other(e) for e in _basis(self.src))
        )

    def __hash__(self):
        return hash((self.src, self.dst, tuple(self.matrix.flat)))

    def __repr__(self):
        return f"GroupHom({self.src} -> {self.dst}, {self.matrix.tolist()})"

    def _lift_matrix(self):
        """``[H | -D]`` whose integer kernel, cut to the source block, is ker."""
        tors = [i for i, o in enumerate(self.dst.orders) if o]
        D = int_zeros(self.dst.ngens, len(tors))
        for k, i in enumerate(tors):
            D[i, k] = -self.dst.orders[i]
        return np.hstack([self.matrix, D]) if self.dst.ngens else int_zeros(0, self.src.ngens)

    def kernel(self):
        """``(K, inclusion)``."""
        nA = self.src.ngens
        if nA == 0:
            K = GradingGroup(())
            return K, GroupHom(K, self.src, check=False)
        L = self._lift_matrix()
        gens = integer_kernel(L, ncols=L.shape[1])[:nA, :]
        B = lattice_basis(gens, nA)
        k = B.shape[1]
        rels = []
        for i, o in enumerate(self.src.orders):
            if o:
                e = int_zeros(nA, 1)
                e[i, 0] = o
                c = integer_solve(B, e)
                if c is None:
                    raise AssertionError("torsion relation outside the kernel lattice")
                rels.append(list(c[:, 0]))
        K, _, section = GradingGroup.from_presentation(rels, k)
        inc = int_matmul(B, section) if k else int_zeros(nA, 0)
        return K, GroupHom(K, self.src, inc)

    def cokernel(self):
        """``(C, projection)``."""
        nB = self.dst.ngens
        rels = [list(self.matrix[:, j]) for j in range(self.src.ngens)]
        for i, o in enumerate(self.dst.orders):
            if o:
                r = [0] * nB
                r[i] = o
                rels.append(r)
        C, to_can, _ = GradingGroup.from_presentation(rels, nB)
        return C, GroupHom(self.dst, C, to_can)

    def is_injective(self):
        return self.kernel()[0].ngens == 0

    def is_surjective(self):
        return self.cokernel()[0].ngens == 0

    def is_iso(self):
        return self.is_injective() and self.is_surjective()

    def preimage(self, b):
        """Some ``a`` with ``self(a) == b``, or ``None``."""
        b = self.dst.nf(b)
        if self.src.ngens == 0:
            return self.src.zero if all(v == 0 for v in b) else None
        if self.dst.ngens == 0:
            return self.src.zero
        L = self._lift_matrix()
        sol = integer_solve(L, np.array(b, dtype=object).reshape(-1, 1))
        if sol is None:
            return None
        return self.src.nf(sol[: self.src.ngens, 0])

    def fiber(self, b, window=None):
        """All ``a`` with ``self(a) == b``; raises when the fiber is infinite."""
        a0 = self.preimage(b)
        if a0 is None:
            return []
        K, inc = self.kernel()
        if K.is_finite:
            return sorted({self.src.add(a0, inc(k)) for k in K.elements()})
        if window is None:
            raise InfiniteSupport(
                f"fiber of {self!r} over {b} is infinite", where=(self, b)
            )
        return [a for a in self.src.window(window) if self(a) == b]


def _basis(G):
    out = []
    for i in range(G.ngens):
        e = [0] * G.ngens
        e[i] = 1
        out.append(tuple(e))
    return out


def hom_from_images(src, dst, images):
    """Homomorphism sending the i-th cyclic generator of ``src`` to images[i]."""
    M = int_zeros(dst.ngens, src.ngens)
    for j, img in enumerate(images):
        for i, v in enumerate(dst.nf(img)):
            M[i, j] = v
    return GroupHom(src, dst, M)


def cyclic_gcd(a, b):
    """gcd with the convention that 0 stands for the free group Z."""
    return gcd(a, b)
