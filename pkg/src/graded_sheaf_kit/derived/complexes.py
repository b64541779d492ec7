"""Bounded cochain complexes of graded sheaves."""
from __future__ import annotations

from ..sheaves.core import (
    GradedSheaf,
    direct_sum,
    identity,
    subquotient,
    zero_map,
    zero_sheaf,
)


class ComplexError(ValueError):
    pass


class ComplexOfSheaves:
    """``terms[n]`` with differentials ``diffs[n]: terms[n] -> terms[n+1]``."""

    def __init__(self, terms, diffs=None, check=True, name=None):
        terms = {n: F for n, F in terms.items() if F is not None}
        if not terms:
            raise ComplexError("a complex needs at least one term (possibly zero)")
        some = next(iter(terms.values()))
        self.space, self.K = some.space, some.K
        self.name = name
        lo, hi = min(terms), max(terms)
        self.terms = {n: terms.get(n) or zero_sheaf(self.space, self.K) for n in range(lo, hi + 1)}
        self.diffs = {}
        for n in range(lo, hi):
            d = (diffs or {}).get(n)
            self.diffs[n] = d if d is not None else zero_map(self.terms[n], self.terms[n + 1])
        if check:
            bad = self.failures()
            if bad:
                raise ComplexError("; ".join(bad))

    @classmethod
    def single(cls, F: GradedSheaf, degree=0):
        return cls({degree: F})

    @property
    def lo(self):
        return min(self.terms)

    @property
    def hi(self):
        return max(self.terms)

    def term(self, n):
        return self.terms.get(n) or zero_sheaf(self.space, self.K)

    def d(self, n):
        if n in self.diffs:
            return self.diffs[n]
        return zero_map(self.term(n), self.term(n + 1))

    def failures(self):
        out = []
        for n in range(self.lo, self.hi - 1):
            if not (self.diffs[n + 1] @ self.diffs[n]).is_zero:
                out.append(f"d o d != 0 at {n}")
        for n, d in self.diffs.items():
            nat = d.naturality_failures()
            if nat:
                out.append(f"differential {n} not a sheaf map: {nat[0]}")
        return out

    def shift(self, k):
        """``C[k]`` with ``C[k]^n = C^{n+k}`` and differential ``(-1)^k d``."""
        s = -1 if k % 2 else 1
        terms = {n - k: F for n, F in self.terms.items()}
        diffs = {n - k: d.scale(s) for n, d in self.diffs.items()}
        return ComplexOfSheaves(terms, diffs, check=False)

    def cohomology(self, n) -> GradedSheaf:
        K = self.K
        F = self.term(n)
        dout = self.d(n)
        din = self.d(n - 1)
        Z = {(x, d): K.nullspace(dout.at(x, d)) for x in F.points for d in F.dims[x]}
        B = {(x, d): K.colspace(din.at(x, d)) for x in F.points for d in F.dims[x]}
        Q, _ = subquotient(F, Z, B, name=f"H^{n}")
        return Q

    def cohomology_dims(self, x, n, deg):
        """``dim H^n`` at stalk ``x`` in degree ``deg`` (rank computation only)."""
        K = self.K
        m = self.term(n).dim(x, deg)
        if not m:
            return 0
        r_out = K.rank(self.d(n).at(x, deg)) if n < self.hi else 0
        A = self.d(n - 1).at(x, deg) if n > self.lo else None
        r_in = K.rank(A) if A is not None and A.size else 0
        return m - r_out - r_in

    def cohomology_table(self):
        """``{n: {x: {deg: dim}}}`` with zeros omitted."""
        out = {}
        for n in range(self.lo, self.hi + 1):
            tab = {}
            F = self.term(n)
            for x in F.points:
                row = {}
                for d in F.dims[x]:
                    h = self.cohomology_dims(x, n, d)
                    if h:
                        row[d] = h
                if row:
                    tab[x] = row
            if tab:
                out[n] = tab
        return out

    def is_acyclic(self):
        return not self.cohomology_table()

    def table(self):
        return {n: F.table() for n, F in self.terms.items() if not F.is_zero}

    def __repr__(self):
        return f"ComplexOfSheaves({self.name or ''} {self.table()})"


class ChainMap:
    """Degreewise sheaf maps ``comps[n]: C^n -> D^n`` commuting with ``d``."""

    def __init__(self, src: ComplexOfSheaves, dst: ComplexOfSheaves, comps=None, check=True):
        self.src, self.dst = src, dst
        self.comps = {}
        for n in range(min(src.lo, dst.lo), max(src.hi, dst.hi) + 1):
            c = (comps or {}).get(n)
            self.comps[n] = c if c is not None else zero_map(src.term(n), dst.term(n))
        if check:
            bad = self.failures()
            if bad:
                raise ComplexError("not a chain map: " + "; ".join(bad))

    def at(self, n):
        return self.comps.get(n) or zero_map(self.src.term(n), self.dst.term(n))

    def failures(self):
        out = []
        for n in self.comps:
            a = self.dst.d(n) @ self.at(n)
            b = self.at(n + 1) @ self.src.d(n)
            if not a.equals(b):
                out.append(f"square at {n}")
        return out

    def __matmul__(self, other):
        return ChainMap(other.src, self.dst, {n: self.at(n) @ other.at(n) for n in other.comps}, check=False)

    def is_quasi_iso(self):
        return cone(self).is_acyclic()


def identity_chain(C: ComplexOfSheaves) -> ChainMap:
    return ChainMap(C, C, {n: identity(F) for n, F in C.terms.items()}, check=False)


def _sum_map(src_parts, dst_parts, blocks, S, T):
    """Map between direct sums from ``blocks[(i, j)]: src_parts[j] -> dst_parts[i]``."""
    (Ssum, _, Sprj), (Tsum, Tinj, _) = S, T
    total = zero_map(Ssum, Tsum)
    for (i, j), phi in blocks.items():
        total = total + (Tinj[i] @ phi @ Sprj[j])
    return total


def cone(phi: ChainMap) -> ComplexOfSheaves:
    """``Cone(phi)^n = C^{n+1} (+) D^n``, ``d = [[-d_C, 0], [phi, d_D]]``."""
    C, D = phi.src, phi.dst
    lo, hi = min(C.lo - 1, D.lo), max(C.hi - 1, D.hi)
    sums = {n: direct_sum(C.term(n + 1), D.term(n)) for n in range(lo, hi + 2)}
    terms = {n: sums[n][0] for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo, hi):
        blocks = {(0, 0): -C.d(n + 1), (1, 0): phi.at(n + 1), (1, 1): D.d(n)}
        diffs[n] = _sum_map(None, None, blocks, sums[n], sums[n + 1])
    return ComplexOfSheaves(terms, diffs, check=False)


def total_complex(T, dh, dv, name=None) -> ComplexOfSheaves:
    """Totalize a double complex.

    ``T[(p, q)]`` are sheaves; ``dh[(p, q)]: T[p,q] -> T[p+1,q]`` and
    ``dv[(p, q)]: T[p,q] -> T[p,q+1]`` commute.  The total differential is
    ``dh + (-1)^p dv``.
    """
    keys = sorted(T)
    ns = sorted({p + q for p, q in keys})
    parts = {n: [k for k in keys if k[0] + k[1] == n] for n in ns}
    sums = {n: direct_sum(*[T[k] for k in parts[n]]) for n in ns}
    diffs = {}
    for n in ns:
        if n + 1 not in sums:
            continue
        blocks = {}
        idx1 = {k: i for i, k in enumerate(parts[n + 1])}
        for j, (p, q) in enumerate(parts[n]):
            if (p + 1, q) in idx1 and (p, q) in dh:
                blocks[(idx1[(p + 1, q)], j)] = dh[(p, q)]
            if (p, q + 1) in idx1 and (p, q) in dv:
                m = dv[(p, q)]
                blocks[(idx1[(p, q + 1)], j)] = m if p % 2 == 0 else -m
        diffs[n] = _sum_map(None, None, blocks, sums[n], sums[n + 1])
    terms = {n: sums[n][0] for n in ns}
    C = ComplexOfSheaves(terms, diffs, check=False, name=name)
    C.meta = {"parts": parts, "sums": sums}
    return C


def total_chain_map(src: ComplexOfSheaves, dst: ComplexOfSheaves, blocks) -> ChainMap:
    """Chain map between totalizations from ``blocks[(p, q)] -> (p2, q2)``
    given as ``{((p2, q2), (p, q)): SheafMap}``."""
    comps = {}
    for n in src.terms:
        if n not in dst.terms:
            continue
        sp, dp = src.meta["parts"][n], dst.meta["parts"][n]
        si = {k: i for i, k in enumerate(sp)}
        di = {k: i for i, k in enumerate(dp)}
        bl = {}
        for (kd, ks), m in blocks.items():
            if ks in si and kd in di:
                bl[(di[kd], si[ks])] = m
        comps[n] = _sum_map(None, None, bl, src.meta["sums"][n], dst.meta["sums"][n])
    return ChainMap(src, dst, comps, check=False)


def apply_termwise(C: ComplexOfSheaves, on_obj, on_map, name=None) -> ComplexOfSheaves:
    """Apply an additive functor given on objects and on maps (the map
    version receives ``(phi, F(src), F(dst))``)."""
    terms = {n: on_obj(F) for n, F in C.terms.items()}
    diffs = {n: on_map(d, terms[n], terms[n + 1]) for n, d in C.diffs.items()}
    return ComplexOfSheaves(terms, diffs, check=False, name=name)


def apply_chain_map(phi: ChainMap, src, dst, on_map) -> ChainMap:
    return ChainMap(src, dst, {n: on_map(phi.at(n), src.term(n), dst.term(n)) for n in phi.comps if n in src.terms and n in dst.terms}, check=False)


# -- complexes of vector spaces ---------------------------------------------
class VectorComplex:
    """``dims[n]`` and matrices ``diffs[n]: K^{dims[n]} -> K^{dims[n+1]}``."""

    def __init__(self, K, dims, diffs):
        self.K = K
        self.dims = dict(dims)
        self.diffs = dict(diffs)

    def d(self, n):
        return self.diffs.get(n, self.K.zeros(self.dims.get(n + 1, 0), self.dims.get(n, 0)))

    def cohomology_dim(self, n):
        K = self.K
        m = self.dims.get(n, 0)
        if not m:
            return 0
        a = self.d(n)
        b = self.d(n - 1)
        return m - (K.rank(a) if a.size else 0) - (K.rank(b) if b.size else 0)

    def cohomology(self):
        return {n: h for n in sorted(self.dims) if (h := self.cohomology_dim(n))}

    def cocycles(self, n):
        a = self.d(n)
        return self.K.nullspace(a) if a.shape[0] else self.K.eye(self.dims.get(n, 0))

    def coboundaries(self, n):
        b = self.d(n - 1)
        return self.K.colspace(b) if b.size else self.K.zeros(self.dims.get(n, 0), 0)
