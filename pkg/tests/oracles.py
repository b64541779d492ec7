"""Independent brute-force oracles used by the tests.

Ordinary sheaves on a finite poset over F2 are stored as a dimension per
point and a matrix for every pair ``x <= y``.  Limits are counted by
enumerating all vectors, Hom sets by enumerating all matrices; numpy is
used only for mod 2 products.  Nothing here calls into the package except
to read raw stalk dimensions and cover matrices.
"""
from __future__ import annotations

import itertools

import numpy as np

TRIVIAL = ()


def _mul(A, B):
    return (A @ B) % 2


def _apply(A, v):
    return tuple(int(t) for t in (A @ np.array(v, dtype=np.int64).reshape(-1)) % 2)


def _eye(n):
    return np.eye(n, dtype=np.int64)


def _zero(m, n):
    return np.zeros((m, n), dtype=np.int64)


def _kron(A, B):
    return np.kron(A, B) % 2


class Poset:
    def __init__(self, points, le):
        self.points = list(points)
        self.le = set(le)

    def leq(self, a, b):
        return (a, b) in self.le

    def up(self, x):
        return {y for y in self.points if self.leq(x, y)}

    def opens(self):
        out = []
        for bits in itertools.product((0, 1), repeat=len(self.points)):
            U = {p for p, b in zip(self.points, bits) if b}
            if all(y in U for x in U for y in self.up(x)):
                out.append(frozenset(U))
        return out

    def covers(self):
        return [(a, b) for a, b in self.le if a != b
                and not any(c not in (a, b) and self.leq(a, c) and self.leq(c, b) for c in self.points)]


class OSheaf:
    """``dim[x]`` and ``mat[(x, y)]`` for every ``x <= y``."""

    def __init__(self, P: Poset, dim, mat):
        self.P, self.dim, self.mat = P, dict(dim), dict(mat)

    @classmethod
    def from_covers(cls, P, dim, cov):
        mat = {(x, x): _eye(dim[x]) for x in P.points}
        pending = sorted(((a, b) for a, b in P.le if a != b),
                         key=lambda ab: len([c for c in P.points if P.leq(ab[0], c) and P.leq(c, ab[1])]))
        for a, b in pending:
            if (a, b) in cov:
                mat[(a, b)] = cov[(a, b)]
                continue
            c = next(c for c in P.points if (a, c) in cov and P.leq(c, b))
            mat[(a, b)] = _mul(mat[(c, b)], cov[(a, c)])
        return cls(P, dim, mat)

    @classmethod
    def of(cls, F):
        """Read an ungraded sheaf of the package (trivial grading)."""
        S = F.space
        P = Poset(S.points, S.poset.le)
        dim = {x: F.dims[x].get(TRIVIAL, 0) for x in S.points}
        cov = {}
        for (x, y), block in F.maps.items():
            A = block.get(TRIVIAL)
            cov[(x, y)] = _zero(dim[y], dim[x]) if A is None else np.asarray(A, dtype=np.int64).reshape(dim[y], dim[x]) % 2
        return cls.from_covers(P, dim, cov)

    # -- limits ----------------------------------------------------------
    def families(self, U):
        U = sorted(U, key=str)
        spaces = [list(itertools.product((0, 1), repeat=self.dim[x])) for x in U]
        for vals in itertools.product(*spaces):
            s = dict(zip(U, vals))
            if all(_apply(self.mat[(x, y)], s[x]) == s[y] for x in U for y in U if self.P.leq(x, y)):
                yield s

    def count_sections(self, U):
        return sum(1 for _ in self.families(U))

    def stalk_count(self, x):
        return self.count_sections(self.P.up(x))

    def size(self, U):
        return sum(self.dim[x] for x in U)


def tensor(F: OSheaf, G: OSheaf) -> OSheaf:
    P = F.P
    dim = {x: F.dim[x] * G.dim[x] for x in P.points}
    mat = {(x, y): _kron(F.mat[(x, y)], G.mat[(x, y)]) for x, y in P.le}
    return OSheaf(P, dim, mat)


def inverse_image(pmap, X: Poset, G: OSheaf) -> OSheaf:
    dim = {x: G.dim[pmap[x]] for x in X.points}
    mat = {(x, y): G.mat[(pmap[x], pmap[y])] for x, y in X.le}
    return OSheaf(X, dim, mat)


def extend_by_zero(F: OSheaf, Y) -> OSheaf:
    P = F.P
    dim = {x: (F.dim[x] if x in Y else 0) for x in P.points}
    mat = {(x, y): (F.mat[(x, y)] if x in Y and y in Y else _zero(dim[y], dim[x])) for x, y in P.le}
    return OSheaf(P, dim, mat)


def _is_closed_map(pmap, X: Poset, S, Y: Poset, T):
    """``S -> T`` is closed: the image of every relatively closed subset of
    ``S`` is closed in ``T``."""
    S = sorted(S, key=str)
    for bits in itertools.product((0, 1), repeat=len(S)):
        C = {s for s, b in zip(S, bits) if b}
        if not all(z in C for c in C for z in S if X.leq(z, c)):
            continue
        img = {pmap[c] for c in C}
        if not all(w in img for z in img for w in T if Y.leq(w, z)):
            return False
    return True


def pushforward_count(pmap, X: Poset, F: OSheaf, Y: Poset, V):
    return F.count_sections({x for x in X.points if pmap[x] in V})


def shriek_count(pmap, X: Poset, F: OSheaf, Y: Poset, V):
    """Sections over ``f^-1 V`` whose support is proper over each ``U_y``."""
    W = {x for x in X.points if pmap[x] in V}
    n = 0
    for s in F.families(W):
        ok = True
        for y in V:
            Ty = Y.up(y)
            supp = {x for x in W if pmap[x] in Ty and any(s[x])}
            if not _is_closed_map(pmap, X, supp, Y, Ty):
                ok = False
                break
        n += ok
    return n


def hom_count(F: OSheaf, G: OSheaf, U=None):
    """Number of natural transformations ``F|U -> G|U``."""
    P = F.P
    U = sorted(U if U is not None else P.points, key=str)
    shapes = [(G.dim[x], F.dim[x]) for x in U]
    spaces = [list(itertools.product((0, 1), repeat=m * n)) for m, n in shapes]
    n = 0
    for vals in itertools.product(*spaces):
        phi = {x: np.array(v, dtype=np.int64).reshape(r, c) for x, v, (r, c) in zip(U, vals, shapes)}
        if all(np.array_equal(_mul(G.mat[(x, y)], phi[x]), _mul(phi[y], F.mat[(x, y)]))
               for x in U for y in U if P.leq(x, y) and x != y):
            n += 1
    return n


def hom_size(F: OSheaf, G: OSheaf, U=None):
    P = F.P
    U = U if U is not None else P.points
    return sum(F.dim[x] * G.dim[x] for x in U)


def graded_hom_count(F, G, p=2, limit=14, extra=None):
    """Degree-preserving natural transformations between two graded
    sheaves of the package, counted by enumerating all components over
    ``F_p`` and testing naturality on covering pairs (and ``extra(phi)``
    when given).  ``None`` when there are more than ``limit`` unknowns."""
    S = F.space
    slots = [(x, mu, G.dims[x].get(mu, 0), n) for x in S.points for mu, n in sorted(F.dims[x].items())]
    slots = [s for s in slots if s[2]]
    if sum(m * n for _, _, m, n in slots) > limit:
        return None
    spaces = [list(itertools.product(range(p), repeat=m * n)) for _, _, m, n in slots]

    def raw(H, x, y, mu):
        A = H.maps[(x, y)].get(mu)
        m = H.dims[y].get(S.lres[(x, y)](mu), 0)
        return np.zeros((m, H.dims[x].get(mu, 0)), dtype=np.int64) if A is None else np.asarray(A, dtype=np.int64)

    count = 0
    for vals in itertools.product(*spaces):
        phi = {(x, mu): np.array(v, dtype=np.int64).reshape(m, n) for (x, mu, m, n), v in zip(slots, vals)}
        ok = True
        for x, y in S.poset.covers:
            rho = S.lres[(x, y)]
            for mu, n in F.dims[x].items():
                m2 = G.dims[y].get(rho(mu), 0)
                a = phi.get((x, mu), np.zeros((G.dims[x].get(mu, 0), n), dtype=np.int64))
                b = phi.get((y, rho(mu)), np.zeros((m2, F.dims[y].get(rho(mu), 0)), dtype=np.int64))
                if not np.array_equal((raw(G, x, y, mu) @ a) % p, (b @ raw(F, x, y, mu)) % p):
                    ok = False
                    break
            if not ok:
                break
        if ok and extra is not None:
            ok = extra(phi)
        count += ok
    return count


def module_hom_count(M, N, p=2, limit=14):
    """R-linear maps between two module sheaves, by enumeration."""
    S = M.space
    R = M.ring

    def comp(phi, x, b):
        m, n = N.F.dims[x].get(b, 0), M.F.dims[x].get(b, 0)
        return phi.get((x, b), np.zeros((m, n), dtype=np.int64))

    def linear(phi):
        for x in S.points:
            G = S.lam[x]
            for a, na in R.R.dims[x].items():
                for b in M.F.dims[x]:
                    c = G.add(a, b)
                    left = comp(phi, x, c) @ np.asarray(M.act_matrix(x, a, b), dtype=np.int64)
                    right = np.asarray(N.act_matrix(x, a, b), dtype=np.int64) @ np.kron(np.eye(na, dtype=np.int64), comp(phi, x, b))
                    if not np.array_equal(left % p, right % p):
                        return False
        return True

    return graded_hom_count(M.F, N.F, p, limit, extra=linear)


def _raw(H, phi):
    return np.asarray(H.vectorize(phi.comps), dtype=np.int64).reshape(-1)


def _all_vectors(p, n):
    return np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64).reshape(p ** n, n)


def derived_hom_count(A, B, limit=16):
    """``|Hom_K(A, B)|``: chain maps ``A -> B`` modulo null-homotopic ones.

    Degreewise maps are spanned by :class:`HomSpace` bases; the cocycle
    condition and the homotopy images are then found by enumerating every
    coefficient vector.  Equals ``|Hom_D(A, B)|`` when ``B`` is a bounded
    complex of injectives.  ``None`` when either enumeration has more than
    ``limit`` unknowns.
    """
    from graded_sheaf_kit.sheaves.functors import HomSpace

    p = A.K.p
    lo, hi = min(A.lo, B.lo) - 1, max(A.hi, B.hi) + 1
    H = {(i, j): HomSpace(A.term(i), B.term(j)) for i in range(lo, hi + 1) for j in range(lo, hi + 1)
         if abs(i - j) <= 1}
    degs = list(range(lo, hi + 1))
    maps = {n: H[(n, n)].maps() for n in degs}
    homs = {n: H[(n, n - 1)].maps() if n > lo else [] for n in degs}
    N = sum(len(v) for v in maps.values())
    Nh = sum(len(v) for v in homs.values())
    if N > limit or Nh > limit:
        return None
    # raw coordinates of sum_n Hom(A^n, B^n) and of the cocycle defects
    out_off, o = {}, 0
    for n in degs:
        out_off[n] = o
        o += H[(n, n)].nvars
    cyc_off, c = {}, 0
    for n in degs:
        if (n, n + 1) in H:
            cyc_off[n] = c
            c += H[(n, n + 1)].nvars
    raw_cols, cyc_cols = [], []
    for n in degs:
        for b in maps[n]:
            col = np.zeros(o, dtype=np.int64)
            col[out_off[n] : out_off[n] + H[(n, n)].nvars] = _raw(H[(n, n)], b)
            raw_cols.append(col)
            cyc = np.zeros(c, dtype=np.int64)
            if n in cyc_off:
                v = _raw(H[(n, n + 1)], B.d(n) @ b)
                cyc[cyc_off[n] : cyc_off[n] + len(v)] += v
            if n - 1 in cyc_off:
                v = _raw(H[(n - 1, n)], b @ A.d(n - 1))
                cyc[cyc_off[n - 1] : cyc_off[n - 1] + len(v)] -= v
            cyc_cols.append(cyc)
    R = np.array(raw_cols, dtype=np.int64).reshape(N, o)
    C = np.array(cyc_cols, dtype=np.int64).reshape(N, c)
    coeffs = _all_vectors(p, N)
    cycles = {tuple(r) for r, z in zip((coeffs @ R) % p, (coeffs @ C) % p) if not z.any()}
    hcols = []
    for n in degs:
        for h in homs[n]:
            col = np.zeros(o, dtype=np.int64)
            # d h on A^n and h d on A^(n-1)
            v = _raw(H[(n, n)], B.d(n - 1) @ h)
            col[out_off[n] : out_off[n] + len(v)] += v
            v = _raw(H[(n - 1, n - 1)], h @ A.d(n - 1))
            col[out_off[n - 1] : out_off[n - 1] + len(v)] += v
            hcols.append(col)
    if hcols:
        Hm = np.array(hcols, dtype=np.int64).reshape(Nh, o)
        bounds = {tuple(r) for r in (_all_vectors(p, Nh) @ Hm) % p}
    else:
        bounds = {tuple(np.zeros(o, dtype=np.int64))}
    assert bounds <= cycles
    return len(cycles) // len(bounds)
