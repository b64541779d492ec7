"""Graded sheaves on finite graded spaces, stored pointwise.

A sheaf is a functor along ``<=``: a stalk ``F_x`` for each point, graded by
``Lambda_x``, and for every covering pair ``x < y`` a family of matrices
``F_x[lam] -> F_y[rho_xy(lam)]``.  Coefficients lie in a prime field or Q.
"""
from __future__ import annotations


import numpy as np

from ..algebra.graded import GradedModule
from ..algebra.groups import GradingGroup, InfiniteSupport
from ..algebra.linalg import Field, NotSolvable
from ..algebra.modules import BaseRing, FgModule
from ..space import GradedSpace, NotOpen, sections_of_lambda


class SheafError(ValueError):
    pass


class NonFieldBase(ValueError):
    pass


def base_ring_of(K: Field) -> BaseRing:
    return BaseRing("Q") if K.p == 0 else BaseRing("F_p", K.p)


def require_field(ring) -> Field:
    """Field for a base ring; sheaf computations need field coefficients."""
    if isinstance(ring, Field):
        return ring
    if isinstance(ring, BaseRing):
        if not ring.is_field:
            raise NonFieldBase(f"{ring} is not a field; sheaf-level operations need a field base")
        return ring.field()
    raise TypeError(f"not a ring: {ring!r}")


class GradedSheaf:
    """``dims[x][deg]`` are stalk dimensions, ``maps[(x, y)][deg]`` the
    restriction on a covering pair (missing entries are zero)."""

    def __init__(self, space: GradedSpace, K: Field, dims, maps=None, name=None, check=True):
        self.space = space
        self.K = K
        self.name = name
        self.dims = {}
        for x in space.points:
            G = space.lam[x]
            d = {}
            for deg, n in (dims.get(x) or {}).items():
                if n:
                    d[G.nf(deg)] = d.get(G.nf(deg), 0) + int(n)
            self.dims[x] = d
        self.maps = {}
        for x, y in space.poset.covers:
            rho = space.lres[(x, y)]
            given = {space.lam[x].nf(k): v for k, v in ((maps or {}).get((x, y)) or {}).items()}
            block = {}
            for deg, n in self.dims[x].items():
                m = self.dims[y].get(rho(deg), 0)
                A = given.get(deg)
                if A is None:
                    A = K.zeros(m, n)
                else:
                    A = K.mat(A)
                    if A.shape != (m, n):
                        raise SheafError(
                            f"restriction {x}->{y} in degree {deg}: shape {A.shape}, expected {(m, n)}"
                        )
                block[deg] = A
            extra = set(given) - set(self.dims[x])
            for deg in extra:
                if not K.is_zero(K.mat(given[deg])) and np.asarray(given[deg]).size:
                    raise SheafError(f"restriction {x}->{y} given in empty degree {deg}")
            self.maps[(x, y)] = block
        self._res = {}
        self.meta = {}
        if check:
            diags = self.validate()
            if diags:
                raise SheafError("; ".join(diags))

    # -- basic queries --------------------------------------------------
    @property
    def points(self):
        return self.space.points

    def dim(self, x, deg):
        return self.dims[x].get(self.space.lam[x].nf(deg), 0)

    def support(self, x):
        return sorted(self.dims[x])

    def total_dim(self, x=None):
        if x is None:
            return sum(self.total_dim(y) for y in self.points)
        return sum(self.dims[x].values())

    @property
    def is_zero(self):
        return not any(self.dims[x] for x in self.points)

    def table(self):
        """``{x: {deg: dim}}`` with empty stalks omitted."""
        return {x: dict(sorted(d.items())) for x, d in self.dims.items() if d}

    def res(self, x, y, deg):
        """Restriction ``F_x[deg] -> F_y[rho_xy(deg)]`` for any ``x <= y``."""
        S = self.space
        deg = S.lam[x].nf(deg)
        key = (x, y, deg)
        if key in self._res:
            return self._res[key]
        n = self.dim(x, deg)
        if x == y:
            A = self.K.eye(n)
        else:
            z = next(z for z in S.poset.upper_covers(x) if S.poset.leq(z, y))
            first = self.maps[(x, z)].get(deg)
            if first is None:
                first = self.K.zeros(self.dim(z, S.lres[(x, z)](deg)), n)
            A = self.K.matmul(self.res(z, y, S.lres[(x, z)](deg)), first)
        self._res[key] = A
        return A

    def validate(self):
        diags = []
        P = self.space.poset
        K = self.K
        for x in P.points:
            for z in P.points:
                if not P.lt(x, z):
                    continue
                via = [y for y in P.upper_covers(x) if P.leq(y, z)]
                if len(via) < 2:
                    continue
                for deg in self.dims[x]:
                    ref = None
                    for y in via:
                        r1 = self.maps[(x, y)][deg]
                        A = K.matmul(self.res(y, z, self.space.lres[(x, y)](deg)), r1)
                        if ref is None:
                            ref = (y, A)
                        elif not K.equal(ref[1], A):
                            diags.append(
                                f"restrictions do not compose on {x}->{ref[0]}->{z} vs {x}->{y}->{z} in degree {deg}"
                            )
        return diags

    def stalk_module(self, x) -> GradedModule:
        R = base_ring_of(self.K)
        return GradedModule(self.space.lam[x], R, {d: FgModule.free(R, n) for d, n in self.dims[x].items()})

    def __repr__(self):
        return f"GradedSheaf({self.name or ''} {self.table()})"

    def same_as(self, other):
        """Equality of all stored data (not isomorphism)."""
        if self.space != other.space or self.K != other.K or self.table() != other.table():
            return False
        for key, block in self.maps.items():
            for deg, A in block.items():
                if not self.K.equal(A, other.maps[key][deg]):
                    return False
        return True


class SheafMap:
    """Degree-preserving morphism, ``comps[x][deg]: F_x[deg] -> G_x[deg]``."""

    def __init__(self, src: GradedSheaf, dst: GradedSheaf, comps=None, check=True):
        if src.space != dst.space or src.K != dst.K:
            raise SheafError("sheaf map between different spaces or fields")
        self.src = src
        self.dst = dst
        K = src.K
        self.comps = {}
        for x in src.points:
            c = {}
            given = (comps or {}).get(x) or {}
            given = {src.space.lam[x].nf(k): v for k, v in given.items()}
            for deg, n in src.dims[x].items():
                m = dst.dim(x, deg)
                A = given.get(deg)
                A = K.zeros(m, n) if A is None else K.mat(A)
                if A.shape != (m, n):
                    raise SheafError(f"map component at {x}, degree {deg}: shape {A.shape}, expected {(m, n)}")
                c[deg] = A
            self.comps[x] = c
        if check:
            bad = self.naturality_failures()
            if bad:
                raise SheafError("map is not natural: " + "; ".join(bad[:3]))

    @property
    def K(self):
        return self.src.K

    def at(self, x, deg):
        deg = self.src.space.lam[x].nf(deg)
        A = self.comps[x].get(deg)
        if A is None:
            return self.K.zeros(self.dst.dim(x, deg), 0)
        return A

    def naturality_failures(self):
        out = []
        K = self.K
        S = self.src.space
        for (x, y) in S.poset.covers:
            rho = S.lres[(x, y)]
            for deg in self.src.dims[x]:
                a = K.matmul(self.dst.res(x, y, deg), self.at(x, deg))
                b = K.matmul(self.at(y, rho(deg)), self.src.res(x, y, deg))
                if not K.equal(a, b):
                    out.append(f"square {x}->{y} in degree {deg}")
        return out

    def __matmul__(self, other: "SheafMap") -> "SheafMap":
        """``self o other``."""
        K = self.K
        comps = {
            x: {deg: K.matmul(self.at(x, deg), other.at(x, deg)) for deg in other.src.dims[x]}
            for x in other.src.points
        }
        return SheafMap(other.src, self.dst, comps, check=False)

    def __add__(self, other):
        K = self.K
        comps = {x: {d: K.add(self.at(x, d), other.at(x, d)) for d in self.src.dims[x]} for x in self.src.points}
        return SheafMap(self.src, self.dst, comps, check=False)

    def scale(self, c):
        K = self.K
        comps = {x: {d: K.smul(c, self.at(x, d)) for d in self.src.dims[x]} for x in self.src.points}
        return SheafMap(self.src, self.dst, comps, check=False)

    def __neg__(self):
        return self.scale(-1)

    @property
    def is_zero(self):
        return all(self.K.is_zero(A) for c in self.comps.values() for A in c.values())

    def equals(self, other):
        return all(
            self.K.equal(self.at(x, d), other.at(x, d))
            for x in self.src.points
            for d in set(self.src.dims[x]) | set(other.src.dims[x])
        )

    def is_iso(self):
        """Isomorphism test; by the stalk criterion it is checked pointwise."""
        K = self.K
        for x in self.src.points:
            degs = set(self.src.dims[x]) | set(self.dst.dims[x])
            for d in degs:
                if self.src.dim(x, d) != self.dst.dim(x, d):
                    return False
                A = self.at(x, d)
                if A.shape[0] and K.rank(A) != A.shape[0]:
                    return False
        return True

    def inverse(self):
        if not self.is_iso():
            raise SheafError("not an isomorphism")
        K = self.K
        comps = {
            x: {d: K.solve(self.at(x, d), K.eye(self.dst.dim(x, d))) for d in self.dst.dims[x]}
            for x in self.src.points
        }
        return SheafMap(self.dst, self.src, comps)

    def is_mono(self):
        return all(self.K.rank(A) == A.shape[1] for c in self.comps.values() for A in c.values() if A.size)

    def is_epi(self):
        for x in self.dst.points:
            for d, m in self.dst.dims[x].items():
                A = self.at(x, d)
                if self.K.rank(A) != m:
                    return False
        return True


def identity(F: GradedSheaf) -> SheafMap:
    K = F.K
    return SheafMap(F, F, {x: {d: K.eye(n) for d, n in F.dims[x].items()} for x in F.points}, check=False)


def zero_map(F: GradedSheaf, G: GradedSheaf) -> SheafMap:
    return SheafMap(F, G, {}, check=False)


def zero_sheaf(space, K) -> GradedSheaf:
    return GradedSheaf(space, K, {}, name="0")


def constant_sheaf(space: GradedSpace, K: Field, degree=None, name="k") -> GradedSheaf:
    """Constant sheaf ``k`` placed in a global degree (default 0)."""
    if degree is None:
        fam = {x: space.lam[x].zero for x in space.points}
    else:
        fam = sections_of_lambda(space, space.points).family(degree)
    return _rank_one_on(space, K, space.points, fam, name)


def generator(space: GradedSpace, K: Field, U, lam=None, name=None) -> GradedSheaf:
    """``R_U<-lam>``: rank one on the open ``U`` placed in degree ``lam|y``."""
    U = frozenset(U)
    L = sections_of_lambda(space, U)
    fam = L.family(lam if lam is not None else L.group.zero)
    return _rank_one_on(space, K, U, fam, name or "R_U")


def point_generator(space, K, x, lam=None):
    """``R_{U_x}<-lam>`` with ``lam`` in ``Lambda_x``; represents ``F -> F_x[lam]``."""
    G = space.lam[x]
    lam = G.zero if lam is None else G.nf(lam)
    U = space.poset.up(x)
    fam = {y: space.rho(x, y)(lam) for y in U}
    return _rank_one_on(space, K, U, fam, f"P[{x},{lam}]")


def _rank_one_on(space, K, U, fam, name):
    U = set(U)
    dims = {x: {fam[x]: 1} for x in U}
    maps = {}
    for x, y in space.poset.covers:
        if x in U and y in U:
            maps[(x, y)] = {fam[x]: K.eye(1)}
    return GradedSheaf(space, K, dims, maps, name=name)


def skyscraper(space: GradedSpace, K: Field, x, degree=None, dim=1, name=None) -> GradedSheaf:
    """Rank-``dim`` stalk at the single point ``x`` (a sheaf only if ``x`` is
    closed in its minimal open, which always holds)."""
    G = space.lam[x]
    deg = G.zero if degree is None else G.nf(degree)
    return GradedSheaf(space, K, {x: {deg: dim}}, name=name or f"sky[{x}]")


# -- direct sums ----------------------------------------------------------
def direct_sum(*sheaves):
    """``(S, injections, projections)``; blocks ordered as given."""
    F0 = sheaves[0]
    K, space = F0.K, F0.space
    dims, maps = {}, {}
    offs = {}
    for x in space.points:
        dims[x] = {}
        for i, F in enumerate(sheaves):
            for d, n in F.dims[x].items():
                offs[(i, x, d)] = dims[x].get(d, 0)
                dims[x][d] = dims[x].get(d, 0) + n
    for (x, y) in space.poset.covers:
        rho = space.lres[(x, y)]
        maps[(x, y)] = {}
        for d, n in dims[x].items():
            A = K.zeros(dims[y].get(rho(d), 0), n)
            for i, F in enumerate(sheaves):
                if d in F.dims[x]:
                    r0, c0 = offs.get((i, y, rho(d)), 0), offs[(i, x, d)]
                    B = F.maps[(x, y)][d]
                    A[r0 : r0 + B.shape[0], c0 : c0 + B.shape[1]] = B
            maps[(x, y)][d] = A
    S = GradedSheaf(space, K, dims, maps, check=False)
    inj, prj = [], []
    for i, F in enumerate(sheaves):
        ci, cp = {}, {}
        for x in space.points:
            ci[x], cp[x] = {}, {}
            for d, n in F.dims[x].items():
                E = K.zeros(dims[x][d], n)
                o = offs[(i, x, d)]
                E[o : o + n, :] = K.eye(n)
                ci[x][d] = E
            for d, m in dims[x].items():
                n = F.dims[x].get(d, 0)
                E = K.zeros(n, m)
                if n:
                    o = offs[(i, x, d)]
                    E[:, o : o + n] = K.eye(n)
                cp[x][d] = E
        inj.append(SheafMap(F, S, ci, check=False))
        prj.append(SheafMap(S, F, cp, check=False))
    return S, inj, prj


def map_between_sums(srcs, dsts, blocks, S=None, T=None):
    """Assemble a map ``(+) srcs -> (+) dsts`` from ``blocks[(i, j)]: srcs[j] -> dsts[i]``."""
    S, inj, _ = S if S is not None else direct_sum(*srcs)
    T, _, _ = T if T is not None else direct_sum(*dsts)
    _, _, prj_s = direct_sum(*srcs)
    _, inj_t, _ = direct_sum(*dsts)
    total = zero_map(S, T)
    for (i, j), phi in blocks.items():
        total = total + (inj_t[i] @ phi @ prj_s[j])
    return total


# -- subquotients ---------------------------------------------------------
def subquotient(A: GradedSheaf, Z=None, B=None, name=None):
    """Sheaf ``Z/B`` for subsheaves ``B <= Z <= A`` given by column bases.

    ``Z[(x, deg)]`` and ``B[(x, deg)]`` are bases (default: all of A, and 0).
    Returns ``(Q, C)`` where ``C[(x, deg)]`` are the chosen representatives.
    """
    K = A.K
    S = A.space
    reps, dims = {}, {}
    for x in S.points:
        dims[x] = {}
        for d, n in A.dims[x].items():
            Zb = Z.get((x, d)) if Z is not None else None
            Zb = K.eye(n) if Zb is None else Zb
            Bb = B.get((x, d)) if B is not None else None
            Bb = K.zeros(n, 0) if Bb is None else Bb
            C = K.complement(Bb, Zb)
            reps[(x, d)] = (Bb, C)
            if C.shape[1]:
                dims[x][d] = C.shape[1]
    maps = {}
    for (x, y) in S.poset.covers:
        rho = S.lres[(x, y)]
        maps[(x, y)] = {}
        for d in dims[x]:
            Bx, Cx = reps[(x, d)]
            v = K.matmul(A.res(x, y, d), Cx)
            Byy, Cy = reps.get((y, rho(d)), (K.zeros(v.shape[0], 0), K.zeros(v.shape[0], 0)))
            try:
                sol = K.solve(np.hstack([Byy, Cy]), v)
            except NotSolvable as e:
                raise SheafError(f"subquotient not stable under restriction {x}->{y}") from e
            maps[(x, y)][d] = sol[Byy.shape[1]:]
    Q = GradedSheaf(S, K, dims, maps, name=name, check=False)
    return Q, reps


def kernel(phi: SheafMap):
    """``(Ker, inclusion)``."""
    K = phi.K
    Z = {(x, d): K.nullspace(phi.at(x, d)) for x in phi.src.points for d in phi.src.dims[x]}
    Q, reps = subquotient(phi.src, Z)
    inc = SheafMap(Q, phi.src, {x: {d: reps[(x, d)][1] for d in Q.dims[x]} for x in Q.points}, check=False)
    return Q, inc


def image(phi: SheafMap):
    """``(Im, inclusion into the target)``."""
    K = phi.K
    Z = {(x, d): K.colspace(phi.at(x, d)) for x in phi.dst.points for d in phi.dst.dims[x]}
    Q, reps = subquotient(phi.dst, Z)
    inc = SheafMap(Q, phi.dst, {x: {d: reps[(x, d)][1] for d in Q.dims[x]} for x in Q.points}, check=False)
    return Q, inc


def cokernel(phi: SheafMap):
    """``(Coker, projection)``."""
    K = phi.K
    B = {(x, d): K.colspace(phi.at(x, d)) for x in phi.dst.points for d in phi.dst.dims[x]}
    Q, reps = subquotient(phi.dst, None, B)
    comps = {}
    for x in Q.points:
        comps[x] = {}
        for d, n in phi.dst.dims[x].items():
            Bb, C = reps[(x, d)]
            inv = K.solve(np.hstack([Bb, C]), K.eye(n))
            comps[x][d] = inv[Bb.shape[1]:]
    return Q, SheafMap(phi.dst, Q, comps, check=False)


def is_exact_at(f: SheafMap, g: SheafMap) -> bool:
    """``ker g = im f`` stalkwise (requires ``g o f = 0``)."""
    K = f.K
    if not (g @ f).is_zero:
        return False
    for x in f.dst.points:
        for d, n in f.dst.dims[x].items():
            if n - K.rank(g.at(x, d)) != K.rank(f.at(x, d)):
                return False
    return True


def is_short_exact(f: SheafMap, g: SheafMap) -> bool:
    return f.is_mono() and g.is_epi() and is_exact_at(f, g)


# -- sections -------------------------------------------------------------
def candidate_degrees(G: GradingGroup, constraints, window=None, where=None):
    """Elements of ``G`` sent into a support set by at least one constraint.

    ``constraints`` is a list of ``(hom, support)`` pairs.  An infinite fibre
    raises :class:`InfiniteSupport` unless a window radius is given.
    """
    out = set()
    for h, supp in constraints:
        for b in supp:
            try:
                out.update(h.fiber(b, window=window))
            except InfiniteSupport as e:
                raise InfiniteSupport(
                    f"infinitely many degrees over {where or 'this open'}: {e}", where=where
                ) from None
    return sorted(out)


def minimal_points(space, U):
    """Minimal elements of ``U``.  The support of a section over an open is
    down-closed in it, so every nonzero section is nonzero at one of these."""
    P = space.poset
    return [x for x in space.points if x in U and not any(P.lt(z, x) for z in U)]


def section_space(F: GradedSheaf, U, family):
    """Basis (columns) of ``lim_{x in U} F_x[family[x]]``.

    Returns ``(N, order, offsets)``: rows of ``N`` index the concatenation of
    the blocks ``F_x[family[x]]`` for ``x`` in ``order``.
    """
    K = F.K
    S = F.space
    order = [x for x in S.points if x in U]
    offs, o = {}, 0
    for x in order:
        offs[x] = o
        o += F.dim(x, family[x])
    total = o
    if total == 0:
        return K.zeros(0, 0), order, offs
    rows = []
    for x, y in S.poset.covers:
        if x in U and y in U:
            nx, ny = F.dim(x, family[x]), F.dim(y, family[y])
            if ny == 0:
                continue
            R = K.zeros(ny, total)
            R[:, offs[x] : offs[x] + nx] = F.res(x, y, family[x])
            if S.lres[(x, y)](family[x]) != S.lam[y].nf(family[y]):
                raise SheafError(f"incompatible degree family on {x}->{y}")
            R[:, offs[y] : offs[y] + ny] = K.sub(R[:, offs[y] : offs[y] + ny], K.eye(ny))
            rows.append(R)
    if not rows:
        return K.eye(total), order, offs
    return K.nullspace(np.vstack(rows)), order, offs


def sections(F: GradedSheaf, U, window=None) -> GradedModule:
    """``F(U)`` as a module graded by ``Lambda(U)``."""
    U = frozenset(U)
    if not F.space.poset.is_open(U):
        raise NotOpen(f"{sorted(U, key=str)} is not open")
    L = sections_of_lambda(F.space, U)
    R = base_ring_of(F.K)
    cons = [(L.proj[x], F.support(x)) for x in minimal_points(F.space, U)]
    parts = {}
    for lam in candidate_degrees(L.group, cons, window, where=sorted(U, key=str)):
        N, _, _ = section_space(F, U, L.family(lam))
        if N.shape[1]:
            parts[lam] = FgModule.free(R, N.shape[1])
    return GradedModule(L.group, R, parts)


def section_dim(F: GradedSheaf, U, lam):
    L = sections_of_lambda(F.space, U)
    N, _, _ = section_space(F, frozenset(U), L.family(lam))
    return N.shape[1]


def stalk(F: GradedSheaf, x) -> GradedModule:
    if x not in F.space.lam:
        raise KeyError(f"unknown point {x}")
    return F.stalk_module(x)
