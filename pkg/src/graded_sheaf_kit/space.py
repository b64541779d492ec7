"""Finite graded spaces: posets with the Alexandrov topology and a sheaf of
grading groups.

Opens are up-sets.  ``U_x = {y >= x}`` is the minimal open neighbourhood of
``x`` and a sheaf is the same thing as a functor along ``<=``.
"""
from __future__ import annotations

import itertools
from functools import cached_property

from .algebra.groups import GradingGroup, GroupHom, direct_sum, hom_from_images
from .algebra.snf import int_zeros


class PosetError(ValueError):
    pass


class MapMismatch(ValueError):
    pass


class NotOpen(ValueError):
    pass


class FinitePoset:
    """Partial order on a finite set of hashable, sortable point ids."""

    def __init__(self, points, le_pairs=(), closure=True):
        self.points = tuple(sorted(points, key=str))
        if len(set(self.points)) != len(self.points):
            raise PosetError("duplicate points")
        pts = set(self.points)
        le = {(x, x) for x in self.points}
        for a, b in le_pairs:
            if a not in pts or b not in pts:
                raise PosetError(f"unknown point in relation {a} <= {b}")
            le.add((a, b))
        if closure:
            changed = True
            while changed:
                changed = False
                for (a, b), (c, d) in itertools.product(list(le), list(le)):
                    if b == c and (a, d) not in le:
                        le.add((a, d))
                        changed = True
        else:
            for (a, b), (c, d) in itertools.product(le, le):
                if b == c and (a, d) not in le:
                    raise PosetError(f"order not transitive: {a} <= {b} <= {d} but not {a} <= {d}")
        for a, b in le:
            if a != b and (b, a) in le:
                raise PosetError(f"order not antisymmetric: {a} <= {b} <= {a}")
        self.le = frozenset(le)

    @classmethod
    def from_covers(cls, points, covers):
        return cls(points, covers, closure=True)

    def leq(self, x, y):
        return (x, y) in self.le

    def lt(self, x, y):
        return x != y and (x, y) in self.le

    def __eq__(self, other):
        return isinstance(other, FinitePoset) and self.points == other.points and self.le == other.le

    def __hash__(self):
        return hash((self.points, self.le))

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"FinitePoset({list(self.points)}, covers={self.covers})"

    @cached_property
    def covers(self):
        out = []
        for x, y in sorted(self.le, key=str):
            if x != y and not any(self.lt(x, z) and self.lt(z, y) for z in self.points):
                out.append((x, y))
        return sorted(out, key=str)

    def upper_covers(self, x):
        return [b for a, b in self.covers if a == x]

    def up(self, x):
        """Minimal open neighbourhood ``U_x``."""
        return frozenset(y for y in self.points if self.leq(x, y))

    def down(self, x):
        """Closure of ``{x}``."""
        return frozenset(y for y in self.points if self.leq(y, x))

    def up_closure(self, S):
        return frozenset(y for y in self.points if any(self.leq(s, y) for s in S))

    def down_closure(self, S):
        return frozenset(y for y in self.points if any(self.leq(y, s) for s in S))

    def is_open(self, S):
        S = set(S)
        return all(y in S for x in S for y in self.points if self.leq(x, y))

    def is_closed(self, S):
        S = set(S)
        return all(y in S for x in S for y in self.points if self.leq(y, x))

    def is_locally_closed(self, S):
        """Convex subsets are exactly the locally closed ones."""
        S = set(S)
        return all(
            z in S for x in S for y in S for z in self.points if self.leq(x, z) and self.leq(z, y)
        )

    @cached_property
    def opens(self):
        """All up-sets, as frozensets, smallest first."""
        out = []
        pts = self.points
        for r in range(len(pts) + 1):
            for S in itertools.combinations(pts, r):
                if self.is_open(S):
                    out.append(frozenset(S))
        return out

    @cached_property
    def closeds(self):
        return [frozenset(self.points) - U for U in self.opens]

    def linear_order(self):
        """Points listed so that ``x < y`` implies x comes first."""
        return sorted(self.points, key=lambda x: (len(self.down(x)), str(x)))

    def chains(self, n, start=None):
        """Strict chains ``x_0 < ... < x_n`` (optionally with ``x_0 >= start``)."""
        out = []

        def extend(ch):
            if len(ch) == n + 1:
                out.append(tuple(ch))
                return
            for y in self.points:
                if self.lt(ch[-1], y):
                    extend(ch + [y])

        for x in self.points:
            if start is None or self.leq(start, x):
                extend([x])
        return out

    @cached_property
    def height(self):
        h = 0
        while self.chains(h + 1):
            h += 1
        return h

    def subposet(self, S):
        S = set(S)
        return FinitePoset(S, [(a, b) for a, b in self.le if a in S and b in S])


class GradedSpace:
    """A finite poset with grading groups ``lam[x]`` and restriction
    homomorphisms ``lres[(x, y)]: lam[x] -> lam[y]`` on covering pairs."""

    def __init__(self, poset: FinitePoset, lam, lres=None, name=None):
        self.poset = poset
        self.name = name
        self.lam = {x: lam[x] for x in poset.points}
        self.lres = {}
        for x, y in poset.covers:
            h = (lres or {}).get((x, y))
            if h is None:
                h = GroupHom.zero_map(self.lam[x], self.lam[y])
            self.lres[(x, y)] = h
        extra = set((lres or {})) - set(poset.covers)
        if extra:
            raise PosetError(f"restrictions given on non-covering pairs {sorted(extra, key=str)}")
        self._rho = {}

    @classmethod
    def ungraded(cls, poset, name=None):
        return cls(poset, {x: GradingGroup(()) for x in poset.points}, name=name)

    @property
    def points(self):
        return self.poset.points

    def __repr__(self):
        return f"GradedSpace({self.name or ''} {list(self.points)})"

    def __eq__(self, other):
        return (
            isinstance(other, GradedSpace)
            and self.poset == other.poset
            and self.lam == other.lam
            and self.lres == other.lres
        )

    def __hash__(self):
        return hash((self.poset, tuple(sorted(((str(x), g) for x, g in self.lam.items()), key=str))))

    @property
    def is_ungraded(self):
        return all(g.ngens == 0 for g in self.lam.values())

    def rho(self, x, y) -> GroupHom:
        """Restriction ``lam[x] -> lam[y]`` for ``x <= y``, composed along covers."""
        key = (x, y)
        if key in self._rho:
            return self._rho[key]
        if not self.poset.leq(x, y):
            raise PosetError(f"{x} is not <= {y}")
        if x == y:
            h = GroupHom.identity(self.lam[x])
        else:
            z = next(z for z in self.poset.upper_covers(x) if self.poset.leq(z, y))
            h = self.rho(z, y) @ self.lres[(x, z)]
        self._rho[key] = h
        return h

    def subspace(self, S, name=None):
        """The subset ``S`` with the restricted grading."""
        P = self.poset.subposet(S)
        return GradedSpace(P, {x: self.lam[x] for x in P.points},
                           {(x, y): self.rho(x, y) for x, y in P.covers}, name=name)

    def underlying(self):
        return GradedSpace.ungraded(self.poset, name=f"{self.name}_underlying" if self.name else None)


def validate_space(S: GradedSpace):
    """List of diagnostics; empty means the space is valid."""
    diags = []
    P = S.poset
    for (x, y), h in S.lres.items():
        if h.src != S.lam[x] or h.dst != S.lam[y]:
            diags.append(f"restriction {x}->{y}: wrong source/target groups")
            continue
        try:
            h.check()
        except ValueError as e:
            diags.append(f"restriction {x}->{y}: {e}")
    if diags:
        return diags
    # composites along all maximal paths must agree
    for x in P.points:
        for z in P.points:
            if not P.lt(x, z):
                continue
            composites = []
            for y in P.upper_covers(x):
                if P.leq(y, z):
                    composites.append((y, S.rho(y, z) @ S.lres[(x, y)]))
            for (y0, h0), (y1, h1) in zip(composites, composites[1:]):
                if h0 != h1:
                    diags.append(
                        f"restrictions do not compose: {x}->{y0}->{z} differs from {x}->{y1}->{z}"
                    )
    return diags


class LambdaSections:
    """``Lambda(U)`` with projections to each ``Lambda_x``, ``x in U``."""

    def __init__(self, group, proj, U):
        self.group = group
        self.proj = proj
        self.U = U

    def family(self, lam):
        return {x: p(lam) for x, p in self.proj.items()}

    def from_family(self, fam):
        """The element of ``Lambda(U)`` with the given components."""
        pts = list(self.proj)
        if not pts:
            return self.group.zero
        tgt, inj, _ = direct_sum(*[p.dst for p in self.proj.values()])
        M = None
        for i, x in enumerate(pts):
            part = (inj[i] @ self.proj[x]).matrix
            M = part if M is None else M + part
        h = GroupHom(self.group, tgt, M)
        b = []
        for x in pts:
            b.extend(self.proj[x].dst.nf(fam[x]))
        pre = h.preimage(tuple(b))
        if pre is None:
            raise ValueError("family is not a section of Lambda")
        return self.group.nf(pre)


def sections_of_lambda(S: GradedSpace, U) -> LambdaSections:
    U = frozenset(U)
    if not S.poset.is_open(U):
        raise NotOpen(f"{sorted(U, key=str)} is not open")
    pts = [x for x in S.points if x in U]
    if not pts:
        G = GradingGroup(())
        return LambdaSections(G, {}, U)
    src, inj, prj = direct_sum(*[S.lam[x] for x in pts])
    covs = [(x, y) for x, y in S.poset.covers if x in U]
    if not covs:
        return LambdaSections(src, dict(zip(pts, prj)), U)
    dst, dinj, _ = direct_sum(*[S.lam[y] for _, y in covs])
    M = int_zeros(dst.ngens, src.ngens)
    idx = {x: i for i, x in enumerate(pts)}
    for k, (x, y) in enumerate(covs):
        part = (dinj[k] @ S.lres[(x, y)] @ prj[idx[x]]).matrix - (dinj[k] @ prj[idx[y]]).matrix
        M = M + part
    diff = GroupHom(src, dst, M)
    K, inc = diff.kernel()
    return LambdaSections(K, {x: prj[idx[x]] @ inc for x in pts}, U)


def restriction_hom(S: GradedSpace, U, V) -> GroupHom:
    """``Lambda(U) -> Lambda(V)`` for opens ``V <= U``."""
    LU, LV = sections_of_lambda(S, U), sections_of_lambda(S, V)
    imgs = []
    for k in range(LU.group.ngens):
        e = [0] * LU.group.ngens
        e[k] = 1
        fam = LU.family(tuple(e))
        imgs.append(LV.from_family({x: fam[x] for x in LV.proj}))
    return hom_from_images(LU.group, LV.group, imgs)


class GradedSpaceMap:
    """Monotone point map with ``flat[x]: Lambda_Y,f(x) -> Lambda_X,x``."""

    def __init__(self, src: GradedSpace, dst: GradedSpace, pmap, flat=None, name=None):
        self.src = src
        self.dst = dst
        self.name = name
        self.pmap = {x: pmap[x] for x in src.points}
        self.flat = {}
        for x in src.points:
            h = (flat or {}).get(x)
            if h is None:
                h = GroupHom.zero_map(dst.lam[self.pmap[x]], src.lam[x])
            self.flat[x] = h

    def __call__(self, x):
        return self.pmap[x]

    def __repr__(self):
        return f"GradedSpaceMap({self.name or ''}: {self.pmap})"

    def image(self, S):
        return frozenset(self.pmap[x] for x in S)

    def preimage(self, T):
        T = set(T)
        return frozenset(x for x in self.src.points if self.pmap[x] in T)

    def validate(self):
        diags = []
        Px, Py = self.src.poset, self.dst.poset
        for x, y in Px.le:
            if not Py.leq(self.pmap[x], self.pmap[y]):
                diags.append(f"not monotone: {x} <= {y} but f({x}) !<= f({y})")
        if diags:
            return diags
        for x in self.src.points:
            h = self.flat[x]
            if h.src != self.dst.lam[self.pmap[x]] or h.dst != self.src.lam[x]:
                diags.append(f"flat at {x} has wrong groups")
        if diags:
            return diags
        for x, x2 in Px.covers:
            a = self.flat[x2] @ self.dst.rho(self.pmap[x], self.pmap[x2])
            b = self.src.rho(x, x2) @ self.flat[x]
            if a != b:
                diags.append(f"flat not natural on {x} <= {x2}")
        return diags

    @property
    def is_strict(self):
        return all(h.is_iso() for h in self.flat.values())

    def flat_at(self, x, y):
        """``Lambda_Y,y -> Lambda_X,x`` for ``y <= f(x)`` (restrict then flat)."""
        return self.flat[x] @ self.dst.rho(y, self.pmap[x])


def identity_map(S: GradedSpace):
    return GradedSpaceMap(S, S, {x: x for x in S.points},
                          {x: GroupHom.identity(S.lam[x]) for x in S.points}, name="id")


def inclusion(S: GradedSpace, subset, name=None):
    sub = S.subspace(subset, name=name)
    return GradedSpaceMap(sub, S, {x: x for x in sub.points},
                          {x: GroupHom.identity(S.lam[x]) for x in sub.points}, name=name)


def point_space(group=None, name="pt"):
    group = group or GradingGroup(())
    return GradedSpace(FinitePoset(["*"]), {"*": group}, name=name)


def map_to_point(S: GradedSpace, target=None):
    """``S -> (pt, 0)`` unless another one-point target is given."""
    target = target or point_space()
    star = target.points[0]
    return GradedSpaceMap(S, target, {x: star for x in S.points}, name="p")


def compose_maps(g: GradedSpaceMap, f: GradedSpaceMap) -> GradedSpaceMap:
    """``g o f``."""
    if f.dst != g.src:
        raise MapMismatch("codomain of f is not the domain of g")
    pmap = {x: g.pmap[f.pmap[x]] for x in f.src.points}
    flat = {x: f.flat[x] @ g.flat[f.pmap[x]] for x in f.src.points}
    return GradedSpaceMap(f.src, g.dst, pmap, flat)


def fiber_product(f: GradedSpaceMap, g: GradedSpaceMap):
    """Pullback of ``f: Y1 -> X`` and ``g: Y2 -> X``.

    Returns ``(Z, ftilde: Z -> Y2, gtilde: Z -> Y1)``.
    """
    if f.dst != g.dst:
        raise MapMismatch("maps have different codomains")
    Y1, Y2, X = f.src, g.src, f.dst
    pts = [(a, b) for a in Y1.points for b in Y2.points if f(a) == g(b)]
    le = [
        (p, q) for p in pts for q in pts
        if Y1.poset.leq(p[0], q[0]) and Y2.poset.leq(p[1], q[1])
    ]
    P = FinitePoset(pts, le)
    lam, quo, incl = {}, {}, {}
    for a, b in pts:
        G, inj, prj = direct_sum(Y1.lam[a], Y2.lam[b])
        M = (inj[0] @ f.flat[a]).matrix - (inj[1] @ g.flat[b]).matrix
        C, proj = GroupHom(X.lam[f(a)], G, M).cokernel()
        lam[(a, b)] = C
        quo[(a, b)] = proj
        incl[(a, b)] = (inj, prj)
    lres = {}
    for p, q in P.covers:
        ident = [0] * lam[p].ngens
        imgs = []
        for k in range(lam[p].ngens):
            e = list(ident)
            e[k] = 1
            lift = quo[p].preimage(tuple(e))
            prj_p, inj_q = incl[p][1], incl[q][0]
            r1 = Y1.rho(p[0], q[0])(prj_p[0](lift))
            r2 = Y2.rho(p[1], q[1])(prj_p[1](lift))
            imgs.append(quo[q](quo[q].src.add(inj_q[0](r1), inj_q[1](r2))))
        lres[(p, q)] = hom_from_images(lam[p], lam[q], imgs)
    Z = GradedSpace(P, lam, lres, name="Z")
    ft = GradedSpaceMap(Z, Y2, {p: p[1] for p in pts},
                        {p: quo[p] @ incl[p][0][1] for p in pts}, name="ftilde")
    gt = GradedSpaceMap(Z, Y1, {p: p[0] for p in pts},
                        {p: quo[p] @ incl[p][0][0] for p in pts}, name="gtilde")
    return Z, ft, gt


def common_kernel_points(f: GradedSpaceMap, g: GradedSpaceMap):
    """Points ``(a, b)`` of the fiber product where ``ker f♭_a ∩ ker g♭_b != 0``.

    At such points the square of grading groups is a pushout but not a
    pullback, so distinct degrees of ``Λ_X`` become identified in ``Z``.
    """
    Y1, Y2, X = f.src, g.src, f.dst
    out = []
    for a in Y1.points:
        for b in Y2.points:
            if f(a) != g(b):
                continue
            G, inj, _ = direct_sum(Y1.lam[a], Y2.lam[b])
            both = GroupHom(X.lam[f(a)], G, (inj[0] @ f.flat[a]).matrix + (inj[1] @ g.flat[b]).matrix)
            if both.kernel()[0].ngens:
                out.append((a, b))
    return out


def is_proper_on(f: GradedSpaceMap, S, target=None) -> bool:
    """Whether ``f`` restricted to ``S`` is a closed map onto ``target``.

    ``target`` is an open of the codomain; it defaults to the smallest open
    containing ``f(S)``.
    """
    S = frozenset(S)
    if not S:
        return True
    Q = f.dst.poset
    T = frozenset(target) if target is not None else Q.up_closure(f.image(S))
    P = f.src.poset
    for s in S:
        img = f.image(P.down(s) & S)
        for z in img:
            for w in T:
                if Q.leq(w, z) and w not in img:
                    return False
    return True
