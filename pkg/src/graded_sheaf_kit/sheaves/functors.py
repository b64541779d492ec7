"""Underived functors between graded sheaves, each with its action on maps."""
from __future__ import annotations

import itertools

import numpy as np

from ..algebra.groups import InfiniteSupport
from ..algebra.linalg import NotSolvable
from ..space import (
    GradedSpaceMap,
    PosetError,
    is_proper_on,
    sections_of_lambda,
)
from .core import (
    GradedSheaf,
    SheafError,
    SheafMap,
    candidate_degrees,
    minimal_points,
    section_space,
)


def _blocks_layout(items):
    """``[(key, size)] -> ({key: offset}, total)``."""
    offs, o = {}, 0
    for key, n in items:
        offs[key] = o
        o += n
    return offs, o


# -- degree pieces and shifts ----------------------------------------------
def degree_piece(F: GradedSheaf, lam) -> GradedSheaf:
    """Ordinary sheaf ``x -> F_x[lam|x]`` on the underlying space."""
    S = F.space
    L = sections_of_lambda(S, S.points)
    fam = L.family(L.group.nf(lam))
    U = S.underlying()
    dims = {x: {(): F.dim(x, fam[x])} for x in S.points}
    maps = {(x, y): {(): F.res(x, y, fam[x])} for x, y in S.poset.covers}
    return GradedSheaf(U, F.K, dims, maps, name=f"{F.name}_{lam}", check=False)


def shift_family(F: GradedSheaf, fam, name=None) -> GradedSheaf:
    """Pointwise shift: part ``mu`` at ``x`` is ``F_x[mu + fam[x]]``."""
    S = F.space
    dims = {x: {S.lam[x].sub(d, fam[x]): n for d, n in F.dims[x].items()} for x in S.points}
    maps = {}
    for (x, y) in S.poset.covers:
        maps[(x, y)] = {S.lam[x].sub(d, fam[x]): A for d, A in F.maps[(x, y)].items()}
    return GradedSheaf(S, F.K, dims, maps, name=name, check=False)


def shift_sheaf(F: GradedSheaf, lam) -> GradedSheaf:
    """``F<lam>`` for a global degree ``lam``."""
    L = sections_of_lambda(F.space, F.space.points)
    return shift_family(F, L.family(L.group.nf(lam)), name=f"{F.name}<{lam}>")


def shift_map(phi: SheafMap, lam, src=None, dst=None) -> SheafMap:
    S = phi.src.space
    L = sections_of_lambda(S, S.points)
    fam = L.family(L.group.nf(lam))
    src = src or shift_sheaf(phi.src, lam)
    dst = dst or shift_sheaf(phi.dst, lam)
    comps = {x: {S.lam[x].sub(d, fam[x]): A for d, A in phi.comps[x].items()} for x in S.points}
    return SheafMap(src, dst, comps, check=False)


# -- tensor ---------------------------------------------------------------
def tensor_sheaf(F: GradedSheaf, G: GradedSheaf) -> GradedSheaf:
    """Stalkwise convolution tensor product."""
    if F.space != G.space or F.K != G.K:
        raise SheafError("tensor of sheaves on different spaces")
    S, K = F.space, F.K
    layout, dims = {}, {}
    for x in S.points:
        Gx = S.lam[x]
        acc = {}
        for (a, na), (b, nb) in itertools.product(sorted(F.dims[x].items()), sorted(G.dims[x].items())):
            acc.setdefault(Gx.add(a, b), []).append(((a, b), na * nb))
        dims[x] = {}
        for d, items in acc.items():
            offs, tot = _blocks_layout(items)
            layout[(x, d)] = offs
            dims[x][d] = tot
    maps = {}
    for (x, y) in S.poset.covers:
        rho = S.lres[(x, y)]
        maps[(x, y)] = {}
        for d, n in dims[x].items():
            A = K.zeros(dims[y].get(rho(d), 0), n)
            for (a, b), o in layout[(x, d)].items():
                blk = K.kron(F.res(x, y, a), G.res(x, y, b))
                o2 = layout[(y, rho(d))][(rho(a), rho(b))] if blk.shape[0] else 0
                A[o2 : o2 + blk.shape[0], o : o + blk.shape[1]] = blk
            maps[(x, y)][d] = A
    T = GradedSheaf(S, K, dims, maps, name=f"({F.name}*{G.name})", check=False)
    T.meta["tensor"] = (F, G, layout)
    return T


def tensor_maps(phi: SheafMap, psi: SheafMap, src=None, dst=None) -> SheafMap:
    src = src or tensor_sheaf(phi.src, psi.src)
    dst = dst or tensor_sheaf(phi.dst, psi.dst)
    K = phi.K
    ls, ld = src.meta["tensor"][2], dst.meta["tensor"][2]
    comps = {}
    for x in src.points:
        comps[x] = {}
        for d, n in src.dims[x].items():
            A = K.zeros(dst.dim(x, d), n)
            for (a, b), o in ls[(x, d)].items():
                blk = K.kron(phi.at(x, a), psi.at(x, b))
                if blk.shape[0]:
                    o2 = ld[(x, d)][(a, b)]
                    A[o2 : o2 + blk.shape[0], o : o + blk.shape[1]] = blk
            comps[x][d] = A
    return SheafMap(src, dst, comps, check=False)


# -- natural transformations -----------------------------------------------
class HomSpace:
    """Natural transformations ``F|U -> G|U`` with a degree shift per point:
    the component at ``y`` maps ``F_y[mu]`` to ``G_y[mu + shift[y]]``."""

    def __init__(self, F: GradedSheaf, G: GradedSheaf, U=None, shift=None):
        S, K = F.space, F.K
        self.F, self.G, self.K = F, G, K
        self.U = frozenset(U) if U is not None else frozenset(S.points)
        self.shift = {y: (shift or {}).get(y, S.lam[y].zero) for y in self.U}
        blocks = []
        for y in S.points:
            if y not in self.U:
                continue
            for mu, n in sorted(F.dims[y].items()):
                nu = S.lam[y].add(mu, self.shift[y])
                m = G.dim(y, nu)
                if m:
                    blocks.append(((y, mu), (m, n)))
        self.blocks = dict(blocks)
        self.offs, self.nvars = _blocks_layout([(k, m * n) for k, (m, n) in blocks])
        rows = []
        for (y, y2) in S.poset.covers:
            if y not in self.U or y2 not in self.U:
                continue
            rho = S.lres[(y, y2)]
            for mu, n in F.dims[y].items():
                nu = S.lam[y].add(mu, self.shift[y])
                m2 = G.dim(y2, rho(nu))
                if not m2:
                    continue
                R = K.zeros(m2 * n, self.nvars)
                if (y, mu) in self.blocks:
                    m = self.blocks[(y, mu)][0]
                    o = self.offs[(y, mu)]
                    R[:, o : o + m * n] = K.kron(G.res(y, y2, nu), K.eye(n))
                key2 = (y2, rho(mu))
                if key2 in self.blocks:
                    m2b, n2 = self.blocks[key2]
                    o = self.offs[key2]
                    R[:, o : o + m2b * n2] = K.sub(
                        R[:, o : o + m2b * n2], K.kron(K.eye(m2b), F.res(y, y2, mu).T.copy())
                    )
                rows.append(R)
        if self.nvars == 0:
            self.basis = K.zeros(0, 0)
        elif rows:
            self.basis = K.nullspace(np.vstack(rows))
        else:
            self.basis = K.eye(self.nvars)

    @property
    def dim(self):
        return self.basis.shape[1]

    def cardinality(self):
        return self.K.count(self.dim)

    def components(self, v):
        """Vector of unknowns -> ``{y: {mu: matrix}}``."""
        out = {}
        for (y, mu), (m, n) in self.blocks.items():
            o = self.offs[(y, mu)]
            out.setdefault(y, {})[mu] = np.array(v[o : o + m * n]).reshape(m, n)
        return out

    def element(self, i):
        return self.components(self.basis[:, i])

    def vectorize(self, comps):
        v = self.K.zeros(self.nvars, 1)
        for (y, mu), (m, n) in self.blocks.items():
            A = comps.get(y, {}).get(mu)
            if A is not None and A.size:
                o = self.offs[(y, mu)]
                v[o : o + m * n, 0] = np.asarray(A).reshape(-1)
        return v

    def coords(self, comps):
        """Coordinates of a natural transformation in the basis."""
        v = self.vectorize(comps)
        if self.nvars == 0:
            return self.K.zeros(0, 1)
        return self.K.solve(self.basis, v)

    def to_map(self, comps):
        """As a :class:`SheafMap` (only for ``U = X`` and zero shift)."""
        return SheafMap(self.F, self.G, comps, check=False)

    def maps(self):
        return [self.to_map(self.element(i)) for i in range(self.dim)]

    def map_vector(self, phi: SheafMap):
        return self.vectorize(phi.comps)


def hom_space(F, G) -> HomSpace:
    """Degree-preserving sheaf maps ``F -> G``."""
    return HomSpace(F, G)


def sheaf_hom(F: GradedSheaf, G: GradedSheaf, window=None) -> GradedSheaf:
    """Internal Hom: at ``x`` in degree ``lam``, maps ``F|U_x -> G<lam>|U_x``."""
    if F.space != G.space or F.K != G.K:
        raise SheafError("Hom between sheaves on different spaces")
    S, K = F.space, F.K
    P = S.poset
    spaces, dims = {}, {}
    for x in S.points:
        Ux = P.up(x)
        cons = []
        for y in Ux:
            diffs = {S.lam[y].sub(nu, mu) for mu in F.dims[y] for nu in G.dims[y]}
            if diffs:
                cons.append((S.rho(x, y), sorted(diffs)))
        dims[x] = {}
        for lam in candidate_degrees(S.lam[x], cons, window, where=x):
            H = HomSpace(F, G, Ux, {y: S.rho(x, y)(lam) for y in Ux})
            if H.dim:
                spaces[(x, lam)] = H
                dims[x][lam] = H.dim
    maps = {}
    for (x, x2) in P.covers:
        rho = S.lres[(x, x2)]
        maps[(x, x2)] = {}
        for lam, n in dims[x].items():
            H = spaces[(x, lam)]
            H2 = spaces.get((x2, rho(lam)))
            if H2 is None:
                continue
            cols = []
            for i in range(n):
                comps = {y: c for y, c in H.element(i).items() if y in H2.U}
                cols.append(H2.coords(comps))
            maps[(x, x2)][lam] = np.hstack(cols)
    T = GradedSheaf(S, K, dims, maps, name=f"Hom({F.name},{G.name})", check=False)
    T.meta["hom"] = (F, G, spaces)
    return T


def sheaf_hom_map(alpha: SheafMap, beta: SheafMap, src=None, dst=None) -> SheafMap:
    """``Hom(alpha, beta): Hom(F, G) -> Hom(F', G')`` for ``alpha: F' -> F``
    and ``beta: G -> G'``, sending ``phi`` to ``beta o phi o alpha``."""
    src = src or sheaf_hom(alpha.dst, beta.src)
    dst = dst or sheaf_hom(alpha.src, beta.dst)
    K = alpha.K
    S = src.space
    sp_s, sp_d = src.meta["hom"][2], dst.meta["hom"][2]
    comps = {}
    for x in S.points:
        comps[x] = {}
        for lam, n in src.dims[x].items():
            H = sp_s[(x, lam)]
            H2 = sp_d.get((x, lam))
            if H2 is None:
                continue
            cols = []
            for i in range(n):
                phi = H.element(i)
                new = {}
                for y in H2.U:
                    Gy = S.lam[y]
                    new[y] = {}
                    for mu in alpha.src.dims[y]:
                        nu = Gy.add(mu, H.shift[y])
                        p = phi.get(y, {}).get(mu)
                        if p is None:
                            continue
                        new[y][mu] = K.matmul(K.matmul(beta.at(y, nu), p), alpha.at(y, mu))
                cols.append(H2.coords(new))
            comps[x][lam] = np.hstack(cols)
    return SheafMap(src, dst, comps, check=False)


# -- inverse image ---------------------------------------------------------
def inverse_image_gr(f: GradedSpaceMap, G: GradedSheaf) -> GradedSheaf:
    """At ``x`` in degree ``lam``: sum of ``G_{f(x)}[mu]`` over ``f_flat(mu) = lam``."""
    X, Y = f.src, f.dst
    if G.space != Y:
        raise SheafError("sheaf is not on the codomain")
    K = G.K
    layout, dims = {}, {}
    for x in X.points:
        acc = {}
        for mu, n in sorted(G.dims[f(x)].items()):
            acc.setdefault(f.flat[x](mu), []).append((mu, n))
        dims[x] = {}
        for lam, items in acc.items():
            offs, tot = _blocks_layout(items)
            layout[(x, lam)] = offs
            dims[x][lam] = tot
    maps = {}
    for (x, x2) in X.poset.covers:
        rho = X.lres[(x, x2)]
        rY = Y.rho(f(x), f(x2))
        maps[(x, x2)] = {}
        for lam, n in dims[x].items():
            A = K.zeros(dims[x2].get(rho(lam), 0), n)
            for mu, o in layout[(x, lam)].items():
                blk = G.res(f(x), f(x2), mu)
                if blk.shape[0]:
                    o2 = layout[(x2, rho(lam))][rY(mu)]
                    A[o2 : o2 + blk.shape[0], o : o + blk.shape[1]] = blk
            maps[(x, x2)][lam] = A
    T = GradedSheaf(X, K, dims, maps, name=f"f^-1 {G.name}", check=False)
    T.meta["inv"] = (f, G, layout)
    return T


def inverse_image_map(f: GradedSpaceMap, phi: SheafMap, src=None, dst=None) -> SheafMap:
    src = src or inverse_image_gr(f, phi.src)
    dst = dst or inverse_image_gr(f, phi.dst)
    K = phi.K
    ls, ld = src.meta["inv"][2], dst.meta["inv"][2]
    comps = {}
    for x in src.points:
        comps[x] = {}
        for lam, n in src.dims[x].items():
            A = K.zeros(dst.dim(x, lam), n)
            for mu, o in ls[(x, lam)].items():
                blk = phi.at(f(x), mu)
                if blk.shape[0]:
                    o2 = ld[(x, lam)][mu]
                    A[o2 : o2 + blk.shape[0], o : o + blk.shape[1]] = blk
            comps[x][lam] = A
    return SheafMap(src, dst, comps, check=False)


# -- direct images -----------------------------------------------------------
def _push_data(f, F, y, mu):
    W = f.preimage(f.dst.poset.up(y))
    fam = {x: f.flat_at(x, y)(mu) for x in W}
    N, order, offs = section_space(F, W, fam)
    return W, fam, N, order, offs


def _restrict_rows(F, fam, N, order, offs, W2, order2):
    rows = []
    for x in order2:
        n = F.dim(x, fam[x])
        rows.append(N[offs[x] : offs[x] + n])
    if not rows:
        return F.K.zeros(0, N.shape[1])
    return np.vstack(rows)


def _shriek_subspace(f, F, y, W, fam, N, order, offs):
    """Sections supported in the largest closed subset of ``W`` that is
    proper over ``U_y``."""
    K = F.K
    P = f.src.poset
    target = f.dst.poset.up(y)
    Wl = sorted(W, key=str)
    best = frozenset()
    for r in range(len(Wl), 0, -1):
        for S in itertools.combinations(Wl, r):
            S = frozenset(S)
            if S <= best:
                continue
            if all(z in S for s in S for z in P.down(s) if z in W) and is_proper_on(f, S, target):
                best = best | S
    outside = [x for x in order if x not in best]
    if not outside or N.shape[1] == 0:
        return N, best
    R = np.vstack([N[offs[x] : offs[x] + F.dim(x, fam[x])] for x in outside])
    if R.shape[0] == 0:
        return N, best
    C = K.nullspace(R)
    sub = K.matmul(N, C)
    return K.colspace(sub) if sub.shape[1] else sub, best


def _direct_image(f: GradedSpaceMap, F: GradedSheaf, window, shriek):
    X, Y = f.src, f.dst
    if F.space != X:
        raise SheafError("sheaf is not on the domain")
    K = F.K
    data, dims = {}, {}
    for y in Y.points:
        W = f.preimage(Y.poset.up(y))
        cons = [(f.flat_at(x, y), F.support(x)) for x in minimal_points(X, W)]
        dims[y] = {}
        try:
            degs = candidate_degrees(Y.lam[y], cons, window, where=y)
        except InfiniteSupport as e:
            raise InfiniteSupport(
                f"stalk of the direct image at {y} is nonzero in infinitely many degrees "
                f"(the graded pushforward need not be finitely supported): {e}",
                where=y,
            ) from None
        for mu in degs:
            W, fam, N, order, offs = _push_data(f, F, y, mu)
            if shriek:
                N, _ = _shriek_subspace(f, F, y, W, fam, N, order, offs)
            if N.shape[1]:
                data[(y, mu)] = (W, fam, N, order, offs)
                dims[y][mu] = N.shape[1]
    maps = {}
    for (y, y2) in Y.poset.covers:
        rho = Y.lres[(y, y2)]
        maps[(y, y2)] = {}
        for mu, n in dims[y].items():
            d2 = data.get((y2, rho(mu)))
            if d2 is None:
                continue
            W, fam, N, order, offs = data[(y, mu)]
            v = _restrict_rows(F, fam, N, order, offs, d2[0], d2[3])
            try:
                maps[(y, y2)][mu] = K.solve(d2[2], v)
            except NotSolvable as e:
                raise SheafError(f"direct image not closed under restriction {y}->{y2}") from e
    T = GradedSheaf(Y, K, dims, maps, name=f"f_{'!' if shriek else '*'} {F.name}", check=False)
    T.meta["direct"] = (f, F, data)
    return T


def pushforward_gr(f: GradedSpaceMap, F: GradedSheaf, window=None) -> GradedSheaf:
    """``(f_* F)_y[mu] = F(f^-1 U_y)`` in the degree family ``f_flat(mu)``."""
    return _direct_image(f, F, window, shriek=False)


def shriek_pushforward_gr(f: GradedSpaceMap, F: GradedSheaf, window=None) -> GradedSheaf:
    """Subsheaf of :func:`pushforward_gr` of sections with proper support."""
    return _direct_image(f, F, window, shriek=True)


def direct_image_map(phi: SheafMap, src: GradedSheaf, dst: GradedSheaf) -> SheafMap:
    """Induced map between two direct images (``f_*`` or ``f_!``) computed by
    :func:`pushforward_gr` / :func:`shriek_pushforward_gr`."""
    K = phi.K
    ds, dd = src.meta["direct"][2], dst.meta["direct"][2]
    comps = {}
    for y in src.points:
        comps[y] = {}
        for mu, n in src.dims[y].items():
            W, fam, N, order, offs = ds[(y, mu)]
            tgt = dd.get((y, mu))
            if tgt is None:
                comps[y][mu] = K.zeros(0, n)
                continue
            _, _, N2, order2, offs2 = tgt
            blocks = []
            for x in order:
                A = phi.at(x, fam[x])
                blocks.append(K.matmul(A, N[offs[x] : offs[x] + A.shape[1]]))
            v = np.vstack(blocks) if blocks else K.zeros(0, n)
            try:
                comps[y][mu] = K.solve(N2, v)
            except NotSolvable as e:
                raise SheafError(f"induced map leaves the direct image at {y}") from e
    return SheafMap(src, dst, comps, check=False)


def pushforward_map(f, phi, src=None, dst=None):
    src = src or pushforward_gr(f, phi.src)
    dst = dst or pushforward_gr(f, phi.dst)
    return direct_image_map(phi, src, dst)


def shriek_map(f, phi, src=None, dst=None):
    src = src or shriek_pushforward_gr(f, phi.src)
    dst = dst or shriek_pushforward_gr(f, phi.dst)
    return direct_image_map(phi, src, dst)


def global_sections_degree0(F: GradedSheaf) -> int:
    """Dimension of the degree-0 global sections."""
    S = F.space
    L = sections_of_lambda(S, S.points)
    N, _, _ = section_space(F, frozenset(S.points), L.family(L.group.zero))
    return N.shape[1]


# -- restriction and extension by zero --------------------------------------
class NotLocallyClosed(ValueError):
    pass


def restrict(F: GradedSheaf, Y) -> GradedSheaf:
    """``F|Y`` as a sheaf on the subspace ``Y``."""
    sub = F.space.subspace(Y)
    dims = {x: dict(F.dims[x]) for x in sub.points}
    maps = {(x, y): {d: F.res(x, y, d) for d in F.dims[x]} for x, y in sub.poset.covers}
    return GradedSheaf(sub, F.K, dims, maps, name=f"{F.name}|", check=False)


def extend_by_zero(F: GradedSheaf, Y) -> GradedSheaf:
    """``F_Y``: equal to ``F`` on the locally closed ``Y`` and zero elsewhere."""
    Y = frozenset(Y)
    S = F.space
    if not S.poset.is_locally_closed(Y):
        raise NotLocallyClosed(f"{sorted(Y, key=str)} is not locally closed")
    dims = {x: dict(F.dims[x]) for x in Y}
    maps = {(x, y): F.maps[(x, y)] for x, y in S.poset.covers if x in Y and y in Y}
    return GradedSheaf(S, F.K, dims, maps, name=f"{F.name}_Y", check=False)


def extend_by_zero_map(phi: SheafMap, Y, src=None, dst=None) -> SheafMap:
    Y = frozenset(Y)
    src = src or extend_by_zero(phi.src, Y)
    dst = dst or extend_by_zero(phi.dst, Y)
    return SheafMap(src, dst, {x: phi.comps[x] for x in Y}, check=False)


def inclusion_from_extension(F: GradedSheaf, U, FU=None) -> SheafMap:
    """``F_U -> F`` for open ``U``."""
    FU = FU or extend_by_zero(F, U)
    K = F.K
    return SheafMap(FU, F, {x: {d: K.eye(n) for d, n in FU.dims[x].items()} for x in FU.points}, check=False)


def projection_to_extension(F: GradedSheaf, Z, FZ=None) -> SheafMap:
    """``F -> F_Z`` for closed ``Z``."""
    FZ = FZ or extend_by_zero(F, Z)
    K = F.K
    comps = {x: {d: K.eye(n) if x in FZ.dims and FZ.dims[x] else K.zeros(0, n) for d, n in F.dims[x].items()}
             for x in F.points}
    for x in F.points:
        for d, n in F.dims[x].items():
            comps[x][d] = K.eye(n) if FZ.dim(x, d) else K.zeros(0, n)
    return SheafMap(F, FZ, comps, check=False)


class ExactSequence:
    def __init__(self, A, B, C, i, p):
        self.A, self.B, self.C, self.i, self.p = A, B, C, i, p

    def is_exact(self):
        from .core import is_short_exact

        return is_short_exact(self.i, self.p)

    def dims_at(self, x):
        return (self.A.total_dim(x), self.B.total_dim(x), self.C.total_dim(x))


def basic_exact_sequence(F: GradedSheaf, U) -> ExactSequence:
    """``0 -> F_U -> F -> F_Z -> 0`` with ``Z`` the closed complement of ``U``."""
    U = frozenset(U)
    S = F.space
    if not S.poset.is_open(U):
        raise PosetError(f"{sorted(U, key=str)} is not open")
    Z = frozenset(S.points) - U
    FU = extend_by_zero(F, U)
    FZ = extend_by_zero(F, Z)
    return ExactSequence(FU, F, FZ, inclusion_from_extension(F, U, FU), projection_to_extension(F, Z, FZ))
