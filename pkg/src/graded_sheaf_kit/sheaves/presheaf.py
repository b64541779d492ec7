"""Presheaves given by an explicit table of opens, and sheafification."""
from __future__ import annotations

import itertools

import numpy as np

from ..space import GradedSpace, restriction_hom, sections_of_lambda
from .core import GradedSheaf, SheafError, candidate_degrees, minimal_points, section_space


class GradedPresheafTable:
    """``dims[U][lam]`` for every open ``U`` and ``lam`` in ``Lambda(U)``;
    ``res[(U, V)][lam]`` a matrix ``P(U)_lam -> P(V)_{lam|V}`` for ``V < U``.
    Missing restriction blocks are zero."""

    def __init__(self, space: GradedSpace, K, dims, res=None, name=None):
        self.space = space
        self.K = K
        self.name = name
        self.opens = list(space.poset.opens)
        self.lam = {U: sections_of_lambda(space, U) for U in self.opens}
        self.dims = {}
        for U in self.opens:
            G = self.lam[U].group
            self.dims[U] = {G.nf(d): n for d, n in (dims.get(U) or {}).items() if n}
        self.rhom = {}
        self.res = {}
        for U, V in itertools.product(self.opens, self.opens):
            if V < U:
                r = restriction_hom(space, U, V)
                self.rhom[(U, V)] = r
                given = (res or {}).get((U, V)) or {}
                given = {self.lam[U].group.nf(k): v for k, v in given.items()}
                block = {}
                for d, n in self.dims[U].items():
                    m = self.dims[V].get(r(d), 0)
                    A = given.get(d)
                    A = K.zeros(m, n) if A is None else K.mat(A)
                    if A.shape != (m, n):
                        raise SheafError(f"presheaf restriction shape mismatch in degree {d}")
                    block[d] = A
                self.res[(U, V)] = block

    def restriction(self, U, V, d):
        U, V = frozenset(U), frozenset(V)
        if U == V:
            return self.K.eye(self.dims[U].get(d, 0))
        return self.res[(U, V)].get(d, self.K.zeros(self.dims[V].get(self.rhom[(U, V)](d), 0), 0))

    def validate(self):
        diags = []
        K = self.K
        for U, V, W in itertools.product(self.opens, repeat=3):
            if W < V < U:
                for d in self.dims[U]:
                    a = K.matmul(self.restriction(V, W, self.rhom[(U, V)](d)), self.restriction(U, V, d))
                    b = self.restriction(U, W, d)
                    if not K.equal(a, b):
                        diags.append(f"restrictions do not compose on {sorted(U)} > {sorted(V)} > {sorted(W)}")
        return diags


def sections_table(F: GradedSheaf, window=None) -> GradedPresheafTable:
    """The presheaf ``U -> F(U)`` of a sheaf, with a basis of sections
    recorded in ``table.basis[(U, lam)]``."""
    S, K = F.space, F.K
    dims, basis = {}, {}
    for U in S.poset.opens:
        L = sections_of_lambda(S, U)
        cons = [(L.proj[x], F.support(x)) for x in minimal_points(S, U)]
        dims[U] = {}
        for lam in candidate_degrees(L.group, cons, window):
            N, order, offs = section_space(F, U, L.family(lam))
            if N.shape[1]:
                dims[U][lam] = N.shape[1]
                basis[(U, lam)] = (L.family(lam), N, order, offs)
    res = {}
    for U in S.poset.opens:
        for V in S.poset.opens:
            if not V < U:
                continue
            r = restriction_hom(S, U, V)
            res[(U, V)] = {}
            for lam in dims[U]:
                tgt = basis.get((V, r(lam)))
                if tgt is None:
                    continue
                fam, N, order, offs = basis[(U, lam)]
                rows = [N[offs[x] : offs[x] + F.dim(x, fam[x])] for x in tgt[2]]
                res[(U, V)][lam] = K.solve(tgt[1], np.vstack(rows))
    T = GradedPresheafTable(S, K, dims, res, name=f"Gamma({F.name})")
    T.basis = basis
    return T


def tensor_presheaf(F: GradedSheaf, G: GradedSheaf) -> GradedPresheafTable:
    """``U -> F(U) (x) G(U)`` graded by convolution in ``Lambda(U)``."""
    TF, TG = sections_table(F), sections_table(G)
    S, K = F.space, F.K
    dims, lay = {}, {}
    for U in TF.opens:
        Gr = TF.lam[U].group
        acc = {}
        for (a, na), (b, nb) in itertools.product(sorted(TF.dims[U].items()), sorted(TG.dims[U].items())):
            acc.setdefault(Gr.add(a, b), []).append(((a, b), na * nb))
        dims[U] = {}
        for d, items in acc.items():
            offs, o = {}, 0
            for key, n in items:
                offs[key] = o
                o += n
            lay[(U, d)] = offs
            dims[U][d] = o
    res = {}
    for U in TF.opens:
        for V in TF.opens:
            if not V < U:
                continue
            r = TF.rhom[(U, V)]
            res[(U, V)] = {}
            for d, n in dims[U].items():
                A = K.zeros(dims[V].get(r(d), 0), n)
                for (a, b), o in lay[(U, d)].items():
                    blk = K.kron(TF.restriction(U, V, a), TG.restriction(U, V, b))
                    if blk.shape[0]:
                        o2 = lay[(V, r(d))][(r(a), r(b))]
                        A[o2 : o2 + blk.shape[0], o : o + blk.shape[1]] = blk
                res[(U, V)][d] = A
    return GradedPresheafTable(S, K, dims, res, name=f"({F.name}*{G.name})pre")


class Sheafification:
    """Result of :func:`sheafify`: the sheaf and the unit ``P -> sheaf``."""

    def __init__(self, table, sheaf):
        self.table = table
        self.sheaf = sheaf

    def unit(self, U, lam):
        """Matrix ``P(U)_lam -> Gamma(U, sheaf)_lam`` in a basis of sections."""
        T, F = self.table, self.sheaf
        U = frozenset(U)
        K = T.K
        L = T.lam[U]
        fam = L.family(lam)
        N, order, offs = section_space(F, U, fam)
        n = T.dims[U].get(L.group.nf(lam), 0)
        if not n or not N.shape[1]:
            return K.zeros(N.shape[1], n)
        rows = []
        S = T.space
        for x in order:
            Ux = S.poset.up(x)
            rows.append(T.restriction(U, Ux, lam) if Ux != U else K.eye(n))
        return K.solve(N, np.vstack(rows))

    def unit_is_iso(self):
        T, K = self.table, self.table.K
        for U in T.opens:
            L = T.lam[U]
            cons = [(L.proj[x], self.sheaf.support(x)) for x in minimal_points(T.space, U)]
            degs = set(candidate_degrees(L.group, cons)) | set(T.dims[U])
            for lam in degs:
                A = self.unit(U, lam)
                if A.shape[0] != A.shape[1] or (A.size and K.rank(A) != A.shape[0]):
                    return False
        return True


def sheafify(P: GradedPresheafTable) -> Sheafification:
    """Stalks ``P(U_x)`` (graded via ``Lambda(U_x) = Lambda_x``) with the
    induced restrictions."""
    S, K = P.space, P.K
    up = {x: S.poset.up(x) for x in S.points}
    dims, maps = {}, {}
    for x in S.points:
        proj = P.lam[up[x]].proj[x]
        dims[x] = {proj(d): n for d, n in P.dims[up[x]].items()}
    for (x, y) in S.poset.covers:
        proj = P.lam[up[x]].proj[x]
        maps[(x, y)] = {proj(d): P.restriction(up[x], up[y], d) for d in P.dims[up[x]]}
    F = GradedSheaf(S, K, dims, maps, name=f"sh({P.name})", check=False)
    return Sheafification(P, F)
