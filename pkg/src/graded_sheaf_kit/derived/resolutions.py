"""Godement, iterated-Godement and generator (flat) resolutions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..algebra.modules import BaseRing
from ..sheaves.core import (
    GradedSheaf,
    SheafError,
    SheafMap,
    candidate_degrees,
    cokernel,
    direct_sum,
    kernel,
    point_generator,
    zero_sheaf,
)
from .complexes import ChainMap, ComplexOfSheaves, total_chain_map, total_complex


class FlatnessUndecided(ValueError):
    pass


@dataclass
class Resolution:
    """``aug: source -> complex`` (or ``complex -> source`` when ``left``)."""

    source: ComplexOfSheaves
    complex: ComplexOfSheaves
    aug: ChainMap
    kind: str
    left: bool = False
    flags: dict = field(default_factory=dict)

    def certify(self):
        return self.aug.is_quasi_iso()


# -- Godement ---------------------------------------------------------------
def godement_term(F: GradedSheaf, n: int, window=None) -> GradedSheaf:
    """Stalk at ``z`` in degree ``mu``: sum over chains ``z <= x_0 < ... < x_n``
    of ``F_{x_n}[rho_{z x_n}(mu)]``."""
    S, K = F.space, F.K
    P = S.poset
    dims, layout = {}, {}
    for z in S.points:
        chains = P.chains(n, start=z)
        cons = [(S.rho(z, c[-1]), F.support(c[-1])) for c in chains]
        dims[z] = {}
        for mu in candidate_degrees(S.lam[z], cons, window, where=z):
            offs, o = {}, 0
            for c in chains:
                k = F.dim(c[-1], S.rho(z, c[-1])(mu))
                if k:
                    offs[c] = o
                    o += k
            if o:
                layout[(z, mu)] = offs
                dims[z][mu] = o
    maps = {}
    for (z, z2) in P.covers:
        rho = S.lres[(z, z2)]
        maps[(z, z2)] = {}
        for mu, m in dims[z].items():
            tgt = layout.get((z2, rho(mu)), {})
            A = K.zeros(dims[z2].get(rho(mu), 0), m)
            for c, o in layout[(z, mu)].items():
                if c in tgt:
                    k = F.dim(c[-1], S.rho(z, c[-1])(mu))
                    A[tgt[c] : tgt[c] + k, o : o + k] = K.eye(k)
            maps[(z, z2)][mu] = A
    G = GradedSheaf(S, K, dims, maps, name=f"Gd^{n}({F.name})", check=False)
    G.meta["godement"] = (F, n, layout)
    return G


def godement_differential(F: GradedSheaf, A: GradedSheaf, B: GradedSheaf) -> SheafMap:
    """``Gd^n(F) -> Gd^{n+1}(F)``: alternating sum of faces, the last face
    restricting along ``x_n < x_{n+1}``."""
    S, K = F.space, F.K
    la, lb = A.meta["godement"][2], B.meta["godement"][2]
    comps = {}
    for z in S.points:
        comps[z] = {}
        for mu, m in A.dims[z].items():
            D = K.zeros(B.dim(z, mu), m)
            src = la[(z, mu)]
            for c, r in lb.get((z, mu), {}).items():
                k = F.dim(c[-1], S.rho(z, c[-1])(mu))
                for i in range(len(c)):
                    face = c[:i] + c[i + 1:]
                    if face not in src:
                        continue
                    q = src[face]
                    sign = 1 if i % 2 == 0 else -1
                    if i < len(c) - 1:
                        blk = K.eye(k)
                    else:
                        blk = F.res(face[-1], c[-1], S.rho(z, face[-1])(mu))
                    kk = blk.shape[1]
                    D[r : r + k, q : q + kk] = K.add(D[r : r + k, q : q + kk], K.smul(sign, blk))
            comps[z][mu] = D
    return SheafMap(A, B, comps, check=False)


def godement_augmentation(F: GradedSheaf, G0: GradedSheaf) -> SheafMap:
    """``F -> Gd^0(F)``, ``s -> (rho_{zx} s)_{x >= z}``."""
    S, K = F.space, F.K
    lay = G0.meta["godement"][2]
    comps = {}
    for z in S.points:
        comps[z] = {}
        for mu, n in F.dims[z].items():
            A = K.zeros(G0.dim(z, mu), n)
            for c, o in lay.get((z, mu), {}).items():
                r = F.res(z, c[0], mu)
                A[o : o + r.shape[0]] = r
            comps[z][mu] = A
    return SheafMap(F, G0, comps, check=False)


def godement_map(phi: SheafMap, A: GradedSheaf, B: GradedSheaf) -> SheafMap:
    """``Gd^n(phi): Gd^n(F) -> Gd^n(F')``."""
    S, K = phi.src.space, phi.K
    la, lb = A.meta["godement"][2], B.meta["godement"][2]
    comps = {}
    for z in S.points:
        comps[z] = {}
        for mu, m in A.dims[z].items():
            D = K.zeros(B.dim(z, mu), m)
            tgt = lb.get((z, mu), {})
            for c, o in la[(z, mu)].items():
                blk = phi.at(c[-1], S.rho(z, c[-1])(mu))
                if c in tgt and blk.shape[0]:
                    D[tgt[c] : tgt[c] + blk.shape[0], o : o + blk.shape[1]] = blk
            comps[z][mu] = D
    return SheafMap(A, B, comps, check=False)


def godement_complex(F: GradedSheaf, window=None) -> ComplexOfSheaves:
    h = F.space.poset.height
    terms = {n: godement_term(F, n, window) for n in range(h + 1)}
    diffs = {n: godement_differential(F, terms[n], terms[n + 1]) for n in range(h)}
    return ComplexOfSheaves(terms, diffs, check=False, name=f"Gd({F.name})")


def godement_resolution(C, window=None) -> Resolution:
    """Total Godement resolution of a sheaf or bounded complex."""
    if isinstance(C, GradedSheaf):
        C = ComplexOfSheaves.single(C)
    h = C.space.poset.height
    T, dh, dv = {}, {}, {}
    for p, F in C.terms.items():
        for q in range(h + 1):
            T[(p, q)] = godement_term(F, q, window)
    for p, F in C.terms.items():
        for q in range(h):
            dv[(p, q)] = godement_differential(F, T[(p, q)], T[(p, q + 1)])
        if p + 1 in C.terms:
            for q in range(h + 1):
                dh[(p, q)] = godement_map(C.d(p), T[(p, q)], T[(p + 1, q)])
    tot = total_complex(T, dh, dv, name="Gd")
    tot.meta["double"] = (C, T)
    aug_blocks = {}
    # the source complex viewed as a totalization with a single column
    src = _as_total(C)
    for p, F in C.terms.items():
        aug_blocks[((p, 0), (p, 0))] = godement_augmentation(F, T[(p, 0)])
    aug = total_chain_map(src, tot, aug_blocks)
    aug = ChainMap(C, tot, aug.comps, check=False)
    return Resolution(C, tot, aug, "godement", flags={"flabby": True, "injective": True})


def _as_total(C: ComplexOfSheaves) -> ComplexOfSheaves:
    T = {(p, 0): F for p, F in C.terms.items()}
    dh = {(p, 0): C.d(p) for p in C.terms if p + 1 in C.terms}
    return total_complex(T, dh, {})


def godement_chain_map(phi: ChainMap, R1: Resolution, R2: Resolution) -> ChainMap:
    """Godement of a chain map, between two total Godement resolutions."""
    C1, T1 = R1.complex.meta["double"]
    C2, T2 = R2.complex.meta["double"]
    blocks = {}
    for (p, q), A in T1.items():
        if (p, q) in T2:
            blocks[((p, q), (p, q))] = godement_map(phi.at(p), A, T2[(p, q)])
    return total_chain_map(R1.complex, R2.complex, blocks)


def iterated_godement_resolution(F: GradedSheaf, window=None, max_len=None) -> Resolution:
    """``F -> G0(F) -> G0(Q1) -> ...`` with ``Q_{k+1} = coker``; a second,
    different flabby resolution."""
    h = F.space.poset.height
    max_len = max_len if max_len is not None else 2 * h + 2
    terms, diffs = {}, {}
    Q = F
    prev_proj = None
    first = None
    for k in range(max_len + 1):
        if Q.is_zero:
            break
        G0 = godement_term(Q, 0, window)
        eps = godement_augmentation(Q, G0)
        terms[k] = G0
        if k == 0:
            first = eps
        else:
            diffs[k - 1] = eps @ prev_proj
        Q, prev_proj = cokernel(eps)
    else:
        if not Q.is_zero:
            raise SheafError("iterated Godement did not terminate")
    if not terms:
        terms[0] = zero_sheaf(F.space, F.K)
        first = SheafMap(F, terms[0], {}, check=False)
    C = ComplexOfSheaves(terms, diffs, check=False, name=f"Gd'({F.name})")
    src = ComplexOfSheaves.single(F)
    aug = ChainMap(src, C, {0: first}, check=False)
    return Resolution(src, C, aug, "iterated-godement", flags={"flabby": True, "injective": True})


# -- generator (flat) resolutions ---------------------------------------------
def generator_cover(M: GradedSheaf):
    """Epimorphism onto ``M`` from a sum of generators ``R_{U_x}<-lam>``,
    using one generator per basis vector of ``M_x[lam]`` modulo images from
    below."""
    S, K = M.space, M.K
    gens = []
    for x in S.poset.linear_order():
        for lam, n in sorted(M.dims[x].items()):
            imgs = []
            for z in S.points:
                if (z, x) in S.lres:
                    for mu in M.dims[z]:
                        if S.lres[(z, x)](mu) == lam:
                            imgs.append(M.res(z, x, mu))
            B = K.colspace(np.hstack(imgs)) if imgs else K.zeros(n, 0)
            C = K.complement(B, K.eye(n))
            for j in range(C.shape[1]):
                gens.append((x, lam, C[:, j : j + 1]))
    if not gens:
        Z = zero_sheaf(S, K)
        return Z, SheafMap(Z, M, {}, check=False), []
    Ps = [point_generator(S, K, x, lam) for x, lam, _ in gens]
    P, _, prj = direct_sum(*Ps)
    comps = {}
    for y in S.points:
        comps[y] = {}
        for d, n in P.dims[y].items():
            comps[y][d] = K.zeros(M.dim(y, d), n)
    # assemble column by column through the projections
    total = None
    for (x, lam, v), Pi, pr in zip(gens, Ps, prj):
        c = {}
        for y in Pi.points:
            for d in Pi.dims[y]:
                c.setdefault(y, {})[d] = K.matmul(M.res(x, y, lam), v)
        g = SheafMap(Pi, M, c, check=False) @ pr
        total = g if total is None else total + g
    return P, total, gens


def flat_resolution(F: GradedSheaf, ring=None) -> Resolution:
    """Left resolution ``... -> P_1 -> P_0 -> F`` by sums of generators.

    Terms are placed in degrees ``-n``; the kernel after ``height + 1``
    steps is stalkwise free over a field and is kept as the last term.
    """
    if ring is not None and isinstance(ring, BaseRing) and not ring.is_field:
        raise FlatnessUndecided(f"flatness of the truncating kernel is not decided over {ring}")
    h = F.space.poset.height
    terms, diffs, gens = {}, {}, {}
    M = F
    P0, eps, g0 = generator_cover(M)
    terms[0], gens[0] = P0, g0
    Kn, inc = kernel(eps)
    n = 0
    while not Kn.is_zero:
        n += 1
        if n > h + 1:
            terms[-n] = Kn
            diffs[-n] = inc
            break
        Pn, cov, gn = generator_cover(Kn)
        terms[-n], gens[-n] = Pn, gn
        diffs[-n] = inc @ cov
        Kn, inc = kernel(cov)
    C = ComplexOfSheaves(terms, diffs, check=False, name=f"P({F.name})")
    src = ComplexOfSheaves.single(F)
    aug = ChainMap(C, src, {0: eps}, check=False)
    return Resolution(src, C, aug, "flat", left=True, flags={"flat": True, "generators": gens})
