"""Flabbiness and softness tests, plus cohomology of a degree piece via the
complex of chains ``x_0 < ... < x_n``."""
from __future__ import annotations

import numpy as np

from ..space import restriction_hom, sections_of_lambda
from .core import GradedSheaf, candidate_degrees, minimal_points, section_space
from .functors import extend_by_zero


def chain_cochains(F: GradedSheaf, fam, U=None):
    """Cochain complex computing ``H^*(U, F_fam)``.

    Term ``n`` is the sum over chains ``x_0 < ... < x_n`` in ``U`` of
    ``F_{x_n}[fam[x_n]]``; returns ``(dims, differentials)``.
    """
    K = F.K
    P = F.space.poset
    U = frozenset(F.space.points) if U is None else frozenset(U)
    chains, n = [], 0
    while True:
        cs = [c for c in P.chains(n) if all(x in U for x in c)]
        if not cs:
            break
        chains.append(cs)
        n += 1
    layouts = []
    for cs in chains:
        offs, o = {}, 0
        for c in cs:
            offs[c] = o
            o += F.dim(c[-1], fam[c[-1]])
        layouts.append((offs, o))
    diffs = []
    for n in range(len(chains) - 1):
        (o0, t0), (o1, t1) = layouts[n], layouts[n + 1]
        D = K.zeros(t1, t0)
        for c in chains[n + 1]:
            r = o1[c]
            m = F.dim(c[-1], fam[c[-1]])
            if not m:
                continue
            for i in range(len(c)):
                face = c[:i] + c[i + 1:]
                k = F.dim(face[-1], fam[face[-1]])
                if not k:
                    continue
                sign = 1 if i % 2 == 0 else -1
                blk = K.eye(m) if i < len(c) - 1 else F.res(face[-1], c[-1], fam[face[-1]])
                q = o0[face]
                D[r : r + m, q : q + k] = K.add(D[r : r + m, q : q + k], K.smul(sign, blk))
        diffs.append(D)
    return [t for _, t in layouts], diffs


def cochain_cohomology_dims(K, dims, diffs):
    ranks = [K.rank(D) if D.size else 0 for D in diffs]
    out = []
    for n, d in enumerate(dims):
        r_out = ranks[n] if n < len(ranks) else 0
        r_in = ranks[n - 1] if n >= 1 else 0
        out.append(d - r_out - r_in)
    while out and out[-1] == 0:
        out.pop()
    return out


def degree_cohomology(F: GradedSheaf, lam=None, U=None):
    """``[dim H^0, dim H^1, ...]`` of the degree-``lam`` piece over ``U``."""
    S = F.space
    U = frozenset(S.points) if U is None else frozenset(U)
    L = sections_of_lambda(S, U)
    fam = L.family(L.group.zero if lam is None else L.group.nf(lam))
    dims, diffs = chain_cochains(F, fam, U)
    return cochain_cohomology_dims(F.K, dims, diffs)


def _opens(S):
    return S.poset.opens


def is_flabby(F: GradedSheaf, window=None) -> bool:
    """``F(U)_lam -> F(V)_{lam|V}`` surjective for all opens ``V <= U``."""
    return flabby_failure(F, window) is None


def flabby_failure(F: GradedSheaf, window=None):
    S, K = F.space, F.K
    opens = _opens(S)
    for V in opens:
        if not V:
            continue
        LV = sections_of_lambda(S, V)
        consV = [(LV.proj[x], F.support(x)) for x in minimal_points(S, V)]
        degsV = candidate_degrees(LV.group, consV, window, where=sorted(V, key=str))
        dimsV = {}
        for mu in degsV:
            N, _, _ = section_space(F, V, LV.family(mu))
            if N.shape[1]:
                dimsV[mu] = N.shape[1]
        if not dimsV:
            continue
        for U in opens:
            if not (V < U):
                continue
            LU = sections_of_lambda(S, U)
            r = restriction_hom(S, U, V)
            for lam in candidate_degrees(LU.group, [(r, sorted(dimsV))], window, where=sorted(U, key=str)):
                fam = LU.family(lam)
                N, order, offs = section_space(F, U, fam)
                rows = [N[offs[x] : offs[x] + F.dim(x, fam[x])] for x in order if x in V]
                img = np.vstack(rows) if rows else K.zeros(0, N.shape[1])
                if (K.rank(img) if img.size else 0) != dimsV[r(lam)]:
                    return (sorted(U, key=str), sorted(V, key=str), lam)
    return None


def is_soft(F: GradedSheaf, window=None) -> bool:
    """For every open ``U``, ``lam`` in ``Lambda(U)`` and subset ``K`` of ``U``,
    sections of ``(F|U)_lam`` over ``U`` surject onto its sections over ``K``.

    Sections over ``K`` are germs along ``K``, i.e. sections over the
    smallest open neighbourhood of ``K``; since every open inside ``U`` is
    such a neighbourhood, this agrees with :func:`is_flabby`.
    """
    return soft_failure(F, window) is None


def soft_failure(F: GradedSheaf, window=None):
    return flabby_failure(F, window)


def is_c_acyclic(F: GradedSheaf, window=None) -> bool:
    """For every open ``V`` and ``lam`` in ``Lambda(V)``, the extension by zero
    of ``(F|V)_lam`` has no higher cohomology on ``X``."""
    return c_acyclic_failure(F, window) is None


def c_acyclic_failure(F: GradedSheaf, window=None):
    S = F.space
    for V in _opens(S):
        if not V:
            continue
        FV = extend_by_zero(F, V)
        LV = sections_of_lambda(S, V)
        cons = [(LV.proj[x], F.support(x)) for x in V]
        for lam in candidate_degrees(LV.group, cons, window, where=sorted(V, key=str)):
            fam = LV.family(lam)
            # outside V the extension vanishes, so any degree works there
            full = {x: fam.get(x, S.lam[x].zero) for x in S.points}
            dims, diffs = chain_cochains(FV, full)
            h = cochain_cohomology_dims(F.K, dims, diffs)
            if any(h[1:]):
                return (sorted(V, key=str), lam, h)
    return None
