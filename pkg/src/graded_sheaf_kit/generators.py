"""Seeded random instances: small graded spaces, maps and sheaves."""
from __future__ import annotations

import itertools
import random

from .algebra.groups import GradingGroup, GroupHom
from .sheaves.core import GradedSheaf, SheafMap, cokernel, direct_sum, point_generator
from .space import FinitePoset, GradedSpace, GradedSpaceMap, validate_space

GRADINGS = ("0", "Z/2", "Z/3")


def all_posets(n):
    """Every partial order on ``0..n-1`` up to relabelling is not attempted;
    this yields every transitive DAG on the labelled points."""
    pts = [f"p{i}" for i in range(n)]
    pairs = [(a, b) for a, b in itertools.combinations(pts, 2)]
    seen = set()
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        rel = [p for p, b in zip(pairs, bits) if b]
        P = FinitePoset(pts, rel)
        if P.le in seen:
            continue
        seen.add(P.le)
        yield P


def random_poset(rng: random.Random, n):
    pts = [f"p{i}" for i in range(n)]
    rel = [(a, b) for a, b in itertools.combinations(pts, 2) if rng.random() < 0.45]
    return FinitePoset(pts, rel)


def graded_space_on(P: FinitePoset, grading="0", support=None, name=None) -> GradedSpace:
    """Grading group ``grading`` on the closed set ``support`` (default all),
    zero elsewhere, identity restrictions inside."""
    G = GradingGroup.parse(grading)
    Z0 = GradingGroup(())
    D = frozenset(P.points) if support is None else P.down_closure(support)
    lam = {x: G if x in D else Z0 for x in P.points}
    lres = {}
    for x, y in P.covers:
        lres[(x, y)] = GroupHom.identity(G) if (x in D and y in D) else GroupHom.zero_map(lam[x], lam[y])
    S = GradedSpace(P, lam, lres, name=name)
    assert not validate_space(S)
    return S


def random_space(rng: random.Random, max_points=3, gradings=GRADINGS) -> GradedSpace:
    P = random_poset(rng, rng.randint(1, max_points))
    g = rng.choice(gradings)
    sup = [x for x in P.points if rng.random() < 0.6] or [P.points[0]]
    return graded_space_on(P, g, sup)


def random_map(rng: random.Random, X: GradedSpace, Y: GradedSpace, tries=200):
    """A random monotone map; flats are identities where that is natural."""
    for _ in range(tries):
        pmap = {x: rng.choice(Y.points) for x in X.points}
        if any(not Y.poset.leq(pmap[a], pmap[b]) for a, b in X.poset.le):
            continue
        flat = {}
        for x in X.points:
            A, B = Y.lam[pmap[x]], X.lam[x]
            if A == B and A.ngens and rng.random() < 0.85:
                flat[x] = GroupHom.identity(A)
            else:
                flat[x] = GroupHom.zero_map(A, B)
        f = GradedSpaceMap(X, Y, pmap, flat)
        if f.validate():
            f = GradedSpaceMap(X, Y, pmap)
        if not f.validate():
            return f
    return None


def _random_generator_map(rng, K, Ps, Qs, keys_p, keys_q):
    """Random map between sums of point generators."""
    S = Ps[0].space if Ps else Qs[0].space
    P, _, prj = direct_sum(*Ps)
    Q, inj, _ = direct_sum(*Qs)
    total = None
    for i, (x, lam) in enumerate(keys_p):
        for j, (x2, lam2) in enumerate(keys_q):
            if not S.poset.leq(x2, x) or S.rho(x2, x)(lam2) != lam:
                continue
            c = rng.randrange(K.p) if K.p else rng.randint(-2, 2)
            if not c:
                continue
            comps = {y: {d: K.mat([[c]]) for d in Ps[i].dims[y]} for y in Ps[i].points}
            g = inj[j] @ SheafMap(Ps[i], Qs[j], comps, check=False) @ prj[i]
            total = g if total is None else total + g
    if total is None:
        total = SheafMap(P, Q, {}, check=False)
    return total


def random_sheaf(rng: random.Random, S: GradedSpace, K, max_gens=3) -> GradedSheaf:
    """Cokernel of a random map between sums of generators ``R_{U_x}<-lam>``."""

    def keys(k):
        out = []
        for _ in range(k):
            x = rng.choice(S.points)
            G = S.lam[x]
            lam = rng.choice(G.elements()) if G.is_finite else G.zero
            out.append((x, lam))
        return out

    kq = keys(rng.randint(1, max_gens))
    kp = keys(rng.randint(0, max_gens - 1))
    Qs = [point_generator(S, K, x, l) for x, l in kq]
    if not kp:
        F, _, _ = direct_sum(*Qs)
        return F
    Ps = [point_generator(S, K, x, l) for x, l in kp]
    phi = _random_generator_map(rng, K, Ps, Qs, kp, kq)
    F, _ = cokernel(phi)
    F.name = "F"
    return F
