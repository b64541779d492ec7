import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graded_sheaf_kit.algebra import GradingGroup, GroupHom
from graded_sheaf_kit.algebra.groups import hom_from_images
from graded_sheaf_kit.fixtures import line3, pseudo_circle, punctured_line
from graded_sheaf_kit.generators import all_posets, graded_space_on, random_map, random_space
from graded_sheaf_kit.space import (
    FinitePoset,
    GradedSpace,
    GradedSpaceMap,
    MapMismatch,
    NotOpen,
    PosetError,
    compose_maps,
    fiber_product,
    identity_map,
    is_proper_on,
    map_to_point,
    point_space,
    restriction_hom,
    sections_of_lambda,
    validate_space,
)

Z0 = GradingGroup(())
Z = GradingGroup.parse("Z")
Z2 = GradingGroup.parse("Z/2")
Z3 = GradingGroup.parse("Z/3")


def all_homs(G, H):
    for imgs in itertools.product(H.elements(), repeat=G.ngens):
        try:
            yield hom_from_images(G, H, imgs)
        except ValueError:
            pass


def all_maps(T, Y):
    """Every graded map ``T -> Y`` (finite groups only)."""
    for img in itertools.product(Y.points, repeat=len(T.points)):
        pmap = dict(zip(T.points, img))
        if any(not Y.poset.leq(pmap[a], pmap[b]) for a, b in T.poset.le):
            continue
        choices = [list(all_homs(Y.lam[pmap[x]], T.lam[x])) for x in T.points]
        for flats in itertools.product(*choices):
            f = GradedSpaceMap(T, Y, pmap, dict(zip(T.points, flats)))
            if not f.validate():
                yield f


def same_map(f, g):
    return f.pmap == g.pmap and all(f.flat[x] == g.flat[x] for x in f.src.points)


# -- posets -------------------------------------------------------------------
def test_poset_rejects_cycles():
    with pytest.raises(PosetError):
        FinitePoset(["a", "b"], [("a", "b"), ("b", "a")])


def test_opens_are_up_sets():
    P = line3().poset
    assert P.up("c") == frozenset(P.points)
    assert P.is_open({"u-"}) and not P.is_open({"c"})
    assert P.is_closed({"c"}) and P.down("u+") == frozenset({"c", "u+"})
    assert len(P.opens) == 5


@given(st.integers(1, 4), st.integers(0, 10 ** 6))
def test_monotone_maps_are_continuous(n, seed):
    rng = random.Random(seed)
    X = random_space(rng, n, gradings=("0",))
    Y = random_space(rng, 3, gradings=("0",))
    f = random_map(rng, X, Y)
    if f is None:
        return
    for V in Y.poset.opens:
        assert X.poset.is_open(f.preimage(V))


# -- validation ---------------------------------------------------------------
def test_validate_examples():
    assert validate_space(point_space()) == []
    assert validate_space(line3()) == []
    assert validate_space(pseudo_circle(Z2)) == []


def test_validate_names_non_composing_pair():
    # a < b < d and a < c < d; the two routes a -> d disagree
    P = FinitePoset.from_covers("abcd", [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])
    lres = {cv: GroupHom.identity(Z2) for cv in P.covers}
    lres[("a", "c")] = GroupHom.zero_map(Z2, Z2)
    S = GradedSpace(P, {x: Z2 for x in P.points}, lres)
    diags = validate_space(S)
    assert diags and "a->" in diags[0] and "->d" in diags[0]


def test_restriction_off_cover_rejected():
    P = FinitePoset.from_covers("ab", [("a", "b")])
    with pytest.raises(PosetError):
        GradedSpace(P, {"a": Z0, "b": Z0}, {("b", "a"): GroupHom.identity(Z0)})


# -- sections of Lambda -------------------------------------------------------
def test_lambda_sections_on_line3():
    S = line3()
    L = sections_of_lambda(S, S.points)
    assert L.group.invariants() == (0, (3,))
    assert L.family((1,)) == {"c": (1,), "u-": (), "u+": ()}


def test_lambda_sections_of_minimal_opens():
    S = pseudo_circle(Z3)
    for x in S.points:
        assert sections_of_lambda(S, S.poset.up(x)).group.isomorphic(S.lam[x])
    assert sections_of_lambda(S, []).group.ngens == 0


def test_lambda_of_disconnected_open_is_a_product():
    S = pseudo_circle(Z2)
    assert sections_of_lambda(S, {"o1", "o2"}).group.invariants() == (0, (2, 2))
    # the whole pseudo-circle is connected through identity restrictions
    assert sections_of_lambda(S, S.points).group.invariants() == (0, (2,))


def test_lambda_sections_require_open():
    with pytest.raises(NotOpen):
        sections_of_lambda(line3(), {"c"})


def test_restriction_hom_round_trip():
    S = pseudo_circle(Z2)
    r = restriction_hom(S, S.points, {"o1"})
    assert r.is_iso()


# -- maps ---------------------------------------------------------------------
def test_compose_with_identity():
    f = punctured_line(line3())
    assert same_map(compose_maps(identity_map(f.dst), f), f)
    assert same_map(compose_maps(f, identity_map(f.src)), f)


def test_compose_flats_pointwise():
    S = line3()
    p = GradedSpaceMap(S, point_space(Z3), {x: "*" for x in S.points},
                       {"c": GroupHom(Z3, Z3, [[2]])})
    q = GradedSpaceMap(point_space(Z3), point_space(Z3), {"*": "*"}, {"*": GroupHom(Z3, Z3, [[2]])})
    r = compose_maps(q, p)
    assert r.flat["c"] == GroupHom.identity(Z3)
    assert r.flat["c"] == p.flat["c"] @ q.flat["*"]
    assert not r.validate()


def test_strict_maps_compose_to_strict():
    f = GradedSpaceMap(point_space(Z3), point_space(Z3), {"*": "*"}, {"*": GroupHom(Z3, Z3, [[2]])})
    assert f.is_strict and compose_maps(f, f).is_strict
    assert not map_to_point(line3()).is_strict


def test_compose_mismatch():
    with pytest.raises(MapMismatch):
        compose_maps(punctured_line(line3()), map_to_point(line3()))


# -- fiber products -----------------------------------------------------------
def test_fiber_product_two_points_over_zero():
    A = point_space(Z2)
    f = map_to_point(A)
    Zs, ft, gt = fiber_product(f, f)
    assert len(Zs.points) == 1
    assert Zs.lam[Zs.points[0]].invariants() == (0, (2, 2))
    assert ft.flat[Zs.points[0]].is_injective()


def test_fiber_product_diagonal_pushout():
    X = point_space(Z)
    f = identity_map(X)
    Zs, _, _ = fiber_product(f, f)
    assert Zs.lam[Zs.points[0]].invariants() == (1, ())


def test_fiber_product_along_identity():
    S = line3()
    g = punctured_line(S)
    Zs, ft, gt = fiber_product(identity_map(S), g)
    assert sorted(Zs.points) == [("u+", "u+"), ("u-", "u-")]
    assert ft.is_strict and gt.is_strict


def test_fiber_product_mismatch():
    with pytest.raises(MapMismatch):
        fiber_product(map_to_point(line3()), identity_map(line3()))


UNIVERSAL_CASES = [
    # Y1 -> X <- Y2
    (graded_space_on(FinitePoset.from_covers("ab", [("a", "b")]), "Z/2"), point_space(Z2), point_space(Z2)),
    (line3("Z/2"), point_space(), point_space(Z2)),
    (point_space(Z2), point_space(), point_space(Z2)),
]


@pytest.mark.parametrize("case", range(len(UNIVERSAL_CASES)))
def test_fiber_product_universal_property(case):
    Y1, X, Y2 = UNIVERSAL_CASES[case]
    checked = 0
    for f in itertools.islice(all_maps(Y1, X), 3):
        for g in itertools.islice(all_maps(Y2, X), 3):
            Zs, ft, gt = fiber_product(f, g)
            assert not validate_space(Zs) and not ft.validate() and not gt.validate()
            for n in (1, 2, 3):
                for P in all_posets(n):
                    for grading in ("0", "Z/2"):
                        T = graded_space_on(P, grading)
                        maps_a = list(all_maps(T, Y1))
                        maps_b = list(all_maps(T, Y2))
                        factors = list(all_maps(T, Zs))
                        for a in maps_a:
                            for b in maps_b:
                                if not same_map(compose_maps(f, a), compose_maps(g, b)):
                                    continue
                                hits = [u for u in factors
                                        if same_map(compose_maps(gt, u), a) and same_map(compose_maps(ft, u), b)]
                                assert len(hits) == 1
                                checked += 1
    assert checked > 100


@given(st.integers(0, 10 ** 6))
def test_base_change_of_strict_map_is_strict(seed):
    rng = random.Random(seed)
    X = random_space(rng)
    Y1 = random_space(rng, gradings=(str(X.lam[X.points[0]]) if X.lam[X.points[0]].ngens else "0",))
    Y2 = random_space(rng)
    f, g = random_map(rng, Y1, X), random_map(rng, Y2, X)
    if f is None or g is None or not f.is_strict:
        return
    _, ft, _ = fiber_product(f, g)
    assert ft.is_strict


# -- properness ---------------------------------------------------------------
def test_proper_examples():
    S = line3()
    j = punctured_line(S)
    assert not is_proper_on(j, {"u-"}, target=S.points)
    assert is_proper_on(j, {"u-"})
    assert is_proper_on(j, set(), target=S.points)
    ident = identity_map(S)
    for C in S.poset.closeds:
        assert is_proper_on(ident, C)


@given(st.integers(1, 4), st.integers(0, 10 ** 6))
def test_properness_is_monotone(n, seed):
    rng = random.Random(seed)
    X = random_space(rng, n, gradings=("0",))
    Y = random_space(rng, 3, gradings=("0",))
    f = random_map(rng, X, Y)
    if f is None:
        return
    T = frozenset(Y.points)
    for S in X.poset.closeds:
        if not is_proper_on(f, S, target=T):
            continue
        for C in X.poset.closeds:
            if C <= S:
                assert is_proper_on(f, C, target=T)
