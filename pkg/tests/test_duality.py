import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from graded_sheaf_kit.algebra import GF2, GF3
from graded_sheaf_kit.derived.complexes import ComplexOfSheaves
from graded_sheaf_kit.derived.functors import derived_shriek_pushforward, inverse_image_complex
from graded_sheaf_kit.derived.resolutions import godement_resolution
from graded_sheaf_kit.duality import (
    DualityConfig,
    DualityError,
    NotExact,
    PreconditionError,
    RepresentabilityError,
    YonedaEvaluator,
    biduality_check,
    check_shriek_adjunction,
    cohomological_dimension,
    composition_check,
    dualizing_complex,
    duality_identities_check,
    remark_duality_crosscheck,
    represent_functor,
    soft_flat_resolution_of_R,
    soft_sequence_check,
    upper_shriek,
    verdier_dual,
)
from graded_sheaf_kit.fixtures import chain3, line3, pseudo_circle, pt, punctured_line, ringed_line3, sierpinski
from graded_sheaf_kit.generators import random_sheaf
from graded_sheaf_kit.sheaves.core import constant_sheaf, identity, skyscraper, zero_map, zero_sheaf
from graded_sheaf_kit.sheaves.functors import extend_by_zero
from graded_sheaf_kit.space import compose_maps, identity_map, map_to_point, sections_of_lambda

from . import oracles


def table(C):
    return ComplexOfSheaves.single(C).cohomology_table() if not isinstance(C, ComplexOfSheaves) else C.cohomology_table()


# -- configuration ---------------------------------------------------------------
def test_default_config_is_k_in_degree_zero():
    cfg = DualityConfig(GF2)
    assert cfg.omega.cohomology_table() == {0: {"*": {(): 1}}}


def test_config_rejects_bad_omega():
    two = ComplexOfSheaves.single(skyscraper(pt(), GF2, "*", dim=2))
    with pytest.raises(DualityError):
        DualityConfig(GF2, two)
    with pytest.raises(DualityError):
        DualityConfig(GF3, ComplexOfSheaves.single(constant_sheaf(pt(), GF2)))
    with pytest.raises(DualityError):
        DualityConfig(GF2, ComplexOfSheaves.single(constant_sheaf(line3(), GF2)))


# -- dimension and soft sequences -------------------------------------------------
@pytest.mark.parametrize("X,n", [(pt(), 0), (sierpinski(), 0), (line3(), 0), (pseudo_circle(), 1)])
def test_cohomological_dimension(X, n):
    assert cohomological_dimension(X, GF2) == n
    assert cohomological_dimension(X, GF3) == n


def test_soft_sequence_on_line3_returns_false():
    # the cd bound alone does not force softness of the last term
    S = line3()
    F = extend_by_zero(constant_sheaf(S, GF2), {"u-", "u+"})
    assert soft_sequence_check([F, F], [identity(F)]) is False


def test_soft_sequence_all_zero():
    S = pseudo_circle()
    Z = zero_sheaf(S, GF2)
    assert soft_sequence_check([Z, Z, Z], [identity(Z), identity(Z)])


def test_soft_sequence_guards():
    S = pseudo_circle()
    k = constant_sheaf(S, GF2)
    Z = zero_sheaf(S, GF2)
    with pytest.raises(PreconditionError):
        soft_sequence_check([k], [])
    with pytest.raises(PreconditionError):
        # too short for a space of dimension one
        soft_sequence_check([k, k], [identity(k)])
    with pytest.raises(NotExact):
        soft_sequence_check([k, k, Z], [zero_map(k, k), zero_map(k, Z)])


def test_soft_flat_resolution_flags():
    assert soft_flat_resolution_of_R(pt(), GF2).flags["length"] == 0
    r = soft_flat_resolution_of_R(sierpinski(), GF2)
    assert r.flags["truncated"] and r.flags["soft"] and r.flags["flat"]
    r = soft_flat_resolution_of_R(pseudo_circle(), GF2)
    assert r.flags["soft"] and r.flags["length"] == 1 and not r.flags["c_acyclic"]
    assert r.complex.cohomology_table() == table(constant_sheaf(pseudo_circle(), GF2))


# -- representable functors ----------------------------------------------------
@pytest.mark.parametrize("S", [line3(), pseudo_circle(), sierpinski()])
def test_yoneda_represents_itself(S):
    G = constant_sheaf(S, GF2)
    F = represent_functor(YonedaEvaluator(G), tests=[skyscraper(S, GF2, S.points[0])])
    assert F.table() == G.table()


def test_zero_functor_is_zero():
    F = represent_functor(YonedaEvaluator(zero_sheaf(line3(), GF2)))
    assert F.is_zero


class _Broken(YonedaEvaluator):
    """Claims one more section on U_c than the sheaf can carry."""

    def on_object(self, T):
        return super().on_object(T) + 1


def test_non_representable_functor_raises():
    with pytest.raises(RepresentabilityError):
        represent_functor(_Broken(constant_sheaf(line3(), GF2)))


# -- f^! ---------------------------------------------------------------------------
def test_upper_shriek_along_identity():
    S = line3()
    G = constant_sheaf(S, GF2)
    assert upper_shriek(identity_map(S), G).cohomology_table() == table(G)


def test_upper_shriek_along_open_inclusion_is_restriction():
    S = line3()
    j = punctured_line(S)
    G = skyscraper(S, GF2, "u+")
    got = upper_shriek(j, G).cohomology_table()
    assert got == inverse_image_complex(j, ComplexOfSheaves.single(G)).cohomology_table()


@pytest.mark.parametrize("K", [GF2, GF3])
def test_shriek_adjunction_on_fixtures(K):
    S = line3()
    j = punctured_line(S)
    assert check_shriek_adjunction(j, constant_sheaf(j.src, K), constant_sheaf(S, K)).ok
    rep = check_shriek_adjunction(map_to_point(S), constant_sheaf(S, K), constant_sheaf(pt(), K))
    assert rep.ok and rep.dims == (1, 1)


@given(st.integers(0, 10_000), st.sampled_from(["LINE3", "PSEUDOCIRCLE"]))
def test_shriek_hom_counts_match_oracle(seed, name):
    rng = random.Random(seed)
    S = line3() if name == "LINE3" else pseudo_circle()
    f = map_to_point(S)
    F = random_sheaf(rng, S, GF2, max_gens=2)
    G = random_sheaf(rng, f.dst, GF2, max_gens=2)
    I = godement_resolution(ComplexOfSheaves.single(G)).complex
    lhs = oracles.derived_hom_count(derived_shriek_pushforward(f, F), I, 12)
    rhs = oracles.derived_hom_count(ComplexOfSheaves.single(F), upper_shriek(f, G), 12)
    assume(lhs is not None and rhs is not None)
    assert lhs == rhs


# -- dualizing complexes ----------------------------------------------------------------
def test_dualizing_complexes():
    assert dualizing_complex(pt(), K=GF2).omega.cohomology_table() == {0: {"*": {(): 1}}}
    assert dualizing_complex(sierpinski(), K=GF2).omega.cohomology_table() == {0: {"a": {(): 1}}}
    assert dualizing_complex(line3(), K=GF2).omega.cohomology_table() == {0: {"c": {(0,): 1}}}
    pc = dualizing_complex(pseudo_circle(), K=GF2).omega.cohomology_table()
    assert pc == {-1: {x: {(): 1} for x in ("c1", "c2", "o1", "o2")}}


def test_biduality_on_pseudo_circle():
    S = pseudo_circle()
    for C in (constant_sheaf(S, GF2), skyscraper(S, GF2, "c1"), skyscraper(S, GF2, "o2")):
        assert biduality_check(C).ok


def test_biduality_fails_on_line3():
    r = biduality_check(constant_sheaf(line3(), GF2))
    assert not r.ok and r.first_difference == (0, "u+", (), 0, 1)


def test_verdier_dual_on_sierpinski_collapses_to_closed_point():
    # omega is k at the closed point, so k and k_a have the same dual
    S = sierpinski()
    D = dualizing_complex(S, K=GF2)
    k_a = {0: {"a": {(): 1}}}
    assert verdier_dual(constant_sheaf(S, GF2), D).cohomology_table() == k_a
    assert verdier_dual(skyscraper(S, GF2, "a"), D).cohomology_table() == k_a
    assert biduality_check(skyscraper(S, GF2, "a"), D).ok


# -- identities -------------------------------------------------------------------
def test_identities_along_identity_map():
    S = pseudo_circle()
    k = constant_sheaf(S, GF2)
    assert duality_identities_check(identity_map(S), k, k).ok


def test_identities_pseudo_circle_to_point():
    S = pseudo_circle()
    f = map_to_point(S)
    rep = duality_identities_check(f, constant_sheaf(S, GF2), constant_sheaf(f.dst, GF2))
    assert rep.ok
    two = next(r for r in rep.results if r.name.startswith("Rf_*"))
    assert {n: sum(sum(d.values()) for d in row.values()) for n, row in two.left.items()} == {-1: 1, 0: 1}


def test_identities_fail_along_open_inclusion():
    S = line3()
    j = punctured_line(S)
    rep = duality_identities_check(j, constant_sheaf(j.src, GF2), constant_sheaf(S, GF2))
    assert not rep.ok
    assert rep.first_failure().first_difference == (0, "c", (0,), 2, 0)


@pytest.mark.parametrize("which", range(4))
def test_composition_on_chain(which):
    f, g, h = chain3()
    a, b = [(f, g), (g, h), (compose_maps(g, f), h), (f, compose_maps(h, g))][which]
    assert composition_check(a, b, constant_sheaf(b.dst, GF2)).ok


def test_ringed_crosscheck():
    R = ringed_line3(GF2)
    L = sections_of_lambda(R.space, R.space.points).group
    for lam in L.elements():
        rep = remark_duality_crosscheck(R, lam)
        assert rep.ok and rep.projections_ok
