import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from graded_sheaf_kit.algebra import (
    GF2,
    GF3,
    QQ,
    ZZ,
    BaseRing,
    FgModule,
    GradedModule,
    GradedRingData,
    GradingGroup,
    GradingMismatch,
    GroupHom,
    InfiniteSupport,
    RingMismatch,
    direct_sum_modules,
    graded_hom,
    graded_tensor,
    hom_module,
    integer_kernel,
    is_exact_pair,
    shift_module,
    smith_normal_form,
    tensor_module,
    tor_modules,
)
from graded_sheaf_kit.algebra.snf import int_det

small_orders = st.lists(st.integers(2, 6), min_size=0, max_size=2)
matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


def brute_hom_count(a_orders, b_orders):
    """Homomorphisms between finite products of cyclic groups, by trying
    every image of every generator."""
    B = list(itertools.product(*[range(o) for o in b_orders]))
    count = 0
    for imgs in itertools.product(B, repeat=len(a_orders)):
        if all(all((o * v) % q == 0 for v, q in zip(img, b_orders)) for o, img in zip(a_orders, imgs)):
            count += 1
    return count


def torsion(orders):
    return FgModule.from_invariants(ZZ, 0, orders)


# -- Smith normal form --------------------------------------------------------
def test_snf_of_diag_2_3():
    D, U, V = smith_normal_form([[2, 0], [0, 3]])
    assert (U.dot(np.array([[2, 0], [0, 3]], dtype=object)).dot(V) == D).all()
    assert [D[0, 0], D[1, 1]] == [1, 6]


def test_snf_identity_and_zero():
    D, _, _ = smith_normal_form([[1, 0], [0, 1]])
    assert [D[0, 0], D[1, 1]] == [1, 1]
    D, _, _ = smith_normal_form([[0, 0], [0, 0]])
    assert not D.any()


@given(matrices)
def test_snf_factorization(rows):
    M = np.array(rows, dtype=object)
    D, U, V = smith_normal_form(M)
    assert (U.dot(M).dot(V) == D).all()
    assert abs(int_det(U)) == 1 and abs(int_det(V)) == 1
    d = [D[i, i] for i in range(min(D.shape))]
    off = D.copy()
    for i in range(len(d)):
        off[i, i] = 0
    assert not off.any()
    for x, y in zip(d, d[1:]):
        assert (y == 0) or (x != 0 and y % x == 0)


@given(matrices)
def test_integer_kernel_is_annihilated(rows):
    M = np.array(rows, dtype=object)
    Kb = integer_kernel(M)
    assert not M.dot(Kb).any()


# -- groups -------------------------------------------------------------------
def test_parse_and_str():
    G = GradingGroup.parse("Z^2+Z/4")
    assert G.orders == (0, 0, 4) and str(G) == "Z+Z+Z/4"
    assert GradingGroup.parse("0").orders == ()
    with pytest.raises(ValueError):
        GradingGroup.parse("Q")


@given(st.lists(st.integers(0, 5).filter(lambda o: o != 1), max_size=3), st.data())
def test_normal_form_idempotent_and_additive(orders, data):
    G = GradingGroup(tuple(orders))
    vec = st.lists(st.integers(-20, 20), min_size=len(orders), max_size=len(orders))
    a, b = data.draw(vec), data.draw(vec)
    assert G.nf(G.nf(a)) == G.nf(a)
    assert G.nf([x + y for x, y in zip(a, b)]) == G.add(G.nf(a), G.nf(b))


def test_from_presentation_coordinates():
    # Z^2 / <(2, 3)> is Z; the generator map must send the relation to zero
    G, to_can, _ = GradingGroup.from_presentation([[2, 3]], 2)
    assert G.invariants() == (1, ())
    assert not to_can.dot(np.array([2, 3], dtype=object)).any()


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=1, max_size=3))
def test_from_presentation_kills_relations(rels):
    G, to_can, section = GradingGroup.from_presentation(rels, 3)
    for r in rels:
        assert G.nf(to_can.dot(np.array(r, dtype=object))) == G.zero
    for e in itertools.product(range(-1, 2), repeat=G.ngens):
        assert G.nf(to_can.dot(section.dot(np.array(e, dtype=object)))) == G.nf(e)


def test_z2_plus_z3_is_cyclic_of_order_6():
    G, _, _ = GradingGroup.from_presentation([[2, 0], [0, 3]], 2)
    assert G.invariants() == (0, (6,))


def test_elements_of_infinite_group_raise():
    with pytest.raises(InfiniteSupport):
        GradingGroup.parse("Z").elements()
    assert len(GradingGroup.parse("Z").window(2)) == 5


def test_group_hom_kernel_and_fiber():
    Z4, Z2 = GradingGroup.parse("Z/4"), GradingGroup.parse("Z/2")
    red = GroupHom(Z4, Z2, [[1]])
    K, inc = red.kernel()
    assert K.invariants() == (0, (2,))
    assert sorted(red.fiber((1,))) == [(1,), (3,)]
    assert red.is_surjective() and not red.is_injective()


# -- modules ------------------------------------------------------------------
def test_hom_z2_z4():
    H = hom_module(torsion([2]), torsion([4]))
    assert H.invariants == (0, (2,))
    assert brute_hom_count([2], [4]) == 2


def test_hom_from_free_and_into_free():
    M = torsion([3, 9])
    assert hom_module(FgModule.free(ZZ), M) == M
    assert hom_module(torsion([2]), FgModule.free(ZZ)).is_zero


def test_tensor_examples():
    assert tensor_module(torsion([2]), torsion([3])).is_zero
    assert tensor_module(torsion([4]), torsion([6])).invariants == (0, (2,))
    M = FgModule.free(BaseRing("F_p", 3), 2)
    assert tensor_module(FgModule.free(BaseRing("F_p", 3)), M) == M


def test_mixed_rings_rejected():
    with pytest.raises(RingMismatch):
        hom_module(torsion([2]), FgModule.free(BaseRing("Q")))


@given(small_orders, small_orders)
def test_hom_and_tensor_cardinalities_match_enumeration(a, b):
    n = brute_hom_count(a, b)
    assert hom_module(torsion(a), torsion(b)).cardinality() == n
    # finite abelian groups are self-dual, so |A (x) B| = |Hom(A, B)|
    assert tensor_module(torsion(a), torsion(b)).cardinality() == n


@given(small_orders, small_orders, small_orders)
def test_hom_and_tensor_are_additive(a, a2, b):
    A, A2, B = torsion(a), torsion(a2), torsion(b)
    S = direct_sum_modules(ZZ, [A, A2])
    assert hom_module(S, B) == direct_sum_modules(ZZ, [hom_module(A, B), hom_module(A2, B)])
    assert tensor_module(S, B) == direct_sum_modules(ZZ, [tensor_module(A, B), tensor_module(A2, B)])


@given(small_orders, small_orders, small_orders)
def test_tensor_hom_adjunction_cardinality(a, b, c):
    A, B, C = torsion(a), torsion(b), torsion(c)
    assert hom_module(tensor_module(A, B), C).cardinality() == hom_module(A, hom_module(B, C)).cardinality()


def test_tor_of_cyclic_groups():
    T = tor_modules(torsion([4]), torsion([6]))
    assert T[0].invariants == (0, (2,)) and T[-1].invariants == (0, (2,))


def test_module_parse_and_rank_over_fields():
    F3 = BaseRing.parse("F3")
    assert F3.is_field and F3.field() is GF3
    M = FgModule.parse(F3, "k^2")
    assert M.rank == 2 and M.cardinality() == 9
    assert BaseRing.parse("Z/4").is_field is False
    assert FgModule.zero(ZZ).invariants == (0, ())


def test_exact_pair():
    Z, Z2 = GradingGroup.parse("Z"), GradingGroup.parse("Z/2")
    double = GroupHom(Z, Z, [[2]])
    red = GroupHom(Z, Z2, [[1]])
    assert is_exact_pair(double, red)
    assert not is_exact_pair(GroupHom(Z, Z, [[4]]), red)


# -- graded modules -----------------------------------------------------------
Z2, Z3 = GradingGroup.parse("Z/2"), GradingGroup.parse("Z/3")
k2 = BaseRing("F_p", 2)


def kmod(G, degs):
    return GradedModule(G, k2, {d: FgModule.free(k2, n) for d, n in degs.items()})


def test_graded_hom_example():
    H = graded_hom(kmod(Z2, {(0,): 1}), kmod(Z2, {(1,): 1}))
    assert H.table() == {(1,): (1, ())}


def test_graded_hom_identity_and_zero():
    A = kmod(Z3, {(0,): 1, (2,): 2})
    assert graded_hom(A, A)[(0,)].rank == 5
    assert graded_hom(kmod(Z3, {}), A).is_zero


def test_graded_tensor_examples():
    one = kmod(Z2, {(1,): 1})
    assert graded_tensor(one, one).table() == {(0,): (1, ())}
    B = kmod(Z2, {(0,): 2, (1,): 1})
    assert graded_tensor(kmod(Z2, {(0,): 1}), B) == B
    assert graded_tensor(kmod(Z2, {}), B).is_zero


def test_graded_mismatch():
    with pytest.raises(GradingMismatch):
        graded_tensor(kmod(Z2, {(0,): 1}), kmod(Z3, {(0,): 1}))


def test_shift_examples():
    A = kmod(Z3, {(1,): 1})
    assert shift_module(A, (1,)).table() == {(0,): (1, ())}
    assert shift_module(A, (0,)) == A
    assert shift_module(shift_module(A, (2,)), (1,)) == A


degree_tables = st.dictionaries(st.sampled_from([(0,), (1,), (2,)]), st.integers(1, 2), max_size=3)


@given(degree_tables, degree_tables, degree_tables)
def test_graded_tensor_commutative_associative(a, b, c):
    A, B, C = kmod(Z3, a), kmod(Z3, b), kmod(Z3, c)
    assert graded_tensor(A, B) == graded_tensor(B, A)
    assert graded_tensor(graded_tensor(A, B), C) == graded_tensor(A, graded_tensor(B, C))


def test_truncated_polynomial_ring():
    R = GradedRingData.truncated_polynomial(GF2, Z3, 2, (1,))
    assert R.dim((0,)) == 1 and R.dim((1,)) == 1 and R.dim((2,)) == 0
    assert not R.validate()


def test_fields():
    assert GF2.count(3) == 8 and GF3.rank(GF3.mat([[1, 2], [2, 1]])) == 1
    assert QQ.rank(QQ.mat([[1, 2], [2, 4]])) == 1
