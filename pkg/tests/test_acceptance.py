"""Acceptance criteria, one test each, exact comparisons throughout.

Every test records a ``PASS``/``FAIL`` line that the terminal summary
prints (see ``conftest.py``); run with ``-s`` to see them inline too.
Two criteria cannot hold in the finite model and are marked ``xfail``
with ``strict=True``: they run in full and must keep failing.
"""
from __future__ import annotations

import io
import itertools
import random

import numpy as np
import pytest

from graded_sheaf_kit import cli
from graded_sheaf_kit.algebra import GF2, GF3, GradingGroup, GroupHom, InfiniteSupport
from graded_sheaf_kit.derived.complexes import ComplexOfSheaves
from graded_sheaf_kit.derived.functors import (
    basic_triangle,
    composition_identities_check,
    derived_base_change_check,
    derived_global_sections,
    derived_shriek_pushforward,
    projection_formula_check,
)
from graded_sheaf_kit.derived.resolutions import (
    flat_resolution,
    godement_augmentation,
    godement_complex,
    godement_resolution,
    godement_term,
)
from graded_sheaf_kit.duality import (
    biduality_check,
    cohomological_dimension,
    composition_check,
    duality_identities_check,
    remark_duality_crosscheck,
    upper_shriek,
)
from graded_sheaf_kit.fixtures import chain3, line3, pseudo_circle, ringed_line3
from graded_sheaf_kit.generators import all_posets, graded_space_on, random_map, random_sheaf, random_space
from graded_sheaf_kit.io import fixture_names, fixture_text, load_fixture, parse_text, serialize
from graded_sheaf_kit.ringed import (
    RingedMap,
    check_module_adjunction,
    constant_ring_module,
    free_module,
    module_exact_sequence,
)
from graded_sheaf_kit.sheaves.adjunction import base_change_check, check_sheaf_adjunction
from graded_sheaf_kit.sheaves.core import (
    GradedSheaf,
    cokernel,
    constant_sheaf,
    is_short_exact,
    section_dim,
    skyscraper,
    stalk,
)
from graded_sheaf_kit.sheaves.flabby import is_flabby, is_soft
from graded_sheaf_kit.sheaves.functors import (
    extend_by_zero,
    hom_space,
    inverse_image_gr,
    pushforward_gr,
    pushforward_map,
    sheaf_hom,
    shriek_map,
    shriek_pushforward_gr,
    tensor_sheaf,
)
from graded_sheaf_kit.sheaves.presheaf import sections_table
from graded_sheaf_kit.space import (
    FinitePoset,
    GradedSpace,
    common_kernel_points,
    compose_maps,
    fiber_product,
    map_to_point,
    sections_of_lambda,
)

from . import oracles
from .conftest import record

T0 = ()


def _report(n, ok, detail):
    record(n, ok, detail)
    assert ok, detail


# -- 1 ---------------------------------------------------------------------
def _ungraded_instance(rng, P):
    """Compare every operation on one ungraded instance; returns mismatches."""
    S = graded_space_on(P, "0")
    T = random_space(rng, max_points=3, gradings=("0",))
    f = random_map(rng, S, T)
    F = random_sheaf(rng, S, GF2, max_gens=2)
    G = random_sheaf(rng, S, GF2, max_gens=2)
    H = random_sheaf(rng, T, GF2, max_gens=2)
    oP = oracles.Poset(P.points, P.le)
    oT = oracles.Poset(T.points, T.poset.le)
    oF, oG, oH = oracles.OSheaf.of(F), oracles.OSheaf.of(G), oracles.OSheaf.of(H)
    bad = []

    def same_sections(name, impl, orc, opens):
        for U in opens:
            if 2 ** section_dim(impl, U, T0) != orc.count_sections(U):
                bad.append(f"{name} sections over {sorted(U)}")
                return

    same_sections("F", F, oF, P.opens)
    for x in P.points:
        if 2 ** stalk(F, x)[T0].rank != oF.stalk_count(x):
            bad.append(f"stalk at {x}")
    same_sections("F(x)G", tensor_sheaf(F, G), oracles.tensor(oF, oG), P.opens)
    if oracles.hom_size(oF, oG) <= 12:
        if hom_space(F, G).cardinality() != oracles.hom_count(oF, oG):
            bad.append("Hom(F, G)")
        HF = sheaf_hom(F, G)
        for x in P.points:
            if 2 ** HF.dim(x, T0) != oracles.hom_count(oF, oG, P.up(x)):
                bad.append(f"Hom stalk at {x}")
    if f is not None:
        same_sections("f^-1 H", inverse_image_gr(f, H), oracles.inverse_image(f.pmap, oP, oH), P.opens)
        push, shriek = pushforward_gr(f, F), shriek_pushforward_gr(f, F)
        for V in T.poset.opens:
            if 2 ** section_dim(push, V, T0) != oracles.pushforward_count(f.pmap, oP, oF, oT, V):
                bad.append(f"f_* over {sorted(V)}")
            if 2 ** section_dim(shriek, V, T0) != oracles.shriek_count(f.pmap, oP, oF, oT, V):
                bad.append(f"f_! over {sorted(V)}")
    convex = [set(Y) for r in range(1, len(P.points) + 1) for Y in itertools.combinations(P.points, r)
              if P.is_locally_closed(Y)]
    Y = rng.choice(convex)
    same_sections("F_Y", extend_by_zero(F, Y), oracles.extend_by_zero(oF, Y), P.opens)
    return bad


def test_criterion_1_ungraded_reduction():
    rng = random.Random(1)
    posets = [P for n in range(1, 5) for P in all_posets(n)]
    failures, count = [], 0
    for P in posets:
        for _ in range(5):
            bad = _ungraded_instance(rng, P)
            count += 1
            failures += [f"{sorted(P.le)}: {b}" for b in bad]
    ok = not failures and count >= 200
    _report(1, ok, f"ungraded reduction on {count} instances over {len(posets)} posets"
            + (f"; first mismatch {failures[0]}" if failures else ""))


# -- 2 ---------------------------------------------------------------------
def test_criterion_2_adjunction_laws():
    rng = random.Random(2)
    sheaf_runs, module_runs, bad = 0, 0, []
    while sheaf_runs < 100:
        X, Y = random_space(rng), random_space(rng)
        f = random_map(rng, X, Y)
        if f is None:
            continue
        F, G = random_sheaf(rng, X, GF2, max_gens=2), random_sheaf(rng, Y, GF2, max_gens=2)
        lhs = oracles.graded_hom_count(inverse_image_gr(f, G), F)
        rhs = oracles.graded_hom_count(G, pushforward_gr(f, F))
        if lhs is None or rhs is None:
            continue
        rep = check_sheaf_adjunction(f, F, G)
        sheaf_runs += 1
        if not rep.ok or rep.cardinalities != (lhs, rhs) or lhs != rhs:
            bad.append(f"sheaf instance {sheaf_runs}: {rep.failures} {rep.cardinalities} vs {(lhs, rhs)}")
    while module_runs < 30:
        X, Y = random_space(rng), random_space(rng)
        f = random_map(rng, X, Y)
        if f is None:
            continue
        fr = RingedMap.constant(f, GF2)
        F = constant_ring_module(random_sheaf(rng, X, GF2, max_gens=2))
        G = constant_ring_module(random_sheaf(rng, Y, GF2, max_gens=2))
        rep = check_module_adjunction(fr, F, G)
        H = check_sheaf_adjunction(f, F.F, G.F)
        module_runs += 1
        if not rep.ok or rep.cardinalities != H.cardinalities:
            bad.append(f"module instance {module_runs}: {rep.failures}")
    R = ringed_line3(GF2)
    M = free_module(R)
    rep = check_module_adjunction(RingedMap.identity(R), M, M)
    brute = oracles.module_hom_count(M, M)
    if not rep.ok or rep.cardinalities != (brute, brute):
        bad.append(f"ringed LINE3 identity: {rep.failures} {rep.cardinalities} vs {brute}")
    _report(2, not bad, f"{sheaf_runs} sheaf and {module_runs + 1} module adjunctions, "
            "triangles and enumerated Hom cardinalities" + (f"; {bad[0]}" if bad else ""))


# -- 3 ---------------------------------------------------------------------
def _square(rng):
    while True:
        X = random_space(rng)
        Y1, Y2 = random_space(rng), random_space(rng)
        f, g = random_map(rng, Y1, X), random_map(rng, Y2, X)
        if f is not None and g is not None:
            return f, g


@pytest.mark.xfail(strict=True, reason="fails when the kernels of the two flats meet; see README")
def test_criterion_3_base_change():
    rng = random.Random(3)
    runs, non_strict, torsion_pushout, bad, explained = 0, 0, 0, [], 0
    while runs < 50:
        f, g = _square(rng)
        square = fiber_product(f, g)
        Z = square[0]
        F = random_sheaf(rng, f.src, GF2, max_gens=2)
        runs += 1
        non_strict += not f.is_strict
        torsion_pushout += any(f.src.lam[a].ngens and g.src.lam[b].ngens for a, b in Z.points)
        under = base_change_check(f, g, square, F)
        derived = derived_base_change_check(f, g, square, F)
        if not (under.ok and derived.ok):
            bad.append(f"square {runs}: {under.failure or 'derived tables differ'}")
            explained += bool(common_kernel_points(f, g))
    ok = not bad and non_strict and torsion_pushout
    _report(3, ok, f"{runs} random squares ({non_strict} non-strict, {torsion_pushout} torsion pushouts), "
            f"{runs - len(bad)} isomorphic; {explained} of {len(bad)} failures have meeting flat kernels"
            + (f"; first failure {bad[0]}" if bad else ""))


# -- 4 ---------------------------------------------------------------------
def test_criterion_4_basic_triangle():
    rng = random.Random(4)
    runs, bad = 0, []
    while runs < 50:
        S = random_space(rng)
        F = random_sheaf(rng, S, GF2)
        U = rng.choice(S.poset.opens)
        tri = basic_triangle(F, U)
        seq = module_exact_sequence(constant_ring_module(F), U)
        runs += 1
        if not (tri.ok and seq.exact and seq.linear):
            bad.append(f"instance {runs}: cone {tri.cone_ok}, resolved {tri.resolved_ok}, module {seq.exact}")
    R = ringed_line3(GF2)
    for U in R.space.poset.opens:
        seq = module_exact_sequence(free_module(R), U)
        runs += 1
        if not (seq.exact and seq.linear):
            bad.append(f"ringed LINE3 over {sorted(U)}")
    _report(4, not bad, f"cone cohomology zero and module sequences exact on {runs} instances"
            + (f"; {bad[0]}" if bad else ""))


# -- 5 ---------------------------------------------------------------------
def test_criterion_5_graded_pushforward_finiteness():
    ws = load_fixture("line3")
    push = pushforward_gr(ws.maps["j"], ws.sheaves["F"])
    row = push.dims["c"]
    ok = row == {(0,): 2, (1,): 2, (2,): 2}
    wz = load_fixture("line3-z")
    try:
        pushforward_gr(wz.maps["jZ"], wz.sheaves["FZ"])
        raised = False
    except InfiniteSupport:
        raised = True
    _report(5, ok and raised, f"Z/3 stand-in stalk at c {row}; Z-graded fixture raises InfiniteSupport: {raised}")


# -- 6 ---------------------------------------------------------------------
def _fixture_sheaves():
    out = []
    for name in fixture_names():
        ws = load_fixture(name)
        out += [F for F in ws.sheaves.values() if isinstance(F, GradedSheaf)]
    return out


def _ungraded_flabby(F):
    """Flabbiness of ``U -> (+)_lam F(U)_lam`` as an ordinary presheaf."""
    T = sections_table(F)
    K = F.K
    for (U, V), blocks in T.res.items():
        r = T.rhom[(U, V)]
        for mu, m in T.dims[V].items():
            cols = [blocks[lam] for lam in T.dims[U] if r(lam) == mu and lam in blocks]
            rank = K.rank(np.hstack(cols)) if cols else 0
            if rank != m:
                return False
    return True


def flabby_witness():
    """LINE3 with ``Lambda_c = 0``, ``Lambda_u = Z/2``: ``k`` at ``c`` and
    ``u+`` in degree 0, ``k`` at ``u-`` in degree 1."""
    Z0, Z2 = GradingGroup(()), GradingGroup.parse("Z/2")
    P = FinitePoset.from_covers(["c", "u-", "u+"], [("c", "u-"), ("c", "u+")])
    S = GradedSpace(P, {"c": Z0, "u-": Z2, "u+": Z2},
                    {("c", "u-"): GroupHom.zero_map(Z0, Z2), ("c", "u+"): GroupHom.zero_map(Z0, Z2)})
    dims = {"c": {(): 1}, "u-": {(1,): 1}, "u+": {(0,): 1}}
    return GradedSheaf(S, GF2, dims, {("c", "u+"): {(): [[1]]}})


def test_criterion_6_flabby_and_soft():
    rng = random.Random(6)
    sheaves = _fixture_sheaves() + [random_sheaf(rng, random_space(rng), GF2) for _ in range(20)]
    terms = [T for F in sheaves for T in godement_complex(F).terms.values()]
    godement_ok = all(is_flabby(T) for T in terms)
    implies = all(is_soft(F) for F in sheaves + terms if is_flabby(F))
    pushes, exact = 0, True
    while pushes < 30:
        X, Y = random_space(rng), random_space(rng)
        f = random_map(rng, X, Y)
        if f is None:
            continue
        A = godement_term(random_sheaf(rng, X, GF2), 0)
        B = godement_term(A, 0)
        i = godement_augmentation(A, B)
        C, p = cokernel(i)
        assert is_flabby(A) and is_short_exact(i, p)
        for push, lift in ((pushforward_gr, pushforward_map), (shriek_pushforward_gr, shriek_map)):
            fA, fB, fC = push(f, A), push(f, B), push(f, C)
            exact &= is_short_exact(lift(f, i, fA, fB), lift(f, p, fB, fC))
        pushes += 1
    W = flabby_witness()
    witness = is_flabby(W) and not _ungraded_flabby(W)
    ok = godement_ok and implies and exact and witness
    _report(6, ok, f"{len(terms)} Godement terms flabby: {godement_ok}; flabby => soft: {implies}; "
            f"{pushes} pushed sequences exact: {exact}; graded-only flabby witness: {witness}")


# -- 7 ---------------------------------------------------------------------
def test_criterion_7_pseudo_circle():
    S = pseudo_circle()
    H = derived_global_sections(constant_sheaf(S, GF2)).cohomology_table()
    ranks = {n: sum(row.get("*", {}).values()) for n, row in H.items()}
    cd = cohomological_dimension(S)
    ok = ranks == {0: 1, 1: 1} and cd == 1
    _report(7, ok, f"H^n ranks {ranks}, cohomological dimension {cd}")


# -- 8 ---------------------------------------------------------------------
def test_criterion_8_projection_formula():
    rng = random.Random(8)
    runs, bad = 0, []
    while runs < 25:
        X, Y = random_space(rng), random_space(rng)
        f = random_map(rng, X, Y)
        if f is None:
            continue
        F, G = random_sheaf(rng, X, GF2), random_sheaf(rng, Y, GF2)
        if not flat_resolution(G).certify():
            continue
        rep = projection_formula_check(f, F, G)
        runs += 1
        if not rep.ok:
            bad.append(f"instance {runs}: {rep.lhs} vs {rep.rhs}")
    _report(8, not bad, f"both sides agree on {runs} instances" + (f"; {bad[0]}" if bad else ""))


# -- 9 ---------------------------------------------------------------------
def _shriek_hom_counts(rng, K, want, limit):
    runs, nontrivial, bad = 0, 0, []
    while runs < want:
        X, Y = random_space(rng, gradings=("0", "Z/2")), random_space(rng, gradings=("0", "Z/2"))
        f = random_map(rng, X, Y)
        if f is None:
            continue
        F, G = random_sheaf(rng, X, K, max_gens=2), random_sheaf(rng, Y, K, max_gens=2)
        A = derived_shriek_pushforward(f, F)
        B = godement_resolution(ComplexOfSheaves.single(G)).complex
        lhs = oracles.derived_hom_count(A, B, limit)
        if lhs is None:
            continue
        rhs = oracles.derived_hom_count(ComplexOfSheaves.single(F), upper_shriek(f, G), limit)
        if rhs is None:
            continue
        runs += 1
        nontrivial += lhs > 1
        if lhs != rhs:
            bad.append(f"{K}: {lhs} vs {rhs}")
    return runs, nontrivial, bad


@pytest.mark.xfail(strict=True, reason="biduality cannot hold on LINE3 in the finite model; see README")
def test_criterion_9_duality():
    rng = random.Random(9)
    parts, bad = {}, []
    n2, t2, b2 = _shriek_hom_counts(rng, GF2, 25, 12)
    n3, t3, b3 = _shriek_hom_counts(rng, GF3, 25, 8)
    parts["adjunction counts"] = not (b2 or b3) and t2 and t3
    bad += b2 + b3
    bidual = {}
    for K in (GF2, GF3):
        for S in (line3(), pseudo_circle()):
            for C in (constant_sheaf(S, K), skyscraper(S, K, S.points[0]), skyscraper(S, K, S.points[-1])):
                r = biduality_check(C)
                bidual[(S.name, str(K), C.name)] = r.ok
    for key, ok in bidual.items():
        if not ok:
            bad.append(f"biduality on {key[0]} over {key[1]} for {key[2]}")
    parts["biduality LINE3"] = all(v for k, v in bidual.items() if k[0] == "LINE3")
    parts["biduality pseudo-circle"] = all(v for k, v in bidual.items() if k[0] == "PSEUDOCIRCLE")
    R = ringed_line3(GF2)
    L = sections_of_lambda(R.space, R.space.points).group
    crosscheck = all(remark_duality_crosscheck(R, lam).ok for lam in L.elements())
    parts["ringed crosscheck"] = crosscheck
    S = pseudo_circle()
    f = map_to_point(S)
    rep = duality_identities_check(f, constant_sheaf(S, GF2), constant_sheaf(f.dst, GF2))
    two = next(r for r in rep.results if r.name.startswith("Rf_*"))
    exchange = two.ok and _ranks(two.left) == {-1: 1, 0: 1}
    parts["pseudo-circle exchange"] = exchange
    ok = all(parts.values())
    detail = "; ".join(f"{k}: {'ok' if v else 'FAILS'}" for k, v in parts.items())
    _report(9, ok, f"{n2} F2 and {n3} F3 adjunction counts; {detail}")


def _ranks(table):
    return {n: sum(sum(r.values()) for r in row.values()) for n, row in table.items()}


# -- 10 --------------------------------------------------------------------
def test_criterion_10_composition():
    f, g, h = chain3()
    K = GF2
    parts = []
    for a, b in ((f, g), (g, h), (compose_maps(g, f), h), (f, compose_maps(h, g))):
        C = constant_sheaf(a.src, K)
        rep = composition_identities_check(a, b, C)
        parts += [rep["pushforward"].ok, rep["shriek"].ok]
        parts.append(composition_check(a, b, constant_sheaf(b.dst, K)).ok)
    _report(10, all(parts), f"{sum(parts)} of {len(parts)} composition identities hold on the chained fixture")


# -- 11 --------------------------------------------------------------------
def test_criterion_11_cli():
    trips = {name: serialize(parse_text(fixture_text(name), name)) == fixture_text(name) for name in fixture_names()}
    out = io.StringIO()
    clean = cli.main(["check", "all", "--seed", "1"], out=out)
    faulty_out = io.StringIO()
    faulty = cli.main(["check", "all", "--seed", "1", "--inject-fault"], out=faulty_out)
    named = "FAIL adjunction: f^-1 -| f_*" in faulty_out.getvalue()
    ok = all(trips.values()) and clean == 0 and faulty == 1 and named
    _report(11, ok, f"round trip on {sum(trips.values())}/{len(trips)} fixtures; check all exit {clean}; "
            f"injected fault exit {faulty}, law named: {named}")
