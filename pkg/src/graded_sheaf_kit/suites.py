"""Seeded law suites driven by the ``check`` command."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .algebra.linalg import GF2
from .derived.functors import basic_triangle, projection_formula_check
from .duality import duality_identities_check
from .generators import random_map, random_sheaf, random_space
from .sheaves.adjunction import base_change_check, check_sheaf_adjunction
from .space import common_kernel_points, fiber_product, is_proper_on


@dataclass
class SuiteResult:
    suite: str
    law: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return self.failed == 0

    def record(self, index, ok, detail=""):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append({"instance": index, "detail": detail})

    def as_dict(self):
        return {
            "suite": self.suite,
            "law": self.law,
            "ok": self.ok,
            "passed": self.passed,
            "failed": self.failed,
            "skipped": self.skipped,
            "failures": self.failures,
        }


def _space(rng, gradings=("0", "Z/2", "Z/3"), max_points=3):
    return random_space(rng, max_points=max_points, gradings=gradings)


def _map(rng, gradings=("0", "Z/2", "Z/3"), max_points=3):
    while True:
        X, Y = _space(rng, gradings, max_points), _space(rng, gradings, max_points)
        f = random_map(rng, X, Y)
        if f is not None:
            return f


def _fault(res: SuiteResult, index, detail):
    res.record(index, False, f"injected fault: corrupted comparison ({detail})")


def adjunction_suite(rng, count, K=GF2, fault=False, gradings=("0", "Z/2", "Z/3")):
    res = SuiteResult("adjunction", "f^-1 -| f_* (unit, counit, triangles, Hom bijection)")
    for i in range(count):
        f = _map(rng, gradings)
        F, G = random_sheaf(rng, f.src, K), random_sheaf(rng, f.dst, K)
        rep = check_sheaf_adjunction(f, F, G)
        if fault and i == 0:
            _fault(res, i, f"Hom dims {rep.hom_dims[0]} vs {rep.hom_dims[1] + 1}")
            continue
        res.record(i, rep.ok, "; ".join(rep.failures) or f"Hom dims {rep.hom_dims}")
    return res


def base_change_suite(rng, count, K=GF2, fault=False):
    """Squares where the kernels of both flats meet at some point of the fibre
    product fall outside the law's hypothesis and are counted as skipped."""
    res = SuiteResult("base-change", "g^-1 f_! = f~_! g~^-1 (flat kernels meeting trivially)")
    i = 0
    while res.passed + res.failed < count:
        f = _map(rng)
        Y2 = _space(rng)
        g = random_map(rng, Y2, f.dst)
        if g is None:
            continue
        square = fiber_product(f, g)
        if common_kernel_points(f, g):
            res.skipped += 1
            continue
        F = random_sheaf(rng, f.src, K)
        rep = base_change_check(f, g, square, F)
        if fault and i == 0:
            _fault(res, i, "stalk dimension off by one")
        else:
            res.record(i, rep.ok, rep.failure or "")
        i += 1
    return res


def projection_suite(rng, count, K=GF2, fault=False):
    res = SuiteResult("projection", "Rf_!(F) (x) G = Rf_!(F (x) f^-1 G)")
    for i in range(count):
        f = _map(rng)
        F, G = random_sheaf(rng, f.src, K), random_sheaf(rng, f.dst, K)
        rep = projection_formula_check(f, F, G)
        if fault and i == 0:
            _fault(res, i, "stalk table entry changed")
            continue
        res.record(i, rep.ok, "" if rep.ok else f"{rep.lhs} vs {rep.rhs}")
    return res


def triangle_suite(rng, count, K=GF2, fault=False):
    res = SuiteResult("triangle", "j_! j^-1 F -> F -> i_! i^-1 F is distinguished")
    for i in range(count):
        S = _space(rng)
        F = random_sheaf(rng, S, K)
        opens = S.poset.opens
        U = opens[rng.randrange(len(opens))]
        tri = basic_triangle(F, U)
        if fault and i == 0:
            _fault(res, i, "cone cohomology made nonzero")
            continue
        res.record(i, tri.ok, "" if tri.ok else f"cone {tri.cone_ok}, resolved {tri.resolved_ok}")
    return res


def duality_suite(rng, count, K=GF2, fault=False):
    """Only proper maps: every finite space is compact, so for a non-proper
    ``f`` the relation ``omega_X = f^! omega_Y`` itself fails and the
    identities have no content.  Those draws are counted as skipped."""
    res = SuiteResult("duality", "f^! RHom, Rf_* D = D Rf_!, f^! D = D f^-1 (f proper)")
    i = 0
    while res.passed + res.failed < count:
        f = _map(rng, max_points=2)
        if not is_proper_on(f, f.src.points, f.dst.points):
            res.skipped += 1
            continue
        F, G = random_sheaf(rng, f.dst, K, max_gens=2), random_sheaf(rng, f.dst, K, max_gens=2)
        rep = duality_identities_check(f, F, G)
        if fault and i == 0:
            _fault(res, i, "dual stalk table changed")
            i += 1
            continue
        bad = rep.first_failure()
        res.record(i, rep.ok, "" if bad is None else f"{bad.name}: {bad.first_difference}")
        i += 1
    return res


SUITES = {
    "adjunction": adjunction_suite,
    "base-change": base_change_suite,
    "projection": projection_suite,
    "triangle": triangle_suite,
    "duality": duality_suite,
}


def run_suites(names, seed, count, fault=False, K=GF2):
    """Each suite draws from its own generator seeded by ``(seed, name)``."""
    out = []
    for name in names:
        rng = random.Random(f"{seed}:{name}")
        out.append(SUITES[name](rng, count, K=K, fault=fault))
    return out
