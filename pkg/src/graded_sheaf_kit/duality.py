"""Cohomological dimension, representable functors, ``f^!`` and Verdier duality.

Over a field, ``f^!`` is assembled from the functor
``F -> Hom(f_!(F (x) M), I)`` with ``M`` a soft resolution of the structure
sheaf and ``I`` an injective (Godement) resolution of the input.  The functor
is represented by the sheaf whose value on ``U_x`` in degree ``lam`` is its
value on the generator ``R_{U_x}<-lam>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra.linalg import Field, NotSolvable
from .derived.complexes import ChainMap, ComplexOfSheaves, total_complex
from .derived.functors import (
    derived_pushforward,
    derived_shriek_pushforward,
    hom_complex,
    hypercohomology,
    inverse_image_complex,
)
from .derived.resolutions import (
    FlatnessUndecided,
    Resolution,
    generator_cover,
    godement_augmentation,
    godement_complex,
    godement_differential,
    godement_map,
    godement_term,
    godement_resolution,
)
from .sheaves.core import (
    GradedSheaf,
    NonFieldBase,
    SheafError,
    SheafMap,
    candidate_degrees,
    constant_sheaf,
    direct_sum,
    generator,
    identity,
    is_exact_at,
    kernel,
    point_generator,
    section_dim,
)
from .sheaves.flabby import is_c_acyclic, is_soft
from .sheaves.functors import (
    HomSpace,
    degree_piece,
    direct_image_map,
    extend_by_zero,
    pushforward_gr,
    shift_sheaf,
    shriek_pushforward_gr,
    tensor_maps,
    tensor_sheaf,
)
from .space import GradedSpace, GradedSpaceMap, compose_maps, map_to_point, point_space


class DualityError(ValueError):
    pass


class PreconditionError(DualityError):
    pass


class NotExact(DualityError):
    pass


class RepresentabilityError(DualityError):
    pass


def _field_of(K):
    if not isinstance(K, Field):
        raise NonFieldBase(f"duality needs a field base, got {K!r}")
    return K


def _as_complex(C):
    return ComplexOfSheaves.single(C) if isinstance(C, GradedSheaf) else C


def _ring_data(X, K=None):
    """``(space, K, R, ringed)`` for a graded or ringed graded space."""
    from .ringed import RingedGradedSpace

    if isinstance(X, RingedGradedSpace):
        return X.space, X.K, X.R, True
    if K is None:
        raise ValueError("a field is needed for a plain graded space")
    return X, K, constant_sheaf(X, K), False


# -- the dualizing complex of the base field ---------------------------------
@dataclass
class DualityConfig:
    """Base field and its dualizing complex, a complex on ``(pt, 0)``."""

    K: Field
    omega: ComplexOfSheaves = None

    def __post_init__(self):
        _field_of(self.K)
        if self.omega is None:
            self.omega = ComplexOfSheaves.single(constant_sheaf(point_space(), self.K))
        self.validate()

    def validate(self):
        S = self.omega.space
        if len(S.points) != 1 or not S.is_ungraded:
            raise DualityError("omega_k must live on the ungraded point")
        if self.omega.K != self.K:
            raise DualityError("omega_k is over another field")
        # bounded complexes of vector spaces are injective; k -> RHom(w, w)
        # is an isomorphism iff the total cohomology is a line
        tab = self.omega.cohomology_table()
        total = sum(n for t in tab.values() for row in t.values() for n in row.values())
        if total != 1:
            raise DualityError(f"k -> RHom(omega, omega) is not a quasi-isomorphism (cohomology {tab})")


# -- cohomological dimension --------------------------------------------------
def simple_sheaves(S: GradedSpace, K: Field):
    """``k`` on each single point, extended by zero; every sheaf on the
    underlying space has a finite filtration with these as quotients."""
    U = S.underlying()
    k = constant_sheaf(U, K)
    return {x: extend_by_zero(k, {x}) for x in U.points}


def cohomological_dimension(X, K: Field = None) -> int:
    """Largest ``n`` with ``H^n_c`` nonzero on some simple sheaf."""
    from .algebra.linalg import GF2

    S = X if isinstance(X, GradedSpace) else X.space
    K = K or getattr(X, "K", None) or GF2
    n = 0
    for F in simple_sheaves(S, K).values():
        H = hypercohomology(F, compact=True)
        n = max([n] + [k for k, v in H.items() if v])
    if n > S.poset.height:
        raise AssertionError(f"dimension {n} exceeds the chain-length bound {S.poset.height}")
    return n


def soft_sequence_check(sheaves, maps, window=None) -> bool:
    """``0 -> F_0 -> ... -> F_{n+1} -> 0`` exact with ``F_1 .. F_n`` soft on a
    space of dimension at most ``n``: returns whether ``F_{n+1}`` is soft
    (always, by the dimension bound)."""
    n = len(sheaves) - 2
    if n < 0 or len(maps) != n + 1:
        raise PreconditionError("need n+2 sheaves and n+1 maps")
    S, K = sheaves[0].space, sheaves[0].K
    cd = cohomological_dimension(S, K)
    if cd > n:
        raise PreconditionError(f"space has dimension {cd} > {n}")
    if not maps[0].is_mono() or not maps[-1].is_epi():
        raise NotExact("sequence is not exact at an end")
    for i in range(n):
        if not is_exact_at(maps[i], maps[i + 1]):
            raise NotExact(f"sequence is not exact at term {i + 1}")
    for i in range(1, n + 1):
        if not is_soft(sheaves[i], window):
            raise PreconditionError(f"term {i} is not soft")
    return is_soft(sheaves[-1], window)


def soft_flat_resolution_of_R(X, K: Field = None, window=None) -> Resolution:
    """Godement resolution of ``R_X``, cut at the cohomological dimension ``n``
    (``M^n = ker(Gd^n -> Gd^{n+1})``) when that kernel is soft, and kept
    whole otherwise.  Over a field with constant ``R`` every term is flat."""
    S, K, R, ringed = _ring_data(X, K)
    _field_of(K)
    if ringed and not _is_constant_ring(X):
        raise FlatnessUndecided("Godement terms of a non-constant ring need not be flat")
    n = cohomological_dimension(S, K)
    Gd = godement_complex(R, window)
    src = ComplexOfSheaves.single(R)
    aug0 = godement_augmentation(R, Gd.term(0))
    M, aug, cut = Gd, ChainMap(src, Gd, {0: aug0}, check=False), False
    if n < Gd.hi:
        Kn, inc = kernel(Gd.d(n))
        if is_soft(Kn, window):
            prev = aug0 if n == 0 else Gd.d(n - 1)
            comps = {x: {d: K.solve(inc.at(x, d), prev.at(x, d)) for d in prev.src.dims[x]} for x in S.points}
            into = SheafMap(prev.src, Kn, comps, check=False)
            terms = {i: Gd.term(i) for i in range(n)}
            terms[n] = Kn
            diffs = {i: Gd.d(i) for i in range(n - 1)}
            if n:
                diffs[n - 1] = into
            M = ComplexOfSheaves(terms, diffs, check=False, name=f"M({R.name})")
            aug = ChainMap(src, M, {0: into if n == 0 else aug0}, check=False)
            cut = True
    flags = {
        "soft": all(is_soft(F, window) for F in M.terms.values()),
        "flat": True,
        "length": M.hi,
        "truncated": cut,
        "c_acyclic": all(is_c_acyclic(F, window) for F in M.terms.values()),
    }
    return Resolution(src, M, aug, "soft-flat", flags=flags)


def _is_constant_ring(X):
    R = X.R
    return all(R.dims[x] == {X.space.lam[x].zero: 1} for x in R.points)


# -- kernels: resolved generators ------------------------------------------------
class TensorKernel:
    """Term ``p`` on a generator ``P`` is ``P (x) M^p`` for a complex ``M``."""

    spread = False

    def __init__(self, M: ComplexOfSheaves):
        self.M = M
        self.terms = list(range(M.lo, M.hi + 1))

    def base_support(self, p, w):
        return self.M.term(p).support(w)

    def build(self, p, P, window=None):
        return tensor_sheaf(P, self.M.term(p))

    def along(self, p, inc, B2, B1):
        return tensor_maps(inc, identity(self.M.term(p)), B2, B1)

    def diff(self, p, P, B0, B1):
        return tensor_maps(identity(P), self.M.d(p), B0, B1)


class GodementKernel:
    """Term ``p`` on a generator ``P`` is ``Gd^p(P (x) R)``; exact in ``P`` and
    made of flabby sheaves, so ``f_!`` of it computes ``Rf_!``."""

    spread = True

    def __init__(self, R: GradedSheaf):
        self.R = R
        self.terms = list(range(R.space.poset.height + 1))

    def base_support(self, p, w):
        return self.R.support(w)

    def build(self, p, P, window=None):
        return godement_term(tensor_sheaf(P, self.R), p, window)

    def along(self, p, inc, B2, B1):
        F2, F1 = B2.meta["godement"][0], B1.meta["godement"][0]
        return godement_map(tensor_maps(inc, identity(self.R), F2, F1), B2, B1)

    def diff(self, p, P, B0, B1):
        return godement_differential(B0.meta["godement"][0], B0, B1)


def make_kernel(X, K: Field = None, kernel="godement", window=None):
    """``"godement"`` (default) or ``"resolution"`` (tensor with
    :func:`soft_flat_resolution_of_R`); kernel objects pass through."""
    if not isinstance(kernel, str):
        return kernel
    S, K, R, _ = _ring_data(X, K)
    if kernel == "godement":
        return GodementKernel(R)
    if kernel == "resolution":
        return TensorKernel(soft_flat_resolution_of_R(X, K, window).complex)
    raise ValueError(f"unknown kernel {kernel!r}")


# -- representable functors ---------------------------------------------------
class YonedaEvaluator:
    """``Hom(-, G)``: value on ``R_{U_x}<-lam>`` is ``G_x[lam]``."""

    def __init__(self, G: GradedSheaf):
        self.G, self.space, self.K = G, G.space, G.K

    def degrees(self, x):
        return self.G.support(x)

    def value(self, x, lam):
        return self.G.dim(x, lam)

    def restriction(self, x, y, lam):
        return self.G.res(x, y, lam)

    def on_object(self, T):
        return HomSpace(T, self.G).dim


class ShriekEvaluator:
    """``T -> Hom(f_! B^p(T), I)`` where ``B^p`` is term ``p`` of a kernel.

    ``sources`` may be shared between evaluators with the same kernel term so
    that induced maps compare equal bases.
    """

    def __init__(self, f: GradedSpaceMap, kernel, p, I: GradedSheaf, window=None, sources=None):
        self.f, self.kernel, self.p, self.I = f, kernel, p, I
        self.space, self.K = f.src, I.K
        self.window = window
        self.sources = sources if sources is not None else {}
        self._homs = {}

    def degrees(self, x):
        f, S = self.f, self.f.src
        P = S.poset
        cons = []
        for w in P.up(x):
            base = self.kernel.base_support(self.p, w)
            if not base:
                continue
            vals = set()
            for z in (P.down(w) if self.kernel.spread else [w]):
                for y in f.dst.points:
                    if not f.dst.poset.leq(y, f(z)):
                        continue
                    fl, rz = f.flat_at(z, y), S.rho(z, w)
                    G = S.lam[w]
                    vals.update(G.sub(rz(fl(mu)), r) for mu in self.I.support(y) for r in base)
            if vals:
                cons.append((S.rho(x, w), sorted(vals)))
        return candidate_degrees(S.lam[x], cons, self.window, where=x)

    def source(self, x, lam):
        """``(P, B, A)`` with ``P = R_{U_x}<-lam>``, ``B = B^p(P)``, ``A = f_! B``."""
        key = (x, lam)
        if key not in self.sources:
            P = point_generator(self.space, self.K, x, lam)
            B = self.kernel.build(self.p, P, self.window)
            self.sources[key] = (P, B, shriek_pushforward_gr(self.f, B, self.window))
        return self.sources[key]

    def hom(self, x, lam):
        key = (x, lam)
        if key not in self._homs:
            self._homs[key] = HomSpace(self.source(x, lam)[2], self.I)
        return self._homs[key]

    def value(self, x, lam):
        return self.hom(x, lam).dim

    def restriction(self, x, y, lam):
        """Precompose with ``f_! B^p`` of ``R_{U_y}<-rho lam> -> R_{U_x}<-lam>``."""
        lam2 = self.space.lres[(x, y)](lam)
        P1, B1, A1 = self.source(x, lam)
        P2, B2, A2 = self.source(y, lam2)
        K = self.K
        inc = SheafMap(P2, P1, {z: {d: K.eye(1) for d in P2.dims[z]} for z in P2.points}, check=False)
        iota = direct_image_map(self.kernel.along(self.p, inc, B2, B1), A2, A1)
        return _precompose(self.hom(x, lam), self.hom(y, lam2), iota)

    def on_object(self, T):
        B = self.kernel.build(self.p, T, self.window)
        return HomSpace(shriek_pushforward_gr(self.f, B, self.window), self.I).dim


def _precompose(H1: HomSpace, H2: HomSpace, alpha: SheafMap):
    """Matrix of ``phi -> phi o alpha`` from ``H1`` to ``H2`` (``alpha: H2.F -> H1.F``)."""
    K = H1.K
    cols = []
    for i in range(H1.dim):
        phi = H1.element(i)
        new = {}
        for w in H2.U:
            for mu in H2.F.dims[w]:
                p = phi.get(w, {}).get(mu)
                if p is not None:
                    new.setdefault(w, {})[mu] = K.matmul(p, alpha.at(w, mu))
        cols.append(H2.coords(new))
    return np.hstack(cols) if cols else K.zeros(H2.dim, 0)


def _postcompose(H1: HomSpace, H2: HomSpace, beta: SheafMap):
    """Matrix of ``phi -> beta o phi`` (``beta: H1.G -> H2.G``)."""
    K = H1.K
    cols = []
    for i in range(H1.dim):
        phi = H1.element(i)
        new = {}
        for w, blk in phi.items():
            for mu, p in blk.items():
                new.setdefault(w, {})[mu] = K.matmul(beta.at(w, mu), p)
        cols.append(H2.coords(new))
    return np.hstack(cols) if cols else K.zeros(H2.dim, 0)


def represent_functor(ev, check=True, tests=()) -> GradedSheaf:
    """Sheaf with ``value(x, lam)`` at ``x`` in degree ``lam`` and restrictions
    from the evaluator.

    With ``check`` the restrictions must compose, and when the evaluator
    can evaluate arbitrary objects, its value on every ``R_U<-lam>`` must
    equal the sections of the result (the sheaf condition); ``tests`` are
    further objects ``T`` on which ``dim Hom(T, result)`` is compared.
    """
    S, K = ev.space, ev.K
    dims = {x: {} for x in S.points}
    for x in S.points:
        for lam in ev.degrees(x):
            n = ev.value(x, lam)
            if n:
                dims[x][lam] = n
    maps = {}
    for (x, y) in S.poset.covers:
        rho = S.lres[(x, y)]
        maps[(x, y)] = {}
        for lam in dims[x]:
            if dims[y].get(rho(lam)):
                maps[(x, y)][lam] = ev.restriction(x, y, lam)
    F = GradedSheaf(S, K, dims, maps, name="rep", check=False)
    F.meta["represent"] = ev
    if not check:
        return F
    bad = F.validate()
    if bad:
        raise RepresentabilityError("evaluator is not functorial: " + bad[0])
    if hasattr(ev, "on_object"):
        from .space import sections_of_lambda

        for U in S.poset.opens:
            if not U:
                continue
            L = sections_of_lambda(S, U)
            cons = [(L.proj[x], sorted(F.dims[x]) or []) for x in U]
            degs = set(candidate_degrees(L.group, [c for c in cons if c[1]]))
            for lam in sorted(degs):
                want = ev.on_object(generator(S, K, U, lam))
                got = section_dim(F, U, lam)
                if want != got:
                    raise RepresentabilityError(
                        f"sheaf condition fails on {sorted(U, key=str)} in degree {lam}: {want} vs {got}"
                    )
        for T in tests:
            if HomSpace(T, F).dim != ev.on_object(T):
                raise RepresentabilityError(f"universal property fails on {T.name}")
    return F


# -- f^! ----------------------------------------------------------------------
def upper_shriek(f: GradedSpaceMap, G, kernel="godement", injective=False, window=None) -> ComplexOfSheaves:
    """``f^! G`` as the total complex of ``Hom(f_! B^p(R_U<-lam>), I^q)``.

    ``kernel`` resolves the generators: ``"godement"`` uses
    ``Gd(R_U<-lam> (x) R)``, ``"resolution"`` uses ``R_U<-lam> (x) M`` for
    :func:`soft_flat_resolution_of_R`; a kernel object may be passed.  ``I``
    is the Godement resolution of ``G``, or ``G`` itself when ``injective``.
    """
    G = _as_complex(G)
    K = _field_of(G.K)
    if G.space != f.dst:
        raise SheafError("complex does not live on the target of f")
    I = G if injective else godement_resolution(G, window).complex
    if isinstance(kernel, str):
        kernel = make_kernel(f.src, K, kernel, window)
    T, evs, cache = {}, {}, {}
    for p in kernel.terms:
        src_cache = cache.setdefault(p, {})
        for q, Iq in I.terms.items():
            ev = ShriekEvaluator(f, kernel, p, Iq, window, src_cache)
            T[(-p, q)] = represent_functor(ev, check=False)
            evs[(-p, q)] = ev
    dh, dv = {}, {}
    for (a, q), F in T.items():
        if (a, q + 1) in T:
            dv[(a, q)] = _shriek_post(evs[(a, q)], evs[(a, q + 1)], F, T[(a, q + 1)], I.d(q))
        if (a + 1, q) in T:
            dh[(a, q)] = _shriek_pre(evs[(a, q)], evs[(a + 1, q)], F, T[(a + 1, q)])
    C = total_complex(T, dh, dv, name="f^!")
    C.meta["shriek"] = (f, kernel, I, T, evs)
    return C


def _shriek_post(ev1, ev2, F1, F2, beta):
    comps = {}
    for x in F1.points:
        comps[x] = {}
        for lam, n in F1.dims[x].items():
            if F2.dim(x, lam):
                comps[x][lam] = _postcompose(ev1.hom(x, lam), ev2.hom(x, lam), beta)
            else:
                comps[x][lam] = F1.K.zeros(0, n)
    return SheafMap(F1, F2, comps, check=False)


def _shriek_pre(ev1, ev2, F1, F2):
    """``Hom(f_! B^p, I) -> Hom(f_! B^{p-1}, I)`` along the kernel differential."""
    K, kern, p = F1.K, ev1.kernel, ev1.p
    comps = {}
    for x in F1.points:
        comps[x] = {}
        for lam, n in F1.dims[x].items():
            if not F2.dim(x, lam):
                comps[x][lam] = K.zeros(0, n)
                continue
            P, B1, A1 = ev1.source(x, lam)
            _, B2, A2 = ev2.source(x, lam)
            alpha = direct_image_map(kern.diff(p - 1, P, B2, B1), A2, A1)
            comps[x][lam] = _precompose(ev1.hom(x, lam), ev2.hom(x, lam), alpha)
    return SheafMap(F1, F2, comps, check=False)


def shriek_functor_map(f, beta: SheafMap, M: GradedSheaf, window=None, sources=None):
    """``f^!_M(beta)`` for a sheaf map ``beta: I -> I'`` on ``Y``."""
    sources = sources if sources is not None else {}
    kern = TensorKernel(ComplexOfSheaves.single(M))
    e1 = ShriekEvaluator(f, kern, 0, beta.src, window, sources)
    e2 = ShriekEvaluator(f, kern, 0, beta.dst, window, sources)
    F1, F2 = represent_functor(e1, check=False), represent_functor(e2, check=False)
    return _shriek_post(e1, e2, F1, F2, beta)


# -- the adjunction f_!(- (x) M) -| f^!_M, termwise ------------------------------
@dataclass
class ShriekAdjunction:
    """Adjunction data for one soft sheaf ``M`` on ``X``.

    ``phi(F, S, I)`` is the matrix of the bijection
    ``Hom(F, f^!_M I) -> Hom(f_!(F (x) M), I)`` obtained from the
    representing isomorphism on generators.
    """

    f: GradedSpaceMap
    M: GradedSheaf
    window: object = None
    sources: dict = field(default_factory=dict)

    def upper(self, I):
        kern = TensorKernel(ComplexOfSheaves.single(self.M))
        ev = ShriekEvaluator(self.f, kern, 0, I, self.window, self.sources)
        return represent_functor(ev, check=False)

    def lower(self, F):
        return shriek_pushforward_gr(self.f, tensor_sheaf(F, self.M), self.window)

    def lower_map(self, phi, src=None, dst=None):
        src = src or self.lower(phi.src)
        dst = dst or self.lower(phi.dst)
        a = tensor_sheaf(phi.src, self.M) if "direct" not in src.meta else src.meta["direct"][1]
        b = tensor_sheaf(phi.dst, self.M) if "direct" not in dst.meta else dst.meta["direct"][1]
        return direct_image_map(tensor_maps(phi, identity(self.M), a, b), src, dst)

    def phi(self, F: GradedSheaf, S: GradedSheaf, I: GradedSheaf, lowF=None):
        """``(matrix, Hom(F, S), Hom(lowF, I))`` with ``S = f^!_M I`` from :meth:`upper`."""
        K = F.K
        ev = S.meta["represent"]
        lowF = lowF or self.lower(F)
        H_up = HomSpace(F, S)
        H_low = HomSpace(lowF, I)
        P, cover, gens = generator_cover(F)
        if not gens:
            return K.zeros(H_low.dim, H_up.dim), H_up, H_low
        Ps = [point_generator(F.space, K, x, lam) for x, lam, _ in gens]
        Psum, inj, _ = direct_sum(*Ps)
        TP = tensor_sheaf(Psum, self.M)
        lowP = shriek_pushforward_gr(self.f, TP, self.window)
        H_P = HomSpace(lowP, I)
        # restriction to each generator summand: Hom(lowP, I) -> Hom(A_j, I)
        blocks = []
        for (x, lam, _), ij in zip(gens, inj):
            _, Bj, Aj = ev.source(x, lam)
            a = direct_image_map(tensor_maps(ij, identity(self.M), Bj, TP), Aj, lowP)
            blocks.append(_precompose(H_P, ev.hom(x, lam), a))
        R_P = np.vstack(blocks)
        # Hom(lowF, I) -> Hom(lowP, I) along the cover
        cov = self.lower_map(cover, lowP, lowF)
        R_F = _precompose(H_low, H_P, cov)
        total = K.matmul(R_P, R_F)
        cols = []
        for i in range(H_up.dim):
            psi = H_up.element(i)
            parts = []
            for (x, lam, v) in gens:
                parts.append(K.matmul(psi.get(x, {}).get(lam, K.zeros(S.dim(x, lam), F.dim(x, lam))), v))
            target = np.vstack(parts)
            try:
                cols.append(K.solve(total, target))
            except NotSolvable as e:
                raise DualityError("psi does not descend along the generator cover") from e
        mat = np.hstack(cols) if cols else K.zeros(H_low.dim, 0)
        return mat, H_up, H_low

    def counit(self, I: GradedSheaf, S=None):
        """``f_!(f^!_M I (x) M) -> I``, the image of the identity."""
        S = S or self.upper(I)
        K = I.K
        mat, H_up, H_low = self.phi(S, S, I)
        v = K.matmul(mat, H_up.coords(identity(S).comps))
        return H_low.to_map(H_low.components(K.matmul(H_low.basis, v)))

    def unit(self, F: GradedSheaf, lowF=None, S=None):
        """``F -> f^!_M f_!(F (x) M)``, the preimage of the identity."""
        K = F.K
        lowF = lowF or self.lower(F)
        S = S or self.upper(lowF)
        mat, H_up, H_low = self.phi(F, S, lowF, lowF)
        target = H_low.coords(identity(lowF).comps)
        c = K.solve(mat, target)
        return H_up.to_map(H_up.components(K.matmul(H_up.basis, c)))


@dataclass
class TriangleReport:
    bijective: bool
    left_triangle: bool
    right_triangle: bool
    dims: tuple

    @property
    def ok(self):
        return self.bijective and self.left_triangle and self.right_triangle


def check_shriek_adjunction(f: GradedSpaceMap, F: GradedSheaf, I: GradedSheaf, M: GradedSheaf = None,
                            window=None) -> TriangleReport:
    """Bijection and both triangle identities for ``f_!(- (x) M) -| f^!_M``."""
    K = F.K
    M = M if M is not None else constant_sheaf(f.src, K)
    adj = ShriekAdjunction(f, M, window)
    S = adj.upper(I)
    mat, H_up, H_low = adj.phi(F, S, I)
    bij = mat.shape[0] == mat.shape[1] and K.rank(mat) == mat.shape[0] if mat.size else H_up.dim == H_low.dim
    # f_!(F (x) M) -> f_! f^! f_!(F (x) M) (x) M) -> f_!(F (x) M)
    lowF = adj.lower(F)
    SF = adj.upper(lowF)
    eta = adj.unit(F, lowF, SF)
    low_SF = adj.lower(SF)
    eps_low = adj.counit(lowF, SF)
    left = (eps_low @ adj.lower_map(eta, lowF, low_SF)).equals(identity(lowF))
    # f^! I -> f^! f_!(f^! I (x) M) -> f^! I
    eta_S = adj.unit(S)
    eps_I = adj.counit(I, S)
    SS = eta_S.dst
    post = _shriek_post(SS.meta["represent"], S.meta["represent"], SS, S, eps_I)
    right = (post @ eta_S).equals(identity(S))
    return TriangleReport(bool(bij), bool(left), bool(right), (H_up.dim, H_low.dim))


# -- dualizing complexes --------------------------------------------------------
@dataclass
class DualizingComplex:
    omega: ComplexOfSheaves
    kernel: object
    config: DualityConfig
    ringed: bool = False

    @property
    def space(self):
        return self.omega.space


def dualizing_complex(X, config: DualityConfig = None, K: Field = None, kernel="godement",
                      window=None) -> DualizingComplex:
    """``omega_X = p^! omega_k`` along the map to the point.

    For a ringed space the result is the graded complex of ``k``-sheaves
    underlying ``omega_X``; the action of ``R_X`` is not recorded.
    """
    S, K0, _, ringed = _ring_data(X, K or (config.K if config else None))
    config = config or DualityConfig(K0)
    kern = make_kernel(X, K0, kernel, window)
    p = map_to_point(S, config.omega.space)
    omega = upper_shriek(p, config.omega, kernel=kern, injective=True, window=window)
    return DualizingComplex(omega, kern, config, ringed)


def verdier_dual(C, dual: DualizingComplex = None, window=None) -> ComplexOfSheaves:
    """``D_X C = Hom(C, omega_X)``; the terms of ``omega_X`` are injective."""
    C = _as_complex(C)
    dual = dual or dualizing_complex(C.space, DualityConfig(_field_of(C.K)), window=window)
    return hom_complex(C, dual.omega, window)


def degree_piece_complex(C: ComplexOfSheaves, lam) -> ComplexOfSheaves:
    """Apply :func:`degree_piece` termwise."""
    from .space import sections_of_lambda

    S = C.space
    L = sections_of_lambda(S, S.points)
    fam = L.family(L.group.nf(lam))
    terms = {n: degree_piece(F, lam) for n, F in C.terms.items()}
    diffs = {}
    for n, d in C.diffs.items():
        A, B = terms[n], terms[n + 1]
        comps = {x: {(): d.at(x, fam[x])} for x in S.points if A.dims[x]}
        diffs[n] = SheafMap(A, B, comps, check=False)
    return ComplexOfSheaves(terms, diffs, check=False)


# -- identities -------------------------------------------------------------
@dataclass
class IdentityResult:
    name: str
    ok: bool
    left: dict
    right: dict
    first_difference: object = None


@dataclass
class DualityReport:
    results: list

    @property
    def ok(self):
        return all(r.ok for r in self.results)

    def first_failure(self):
        return next((r for r in self.results if not r.ok), None)


def _first_difference(a, b):
    for n in sorted(set(a) | set(b)):
        ra, rb = a.get(n, {}), b.get(n, {})
        for x in sorted(set(ra) | set(rb), key=str):
            da, db = ra.get(x, {}), rb.get(x, {})
            for d in sorted(set(da) | set(db)):
                if da.get(d, 0) != db.get(d, 0):
                    return (n, x, d, da.get(d, 0), db.get(d, 0))
    return None


def compare_tables(name, A: ComplexOfSheaves, B: ComplexOfSheaves) -> IdentityResult:
    ta, tb = A.cohomology_table(), B.cohomology_table()
    diff = _first_difference(ta, tb)
    return IdentityResult(name, diff is None, ta, tb, diff)


def duality_identities_check(f: GradedSpaceMap, F, G, config: DualityConfig = None, window=None) -> DualityReport:
    """Stalk tables of the three duality identities, for ``F`` on ``X`` and
    ``G`` on ``Y`` (for the first, ``F`` is pulled back: ``Hom(F', G)`` with
    ``F'`` on ``Y`` is read as ``F`` itself when it lives on ``Y``)."""
    F, G = _as_complex(F), _as_complex(G)
    K = _field_of(G.K)
    config = config or DualityConfig(K)
    wX = dualizing_complex(f.src, config, window=window)
    wY = dualizing_complex(f.dst, config, window=window)
    FY = F if F.space == f.dst else None
    out = []
    if FY is not None:
        RH = hom_complex(FY, godement_resolution(G, window).complex, window)
        left = upper_shriek(f, RH, injective=True, window=window)
        right = hom_complex(inverse_image_complex(f, FY), upper_shriek(f, G, window=window), window)
        out.append(compare_tables("f^! RHom(F, G) = RHom(f^-1 F, f^! G)", left, right))
        FX = inverse_image_complex(f, FY)
    else:
        FX = F
    left = derived_pushforward(f, verdier_dual(FX, wX, window), window=window)
    right = verdier_dual(derived_shriek_pushforward(f, FX, window=window), wY, window)
    out.append(compare_tables("Rf_* D_X = D_Y Rf_!", left, right))
    left = upper_shriek(f, verdier_dual(G, wY, window), injective=True, window=window)
    right = verdier_dual(inverse_image_complex(f, G), wX, window)
    out.append(compare_tables("f^! D_Y = D_X f^-1", left, right))
    return DualityReport(out)


def biduality_check(C, dual: DualizingComplex = None, window=None) -> IdentityResult:
    C = _as_complex(C)
    dual = dual or dualizing_complex(C.space, DualityConfig(C.K), window=window)
    DC = verdier_dual(C, dual, window)
    return compare_tables("D D C = C", verdier_dual(DC, dual, window), C)


def composition_check(f: GradedSpaceMap, g: GradedSpaceMap, G, window=None) -> IdentityResult:
    """``(g o f)^! G`` against ``f^! g^! G``."""
    gf = compose_maps(g, f)
    left = upper_shriek(gf, G, window=window)
    right = upper_shriek(f, upper_shriek(g, G, window=window), injective=True, window=window)
    return compare_tables("(g f)^! = f^! g^!", left, right)


@dataclass
class RemarkReport:
    lam: tuple
    degree: IdentityResult
    projections_ok: bool

    @property
    def ok(self):
        return self.degree.ok and self.projections_ok


def underlying_projection(S: GradedSpace) -> GradedSpaceMap:
    """``pi: X -> X`` forgetting the grading (zero flats)."""
    U = S.underlying()
    return GradedSpaceMap(S, U, {x: x for x in S.points}, name="pi")


def remark_duality_crosscheck(X, lam, config: DualityConfig = None, K: Field = None, window=None) -> RemarkReport:
    """``(omega_X)_lam`` against ``RHom(R_{-lam}, omega)`` on the underlying
    space, and ``pi_*(F<lam>) = pi_!(F<lam>) = F_lam`` for ``F = R_X``."""
    S, K0, R, _ = _ring_data(X, K or (config.K if config else None))
    config = config or DualityConfig(K0)
    from .space import sections_of_lambda

    L = sections_of_lambda(S, S.points)
    lam = L.group.nf(lam)
    wX = dualizing_complex(X, config, K0, window=window)
    left = degree_piece_complex(wX.omega, lam)
    U = S.underlying()
    wU = dualizing_complex(U, config, K0, window=window)
    Rm = degree_piece(R, L.group.neg(lam))
    right = hom_complex(ComplexOfSheaves.single(Rm), wU.omega, window)
    res = compare_tables(f"(omega_X)_{lam} = RHom(R_-lam, omega)", left, right)
    pi = underlying_projection(S)
    Fl = shift_sheaf(R, lam)
    piece = degree_piece(R, lam)
    proj = pushforward_gr(pi, Fl, window).table() == piece.table() == shriek_pushforward_gr(pi, Fl, window).table()
    return RemarkReport(lam, res, proj)
