"""Graded sheaves of rings on finite graded spaces and modules over them.

A ring sheaf is a graded sheaf ``R`` with, at every point, a multiplication
``R_x[a] (x) R_x[b] -> R_x[a+b]`` (a matrix on Kronecker coordinates, row-major
in the first factor) and a unit in degree 0.  A module carries an action
``R_x[a] (x) F_x[b] -> F_x[a+b]`` in the same format.  Restrictions must be
ring homomorphisms, respectively action-compatible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra.linalg import Field, NotSolvable
from .sheaves.adjunction import adjunction_counit, adjunction_unit
from .sheaves.core import (
    GradedSheaf,
    SheafError,
    SheafMap,
    constant_sheaf,
    identity,
    is_short_exact,
    subquotient,
)
from .sheaves.functors import (
    HomSpace,
    basic_exact_sequence,
    direct_image_map,
    extend_by_zero,
    inverse_image_gr,
    inverse_image_map,
    pushforward_gr,
    sheaf_hom,
    shriek_pushforward_gr,
    tensor_maps,
    tensor_sheaf,
)
from .space import GradedSpace, GradedSpaceMap, identity_map


class RingError(ValueError):
    pass


class ActionMismatch(ValueError):
    pass


# -- small matrix helpers -----------------------------------------------------
def swap_matrix(K: Field, n, m):
    """Permutation ``A (x) B -> B (x) A`` for ``dim A = n``, ``dim B = m``."""
    P = K.zeros(n * m, n * m)
    for i in range(n):
        for j in range(m):
            P[j * n + i, i * m + j] = 1
    return P


def _embed_kron(K, A, n1, o1, N1, n2, o2, N2, rows, r0):
    """Columns of ``A`` indexed by ``i * n2 + j`` moved to ``(o1+i) * N2 + (o2+j)``
    and rows shifted by ``r0`` inside a ``rows``-row matrix."""
    out = K.zeros(rows, N1 * N2)
    for i in range(n1):
        for j in range(n2):
            out[r0 : r0 + A.shape[0], (o1 + i) * N2 + (o2 + j)] = A[:, i * n2 + j]
    return out


def _proj_from_reps(K, Bb, C, n):
    """Coordinates in the complement ``C`` of a vector modulo ``span(Bb)``."""
    if C.shape[1] == 0:
        return K.zeros(0, n)
    inv = K.solve(np.hstack([Bb, C]), K.eye(n))
    return inv[Bb.shape[1]:]


# -- ring sheaves -------------------------------------------------------------
class RingedGradedSpace:
    """A graded space with a graded sheaf of commutative rings.

    ``mult[x][(a, b)]`` has shape ``(dim R_x[a+b], dim R_x[a] * dim R_x[b])``;
    ``unit[x]`` is a column in ``R_x[0]``.
    """

    def __init__(self, space: GradedSpace, K: Field, R: GradedSheaf, mult, unit, name=None, check=True):
        if R.space != space:
            raise RingError("ring sheaf lives on another space")
        self.space = space
        self.K = K
        self.R = R
        self.name = name or R.name or "R"
        self.mult = {}
        for x in space.points:
            G = space.lam[x]
            self.mult[x] = {}
            for (a, b), M in (mult.get(x) or {}).items():
                self.mult[x][(G.nf(a), G.nf(b))] = K.mat(M) if np.size(M) else None
            for a, na in R.dims[x].items():
                for b, nb in R.dims[x].items():
                    shape = (R.dim(x, G.add(a, b)), na * nb)
                    M = self.mult[x].get((a, b))
                    if M is None:
                        M = K.zeros(*shape)
                    if M.shape != shape:
                        raise RingError(f"multiplication {a}*{b} at {x}: shape {M.shape}, want {shape}")
                    self.mult[x][(a, b)] = M
        self.unit = {x: K.mat(unit[x], (-1, 1)) if R.dim(x, space.lam[x].zero) else K.zeros(0, 1)
                     for x in space.points}
        if check:
            diags = self.validate()
            if diags:
                raise RingError("; ".join(diags))

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_stalks(cls, space, K, rings, maps=None, name=None, check=True):
        """Rings given pointwise by :class:`GradedRingData` plus restriction
        matrices ``maps[(x, y)][deg]`` on covers."""
        dims, mult, unit = {}, {}, {}
        for x in space.points:
            A = rings[x]
            if A.grading != space.lam[x]:
                raise RingError(f"ring at {x} is graded by {A.grading}, point has {space.lam[x]}")
            dims[x] = dict(A.dims)
            mult[x] = {}
            for (a, b), T in A.mult.items():
                n = T.shape[0]
                mult[x][(a, b)] = np.asarray(T).reshape(n, -1) if n else K.zeros(0, T.shape[1] * T.shape[2])
            unit[x] = A.unit
        R = GradedSheaf(space, K, dims, maps or {}, name=name or "R")
        return cls(space, K, R, mult, unit, name=name, check=check)

    @classmethod
    def constant(cls, space, K, name="k"):
        R = constant_sheaf(space, K, name=name)
        z = {x: space.lam[x].zero for x in space.points}
        mult = {x: {(z[x], z[x]): [[1]]} for x in space.points}
        unit = {x: [1] for x in space.points}
        return cls(space, K, R, mult, unit, name=name)

    # -- queries -----------------------------------------------------------
    def dim(self, x, a):
        return self.R.dim(x, a)

    def mult_matrix(self, x, a, b):
        G = self.space.lam[x]
        a, b = G.nf(a), G.nf(b)
        M = self.mult[x].get((a, b))
        if M is None:
            return self.K.zeros(self.dim(x, G.add(a, b)), self.dim(x, a) * self.dim(x, b))
        return M

    def left_mult(self, x, a, r, b):
        """Matrix of ``s -> r s`` from ``R_x[b]`` to ``R_x[a+b]``."""
        K = self.K
        return K.matmul(self.mult_matrix(x, a, b), K.kron(K.mat(r, (-1, 1)), K.eye(self.dim(x, b))))

    def validate(self):
        K, S, R = self.K, self.space, self.R
        diags = []
        for x in S.points:
            G = S.lam[x]
            z = G.zero
            degs = list(R.dims[x])
            if degs and not R.dim(x, z):
                diags.append(f"ring at {x} has no degree-0 part")
                continue
            for b in degs:
                nb = R.dim(x, b)
                if not K.equal(K.matmul(self.mult_matrix(x, z, b), K.kron(self.unit[x], K.eye(nb))), K.eye(nb)):
                    diags.append(f"unit law fails at {x} in degree {b}")
            for a in degs:
                na = R.dim(x, a)
                for b in degs:
                    nb = R.dim(x, b)
                    lhs = self.mult_matrix(x, a, b)
                    rhs = K.matmul(self.mult_matrix(x, b, a), swap_matrix(K, na, nb))
                    if not K.equal(lhs, rhs):
                        diags.append(f"not commutative at {x} in degrees {a}, {b}")
                    for c in degs:
                        nc = R.dim(x, c)
                        left = K.matmul(self.mult_matrix(x, G.add(a, b), c), K.kron(self.mult_matrix(x, a, b), K.eye(nc)))
                        right = K.matmul(self.mult_matrix(x, a, G.add(b, c)), K.kron(K.eye(na), self.mult_matrix(x, b, c)))
                        if not K.equal(left, right):
                            diags.append(f"not associative at {x} in degrees {a}, {b}, {c}")
        for (x, y) in S.poset.covers:
            rho = S.lres[(x, y)]
            G = S.lam[x]
            if R.dim(x, G.zero) and not K.equal(K.matmul(R.res(x, y, G.zero), self.unit[x]), self.unit[y]):
                diags.append(f"restriction {x}->{y} does not preserve the unit")
            for a in R.dims[x]:
                for b in R.dims[x]:
                    left = K.matmul(R.res(x, y, G.add(a, b)), self.mult_matrix(x, a, b))
                    right = K.matmul(self.mult_matrix(y, rho(a), rho(b)), K.kron(R.res(x, y, a), R.res(x, y, b)))
                    if not K.equal(left, right):
                        diags.append(f"restriction {x}->{y} is not multiplicative in degrees {a}, {b}")
        return diags

    def __repr__(self):
        return f"RingedGradedSpace({self.space.name}, {self.name} {self.R.table()})"


def inverse_image_ring(f: GradedSpaceMap, Y: RingedGradedSpace) -> RingedGradedSpace:
    """``f_gr^-1 R_Y`` with its induced multiplication."""
    K = Y.K
    X = f.src
    inv = inverse_image_gr(f, Y.R)
    layout = inv.meta["inv"][2]
    mult, unit = {}, {}
    for x in X.points:
        G = X.lam[x]
        y = f(x)
        mult[x] = {}
        for l1, n1 in inv.dims[x].items():
            for l2, n2 in inv.dims[x].items():
                l3 = G.add(l1, l2)
                rows = inv.dim(x, l3)
                M = K.zeros(rows, n1 * n2)
                for m1, o1 in layout[(x, l1)].items():
                    for m2, o2 in layout[(x, l2)].items():
                        blk = Y.mult_matrix(y, m1, m2)
                        if blk.shape[0] == 0:
                            continue
                        m3 = Y.space.lam[y].add(m1, m2)
                        r0 = layout[(x, l3)][m3]
                        M = K.add(M, _embed_kron(K, blk, Y.dim(y, m1), o1, n1, Y.dim(y, m2), o2, n2, rows, r0))
                mult[x][(l1, l2)] = M
        z = G.zero
        u = K.zeros(inv.dim(x, z), 1)
        zy = Y.space.lam[y].zero
        if Y.dim(y, zy):
            o = layout[(x, z)][zy]
            u[o : o + Y.dim(y, zy)] = Y.unit[y]
        unit[x] = u
    return RingedGradedSpace(X, K, inv, mult, unit, name=f"f^-1 {Y.name}")


class RingedMap:
    """``(f, f_flat, f_sharp)`` with ``sharp[x][lam]: (f^-1 R_Y)_x[lam] -> R_X,x[lam]``."""

    def __init__(self, f: GradedSpaceMap, src: RingedGradedSpace, dst: RingedGradedSpace, sharp=None,
                 name=None, check=True):
        if f.src != src.space or f.dst != dst.space:
            raise RingError("ringed map does not match its spaces")
        self.f = f
        self.src = src
        self.dst = dst
        self.name = name or f.name
        self.inv_ring = inverse_image_ring(f, dst)
        K = src.K
        comps = {}
        for x in src.space.points:
            comps[x] = {}
            for lam, n in self.inv_ring.R.dims[x].items():
                given = (sharp or {}).get(x, {}).get(lam)
                comps[x][lam] = K.mat(given) if given is not None and np.size(given) else K.zeros(src.dim(x, lam), n)
        self.sharp = SheafMap(self.inv_ring.R, src.R, comps, check=False)
        if check:
            diags = self.validate()
            if diags:
                raise RingError("; ".join(diags))

    @classmethod
    def constant(cls, f: GradedSpaceMap, K):
        """Map of constant rings, ``f_sharp`` the identity of ``k``."""
        X = RingedGradedSpace.constant(f.src, K)
        Y = RingedGradedSpace.constant(f.dst, K)
        sharp = {x: {f.src.lam[x].zero: [[1]]} for x in f.src.points}
        return cls(f, X, Y, sharp)

    @classmethod
    def identity(cls, X: RingedGradedSpace):
        f = identity_map(X.space)
        S = inverse_image_ring(f, X)
        sharp = {x: {lam: X.K.eye(n) for lam, n in S.R.dims[x].items()} for x in X.space.points}
        return cls(f, X, X, sharp)

    def __call__(self, x):
        return self.f(x)

    def validate(self):
        K = self.src.K
        diags = [f"f_sharp: {s}" for s in self.sharp.naturality_failures()]
        S, X = self.inv_ring, self.src
        for x in X.space.points:
            G = X.space.lam[x]
            z = G.zero
            if S.dim(x, z) and not K.equal(K.matmul(self.sharp.at(x, z), S.unit[x]), X.unit[x]):
                diags.append(f"f_sharp does not preserve the unit at {x}")
            for a in S.R.dims[x]:
                for b in S.R.dims[x]:
                    left = K.matmul(self.sharp.at(x, G.add(a, b)), S.mult_matrix(x, a, b))
                    right = K.matmul(X.mult_matrix(x, a, b), K.kron(self.sharp.at(x, a), self.sharp.at(x, b)))
                    if not K.equal(left, right):
                        diags.append(f"f_sharp is not multiplicative at {x} in degrees {a}, {b}")
        return diags

    def is_strict(self):
        return self.f.is_strict() and self.sharp.is_iso()


# -- modules ------------------------------------------------------------------
class RModuleSheaf:
    """A graded sheaf ``F`` with an action ``act[x][(a, b)]`` of the ring."""

    def __init__(self, ring: RingedGradedSpace, F: GradedSheaf, act=None, name=None, check=True):
        if F.space != ring.space or F.K != ring.K:
            raise ActionMismatch("module and ring live on different spaces")
        self.ring = ring
        self.F = F
        self.K = F.K
        self.name = name or F.name
        self.meta = {}
        S = F.space
        self.act = {}
        for x in S.points:
            G = S.lam[x]
            self.act[x] = {}
            for (a, b), M in ((act or {}).get(x) or {}).items():
                self.act[x][(G.nf(a), G.nf(b))] = F.K.mat(M) if np.size(M) else None
        if check:
            diags = self.validate()
            if diags:
                raise ActionMismatch("; ".join(diags))

    @property
    def space(self):
        return self.F.space

    def act_matrix(self, x, a, b):
        G = self.space.lam[x]
        a, b = G.nf(a), G.nf(b)
        M = self.act[x].get((a, b))
        shape = (self.F.dim(x, G.add(a, b)), self.ring.dim(x, a) * self.F.dim(x, b))
        if M is None or M.shape != shape:
            if M is not None and M.size:
                raise ActionMismatch(f"action {a}.{b} at {x}: shape {M.shape}, want {shape}")
            return self.K.zeros(*shape)
        return M

    def mul(self, x, a, r, b):
        """Matrix of ``m -> r m`` from ``F_x[b]`` to ``F_x[a+b]``."""
        K = self.K
        return K.matmul(self.act_matrix(x, a, b), K.kron(K.mat(r, (-1, 1)), K.eye(self.F.dim(x, b))))

    def validate(self):
        K, S, R, F = self.K, self.space, self.ring, self.F
        diags = []
        for x in S.points:
            G = S.lam[x]
            z = G.zero
            rd, fd = list(R.R.dims[x]), list(F.dims[x])
            for b in fd:
                nb = F.dim(x, b)
                u = R.unit[x] if R.dim(x, z) else K.zeros(0, 1)
                if not K.equal(K.matmul(self.act_matrix(x, z, b), K.kron(u, K.eye(nb))), K.eye(nb)):
                    diags.append(f"unit acts nontrivially at {x} in degree {b}")
            for a in rd:
                na = R.dim(x, a)
                for c in rd:
                    for b in fd:
                        nb = F.dim(x, b)
                        left = K.matmul(self.act_matrix(x, a, G.add(c, b)), K.kron(K.eye(na), self.act_matrix(x, c, b)))
                        right = K.matmul(self.act_matrix(x, G.add(a, c), b), K.kron(R.mult_matrix(x, a, c), K.eye(nb)))
                        if not K.equal(left, right):
                            diags.append(f"action not associative at {x} in degrees {a}, {c}, {b}")
        for (x, y) in S.poset.covers:
            rho = S.lres[(x, y)]
            G = S.lam[x]
            for a in R.R.dims[x]:
                for b in F.dims[x]:
                    left = K.matmul(F.res(x, y, G.add(a, b)), self.act_matrix(x, a, b))
                    right = K.matmul(self.act_matrix(y, rho(a), rho(b)), K.kron(R.R.res(x, y, a), F.res(x, y, b)))
                    if not K.equal(left, right):
                        diags.append(f"restriction {x}->{y} does not commute with the action in degrees {a}, {b}")
        return diags

    def as_sheaf_map(self) -> SheafMap:
        """The action as a map ``R (x) F -> F``."""
        T = tensor_sheaf(self.ring.R, self.F)
        layout = T.meta["tensor"][2]
        K = self.K
        comps = {}
        for x in T.points:
            comps[x] = {}
            for d, n in T.dims[x].items():
                A = K.zeros(self.F.dim(x, d), n)
                for (a, b), o in layout[(x, d)].items():
                    M = self.act_matrix(x, a, b)
                    A[:, o : o + M.shape[1]] = M
                comps[x][d] = A
        return SheafMap(T, self.F, comps, check=False)

    def table(self):
        return self.F.table()

    def __repr__(self):
        return f"RModuleSheaf({self.name} over {self.ring.name}: {self.F.table()})"


def free_module(ring: RingedGradedSpace) -> RModuleSheaf:
    return RModuleSheaf(ring, ring.R, ring.mult, name=ring.name, check=False)


def constant_ring_module(F: GradedSheaf, ring: RingedGradedSpace = None) -> RModuleSheaf:
    """A sheaf as a module over the constant ring ``k`` (``ring`` if given)."""
    ring = ring or RingedGradedSpace.constant(F.space, F.K)
    act = {}
    for x in F.points:
        z = F.space.lam[x].zero
        act[x] = {(z, b): F.K.eye(n) for b, n in F.dims[x].items()}
    return RModuleSheaf(ring, F, act, name=F.name)


def is_r_linear(phi: SheafMap, M: RModuleSheaf, N: RModuleSheaf) -> bool:
    K = phi.K
    S = M.space
    for x in S.points:
        G = S.lam[x]
        for a in M.ring.R.dims[x]:
            na = M.ring.dim(x, a)
            for b in M.F.dims[x]:
                left = K.matmul(phi.at(x, G.add(a, b)), M.act_matrix(x, a, b))
                right = K.matmul(N.act_matrix(x, a, b), K.kron(K.eye(na), phi.at(x, b)))
                if not K.equal(left, right):
                    return False
    return True


def extend_by_zero_module(M: RModuleSheaf, Y) -> RModuleSheaf:
    """``M_Y`` with the action of ``M`` on ``Y`` and zero elsewhere."""
    Y = frozenset(Y)
    act = {x: {k: A for k, A in M.act[x].items() if A is not None} for x in Y}
    return RModuleSheaf(M.ring, extend_by_zero(M.F, Y), act, name=f"{M.name}_Y")


@dataclass
class ModuleSequence:
    A: RModuleSheaf
    B: RModuleSheaf
    C: RModuleSheaf
    i: SheafMap
    p: SheafMap

    @property
    def exact(self):
        return is_short_exact(self.i, self.p)

    @property
    def linear(self):
        return is_r_linear(self.i, self.A, self.B) and is_r_linear(self.p, self.B, self.C)


def module_exact_sequence(M: RModuleSheaf, U) -> ModuleSequence:
    """``0 -> M_U -> M -> M_Z -> 0`` as R-modules, ``Z`` the complement of the open ``U``."""
    seq = basic_exact_sequence(M.F, U)
    Z = frozenset(M.space.points) - frozenset(U)
    A, C = extend_by_zero_module(M, U), extend_by_zero_module(M, Z)
    i = SheafMap(A.F, M.F, seq.i.comps, check=False)
    p = SheafMap(M.F, C.F, seq.p.comps, check=False)
    return ModuleSequence(A, M, C, i, p)


def _induced_action(ring, A: GradedSheaf, full, reps, Q: GradedSheaf):
    """Action on a subquotient ``Q`` of ``A`` from ``full(x, a, e)``, a matrix
    ``R_x[a] (x) A_x[e] -> A_x[a+e]``."""
    K = A.K
    S = A.space
    act = {}
    for x in S.points:
        G = S.lam[x]
        act[x] = {}
        for a, na in ring.R.dims[x].items():
            for e, ne in Q.dims[x].items():
                t = G.add(a, e)
                if not Q.dim(x, t):
                    continue
                Bb, C = reps[(x, t)]
                # images lie in span(Bb, C) even when that is not all of A_x
                V = K.matmul(full(x, a, e), K.kron(K.eye(na), reps[(x, e)][1]))
                act[x][(a, e)] = K.solve(np.hstack([Bb, C]), V)[Bb.shape[1]:]
    return act


def submodule_quotient(M: RModuleSheaf, Z=None, B=None, name=None) -> RModuleSheaf:
    """``Z/B`` for submodules ``B <= Z <= M`` given by column bases."""
    Q, reps = subquotient(M.F, Z, B, name=name)
    act = _induced_action(M.ring, M.F, M.act_matrix, reps, Q)
    out = RModuleSheaf(M.ring, Q, act, name=name)
    out.meta["reps"] = reps
    return out


def cokernel_module(phi: SheafMap, M: RModuleSheaf, N: RModuleSheaf, name=None) -> RModuleSheaf:
    if not is_r_linear(phi, M, N):
        raise ActionMismatch("map is not R-linear")
    K = phi.K
    B = {(x, d): K.colspace(phi.at(x, d)) for x in N.space.points for d in N.F.dims[x]}
    return submodule_quotient(N, None, B, name=name)


def kernel_module(phi: SheafMap, M: RModuleSheaf, N: RModuleSheaf, name=None) -> RModuleSheaf:
    if not is_r_linear(phi, M, N):
        raise ActionMismatch("map is not R-linear")
    K = phi.K
    Z = {(x, d): K.nullspace(phi.at(x, d)) for x in M.space.points for d in M.F.dims[x]}
    return submodule_quotient(M, Z, None, name=name)


def multiplication_map(M: RModuleSheaf, r_sections, degree_shift):
    """``m -> r m`` as a map ``M<-lam> -> M`` for a global section ``r`` of degree
    ``lam``, given pointwise as ``r_sections[x]`` (a column in ``R_x[lam_x]``)
    together with ``degree_shift[x] = lam_x``."""
    from .sheaves.functors import shift_family

    S = M.space
    fam = {x: S.lam[x].neg(degree_shift[x]) for x in S.points}
    src = shift_family(M.F, fam, name=f"{M.name}<-lam>")
    comps = {}
    for x in S.points:
        comps[x] = {}
        for mu, n in src.dims[x].items():
            b = S.lam[x].sub(mu, degree_shift[x])
            comps[x][mu] = M.mul(x, degree_shift[x], r_sections[x], b)
    phi = SheafMap(src, M.F, comps, check=False)
    act = {}
    for x in S.points:
        G = S.lam[x]
        act[x] = {(a, G.add(b, degree_shift[x])): A for (a, b), A in M.act[x].items() if A is not None}
    src_mod = RModuleSheaf(M.ring, src, act, name=src.name, check=False)
    return phi, src_mod


# -- tensor over R ------------------------------------------------------------
def tensor_over_R(M: RModuleSheaf, N: RModuleSheaf, outer: RModuleSheaf = None, name=None) -> RModuleSheaf:
    """``M (x)_R N``: the stalkwise coequalizer of the two actions.

    The result is an ``R``-module through the first factor; if ``outer`` is
    given (a module with the same underlying sheaf as ``N`` over another
    ring), the result is a module over ``outer.ring`` acting on ``N``.
    """
    if M.ring is not N.ring:
        raise ActionMismatch("modules over different rings")
    if outer is not None and outer.F is not N.F:
        raise ActionMismatch("outer action must be on the second factor's sheaf")
    K = M.K
    S = M.space
    R = M.ring
    T = tensor_sheaf(M.F, N.F)
    layout = T.meta["tensor"][2]
    B = {}
    for x in S.points:
        G = S.lam[x]
        cols = {}
        for a, na in R.R.dims[x].items():
            for b, nb in M.F.dims[x].items():
                for c, nc in N.F.dims[x].items():
                    d = G.add(G.add(a, b), c)
                    if not T.dim(x, d):
                        continue
                    rows = T.dim(x, d)
                    V = K.zeros(rows, na * nb * nc)
                    first = K.kron(M.act_matrix(x, a, b), K.eye(nc))
                    if first.shape[0]:
                        o = layout[(x, d)][(G.add(a, b), c)]
                        V[o : o + first.shape[0]] = first
                    second = K.matmul(K.kron(K.eye(nb), N.act_matrix(x, a, c)), K.kron(swap_matrix(K, na, nb), K.eye(nc)))
                    if second.shape[0]:
                        o = layout[(x, d)][(b, G.add(a, c))]
                        V[o : o + second.shape[0]] = K.sub(V[o : o + second.shape[0]], second)
                    cols.setdefault(d, []).append(V)
        for d, n in T.dims[x].items():
            V = np.hstack(cols[d]) if d in cols else K.zeros(n, 0)
            B[(x, d)] = K.colspace(V) if V.shape[1] else V
    Q, reps = subquotient(T, None, B, name=name or f"({M.name}*_R {N.name})")

    if outer is None:
        ring = R

        def full(x, a, e):
            G = S.lam[x]
            na = R.dim(x, a)
            t = G.add(a, e)
            out = K.zeros(T.dim(x, t), na * T.dim(x, e))
            ne = T.dim(x, e)
            for (b, c), o in layout[(x, e)].items():
                nb, nc = M.F.dim(x, b), N.F.dim(x, c)
                blk = K.kron(M.act_matrix(x, a, b), K.eye(nc))
                if not blk.shape[0]:
                    continue
                o2 = layout[(x, t)][(G.add(a, b), c)]
                out = K.add(out, _embed_kron(K, blk, na, 0, na, nb * nc, o, ne, T.dim(x, t), o2))
            return out
    else:
        ring = outer.ring

        def full(x, a, e):
            G = S.lam[x]
            na = ring.dim(x, a)
            t = G.add(a, e)
            ne = T.dim(x, e)
            out = K.zeros(T.dim(x, t), na * ne)
            for (b, c), o in layout[(x, e)].items():
                nb, nc = M.F.dim(x, b), N.F.dim(x, c)
                blk = K.matmul(K.kron(K.eye(nb), outer.act_matrix(x, a, c)), K.kron(swap_matrix(K, na, nb), K.eye(nc)))
                if not blk.shape[0]:
                    continue
                o2 = layout[(x, t)][(b, G.add(a, c))]
                out = K.add(out, _embed_kron(K, blk, na, 0, na, nb * nc, o, ne, T.dim(x, t), o2))
            return out

    act = _induced_action(ring, T, full, reps, Q)
    res = RModuleSheaf(ring, Q, act, name=Q.name)
    res.meta["tensor"] = (M, N, T, reps)
    return res


def tensor_over_R_map(phi: SheafMap, psi: SheafMap, src: RModuleSheaf, dst: RModuleSheaf) -> SheafMap:
    """``phi (x) psi`` between two results of :func:`tensor_over_R`."""
    K = phi.K
    _, _, Ts, reps_s = src.meta["tensor"]
    _, _, Td, reps_d = dst.meta["tensor"]
    full = tensor_maps(phi, psi, Ts, Td)
    comps = {}
    for x in src.F.points:
        comps[x] = {}
        for d, n in src.F.dims[x].items():
            if not dst.F.dim(x, d):
                comps[x][d] = K.zeros(0, n)
                continue
            Bb, C = reps_d[(x, d)]
            pr = _proj_from_reps(K, Bb, C, Td.dim(x, d))
            comps[x][d] = K.matmul(K.matmul(pr, full.at(x, d)), reps_s[(x, d)][1])
    return SheafMap(src.F, dst.F, comps, check=False)


def _tensor_class(res: RModuleSheaf, x, d, v):
    """Class in ``res`` of a vector ``v`` of the ambient tensor product."""
    K = res.K
    _, _, T, reps = res.meta["tensor"]
    if not res.F.dim(x, d):
        return K.zeros(0, v.shape[1])
    Bb, C = reps[(x, d)]
    return K.matmul(_proj_from_reps(K, Bb, C, T.dim(x, d)), v)


# -- Hom over R ---------------------------------------------------------------
def _linearity_residual(M, N, comps, shift, U):
    K = M.K
    S = M.space
    parts = []
    for y in U:
        G = S.lam[y]
        s = shift[y]
        for a, na in M.ring.R.dims[y].items():
            for b, nb in M.F.dims[y].items():
                ab = G.add(a, b)
                rows = N.F.dim(y, G.add(ab, s))
                if not rows:
                    continue
                p_ab = comps.get(y, {}).get(ab)
                p_b = comps.get(y, {}).get(b)
                p_ab = K.zeros(rows, M.F.dim(y, ab)) if p_ab is None else K.mat(p_ab)
                p_b = K.zeros(N.F.dim(y, G.add(b, s)), nb) if p_b is None else K.mat(p_b)
                left = K.matmul(p_ab, M.act_matrix(y, a, b))
                right = K.matmul(N.act_matrix(y, a, G.add(b, s)), K.kron(K.eye(na), p_b))
                parts.append(K.sub(left, right).reshape(-1, 1))
    return np.vstack(parts) if parts else K.zeros(0, 1)


def r_linear_basis(H: HomSpace, M: RModuleSheaf, N: RModuleSheaf):
    """Coordinates (in ``H.basis``) of a basis of the R-linear transformations."""
    K = M.K
    if H.dim == 0:
        return K.zeros(0, 0)
    cols = [_linearity_residual(M, N, H.element(i), H.shift, H.U) for i in range(H.dim)]
    Rm = np.hstack(cols)
    if Rm.shape[0] == 0:
        return K.eye(H.dim)
    return K.nullspace(Rm)


def r_linear_homs(M: RModuleSheaf, N: RModuleSheaf):
    """``(H, coords)``: degree-0 R-linear maps ``M -> N`` as combinations of ``H``'s basis."""
    H = HomSpace(M.F, N.F)
    return H, r_linear_basis(H, M, N)


def r_linear_maps(M, N):
    H, C = r_linear_homs(M, N)
    K = M.K
    return [H.to_map(H.components(K.matmul(H.basis, C[:, [i]])[:, 0])) for i in range(C.shape[1])]


def hom_over_R(M: RModuleSheaf, N: RModuleSheaf, window=None) -> RModuleSheaf:
    """Internal ``Hom_R``: the R-linear part of :func:`sheaf_hom`."""
    if M.ring is not N.ring:
        raise ActionMismatch("modules over different rings")
    K = M.K
    S = M.space
    R = M.ring
    H = sheaf_hom(M.F, N.F, window)
    spaces = H.meta["hom"][2]
    Z = {}
    for x in S.points:
        for lam in H.dims[x]:
            Z[(x, lam)] = r_linear_basis(spaces[(x, lam)], M, N)
    Q, reps = subquotient(H, Z, None, name=f"Hom_R({M.name},{N.name})")

    def full(x, a, e):
        G = S.lam[x]
        na = R.dim(x, a)
        t = G.add(a, e)
        Hs = spaces[(x, e)]
        Ht = spaces.get((x, t))
        out = K.zeros(H.dim(x, t), na * Hs.dim)
        if Ht is None:
            return out
        for i in range(na):
            r = K.zeros(na, 1)
            r[i, 0] = 1
            for j in range(Hs.dim):
                phi = Hs.element(j)
                new = {}
                for y in Ht.U:
                    Gy = S.lam[y]
                    ay = S.rho(x, y)(a)
                    ry = K.matmul(R.R.res(x, y, a), r)
                    new[y] = {}
                    for mu, p in phi.get(y, {}).items():
                        nu = Gy.add(mu, Hs.shift[y])
                        new[y][mu] = K.matmul(N.mul(y, ay, ry, nu), K.mat(p))
                out[:, i * Hs.dim + j] = Ht.coords(new)[:, 0]
        return out

    act = _induced_action(R, H, full, reps, Q)
    res = RModuleSheaf(R, Q, act, name=Q.name)
    res.meta["hom"] = (M, N, H, reps)
    return res


# -- change of rings and spaces ---------------------------------------------
def restrict_scalars(M: RModuleSheaf, phi: SheafMap, ring: RingedGradedSpace) -> RModuleSheaf:
    """``M`` as a module over ``ring`` through the ring map ``phi: ring.R -> M.ring.R``."""
    K = M.K
    S = M.space
    act = {}
    for x in S.points:
        act[x] = {}
        for a, na in ring.R.dims[x].items():
            for b, nb in M.F.dims[x].items():
                act[x][(a, b)] = K.matmul(M.act_matrix(x, a, b), K.kron(phi.at(x, a), K.eye(nb)))
    return RModuleSheaf(ring, M.F, act, name=M.name)


def inverse_image_module(f: GradedSpaceMap, G: RModuleSheaf, ring: RingedGradedSpace = None) -> RModuleSheaf:
    """``f_gr^-1 G`` as a module over ``f_gr^-1 R_Y``."""
    K = G.K
    ring = ring or inverse_image_ring(f, G.ring)
    inv = inverse_image_gr(f, G.F)
    lay_r = ring.R.meta["inv"][2]
    lay_m = inv.meta["inv"][2]
    Y = G.space
    act = {}
    for x in f.src.points:
        Gx = f.src.lam[x]
        y = f(x)
        act[x] = {}
        for l1, n1 in ring.R.dims[x].items():
            for l2, n2 in inv.dims[x].items():
                l3 = Gx.add(l1, l2)
                rows = inv.dim(x, l3)
                A = K.zeros(rows, n1 * n2)
                if rows:
                    for m1, o1 in lay_r[(x, l1)].items():
                        for m2, o2 in lay_m[(x, l2)].items():
                            blk = G.act_matrix(y, m1, m2)
                            if not blk.shape[0]:
                                continue
                            r0 = lay_m[(x, l3)][Y.lam[y].add(m1, m2)]
                            A = K.add(A, _embed_kron(K, blk, G.ring.dim(y, m1), o1, n1, G.F.dim(y, m2), o2, n2, rows, r0))
                act[x][(l1, l2)] = A
    return RModuleSheaf(ring, inv, act, name=f"f^-1 {G.name}")


def module_pullback(fr: RingedMap, G: RModuleSheaf) -> RModuleSheaf:
    """``f*_gr G = f_gr^-1 G (x)_{f_gr^-1 R_Y} R_X``."""
    A = inverse_image_module(fr.f, G, fr.inv_ring)
    RX = free_module(fr.src)
    B = restrict_scalars(RX, fr.sharp, fr.inv_ring)
    out = tensor_over_R(A, B, outer=RX, name=f"f* {G.name}")
    out.meta["pullback"] = (fr, G, A)
    return out


def module_pullback_map(fr: RingedMap, phi: SheafMap, src: RModuleSheaf, dst: RModuleSheaf) -> SheafMap:
    """``f*(phi)`` between two results of :func:`module_pullback`."""
    As, Ad = src.meta["pullback"][2], dst.meta["pullback"][2]
    inv_phi = inverse_image_map(fr.f, phi, As.F, Ad.F)
    return tensor_over_R_map(inv_phi, identity(fr.src.R), src, dst)


def pushforward_module(fr: RingedMap, M: RModuleSheaf, shriek=False) -> RModuleSheaf:
    """``f_gr,*`` (or ``f_gr,!``) of an ``R_X``-module as an ``R_Y``-module.

    A product ``t m`` with ``t`` of degree ``lam`` and ``m`` of degree ``mu``
    is placed in degree ``mu + lam``.
    """
    f = fr.f
    K = M.K
    D = (shriek_pushforward_gr if shriek else pushforward_gr)(f, M.F)
    data = D.meta["direct"][2]
    RY = fr.dst
    act = {}
    for y in f.dst.points:
        Gy = f.dst.lam[y]
        act[y] = {}
        for lam, nl in RY.R.dims[y].items():
            for mu, nm in D.dims[y].items():
                t = Gy.add(lam, mu)
                rows = D.dim(y, t)
                A = K.zeros(rows, nl * nm)
                if rows:
                    W, fam, N, order, offs = data[(y, mu)]
                    W2, fam2, N2, order2, offs2 = data[(y, t)]
                    for i in range(nl):
                        r = K.zeros(nl, 1)
                        r[i, 0] = 1
                        prod = product_section(fr, M, y, lam, r, fam, N, order, offs, fam2, order2)
                        try:
                            A[:, i * nm : (i + 1) * nm] = K.solve(N2, prod)
                        except NotSolvable as e:
                            raise SheafError(f"product leaves the sections at {y} in degree {t}") from e
                act[y][(lam, mu)] = A
    out = RModuleSheaf(RY, D, act, name=D.name)
    out.meta["push"] = (fr, M, shriek)
    return out


def product_section(fr: RingedMap, M: RModuleSheaf, y, lam, r, fam, N, order, offs, fam2, order2):
    """``r * s`` for sections ``s`` (columns of ``N`` over ``order`` in degree
    family ``fam``), written over ``order2`` in the family ``fam2``."""
    f = fr.f
    K = M.K
    RY = fr.dst
    lay = fr.inv_ring.R.meta["inv"][2]
    rows = []
    for x in order2:
        lx = f.flat_at(x, y)(lam)
        ry_deg = f.dst.rho(y, f(x))(lam)
        ry = K.matmul(RY.R.res(y, f(x), lam), r)
        v = K.zeros(fr.inv_ring.dim(x, lx), 1)
        if ry.shape[0]:
            o = lay[(x, lx)][ry_deg]
            v[o : o + ry.shape[0]] = ry
        rx = K.matmul(fr.sharp.at(x, lx), v)
        n_src = M.F.dim(x, fam[x]) if x in offs else 0
        block = N[offs[x] : offs[x] + n_src] if n_src else K.zeros(0, N.shape[1])
        if M.F.space.lam[x].add(fam[x], lx) != M.F.space.lam[x].nf(fam2[x]):
            raise SheafError(f"degree family mismatch at {x}")
        out = K.matmul(M.mul(x, lx, rx, fam[x]), block) if n_src else K.zeros(M.F.dim(x, fam2[x]), N.shape[1])
        rows.append(out)
    return np.vstack(rows) if rows else K.zeros(0, N.shape[1])


# -- checks -------------------------------------------------------------------
@dataclass
class BookkeepingReport:
    ok: bool
    checked: int
    ambiguous: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def action_degree_bookkeeping_check(fr: RingedMap, M: RModuleSheaf, window=None) -> BookkeepingReport:
    """Verify that ``R_Y`` acts on ``f_gr,* M`` with products in degree ``mu + lam``.

    For every homogeneous basis element ``t`` of degree ``lam`` and section
    ``m`` of degree ``mu``, the product section is recomputed from ``M`` and
    must lie in the sections of degree ``mu + lam``.  ``ambiguous`` lists the
    triples where some other degree ``mu'`` has the same degree family, so
    the placement is a genuine choice.
    """
    f = fr.f
    K = M.K
    D = pushforward_gr(f, M.F, window)
    data = D.meta["direct"][2]
    RY = fr.dst
    checked = 0
    ambiguous, violations = [], []
    for y in f.dst.points:
        Gy = f.dst.lam[y]
        for lam, nl in RY.R.dims[y].items():
            for mu, nm in D.dims[y].items():
                t = Gy.add(lam, mu)
                W, fam, N, order, offs = data[(y, mu)]
                fam_t = {x: f.flat_at(x, y)(t) for x in W}
                others = [
                    mu2 for mu2 in D.dims[y]
                    if mu2 != t and all(f.flat_at(x, y)(mu2) == fam_t[x] for x in W)
                ]
                for i in range(nl):
                    r = K.zeros(nl, 1)
                    r[i, 0] = 1
                    prod = product_section(fr, M, y, lam, r, fam, N, order, offs, fam_t, order)
                    checked += 1
                    if K.is_zero(prod):
                        continue
                    if others:
                        ambiguous.append((y, lam, mu, t, others))
                    tgt = data.get((y, t))
                    if tgt is None or not K.in_span(tgt[2], prod):
                        violations.append((y, lam, mu, t))
    return BookkeepingReport(not violations, checked, ambiguous, violations)


@dataclass
class ModuleAdjunctionReport:
    unit: SheafMap
    counit: SheafMap
    unit_natural: bool
    counit_natural: bool
    unit_linear: bool
    counit_linear: bool
    triangle_left: bool
    triangle_right: bool
    hom_dims: tuple
    bijective: bool
    cardinalities: tuple = None
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return (
            self.unit_natural and self.counit_natural and self.unit_linear and self.counit_linear
            and self.triangle_left and self.triangle_right and self.bijective
            and self.hom_dims[0] == self.hom_dims[1]
        )


def module_unit(fr: RingedMap, G: RModuleSheaf, fG: RModuleSheaf = None, pfG: RModuleSheaf = None) -> SheafMap:
    """``G -> f_* f* G``."""
    K = G.K
    fG = fG or module_pullback(fr, G)
    pfG = pfG or pushforward_module(fr, fG)
    A = fG.meta["pullback"][2]
    eta0 = adjunction_unit(fr.f, G.F, A.F, pushforward_gr(fr.f, A.F))
    _, _, T, _ = fG.meta["tensor"]
    layout = T.meta["tensor"][2]
    comps = {}
    for x in A.F.points:
        z = fr.src.space.lam[x].zero
        u = fr.src.unit[x]
        comps[x] = {}
        for lam, n in A.F.dims[x].items():
            v = K.zeros(T.dim(x, lam), n)
            if u.shape[0]:
                o = layout[(x, lam)][(lam, z)]
                v[o : o + n * u.shape[0]] = K.kron(K.eye(n), u)
            comps[x][lam] = _tensor_class(fG, x, lam, v)
    iota = SheafMap(A.F, fG.F, comps, check=False)
    return direct_image_map(iota, eta0.dst, pfG.F) @ eta0


def module_counit(fr: RingedMap, F: RModuleSheaf, pF: RModuleSheaf = None, fpF: RModuleSheaf = None) -> SheafMap:
    """``f* f_* F -> F``."""
    K = F.K
    pF = pF or pushforward_module(fr, F)
    fpF = fpF or module_pullback(fr, pF)
    A = fpF.meta["pullback"][2]
    eps0 = adjunction_counit(fr.f, F.F, pF.F, A.F)
    _, _, T, reps = fpF.meta["tensor"]
    layout = T.meta["tensor"][2]
    comps = {}
    for x in fpF.F.points:
        comps[x] = {}
        for d, n in fpF.F.dims[x].items():
            E = K.zeros(F.F.dim(x, d), T.dim(x, d))
            for (a, b), o in layout[(x, d)].items():
                na, nb = A.F.dim(x, a), fr.src.dim(x, b)
                blk = K.matmul(
                    K.matmul(F.act_matrix(x, b, a), K.kron(K.eye(nb), eps0.at(x, a))),
                    swap_matrix(K, na, nb),
                )
                E[:, o : o + na * nb] = blk
            comps[x][d] = K.matmul(E, reps[(x, d)][1])
    return SheafMap(fpF.F, F.F, comps, check=False)


def check_module_adjunction(fr: RingedMap, F: RModuleSheaf, G: RModuleSheaf) -> ModuleAdjunctionReport:
    """Certify ``Hom_{R_X}(f* G, F) = Hom_{R_Y}(G, f_* F)``."""
    K = F.K
    fG = module_pullback(fr, G)
    pfG = pushforward_module(fr, fG)
    eta = module_unit(fr, G, fG, pfG)
    pF = pushforward_module(fr, F)
    fpF = module_pullback(fr, pF)
    eps = module_counit(fr, F, pF, fpF)
    un, cn = eta.naturality_failures(), eps.naturality_failures()
    failures = [f"unit: {s}" for s in un] + [f"counit: {s}" for s in cn]
    ul, cl = is_r_linear(eta, G, pfG), is_r_linear(eps, fpF, F)
    if not ul:
        failures.append("unit is not R-linear")
    if not cl:
        failures.append("counit is not R-linear")
    # eps_{f* G} o f*(eta_G) = id
    fpfG = module_pullback(fr, pfG)
    eps_fG = module_counit(fr, fG, pfG, fpfG)
    left = (eps_fG @ module_pullback_map(fr, eta, fG, fpfG)).equals(identity(fG.F))
    # f_*(eps_F) o eta_{f_* F} = id
    ppF = pushforward_module(fr, fpF)
    eta_pF = module_unit(fr, pF, fpF, ppF)
    right = (direct_image_map(eps, ppF.F, pF.F) @ eta_pF).equals(identity(pF.F))
    if not left:
        failures.append("triangle identity for f*")
    if not right:
        failures.append("triangle identity for f_*")
    H1, C1 = r_linear_homs(fG, F)
    H2, C2 = r_linear_homs(G, pF)
    cols = []
    for i in range(C1.shape[1]):
        psi = H1.to_map(H1.components(K.matmul(H1.basis, C1[:, [i]])[:, 0]))
        phi = direct_image_map(psi, pfG.F, pF.F) @ eta
        cols.append(H2.coords(phi.comps))
    d1, d2 = C1.shape[1], C2.shape[1]
    if cols:
        Mx = np.hstack(cols)
        inside = K.rank(np.hstack([C2, Mx])) == d2 if d2 else K.is_zero(Mx)
        bij = d1 == d2 and K.rank(Mx) == d1 and inside
    else:
        bij = d2 == 0
    card = (K.count(d1), K.count(d2)) if K.is_finite else None
    return ModuleAdjunctionReport(eta, eps, not un, not cn, ul, cl, left, right, (d1, d2), bij, card, failures)
