"""Unit and counit of ``f^-1 -| f_*``, certified, and the base-change map."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..algebra.linalg import NotSolvable
from ..space import GradedSpaceMap
from .core import GradedSheaf, SheafError, SheafMap, identity
from .functors import (
    HomSpace,
    direct_image_map,
    inverse_image_gr,
    inverse_image_map,
    pushforward_gr,
    shriek_pushforward_gr,
)


def adjunction_unit(f: GradedSpaceMap, G: GradedSheaf, inv=None, push=None) -> SheafMap:
    """``G -> f_* f^-1 G``."""
    inv = inv or inverse_image_gr(f, G)
    push = push or pushforward_gr(f, inv)
    K, Y = G.K, f.dst
    layout = inv.meta["inv"][2]
    data = push.meta["direct"][2]
    comps = {}
    for y in Y.points:
        comps[y] = {}
        for mu, n in G.dims[y].items():
            d = data.get((y, mu))
            if d is None:
                comps[y][mu] = K.zeros(0, n)
                continue
            W, fam, N, order, offs = d
            rows = []
            for x in order:
                m = inv.dim(x, fam[x])
                blk = K.zeros(m, n)
                mu2 = Y.rho(y, f(x))(mu)
                r = G.res(y, f(x), mu)
                if r.shape[0]:
                    o = layout[(x, fam[x])][mu2]
                    blk[o : o + r.shape[0]] = r
                rows.append(blk)
            comps[y][mu] = K.solve(N, np.vstack(rows))
    return SheafMap(G, push, comps, check=False)


def adjunction_counit(f: GradedSpaceMap, F: GradedSheaf, push=None, inv=None) -> SheafMap:
    """``f^-1 f_* F -> F``."""
    push = push or pushforward_gr(f, F)
    inv = inv or inverse_image_gr(f, push)
    K = F.K
    layout = inv.meta["inv"][2]
    data = push.meta["direct"][2]
    comps = {}
    for x in inv.points:
        comps[x] = {}
        for lam, n in inv.dims[x].items():
            A = K.zeros(F.dim(x, lam), n)
            for mu, o in layout[(x, lam)].items():
                W, fam, N, order, offs = data[(f(x), mu)]
                blk = N[offs[x] : offs[x] + F.dim(x, fam[x])]
                A[:, o : o + blk.shape[1]] = blk
            comps[x][lam] = A
    return SheafMap(inv, F, comps, check=False)


@dataclass
class AdjunctionReport:
    unit: SheafMap
    counit: SheafMap
    unit_natural: bool
    counit_natural: bool
    triangle_left: bool
    triangle_right: bool
    hom_dims: tuple
    bijective: bool
    cardinalities: tuple = None
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return (
            self.unit_natural
            and self.counit_natural
            and self.triangle_left
            and self.triangle_right
            and self.bijective
            and self.hom_dims[0] == self.hom_dims[1]
        )


def check_sheaf_adjunction(f: GradedSpaceMap, F: GradedSheaf, G: GradedSheaf) -> AdjunctionReport:
    """Certify ``Hom(f^-1 G, F) = Hom(G, f_* F)`` through unit and counit."""
    K = F.K
    fG = inverse_image_gr(f, G)
    ffG = pushforward_gr(f, fG)
    eta_G = adjunction_unit(f, G, fG, ffG)
    pF = pushforward_gr(f, F)
    fpF = inverse_image_gr(f, pF)
    eps_F = adjunction_counit(f, F, pF, fpF)
    failures = []
    un = eta_G.naturality_failures()
    cn = eps_F.naturality_failures()
    failures += [f"unit: {s}" for s in un] + [f"counit: {s}" for s in cn]
    # eps_{f^-1 G} o f^-1(eta_G) = id
    pfG = ffG
    fpfG = inverse_image_gr(f, pfG)
    eps_fG = adjunction_counit(f, fG, pfG, fpfG)
    left = (eps_fG @ inverse_image_map(f, eta_G, fG, fpfG)).equals(identity(fG))
    # f_*(eps_F) o eta_{f_* F} = id
    fpF2 = fpF
    ppF = pushforward_gr(f, fpF2)
    eta_pF = adjunction_unit(f, pF, fpF2, ppF)
    right = (direct_image_map(eps_F, ppF, pF) @ eta_pF).equals(identity(pF))
    if not left:
        failures.append("triangle identity for f^-1")
    if not right:
        failures.append("triangle identity for f_*")
    H1 = HomSpace(fG, F)
    H2 = HomSpace(G, pF)
    cols = []
    for psi in H1.maps():
        phi = direct_image_map(psi, ffG, pF) @ eta_G
        cols.append(H2.coords(phi.comps))
    if cols:
        M = np.hstack(cols)
        bij = H1.dim == H2.dim and K.rank(M) == H1.dim
    else:
        bij = H2.dim == 0
    card = (H1.cardinality(), H2.cardinality()) if K.is_finite else None
    return AdjunctionReport(eta_G, eps_F, not un, not cn, left, right, (H1.dim, H2.dim), bij, card, failures)


@dataclass
class BaseChangeReport:
    lhs: GradedSheaf
    rhs: GradedSheaf
    map: SheafMap
    ok: bool
    failure: str = None


def base_change_map(f, g, square, F: GradedSheaf):
    """Canonical ``g^-1 f_! F -> ftilde_! gtilde^-1 F`` for a square built by
    :func:`fiber_product` (``f: Y1 -> X``, ``g: Y2 -> X``)."""
    Z, ft, gt = square
    K = F.K
    fF = shriek_pushforward_gr(f, F)
    lhs = inverse_image_gr(g, fF)
    gF = inverse_image_gr(gt, F)
    rhs = shriek_pushforward_gr(ft, gF)
    lay_l = lhs.meta["inv"][2]
    data_f = fF.meta["direct"][2]
    lay_g = gF.meta["inv"][2]
    data_r = rhs.meta["direct"][2]
    comps = {}
    for z in g.src.points:
        comps[z] = {}
        for lam, n in lhs.dims[z].items():
            tgt = data_r.get((z, lam))
            cols = []
            for mu, o in sorted(lay_l[(z, lam)].items(), key=lambda t: t[1]):
                W, fam, N, order, offs = data_f[(g(z), mu)]
                if tgt is None:
                    cols.append(K.zeros(0, N.shape[1]))
                    continue
                W2, fam2, N2, order2, offs2 = tgt
                rows = []
                for p in order2:
                    y1 = p[0]
                    m = gF.dim(p, fam2[p])
                    blk = K.zeros(m, N.shape[1])
                    nu = fam[y1]
                    k = F.dim(y1, nu)
                    if m and k:
                        if gt.flat[p](nu) != fam2[p]:
                            raise SheafError(f"degree bookkeeping broken at {p}")
                        o2 = lay_g[(p, fam2[p])][nu]
                        blk[o2 : o2 + k] = N[offs[y1] : offs[y1] + k]
                    rows.append(blk)
                v = np.vstack(rows) if rows else K.zeros(0, N.shape[1])
                try:
                    cols.append(K.solve(N2, v))
                except NotSolvable:
                    raise SheafError(f"base change map leaves the proper-support sections at {z}, degree {lam}")
            comps[z][lam] = np.hstack(cols) if cols else K.zeros(rhs.dim(z, lam), 0)
    return lhs, rhs, SheafMap(lhs, rhs, comps, check=False)


def base_change_check(f, g, square, F: GradedSheaf) -> BaseChangeReport:
    try:
        lhs, rhs, phi = base_change_map(f, g, square, F)
    except SheafError as e:
        return BaseChangeReport(None, None, None, False, str(e))
    bad = phi.naturality_failures()
    if bad:
        return BaseChangeReport(lhs, rhs, phi, False, "not natural: " + bad[0])
    for z in lhs.points:
        for lam in set(lhs.dims[z]) | set(rhs.dims[z]):
            A = phi.at(z, lam)
            if lhs.dim(z, lam) != rhs.dim(z, lam) or (A.size and phi.K.rank(A) != A.shape[0]):
                return BaseChangeReport(lhs, rhs, phi, False, f"not an isomorphism at {z}, degree {lam}")
    return BaseChangeReport(lhs, rhs, phi, True)

