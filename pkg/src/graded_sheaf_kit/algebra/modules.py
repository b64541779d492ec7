"""Finitely generated modules over Z, Z/n, F_p and Q."""
from __future__ import annotations

import re
from dataclasses import dataclass
from math import gcd

import numpy as np

from .groups import GradingGroup, GroupHom
from .linalg import Field, field
from .snf import int_zeros


class RingMismatch(ValueError):
    pass


def _is_prime(n):
    return n >= 2 and all(n % q for q in range(2, int(n**0.5) + 1))


@dataclass(frozen=True)
class BaseRing:
    """``kind`` is one of ``"Z"``, ``"Z/n"``, ``"F_p"``, ``"Q"``."""

    kind: str
    n: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Z/n", "F_p", "Q"):
            raise ValueError(f"unknown ring kind {self.kind}")
        if self.kind == "Z/n" and self.n < 2:
            raise ValueError("Z/n needs n >= 2")
        if self.kind == "F_p" and not _is_prime(self.n):
            raise ValueError(f"F_p needs a prime, got {self.n}")

    @classmethod
    def parse(cls, s: str) -> "BaseRing":
        s = s.strip()
        if s in ("Z", "ZZ"):
            return cls("Z")
        if s in ("Q", "QQ"):
            return cls("Q")
        m = re.fullmatch(r"(?:F|GF)\(?(\d+)\)?", s)
        if m:
            return cls("F_p", int(m.group(1)))
        m = re.fullmatch(r"Z/(\d+)", s)
        if m:
            return cls("Z/n", int(m.group(1)))
        raise ValueError(f"bad ring {s!r}")

    def __str__(self):
        return {"Z": "Z", "Q": "Q", "F_p": f"F{self.n}", "Z/n": f"Z/{self.n}"}[self.kind]

    @property
    def is_field(self) -> bool:
        return self.kind in ("Q", "F_p") or (self.kind == "Z/n" and _is_prime(self.n))

    @property
    def characteristic(self) -> int:
        return self.n if self.kind in ("Z/n", "F_p") else 0

    def field(self) -> Field:
        if not self.is_field:
            raise ValueError(f"{self} is not a field")
        return field(self.characteristic)


ZZ = BaseRing("Z")
QQ_RING = BaseRing("Q")


def F(p):
    return BaseRing("F_p", p)


class FgModule:
    """A finitely generated module held by a presentation.

    Over Z-type rings the module is the abelian group
    ``Z^ngens / (rows of presentation, plus characteristic relations)``;
    over Q it is ``Q^ngens / rowspace``.
    """

    def __init__(self, ring: BaseRing, presentation=None, ngens: int = 0):
        self.ring = ring
        self.ngens = ngens
        if presentation is None or np.size(presentation) == 0:
            presentation = []
        self.presentation = [list(r) for r in presentation]
        if ring.kind == "Q":
            K = field(0)
            r = K.rank(K.mat(self.presentation, (-1, ngens))) if self.presentation and ngens else 0
            self.group = None
            self._rank = ngens - r
            self._divisors = ()
        else:
            rels = [list(map(int, r)) for r in self.presentation]
            c = ring.characteristic
            if c:
                for i in range(ngens):
                    e = [0] * ngens
                    e[i] = c
                    rels.append(e)
            self.group, self.to_canonical, self.section = GradingGroup.from_presentation(rels, ngens)
            self._rank, self._divisors = self.group.invariants()

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_invariants(cls, ring, rank=0, divisors=()):
        divisors = [d for d in divisors if d != 1]
        n = rank + len(divisors)
        rels = []
        for i, d in enumerate(divisors):
            r = [0] * n
            r[rank + i] = d
            rels.append(r)
        return cls(ring, rels, n)

    @classmethod
    def free(cls, ring, n=1):
        return cls(ring, [], n)

    @classmethod
    def zero(cls, ring):
        return cls(ring, [], 0)

    @classmethod
    def parse(cls, ring, spec: str):
        """``0``, ``k``, ``k^2``, ``Z``, ``Z/4``, ``Z^2+Z/3``."""
        spec = spec.replace(" ", "")
        if spec == "0":
            return cls.zero(ring)
        rank, divs = 0, []
        for term in spec.split("+"):
            m = re.fullmatch(r"(k|Z|Q|F\d+)(?:/(\d+))?(?:\^(\d+))?", term)
            if not m:
                raise ValueError(f"bad module spec {spec!r}")
            mult = int(m.group(3)) if m.group(3) else 1
            if m.group(2):
                divs.extend([int(m.group(2))] * mult)
            else:
                rank += mult
        return cls.from_invariants(ring, rank, divs)

    # -- invariants ---------------------------------------------------------
    @property
    def rank(self) -> int:
        """Number of free summands (for torsion rings: copies of the ring)."""
        if self.ring.kind in ("Z", "Q"):
            return self._rank
        c = self.ring.characteristic
        return sum(1 for d in self._divisors if d == c)

    @property
    def divisors(self) -> tuple:
        """Elementary divisors that are not the ring characteristic."""
        c = self.ring.characteristic
        if c:
            return tuple(d for d in self._divisors if d != c)
        return self._divisors

    @property
    def invariants(self):
        return (self.rank, self.divisors)

    @property
    def is_zero(self):
        return self.rank == 0 and not self.divisors

    def cardinality(self):
        if self.ring.kind == "Q" or (self.ring.kind == "Z" and self._rank):
            return 0 if not self.is_zero else 1
        n = 1
        for d in self._divisors:
            n *= d
        return n

    def isomorphic(self, other: "FgModule") -> bool:
        return self.ring == other.ring and self.invariants == other.invariants

    def __eq__(self, other):
        return isinstance(other, FgModule) and self.isomorphic(other)

    def __hash__(self):
        return hash((self.ring, self.invariants))

    def __repr__(self):
        return f"FgModule({self})"

    def __str__(self):
        if self.is_zero:
            return "0"
        base = "k" if self.ring.is_field else str(self.ring)
        parts = []
        if self.rank:
            parts.append(base if self.rank == 1 else f"{base}^{self.rank}")
        parts += [f"Z/{d}" for d in self.divisors]
        return "+".join(parts)

    def cyclic_orders(self):
        """Orders of the canonical cyclic generators (0 = free over Z)."""
        if self.ring.kind == "Q":
            return (0,) * self._rank
        return self.group.orders


def _same_ring(A, B):
    if A.ring != B.ring:
        raise RingMismatch(f"modules over {A.ring} and {B.ring}")


def direct_sum_modules(ring, mods):
    rank = sum(m.rank for m in mods)
    divs = [d for m in mods for d in m.divisors]
    if ring.characteristic and not ring.is_field:
        # free summands over Z/n are Z/n
        return FgModule.from_invariants(ring, 0, divs + [ring.characteristic] * rank)
    return FgModule.from_invariants(ring, rank, divs)


def hom_module(A: FgModule, B: FgModule) -> FgModule:
    """``Hom(A, B)``; ``result.basis_homs`` lists generating homomorphisms.

    Each basis hom is an integer matrix on the canonical cyclic coordinates.
    """
    _same_ring(A, B)
    if A.ring.kind == "Q":
        out = FgModule.free(A.ring, A.rank * B.rank)
        out.basis_homs = []
        return out
    oa, ob = A.cyclic_orders(), B.cyclic_orders()
    orders, homs = [], []
    for j, a in enumerate(oa):
        for i, b in enumerate(ob):
            if a == 0:
                o, img = b, 1
            elif b == 0:
                continue
            else:
                o = gcd(a, b)
                img = b // o
            if o == 1:
                continue
            M = int_zeros(len(ob), len(oa))
            M[i, j] = img
            orders.append(o)
            homs.append(M)
    rels = []
    for k, o in enumerate(orders):
        if o:
            r = [0] * len(orders)
            r[k] = o
            rels.append(r)
    out = FgModule(A.ring, rels, len(orders))
    out.basis_homs = homs
    return out


def tensor_module(A: FgModule, B: FgModule) -> FgModule:
    """``A (x) B`` from the standard presentation, reduced by SNF."""
    _same_ring(A, B)
    if A.ring.kind == "Q":
        return FgModule.free(A.ring, A.rank * B.rank)
    oa, ob = A.cyclic_orders(), B.cyclic_orders()
    n = len(oa) * len(ob)
    rels = []
    for i, a in enumerate(oa):
        for j, b in enumerate(ob):
            for o in (a, b):
                if o:
                    r = [0] * n
                    r[i * len(ob) + j] = o
                    rels.append(r)
    return FgModule(A.ring, rels, n)


def tor_modules(A: FgModule, B: FgModule):
    """``{0: A (x) B, -1: Tor_1(A, B)}`` from the free resolution of ``A``.

    Only for base rings of global dimension at most one (Z and fields).
    """
    _same_ring(A, B)
    if A.ring.is_field:
        return {0: tensor_module(A, B), -1: FgModule.zero(A.ring)}
    if A.ring.kind != "Z":
        raise ValueError(f"Tor over {A.ring} needs an unbounded resolution")
    oa = A.cyclic_orders()
    tors = [o for o in oa if o]
    # resolution 0 -> Z^t --diag(tors)--> Z^n -> A -> 0, tensored with B
    Bg = B.group
    from .groups import direct_sum

    Bt, _, _ = direct_sum(*([Bg] * len(tors)))
    Bn, _, _ = direct_sum(*([Bg] * len(oa)))
    nb = Bg.ngens
    M = int_zeros(Bn.ngens, Bt.ngens)
    k = 0
    for i, o in enumerate(oa):
        if o:
            for r in range(nb):
                M[i * nb + r, k * nb + r] = o
            k += 1
    d = GroupHom(Bt, Bn, M)
    K, _ = d.kernel()
    C, _ = d.cokernel()
    return {0: _module_of_group(A.ring, C), -1: _module_of_group(A.ring, K)}


def _module_of_group(ring, G: GradingGroup) -> FgModule:
    rank, divs = G.invariants()
    return FgModule.from_invariants(ring, rank, list(divs))


def is_exact_pair(f: GroupHom, g: GroupHom) -> bool:
    """Exactness of ``A --f--> B --g--> C`` of abelian groups at ``B``."""
    if (g @ f).matrix.size and any(v != 0 for v in (g @ f).matrix.flat):
        return False
    K, inc = g.kernel()
    imgs = []
    for j in range(f.src.ngens):
        e = [0] * f.src.ngens
        e[j] = 1
        k = inc.preimage(f(e))
        if k is None:
            return False
        imgs.append(k)
    from .groups import hom_from_images

    h = hom_from_images(f.src, K, imgs)
    return h.is_surjective()
