"""Standard small graded spaces used throughout the tests and the CLI."""
from .algebra.groups import GradingGroup, GroupHom
from .space import FinitePoset, GradedSpace, GradedSpaceMap, inclusion, point_space

Z0 = GradingGroup(())


def pt(group=None):
    return point_space(group)


def line3(group="Z/3"):
    """Three-point model of the real line with a graded origin ``c``.

    ``c < u-`` and ``c < u+``; ``Lambda_c`` is ``group``, zero elsewhere.
    """
    P = FinitePoset.from_covers(["c", "u-", "u+"], [("c", "u-"), ("c", "u+")])
    G = GradingGroup.parse(group) if isinstance(group, str) else group
    return GradedSpace(P, {"c": G, "u-": Z0, "u+": Z0}, name="LINE3")


def punctured_line(S):
    """Open inclusion ``j: {u-, u+} -> S``."""
    return inclusion(S, ["u-", "u+"], name="j")


def sierpinski(group_closed=None, group_open=None):
    """``a < b``: ``b`` is the open point."""
    P = FinitePoset.from_covers(["a", "b"], [("a", "b")])
    Ga = group_closed or Z0
    Gb = group_open or Z0
    return GradedSpace(P, {"a": Ga, "b": Gb}, name="SIERPINSKI")


def pseudo_circle(group=None):
    """Two closed points ``c1, c2`` below two open points ``o1, o2``."""
    P = FinitePoset.from_covers(
        ["c1", "c2", "o1", "o2"],
        [("c1", "o1"), ("c1", "o2"), ("c2", "o1"), ("c2", "o2")],
    )
    G = group or Z0
    lam = {x: G for x in P.points}
    lres = {cv: GroupHom.identity(G) for cv in P.covers}
    return GradedSpace(P, lam, lres, name="PSEUDOCIRCLE")


def ringed_line3(K, m=2, periodic=False, group="Z/3"):
    """LINE3 with ``R_c = k[t]/t^m`` (or ``k[t]/(t^m - 1)``), ``deg t = 1``,
    and ``R = k`` on the open points.

    Restriction sends ``t`` to 0 in the truncated ring (forced, since
    ``t^m = 0``) and to 1 in the periodic one.
    """
    from .algebra.graded import GradedRingData
    from .ringed import RingedGradedSpace

    S = line3(group)
    Gc = S.lam["c"]
    one = (1,) * Gc.ngens
    if periodic:
        Rc = GradedRingData.periodic_polynomial(K, Gc, m, one)
    else:
        Rc = GradedRingData.truncated_polynomial(K, Gc, m, one)
    Ru = GradedRingData.base(K, Z0)
    maps = {}
    for u in ("u-", "u+"):
        blocks = {}
        for i in range(m):
            d, idx = Rc.power_index[i]
            M = blocks.setdefault(d, K.zeros(1, Rc.dim(d)))
            M[0, idx] = 1 if (i == 0 or periodic) else 0
        maps[("c", u)] = blocks
    return RingedGradedSpace.from_stalks(S, K, {"c": Rc, "u-": Ru, "u+": Ru}, maps, name="R")


def chain3():
    """Three composable maps PSEUDOCIRCLE -> LINE3 -> SIERPINSKI -> pt.

    ``c1, c2 -> c``, ``o1 -> u-``, ``o2 -> u+``; then ``c -> a``,
    ``u-, u+ -> b``.  All flats are zero.
    """
    X, Y, Z = pseudo_circle(), line3(), sierpinski()
    f = GradedSpaceMap(X, Y, {"c1": "c", "c2": "c", "o1": "u-", "o2": "u+"}, name="f")
    g = GradedSpaceMap(Y, Z, {"c": "a", "u-": "b", "u+": "b"}, name="g")
    h = GradedSpaceMap(Z, point_space(), {"a": "*", "b": "*"}, name="h")
    return f, g, h
