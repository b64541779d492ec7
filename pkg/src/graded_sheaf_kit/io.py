"""Line-oriented text format for spaces, maps, sheaves, rings and complexes.

One record per line, ``#`` starts a comment.  Header records open a block;
the records after a header belong to it::

    field GF2
    space LINE3
      point c
      cover c u-
      lambda c Z/3
      lres c u- 0x1:
    sheaf F on LINE3
      stalkmod c 0 k^2
      res c u- 0 1x2:1,0

Degrees are comma separated integers (``.`` for the trivial group); a
matrix is ``MxN:`` followed by rows separated by ``;`` with entries
separated by ``,``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .algebra.groups import GradingGroup, GroupHom
from .algebra.linalg import Field
from .derived.complexes import ComplexOfSheaves
from .ringed import RingedGradedSpace, RModuleSheaf
from .sheaves.core import GradedSheaf, SheafMap
from .space import FinitePoset, GradedSpace, GradedSpaceMap, PosetError, validate_space

_SINGULAR = {
    "spaces": "space", "maps": "map", "sheaves": "sheaf", "sheafmaps": "sheaf map",
    "complexes": "complex", "rings": "ringed space", "modules": "module",
}
HEADERS = ("field", "space", "map", "sheaf", "sheafmap", "complex", "ringed", "module")


class ParseError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class Workspace:
    K: Field
    spaces: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    sheaves: dict = field(default_factory=dict)
    sheafmaps: dict = field(default_factory=dict)
    complexes: dict = field(default_factory=dict)
    rings: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def names(self):
        out = {}
        for kind in ("spaces", "maps", "sheaves", "sheafmaps", "complexes", "rings", "modules"):
            for n in getattr(self, kind):
                out[n] = kind
        return out

    def lookup(self, name, *kinds):
        for kind in kinds:
            table = getattr(self, kind)
            if name in table:
                return table[name]
        raise KeyError(f"no {' or '.join(_SINGULAR[k] for k in kinds)} named {name!r}")

    def sheaf(self, name):
        """A sheaf by name; modules and ring sheaves give their underlying sheaf."""
        obj = self.lookup(name, "sheaves", "modules", "rings")
        if isinstance(obj, RModuleSheaf):
            return obj.F
        if isinstance(obj, RingedGradedSpace):
            return obj.R
        return obj

    def merge(self, other: "Workspace"):
        if other.K != self.K:
            raise ParseError(f"workspaces over different fields: {self.K} and {other.K}")
        clash = set(self.names()) & set(other.names())
        if clash:
            raise ParseError(f"names defined twice: {sorted(clash)}")
        for kind in ("spaces", "maps", "sheaves", "sheafmaps", "complexes", "rings", "modules"):
            getattr(self, kind).update(getattr(other, kind))
        self.diagnostics += other.diagnostics
        return self


# -- tokens -------------------------------------------------------------------
def fmt_degree(d):
    return "." if not d else ",".join(str(int(v)) for v in d)


def parse_degree(tok, G: GradingGroup, line=None):
    vals = () if tok == "." else tuple(int(v) for v in tok.split(","))
    if len(vals) != G.ngens:
        raise ParseError(f"degree {tok!r} does not fit the group {G}", line)
    return G.nf(vals)


def fmt_matrix(M):
    M = np.asarray(M)
    m, n = M.shape
    rows = ";".join(",".join(str(v) for v in row) for row in M.tolist())
    return f"{m}x{n}:{rows if m and n else ''}"


def parse_matrix(tok, line=None):
    try:
        shape, body = tok.split(":", 1)
        m, n = (int(v) for v in shape.split("x"))
        rows = [r.split(",") for r in body.split(";")] if m and n else []
        vals = [[Fraction(v) for v in r] for r in rows]
    except ValueError:
        raise ParseError(f"bad matrix {tok!r}", line) from None
    if len(vals) != (m if n else 0) or any(len(r) != n for r in vals):
        raise ParseError(f"matrix {tok!r} does not have shape {m}x{n}", line)
    out = np.zeros((m, n), dtype=object)
    for i, r in enumerate(vals):
        for j, v in enumerate(r):
            out[i, j] = int(v) if v.denominator == 1 else v
    return out


def parse_field(tok, line=None):
    t = tok.upper()
    if t in ("Q", "QQ"):
        return Field(0)
    for pre in ("GF", "F"):
        if t.startswith(pre) and t[len(pre):].isdigit():
            try:
                return Field(int(t[len(pre):]))
            except ValueError as e:
                raise ParseError(str(e), line) from None
    raise ParseError(f"unknown field {tok!r}", line)


def fmt_field(K: Field):
    return f"GF{K.p}" if K.p else "Q"


def _module_dim(tok, line):
    if tok == "0":
        return 0
    if tok == "k":
        return 1
    if tok.startswith("k^") and tok[2:].isdigit():
        return int(tok[2:])
    raise ParseError(f"module spec {tok!r} is not k, k^n or 0 (sheaves are over a field)", line)


def _table(tok, line, value):
    """``key=value|key=value``."""
    out = []
    if tok == "-":
        return out
    for part in tok.split("|"):
        if "=" not in part:
            raise ParseError(f"bad table entry {part!r}", line)
        k, v = part.split("=", 1)
        out.append((k, value(v)))
    return out


# -- parsing --------------------------------------------------------------------
def parse_text(text: str, source="<text>") -> Workspace:
    """Parse a description.  Syntax errors raise :class:`ParseError`;
    structural problems land in ``Workspace.diagnostics``."""
    blocks, K = [], None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "field":
            if len(toks) != 2:
                raise ParseError("field takes one argument", ln)
            if K is not None or blocks:
                raise ParseError("field must come first and only once", ln)
            K = parse_field(toks[1], ln)
        elif toks[0] in HEADERS:
            blocks.append((ln, toks, []))
        elif not blocks:
            raise ParseError(f"record {toks[0]!r} outside any block", ln)
        else:
            blocks[-1][2].append((ln, toks))
    ws = Workspace(K or Field(2))
    builders = {
        "space": _build_space, "map": _build_map, "sheaf": _build_sheaf, "sheafmap": _build_sheafmap,
        "complex": _build_complex, "ringed": _build_ringed, "module": _build_module,
    }
    for ln, head, body in blocks:
        if len(head) < 2:
            raise ParseError(f"{head[0]} needs a name", ln)
        if head[1] in ws.names():
            raise ParseError(f"name {head[1]!r} defined twice", ln)
        try:
            builders[head[0]](ws, ln, head, body)
        except ParseError:
            raise
        except (ValueError, KeyError) as e:
            ws.diagnostics.append(f"{source}:{ln}: {head[0]} {head[1]}: {e.args[0] if e.args else e}")
    return ws


def _expect(toks, n, ln, usage):
    if len(toks) != n:
        raise ParseError(f"expected `{usage}`", ln)


def _build_space(ws, ln, head, body):
    _expect(head, 2, ln, "space NAME")
    points, covers, le, groups, lres = [], [], [], {}, {}
    for l, t in body:
        kind = t[0]
        if kind == "point":
            _expect(t, 2, l, "point ID")
            points.append(t[1])
        elif kind in ("cover", "le"):
            _expect(t, 3, l, f"{kind} LO HI")
            (covers if kind == "cover" else le).append((t[1], t[2], l))
        elif kind == "lambda":
            _expect(t, 3, l, "lambda ID GROUP")
            try:
                groups[t[1]] = GradingGroup.parse(t[2])
            except ValueError as e:
                raise ParseError(str(e), l) from None
        elif kind == "lres":
            _expect(t, 4, l, "lres LO HI MATRIX")
            lres[(t[1], t[2])] = (parse_matrix(t[3], l), l)
        else:
            raise ParseError(f"unexpected record {kind!r} in space", l)
    try:
        if le:
            P = FinitePoset(points, [(a, b) for a, b, _ in le + covers], closure=False)
        else:
            P = FinitePoset.from_covers(points, [(a, b) for a, b, _ in covers])
    except PosetError as e:
        raise ValueError(str(e)) from None
    Z = GradingGroup(())
    lam = {x: groups.get(x, Z) for x in P.points}
    unknown = set(groups) - set(P.points)
    if unknown:
        raise ValueError(f"lambda for unknown points {sorted(unknown)}")
    homs = {}
    for (x, y), (M, l) in lres.items():
        if (x, y) not in P.covers:
            raise ValueError(f"line {l}: lres on non-covering pair {x} {y}")
        try:
            homs[(x, y)] = GroupHom(lam[x], lam[y], M)
        except ValueError as e:
            raise ValueError(f"line {l}: restriction {x}->{y}: {e}") from None
    S = GradedSpace(P, lam, homs, name=head[1])
    diags = validate_space(S)
    if diags:
        raise ValueError("; ".join(diags))
    ws.spaces[head[1]] = S


def _build_map(ws, ln, head, body):
    _expect(head, 4, ln, "map NAME SRC DST")
    X, Y = ws.lookup(head[2], "spaces"), ws.lookup(head[3], "spaces")
    pmap, flat = {}, {}
    for l, t in body:
        if t[0] == "send":
            _expect(t, 3, l, "send X Y")
            pmap[t[1]] = t[2]
        elif t[0] == "flat":
            _expect(t, 3, l, "flat X MATRIX")
            flat[t[1]] = parse_matrix(t[2], l)
        else:
            raise ParseError(f"unexpected record {t[0]!r} in map", l)
    missing = set(X.points) - set(pmap)
    if missing:
        raise ValueError(f"points not sent anywhere: {sorted(missing)}")
    bad = {v for v in pmap.values() if v not in Y.points}
    if bad:
        raise ValueError(f"images outside the target: {sorted(bad)}")
    homs = {x: GroupHom(Y.lam[pmap[x]], X.lam[x], M) for x, M in flat.items()}
    f = GradedSpaceMap(X, Y, pmap, homs, name=head[1])
    diags = f.validate()
    if diags:
        raise ValueError("; ".join(diags))
    ws.maps[head[1]] = f


def _sheaf_data(ws, S, body, extra=()):
    dims = {x: {} for x in S.points}
    maps, rest = {}, []
    for l, t in body:
        if t[0] == "stalkmod":
            _expect(t, 4, l, "stalkmod POINT DEGREE MODULE")
            if t[1] not in S.lam:
                raise ValueError(f"line {l}: unknown point {t[1]}")
            dims[t[1]][parse_degree(t[2], S.lam[t[1]], l)] = _module_dim(t[3], l)
        elif t[0] == "res":
            _expect(t, 5, l, "res LO HI DEGREE MATRIX")
            if (t[1], t[2]) not in S.poset.covers:
                raise ValueError(f"line {l}: res on non-covering pair {t[1]} {t[2]}")
            deg = parse_degree(t[3], S.lam[t[1]], l)
            maps.setdefault((t[1], t[2]), {})[deg] = ws.K.mat(parse_matrix(t[4], l))
        elif t[0] in extra:
            rest.append((l, t))
        else:
            raise ParseError(f"unexpected record {t[0]!r}", l)
    return dims, maps, rest


def _build_sheaf(ws, ln, head, body):
    if len(head) != 4 or head[2] != "on":
        raise ParseError("expected `sheaf NAME on SPACE`", ln)
    S = ws.lookup(head[3], "spaces")
    dims, maps, _ = _sheaf_data(ws, S, body)
    ws.sheaves[head[1]] = GradedSheaf(S, ws.K, dims, maps, name=head[1])


def _build_sheafmap(ws, ln, head, body):
    _expect(head, 4, ln, "sheafmap NAME SRC DST")
    F = ws.lookup(head[2], "sheaves")
    G = ws.lookup(head[3], "sheaves")
    comps = {x: {} for x in F.points}
    for l, t in body:
        if t[0] != "comp":
            raise ParseError(f"unexpected record {t[0]!r} in sheafmap", l)
        _expect(t, 4, l, "comp POINT DEGREE MATRIX")
        comps[t[1]][parse_degree(t[2], F.space.lam[t[1]], l)] = ws.K.mat(parse_matrix(t[3], l))
    ws.sheafmaps[head[1]] = SheafMap(F, G, comps)


def _build_complex(ws, ln, head, body):
    _expect(head, 2, ln, "complex NAME")
    terms, diffs = {}, {}
    for l, t in body:
        if t[0] == "term":
            _expect(t, 3, l, "term N SHEAF")
            terms[int(t[1])] = ws.lookup(t[2], "sheaves")
        elif t[0] == "diff":
            _expect(t, 3, l, "diff N SHEAFMAP")
            diffs[int(t[1])] = ws.lookup(t[2], "sheafmaps")
        else:
            raise ParseError(f"unexpected record {t[0]!r} in complex", l)
    if not terms:
        raise ValueError("complex without terms")
    C = ComplexOfSheaves(terms, diffs, name=head[1])
    ws.complexes[head[1]] = C


def _build_ringed(ws, ln, head, body):
    if len(head) != 4 or head[2] != "on":
        raise ParseError("expected `ringed NAME on SPACE`", ln)
    S = ws.lookup(head[3], "spaces")
    dims, maps, rest = _sheaf_data(ws, S, body, extra=("ring",))
    mult, unit = {}, {}
    for l, t in rest:
        _expect(t, 5, l, "ring POINT DEGREES STRUCTCONSTS UNIT")
        x = t[1]
        G = S.lam[x]
        for d, n in _table(t[2], l, int):
            dims[x][parse_degree(d, G, l)] = n
        mult[x] = {}
        for k, M in _table(t[3], l, lambda v: parse_matrix(v, l)):
            a, b = k.split("*")
            mult[x][(parse_degree(a, G, l), parse_degree(b, G, l))] = M
        unit[x] = parse_matrix(t[4], l)
    R = GradedSheaf(S, ws.K, dims, maps, name=head[1])
    ws.rings[head[1]] = RingedGradedSpace(S, ws.K, R, mult, unit, name=head[1])


def _build_module(ws, ln, head, body):
    if len(head) != 4 or head[2] != "over":
        raise ParseError("expected `module NAME over RING`", ln)
    ring = ws.lookup(head[3], "rings")
    S = ring.space
    dims, maps, rest = _sheaf_data(ws, S, body, extra=("act",))
    act = {}
    for l, t in rest:
        _expect(t, 3, l, "act POINT TABLE")
        G = S.lam[t[1]]
        act[t[1]] = {}
        for k, M in _table(t[2], l, lambda v: parse_matrix(v, l)):
            a, b = k.split("*")
            act[t[1]][(parse_degree(a, G, l), parse_degree(b, G, l))] = M
    F = GradedSheaf(S, ws.K, dims, maps, name=head[1])
    ws.modules[head[1]] = RModuleSheaf(ring, F, act, name=head[1])


def parse_file(path) -> Workspace:
    with open(path) as fh:
        return parse_text(fh.read(), source=str(path))


# -- serialization ------------------------------------------------------------------
def _sheaf_lines(F: GradedSheaf, tag="stalkmod"):
    S = F.space
    out = []
    for x in S.points:
        for d, n in sorted(F.dims[x].items()):
            out.append(f"  {tag} {x} {fmt_degree(d)} k^{n}")
    for (x, y) in sorted(S.poset.covers, key=str):
        for d, M in sorted(F.maps[(x, y)].items()):
            if M.size:
                out.append(f"  res {x} {y} {fmt_degree(d)} {fmt_matrix(M)}")
    return out


def _space_lines(name, S: GradedSpace):
    out = [f"space {name}"]
    out += [f"  point {x}" for x in S.points]
    out += [f"  cover {x} {y}" for x, y in sorted(S.poset.covers, key=str)]
    out += [f"  lambda {x} {S.lam[x]}" for x in S.points if S.lam[x].ngens]
    for (x, y), h in sorted(S.lres.items(), key=str):
        if h.matrix.size and any(v for v in h.matrix.flat):
            out.append(f"  lres {x} {y} {fmt_matrix(h.matrix)}")
    return out


def _name_of(table, obj, kind):
    for n, v in table.items():
        if v is obj:
            return n
    raise KeyError(f"{kind} is not registered in the workspace")


def serialize(ws: Workspace) -> str:
    """Canonical text; ``parse_text(serialize(ws))`` reproduces ``ws``."""
    lines = [f"field {fmt_field(ws.K)}"]
    for n, S in ws.spaces.items():
        lines += _space_lines(n, S)
    for n, f in ws.maps.items():
        lines.append(f"map {n} {_name_of(ws.spaces, f.src, 'space')} {_name_of(ws.spaces, f.dst, 'space')}")
        lines += [f"  send {x} {f(x)}" for x in f.src.points]
        for x in f.src.points:
            M = f.flat[x].matrix
            if M.size and any(v for v in M.flat):
                lines.append(f"  flat {x} {fmt_matrix(M)}")
    for n, R in ws.rings.items():
        lines.append(f"ringed {n} on {_name_of(ws.spaces, R.space, 'space')}")
        for x in R.space.points:
            degs = "|".join(f"{fmt_degree(d)}={k}" for d, k in sorted(R.R.dims[x].items())) or "-"
            mult = "|".join(
                f"{fmt_degree(a)}*{fmt_degree(b)}={fmt_matrix(M)}" for (a, b), M in sorted(R.mult[x].items())
            ) or "-"
            lines.append(f"  ring {x} {degs} {mult} {fmt_matrix(R.unit[x])}")
        lines += [ln for ln in _sheaf_lines(R.R) if ln.startswith("  res")]
    for n, F in ws.sheaves.items():
        lines.append(f"sheaf {n} on {_name_of(ws.spaces, F.space, 'space')}")
        lines += _sheaf_lines(F)
    for n, M in ws.modules.items():
        lines.append(f"module {n} over {_name_of(ws.rings, M.ring, 'ring')}")
        lines += _sheaf_lines(M.F)
        for x in M.space.points:
            acts = [(k, A) for k, A in sorted(M.act[x].items()) if A is not None and A.size]
            if acts:
                tab = "|".join(f"{fmt_degree(a)}*{fmt_degree(b)}={fmt_matrix(A)}" for (a, b), A in acts)
                lines.append(f"  act {x} {tab}")
    for n, phi in ws.sheafmaps.items():
        lines.append(f"sheafmap {n} {_name_of(ws.sheaves, phi.src, 'sheaf')} {_name_of(ws.sheaves, phi.dst, 'sheaf')}")
        for x in phi.src.points:
            for d in sorted(phi.src.dims[x]):
                M = phi.at(x, d)
                if M.size:
                    lines.append(f"  comp {x} {fmt_degree(d)} {fmt_matrix(M)}")
    for n, C in ws.complexes.items():
        lines.append(f"complex {n}")
        lines += [f"  term {i} {_name_of(ws.sheaves, T, 'sheaf')}" for i, T in sorted(C.terms.items())]
        lines += [f"  diff {i} {_name_of(ws.sheafmaps, d, 'sheafmap')}" for i, d in sorted(C.diffs.items())]
    return "\n".join(lines) + "\n"


# -- shipped fixtures ----------------------------------------------------------------
def fixture_names():
    root = resources.files("graded_sheaf_kit") / "data"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".gsk"))


def fixture_text(name) -> str:
    path = resources.files("graded_sheaf_kit") / "data" / f"{name}.gsk"
    if not path.is_file():
        raise ParseError(f"no shipped fixture {name!r}; have {fixture_names()}")
    return path.read_text()


def load_fixture(name) -> Workspace:
    return parse_text(fixture_text(name), source=f"{name}.gsk")
