"""Input files: bialgebras, module spaces, surfaces and render requests.

All inputs are TOML. Rationals are written as integers or ``"p/q"``
strings; floats are rejected. Every error carries the line (and column
when known) of the offending entry.

Bialgebra::

    name = "ax+b"
    basis = ["e1", "e2"]
    [bracket]               # [e1, e2] = e2
    "e1 e2" = { e2 = 1 }
    [cobracket]             # delta(e2) = e1 ^ e2
    e2 = { "e1 e2" = 1 }

Module (``kind`` is ``group``, ``point`` or ``polynomial``)::

    kind = "polynomial"
    coordinates = ["y0"]
    [fields]                # one entry per basis element of g = h + h*
    e1 = { y0 = "y0" }

Ciliated graph (for rendering)::

    [[vertex]]
    name = "v"
    sign = "+"
    cilia = ["a", "b"]
    [[edge]]
    name = "e"
    plus = "a"
    minus = "b"
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .jets import JetRing, Poly
from .liealg import LieAlgebra, LieBialgebra, LieError, ManinTriple
from .ordcat import OrderedMorphism
from .rational import Q, as_q
from .spaces import Derivation, GSpace

__all__ = [
    "InputError",
    "load_toml",
    "parse_bialgebra",
    "parse_module",
    "parse_polynomial",
    "parse_graph",
    "parse_ordered_morphism",
    "GraphSpec",
]


class InputError(ValueError):
    """A malformed input; ``line``/``column`` are 1-based when known."""

    def __init__(self, msg: str, line: Optional[int] = None, column: Optional[int] = None, path: str = "<input>"):
        self.msg, self.line, self.column, self.path = msg, line, column, path
        where = path
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {msg}")


_TOML_POS = re.compile(r"\(at line (\d+), column (\d+)\)")


@dataclass
class Source:
    text: str
    data: Dict[str, Any]
    path: str

    def locate(self, *needles: str) -> Optional[int]:
        """First line mentioning all needles as whole labels (in order), for error messages."""
        pats = [re.compile(r"(?<![\w*])" + re.escape(s) + r"(?![\w*])") for s in needles]
        for n, line in enumerate(self.text.splitlines(), 1):
            pos = 0
            for pat in pats:
                m = pat.search(line, pos)
                if m is None:
                    break
                pos = m.end()
            else:
                return n
        return None

    def error(self, msg: str, *needles: str) -> InputError:
        return InputError(msg, self.locate(*needles) if needles else None, None, self.path)


def load_toml(text: str, path: str = "<input>") -> Source:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = _TOML_POS.sub("", str(exc)).strip()
        line, col = getattr(exc, "lineno", None), getattr(exc, "colno", None)
        m = _TOML_POS.search(str(exc))
        if line is None and m:
            line, col = int(m.group(1)), int(m.group(2))
        if line is None:
            line = max(1, len(text.splitlines()))
        raise InputError(msg, line, col, path) from None
    return Source(text, data, path)


def _rational(src: Source, v: Any, *where: str) -> Q:
    if isinstance(v, bool) or isinstance(v, float):
        raise src.error(f"expected an integer or a 'p/q' string, got {v!r}", *where)
    try:
        return as_q(v)
    except (ValueError, TypeError):
        raise src.error(f"not a rational number: {v!r}", *where) from None


def _labels(src: Source, key: str) -> List[str]:
    v = src.data.get(key)
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise src.error(f"'{key}' must be a list of strings", key)
    if len(set(v)) != len(v):
        raise src.error(f"'{key}' repeats a label", key)
    return v


def _pair(src: Source, key: str, basis: Sequence[str], table: str) -> Tuple[int, int]:
    parts = key.replace(",", " ").split()
    if len(parts) != 2 or any(p not in basis for p in parts):
        raise src.error(f"[{table}] key {key!r} must name two basis elements", key)
    return basis.index(parts[0]), basis.index(parts[1])


# ---------------------------------------------------------------- bialgebra


def parse_bialgebra(text: str, path: str = "<bialgebra>") -> LieBialgebra:
    src = load_toml(text, path)
    d = src.data
    basis = _labels(src, "basis")
    if "dim" in d and d["dim"] != len(basis):
        raise src.error(f"dim = {d['dim']} but the basis has {len(basis)} elements", "dim")
    allowed = {"name", "dim", "basis", "bracket", "cobracket"}
    for k in d:
        if k not in allowed:
            raise src.error(f"unknown key {k!r}", k)
    bracket: Dict[Tuple[int, int], Dict[int, Q]] = {}
    for key, vec in d.get("bracket", {}).items():
        i, j = _pair(src, key, basis, "bracket")
        if not isinstance(vec, dict):
            raise src.error(f"[bracket] {key!r} must be a table basis -> coefficient", key)
        out = {}
        for lab, c in vec.items():
            if lab not in basis:
                raise src.error(f"[bracket] {key!r}: unknown basis element {lab!r}", key, lab)
            out[basis.index(lab)] = _rational(src, c, key, lab)
        if (i, j) in bracket or (j, i) in bracket:
            raise src.error(f"[bracket] {key!r} given twice", key)
        bracket[(i, j)] = out
    cob: Dict[int, Dict[Tuple[int, int], Q]] = {}
    for lab, tab in d.get("cobracket", {}).items():
        if lab not in basis:
            raise src.error(f"[cobracket] unknown basis element {lab!r}", lab)
        if not isinstance(tab, dict):
            raise src.error(f"[cobracket] {lab!r} must be a table 'a b' -> coefficient", lab)
        out2 = {}
        for key, c in tab.items():
            j, k = _pair(src, key, basis, "cobracket")
            out2[(j, k)] = _rational(src, c, lab, key)
        cob[basis.index(lab)] = out2
    try:
        h = LieAlgebra(basis, bracket)
        return LieBialgebra(h, cob, name=str(d.get("name", "bialgebra")))
    except LieError as exc:
        raise src.error(str(exc)) from None


# ---------------------------------------------------------------- polynomials


def parse_polynomial(s: str, R: JetRing) -> Poly:
    """``"1/2*y0^2 - y1 + 3"`` as a jet of ``R``."""
    s = s.strip()
    if not s:
        raise ValueError("empty polynomial")
    out: Poly = {}
    terms = re.findall(r"[+-]?[^+-]+", s.replace(" ", ""))
    if "".join(terms) != s.replace(" ", ""):
        raise ValueError(f"cannot parse {s!r}")
    for term in terms:
        sign = -1 if term.startswith("-") else 1
        term = term.lstrip("+-")
        coef = Q(sign)
        e = [0] * R.n
        for f in term.split("*"):
            if not f:
                raise ValueError(f"empty factor in {s!r}")
            if f[0].isdigit():
                coef *= as_q(f)
                continue
            name, _, power = f.partition("^")
            if name not in R.names:
                raise ValueError(f"unknown coordinate {name!r}")
            e[R.names.index(name)] += int(power) if power else 1
        if sum(e) <= R.order:
            R.iadd(out, R.monomial(e), coef)
    return out


# ---------------------------------------------------------------- modules


def parse_module(text: str, mt: ManinTriple, H: GSpace, order: int, path: str = "<module>") -> GSpace:
    """The space ``M`` carrying a ``g``-action, at jet order ``order``."""
    src = load_toml(text, path)
    d = src.data
    kind = d.get("kind", "polynomial")
    if kind == "group":
        return H
    if kind == "point":
        return GSpace(JetRing([], order), mt.g.dim, [Derivation(JetRing([], order), {}, order) for _ in range(mt.g.dim)], "point")
    if kind != "polynomial":
        raise src.error(f"unknown module kind {kind!r}", "kind")
    coords = _labels(src, "coordinates")
    R = JetRing(coords, order)
    fields_tab = d.get("fields", {})
    labels = list(mt.g.labels)
    fields = []
    for k in fields_tab:
        if k not in labels:
            raise src.error(f"[fields] {k!r} is not a basis element of g (known: {', '.join(labels)})", k)
    for lab in labels:
        tab = fields_tab.get(lab, {})
        coeffs = {}
        for c, expr in tab.items():
            if c not in coords:
                raise src.error(f"[fields] {lab}: unknown coordinate {c!r}", lab, c)
            try:
                coeffs[coords.index(c)] = parse_polynomial(str(expr), R)
            except ValueError as exc:
                raise src.error(f"[fields] {lab}.{c}: {exc}", lab, c) from None
        fields.append(Derivation(R, coeffs, order))
    return GSpace(R, len(fields), fields, str(d.get("name", "M")))


# ---------------------------------------------------------------- graphs


@dataclass
class GraphSpec:
    cilia_plus: Dict[str, List[str]]
    cilia_minus: Dict[str, List[str]]
    edges: Dict[str, Tuple[str, str]]


def parse_graph(text: str, path: str = "<graph>") -> GraphSpec:
    src = load_toml(text, path)
    d = src.data
    cp: Dict[str, List[str]] = {}
    cm: Dict[str, List[str]] = {}
    for v in d.get("vertex", []):
        name = v.get("name")
        if not isinstance(name, str):
            raise src.error("every [[vertex]] needs a string 'name'", "[[vertex]]")
        sign = v.get("sign", "+")
        if sign not in ("+", "-"):
            raise src.error(f"vertex {name}: sign must be '+' or '-'", name)
        cil = v.get("cilia", [])
        if not isinstance(cil, list) or not all(isinstance(x, str) for x in cil):
            raise src.error(f"vertex {name}: cilia must be a list of half-edge names", name)
        (cp if sign == "+" else cm)[name] = list(cil)
    edges: Dict[str, Tuple[str, str]] = {}
    for e in d.get("edge", []):
        name = e.get("name")
        if not isinstance(name, str) or "plus" not in e or "minus" not in e:
            raise src.error("every [[edge]] needs 'name', 'plus' and 'minus'", "[[edge]]")
        edges[name] = (str(e["plus"]), str(e["minus"]))
    return GraphSpec(cp, cm, edges)


def parse_ordered_morphism(src: Source) -> OrderedMorphism:
    fibers = src.data.get("fibers")
    if not isinstance(fibers, dict):
        raise src.error("an ordered morphism needs a [fibers] table", "fibers")
    for k, f in fibers.items():
        if not isinstance(f, list):
            raise src.error(f"fiber {k!r} must be a list", k)
    try:
        return OrderedMorphism.from_fibers({k: [str(x) for x in f] for k, f in fibers.items()})
    except ValueError as exc:
        raise src.error(str(exc), "fibers") from None
