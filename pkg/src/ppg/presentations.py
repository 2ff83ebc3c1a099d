"""Finite pro-p presentations, orientations and the paper's families.

Families (generators ordered ``x1, y1, ..., xd, yd``):

* ``demushkin(p, k, d)``: one relator ``x1^q [x1,y1] ... [xd,yd]``
* ``f1(p, k, d)``: one relator ``[x1^q, y1][x2,y2] ... [xd,yd]``
* ``f2(p, k, d, z1, z2)``: the Demushkin relator and ``[z1, z2]``
* ``chain(p, d)``: ``[x1,y1]^-1 [x_{i+1}, y_{i+1}]`` for ``i = 1..d-1``

``k = None`` stands for ``k = infinity``, i.e. ``q = p^inf = 0``: the power
factor is dropped.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from sympy import isprime

from .words import (Word, WordSyntaxError, commutator, exponent_sums, generator, identity, invert,
                    multiply, parse_word, power)

__all__ = [
    "FamilyError",
    "Family",
    "Presentation",
    "Orientation",
    "make_demushkin",
    "make_f1",
    "make_f2",
    "make_chain_amalgam",
    "make_family",
    "validate_minimal",
    "to_dsl",
    "parse_dsl",
    "parse_family_spec",
    "DslError",
]


class FamilyError(ValueError):
    """A family constructor was called with parameters the family excludes."""


@dataclass(frozen=True)
class Family:
    kind: str  # demushkin | f1 | f2 | chain | custom
    params: tuple = ()

    def __str__(self) -> str:
        args = ",".join("inf" if a is None else str(a) for a in self.params)
        return f"{self.kind}({args})"


@dataclass(frozen=True)
class Presentation:
    p: int
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    family: Family = Family("custom")
    name: str = "G"

    def __post_init__(self):
        if not isprime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("generator names must be unique")
        for r in self.relators:
            if r.alphabet != self.generators:
                raise ValueError("relator alphabet differs from the generators")
            if r.is_identity():
                raise ValueError("relators must be nontrivial")

    @property
    def n(self) -> int:
        return len(self.generators)

    def word(self, text: str) -> Word:
        return parse_word(text, self.generators)

    def gen(self, name: str) -> Word:
        return generator(self.generators, name)

    def index(self, name: str) -> int:
        return self.generators.index(name)

    def digest(self) -> str:
        return hashlib.sha256(to_dsl(self).encode()).hexdigest()


@dataclass(frozen=True)
class Orientation:
    """Values ``theta(g)`` in ``1 + pZ_p`` (``1 + 4Z_2`` when p = 2).

    Stored as exact rationals whose denominators are prime to p.
    """

    p: int
    values: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        vals = {k: Fraction(v) for k, v in self.values.items()}
        m = 4 if self.p == 2 else self.p
        for g, a in vals.items():
            if a.denominator % self.p == 0:
                raise ValueError(f"theta({g}) = {a} has denominator divisible by p")
            # a ≡ 1 mod m  <=>  numerator ≡ denominator mod m
            if (a.numerator - a.denominator) % m:
                raise ValueError(f"theta({g}) = {a} is not in 1 + {m}Z_p")
        object.__setattr__(self, "values", dict(sorted(vals.items())))

    @classmethod
    def trivial(cls, pres: Presentation) -> Orientation:
        return cls(pres.p, {g: Fraction(1) for g in pres.generators})

    def __getitem__(self, g: str) -> Fraction:
        return self.values.get(g, Fraction(1))

    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.values.values())

    def of_word(self, w: Word) -> Fraction:
        # theta lands in an abelian group, so only exponent sums matter
        out = Fraction(1)
        for g, e in zip(w.alphabet, exponent_sums(w)):
            if e:
                v = self.values.get(g)
                if v is not None and v != 1:
                    out *= v ** e
        return out

    def as_list(self, generators: Sequence[str]) -> list[Fraction]:
        return [self[g] for g in generators]


def _xy_names(d: int) -> tuple[str, ...]:
    names = []
    for i in range(1, d + 1):
        names += [f"x{i}", f"y{i}"]
    return tuple(names)


def _q(p: int, k: int | None) -> int:
    return 0 if k is None else p ** k


def _check_k(p: int, k: int | None, allow_inf: bool, family: str) -> None:
    if k is None:
        if not allow_inf:
            raise FamilyError(f"{family}: k must be finite (q = p^k != 0)")
        return
    if k < 1:
        raise FamilyError(f"{family}: k must be >= 1")
    if p == 2 and k < 2:
        raise FamilyError(f"{family}: k >= 2 is required when p = 2")


def _demushkin_relator(alpha: tuple[str, ...], p: int, k: int | None, d: int) -> Word:
    x1 = generator(alpha, "x1")
    w = power(x1, _q(p, k)) if k is not None else identity(alpha)
    for i in range(1, d + 1):
        w = multiply(w, commutator(generator(alpha, f"x{i}"), generator(alpha, f"y{i}")))
    return w


def make_demushkin(p: int, k: int | None, d: int) -> tuple[Presentation, Orientation]:
    """Demushkin group with its canonical orientation ``theta(y1) = 1/(1-q)``."""
    if d < 1:
        raise FamilyError("demushkin: d >= 1 required")
    _check_k(p, k, allow_inf=True, family="demushkin")
    alpha = _xy_names(d)
    pres = Presentation(p, alpha, (_demushkin_relator(alpha, p, k, d),),
                        Family("demushkin", (p, k, d)), name=f"Demushkin({p},{k or 'inf'},{d})")
    q = _q(p, k)
    theta = {g: Fraction(1) for g in alpha}
    theta["y1"] = Fraction(1, 1 - q)
    return pres, Orientation(p, theta)


def make_f1(p: int, k: int, d: int) -> Presentation:
    if d < 2:
        raise FamilyError("f1: d >= 2 required")
    _check_k(p, k, allow_inf=False, family="f1")
    alpha = _xy_names(d)
    x1, y1 = generator(alpha, "x1"), generator(alpha, "y1")
    w = commutator(power(x1, p ** k), y1)
    for i in range(2, d + 1):
        w = multiply(w, commutator(generator(alpha, f"x{i}"), generator(alpha, f"y{i}")))
    return Presentation(p, alpha, (w,), Family("f1", (p, k, d)), name=f"F1({p},{k},{d})")


def make_f2(p: int, k: int | None, d: int, z1: str, z2: str) -> Presentation:
    if d < 2:
        raise FamilyError("f2: d >= 2 required")
    _check_k(p, k, allow_inf=True, family="f2")
    alpha = _xy_names(d)
    for z in (z1, z2):
        if z not in alpha:
            raise FamilyError(f"f2: {z!r} is not one of {', '.join(alpha)}")
    if z1 == z2:
        raise FamilyError("f2: z1 and z2 must be distinct")
    if z1[1:] == z2[1:]:
        raise FamilyError(f"f2: {{z1, z2}} = {{{z1}, {z2}}} is a pair x_i, y_i of the first relator")
    r2 = commutator(generator(alpha, z1), generator(alpha, z2))
    return Presentation(p, alpha, (_demushkin_relator(alpha, p, k, d), r2),
                        Family("f2", (p, k, d, z1, z2)),
                        name=f"F2({p},{k or 'inf'},{d},{z1},{z2})")


def make_chain_amalgam(p: int, d: int) -> Presentation:
    """``<x1..yd | [x1,y1] = [x2,y2] = ... = [xd,yd]>`` in relator form."""
    if d < 3:
        raise FamilyError("chain: d >= 3 required")
    alpha = _xy_names(d)
    c = [commutator(generator(alpha, f"x{i}"), generator(alpha, f"y{i}")) for i in range(1, d + 1)]
    rels = tuple(multiply(invert(c[0]), c[i]) for i in range(1, d))
    return Presentation(p, alpha, rels, Family("chain", (p, d)), name=f"Chain({p},{d})")


def make_family(kind: str, *args) -> tuple[Presentation, Orientation | None]:
    """Dispatch on a family name; returns the presentation and, for
    Demushkin groups, the canonical orientation."""
    kind = kind.lower()
    if kind in ("demushkin", "demuskin", "dem"):
        return make_demushkin(*args)
    if kind == "f1":
        return make_f1(*args), None
    if kind == "f2":
        return make_f2(*args), None
    if kind in ("chain", "chain_amalgam"):
        return make_chain_amalgam(*args), None
    raise FamilyError(f"unknown family {kind!r}")


@dataclass(frozen=True)
class MinimalityReport:
    minimal: bool
    diagnostics: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.minimal


def validate_minimal(pres: Presentation) -> MinimalityReport:
    """Check that every relator lies in the Frattini subgroup ``F^p F'``."""
    diags = []
    for k, r in enumerate(pres.relators):
        for g, s in zip(pres.generators, exponent_sums(r)):
            if s % pres.p:
                diags.append(f"relator {k + 1} has exponent sum {s} in {g}, not divisible by {pres.p}")
    return MinimalityReport(not diags, tuple(diags))


def to_dsl(pres: Presentation, orientation: Orientation | None = None,
           comment: str | None = None) -> str:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"group {_dsl_name(pres.name)} {{")
    lines.append(f"  prime {pres.p};")
    lines.append("  generators " + " ".join(pres.generators) + ";")
    for r in pres.relators:
        lines.append(f"  relator {r};")
    if orientation is not None and not orientation.is_trivial():
        vals = ", ".join(f"{g} = {v}" for g, v in orientation.values.items() if v != 1)
        lines.append(f"  orientation {vals};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dsl_name(name: str) -> str:
    return "".join(c if c.isalnum() or c == "_" else "_" for c in name).strip("_") or "G"


# -- DSL -----------------------------------------------------------------------

class DslError(ValueError):
    """Syntax or semantic error in a presentation file, with line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


_FAMILY_RE = re.compile(r"^\s*family\s*:?\s*([A-Za-z_0-9]+)\s*\(([^)]*)\)\s*;?\s*$")


def parse_family_spec(text: str) -> tuple[Presentation, Orientation | None]:
    """Expand ``f1(3,1,2)``, ``family f2(3,1,2,x1,x2)`` or ``family:chain(3,3)``."""
    m = _FAMILY_RE.match(text) or _FAMILY_RE.match("family " + text)
    if not m:
        raise DslError(f"malformed family spec {text.strip()!r}")
    kind, raw = m.group(1), m.group(2)
    args: list = []
    for a in (s.strip() for s in raw.split(",") if s.strip()):
        if a.lower() in ("inf", "oo", "infinity", "∞"):
            args.append(None)
        elif re.fullmatch(r"[+-]?\d+", a):
            args.append(int(a))
        else:
            args.append(a)
    try:
        return make_family(kind, *args)
    except TypeError as exc:
        raise DslError(f"wrong number of parameters for family {kind!r}") from exc


_STMT = re.compile(r"\s*([A-Za-z_]+)\s*(.*?)\s*$", re.S)


def _tokenize_statements(text: str):
    """Split ``group NAME { ... }`` into ``(keyword, body, body_offset,
    keyword_offset)`` statements.  ``#`` starts a comment."""
    src = "\n".join(ln.split("#", 1)[0] for ln in text.splitlines())

    def locate(offset: int) -> tuple[int, int]:
        line = src.count("\n", 0, offset) + 1
        return line, offset - (src.rfind("\n", 0, offset) + 1) + 1

    m = re.search(r"\bgroup\s+([A-Za-z_]\w*)\s*\{", src)
    if not m:
        return None, [], locate
    close = src.find("}", m.end())
    if close < 0:
        raise DslError("unclosed '{'", *locate(m.end() - 1))
    if src[close + 1:].strip():
        raise DslError("trailing text after '}'", *locate(close + 1))
    pieces = src[m.end():close].split(";")
    if pieces[-1].strip():
        raise DslError("missing ';' before '}'", *locate(close))
    stmts = []
    offset = m.end()
    for piece in pieces:
        sm = _STMT.match(piece)
        if piece.strip():
            if not sm:
                raise DslError(f"cannot parse {piece.strip()!r}", *locate(offset))
            stmts.append((sm.group(1), sm.group(2), offset + sm.start(2), offset + sm.start(1)))
        offset += len(piece) + 1
    return m.group(1), stmts, locate


def parse_dsl(text: str) -> tuple[Presentation, Orientation | None]:
    """Parse the presentation file format::

        group G { prime 3; generators x1 y1; relator x1^3 [x1,y1];
                  orientation y1 = -1/2; }

    A file may instead (or inside the braces) contain a single
    ``family f1(3,1,2)`` line.
    """
    stripped = "\n".join(ln.split("#", 1)[0] for ln in text.splitlines()).strip()
    if stripped.startswith("family"):
        return parse_family_spec(stripped)
    name, stmts, locate = _tokenize_statements(text)
    if name is None:
        raise DslError("expected 'group <name> { ... }' or 'family ...'", 1, 1)
    prime = None
    gens: tuple[str, ...] | None = None
    rel_texts: list[tuple[str, int]] = []
    orient_text: tuple[str, int] | None = None
    family = None
    for kw, body, body_off, kw_off in stmts:
        if kw == "prime":
            if not re.fullmatch(r"\d+", body):
                raise DslError(f"bad prime {body!r}", *locate(body_off))
            prime = int(body)
        elif kw == "generators":
            gens = tuple(body.replace(",", " ").split())
            for g in gens:
                if not re.fullmatch(r"[A-Za-z_][\w()]*", g):
                    raise DslError(f"bad generator name {g!r}", *locate(body_off))
        elif kw == "relator":
            rel_texts.append((body, body_off))
        elif kw == "orientation":
            orient_text = (body, body_off)
        elif kw == "family":
            family = parse_family_spec("family " + body)
        else:
            raise DslError(f"unknown statement {kw!r}", *locate(kw_off))
    if family is not None:
        pres, theta = family
        if orient_text is not None:
            theta = _parse_orientation(orient_text, pres, locate)
        return pres, theta
    if prime is None:
        raise DslError("missing 'prime' statement", 1, 1)
    if gens is None:
        raise DslError("missing 'generators' statement", 1, 1)
    rels = []
    for body, off in rel_texts:
        try:
            w = parse_word(body, gens)
        except WordSyntaxError as exc:
            raise DslError(str(exc).split(" at column")[0], *locate(off + exc.position)) from exc
        if w.is_identity():
            raise DslError("relator reduces to the identity", *locate(off))
        rels.append(w)
    try:
        pres = Presentation(prime, gens, tuple(rels), Family("custom"), name=name)
    except ValueError as exc:
        raise DslError(str(exc), 1, 1) from exc
    theta = _parse_orientation(orient_text, pres, locate) if orient_text else None
    return pres, theta


def _parse_orientation(item, pres: Presentation, locate) -> Orientation:
    body, off = item
    vals = {}
    for part in body.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise DslError(f"expected 'gen = a/b' in orientation, got {part.strip()!r}", *locate(off))
        g, v = (s.strip() for s in part.split("=", 1))
        if g not in pres.generators:
            raise DslError(f"orientation names unknown generator {g!r}", *locate(off))
        try:
            vals[g] = Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise DslError(f"bad orientation value {v!r}", *locate(off)) from exc
    try:
        return Orientation(pres.p, vals)
    except ValueError as exc:
        raise DslError(str(exc), *locate(off)) from exc
