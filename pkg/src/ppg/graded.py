"""Graded algebra of the initial forms: Groebner bases, Hilbert series, duals.

The degree-2 Magnus parts of the relators span a space ``R`` of quadratic
tensors and define ``A = T(V) / (R)``.  Dimensions of ``A`` come from a
homogeneous noncommutative Groebner basis truncated at degree ``N``: the
degree-k dimension is the number of words of length k that contain no
leading word of the basis, counted with a small automaton.

Orders are degree-lexicographic.  An order is given as a permutation of the
generator indices listed from greatest to least letter.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Sequence

import numpy as np

from .cohomology import cup_table, quadraticity_report
from .linalg import nullspace_mod_p, rref
from .presentations import Presentation
from .words import magnus_truncated

__all__ = [
    "Unsupported",
    "QuadraticAlgebra",
    "HilbertPrefix",
    "GroebnerBasis",
    "MildnessStatus",
    "MildnessVerdict",
    "KoszulVerdict",
    "initial_forms",
    "groebner_truncated",
    "hilbert_prefix",
    "hilbert_prefix_linear",
    "target_series",
    "mildness_check",
    "quadratic_dual",
    "koszul_check",
    "dual_matches_cohomology",
    "lie_presentation_report",
    "named_order",
]


class Unsupported(ValueError):
    pass


@dataclass(frozen=True)
class QuadraticAlgebra:
    p: int
    generators: tuple[str, ...]
    relations: tuple[tuple[tuple[int, ...], ...], ...]  # independent n x n matrices mod p
    dropped: int = 0  # relations removed as linearly dependent

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def r(self) -> int:
        return len(self.relations)

    def flat(self) -> np.ndarray:
        n = self.n
        if not self.relations:
            return np.zeros((0, n * n), dtype=np.int64)
        return np.array(self.relations, dtype=np.int64).reshape(self.r, n * n) % self.p

    @classmethod
    def from_matrices(cls, p: int, generators: Sequence[str], mats) -> "QuadraticAlgebra":
        """Keep an echelon basis of the span of ``mats``."""
        n = len(generators)
        mats = [np.array(m, dtype=np.int64).reshape(n, n) % p for m in mats]
        if not mats:
            return cls(p, tuple(generators), ())
        R, _, rank = rref([m.reshape(-1) for m in mats], p)
        rels = tuple(tuple(tuple(int(x) for x in row) for row in R[k].reshape(n, n)) for k in range(rank))
        return cls(p, tuple(generators), rels, len(mats) - rank)


@dataclass(frozen=True)
class HilbertPrefix:
    coefficients: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        return self.coefficients[k]

    def __len__(self) -> int:
        return len(self.coefficients)


def _upper(name: str) -> str:
    return name[:1].upper() + name[1:]


def initial_forms(pres: Presentation) -> QuadraticAlgebra:
    """Degree-2 Magnus parts of the relators (squares included for p = 2)."""
    p, n = pres.p, pres.n
    mats = []
    for k, r in enumerate(pres.relators):
        s = magnus_truncated(r, p, 2)
        if any(s[(i,)] for i in range(n)):
            raise Unsupported(f"relator {k + 1} is not in the Frattini subgroup")
        m = [[s[(i, j)] for j in range(n)] for i in range(n)]
        if not any(any(row) for row in m):
            raise Unsupported(f"relator {k + 1} has initial form of degree >= 3")
        mats.append(m)
    return QuadraticAlgebra.from_matrices(p, tuple(_upper(g) for g in pres.generators), mats)


# -- noncommutative polynomials ---------------------------------------------------------
# A polynomial is a dict {word: coefficient}; words are tuples of letter ranks,
# so that deglex comparison of equal-length words is plain tuple comparison.

def _monic(poly: dict, p: int) -> dict:
    lead = max(poly)
    inv = pow(poly[lead], -1, p)
    return {w: c * inv % p for w, c in poly.items()}


def _add_scaled(acc: dict, poly: dict, factor: int, left: tuple, right: tuple, p: int) -> None:
    for w, c in poly.items():
        key = left + w + right
        v = (acc.get(key, 0) + factor * c) % p
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)


@dataclass
class GroebnerBasis:
    p: int
    n: int
    order: tuple[int, ...]  # generator indices, greatest first
    degree: int  # complete up to this degree
    elements: list[dict] = field(default_factory=list)
    leads: dict = field(default_factory=dict)  # leading word -> element

    def reduce(self, poly: dict) -> dict:
        p = self.p
        poly = dict(poly)
        lengths = sorted({len(w) for w in self.leads})
        out: dict = {}
        while poly:
            w = max(poly)
            c = poly[w]
            hit = None
            for L in lengths:
                for s in range(len(w) - L + 1):
                    g = self.leads.get(w[s:s + L])
                    if g is not None:
                        hit = (g, w[:s], w[s + L:])
                        break
                if hit:
                    break
            if hit is None:
                out[w] = c
                del poly[w]
            else:
                g, left, right = hit
                _add_scaled(poly, g, -c, left, right, p)
        return out

    def leading_words(self) -> list[tuple[int, ...]]:
        return sorted(self.leads)


def named_order(name: str, generators: Sequence[str]) -> tuple[int, ...]:
    """``decl``: first generator greatest; ``rev``: last generator greatest
    (the order under which chain relations lead with ``Y_i X_i``);
    ``paired``: ``y_i > x_i`` inside each pair, pairs in declaration order."""
    n = len(generators)
    if name == "decl":
        return tuple(range(n))
    if name == "rev":
        return tuple(reversed(range(n)))
    if name == "paired":
        out = []
        for i in range(0, n - 1, 2):
            out += [i + 1, i]
        if n % 2:
            out.append(n - 1)
        return tuple(out)
    raise ValueError(f"unknown order {name!r} (decl, rev, paired)")


def _ranks(order: Sequence[int], n: int) -> list[int]:
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the generator indices")
    rank = [0] * n
    for pos, g in enumerate(order):
        rank[g] = n - 1 - pos  # greatest letter gets the largest rank
    return rank


def _relation_polys(A: QuadraticAlgebra, rank: list[int]) -> list[dict]:
    polys = []
    for M in A.relations:
        poly = {}
        for i in range(A.n):
            for j in range(A.n):
                if M[i][j] % A.p:
                    poly[(rank[i], rank[j])] = M[i][j] % A.p
        polys.append(poly)
    return polys


def _interreduce_new(G: GroebnerBasis, polys: list[dict]) -> list[dict]:
    """Reduce same-degree polynomials against G and against each other."""
    p = G.p
    added: list[dict] = []
    for f in polys:
        f = G.reduce(f)
        for g in added:
            lead = max(g)
            if lead in f:
                _add_scaled(f, g, -f[lead], (), (), p)
        if f:
            # keep distinct leading words among the new elements
            while True:
                lead = max(f)
                clash = next((g for g in added if max(g) == lead), None)
                if clash is None:
                    break
                _add_scaled(f, clash, -f[lead], (), (), p)
                if not f:
                    break
            if f:
                f = _monic(f, p)
                added.append(f)
                G.leads[max(f)] = f
                G.elements.append(f)
    return added


def groebner_truncated(A: QuadraticAlgebra, order: Sequence[int] | None = None, N: int = 6) -> GroebnerBasis:
    """Homogeneous two-sided Groebner basis, complete through degree ``N``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    n, p = A.n, A.p
    order = tuple(order) if order is not None else tuple(range(n))
    rank = _ranks(order, n)
    G = GroebnerBasis(p, n, order, 2)
    _interreduce_new(G, _relation_polys(A, rank))
    for d in range(3, N + 1):
        spolys = []
        elems = list(G.elements)
        for f in elems:
            a = max(f)
            for g in elems:
                b = max(g)
                for k in range(1, min(len(a), len(b))):
                    if len(a) + len(b) - k != d or a[-k:] != b[:k]:
                        continue
                    s: dict = {}
                    _add_scaled(s, f, 1, (), b[k:], p)
                    _add_scaled(s, g, -1, a[:-k], (), p)
                    if s:
                        spolys.append(s)
        _interreduce_new(G, spolys)
        G.degree = d
    return G


def _count_normal_words(leads: Sequence[tuple[int, ...]], n: int, N: int) -> list[int]:
    """Words of each length <= N over n letters with no factor in ``leads``
    (Aho-Corasick automaton + dynamic programming)."""
    goto: list[dict[int, int]] = [{}]
    bad = [False]
    for w in leads:
        s = 0
        for a in w:
            if a not in goto[s]:
                goto.append({})
                bad.append(False)
                goto[s][a] = len(goto) - 1
            s = goto[s][a]
        bad[s] = True
    fail = [0] * len(goto)
    delta = [[0] * n for _ in goto]
    queue = deque()
    for a in range(n):
        t = goto[0].get(a)
        if t is None:
            delta[0][a] = 0
        else:
            delta[0][a] = t
            fail[t] = 0
            queue.append(t)
    while queue:
        s = queue.popleft()
        bad[s] = bad[s] or bad[fail[s]]
        for a in range(n):
            t = goto[s].get(a)
            if t is None:
                delta[s][a] = delta[fail[s]][a]
            else:
                fail[t] = delta[fail[s]][a]
                delta[s][a] = t
                queue.append(t)
    counts = [1]
    vec = {0: 1}
    for _ in range(N):
        nxt: dict[int, int] = {}
        for s, c in vec.items():
            for a in range(n):
                t = delta[s][a]
                if not bad[t]:
                    nxt[t] = nxt.get(t, 0) + c
        vec = nxt
        counts.append(sum(vec.values()))
    return counts


def hilbert_prefix(A: QuadraticAlgebra, N: int, order: Sequence[int] | None = None) -> HilbertPrefix:
    if N < 0:
        raise ValueError("N must be >= 0")
    if N < 2 or not A.relations:
        return HilbertPrefix(tuple(A.n ** k for k in range(N + 1)))
    G = groebner_truncated(A, order, N)
    return HilbertPrefix(tuple(_count_normal_words(G.leading_words(), A.n, N)))


def hilbert_prefix_linear(A: QuadraticAlgebra, N: int) -> HilbertPrefix:
    """Independent dimension count: ``dim A_d = n^d - rank(sum_i V^i R V^(d-2-i))``
    by sparse elimination over F_p.  Exponential in ``d``; meant as an oracle
    for small degrees."""
    n, p = A.n, A.p
    rel_terms = []
    for M in A.relations:
        rel_terms.append([((i, j), M[i][j] % p) for i in range(n) for j in range(n) if M[i][j] % p])
    out = [1]
    for d in range(1, N + 1):
        if d < 2:
            out.append(n)
            continue
        pivots: dict[tuple, dict] = {}
        for terms in rel_terms:
            for pos in range(d - 1):
                for left in product(range(n), repeat=pos):
                    for right in product(range(n), repeat=d - 2 - pos):
                        row = {left + w + right: c for w, c in terms}
                        while row:
                            lead = max(row)
                            piv = pivots.get(lead)
                            if piv is None:
                                inv = pow(row[lead], -1, p)
                                pivots[lead] = {w: c * inv % p for w, c in row.items()}
                                break
                            f = row[lead]
                            for w, c in piv.items():
                                v = (row.get(w, 0) - f * c) % p
                                if v:
                                    row[w] = v
                                else:
                                    row.pop(w, None)
        out.append(n ** d - len(pivots))
    return HilbertPrefix(tuple(out))


def target_series(n: int, r: int, N: int) -> HilbertPrefix:
    """Coefficients of ``1/(1 - n t + r t^2)`` through ``t^N``."""
    h = [1, n]
    for k in range(2, N + 1):
        h.append(n * h[k - 1] - r * h[k - 2])
    return HilbertPrefix(tuple(h[:N + 1]))


class MildnessStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"


@dataclass(frozen=True)
class MildnessVerdict:
    status: MildnessStatus
    degree: int
    prefix: HilbertPrefix
    target: HilbertPrefix
    order: str | None
    first_mismatch: int | None
    certified: bool  # leading words of the relations have no overlaps

    def as_json(self) -> dict:
        return {"status": self.status.value, "degree": self.degree,
                "hilbert_prefix": list(self.prefix.coefficients),
                "target": list(self.target.coefficients), "order": self.order,
                "first_mismatch": self.first_mismatch,
                "combinatorially_free_leads": self.certified}


def _no_overlaps(words: Sequence[tuple[int, ...]]) -> bool:
    for a in words:
        for b in words:
            for k in range(1, min(len(a), len(b))):
                if a[-k:] == b[:k]:
                    return False
            if a != b and any(b[s:s + len(a)] == a for s in range(len(b) - len(a) + 1)):
                return False
    return True


def mildness_check(pres: Presentation, N: int = 8, orders: Sequence[str] = ("decl", "rev", "paired")) -> MildnessVerdict:
    """Compare the Hilbert prefix with ``1/(1 - n t + r t^2)``.

    The Hilbert series does not depend on the order; the order only affects
    whether the leading words of the relations are overlap-free, which
    certifies strong freeness outright.  The first order giving such leading
    words is reported, else the first one tried.
    """
    A = initial_forms(pres)
    target = target_series(A.n, A.r, N)
    chosen = None
    for name in orders:
        G = groebner_truncated(A, named_order(name, pres.generators), 2)
        if _no_overlaps(G.leading_words()):
            chosen = name
            break
    order_name = chosen or orders[0]
    prefix = hilbert_prefix(A, N, named_order(order_name, pres.generators))
    mismatch = next((k for k in range(N + 1) if prefix[k] != target[k]), None)
    status = MildnessStatus.PASS if mismatch is None else MildnessStatus.FAIL
    return MildnessVerdict(status, N, prefix, target, order_name, mismatch, chosen is not None)


# -- duality ---------------------------------------------------------------------------------

def quadratic_dual(A: QuadraticAlgebra) -> QuadraticAlgebra:
    """``A^! = T(V*) / (R^perp)`` with ``<x (x) y, xi (x) eta> = xi(x) eta(y)``."""
    n = A.n
    if A.relations:
        perp = nullspace_mod_p(A.flat(), A.p, ncols=n * n)
    else:
        perp = np.eye(n * n, dtype=np.int64)
    return QuadraticAlgebra.from_matrices(A.p, tuple(f"{g}*" for g in A.generators),
                                          [row.reshape(n, n) for row in perp])


@dataclass(frozen=True)
class KoszulVerdict:
    consistent: bool
    degree: int
    algebra: HilbertPrefix
    dual: HilbertPrefix
    first_failure: int | None

    def as_json(self) -> dict:
        return {"consistent_to_degree": self.degree if self.consistent else self.first_failure - 1,
                "consistent": self.consistent, "degree": self.degree,
                "hilbert_algebra": list(self.algebra.coefficients),
                "hilbert_dual": list(self.dual.coefficients),
                "note": "numerical identity H_A(t) H_A!(-t) = 1; necessary for Koszulity, not a proof"}


def koszul_check(A: QuadraticAlgebra, N: int = 8, order: Sequence[int] | None = None) -> KoszulVerdict:
    h = hilbert_prefix(A, N, order)
    dual = quadratic_dual(A)
    hd = hilbert_prefix(dual, N, order)
    failure = None
    for m in range(1, N + 1):
        if sum((-1) ** k * hd[k] * h[m - k] for k in range(m + 1)):
            failure = m
            break
    return KoszulVerdict(failure is None, N, h, hd, failure)


def dual_matches_cohomology(pres: Presentation, table=None) -> bool:
    """Compare ``R^perp`` (from the Magnus initial forms) with the kernel of
    the cup product ``H^1 (x) H^1 -> H^2`` (from the cup table)."""
    report = quadraticity_report(pres)
    if report.ordering is None:
        raise Unsupported("quadraticity hypotheses not met: " + report.message)
    table = table if table is not None else cup_table(pres)
    p, n = pres.p, pres.n
    perp = quadratic_dual(initial_forms(pres)).flat()
    kernel = table.multiplication_kernel() % p
    if len(perp) != len(kernel):
        return False
    r_perp = rref(perp, p)
    r_ker = rref(kernel, p)
    return r_perp[2] == r_ker[2] and np.array_equal(r_perp[0][:r_perp[2]], r_ker[0][:r_ker[2]])


def _lie_terms(M, names: Sequence[str], p: int) -> str:
    n = len(names)
    M = [[x % p for x in row] for row in M]
    antisym = all((M[i][j] + M[j][i]) % p == 0 for i in range(n) for j in range(n) if i != j)
    parts = []

    def coef(c: int) -> tuple[str, str]:
        if c > p // 2:
            c -= p
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        return sign, ("" if mag == 1 else f"{mag}")

    if antisym:
        for i in range(n):
            if M[i][i]:
                s, m = coef(M[i][i])
                parts.append((s, f"{m}{names[i]}^[{p}]" if p == 2 else f"{m}{names[i]}^2"))
        for i in range(n):
            for j in range(i + 1, n):
                if M[i][j]:
                    s, m = coef(M[i][j])
                    parts.append((s, f"{m}[{names[i]},{names[j]}]"))
    else:
        for i in range(n):
            for j in range(n):
                if M[i][j]:
                    s, m = coef(M[i][j])
                    parts.append((s, f"{m}{names[i]}{names[j]}"))
    if not parts:
        return "0"
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, t in parts[1:]:
        text += f" {s} {t}"
    return text


def lie_presentation_report(pres: Presentation) -> dict:
    """Restricted-Lie presentation read off the initial forms, in bracket
    notation (relations given as they come from the relators, not reduced)."""
    p = pres.p
    names = [_upper(g) for g in pres.generators]
    lines = []
    for k, r in enumerate(pres.relators):
        s = magnus_truncated(r, p, 2)
        M = [[s[(i, j)] for j in range(pres.n)] for i in range(pres.n)]
        if not any(any(row) for row in M):
            raise Unsupported(f"relator {k + 1} has initial form of degree >= 3")
        lines.append(_lie_terms(M, names, p) + " = 0")
    text = "<" + ", ".join(names) + (" | " + ", ".join(lines) if lines else "") + ">"
    return {"generators": names, "relations": lines, "display": text}
