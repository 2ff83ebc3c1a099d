"""Reidemeister-Schreier rewriting for normal subgroups of index p.

The subgroup is ``U = ker(phi)`` for a character ``phi: G -> F_p``.  We pick
the first generator ``t`` with ``phi(t) != 0``, rescale so ``phi(t) = 1``,
and use the coset representatives ``t^-h`` (h = 0..p-1).  With these the
Schreier generators are

* ``u = t^p``, and
* ``g(h) = t^-h g t^h'`` for every other generator ``g``, where
  ``h' = h - phi(g) mod p``; when ``phi(g) = 0`` this is the conjugate
  ``g^(t^h)``.

Rewriting a relator ``r`` starting from coset ``h`` gives the rewrite of
``t^-h r t^h = r^(t^h)``, so the ``p`` relators per parent relator are
exactly the conjugates by ``t^0, ..., t^(p-1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .linalg import nullspace_mod_p, rank_mod_p, rref, smith_int
from .presentations import Family, Orientation, Presentation
from .words import Word, exponent_sums, power, substitute

__all__ = [
    "SubgroupPresentation",
    "AbelianInvariants",
    "normalize_character",
    "characters",
    "enumerate_index_p",
    "rewrite_index_p",
    "rewrite_tower",
    "abelianization",
    "h1_dimension",
    "euler_characteristic_sub",
    "restrict_orientation",
    "to_parent_word",
]


def _as_presentation(obj) -> Presentation:
    return obj.presentation if isinstance(obj, SubgroupPresentation) else obj


def normalize_character(phi: Sequence[int], p: int) -> tuple[int, ...]:
    """Scale ``phi`` so its first nonzero entry is 1."""
    phi = [int(a) % p for a in phi]
    lead = next((a for a in phi if a), 0)
    if not lead:
        return tuple(phi)
    inv = pow(lead, -1, p)
    return tuple(a * inv % p for a in phi)


def characters(pres) -> np.ndarray:
    """Basis (rows) of ``H^1 = Hom(G, F_p)`` inside ``F_p^n``."""
    pres = _as_presentation(pres)
    p = pres.p
    if not pres.relators:
        return np.eye(pres.n, dtype=np.int64)
    M = np.array([[s % p for s in exponent_sums(r)] for r in pres.relators], dtype=np.int64)
    return nullspace_mod_p(M, p, ncols=pres.n)


def enumerate_index_p(pres) -> list[tuple[int, ...]]:
    """One character per index-p normal subgroup, normalized (leading
    nonzero coefficient 1) and sorted lexicographically.

    For a minimal presentation these are all ``(p^n - 1)/(p - 1)`` lines of
    ``F_p^n``; in general they are the lines of the character space.
    """
    pres = _as_presentation(pres)
    p = pres.p
    basis, _, k = rref(characters(pres), p)
    basis = [[int(x) for x in row] for row in basis[:k]]
    # with an RREF basis the first nonzero coefficient of a combination is
    # its first nonzero entry, so fixing it to 1 lists every line once
    out = []
    for lead in range(k):
        for tail in product(range(p), repeat=k - lead - 1):
            coeffs = (1,) + tail
            v = [0] * pres.n
            for c, b in zip(coeffs, basis[lead:]):
                if c:
                    v = [(x + c * y) % p for x, y in zip(v, b)]
            out.append(tuple(v))
    return sorted(out)


@dataclass(frozen=True)
class SubgroupPresentation:
    parent: Presentation
    phi: tuple[int, ...]
    transversal: str  # name of t
    expressions: tuple[Word, ...]  # Schreier generators as parent words
    presentation: Presentation
    chain: tuple[tuple[int, ...], ...] = field(default=())  # characters from the root down
    root: Presentation | None = None
    root_expressions: tuple[Word, ...] = ()  # Schreier generators as root words

    @property
    def generators(self) -> tuple[str, ...]:
        return self.presentation.generators

    @property
    def relators(self) -> tuple[Word, ...]:
        return self.presentation.relators

    @property
    def n(self) -> int:
        return self.presentation.n

    @property
    def index(self) -> int:
        return self.parent.p ** len(self.chain)


def _power_name(taken: Sequence[str]) -> str:
    for name in ("u", "v", "w"):
        if name not in taken:
            return name
    k = 2
    while f"u{k}" in taken:
        k += 1
    return f"u{k}"


def rewrite_index_p(pres, phi: Sequence[int]) -> SubgroupPresentation:
    parent_sub = pres if isinstance(pres, SubgroupPresentation) else None
    pres = _as_presentation(pres)
    p, n = pres.p, pres.n
    if len(phi) != n:
        raise ValueError(f"character has {len(phi)} entries, expected {n}")
    phi = [int(a) % p for a in phi]
    if not any(phi):
        raise ValueError("phi = 0 does not define an index-p subgroup")
    for k, r in enumerate(pres.relators):
        if sum(a * s for a, s in zip(phi, exponent_sums(r))) % p:
            raise ValueError(f"phi does not vanish on relator {k + 1}; not a character of G")
    ti = next(i for i, a in enumerate(phi) if a)
    scale = pow(phi[ti], -1, p)
    phi = [a * scale % p for a in phi]
    t_name = pres.generators[ti]

    others = [i for i in range(n) if i != ti]
    names = [_power_name(pres.generators)]
    for i in others:
        names += [f"{pres.generators[i]}({h})" for h in range(p)]
    names_t = tuple(names)
    # column of Schreier generator (g, h) in the new alphabet
    col = {(i, h): 1 + k * p + h for k, i in enumerate(others) for h in range(p)}

    alpha = pres.generators
    t = Word(((ti, 1),), alpha)
    exprs = [power(t, p)]
    for i in others:
        for h in range(p):
            h2 = (h - phi[i]) % p
            exprs.append(Word(((ti, -h), (i, 1), (ti, h2)), alpha))

    def gamma(h: int, i: int) -> int | None:
        """Column of the Schreier generator for letter x_i read at coset h."""
        if i == ti:
            return 0 if h == 0 else None
        return col[(i, h)]

    rels = []
    for r in pres.relators:
        for h0 in range(p):
            out: list[tuple[int, int]] = []
            h = h0
            for i, e in r.syllables:
                step = phi[i]
                if e > 0:
                    for _ in range(e):
                        c = gamma(h, i)
                        if c is not None:
                            out.append((c, 1))
                        h = (h - step) % p
                else:
                    for _ in range(-e):
                        h = (h + step) % p
                        c = gamma(h, i)
                        if c is not None:
                            out.append((c, -1))
            if h != h0:
                raise AssertionError("relator did not return to its coset")
            rels.append(Word(tuple(out), names_t))
    chain = (parent_sub.chain if parent_sub else ()) + (tuple(phi),)
    root = parent_sub.root if parent_sub and parent_sub.root is not None else (
        parent_sub.parent if parent_sub else pres)
    if parent_sub is not None:
        root_exprs = tuple(substitute(e, parent_sub.root_expressions) for e in exprs)
    else:
        root_exprs = tuple(exprs)
    sub_pres = Presentation(p, names_t, tuple(rels),
                            Family("subgroup", (str(pres.family), tuple(phi))),
                            name=f"{pres.name}_ker")
    return SubgroupPresentation(pres, tuple(phi), t_name, tuple(exprs), sub_pres,
                                chain, root, root_exprs)


def rewrite_tower(pres, phis: Sequence[Sequence[int]]) -> SubgroupPresentation:
    if not phis:
        raise ValueError("empty tower")
    sub = rewrite_index_p(pres, phis[0])
    for phi in phis[1:]:
        sub = rewrite_index_p(sub, phi)
    return sub


def to_parent_word(sub: SubgroupPresentation, w: Word) -> Word:
    """Map a word in the Schreier generators back to the parent group."""
    return substitute(w, sub.expressions)


@dataclass(frozen=True)
class AbelianInvariants:
    free_rank: int
    torsion: tuple[int, ...]  # divisors > 1, in divisibility order

    @property
    def torsion_free(self) -> bool:
        return not self.torsion

    def __str__(self) -> str:
        parts = [f"Z_p^{self.free_rank}"] if self.free_rank else []
        counts: dict[int, int] = {}
        for d in self.torsion:
            counts[d] = counts.get(d, 0) + 1
        parts += [f"(Z/{d})^{c}" if c > 1 else f"Z/{d}" for d, c in sorted(counts.items())]
        return " x ".join(parts) or "0"


def abelianization(pres) -> AbelianInvariants:
    """``G^ab`` as a pro-p group: Smith form of the relator exponent sums.

    Only the p-parts of the elementary divisors survive pro-p completion.
    """
    pres = _as_presentation(pres)
    p, n = pres.p, pres.n
    if not pres.relators:
        return AbelianInvariants(n, ())
    divs = smith_int([exponent_sums(r) for r in pres.relators])
    rank = sum(1 for d in divs if d)
    torsion = []
    for d in divs:
        if d:
            pp = 1
            while d % p == 0:
                d //= p
                pp *= p
            if pp > 1:
                torsion.append(pp)
    return AbelianInvariants(n - rank, tuple(sorted(torsion)))


def h1_dimension(pres) -> int:
    """``dim H^1 = dim G^ab / p`` (a minimal generator count)."""
    pres = _as_presentation(pres)
    if not pres.relators:
        return pres.n
    M = [[s % pres.p for s in exponent_sums(r)] for r in pres.relators]
    return pres.n - rank_mod_p(M, pres.p)


def euler_characteristic_sub(pres) -> tuple[int, int, int]:
    """``(E, dim H^1, dim H^2)`` for a (possibly non-minimal) presentation.

    ``dim H^1`` comes from the abelianization mod p; each redundant
    generator is eliminated together with one relator, so
    ``dim H^2 = |R| - (|X| - dim H^1)``, which is exact when the reduced
    presentation is minimal (as for the subgroups considered here, which
    inherit cohomological dimension 2).
    """
    pres = _as_presentation(pres)
    h1 = h1_dimension(pres)
    h2 = len(pres.relators) - (pres.n - h1)
    return 1 - h1 + h2, h1, h2


def restrict_orientation(theta: Orientation, sub: SubgroupPresentation) -> Orientation:
    """Exact values of ``theta`` (an orientation of ``sub.parent``) on the
    Schreier generators.  For towers, restrict one level at a time."""
    unknown = set(theta.values) - set(sub.parent.generators)
    if unknown:
        raise ValueError(f"orientation names generators outside the parent: {sorted(unknown)}")
    vals = {name: theta.of_word(w) for name, w in zip(sub.generators, sub.expressions)}
    return Orientation(theta.p, vals)
