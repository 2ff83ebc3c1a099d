"""Kummerianity of oriented pro-p groups through the theta-twisted cocycle.

Sending a generator ``g`` to the affine map ``v -> theta(g) v + e_g`` of
``Z_p^n`` defines a homomorphism ``F -> Z_p^n x| (1 + pZ_p)`` whose
translation part is the cocycle ``D`` with ``D(uv) = D(u) + theta(u) D(v)``.
Its kernel is ``K_theta(F)``.  For a presentation ``F/R`` with ``theta``
trivial on the relators,

    Ker(theta) / K_theta(G)  =  M0 / W,

where ``M0 = D(Ker theta)`` and ``W`` is the span of the ``D(r)``.  Writing
``f(v) = sum_i v_i (theta(g_i) - 1)`` one has ``f(D(w)) = theta(w) - 1``,
so ``M0 = ker f``.  If ``g0`` minimizes ``v_p(theta(g) - 1)`` then the
vectors ``e_i - c_i e_0`` with ``c_i = (theta(g_i) - 1)/(theta(g0) - 1)``
(all p-integral) form a basis of ``M0``, and the coordinates of a vector
of ``M0`` in that basis are simply its entries off the ``g0`` column.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .linalg import DEFAULT_PRECISION, rank_rational, smith_mod_pN, to_residue, valuation
from .presentations import Orientation, Presentation
from .subgroups import (SubgroupPresentation, enumerate_index_p,
                        restrict_orientation, rewrite_index_p)
from .words import Word

__all__ = [
    "TwistedDerivative",
    "KummerStatus",
    "KummerVerdict",
    "KThetaModule",
    "CycloStatus",
    "CyclotomicityResult",
    "twisted_derivative",
    "twisted_derivative_exact",
    "ktheta_module",
    "is_kummerian",
    "candidate_orientation",
    "cyclotomicity_search",
    "check_orientation",
]


def _pres(obj) -> Presentation:
    return obj.presentation if isinstance(obj, SubgroupPresentation) else obj


def check_orientation(pres: Presentation, theta: Orientation) -> None:
    """Raise unless ``theta`` is an orientation of the presented group."""
    if theta.p != pres.p:
        raise ValueError("orientation and presentation use different primes")
    extra = set(theta.values) - set(pres.generators)
    if extra:
        raise ValueError(f"orientation names unknown generators {sorted(extra)}")
    for k, r in enumerate(pres.relators):
        if theta.of_word(r) != 1:
            raise ValueError(f"theta is not trivial on relator {k + 1}: theta(r) = {theta.of_word(r)}")


@dataclass(frozen=True)
class TwistedDerivative:
    theta: Orientation
    precision: int
    vector: tuple[int, ...]  # residues mod p^N

    def is_zero(self) -> bool:
        return not any(self.vector)


def _geometric(lam, m: int, mod=None):
    """``1 + lam + ... + lam^(m-1)`` by binary splitting (exact if ``mod`` is None)."""
    total, power_, acc = 0, 1, lam  # acc = lam^(2^k), block = sum of 2^k terms
    block = 1
    while m:
        if m & 1:
            total = total + power_ * block
            power_ = power_ * acc
            if mod:
                total %= mod
                power_ %= mod
        m >>= 1
        if m:
            block = block * (1 + acc)
            acc = acc * acc
            if mod:
                block %= mod
                acc %= mod
    return total


class _Cocycle:
    """Cached modular data for evaluating ``D`` on many words."""

    def __init__(self, generators: Sequence[str], theta: Orientation, N: int):
        self.p = theta.p
        self.N = N
        self.mod = theta.p ** N
        self.lam = [theta[g] for g in generators]
        self.lam_res = [to_residue(l, self.p, N) for l in self.lam]
        self._cache: dict[tuple[int, int], tuple[int, int]] = {}

    def syllable(self, g: int, e: int) -> tuple[int, int]:
        """``(theta(g^e), coefficient of e_g in D(g^e))`` mod p^N."""
        key = (g, e)
        hit = self._cache.get(key)
        if hit is None:
            lam, mod = self.lam_res[g], self.mod
            m = abs(e)
            geo = _geometric(lam, m, mod)
            lam_m = pow(lam, m, mod)
            if e < 0:
                inv = pow(lam_m, -1, mod)
                hit = (inv, -geo * inv % mod)
            else:
                hit = (lam_m, geo)
            self._cache[key] = hit
        return hit

    def __call__(self, w: Word) -> list[int]:
        mod = self.mod
        out = [0] * len(self.lam)
        th = 1
        for g, e in w.syllables:
            lam_e, geo = self.syllable(g, e)
            out[g] = (out[g] + th * geo) % mod
            th = th * lam_e % mod
        return out


def twisted_derivative(w: Word, theta: Orientation, N: int = DEFAULT_PRECISION) -> TwistedDerivative:
    """``D(w)`` in ``(Z/p^N)^n``: ``D(x_i) = e_i``, ``D(uv) = D(u) + theta(u) D(v)``."""
    return TwistedDerivative(theta, N, tuple(_Cocycle(w.alphabet, theta, N)(w)))


def twisted_derivative_exact(w: Word, theta: Orientation) -> list[Fraction]:
    """Exact rational ``D(w)``."""
    out = [Fraction(0)] * len(w.alphabet)
    th = Fraction(1)
    for g, e in w.syllables:
        lam = theta[w.alphabet[g]]
        m = abs(e)
        if lam == 1:
            out[g] += th * e
            continue
        lam_m = lam ** m
        geo = (lam_m - 1) / (lam - 1)
        if e > 0:
            out[g] += th * geo
            th *= lam_m
        else:
            th /= lam_m
            out[g] -= th * geo
    return out


@dataclass(frozen=True)
class KThetaModule:
    """``M0`` and ``W`` for ``Ker(theta)/K_theta(G) = M0/W``."""

    p: int
    precision: int
    g0: int | None  # None when theta is trivial (then M0 is everything)
    m0_basis: tuple[tuple[int, ...], ...]
    w_rows: tuple[tuple[int, ...], ...]  # D(r) for each relator, mod p^N

    def coordinates(self) -> list[list[int]]:
        """``W`` expressed in the basis of ``M0``."""
        if self.g0 is None:
            return [list(r) for r in self.w_rows]
        return [[x for j, x in enumerate(r) if j != self.g0] for r in self.w_rows]


def _select_g0(pres: Presentation, theta: Orientation) -> int | None:
    best = None
    for i, g in enumerate(pres.generators):
        v = valuation(theta[g] - 1, pres.p)
        if v != float("inf") and (best is None or v < best[0]):
            best = (v, i)
    return None if best is None else best[1]


def ktheta_module(pres, theta: Orientation, N: int = DEFAULT_PRECISION) -> KThetaModule:
    pres = _pres(pres)
    check_orientation(pres, theta)
    p, n = pres.p, pres.n
    g0 = _select_g0(pres, theta)
    if g0 is None:
        basis = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    else:
        denom = theta[pres.generators[g0]] - 1
        basis = []
        for i, g in enumerate(pres.generators):
            if i == g0:
                continue
            c = (theta[g] - 1) / denom
            vec = [0] * n
            vec[i] = 1
            vec[g0] = to_residue(-c, p, N)
            basis.append(tuple(vec))
        basis = tuple(basis)
    D = _Cocycle(pres.generators, theta, N)
    rows = tuple(tuple(D(r)) for r in pres.relators)
    return KThetaModule(p, N, g0, basis, rows)


class KummerStatus(str, Enum):
    KUMMERIAN = "KUMMERIAN"
    NOT_KUMMERIAN = "NOT_KUMMERIAN"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class KummerVerdict:
    status: KummerStatus
    reason: str
    torsion: tuple[int, ...] = ()  # valuations of the torsion divisors of M0/W
    free_rank: int | None = None
    witness_valuation: int | None = None
    witness_combination: tuple[int, ...] | None = None  # coefficients of the relators
    precision: int = DEFAULT_PRECISION
    model_based: bool = False

    def as_json(self) -> dict:
        out = {"status": self.status.value, "reason": self.reason,
               "torsion_valuations": list(self.torsion), "free_rank": self.free_rank,
               "precision": self.precision}
        if self.witness_valuation is not None:
            out["witness_valuation"] = self.witness_valuation
            out["witness_combination"] = list(self.witness_combination or ())
        if self.model_based:
            out["model_based"] = True
        return out


def is_kummerian(pres, theta: Orientation, N: int = DEFAULT_PRECISION) -> KummerVerdict:
    """Decide whether ``(G, theta)`` is Kummerian from the torsion of ``M0/W``."""
    P = _pres(pres)
    family = P.family.kind
    model_based = family == "custom"
    mod = ktheta_module(P, theta, N)
    coords = mod.coordinates()
    dim = P.n - (0 if mod.g0 is None else 1)
    exact_rows = None
    if all(not any(r) for r in mod.w_rows):
        exact_rows = [twisted_derivative_exact(r, theta) for r in P.relators]
        if all(x == 0 for row in exact_rows for x in row):
            return KummerVerdict(KummerStatus.KUMMERIAN,
                                 "D(r) = 0 exactly for every relator: the relators lie in K_theta(F)",
                                 (), dim, precision=N, model_based=model_based)
    if not coords:
        return KummerVerdict(KummerStatus.KUMMERIAN, "no relators: M0/W is free",
                             (), dim, precision=N, model_based=model_based)
    smith = smith_mod_pN(coords, P.p, N, track=True)
    finite = [v for v in smith.valuations if v != float("inf")]
    if smith.saturated:
        # Entries vanishing mod p^N are genuine zeros iff the exact rank of W
        # equals the number of pivots seen at this precision.
        if exact_rows is None:
            exact_rows = [twisted_derivative_exact(r, theta) for r in P.relators]
        if mod.g0 is not None:
            exact_rows = [[x for j, x in enumerate(r) if j != mod.g0] for r in exact_rows]
        if rank_rational(exact_rows) != len(finite):
            return KummerVerdict(KummerStatus.INCONCLUSIVE,
                                 f"precision p^{N} saturated: a divisor may have valuation >= {N}",
                                 tuple(finite), None, precision=N, model_based=model_based)
    torsion = tuple(v for v in finite if v > 0)
    free_rank = dim - len(finite)
    if torsion:
        e = max(torsion)
        t = max(k for k, v in enumerate(smith.valuations) if v == e)
        return KummerVerdict(KummerStatus.NOT_KUMMERIAN,
                             f"Ker(theta)/K_theta(G) has torsion: divisor p^{e}",
                             torsion, free_rank, e, smith.left[t], N, model_based)
    return KummerVerdict(KummerStatus.KUMMERIAN, "M0/W is torsion-free",
                         (), free_rank, precision=N, model_based=model_based)


# -- candidate orientations ------------------------------------------------------

def candidate_orientation(pres: Presentation) -> tuple[Orientation | None, str]:
    """The only orientation that can make a family group 1-cyclotomic."""
    kind = pres.family.kind
    p = pres.p
    if kind == "f1":
        return Orientation(p, {g: Fraction(1) for g in pres.generators}), \
            "F1: a 1-cyclotomic orientation must be trivial"
    if kind in ("f2", "demushkin"):
        params = pres.family.params
        k = params[1]
        q = 0 if k is None else p ** k
        if kind == "f2":
            z1, z2 = params[3], params[4]
            if "y1" in (z1, z2):
                return None, ("F2 with y1 among z1, z2: the canonical orientation of the "
                              "Demushkin quotient does not factor through G, so no candidate exists")
        vals = {g: Fraction(1) for g in pres.generators}
        vals["y1"] = Fraction(1, 1 - q)
        why = ("pullback of the canonical Demushkin orientation" if kind == "f2"
               else "canonical Demushkin orientation")
        return Orientation(p, vals), why
    raise ValueError(f"no candidate orientation for family {kind!r}")


# -- 1-cyclotomicity refutation ---------------------------------------------------

class CycloStatus(str, Enum):
    NOT_1_CYCLOTOMIC = "NOT_1-CYCLOTOMIC"
    NO_WITNESS_TO_DEPTH = "NO-WITNESS-TO-DEPTH"
    PARTIAL = "PARTIAL"


@dataclass
class CyclotomicityResult:
    status: CycloStatus
    depth: int
    witness_chain: tuple[tuple[int, ...], ...] | None = None
    witness_verdict: KummerVerdict | None = None
    examined: list[int] = field(default_factory=list)  # subgroups examined per level
    inconclusive: list[tuple[tuple[int, ...], str]] = field(default_factory=list)
    witnesses: int = 0

    def as_json(self) -> dict:
        out = {"status": self.status.value, "depth": self.depth,
               "examined_per_level": self.examined,
               "witnesses_found": self.witnesses,
               "inconclusive": [{"chain": [list(c) for c in ch], "reason": why}
                                for ch, why in self.inconclusive]}
        if self.witness_chain is not None:
            out["witness_chain"] = [list(c) for c in self.witness_chain]
            out["witness"] = self.witness_verdict.as_json()
        return out


def _examine(args):
    """Worker: verdicts for all index-p subgroups below one node."""
    sub, theta, N, stop = args
    results = []
    for phi in enumerate_index_p(sub):
        child = rewrite_index_p(sub, phi)
        verdict = is_kummerian(child, restrict_orientation(theta, child), N)
        results.append((phi, verdict))
        if stop and verdict.status is KummerStatus.NOT_KUMMERIAN:
            break
    return results


def cyclotomicity_search(pres: Presentation, theta: Orientation, depth: int = 1,
                         N: int = DEFAULT_PRECISION, jobs: int | None = None,
                         exhaustive: bool = False, max_subgroups: int | None = None) -> CyclotomicityResult:
    """Breadth-first search for a subgroup chain ``G > H1 > ... > Hm``
    (each of index p, ``m <= depth``) with ``(Hm, theta|Hm)`` not Kummerian.

    Never asserts 1-cyclotomicity.  With ``exhaustive`` the sweep continues
    after the first witness (the first witness in the fixed order is still
    the one reported).
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    check_orientation(pres, theta)
    jobs = jobs or os.cpu_count() or 1
    result = CyclotomicityResult(CycloStatus.NO_WITNESS_TO_DEPTH, depth)

    def record(chain, verdict) -> bool:
        if verdict.status is KummerStatus.INCONCLUSIVE:
            result.inconclusive.append((chain, verdict.reason))
        elif verdict.status is KummerStatus.NOT_KUMMERIAN:
            result.witnesses += 1
            if result.witness_chain is None:
                result.status = CycloStatus.NOT_1_CYCLOTOMIC
                result.witness_chain = chain
                result.witness_verdict = verdict
            return not exhaustive
        return False

    v0 = is_kummerian(pres, theta, N)
    result.examined.append(1)
    if record((), v0):
        return result
    level = [((), pres, theta)]
    budget = max_subgroups
    for lvl in range(depth):
        if jobs > 1 and len(level) > 1:
            tasks = [(node, th, N, False) for _, node, th in level]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                batches = list(pool.map(_examine, tasks))
        else:
            # a node's children are only needed up to the first witness,
            # which is also the first in the fixed order
            batches = []
            for _, node, th in level:
                batches.append(_examine((node, th, N, not exhaustive and budget is None)))
                # sequential early exit: later nodes cannot precede a witness found here
                if not exhaustive and any(v.status is KummerStatus.NOT_KUMMERIAN for _, v in batches[-1]):
                    break
        next_level = []
        count = 0
        for (chain, node, th), batch in zip(level, batches):
            for phi, verdict in batch:
                count += 1
                full = chain + (phi,)
                if record(full, verdict):
                    result.examined.append(count)
                    return result
                if budget is not None:
                    budget -= 1
                    if budget <= 0:
                        result.examined.append(count)
                        if result.status is CycloStatus.NO_WITNESS_TO_DEPTH:
                            result.status = CycloStatus.PARTIAL
                        return result
                if lvl + 1 < depth:
                    child = rewrite_index_p(node, phi)
                    next_level.append((full, child, restrict_orientation(th, child)))
        result.examined.append(count)
        if result.witness_chain is not None and not exhaustive:
            return result
        level = next_level
    return result
