"""Massey products through lifts to unitriangular matrices.

A tuple of characters ``alpha_1..alpha_n`` of G has a vanishing n-fold
Massey product iff there is a homomorphism ``G -> U_{n+1}(F_p)`` whose
superdiagonal is ``(alpha_1, ..., alpha_n)``; it is defined iff such a
homomorphism exists into ``U_{n+1} / Z`` (relators may map to the centre,
i.e. to matrices ``I + a E_{1,n+1}``).

Write ``V_s`` for the entries on diagonal ``s`` of all generator matrices.
The diagonal-``s`` entries of a relator's image are ``E_s``: they are
linear in ``V_s`` with the relator's exponent sums as coefficients and
linear in ``V_{s-1}`` (it only pairs with the fixed first diagonal), once
``V_2..V_{s-2}`` are fixed.  So the pair ``(E_k, E_{k+1})`` is an affine
system in ``(V_k, V_{k+1})``.  The solver fixes the diagonals one at a time
and enumerates the admissible ``V_k`` (an affine space) only when a later
stage can still fail.  For ``n = 3`` this is a single affine solve.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .cohomology import cup, cup_table
from .linalg import Inconsistent, rref, solve_affine
from .presentations import Family, Presentation
from .subgroups import characters, enumerate_index_p
from .words import Word, exponent_sums

__all__ = [
    "Mode",
    "UnitriangularRep",
    "LiftOutcome",
    "LiftResult",
    "MasseyStatus",
    "MasseyVerdict",
    "ScanReport",
    "DEFAULT_BUDGET",
    "cup_chain_check",
    "find_lift",
    "massey_verdict",
    "massey_set3",
    "strong_vanishing_scan",
    "construct_f1_lift",
    "verify_homomorphism",
    "evaluate_word",
    "parse_chars",
]

DEFAULT_BUDGET = 10 ** 6


class Mode(str, Enum):
    FULL = "full"
    MODULO_CENTER = "modulo_center"


@dataclass(frozen=True)
class UnitriangularRep:
    p: int
    n: int  # Massey length; matrices are (n+1) x (n+1)
    generators: tuple[str, ...]
    matrices: tuple[tuple[tuple[int, ...], ...], ...]
    mode: Mode
    chars: tuple[tuple[int, ...], ...]

    def matrix(self, g: int | str) -> np.ndarray:
        i = self.generators.index(g) if isinstance(g, str) else g
        return np.array(self.matrices[i], dtype=np.int64)

    def as_json(self) -> dict:
        return {"mode": self.mode.value, "size": self.n + 1,
                "matrices": {g: [list(r) for r in m] for g, m in zip(self.generators, self.matrices)}}


class LiftOutcome(str, Enum):
    FOUND = "found"
    NONE = "none"  # exhaustive refutation
    UNKNOWN = "unknown"  # budget exhausted


@dataclass(frozen=True)
class LiftResult:
    outcome: LiftOutcome
    rep: UnitriangularRep | None
    nodes: int


class MasseyStatus(str, Enum):
    VANISHES = "VANISHES"
    DEFINED_ONLY = "DEFINED_ONLY"
    NOT_DEFINED = "NOT_DEFINED"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class MasseyVerdict:
    status: MasseyStatus
    certificate: UnitriangularRep | None
    nodes: int
    reason: str

    def as_json(self) -> dict:
        out = {"status": self.status.value, "nodes": self.nodes, "reason": self.reason}
        if self.certificate is not None:
            out["certificate"] = self.certificate.as_json()
        return out


# -- matrix evaluation ---------------------------------------------------------------

def _kills(e: int, p: int, size: int) -> bool:
    """``A^e = I`` on all of ``U_size(F_p)`` once ``p^m | e`` with ``p^m >= size``,
    since ``A^(p^m) = I + (A - I)^(p^m)``."""
    if e == 0:
        return True
    m = 1
    while m < size:
        m *= p
    return e % m == 0


def _mat_pow(M: np.ndarray, e: int, p: int) -> np.ndarray:
    size = M.shape[0]
    if _kills(e, p, size):
        return np.eye(size, dtype=np.int64)
    if e < 0:
        N = (np.eye(size, dtype=np.int64) - M) % p
        inv = np.eye(size, dtype=np.int64)
        term = np.eye(size, dtype=np.int64)
        for _ in range(size - 1):
            term = term @ N % p
            inv = (inv + term) % p
        M, e = inv, -e
    out = np.eye(size, dtype=np.int64)
    base = M % p
    while e:
        if e & 1:
            out = out @ base % p
        e >>= 1
        if e:
            base = base @ base % p
    return out


def evaluate_word(w: Word, mats: Sequence[np.ndarray], p: int) -> np.ndarray:
    size = mats[0].shape[0] if mats else 1
    out = np.eye(size, dtype=np.int64)
    for g, e in w.syllables:
        out = out @ _mat_pow(mats[g], e, p) % p
    return out


class _Dual:
    """``P + sum_k eps_k D[k]`` with ``eps_k eps_l = 0``."""

    __slots__ = ("P", "D")

    def __init__(self, P: np.ndarray, D: np.ndarray):
        self.P, self.D = P, D

    def mul(self, other: "_Dual", p: int) -> "_Dual":
        return _Dual(self.P @ other.P % p, (self.D @ other.P + self.P @ other.D) % p)

    def inverse(self, p: int) -> "_Dual":
        Pi = _mat_pow(self.P, -1, p)
        return _Dual(Pi, (-(Pi @ self.D @ Pi)) % p)

    def power(self, e: int, p: int) -> "_Dual":
        size, K = self.P.shape[0], self.D.shape[0]
        out = _Dual(np.eye(size, dtype=np.int64), np.zeros((K, size, size), dtype=np.int64))
        if _kills(e, p, size):
            return out
        base = self.inverse(p) if e < 0 else self
        e = abs(e)
        while e:
            if e & 1:
                out = out.mul(base, p)
            e >>= 1
            if e:
                base = base.mul(base, p)
        return out


def _linearize(pres: Presentation, base: list[np.ndarray], variables: list[tuple[int, int, int]],
               layers: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Affine map ``x -> c + J x`` giving the entries of every relator image on
    the listed diagonals, where ``x`` holds the ``variables`` (generator,
    row, column) added to the ``base`` matrices."""
    p = pres.p
    size = base[0].shape[0]
    K = len(variables)
    duals = []
    for g, M in enumerate(base):
        D = np.zeros((K, size, size), dtype=np.int64)
        duals.append(_Dual(M, D))
    for k, (g, i, j) in enumerate(variables):
        duals[g].D[k, i, j] = 1
    cache: dict[tuple[int, int], _Dual] = {}
    consts, rows = [], []
    for r in pres.relators:
        acc = _Dual(np.eye(size, dtype=np.int64), np.zeros((K, size, size), dtype=np.int64))
        for g, e in r.syllables:
            s = cache.get((g, e))
            if s is None:
                s = cache[(g, e)] = duals[g].power(e, p)
            acc = acc.mul(s, p)
        for s in layers:
            for i in range(size - s):
                consts.append(int(acc.P[i, i + s]))
                rows.append(acc.D[:, i, i + s])
    J = np.array(rows, dtype=np.int64).reshape(len(rows), K)
    return np.array(consts, dtype=np.int64), J


# -- characters and cup chains -----------------------------------------------------------

def parse_chars(text: str, pres: Presentation) -> list[tuple[int, ...]]:
    """``"0,1,0,0;1,0,0,0"`` -> list of F_p vectors in generator order."""
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        vec = tuple(int(x) % pres.p for x in part.split(","))
        if len(vec) != pres.n:
            raise ValueError(f"character {part!r} has {len(vec)} entries, expected {pres.n}")
        out.append(vec)
    return out


def _check_chars(pres: Presentation, chars: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    p = pres.p
    out = []
    for k, a in enumerate(chars):
        a = tuple(int(x) % p for x in a)
        if len(a) != pres.n:
            raise ValueError(f"character {k + 1} has {len(a)} entries, expected {pres.n}")
        for r in pres.relators:
            if sum(x * s for x, s in zip(a, exponent_sums(r))) % p:
                raise ValueError(f"character {k + 1} does not vanish on the relators")
        out.append(a)
    return out


def cup_chain_check(chars: Sequence[Sequence[int]], table) -> bool:
    if len(chars) < 2:
        raise ValueError("a cup chain needs at least two characters")
    return all(not cup(a, b, table).any() for a, b in zip(chars, chars[1:]))


# -- the layered solver -----------------------------------------------------------------

class _Budget(Exception):
    pass


def _initial(pres: Presentation, chars: list[tuple[int, ...]]) -> list[np.ndarray]:
    n = len(chars)
    mats = []
    for g in range(pres.n):
        M = np.eye(n + 1, dtype=np.int64)
        for h, a in enumerate(chars):
            M[h, h + 1] = a[g]
        mats.append(M)
    return mats


def _layer_vars(ngen: int, size: int, s: int) -> list[tuple[int, int, int]]:
    return [(g, i, i + s) for g in range(ngen) for i in range(size - s)]


def find_lift(pres: Presentation, chars: Sequence[Sequence[int]], mode: Mode = Mode.FULL,
              budget: int = DEFAULT_BUDGET) -> LiftResult:
    """Search for ``rho: G -> U_{n+1}`` (or ``U_{n+1}/Z``) with superdiagonal
    ``chars``.  Exhaustive up to ``budget`` stage solves."""
    chars = _check_chars(pres, chars)
    n = len(chars)
    if n < 2:
        raise ValueError("need n >= 2 characters")
    if budget < 1:
        raise ValueError("budget must be positive")
    p = pres.p
    size = n + 1
    top = n if mode is Mode.FULL else n - 1
    mats = _initial(pres, chars)
    nodes = 0

    def finish() -> UnitriangularRep:
        return UnitriangularRep(p, n, pres.generators,
                                tuple(tuple(tuple(int(x) for x in row) for row in M) for M in mats),
                                mode, tuple(chars))

    def stage(k: int) -> bool:
        nonlocal nodes
        if k > top:
            return True
        nodes += 1
        if nodes > budget:
            raise _Budget
        layers = [s for s in (k, k + 1) if s <= top]
        variables = [v for s in layers for v in _layer_vars(pres.n, size, s)]
        c, J = _linearize(pres, mats, variables, layers)
        try:
            sol = solve_affine(J, (-c) % p, p)
        except Inconsistent:
            return False
        if k + 1 >= top:
            # the last diagonal only meets its own equations: any solution works
            for (g, i, j), x in zip(variables, sol.particular):
                mats[g][i, j] = x
            return True
        nk = len(_layer_vars(pres.n, size, k))
        x0 = sol.particular[:nk]
        directions = sol.kernel[:, :nk] if len(sol.kernel) else np.zeros((0, nk), dtype=np.int64)
        basis = []
        if len(directions):
            R, _, rank = rref(directions, p)
            basis = R[:rank]
        for coeffs in product(range(p), repeat=len(basis)):
            x = x0.copy()
            for a, b in zip(coeffs, basis):
                if a:
                    x = (x + a * b) % p
            for (g, i, j), val in zip(variables[:nk], x):
                mats[g][i, j] = val
            if stage(k + 1):
                return True
        for g, i, j in variables[:nk]:
            mats[g][i, j] = 0
        return False

    try:
        found = stage(2)
    except _Budget:
        return LiftResult(LiftOutcome.UNKNOWN, None, nodes - 1)
    if found:
        return LiftResult(LiftOutcome.FOUND, finish(), nodes)
    return LiftResult(LiftOutcome.NONE, None, nodes)


def massey_verdict(pres: Presentation, chars: Sequence[Sequence[int]],
                   budget: int = DEFAULT_BUDGET) -> MasseyVerdict:
    full = find_lift(pres, chars, Mode.FULL, budget)
    if full.outcome is LiftOutcome.FOUND:
        return MasseyVerdict(MasseyStatus.VANISHES, full.rep, full.nodes,
                             "lift to U_{n+1} found")
    center = find_lift(pres, chars, Mode.MODULO_CENTER, budget)
    nodes = full.nodes + center.nodes
    if full.outcome is LiftOutcome.NONE and center.outcome is LiftOutcome.FOUND:
        return MasseyVerdict(MasseyStatus.DEFINED_ONLY, center.rep, nodes,
                             "lift to U_{n+1}/Z found; no lift to U_{n+1} (exhaustive)")
    if center.outcome is LiftOutcome.NONE:
        return MasseyVerdict(MasseyStatus.NOT_DEFINED, None, nodes,
                             "no lift to U_{n+1}/Z (exhaustive)")
    return MasseyVerdict(MasseyStatus.UNKNOWN, center.rep, nodes, "node budget exhausted")


def massey_set3(pres: Presentation, chars: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray] | None:
    """The triple Massey product as an affine subspace of ``F_p^{relators}``.

    Returns ``(offset, directions)`` (directions as rows, in echelon form),
    or ``None`` when the product is not defined.  Requires relators in the
    Frattini subgroup, so that the corner entries of generators do not
    affect the corner entries of relators.
    """
    chars = _check_chars(pres, chars)
    if len(chars) != 3:
        raise ValueError("massey_set3 takes three characters")
    p = pres.p
    if any(s % p for r in pres.relators for s in exponent_sums(r)):
        raise ValueError("relators must have exponent sums divisible by p")
    mats = _initial(pres, chars)
    variables = _layer_vars(pres.n, 4, 2)
    c2, J2 = _linearize(pres, mats, variables, [2])
    try:
        sol = solve_affine(J2, (-c2) % p, p)
    except Inconsistent:
        return None
    c3, J3 = _linearize(pres, mats, variables, [3])
    offset = (c3 + J3 @ sol.particular) % p
    if len(sol.kernel):
        R, _, rank = rref((sol.kernel @ J3.T) % p, p)
        directions = R[:rank]
    else:
        directions = np.zeros((0, len(offset)), dtype=np.int64)
    return offset, directions


# -- scans ---------------------------------------------------------------------------------

@dataclass
class ScanReport:
    presentation: str
    n: int
    total_tuples: int  # p^(n * dim H^1)
    admissible: int  # tuples passing the cup-chain filter (weighted)
    orbit_representatives: int
    evaluated: int  # representatives actually solved (all, or the sample)
    counts: dict[str, int] = field(default_factory=dict)  # weighted verdict counts
    counterexamples: list[dict] = field(default_factory=list)
    max_nodes: int = 0
    sampled: bool = False
    certificates_verified: bool = True

    @property
    def vanishing_fraction(self) -> float:
        # among defined products; NOT_DEFINED tuples are outside the property
        total = sum(v for k, v in self.counts.items() if k != MasseyStatus.NOT_DEFINED.value)
        return self.counts.get(MasseyStatus.VANISHES.value, 0) / total if total else 1.0

    def as_json(self) -> dict:
        return {"presentation": self.presentation, "n": self.n,
                "total_tuples": self.total_tuples, "admissible_tuples": self.admissible,
                "orbit_representatives": self.orbit_representatives,
                "evaluated_representatives": self.evaluated, "sampled": self.sampled,
                "verdict_counts": dict(sorted(self.counts.items())),
                "vanishing_fraction": self.vanishing_fraction,
                "max_nodes": self.max_nodes,
                "certificates_verified": self.certificates_verified,
                "counterexamples": self.counterexamples}


def _admissible(pres: Presentation, n: int) -> Iterator[tuple[tuple[tuple[int, ...], ...], int]]:
    """Cup-chain admissible tuples up to scaling each entry by ``F_p^*``.

    Scaling ``alpha_h`` by ``c_h`` is conjugation by a diagonal matrix, so it
    preserves every verdict; each representative carries the size of its
    orbit as a weight.
    """
    p = pres.p
    table = cup_table(pres)
    reps = [tuple([0] * pres.n)] + enumerate_index_p(pres)
    follow: dict[tuple[int, ...], list[tuple[int, ...]]] = {
        a: [b for b in reps if not cup(a, b, table).any()] for a in reps}

    def extend(prefix):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in follow[prefix[-1]]:
            yield from extend(prefix + [b])

    for a in reps:
        for tup in extend([a]):
            weight = (p - 1) ** sum(1 for x in tup if any(x))
            yield tup, weight


def _solve_batch(args):
    pres, batch, budget = args
    out = []
    for tup, weight in batch:
        v = massey_verdict(pres, tup, budget)
        ok = v.certificate is None or verify_homomorphism(v.certificate, pres)
        out.append((tup, weight, v.status.value, v.nodes, ok, v.reason))
    return out


def strong_vanishing_scan(pres: Presentation, n: int = 3, sample: int | None = None,
                          budget: int = DEFAULT_BUDGET, seed: int = 0,
                          jobs: int = 1) -> ScanReport:
    """Massey verdicts for every cup-chain admissible ``n``-tuple (or a
    deterministic sample of ``sample`` orbit representatives)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    h1 = len(characters(pres))
    reps = list(_admissible(pres, n))
    report = ScanReport(pres.name, n, pres.p ** (n * h1), sum(w for _, w in reps), len(reps), 0)
    if sample is not None and sample < len(reps):
        rng = random.Random(seed)
        chosen = sorted(rng.sample(range(len(reps)), sample))
        reps = [reps[i] for i in chosen]
        report.sampled = True
    report.evaluated = len(reps)
    if jobs > 1 and len(reps) > 1:
        chunk = max(1, len(reps) // (4 * jobs))
        batches = [(pres, reps[i:i + chunk], budget) for i in range(0, len(reps), chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [r for part in pool.map(_solve_batch, batches) for r in part]
    else:
        results = _solve_batch((pres, reps, budget))
    for tup, weight, status, nodes, ok, reason in results:
        report.counts[status] = report.counts.get(status, 0) + weight
        report.max_nodes = max(report.max_nodes, nodes)
        report.certificates_verified &= ok
        if status != MasseyStatus.VANISHES.value:
            report.counterexamples.append({"chars": [list(a) for a in tup], "status": status,
                                           "reason": reason, "certificate_verified": ok})
    return report


# -- certificates ---------------------------------------------------------------------------

def verify_homomorphism(rep: UnitriangularRep, pres: Presentation) -> bool:
    p, n = rep.p, rep.n
    size = n + 1
    if p != pres.p or tuple(rep.generators) != tuple(pres.generators):
        return False
    mats = [np.array(m, dtype=np.int64) for m in rep.matrices]
    for g, M in enumerate(mats):
        if M.shape != (size, size):
            return False
        if np.any(np.tril(M, -1) % p) or np.any(np.diag(M) % p != 1 % p):
            return False
        for h in range(n):
            if M[h, h + 1] % p != rep.chars[h][g] % p:
                return False
    for r in pres.relators:
        R = evaluate_word(r, mats, p)
        D = (R - np.eye(size, dtype=np.int64)) % p
        if rep.mode is Mode.MODULO_CENTER:
            D[0, n] = 0
        if D.any():
            return False
    return True


def construct_f1_lift(pres: Presentation, chars: Sequence[Sequence[int]],
                      budget: int = DEFAULT_BUDGET) -> UnitriangularRep:
    """Lift for the first family when ``n <= q``.

    The relator is ``[x1^q, y1][x2, y2]...[xd, yd]``.  For any
    ``A`` in ``U_{n+1}``, ``A^q = I + (A - I)^q`` is central once
    ``q >= n``, so ``A1 = M(x1)`` and ``B1 = M(y1)`` may be taken to be the
    bare superdiagonal matrices and the remaining generators come from a
    lift for the Demushkin group ``<x2..yd | [x2,y2]...[xd,yd]>``.
    """
    if pres.family.kind != "f1":
        raise ValueError("construct_f1_lift needs a presentation of the first family")
    p, k, d = pres.family.params
    q = p ** k
    chars = _check_chars(pres, chars)
    n = len(chars)
    if n > q:
        raise ValueError(f"n = {n} exceeds q = {q}")
    table = cup_table(pres)
    if not cup_chain_check(chars, table):
        raise ValueError("cup chain does not vanish")
    from .words import commutator, generator, multiply
    names = pres.generators[2:]
    w = None
    for i in range(2, d + 1):
        c = commutator(generator(names, f"x{i}"), generator(names, f"y{i}"))
        w = c if w is None else multiply(w, c)
    quotient = Presentation(p, names, (w,), Family("demushkin", (p, None, d - 1)), name="quotient")
    sub_chars = [a[2:] for a in chars]
    res = find_lift(quotient, sub_chars, Mode.FULL, budget)
    if res.outcome is not LiftOutcome.FOUND:
        raise RuntimeError("no lift on the Demushkin quotient; this contradicts the construction")
    head = _initial(Presentation(p, pres.generators[:2], (), name="head"), [a[:2] for a in chars])
    mats = tuple(tuple(tuple(int(x) for x in row) for row in M) for M in head) + res.rep.matrices
    rep = UnitriangularRep(p, n, pres.generators, mats, Mode.FULL, tuple(chars))
    if not verify_homomorphism(rep, pres):
        raise RuntimeError("constructed certificate does not verify")
    return rep
