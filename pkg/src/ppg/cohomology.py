"""F_p-cohomology of minimally presented pro-p groups in degrees <= 2.

For a minimal presentation, H^1 is dual to the generators and H^2 is dual
to the relators.  The cup product is read from second-order Magnus
coefficients: with ``eps_ij(r)`` the coefficient of ``X_i X_j`` in the
expansion of ``r``,

    <alpha cup beta, r> = sum_{i,j} eps_ij(r) alpha_i beta_j.

For p odd and ``r`` in the Frattini subgroup this form is alternating and
equals ``sum_{i<j} a_ij (alpha_i beta_j - alpha_j beta_i)`` with
``a_ij = eps_ij``; for p = 2 the diagonal ``eps_ii`` records squares.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations

import numpy as np

from .linalg import rank_mod_p
from .presentations import Presentation, validate_minimal
from .words import Word, magnus_truncated

__all__ = [
    "NonMinimalPresentation",
    "Degree2Form",
    "CupTable",
    "Quadraticity",
    "QuadraticityReport",
    "degree2_forms",
    "fox_degree2",
    "cup_table",
    "h_dims",
    "euler_characteristic",
    "cup",
    "quadraticity_report",
    "cohomology_report",
]


class NonMinimalPresentation(ValueError):
    pass


@dataclass(frozen=True)
class Degree2Form:
    """Second-order coefficients ``eps[i][j]`` of one relator, reduced mod p."""

    p: int
    eps: tuple[tuple[int, ...], ...]

    def a(self, i: int, j: int) -> int:
        return self.eps[i][j]

    def matrix(self) -> np.ndarray:
        return np.array(self.eps, dtype=np.int64).reshape(len(self.eps), -1)

    def squares(self) -> tuple[int, ...]:
        return tuple(self.eps[i][i] for i in range(len(self.eps)))

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.eps)


def fox_degree2(w: Word) -> list[list[int]]:
    """Integer second-order coefficients by prefix counting.

    Each occurrence of a syllable ``x_j^e`` contributes ``e`` times the
    running exponent sum of ``x_i`` before it to ``eps_ij``, and
    ``binom(e, 2)`` to ``eps_jj``.  This is the augmentation of the second
    Fox derivative and does not go through power-series multiplication.
    """
    n = len(w.alphabet)
    eps = [[0] * n for _ in range(n)]
    prefix = [0] * n
    for g, e in w.syllables:
        for i in range(n):
            if prefix[i]:
                eps[i][g] += prefix[i] * e
        eps[g][g] += e * (e - 1) // 2
        prefix[g] += e
    return eps


def _check_minimal(pres: Presentation) -> None:
    report = validate_minimal(pres)
    if not report:
        raise NonMinimalPresentation("; ".join(report.diagnostics))


def degree2_forms(pres: Presentation) -> list[Degree2Form]:
    """Degree-2 Magnus parts of the relators (one form per relator)."""
    _check_minimal(pres)
    out = []
    n = pres.n
    for r in pres.relators:
        series = magnus_truncated(r, pres.p, 2)
        eps = [[series[(i, j)] for j in range(n)] for i in range(n)]
        out.append(Degree2Form(pres.p, tuple(tuple(row) for row in eps)))
    return out


@dataclass(frozen=True)
class CupTable:
    """``T[r][i][j]`` is the coordinate of ``x_i^* cup x_j^*`` along relator r."""

    p: int
    generators: tuple[str, ...]
    tensor: np.ndarray  # shape (relators, n, n), entries mod p
    independent: bool
    caveats: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def relator_count(self) -> int:
        return self.tensor.shape[0]

    @property
    def h2(self) -> int:
        return rank_mod_p(self.tensor.reshape(self.relator_count, -1), self.p) if self.relator_count else 0

    def product(self, i: int | str, j: int | str) -> np.ndarray:
        i = self.generators.index(i) if isinstance(i, str) else i
        j = self.generators.index(j) if isinstance(j, str) else j
        return self.tensor[:, i, j] % self.p

    def multiplication_kernel(self) -> np.ndarray:
        """Rows spanning ``ker(H^1 (x) H^1 -> H^2)`` in the basis
        ``x_i^* (x) x_j^*`` (flattened row-major)."""
        from .linalg import nullspace_mod_p
        n = self.n
        if self.relator_count == 0:
            return np.eye(n * n, dtype=np.int64)
        return nullspace_mod_p(self.tensor.reshape(self.relator_count, n * n), self.p, ncols=n * n)

    def as_json(self) -> list:
        entries = []
        for i in range(self.n):
            for j in range(self.n):
                v = self.product(i, j)
                if v.any():
                    entries.append({"i": self.generators[i], "j": self.generators[j],
                                    "value": [int(x) for x in v]})
        return entries


def cup_table(pres: Presentation) -> CupTable:
    """Cup products computed from ``fox_degree2`` (not from the Magnus series)."""
    _check_minimal(pres)
    p, n = pres.p, pres.n
    T = np.zeros((len(pres.relators), n, n), dtype=np.int64)
    for k, r in enumerate(pres.relators):
        T[k] = np.array(fox_degree2(r), dtype=np.int64) % p
    rank = rank_mod_p(T.reshape(len(pres.relators), -1), p) if pres.relators else 0
    caveats = []
    if p == 2:
        caveats.append("p = 2: the residual-term hypothesis of the few-relator criterion is not verified")
    independent = rank == len(pres.relators)
    if not independent:
        caveats.append("relator degree-2 forms are linearly dependent; minimality of the relator set "
                       "is inconclusive")
    return CupTable(p, pres.generators, T, independent, tuple(caveats))


def h_dims(pres: Presentation) -> tuple[int, int]:
    """``(dim H^1, dim H^2)``.  dim H^2 is the number of relators, which is
    only certified when their degree-2 forms are independent; otherwise
    the rank of the forms (a lower bound) is returned and the table is
    flagged."""
    table = cup_table(pres)
    return pres.n, (table.relator_count if table.independent else table.h2)


def euler_characteristic(pres: Presentation) -> int:
    """``1 - dim H^1 + dim H^2`` assuming cohomological dimension 2."""
    h1, h2 = h_dims(pres)
    return 1 - h1 + h2


def cup(alpha, beta, table: CupTable) -> np.ndarray:
    """Coordinates of ``alpha cup beta`` in the relator-indexed basis of H^2."""
    a = np.asarray(alpha, dtype=np.int64) % table.p
    b = np.asarray(beta, dtype=np.int64) % table.p
    if a.shape != (table.n,) or b.shape != (table.n,):
        raise ValueError(f"characters must have {table.n} entries")
    return np.einsum("rij,i,j->r", table.tensor, a, b) % table.p


class Quadraticity(str, Enum):
    YES = "yes"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class QuadraticityReport:
    status: Quadraticity
    ordering: tuple[str, ...] | None
    message: str
    caveats: tuple[str, ...] = field(default_factory=tuple)


def quadraticity_report(pres: Presentation) -> QuadraticityReport:
    """Check the hypotheses of the few-relator criterion.

    For one relator we need a reordering with ``a_12 != 0``.  For two
    relators we additionally need the second relator to have ``b_12 = 0``
    and some ``b_hk != 0`` with ``{h, k} != {1, 2}``, after
    possibly replacing the second relator by ``r2 - (b_12/a_12) r1``
    (which changes neither the group nor H^2).
    """
    p = pres.p
    table = cup_table(pres)
    caveats = list(table.caveats)
    m = len(pres.relators)
    if m == 0:
        return QuadraticityReport(Quadraticity.YES, pres.generators,
                                  "free pro-p group: H^*(G) = F_p + H^1, trivially quadratic", tuple(caveats))
    if m > 2:
        return QuadraticityReport(Quadraticity.INCONCLUSIVE, None,
                                  "out of scope of the few-relator criterion (more than two relators)",
                                  tuple(caveats))
    if not table.independent:
        return QuadraticityReport(Quadraticity.INCONCLUSIVE, None,
                                  "relator forms dependent; hypotheses cannot be checked", tuple(caveats))
    forms = [table.tensor[k] % p for k in range(m)]
    for first in range(m):
        order = _hypotheses(forms[first], forms[1 - first] if m == 2 else None, p)
        if order is not None:
            return QuadraticityReport(Quadraticity.YES, _ordering(pres.generators, order),
                                      "hypotheses met: H^*(G) quadratic and universally Koszul "
                                      "by the few-relator criterion", tuple(caveats))
    return QuadraticityReport(Quadraticity.INCONCLUSIVE, None,
                              "hypotheses of the few-relator criterion not met (no claim either way)",
                              tuple(caveats))


def _hypotheses(A: np.ndarray, B: np.ndarray | None, p: int) -> tuple[int, ...] | None:
    n = A.shape[0]
    for i, j in permutations(range(n), 2):
        a12 = int(A[i, j])
        if not a12:
            continue
        if B is None:
            return (i, j)
        second = (B - int(B[i, j]) * pow(a12, -1, p) * A) % p
        for h, k in permutations(range(n), 2):
            if {h, k} != {i, j} and second[h, k]:
                return (i, j) + tuple(x for x in (h, k) if x not in (i, j))
    return None


def _ordering(gens: tuple[str, ...], front: tuple[int, ...]) -> tuple[str, ...]:
    rest = [g for k, g in enumerate(gens) if k not in front]
    return tuple(gens[k] for k in front) + tuple(rest)


def cohomology_report(pres: Presentation) -> dict:
    table = cup_table(pres)
    h1, h2 = pres.n, (table.relator_count if table.independent else table.h2)
    quad = quadraticity_report(pres)
    return {
        "h1": h1,
        "h2": h2,
        "euler": 1 - h1 + h2,
        "cup_table": table.as_json(),
        "quadratic": quad.status.value,
        "quadratic_ordering": list(quad.ordering) if quad.ordering else None,
        "quadratic_message": quad.message,
        "caveats": sorted(set(table.caveats) | set(quad.caveats)),
    }
