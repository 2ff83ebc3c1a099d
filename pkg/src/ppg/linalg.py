"""Exact linear algebra: F_p elimination, Smith forms over Z and Z/p^N.

Everything here works on plain Python integers (or small numpy int64
arrays for the F_p kernels), so results are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, inf

import numpy as np

DEFAULT_PRECISION = 20


class Inconsistent(ValueError):
    """The affine system has no solution."""


class NonUnit(ValueError):
    pass


# -- F_p -----------------------------------------------------------------------

def rref(M, p: int):
    """Reduced row echelon form over F_p.

    Returns ``(R, pivots, rank)`` where ``R`` is a new int64 array.
    """
    R = np.array(M, dtype=np.int64).reshape(len(M), -1) % p if len(M) else np.zeros((0, 0), np.int64)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            R[[r, k]] = R[[k, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r] = (R[r] * inv) % p
        col = R[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            R[nzr] = (R[nzr] - np.outer(col[nzr], R[r])) % p
        pivots.append(c)
        r += 1
    return R, pivots, len(pivots)


def rank_mod_p(M, p: int) -> int:
    if len(M) == 0:
        return 0
    return rref(M, p)[2]


def nullspace_mod_p(M, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of ``{x : M x = 0}`` over F_p."""
    M = np.array(M, dtype=np.int64)
    if M.size == 0:
        n = ncols if ncols is not None else (M.shape[1] if M.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    R, pivots, rank = rref(M, p)
    n = R.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-R[i, f]) % p
    return basis


@dataclass(frozen=True)
class AffineSolution:
    particular: np.ndarray
    kernel: np.ndarray  # rows span the solution directions

    @property
    def dimension(self) -> int:
        return len(self.kernel)


def solve_affine(M, b, p: int) -> AffineSolution:
    """Solve ``M x = b`` over F_p; raise :class:`Inconsistent` if impossible."""
    M = np.array(M, dtype=np.int64) % p
    b = np.array(b, dtype=np.int64).reshape(-1) % p
    rows, cols = M.shape
    aug = np.concatenate([M, b.reshape(-1, 1)], axis=1)
    R, pivots, _ = rref(aug, p)
    if cols in pivots:
        raise Inconsistent("system has no solution")
    x = np.zeros(cols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = R[i, cols]
    kernel = nullspace_mod_p(M, p, ncols=cols) if rows else np.eye(cols, dtype=np.int64)
    return AffineSolution(x, kernel)


# -- integers --------------------------------------------------------------------

def smith_int(M) -> list[int]:
    """Elementary divisors ``d1 | d2 | ...`` of an integer matrix.

    The list has ``min(rows, cols)`` entries; zeros at the end mark the
    free part beyond the rank.
    """
    A = [[int(x) for x in row] for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag: list[int] = []
    t = 0
    while t < min(rows, cols):
        # pivot: nonzero entry of least absolute value in the trailing block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        done = False
        while not done:
            done = True
            piv = A[t][t]
            for i in range(t + 1, rows):
                q = A[i][t] // piv
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            for j in range(t + 1, cols):
                q = A[t][j] // piv
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j]:
                    done = False
            if not done:
                # move the smallest remaining entry of row/col t into the pivot
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, rows) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, cols) if A[t][j]]
                _, i, j = min(cand)
                if j == t:
                    A[t], A[i] = A[i], A[t]
                else:
                    for row in A:
                        row[t], row[j] = row[j], row[t]
                continue
            # enforce divisibility of the trailing block
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if A[i][j] % piv), None)
            if bad is not None:
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
                done = False
        diag.append(abs(A[t][t]))
        t += 1
    diag += [0] * (min(rows, cols) - len(diag))
    return diag


def valuation(n: int | Fraction, p: int) -> float:
    if n == 0:
        return inf
    n = Fraction(n)
    v = 0
    a, b = n.numerator, n.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


# -- Z/p^N -------------------------------------------------------------------------

@dataclass(frozen=True)
class PadicScalar:
    p: int
    N: int
    residue: int

    def __post_init__(self):
        object.__setattr__(self, "residue", self.residue % self.p ** self.N)

    def _lift(self, other) -> int:
        if isinstance(other, PadicScalar):
            if (other.p, other.N) != (self.p, self.N):
                raise ValueError("mixed precisions")
            return other.residue
        return to_residue(other, self.p, self.N)

    def __add__(self, other):
        return PadicScalar(self.p, self.N, self.residue + self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PadicScalar(self.p, self.N, self.residue - self._lift(other))

    def __mul__(self, other):
        return PadicScalar(self.p, self.N, self.residue * self._lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return PadicScalar(self.p, self.N, -self.residue)

    def __pow__(self, e: int):
        return padic_pow(self, e)

    @property
    def valuation(self) -> float:
        return valuation(self.residue, self.p) if self.residue else inf

    def __int__(self) -> int:
        return self.residue


def to_residue(a: int | Fraction, p: int, N: int) -> int:
    a = Fraction(a)
    mod = p ** N
    if a.denominator % p == 0:
        raise NonUnit(f"{a} is not p-integral for p={p}")
    return a.numerator * pow(a.denominator, -1, mod) % mod


def padic_inv(a: int | Fraction | PadicScalar, p: int, N: int) -> PadicScalar:
    if isinstance(a, PadicScalar):
        r = a.residue
    else:
        a = Fraction(a)
        if a.numerator % p == 0:
            raise NonUnit(f"{a} is not a p-adic unit")
        r = to_residue(a, p, N)
    if r % p == 0:
        raise NonUnit("not a unit")
    return PadicScalar(p, N, pow(r, -1, p ** N))


def padic_pow(s: PadicScalar, e: int) -> PadicScalar:
    mod = s.p ** s.N
    if e < 0:
        return PadicScalar(s.p, s.N, pow(padic_inv(s, s.p, s.N).residue, -e, mod))
    return PadicScalar(s.p, s.N, pow(s.residue, e, mod))


@dataclass(frozen=True)
class SmithResult:
    valuations: tuple  # nondecreasing; math.inf marks entries that are 0 mod p^N
    rank: int
    saturated: bool
    precision: int
    left: tuple | None = None  # rows: combinations of input rows giving each pivot row

    def torsion(self) -> list[int]:
        """Valuations strictly between 0 and the precision."""
        return [v for v in self.valuations if 0 < v < self.precision]


def smith_mod_pN(M, p: int, N: int = DEFAULT_PRECISION, track: bool = False) -> SmithResult:
    """Diagonalize ``M`` over Z/p^N with minimal-valuation pivoting.

    Pivot choice: least p-valuation, then smallest row, then smallest
    column, so the output is deterministic.  Diagonal entries that vanish
    mod p^N are reported as ``inf`` and set the ``saturated`` flag.

    With ``track=True`` the result carries ``left``: row ``t`` lists the
    coefficients (mod p^N) of the input rows whose combination, after the
    column operations, is the ``t``-th diagonal row.
    """
    if N < 1:
        raise ValueError("precision must be >= 1")
    mod = p ** N
    A = [[x % mod if type(x) is int else
          (x.residue if isinstance(x, PadicScalar) else to_residue(x, p, N)) for x in row]
         for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    L = [[int(i == j) for j in range(rows)] for i in range(rows)] if track else None

    def val(x: int) -> int:
        if x == 0:
            return N
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v

    vals: list[float] = []
    for t in range(min(rows, cols)):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j]:
                    v = val(A[i][j])
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            vals.extend([inf] * (min(rows, cols) - t))
            break
        v, i, j = best
        A[t], A[i] = A[i], A[t]
        if L is not None:
            L[t], L[i] = L[i], L[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        piv = A[t][t]
        unit = piv // p ** v
        uinv = pow(unit, -1, mod)
        for i in range(t + 1, rows):
            if A[i][t]:
                f = (A[i][t] // p ** v) * uinv % mod
                A[i] = [(a - f * b) % mod for a, b in zip(A[i], A[t])]
                if L is not None:
                    L[i] = [(a - f * b) % mod for a, b in zip(L[i], L[t])]
        for j in range(t + 1, cols):
            if A[t][j]:
                f = (A[t][j] // p ** v) * uinv % mod
                for row in A:
                    row[j] = (row[j] - f * row[t]) % mod
        vals.append(v)
    saturated = any(v == inf for v in vals)
    rank = sum(1 for v in vals if v != inf)
    left = tuple(tuple(row) for row in L[:len(vals)]) if L is not None else None
    return SmithResult(tuple(vals), rank, saturated, N, left)


def rank_rational(M) -> int:
    """Exact rank over Q of a matrix with rational entries.

    Rows are scaled to integers and eliminated fraction-free, dividing each
    new row by the gcd of its entries to keep numbers small.
    """
    rows = []
    for row in M:
        fr = [x if isinstance(x, Fraction) else Fraction(x) for x in row]
        den = 1
        for x in fr:
            if x.denominator != 1:
                den = den * x.denominator // gcd(den, x.denominator)
        ints = [x.numerator * (den // x.denominator) for x in fr]
        if any(ints):
            rows.append(ints)
    r = 0
    cols = len(rows[0]) if rows else 0
    for c in range(cols):
        k = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        piv = rows[r]
        for i in range(r + 1, len(rows)):
            a = rows[i][c]
            if a:
                new = [piv[c] * x - a * y for x, y in zip(rows[i], piv)]
                g = 0
                for x in new:
                    g = gcd(g, x)
                rows[i] = [x // g for x in new] if g > 1 else new
        r += 1
        if r == len(rows):
            break
    return r
