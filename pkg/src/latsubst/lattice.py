"""Exact arithmetic on L = Z^n, an inflation Q, the quotients L/Q^k L and their cosets."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, DetTooSmall, NotExpansive

DEFAULT_RESIDUE_BUDGET = 1 << 24

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]


# --- small exact integer matrix helpers -------------------------------------------

def as_matrix(rows) -> Matrix:
    out = tuple(tuple(int(v) for v in row) for row in rows)
    if not out or any(len(r) != len(out) for r in out):
        raise ValueError("matrix must be square and non-empty")
    return out


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def matvec(a: Sequence[Sequence[int]], v: Sequence[int]) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def determinant(a: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free elimination."""
    m = [list(r) for r in a]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def charpoly(a: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Coefficients of det(zI - A), highest degree first (Faddeev-LeVerrier, exact)."""
    n = len(a)
    coeffs = [1]
    work = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        c_prev = coeffs[-1]
        work = [[work[i][j] + (c_prev if i == j else 0) for j in range(n)] for i in range(n)]
        work = [list(r) for r in matmul(a, work)]
        trace = sum(work[i][i] for i in range(n))
        if trace % k:
            raise ArithmeticError("non-integral characteristic polynomial")
        coeffs.append(-trace // k)
    return tuple(coeffs)


def schur_stable(coeffs_low_to_high: Sequence[int]) -> bool:
    """True iff every root of the real polynomial lies strictly inside the unit disc.

    Repeated Schur transform p -> (a_n p - a_0 p*)/z; integer arithmetic only.
    """
    a = [int(c) for c in coeffs_low_to_high]
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    while len(a) > 1:
        a0, an = a[0], a[-1]
        if abs(a0) >= abs(an):
            return False
        n = len(a) - 1
        a = [an * a[k] - a0 * a[n - k] for k in range(1, n + 1)]
        g = reduce(gcd, a)
        if g > 1:
            a = [c // g for c in a]
    return a[0] != 0


def is_expansive(a: Sequence[Sequence[int]]) -> bool:
    """All eigenvalues of modulus > 1, via Schur stability of the reversed char poly."""
    return schur_stable(charpoly(a))


def smith_decomposition(a: Sequence[Sequence[int]]):
    """Return (U, diag, V, U_inv) with A = U * diag(d) * V, U and V unimodular, d_i | d_{i+1}."""
    n = len(a)
    m = [list(r) for r in a]
    left = [list(r) for r in identity(n)]       # accumulated row operations
    left_inv = [list(r) for r in identity(n)]
    right = [list(r) for r in identity(n)]      # accumulated column operations
    right_inv = [list(r) for r in identity(n)]

    def row_add(t, s, c):  # row_t += c * row_s
        for mat in (m, left):
            mat[t] = [x + c * y for x, y in zip(mat[t], mat[s])]
        for r in left_inv:
            r[s] -= c * r[t]

    def row_swap(s, t):
        for mat in (m, left):
            mat[s], mat[t] = mat[t], mat[s]
        for r in left_inv:
            r[s], r[t] = r[t], r[s]

    def row_neg(t):
        for mat in (m, left):
            mat[t] = [-x for x in mat[t]]
        for r in left_inv:
            r[t] = -r[t]

    def col_add(t, s, c):  # col_t += c * col_s
        for mat in (m, right):
            for r in mat:
                r[t] += c * r[s]
        right_inv[s] = [x - c * y for x, y in zip(right_inv[s], right_inv[t])]

    def col_swap(s, t):
        for mat in (m, right):
            for r in mat:
                r[s], r[t] = r[t], r[s]
        right_inv[s], right_inv[t] = right_inv[t], right_inv[s]

    for t in range(n):
        nz = [(abs(m[i][j]), i, j) for i in range(t, n) for j in range(t, n) if m[i][j]]
        if not nz:
            break
        _, i0, j0 = min(nz)
        row_swap(t, i0)
        col_swap(t, j0)
        while True:
            changed = False
            for i in range(t + 1, n):
                while m[i][t]:
                    row_add(i, t, -(m[i][t] // m[t][t]))
                    if m[i][t]:
                        row_swap(t, i)
                        changed = True
            for j in range(t + 1, n):
                while m[t][j]:
                    col_add(j, t, -(m[t][j] // m[t][t]))
                    if m[t][j]:
                        col_swap(t, j)
                        changed = True
            if changed:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n)
                        if m[i][j] % m[t][t]), None)
            if bad is None:
                break
            row_add(t, bad[0], 1)
        if m[t][t] < 0:
            row_neg(t)
    diag = tuple(m[i][i] for i in range(n))
    # left * A * right = D  =>  A = left_inv * D * right_inv
    return as_matrix(left_inv), diag, as_matrix(right_inv), as_matrix(left)


def triangular_basis(a: Sequence[Sequence[int]]) -> Matrix:
    """Lower-triangular basis (as columns) of the lattice spanned by the columns of A."""
    n = len(a)
    cols = [list(c) for c in zip(*a)]
    for i in range(n):
        for j in range(i + 1, n):
            while cols[j][i]:
                k = cols[i][i] // cols[j][i]
                cols[i] = [x - k * y for x, y in zip(cols[i], cols[j])]
                cols[i], cols[j] = cols[j], cols[i]
        if cols[i][i] == 0:
            raise ValueError("singular matrix has no full-rank basis")
        if cols[i][i] < 0:
            cols[i] = [-x for x in cols[i]]
    return as_matrix(zip(*cols))


# --- inflation ----------------------------------------------------------------------

@dataclass(frozen=True)
class Inflation:
    matrix: Matrix
    dim: int = field(init=False)
    q: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        object.__setattr__(self, "dim", len(self.matrix))
        object.__setattr__(self, "q", abs(determinant(self.matrix)))

    def power(self, k: int) -> Matrix:
        return _matrix_power(self.matrix, k)

    def residues(self, k: int) -> "ResidueSystem":
        return _residue_system(self.matrix, k)

    def apply(self, x: Sequence[int], power: int = 1) -> Vector:
        return matvec(self.power(power), x)


@lru_cache(maxsize=None)
def _matrix_power(matrix: Matrix, k: int) -> Matrix:
    if k == 0:
        return identity(len(matrix))
    return matmul(matrix, _matrix_power(matrix, k - 1))


def validate_inflation(matrix) -> Inflation:
    mat = as_matrix(matrix)
    det = determinant(mat)
    if abs(det) <= 1:
        raise DetTooSmall(det)
    if not is_expansive(mat):
        raise NotExpansive(charpoly(mat))
    return Inflation(mat)


# --- residue systems ------------------------------------------------------------------

@dataclass(frozen=True)
class ResidueSystem:
    """Concrete model of L/Q^k L.

    Canonical representatives live in the box 0 <= x_i < h_ii of a lower-triangular
    basis h of Q^k L; the dense index is the mixed-radix value of that representative.
    The Smith data gives the group isomorphism onto the direct sum of Z/d_i.
    """
    depth: int
    unimodular_left: Matrix
    diagonal: tuple[int, ...]
    size: int
    basis: Matrix = field(repr=False)
    left_inverse: Matrix = field(repr=False)

    @cached_property
    def radices(self) -> tuple[int, ...]:
        return tuple(self.basis[i][i] for i in range(len(self.basis)))

    @cached_property
    def _diagonal_basis(self) -> bool:
        h = self.basis
        return all(h[r][c] == 0 for r in range(len(h)) for c in range(len(h)) if r != c)

    def canonical(self, x: Sequence[int]) -> Vector:
        if self._diagonal_basis:
            return tuple(int(c) % r for c, r in zip(x, self.radices))
        v = [int(c) for c in x]
        h = self.basis
        for i in range(len(v)):
            k = v[i] // h[i][i]
            if k:
                for r in range(i, len(v)):
                    v[r] -= k * h[r][i]
        return tuple(v)

    def index(self, x: Sequence[int]) -> int:
        rep = self.canonical(x)
        idx, scale = 0, 1
        for c, r in zip(rep, self.radices):
            idx += c * scale
            scale *= r
        return idx

    def rep_of_index(self, idx: int) -> Vector:
        out = []
        for r in self.radices:
            idx, c = divmod(idx, r)
            out.append(c)
        return tuple(out)

    def group_coordinates(self, x: Sequence[int]) -> Vector:
        y = matvec(self.left_inverse, x)
        return tuple(c % d for c, d in zip(y, self.diagonal))

    # vectorised forms, rows of X are points
    def canonical_array(self, points) -> np.ndarray:
        x = np.array(points, dtype=np.int64, copy=True).reshape(-1, len(self.basis))
        h = np.array(self.basis, dtype=np.int64)
        for i in range(x.shape[1]):
            k = np.floor_divide(x[:, i], h[i, i])
            x -= k[:, None] * h[:, i][None, :]
        return x

    def index_array(self, points) -> np.ndarray:
        rep = self.canonical_array(points)
        idx = np.zeros(rep.shape[0], dtype=np.int64)
        scale = 1
        for i, r in enumerate(self.radices):
            idx += rep[:, i] * scale
            scale *= r
        return idx

    def all_reps(self) -> np.ndarray:
        idx = np.arange(self.size, dtype=np.int64)
        cols = []
        for r in self.radices:
            idx, c = np.divmod(idx, r)
            cols.append(c)
        return np.stack(cols, axis=1) if cols else np.zeros((self.size, 0), dtype=np.int64)


@lru_cache(maxsize=None)
def _residue_system(matrix: Matrix, k: int) -> ResidueSystem:
    qk = _matrix_power(matrix, k)
    u, diag, _v, u_inv = smith_decomposition(qk)
    size = 1
    for d in diag:
        size *= d
    return ResidueSystem(depth=k, unimodular_left=u, diagonal=diag, size=abs(size),
                         basis=triangular_basis(qk), left_inverse=u_inv)


# --- cosets ---------------------------------------------------------------------------

@dataclass(frozen=True, order=False)
class Coset:
    """The coset rep + Q^depth L, rep always canonical."""
    inflation: Inflation = field(repr=False)
    depth: int
    rep: Vector

    @property
    def index(self) -> int:
        return self.inflation.residues(self.depth).index(self.rep)

    def sort_key(self):
        return (self.depth, self.index)

    def contains_point(self, x: Sequence[int]) -> bool:
        return self.inflation.residues(self.depth).canonical(x) == self.rep

    def __str__(self):
        return f"{self.rep}+Q^{self.depth}L"


def residue_of(inflation: Inflation, x: Sequence[int], k: int) -> Coset:
    return Coset(inflation, k, inflation.residues(k).canonical(x))


def enumerate_residues(inflation: Inflation, k: int,
                       budget: int = DEFAULT_RESIDUE_BUDGET) -> list[Coset]:
    size = inflation.q ** k
    if size > budget:
        raise BudgetExceeded("residue enumeration", size, budget)
    reps = inflation.residues(k).all_reps()
    return [Coset(inflation, k, tuple(int(c) for c in row)) for row in reps]


def coset_measure(inflation: Inflation, coset: Coset) -> Fraction:
    return Fraction(1, inflation.q ** coset.depth)


def coset_contains(outer: Coset, inner: Coset) -> bool:
    if inner.depth < outer.depth:
        return False
    return outer.inflation.residues(outer.depth).canonical(inner.rep) == outer.rep


def cosets_intersect(a: Coset, b: Coset) -> bool:
    return coset_contains(a, b) or coset_contains(b, a)


def sorted_cosets(cosets: Iterable[Coset]) -> list[Coset]:
    return sorted(cosets, key=Coset.sort_key)
