"""Affine maps, matrix function systems and typed patches."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (BudgetExceeded, InflationMismatch, NotPrimitive, SeedNotFound,
                     TypeCollision, WindowTooSmall)
from .lattice import Inflation, Vector, matvec

log = logging.getLogger(__name__)

DEFAULT_MAP_BUDGET = 10_000_000


@dataclass(frozen=True, order=True)
class AffineMap:
    """x -> Q^power x + translation."""
    power: int
    translation: Vector

    def __post_init__(self):
        object.__setattr__(self, "translation", tuple(int(v) for v in self.translation))
        if self.power < 0:
            raise ValueError("power must be non-negative")

    def apply(self, inflation: Inflation, x: Sequence[int]) -> Vector:
        y = matvec(inflation.power(self.power), x)
        return tuple(a + b for a, b in zip(y, self.translation))

    def after(self, inner: "AffineMap", inflation: Inflation) -> "AffineMap":
        """self o inner."""
        moved = matvec(inflation.power(self.power), inner.translation)
        return AffineMap(self.power + inner.power,
                         tuple(a + b for a, b in zip(moved, self.translation)))

    def fixed_point(self, inflation: Inflation) -> tuple[Fraction, ...]:
        """Unique solution of x = Q^p x + a over the rationals."""
        qp = inflation.power(self.power)
        n = len(qp)
        lhs = [[(1 if i == j else 0) - qp[i][j] for j in range(n)] for i in range(n)]
        return solve_rational(lhs, self.translation)


def solve_rational(a, b) -> tuple[Fraction, ...]:
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(m[i][n] / m[i][i] for i in range(n))


def _freeze_entries(entries) -> tuple[tuple[frozenset, ...], ...]:
    return tuple(tuple(frozenset(cell) for cell in row) for row in entries)


@dataclass(frozen=True)
class Mfs:
    """An m x m matrix of finite sets of affine maps sharing one power of Q."""
    inflation: Inflation
    entries: tuple[tuple[frozenset, ...], ...]
    type_names: tuple[str, ...] = ()
    power: int = 1

    def __post_init__(self):
        entries = _freeze_entries(self.entries)
        object.__setattr__(self, "entries", entries)
        m = len(entries)
        if any(len(row) != m for row in entries):
            raise ValueError("MFS must be square")
        names = tuple(self.type_names) or tuple(str(i + 1) for i in range(m))
        if len(names) != m:
            raise ValueError("one name per type required")
        object.__setattr__(self, "type_names", names)
        powers = {f.power for row in entries for cell in row for f in cell}
        if len(powers) > 1:
            raise ValueError(f"maps with different powers {sorted(powers)}")
        if powers:
            object.__setattr__(self, "power", powers.pop())
        for row in entries:
            for cell in row:
                for f in cell:
                    if len(f.translation) != self.inflation.dim:
                        raise ValueError("translation dimension mismatch")

    @property
    def m(self) -> int:
        return len(self.entries)

    def maps(self) -> Iterator[tuple[int, int, AffineMap]]:
        """All (row, column, map) triples in a stable order."""
        for i, row in enumerate(self.entries):
            for j, cell in enumerate(row):
                for f in sorted(cell):
                    yield i, j, f

    def total_maps(self) -> int:
        return sum(len(cell) for row in self.entries for cell in row)

    @classmethod
    def from_triples(cls, inflation, m, triples, type_names=(), power=1) -> "Mfs":
        cells = [[set() for _ in range(m)] for _ in range(m)]
        for i, j, f in triples:
            cells[i][j].add(f)
        return cls(inflation, cells, tuple(type_names), power)


# --- substitution matrices ----------------------------------------------------------

def subst_matrix(phi: Mfs) -> np.ndarray:
    return np.array([[len(c) for c in row] for row in phi.entries], dtype=np.int64).reshape(phi.m, phi.m)


def incidence_matrix(phi: Mfs) -> np.ndarray:
    return (subst_matrix(phi) > 0).astype(np.int64)


def primitivity_exponent(s) -> int | None:
    """Smallest l <= (m-1)^2 + 1 with S^l > 0, or None."""
    b = (np.asarray(s) > 0).astype(np.int64)
    m = b.shape[0]
    if m == 0:
        return None
    power = b.copy()
    for exponent in range(1, (m - 1) ** 2 + 2):
        if power.all():
            return exponent
        power = np.minimum(power @ b, 1)
    return None


def is_primitive(s) -> bool:
    return primitivity_exponent(s) is not None


@dataclass(frozen=True)
class PFCheck:
    holds: bool
    eigenvector: tuple[int, ...] | None = None


def rational_kernel(a) -> list[list[Fraction]]:
    rows = [[Fraction(int(v)) for v in r] for r in a]
    n_cols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n_cols
        v[fc] = Fraction(1)
        for row_i, pc in enumerate(pivots):
            v[pc] = -rows[row_i][fc]
        basis.append(v)
    return basis


def pf_eigenvalue_equals_q(s, q: int) -> PFCheck:
    """Exact test that the kernel of S - qI holds a strictly positive vector."""
    s = np.asarray(s, dtype=np.int64)
    if not is_primitive(s):
        raise NotPrimitive()
    m = s.shape[0]
    shifted = [[int(s[i, j]) - (q if i == j else 0) for j in range(m)] for i in range(m)]
    kernel = rational_kernel(shifted)
    # a positive eigenvector belongs to the simple PF root, so a 1-dim kernel is required
    if len(kernel) != 1:
        return PFCheck(False)
    v = kernel[0]
    if all(x < 0 for x in v):
        v = [-x for x in v]
    if not all(x > 0 for x in v):
        return PFCheck(False)
    denom = lcm(*(x.denominator for x in v))
    ints = [int(x * denom) for x in v]
    g = gcd(*ints)
    return PFCheck(True, tuple(x // g for x in ints))


# --- composition ---------------------------------------------------------------------

def compose(psi: Mfs, phi: Mfs) -> Mfs:
    """(psi o phi)_ij = union over k of psi_ik o phi_kj, deduplicated."""
    if psi.inflation != phi.inflation or psi.m != phi.m:
        raise InflationMismatch()
    infl = psi.inflation
    m = psi.m
    qp = np.array(infl.power(psi.power), dtype=object)
    cells = [[set() for _ in range(m)] for _ in range(m)]
    for k in range(m):
        inner_col = [(j, phi.entries[k][j]) for j in range(m) if phi.entries[k][j]]
        if not inner_col:
            continue
        for i in range(m):
            outer = psi.entries[i][k]
            if not outer:
                continue
            for j, inner in inner_col:
                moved = [tuple(int(v) for v in qp.dot(f.translation)) for f in inner]
                target = cells[i][j]
                for g in outer:
                    for mv in moved:
                        target.add(AffineMap(psi.power + phi.power,
                                             tuple(a + b for a, b in zip(mv, g.translation))))
    return Mfs(infl, cells, psi.type_names, psi.power + phi.power)


def projected_map_count(phi: Mfs, exponent: int) -> int:
    """Upper bound 1^T S^M 1 on the number of maps in Phi^M."""
    s = subst_matrix(phi).astype(object)
    acc = np.ones(phi.m, dtype=object)
    for _ in range(exponent):
        acc = s.dot(acc)
    return int(sum(acc))


def power(phi: Mfs, exponent: int, budget: int = DEFAULT_MAP_BUDGET) -> Mfs:
    if exponent < 1:
        raise ValueError("exponent must be at least 1")
    projected = projected_map_count(phi, exponent)
    if projected > budget:
        raise BudgetExceeded("power", projected, budget)
    out = phi
    for _ in range(exponent - 1):
        out = compose(phi, out)
    log.debug("power %d: %d maps", exponent, out.total_maps())
    return out


# --- typed patches -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TypedPatch:
    """Types of the lattice points of a box; grid cell value -1 means 'no point'."""
    inflation: Inflation
    lo: Vector
    hi: Vector
    grid: np.ndarray = field(repr=False)
    overlap_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(int(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(int(v) for v in self.hi))
        shape = tuple(max(h - l + 1, 0) for l, h in zip(self.lo, self.hi))
        g = np.asarray(self.grid, dtype=np.int32)
        if g.shape != shape:
            raise ValueError(f"grid shape {g.shape} does not match box {shape}")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @property
    def box(self) -> tuple[Vector, Vector]:
        return self.lo, self.hi

    @property
    def dim(self) -> int:
        return self.inflation.dim

    @classmethod
    def empty(cls, inflation: Inflation) -> "TypedPatch":
        n = inflation.dim
        return cls(inflation, (0,) * n, (-1,) * n, np.zeros((0,) * n, dtype=np.int32))

    @classmethod
    def from_points(cls, inflation: Inflation, points, types, box=None) -> "TypedPatch":
        pts = np.asarray(points, dtype=np.int64).reshape(-1, inflation.dim)
        tys = np.asarray(types, dtype=np.int64).reshape(-1)
        if box is None:
            if len(pts) == 0:
                return cls.empty(inflation)
            box = (tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))
        lo, hi = (tuple(int(v) for v in box[0]), tuple(int(v) for v in box[1]))
        if len(pts) and (np.any(pts < np.array(lo)) or np.any(pts > np.array(hi))):
            raise ValueError("point outside box")
        shape = tuple(max(h - l + 1, 0) for l, h in zip(lo, hi))
        grid = np.full(shape, -1, dtype=np.int32)
        if len(pts):
            flat = np.ravel_multi_index(tuple((pts - np.array(lo)).T), shape)
            order = np.argsort(flat, kind="stable")
            fs, ts = flat[order], tys[order]
            dup = np.nonzero(fs[1:] == fs[:-1])[0]
            clash = dup[ts[dup] != ts[dup + 1]]
            if len(clash):
                k = clash[0]
                raise TypeCollision(pts[order][k], int(ts[k]), int(ts[k + 1]))
            grid.reshape(-1)[fs] = ts
        return cls(inflation, lo, hi, grid)

    @classmethod
    def from_dict(cls, inflation: Inflation, mapping: dict, box=None) -> "TypedPatch":
        items = sorted(mapping.items())
        return cls.from_points(inflation, [p for p, _ in items], [t for _, t in items], box)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Points (lexicographic order) and their types."""
        idx = np.nonzero(self.grid >= 0)
        pts = np.stack(idx, axis=1).astype(np.int64) + np.array(self.lo, dtype=np.int64) \
            if self.grid.size else np.zeros((0, self.dim), dtype=np.int64)
        return pts.reshape(-1, self.dim), self.grid[idx].astype(np.int64)

    def as_dict(self) -> dict:
        pts, tys = self.points()
        return {tuple(int(v) for v in p): int(t) for p, t in zip(pts, tys)}

    def __len__(self):
        return int((self.grid >= 0).sum())

    def __eq__(self, other):
        if not isinstance(other, TypedPatch):
            return NotImplemented
        return (self.inflation == other.inflation and self.box == other.box
                and np.array_equal(self.grid, other.grid))

    __hash__ = None

    def type_at(self, x) -> int | None:
        off = [int(a) - l for a, l in zip(x, self.lo)]
        if any(o < 0 or o >= s for o, s in zip(off, self.grid.shape)):
            return None
        t = int(self.grid[tuple(off)])
        return None if t < 0 else t

    def crop(self, lo, hi) -> "TypedPatch":
        """Restrict to (or pad with holes to) the box [lo, hi]."""
        lo, hi = tuple(int(v) for v in lo), tuple(int(v) for v in hi)
        shape = tuple(max(h - l + 1, 0) for l, h in zip(lo, hi))
        grid = np.full(shape, -1, dtype=np.int32)
        src, dst = [], []
        for a, b, sa, sb, n in zip(self.lo, self.hi, lo, hi, self.grid.shape):
            s0, s1 = max(a, sa), min(b, sb)
            if s1 < s0:
                return TypedPatch(self.inflation, lo, hi, grid)
            src.append(slice(s0 - a, s1 - a + 1))
            dst.append(slice(s0 - sa, s1 - sa + 1))
        if all(s > 0 for s in shape):
            grid[tuple(dst)] = self.grid[tuple(src)]
        return TypedPatch(self.inflation, lo, hi, grid)

    def is_complete(self, lo=None, hi=None) -> bool:
        sub = self if lo is None else self.crop(lo, hi)
        return bool((sub.grid >= 0).all())

    def hole_free_box(self, center=None) -> tuple[Vector, Vector] | None:
        """A maximal box around center containing no holes, grown one face at a time."""
        if center is None:
            pts, _ = self.points()
            if len(pts) == 0:
                return None
            center = tuple(int(round(v)) for v in pts.mean(axis=0))
        if self.type_at(center) is None:
            return None
        lo, hi = list(center), list(center)
        filled = self.grid >= 0
        base = np.array(self.lo)
        grown = True
        while grown:
            grown = False
            for axis in range(self.dim):
                for side in (-1, 1):
                    trial_lo, trial_hi = lo[:], hi[:]
                    if side < 0:
                        trial_lo[axis] -= 1
                        face = trial_lo[axis]
                    else:
                        trial_hi[axis] += 1
                        face = trial_hi[axis]
                    if face < self.lo[axis] or face > self.hi[axis]:
                        continue
                    sl = [slice(a - b, c - b + 1) for a, c, b in zip(trial_lo, trial_hi, base)]
                    sl[axis] = slice(face - base[axis], face - base[axis] + 1)
                    if filled[tuple(sl)].all():
                        lo, hi = trial_lo, trial_hi
                        grown = True
        return tuple(lo), tuple(hi)


def shrink_box(lo, hi, margin: int):
    return tuple(v + margin for v in lo), tuple(v - margin for v in hi)


def box_is_empty(lo, hi) -> bool:
    return any(h < l for l, h in zip(lo, hi))


# --- applying an MFS ------------------------------------------------------------------

def _images(phi: Mfs, pts: np.ndarray, tys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    qp = np.array(phi.inflation.power(phi.power), dtype=np.int64)
    moved = pts @ qp.T
    chunks, labels = [], []
    for j in range(phi.m):
        sel = tys == j
        if not sel.any():
            continue
        base = moved[sel]
        for i in range(phi.m):
            for f in sorted(phi.entries[i][j]):
                chunks.append(base + np.array(f.translation, dtype=np.int64))
                labels.append(np.full(len(base), i, dtype=np.int64))
    if not chunks:
        return np.zeros((0, phi.inflation.dim), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(chunks), np.concatenate(labels)


def inflated_box(phi: Mfs, lo, hi):
    """Bounding box of f(box) over all maps f of phi."""
    qp = phi.inflation.power(phi.power)
    n = len(qp)
    trans = [f.translation for _, _, f in phi.maps()] or [(0,) * n]
    out_lo, out_hi = [], []
    for r in range(n):
        a = sum(min(qp[r][c] * lo[c], qp[r][c] * hi[c]) for c in range(n))
        b = sum(max(qp[r][c] * lo[c], qp[r][c] * hi[c]) for c in range(n))
        out_lo.append(a + min(t[r] for t in trans))
        out_hi.append(b + max(t[r] for t in trans))
    return tuple(out_lo), tuple(out_hi)


def _collect(inflation, pts, tys, lo, hi):
    """Grid of images plus (first collision or None, collision count, overlap count)."""
    shape = tuple(max(h - l + 1, 0) for l, h in zip(lo, hi))
    grid = np.full(shape, -1, dtype=np.int32)
    if len(pts) == 0:
        return grid, None, 0, 0
    flat = np.ravel_multi_index(tuple((pts - np.array(lo)).T), shape)
    order = np.argsort(flat, kind="stable")
    fs, ts = flat[order], tys[order]
    dup = np.nonzero(fs[1:] == fs[:-1])[0]
    clash = dup[ts[dup] != ts[dup + 1]]
    overlaps = int(len(dup) - len(clash))
    first = None
    if len(clash):
        k = clash[0]
        first = (tuple(int(v) for v in pts[order][k]), int(ts[k]), int(ts[k + 1]))
    grid.reshape(-1)[fs] = ts
    return grid, first, int(len(np.unique(fs[clash]))), overlaps


def apply(phi: Mfs, patch: TypedPatch) -> TypedPatch:
    """Image of a patch: union over j and f in phi_ij of f(points of type j), typed i."""
    if phi.inflation != patch.inflation:
        raise InflationMismatch()
    pts, tys = patch.points()
    if len(pts) == 0:
        return TypedPatch.empty(phi.inflation)
    lo, hi = inflated_box(phi, patch.lo, patch.hi)
    out_pts, out_tys = _images(phi, pts, tys)
    grid, first, _, overlaps = _collect(phi.inflation, out_pts, out_tys, lo, hi)
    if first is not None:
        raise TypeCollision(*first)
    if overlaps:
        log.warning("%d within-type overlaps while applying MFS", overlaps)
    return TypedPatch(phi.inflation, lo, hi, grid, overlap_count=overlaps)


@dataclass(frozen=True)
class FixedPointReport:
    window: tuple[Vector, Vector]
    verified: int
    mismatches: int
    missing: int
    collisions: int
    overlaps: int

    @property
    def violations(self) -> int:
        return self.mismatches + self.missing + self.collisions + self.overlaps

    @property
    def ok(self) -> bool:
        return self.violations == 0


def verify_fixed_point(phi: Mfs, patch: TypedPatch, margin: int = 0) -> FixedPointReport:
    """Compare phi(patch) with patch on the box shrunk by margin."""
    lo, hi = shrink_box(patch.lo, patch.hi, margin)
    if box_is_empty(lo, hi):
        if len(patch) == 0:
            return FixedPointReport((lo, hi), 0, 0, 0, 0, 0)
        raise WindowTooSmall(f"margin {margin} leaves no window inside {patch.box}")
    pts, tys = patch.points()
    big_lo, big_hi = inflated_box(phi, patch.lo, patch.hi)
    if any(a < b for a, b in zip(lo, big_lo)) or any(a > b for a, b in zip(hi, big_hi)):
        raise WindowTooSmall("shrunken window is not inside the inflated box")
    img_pts, img_tys = _images(phi, pts, tys)
    keep = np.all((img_pts >= np.array(lo)) & (img_pts <= np.array(hi)), axis=1)
    grid, _, collisions, overlaps = _collect(phi.inflation, img_pts[keep], img_tys[keep], lo, hi)
    own = patch.crop(lo, hi).grid
    both = (grid >= 0) & (own >= 0)
    agree = both & (grid == own)
    return FixedPointReport(
        window=(lo, hi),
        verified=int(agree.sum()),
        mismatches=int((both & (grid != own)).sum()),
        missing=int(((grid >= 0) ^ (own >= 0)).sum()),
        collisions=collisions,
        overlaps=overlaps,
    )


# --- seeds ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Seed:
    point: Vector
    type: int
    power: int


def find_seed(phi: Mfs, max_power: int, budget: int = DEFAULT_MAP_BUDGET) -> Seed:
    """Smallest M, then type, then map order, with an integral fixed point in (Phi^M)_ii."""
    current = None
    for exponent in range(1, max_power + 1):
        current = phi if current is None else compose(phi, current)
        if current.total_maps() > budget:
            raise BudgetExceeded("seed search", current.total_maps(), budget, reached=exponent)
        for i in range(phi.m):
            for f in sorted(current.entries[i][i]):
                x = f.fixed_point(phi.inflation)
                if all(v.denominator == 1 for v in x):
                    return Seed(tuple(int(v) for v in x), i, exponent)
    raise SeedNotFound(max_power)


def seed_patch(phi: Mfs, seed: Seed) -> TypedPatch:
    return TypedPatch.from_points(phi.inflation, [seed.point], [seed.type])
