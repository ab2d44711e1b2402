"""Coset parts, efficient decompositions and exact total indices."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .coincidence import _window_cells, pure_classes
from .errors import DisjointnessViolation
from .lattice import Coset, Inflation, Vector, coset_contains, coset_measure, residue_of
from .mfs import TypedPatch

DEFAULT_VERIFY_DEPTH = 6


def _vec(v) -> Vector:
    return tuple(int(x) for x in v)


@dataclass(frozen=True)
class GeometricFamily:
    """Cosets a(k,t) + Q^(d0+k) L for k >= 0 and 0 <= t < c * r^k, where
    a(k,t) = offset + g^k * growth + t * step and g defaults to r."""
    inflation: Inflation = field(repr=False)
    offset: Vector
    growth: Vector
    step: Vector
    count_ratio: int = 2
    depth_offset: int = 0
    count_scale: int = 1
    growth_ratio: int | None = None
    verify_depth: int = DEFAULT_VERIFY_DEPTH

    def __post_init__(self):
        for name in ("offset", "growth", "step"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        if self.growth_ratio is None:
            object.__setattr__(self, "growth_ratio", self.count_ratio)
        if not 0 <= self.count_ratio < self.inflation.q:
            raise ValueError("count ratio must be below q for a convergent index")
        _check_disjoint(((self, c) for c in self.members_upto(self.verify_depth)), self.inflation)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.count_ratio, self.inflation.q)

    def count(self, k: int) -> int:
        return self.count_scale * self.count_ratio ** k

    def translation(self, k: int, t: int) -> Vector:
        g = self.growth_ratio ** k
        return tuple(o + g * a + t * s for o, a, s in zip(self.offset, self.growth, self.step))

    def members(self, k: int) -> list[Coset]:
        d = self.depth_offset + k
        return [residue_of(self.inflation, self.translation(k, t), d) for t in range(self.count(k))]

    def members_upto(self, levels: int) -> list[Coset]:
        return [c for k in range(levels + 1) for c in self.members(k)]

    def index(self) -> Fraction:
        q = self.inflation.q
        return Fraction(self.count_scale * q, q ** self.depth_offset * (q - self.count_ratio))

    def truncated_index(self, levels: int) -> Fraction:
        return sum((coset_measure(self.inflation, c) for c in self.members_upto(levels)), Fraction(0))


@dataclass(frozen=True)
class Ray:
    """{origin + t * direction}: t >= 0, or all integers t when two_sided."""
    origin: Vector
    direction: Vector
    two_sided: bool = False

    def __post_init__(self):
        object.__setattr__(self, "origin", _vec(self.origin))
        object.__setattr__(self, "direction", _vec(self.direction))

    def points(self, t_max: int) -> list[Vector]:
        ts = range(-t_max if self.two_sided else 0, t_max + 1)
        return [tuple(o + t * d for o, d in zip(self.origin, self.direction)) for t in ts]

    def points_in_box(self, lo, hi) -> list[Vector]:
        t_lo, t_hi = (-10**18 if self.two_sided else 0), 10**18
        for o, d, a, b in zip(self.origin, self.direction, lo, hi):
            if d == 0:
                if not a <= o <= b:
                    return []
                continue
            l, h = sorted(((a - o) / d, (b - o) / d))
            t_lo, t_hi = max(t_lo, int(np.ceil(l))), min(t_hi, int(np.floor(h)))
        return [tuple(o + t * d for o, d in zip(self.origin, self.direction))
                for t in range(t_lo, t_hi + 1)]


def _check_disjoint(labelled: Iterable[tuple[object, Coset]], inflation: Inflation,
                    points: Iterable[tuple[object, Vector]] = ()):
    """Raise DisjointnessViolation at the first coset (or point) meeting an earlier one.

    Cosets are processed one depth level at a time; each level is reduced against
    every shallower level with a single vectorised residue computation.
    """
    items = sorted(labelled, key=lambda lc: lc[1].sort_key())
    seen: dict[int, dict[int, object]] = {}
    start = 0
    while start < len(items):
        depth = items[start][1].depth
        stop = start
        while stop < len(items) and items[stop][1].depth == depth:
            stop += 1
        level = items[start:stop]
        reps = np.array([c.rep for _, c in level], dtype=np.int64).reshape(len(level), inflation.dim)
        first = None
        for d, table in seen.items():
            idx = inflation.residues(d).index_array(reps).tolist()
            for pos, r in enumerate(idx):
                if r in table and (first is None or pos < first[0]):
                    first = (pos, table[r])
                    break
        own: dict[int, object] = {}
        for pos, (label, c) in enumerate(level):
            if first is not None and pos >= first[0]:
                break
            if c.index in own:
                first = (pos, own[c.index])
                break
            own[c.index] = label
        if first is not None:
            pos, hit = first
            raise DisjointnessViolation(level[pos][1].rep, hit, level[pos][0])
        seen[depth] = own
        start = stop
    owner: dict[Vector, object] = {}
    for label, p in points:
        for d, table in seen.items():
            hit = table.get(inflation.residues(d).index(p))
            if hit is not None and hit != label:
                raise DisjointnessViolation(p, hit, label)
        prev = owner.setdefault(p, label)
        if prev != label:
            raise DisjointnessViolation(p, prev, label)


@dataclass(frozen=True)
class CosetUnion:
    inflation: Inflation = field(repr=False)
    explicit: tuple[Coset, ...] = ()
    families: tuple[GeometricFamily, ...] = ()
    residual: tuple[Ray, ...] = ()
    residual_flag: bool = False
    verify_depth: int = DEFAULT_VERIFY_DEPTH

    def __post_init__(self):
        object.__setattr__(self, "explicit", tuple(sorted(self.explicit, key=Coset.sort_key)))
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "residual", tuple(self.residual))
        if self.residual:
            object.__setattr__(self, "residual_flag", True)
        _check_disjoint(self.labelled_cosets("self"), self.inflation)

    def labelled_cosets(self, label, levels: int | None = None):
        levels = self.verify_depth if levels is None else levels
        out = [(label, c) for c in self.explicit]
        for fam in self.families:
            out.extend((label, c) for c in fam.members_upto(levels))
        return out

    def total_index(self) -> Fraction:
        explicit = sum((coset_measure(self.inflation, c) for c in self.explicit), Fraction(0))
        return explicit + sum((f.index() for f in self.families), Fraction(0))

    def membership(self, points, family_levels: int, residual_box=None) -> np.ndarray:
        """Boolean mask of points lying in the union (families truncated at family_levels)."""
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.inflation.dim)
        by_depth: dict[int, set] = {}
        for _, c in self.labelled_cosets(None, family_levels):
            by_depth.setdefault(c.depth, set()).add(c.index)
        mask = np.zeros(len(pts), dtype=bool)
        for d, idxs in by_depth.items():
            mask |= np.isin(self.inflation.residues(d).index_array(pts), np.fromiter(idxs, dtype=np.int64))
        if self.residual and len(pts):
            lo = residual_box[0] if residual_box else tuple(pts.min(axis=0))
            hi = residual_box[1] if residual_box else tuple(pts.max(axis=0))
            ray_pts = {p for r in self.residual for p in r.points_in_box(lo, hi)}
            if ray_pts:
                mask |= np.array([tuple(p) in ray_pts for p in pts.tolist()])
        return mask


def total_index(u: CosetUnion) -> Fraction:
    return u.total_index()


# --- efficient decomposition ------------------------------------------------------------

def irredundant(cosets: Sequence[Coset]) -> list[Coset]:
    """Drop duplicates and cosets nested inside others (no merging)."""
    kept: list[Coset] = []
    chosen: dict[int, set] = {}
    for c in sorted(set(cosets), key=Coset.sort_key):
        infl = c.inflation
        if any(infl.residues(d).index(c.rep) in s for d, s in chosen.items() if d <= c.depth):
            continue
        kept.append(c)
        chosen.setdefault(c.depth, set()).add(c.index)
    return kept


def efficient_decomposition(cosets: Sequence[Coset], coarsen: bool = True) -> list[Coset]:
    """The unique decomposition of the union into maximal cosets, shallowest first.

    Every coset contained in the union is found, including ones assembled from
    several smaller inputs (e.g. q sibling cosets merge into their parent).
    With coarsen=False only nested and duplicate inputs are absorbed.
    """
    base = irredundant(cosets)
    if not coarsen or not base:
        return base
    infl = base[0].inflation
    deepest = max(c.depth for c in base)
    rs_k = infl.residues(deepest)
    leaves = []
    for c in base:
        spread = infl.residues(deepest - c.depth).all_reps()
        qk = np.array(infl.power(c.depth), dtype=np.int64)
        leaves.append(rs_k.index_array(spread @ qk.T + np.array(c.rep, dtype=np.int64)))
    leaf_idx = np.unique(np.concatenate(leaves))
    leaf_reps = rs_k.all_reps()[leaf_idx]
    chosen: list[Coset] = []
    taken: dict[int, set] = {}
    for d in range(deepest + 1):
        rs_d = infl.residues(d)
        anc = rs_d.index_array(leaf_reps)
        counts = np.bincount(anc, minlength=rs_d.size)
        for r in np.nonzero(counts == infl.q ** (deepest - d))[0]:
            rep = rs_d.rep_of_index(int(r))
            if any(infl.residues(e).index(rep) in s for e, s in taken.items()):
                continue
            taken.setdefault(d, set()).add(int(r))
            chosen.append(Coset(infl, d, rep))
    return chosen


# --- model-set verdict -------------------------------------------------------------------

@dataclass(frozen=True)
class IndexVerdict:
    holds: bool
    indices: tuple[Fraction, ...]
    total: Fraction


def model_set_criterion(descriptions: Sequence[CosetUnion], ray_extent: int = 64) -> IndexVerdict:
    """Sum of total indices equals 1, after an exact finite-depth disjointness check."""
    if descriptions:
        infl = descriptions[0].inflation
        labelled = [lc for i, u in enumerate(descriptions) for lc in u.labelled_cosets(i)]
        points = [(i, p) for i, u in enumerate(descriptions) for r in u.residual for p in r.points(ray_extent)]
        _check_disjoint(labelled, infl, points)
    indices = tuple(u.total_index() for u in descriptions)
    total = sum(indices, Fraction(0))
    return IndexVerdict(total == 1, indices, total)


def index_monotonicity_check(x: CosetUnion, y: CosetUnion) -> bool:
    """c(X) <= c(Y) for X inside Y; containment is checked to the verification depth."""
    outer = [c for _, c in y.labelled_cosets(None)]
    for _, c in x.labelled_cosets(None):
        if not any(coset_contains(o, c) for o in outer):
            raise ValueError(f"{c} is not inside any coset of the larger union")
    return x.total_index() <= y.total_index()


# --- empirical coset parts from a patch ---------------------------------------------------

def coset_scan(patch: TypedPatch, max_depth: int, margin: int = 0, min_reps: int = 2,
               types: int | None = None) -> tuple[CosetUnion, ...]:
    """Shallowest-first greedy selection of window-pure cosets; a lower bound per type."""
    infl = patch.inflation
    cells = _window_cells(patch, margin)
    if types is None:
        present = cells[1][cells[1] >= 0]
        types = int(present.max()) + 1 if len(present) else 0
    picked: list[list[Coset]] = [[] for _ in range(types)]
    taken: dict[int, set] = {}
    for d in range(max_depth + 1):
        rs, label, _ = pure_classes(patch, d, margin, min_reps, cells)
        for r in np.nonzero(label >= 0)[0]:
            rep = rs.rep_of_index(int(r))
            if any(infl.residues(e).index(rep) in s for e, s in taken.items()):
                continue
            taken.setdefault(d, set()).add(int(r))
            picked[int(label[r])].append(Coset(infl, d, rep))
    return tuple(CosetUnion(infl, tuple(p)) for p in picked)
