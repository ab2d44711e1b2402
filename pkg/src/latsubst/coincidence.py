"""Congruence classes, (modular) coincidences and finite-depth window approximations."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded, WindowTooSmall
from .lattice import DEFAULT_RESIDUE_BUDGET, Coset, Inflation, ResidueSystem, residue_of
from .mfs import Mfs, TypedPatch, box_is_empty, shrink_box, subst_matrix


def has_coincidence(phi: Mfs) -> int | None:
    """Smallest row whose entries all share a common map."""
    for i, row in enumerate(phi.entries):
        common = set(row[0]) if row else set()
        for cell in row[1:]:
            common &= cell
            if not common:
                break
        if common:
            return i
    return None


@dataclass(frozen=True)
class CongruenceClass:
    residue: Coset
    members: frozenset  # of (row, column, AffineMap)

    @property
    def rows(self) -> frozenset:
        return frozenset(i for i, _, _ in self.members)


def congruence_classes(phi: Mfs, budget: int = DEFAULT_RESIDUE_BUDGET) -> list[CongruenceClass]:
    infl = phi.inflation
    if infl.q ** phi.power > budget:
        raise BudgetExceeded("congruence classes", infl.q ** phi.power, budget)
    groups: dict[Coset, set] = {}
    for i, j, f in phi.maps():
        groups.setdefault(residue_of(infl, f.translation, phi.power), set()).add((i, j, f))
    return [CongruenceClass(c, frozenset(ms)) for c, ms in sorted(groups.items(), key=lambda kv: kv[0].sort_key())]


# --- row tables: which rows of Phi^M own a translation in each residue class ---------

def row_tables(phi: Mfs, depth: int,
               budget: int = DEFAULT_RESIDUE_BUDGET) -> Iterator[tuple[int, ResidueSystem, np.ndarray]]:
    """Yield (M, residues mod Q^{Mp}L, table) for M = 0..depth.

    table[r, i] is True iff row i of Phi^M holds a map whose translation reduces to
    residue r.  Built by the recursion T_M = Q^p T_{M-1} + t(f) so that no power of
    Phi is ever materialised.
    """
    infl, p, m = phi.inflation, phi.power, phi.m
    rs = infl.residues(0)
    table = np.ones((1, m), dtype=bool)
    yield 0, rs, table
    qp = np.array(infl.power(p), dtype=np.int64)
    maps = list(phi.maps())
    for level in range(1, depth + 1):
        size = infl.q ** (level * p)
        if size > budget:
            raise BudgetExceeded("residue table", size, budget, reached=level - 1)
        new_rs = infl.residues(level * p)
        moved = rs.all_reps() @ qp.T
        new = np.zeros((size, m), dtype=bool)
        for i, j, f in maps:
            src = moved[table[:, j]]
            if len(src):
                new[new_rs.index_array(src + np.array(f.translation, dtype=np.int64)), i] = True
        rs, table = new_rs, new
        yield level, rs, table


@dataclass(frozen=True)
class ModularCoincidence:
    power: int          # M
    residue: Coset      # a, at depth M*p
    row: int            # the single row holding Phi^M[a]
    coincident_residues: int


def find_modular_coincidence(phi: Mfs, max_power: int,
                             budget: int = DEFAULT_RESIDUE_BUDGET) -> ModularCoincidence | None:
    for level, rs, table in row_tables(phi, max_power, budget):
        if level == 0:
            continue
        counts = table.sum(axis=1)
        single = np.nonzero(counts == 1)[0]
        if len(single):
            r = int(single[0])
            row = int(np.argmax(table[r]))
            rep = rs.rep_of_index(r)
            return ModularCoincidence(level, Coset(phi.inflation, level * phi.power, rep), row, len(single))
    return None


@dataclass(frozen=True)
class WindowApproximation:
    inflation: Inflation
    depth: int
    residues: ResidueSystem
    residue_sets: tuple[np.ndarray, ...]   # sorted residue indices per type
    measures: tuple[Fraction, ...]

    def cosets(self, i: int) -> list[Coset]:
        d = self.residues.depth
        return [Coset(self.inflation, d, self.residues.rep_of_index(int(r))) for r in self.residue_sets[i]]


def window_residues(phi: Mfs, k: int, budget: int = DEFAULT_RESIDUE_BUDGET) -> WindowApproximation:
    """R_i^(k): the depth-k residues met by the attractor component W_i."""
    for _, rs, table in row_tables(phi, k, budget):
        pass
    sets = tuple(np.nonzero(table[:, i])[0] for i in range(phi.m))
    measures = tuple(Fraction(len(s), rs.size) for s in sets)
    return WindowApproximation(phi.inflation, k, rs, sets, measures)


@dataclass(frozen=True)
class MeasureGaps:
    depth: int
    measures: tuple[Fraction, ...]
    predicted: tuple[Fraction, ...]

    @property
    def gaps(self) -> tuple[Fraction, ...]:
        return tuple(p - m for p, m in zip(self.predicted, self.measures))


def measure_vector_check(phi: Mfs, k: int, budget: int = DEFAULT_RESIDUE_BUDGET) -> MeasureGaps:
    """Gap between the depth-k measures and one step of the linear measure recursion."""
    if k < 1:
        raise ValueError("k must be at least 1")
    prev = window_residues(phi, k - 1, budget).measures
    cur = window_residues(phi, k, budget).measures
    s = subst_matrix(phi)
    qp = phi.inflation.q ** phi.power
    predicted = tuple(sum((int(s[i, j]) * prev[j] for j in range(phi.m)), Fraction(0)) / qp
                      for i in range(phi.m))
    return MeasureGaps(k, cur, predicted)


# --- window-certified cosets in a patch -------------------------------------------------

@dataclass(frozen=True)
class CosetCandidate:
    type: int
    coset: Coset
    representatives: int
    certified_by: str = "window"


def _window_cells(patch: TypedPatch, margin: int):
    lo, hi = shrink_box(patch.lo, patch.hi, margin)
    if box_is_empty(lo, hi):
        raise WindowTooSmall(f"margin {margin} empties the window {patch.box}")
    sub = patch.crop(lo, hi)
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in mesh], axis=1)
    return pts, sub.grid.reshape(-1).astype(np.int64)


def pure_classes(patch: TypedPatch, depth: int, margin: int = 0, min_reps: int = 2,
                 cells=None):
    """Per residue at the given depth: (type or -1, representative count) in the window."""
    pts, tys = cells if cells is not None else _window_cells(patch, margin)
    rs = patch.inflation.residues(depth)
    idx = rs.index_array(pts)
    counts = np.bincount(idx, minlength=rs.size)
    if (counts == 0).any():
        raise WindowTooSmall(f"window misses residues at depth {depth}")
    lo_t = np.full(rs.size, np.iinfo(np.int64).max)
    hi_t = np.full(rs.size, -2, dtype=np.int64)
    np.minimum.at(lo_t, idx, tys)
    np.maximum.at(hi_t, idx, tys)
    pure = (lo_t == hi_t) & (lo_t >= 0) & (counts >= min_reps)
    label = np.where(pure, lo_t, -1)
    return rs, label, counts


def coset_in_type(patch: TypedPatch, max_depth: int, margin: int = 0, min_reps: int = 2,
                  maximal_only: bool = True) -> list[CosetCandidate]:
    """Cosets a + Q^M L (M <= max_depth) whose window representatives all share one type."""
    cells = _window_cells(patch, margin)
    found: list[CosetCandidate] = []
    chosen: dict[int, set] = {}
    for depth in range(max_depth + 1):
        rs, label, counts = pure_classes(patch, depth, margin, min_reps, cells)
        for r in np.nonzero(label >= 0)[0]:
            rep = rs.rep_of_index(int(r))
            if maximal_only and any(patch.inflation.residues(d).index(rep) in s
                                    for d, s in chosen.items()):
                continue
            chosen.setdefault(depth, set()).add(int(r))
            found.append(CosetCandidate(int(label[r]), Coset(patch.inflation, depth, rep), int(counts[r])))
    return found
