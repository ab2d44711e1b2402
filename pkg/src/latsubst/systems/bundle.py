"""System bundles: a validated MFS together with a seed patch and optional closed forms."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from ..errors import DetTooSmall, NotExpansive, NotPrimitive, ValidationError, WindowTooSmall
from ..lattice import determinant, validate_inflation
from ..mfs import Mfs, PFCheck, TypedPatch, apply, pf_eigenvalue_equals_q, subst_matrix
from ..totalindex import CosetUnion

log = logging.getLogger(__name__)


def validate_system(phi: Mfs) -> PFCheck:
    """Raise ValidationError naming the first violated hypothesis."""
    try:
        validate_inflation(phi.inflation.matrix)
    except DetTooSmall as exc:
        raise ValidationError("|det Q| >= 2", str(exc)) from exc
    except NotExpansive as exc:
        raise ValidationError("expansive", str(exc)) from exc
    try:
        pf = pf_eigenvalue_equals_q(subst_matrix(phi), phi.inflation.q ** phi.power)
    except NotPrimitive as exc:
        raise ValidationError("primitive", str(exc)) from exc
    if not pf.holds:
        raise ValidationError("PF = |det Q|", "no positive eigenvector for eigenvalue q")
    return pf


@dataclass(frozen=True, eq=False)
class SystemBundle:
    name: str
    mfs: Mfs
    seed: TypedPatch
    seed_power: int = 1            # seed is a patch of a fixed point of mfs^seed_power
    descriptions: tuple[CosetUnion, ...] | None = None
    notes: str = ""
    pf: PFCheck | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.pf is None:
            object.__setattr__(self, "pf", validate_system(self.mfs))
        if self.descriptions is not None:
            object.__setattr__(self, "descriptions", tuple(self.descriptions))

    @property
    def inflation(self):
        return self.mfs.inflation

    def structurally_equal(self, other: "SystemBundle") -> bool:
        return (self.mfs == other.mfs and self.seed == other.seed
                and self.seed_power == other.seed_power)


def _preimage_box(phi: Mfs, lo, hi):
    """Bounding box of all x with f(x) in [lo, hi] for some map f of phi."""
    qp = phi.inflation.power(phi.power)
    n = len(qp)
    det = determinant(qp)
    adj = _adjugate(qp)
    corners = list(product(*zip(lo, hi)))
    out_lo, out_hi = [None] * n, [None] * n
    for t in sorted({f.translation for _, _, f in phi.maps()}):
        for c in corners:
            y = adj.dot(np.array([a - b for a, b in zip(c, t)], dtype=object))
            for r in range(n):
                v = Fraction(int(y[r]), det)
                out_lo[r] = v if out_lo[r] is None else min(out_lo[r], v)
                out_hi[r] = v if out_hi[r] is None else max(out_hi[r], v)
    return (tuple(-((-v.numerator) // v.denominator) for v in out_lo),
            tuple(v.numerator // v.denominator for v in out_hi))


def _adjugate(a):
    n = len(a)
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            minor = [[a[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            out[j, i] = (-1) ** (i + j) * (determinant(minor) if minor else 1)
    return out


def _intersect(box_a, box_b):
    return (tuple(max(x, y) for x, y in zip(box_a[0], box_b[0])),
            tuple(min(x, y) for x, y in zip(box_a[1], box_b[1])))


def generate_patch(bundle: SystemBundle, iterations: int, radius: int,
                   allow_holes: bool = False) -> TypedPatch:
    """mfs^iterations(seed) restricted to [-radius, radius]^n.

    Each step only keeps points whose images can still reach the target box.
    """
    phi = bundle.mfs
    n = phi.inflation.dim
    target = ((-radius,) * n, (radius,) * n)
    ancestors = [target]
    for _ in range(iterations):
        ancestors.append(_preimage_box(phi, *ancestors[-1]))
    patch = bundle.seed
    for step in range(iterations):
        box = _intersect(patch.box, ancestors[iterations - step])
        patch = apply(phi, patch.crop(*box))
    out = patch.crop(*target)
    if not allow_holes and not out.is_complete():
        missing = int((out.grid < 0).sum())
        raise WindowTooSmall(f"{iterations} iterations leave {missing} points of the box uncovered")
    return out
