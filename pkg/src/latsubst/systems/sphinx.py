"""The sphinx system: 36 point types on Z^2 (oblique coordinates), inflation x -> 2Rx + (1,0).

A type is (orientation g, base tile, letter).  The base tiles are the two-point
sphinx '1' (letters a, b) and the four-point sphinx '4' (letters a..d); g runs
over the point symmetries D3 = [I, A, A^2, S, SA, SA^2] acting linearly on L.
Only the maps of the g = I columns are tabulated; every other column is the
conjugate template: with G' = R G R, the entry (H, base, letter) + offset of a
template column becomes row (G'H, base, letter) with translation (1,0) + G' offset.
"""
from __future__ import annotations

from ..lattice import Inflation, identity, matmul, matvec
from ..mfs import AffineMap, Mfs, TypedPatch, apply
from .bundle import SystemBundle

REFLECTION = ((1, 1), (0, -1))          # R; R^2 = I
ROTATION = ((-1, -1), (1, 0))           # A, order 3
SWAP = ((0, 1), (1, 0))                 # S
SHIFT = (1, 0)

ORIENTATION_NAMES = ("I", "A", "A2", "S", "SA", "SA2")
BASE_LETTERS = (("1", "ab"), ("4", "abcd"))


def orientations() -> list[tuple[tuple[int, ...], ...]]:
    a2 = matmul(ROTATION, ROTATION)
    rots = [identity(2), ROTATION, a2]
    return rots + [matmul(SWAP, g) for g in rots]


# column (base, letter) of orientation I -> [(row orientation, row base, row letter, offset)]
TEMPLATES = {
    ("1", "a"): [("SA", "4", "a", (-1, 1)), ("SA", "4", "b", (-1, 2)), ("SA", "4", "c", (0, 1)),
                 ("SA", "4", "d", (1, 0)), ("I", "4", "a", (0, 0)), ("I", "4", "b", (0, -1)),
                 ("I", "4", "c", (1, -1)), ("I", "4", "d", (2, -1))],
    ("1", "b"): [("I", "1", "a", (1, 0)), ("I", "1", "b", (0, 0)), ("I", "4", "a", (-1, 0)),
                 ("I", "4", "b", (-1, -1)), ("I", "4", "c", (0, -1)), ("I", "4", "d", (1, -1))],
    ("4", "a"): [("SA", "1", "a", (0, 0)), ("SA", "1", "b", (-1, 1))],
    ("4", "b"): [("I", "1", "a", (1, 0)), ("I", "1", "b", (0, 0))],
    ("4", "c"): [("I", "4", "a", (0, 0)), ("I", "4", "b", (0, -1)), ("I", "4", "c", (1, -1)),
                 ("I", "4", "d", (2, -1))],
    ("4", "d"): [("I", "1", "a", (0, 0)), ("I", "1", "b", (-1, 0))],
}

# conventional 1..12 tile numbers that map onto orientation.base names
NUMBERED_LABELS = {"1": "I.1", "4": "I.4", "9": "SA.4", "12": "SA.1"}


def sphinx_types() -> list[tuple[int, str, str]]:
    return [(g, base, letter) for g in range(6) for base, letters in BASE_LETTERS for letter in letters]


def type_name(t) -> str:
    g, base, letter = t
    return f"{ORIENTATION_NAMES[g]}.{base}{letter}"


def sphinx_mfs() -> Mfs:
    group = orientations()
    types = sphinx_types()
    index = {t: k for k, t in enumerate(types)}
    named = {name: group[k] for k, name in enumerate(ORIENTATION_NAMES)}
    triples = []
    for g, mat in enumerate(group):
        conj = matmul(REFLECTION, matmul(mat, REFLECTION))
        for (base, letter), entries in TEMPLATES.items():
            col = index[(g, base, letter)]
            for h_name, row_base, row_letter, offset in entries:
                h = group.index(matmul(conj, named[h_name]))
                moved = matvec(conj, offset)
                triples.append((index[(h, row_base, row_letter)], col,
                                AffineMap(1, (SHIFT[0] + moved[0], SHIFT[1] + moved[1]))))
    infl = Inflation(tuple(tuple(2 * v for v in row) for row in REFLECTION))
    return Mfs.from_triples(infl, len(types), triples, tuple(type_name(t) for t in types))


def tile_seed(phi: Mfs) -> TypedPatch:
    """One upright two-point sphinx: b at the T-fixed point (-1,0), a at the origin."""
    names = phi.type_names
    return TypedPatch.from_dict(phi.inflation, {(-1, 0): names.index("I.1b"), (0, 0): names.index("I.1a")})


SEED_GROWTH = 6
SEED_RADIUS = 8


def box_seed(phi: Mfs, growth: int = SEED_GROWTH, radius: int = SEED_RADIUS) -> TypedPatch:
    """The tile seed grown a few steps and cut to a complete box around the origin."""
    patch = tile_seed(phi)
    for _ in range(growth):
        patch = apply(phi, patch)
    return patch.crop((-radius, -radius), (radius, radius))


def sphinx() -> SystemBundle:
    phi = sphinx_mfs()
    return SystemBundle("sphinx", phi, box_seed(phi), 1, None,
                        notes="types named orientation.base+letter; numbered tiles " +
                        ", ".join(f"{k}={v}" for k, v in NUMBERED_LABELS.items()))
