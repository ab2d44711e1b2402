"""Chair systems in dimension n: 2^n point types on Z^n with Q = 2I."""
from __future__ import annotations

from ..lattice import Inflation
from ..mfs import AffineMap, Mfs, TypedPatch
from ..totalindex import CosetUnion, GeometricFamily, Ray
from .bundle import SystemBundle

MAX_CHAIR_DIM = 6


def corner_vectors(n: int) -> list[tuple[int, ...]]:
    """e_1..e_{2^n}: binary digits of i-1 for the first half, complements for the second."""
    half = 2 ** (n - 1)
    first = [tuple((i >> b) & 1 for b in range(n)) for i in range(half)]
    return first + [tuple(1 - v for v in e) for e in first]


def partner(i: int, n: int) -> int:
    """The type i +- 2^{n-1} (0-based)."""
    half = 2 ** (n - 1)
    return i + half if i < half else i - half


def chair_mfs(n: int) -> Mfs:
    e = corner_vectors(n)
    m = len(e)
    triples = []
    for i in range(m):
        p = partner(i, n)
        triples.append((i, i, AffineMap(1, e[p])))
        triples.extend((j, i, AffineMap(1, e[j])) for j in range(m) if j != p)
    infl = Inflation(tuple(tuple(2 if r == c else 0 for c in range(n)) for r in range(n)))
    return Mfs.from_triples(infl, m, triples, tuple(str(i + 1) for i in range(m)))


def _bits(v) -> int:
    return sum(int(x) << b for b, x in enumerate(v))


def chair_seed(n: int) -> dict:
    """Type assignment of the corner cube {0,-1}^n."""
    half = 2 ** (n - 1)
    seed = {}
    for k in range(2 ** n):
        x = tuple(-((k >> b) & 1) for b in range(n))
        if all(v == 0 for v in x):
            seed[x] = 0
        elif x[-1] == -1:
            seed[x] = _bits(tuple(1 + v for v in x))
        else:
            seed[x] = _bits(tuple(-v for v in x)) + half
    return seed


def chair_descriptions(n: int, infl: Inflation, verify_depth: int = 6) -> tuple[CosetUnion, ...]:
    e = corner_vectors(n)
    m = len(e)
    out = []
    for i in range(m):
        p = partner(i, n)
        step = tuple(a - b for a, b in zip(e[p], e[i]))
        fams = tuple(
            GeometricFamily(infl, offset=tuple(-v for v in e[i]),
                            growth=tuple(2 * (a - b) for a, b in zip(e[i], e[j])),
                            step=step, count_ratio=2, depth_offset=2, verify_depth=verify_depth)
            for j in range(m) if j not in (i, p))
        if i == 0:
            rays = (Ray((0,) * n, step, two_sided=True),)
        elif i == partner(0, n):
            rays = ()
        else:
            rays = (Ray(tuple(-v for v in e[p]), tuple(-v for v in step)),)
        out.append(CosetUnion(infl, (), fams, rays, verify_depth=verify_depth))
    return tuple(out)


def chair_nd(n: int) -> SystemBundle:
    if not 2 <= n <= MAX_CHAIR_DIM:
        raise ValueError(f"chair dimension must lie in 2..{MAX_CHAIR_DIM}")
    phi = chair_mfs(n)
    seed = TypedPatch.from_dict(phi.inflation, chair_seed(n))
    return SystemBundle(f"chair{n}d" if n != 2 else "chair2d", phi, seed, 1,
                        chair_descriptions(n, phi.inflation),
                        notes="types 1..2^n; lattice Z^n; Q = 2I")


def chair2d() -> SystemBundle:
    return chair_nd(2)
