"""JSON system and coset-description files, and the builtin registry."""
from __future__ import annotations

import json
from pathlib import Path

from ..errors import DetTooSmall, NotExpansive, ParseError, ValidationError
from ..lattice import Inflation, residue_of, validate_inflation
from ..mfs import AffineMap, Mfs, TypedPatch, find_seed
from ..totalindex import CosetUnion, GeometricFamily, Ray
from .bundle import SystemBundle, validate_system

DEFAULT_SEED_SEARCH = 4


def _read_json(source):
    if isinstance(source, dict):
        return source
    try:
        return json.loads(Path(source).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{source}: {exc}") from exc


def _int_vector(v, n, what):
    if not isinstance(v, list) or len(v) != n or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ParseError(f"{what} must be a list of {n} integers, got {v!r}")
    return tuple(v)


def _inflation(raw) -> Inflation:
    n = raw.get("dim")
    matrix = raw.get("inflation")
    if not isinstance(matrix, list) or not matrix:
        raise ParseError("missing inflation matrix")
    n = len(matrix) if n is None else n
    rows = tuple(_int_vector(r, n, "inflation row") for r in matrix)
    if len(rows) != n:
        raise ParseError("inflation must be dim x dim")
    try:
        return validate_inflation(rows)
    except (DetTooSmall, NotExpansive) as exc:
        hypothesis = "expansive" if isinstance(exc, NotExpansive) else "|det Q| >= 2"
        raise ValidationError(hypothesis, str(exc)) from exc


# --- systems ------------------------------------------------------------------------------

def system_to_dict(bundle: SystemBundle) -> dict:
    phi = bundle.mfs
    pts, tys = bundle.seed.points()
    out = {
        "name": bundle.name,
        "dim": phi.inflation.dim,
        "inflation": [list(r) for r in phi.inflation.matrix],
        "types": list(phi.type_names),
        "maps": [{"row": i, "col": j, "translation": list(f.translation)} for i, j, f in phi.maps()],
        "seed": [{"point": [int(v) for v in p], "type": int(t)} for p, t in zip(pts, tys)],
        "seed_power": bundle.seed_power,
    }
    if bundle.descriptions is not None:
        out["descriptions"] = [union_to_dict(u) for u in bundle.descriptions]
    return out


def load_system(source, seed_search_power: int = DEFAULT_SEED_SEARCH) -> SystemBundle:
    """Parse and validate a system file; without a seed, one is searched for."""
    raw = _read_json(source)
    try:
        infl = _inflation(raw)
        n = infl.dim
        types = raw["types"]
        m = len(types)
        triples = []
        for entry in raw["maps"]:
            i, j = entry["row"], entry["col"]
            if not (0 <= i < m and 0 <= j < m):
                raise ParseError(f"map index out of range: {entry}")
            triples.append((i, j, AffineMap(1, _int_vector(entry["translation"], n, "translation"))))
        seed_items = {_int_vector(s["point"], n, "seed point"): s["type"] for s in raw.get("seed", [])}
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed system file: {exc!r}") from exc
    if any(not 0 <= t < m for t in seed_items.values()):
        raise ParseError("seed type out of range")
    phi = Mfs.from_triples(infl, m, triples, tuple(str(t) for t in types))
    seed_power = int(raw.get("seed_power", 1))
    if not seed_items:
        validate_system(phi)
        found = find_seed(phi, seed_search_power)
        seed_items, seed_power = {found.point: found.type}, found.power
    descriptions = raw.get("descriptions")
    if descriptions is not None:
        descriptions = tuple(union_from_dict(infl, d) for d in descriptions)
    return SystemBundle(raw.get("name", "file"), phi, TypedPatch.from_dict(infl, seed_items),
                        seed_power, descriptions)


def dump_system(bundle: SystemBundle, path) -> None:
    Path(path).write_text(json.dumps(system_to_dict(bundle), indent=1) + "\n")


# --- coset descriptions ---------------------------------------------------------------------

def union_to_dict(u: CosetUnion) -> dict:
    out = {
        "cosets": [{"rep": list(c.rep), "depth": c.depth} for c in u.explicit],
        "families": [{"base": {"offset": list(f.offset), "growth": list(f.growth), "step": list(f.step)},
                      "count_ratio": f.count_ratio, "depth_offset": f.depth_offset,
                      "count_scale": f.count_scale, "growth_ratio": f.growth_ratio}
                     for f in u.families],
        "residual": u.residual_flag,
    }
    if u.residual:
        out["residual_rays"] = [{"origin": list(r.origin), "direction": list(r.direction),
                                 "two_sided": r.two_sided} for r in u.residual]
    return out


def union_from_dict(infl: Inflation, raw: dict) -> CosetUnion:
    n = infl.dim
    try:
        explicit = tuple(residue_of(infl, _int_vector(c["rep"], n, "rep"), int(c["depth"]))
                         for c in raw.get("cosets", []))
        fams = tuple(GeometricFamily(infl, _int_vector(f["base"]["offset"], n, "offset"),
                                     _int_vector(f["base"]["growth"], n, "growth"),
                                     _int_vector(f["base"]["step"], n, "step"),
                                     count_ratio=int(f["count_ratio"]),
                                     depth_offset=int(f["depth_offset"]),
                                     count_scale=int(f.get("count_scale", 1)),
                                     growth_ratio=f.get("growth_ratio"))
                     for f in raw.get("families", []))
        rays = tuple(Ray(_int_vector(r["origin"], n, "origin"), _int_vector(r["direction"], n, "direction"),
                         bool(r.get("two_sided", False)))
                     for r in raw.get("residual_rays", []))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed coset description: {exc!r}") from exc
    return CosetUnion(infl, explicit, fams, rays, bool(raw.get("residual", False)) or bool(rays))


def descriptions_to_dict(infl: Inflation, unions, types=None) -> dict:
    return {"dim": infl.dim, "inflation": [list(r) for r in infl.matrix],
            "types": list(types) if types else [str(i + 1) for i in range(len(unions))],
            "descriptions": [union_to_dict(u) for u in unions]}


def load_descriptions(source) -> tuple[tuple[CosetUnion, ...], tuple[str, ...]]:
    """A description file: {"inflation", "types"?, "descriptions": [per-type object]}."""
    raw = _read_json(source)
    infl = _inflation(raw)
    entries = raw.get("descriptions")
    if not isinstance(entries, list):
        raise ParseError("missing descriptions list")
    unions = tuple(union_from_dict(infl, d) for d in entries)
    names = tuple(raw.get("types") or (str(i + 1) for i in range(len(unions))))
    return unions, names


# --- references -------------------------------------------------------------------------------

def resolve(ref: str, seed_search_power: int = DEFAULT_SEED_SEARCH) -> SystemBundle:
    """builtin:chair2d | builtin:chairnd:<n> | builtin:sphinx | builtin:symbolic:<rules> | path."""
    from .chair import chair2d, chair_nd
    from .sphinx import sphinx
    from .symbolic import from_symbolic, parse_rules
    if not ref.startswith("builtin:"):
        return load_system(ref, seed_search_power)
    kind, _, arg = ref[len("builtin:"):].partition(":")
    if kind == "chair2d" and not arg:
        return chair2d()
    if kind == "chairnd":
        try:
            return chair_nd(int(arg))
        except ValueError as exc:
            raise ParseError(f"bad chair dimension in {ref!r}: {exc}") from exc
    if kind == "sphinx" and not arg:
        return sphinx()
    if kind == "symbolic" and arg:
        return from_symbolic(parse_rules(arg), name=f"symbolic:{arg}")
    raise ParseError(f"unknown builtin {ref!r}")
