"""Command line: analyze systems, generate patches, compute total indices."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .coincidence import find_modular_coincidence, has_coincidence, measure_vector_check
from .errors import BudgetExceeded, LatsubstError, ValidationError
from .lattice import DEFAULT_RESIDUE_BUDGET
from .mfs import primitivity_exponent, subst_matrix
from .systems import SystemBundle, generate_patch, load_descriptions, resolve
from .totalindex import model_set_criterion

EXIT_POSITIVE, EXIT_INVALID, EXIT_UNKNOWN = 0, 1, 2

VERDICT_POSITIVE = "model sets (modular coincidence)"
VERDICT_UNKNOWN = "undecided (no modular coincidence found)"


def frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class AnalysisReport:
    system: str
    m: int
    n: int
    q: int
    primitive: bool
    primitivity_exponent: int | None
    pf_condition: bool
    pf_eigenvector: list | None
    coincidence_row: int | None
    modular_coincidence: dict | None
    searched_up_to: int
    window_depth: int
    window_measures: list = field(default_factory=list)
    window_gaps: list = field(default_factory=list)
    verdict: str = VERDICT_UNKNOWN

    @property
    def exit_code(self) -> int:
        return EXIT_POSITIVE if self.verdict == VERDICT_POSITIVE else EXIT_UNKNOWN


def analyze(bundle: SystemBundle, max_power: int, window_depth: int,
            budget: int = DEFAULT_RESIDUE_BUDGET) -> AnalysisReport:
    phi = bundle.mfs
    exponent = primitivity_exponent(subst_matrix(phi))
    names = phi.type_names
    searched = max_power
    try:
        found = find_modular_coincidence(phi, max_power, budget)
    except BudgetExceeded as exc:
        found, searched = None, exc.reached or 0
    modular = None
    if found is not None:
        modular = {"power": found.power, "depth": found.residue.depth,
                   "residue": list(found.residue.rep), "row": found.row,
                   "row_name": names[found.row], "coincident_residues": found.coincident_residues}
        searched = found.power
    measures, gaps = [], []
    if window_depth >= 1:
        check = measure_vector_check(phi, window_depth, budget)
        measures = [frac(x) for x in check.measures]
        gaps = [frac(x) for x in check.gaps]
    holds = bundle.pf is not None and bundle.pf.holds
    row = has_coincidence(phi)
    return AnalysisReport(
        system=bundle.name, m=phi.m, n=phi.inflation.dim, q=phi.inflation.q,
        primitive=exponent is not None, primitivity_exponent=exponent,
        pf_condition=holds, pf_eigenvector=list(bundle.pf.eigenvector) if holds else None,
        coincidence_row=row, modular_coincidence=modular, searched_up_to=searched,
        window_depth=window_depth, window_measures=measures, window_gaps=gaps,
        verdict=VERDICT_POSITIVE if (found is not None and exponent is not None and holds) else VERDICT_UNKNOWN,
    )


def _error_object(exc: Exception) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ValidationError):
        out["hypothesis"] = exc.hypothesis
    witness = getattr(exc, "witness", None)
    if witness is not None:
        out["witness"] = list(witness)
    return out


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _as_text(report: AnalysisReport) -> str:
    lines = [f"{k}: {v}" for k, v in asdict(report).items()]
    return "\n".join(lines) + "\n"


# --- patch export -------------------------------------------------------------------------

def patch_csv(patch, names) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(patch.dim)] + ["type"])
    pts, tys = patch.points()
    for p, t in zip(pts.tolist(), tys.tolist()):
        w.writerow(p + [names[t]])
    return buf.getvalue()


def patch_json(patch, names, system: str) -> str:
    pts, tys = patch.points()
    return json.dumps({"system": system, "dim": patch.dim, "box": [list(patch.lo), list(patch.hi)],
                       "types": list(names),
                       "points": [p + [t] for p, t in zip(pts.tolist(), tys.tolist())]}) + "\n"


def patch_svg(patch, names, spacing: int = 6) -> str:
    if patch.dim != 2:
        raise ValueError("svg output needs a two-dimensional patch")
    m = len(names)
    (x0, y0), (x1, y1) = patch.lo, patch.hi
    width, height = (x1 - x0 + 2) * spacing, (y1 - y0 + 2) * spacing
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    pts, tys = patch.points()
    for (x, y), t in zip(pts.tolist(), tys.tolist()):
        cx, cy = (x - x0 + 1) * spacing, (y1 - y + 1) * spacing
        hue = round(360 * t / m)
        out.append(f'<circle class="{names[t]}" cx="{cx}" cy="{cy}" r="{spacing * 0.4:.1f}" '
                   f'fill="hsl({hue},70%,45%)"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# --- commands -----------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    try:
        bundle = resolve(args.system, args.seed_search_power)
    except LatsubstError as exc:
        _emit(json.dumps(_error_object(exc)) + "\n", args.out)
        return EXIT_INVALID
    report = analyze(bundle, args.max_power, args.window_depth, args.budget_maps)
    text = json.dumps(asdict(report), indent=1) + "\n" if args.format == "json" else _as_text(report)
    _emit(text, args.out)
    return report.exit_code


def cmd_generate(args) -> int:
    try:
        bundle = resolve(args.system, args.seed_search_power)
        patch = generate_patch(bundle, args.iterations, args.radius)
    except LatsubstError as exc:
        sys.stderr.write(json.dumps(_error_object(exc)) + "\n")
        return EXIT_INVALID
    names = bundle.mfs.type_names
    if args.format == "csv":
        text = patch_csv(patch, names)
    elif args.format == "json":
        text = patch_json(patch, names, bundle.name)
    else:
        text = patch_svg(patch, names)
    _emit(text, args.out)
    return EXIT_POSITIVE


def cmd_index(args) -> int:
    try:
        if args.descriptions.startswith("builtin:"):
            bundle = resolve(args.descriptions)
            if bundle.descriptions is None:
                raise ValidationError("closed-form descriptions", f"{bundle.name} has none")
            unions, names = bundle.descriptions, bundle.mfs.type_names
        else:
            unions, names = load_descriptions(args.descriptions)
        verdict = model_set_criterion(unions)
    except LatsubstError as exc:
        _emit(json.dumps(_error_object(exc)) + "\n", args.out)
        return EXIT_INVALID
    if args.format == "json":
        text = json.dumps({"types": list(names), "indices": [frac(x) for x in verdict.indices],
                           "sum": frac(verdict.total), "verdict": verdict.holds}, indent=1) + "\n"
    else:
        rows = [f"{name}\t{frac(x)}" for name, x in zip(names, verdict.indices)]
        text = "\n".join(rows + [f"sum\t{frac(verdict.total)}", f"verdict\t{str(verdict.holds).lower()}"]) + "\n"
    _emit(text, args.out)
    return EXIT_POSITIVE if verdict.holds else EXIT_UNKNOWN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latsubst", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="write to this file instead of stdout")
        p.add_argument("--seed-search-power", type=int, default=4,
                       help="largest power searched for a seed when the system file has none")

    a = sub.add_parser("analyze", help="primitivity, PF condition and modular coincidence")
    a.add_argument("system", help="builtin:chair2d | builtin:chairnd:<n> | builtin:sphinx | "
                                  "builtin:symbolic:<rules> | path to a system JSON file")
    a.add_argument("--max-power", type=int, default=8)
    a.add_argument("--window-depth", type=int, default=4)
    a.add_argument("--budget-maps", type=int, default=DEFAULT_RESIDUE_BUDGET,
                   help="cap on the residue classes tracked per power")
    a.add_argument("--format", choices=("json", "text"), default="json")
    common(a)
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="export a typed patch")
    g.add_argument("system")
    g.add_argument("--iterations", type=int, default=6)
    g.add_argument("--radius", type=int, default=32)
    g.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    common(g)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("index", help="exact total indices of coset descriptions")
    i.add_argument("descriptions", help="description JSON file or builtin:<system>")
    i.add_argument("--format", choices=("json", "text"), default="text")
    i.add_argument("--out", default=None)
    i.set_defaults(func=cmd_index)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
