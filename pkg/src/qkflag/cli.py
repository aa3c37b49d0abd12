"""Command-line surface: compute, verify, tabulate, cache, emit.

Exit codes: 0 success (suite pass), 1 suite failure, 2 parse/config error,
3 unsupported type, 4 internal invariant violation (always a bug),
5 corrupted cache.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .cartan import (
    CartanDatum,
    ConeVector,
    discrepancy,
    eigencharacter,
    height,
    interval_below,
    make_custom_datum,
    parse_cartan_type,
    vanishing_orders,
)
from .errors import (
    CacheCorruptError,
    CartanParseError,
    DatumMismatchError,
    GradingError,
    InternalInvariantError,
    NotInConeError,
    PoleError,
    UnsupportedTypeError,
)
from .exactalg import (
    frac_to_obj,
    render_frac,
    render_poly,
    series_expand,
)
from .jrecursion import (
    ENGINE_VERSION,
    JTable,
    compute_j,
    entry_bytes,
    load_table,
    save_table,
)
from .verify import (
    verify_affine_chart,
    verify_determinant_identity,
    verify_positivity,
    verify_recursion,
    verify_subdiagram,
)

CACHE_ENV_VAR = "QKFLAG_CACHE_DIR"

EXIT_OK = 0
EXIT_SUITE_FAIL = 1
EXIT_CONFIG = 2
EXIT_UNSUPPORTED = 3
EXIT_INTERNAL = 4
EXIT_CACHE = 5


@dataclass
class RunConfig:
    """Resolved invocation: datum plus exactly one of alpha / bound."""

    datum: CartanDatum
    alpha: ConeVector | None
    bound: ConeVector | None
    output_format: str
    series_order: int | None
    grading: str
    cache_dir: str | None
    seed: int


def _parse_coeffs(text: str, datum: CartanDatum) -> ConeVector:
    try:
        coeffs = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise CartanParseError(f"coefficients {text!r} must be comma-separated integers") from exc
    return ConeVector(datum, coeffs)


def _load_datum(args) -> CartanDatum:
    if getattr(args, "matrix", None):
        path = Path(args.matrix)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CartanParseError(f"cannot read matrix file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CartanParseError(f"matrix file {path} is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict) or "matrix" not in obj:
            raise CartanParseError(f"matrix file {path} must be an object with a 'matrix' key")
        affine = bool(obj.get("affine", False))
        if affine and not getattr(args, "unverified_affine", False):
            raise UnsupportedTypeError(
                "custom affine matrices are conjectural; pass --unverified-affine to accept"
            )
        return make_custom_datum(
            obj["matrix"],
            symmetrizers=obj.get("symmetrizers"),
            affine=affine,
            label=obj.get("label"),
            verified=not affine,
        )
    return parse_cartan_type(args.type)


def _character_model(datum: CartanDatum) -> str:
    if not datum.verified:
        return "conjectural (unverified affine datum)"
    if datum.affine:
        return "coordinate-ring character, affine type A"
    if datum.is_simply_laced():
        return "coordinate-ring character of the based-quasimap space"
    return "folded-model character"


def _metadata(datum: CartanDatum) -> dict:
    return {
        "character_model": _character_model(datum),
        "conjectural": not datum.verified,
        "conventions": (
            "type letters name the algebra whose positive cone indexes alpha; "
            "Langlands-dual bookkeeping stays in metadata"
        ),
        "symmetrizers": list(datum.symmetrizers),
    }


def _default_grading(datum: CartanDatum) -> str:
    return "joint" if datum.affine else "q"


def _resolve_cache_dir(args) -> str | None:
    explicit = getattr(args, "cache_dir", None)
    if explicit:
        return explicit
    return os.environ.get(CACHE_ENV_VAR) or None


def _parse_format(text: str) -> tuple[str, int | None]:
    if text in ("factored", "json", "latex"):
        return text, None
    if text.startswith("series:"):
        tail = text.split(":", 1)[1]
        if not tail.isdigit():
            raise CartanParseError(f"series order in {text!r} must be a nonnegative integer")
        return "series", int(tail)
    raise CartanParseError(
        f"unknown format {text!r}; choose factored, series:N, json, or latex"
    )


def _build_table(config: RunConfig) -> JTable:
    datum = config.datum
    table = None
    if config.cache_dir:
        table = load_table(datum, config.cache_dir)
    if table is None:
        table = JTable(datum)
    target = config.alpha if config.alpha is not None else config.bound
    compute_j(target, table)
    if config.cache_dir:
        save_table(table, config.cache_dir)
    return table


def _latex_document(lines: list[str]) -> str:
    body = "\n".join(f"\\[ {line} \\]" for line in lines)
    return (
        "\\documentclass{article}\n"
        "\\usepackage{amsmath}\n"
        "\\begin{document}\n"
        f"{body}\n"
        "\\end{document}\n"
    )


def cmd_jfun(args) -> int:
    datum = _load_datum(args)
    fmt, series_order = _parse_format(args.format)
    grading = args.grading or _default_grading(datum)
    config = RunConfig(
        datum=datum,
        alpha=_parse_coeffs(args.alpha, datum) if args.alpha else None,
        bound=_parse_coeffs(args.up_to, datum) if args.up_to else None,
        output_format=fmt,
        series_order=series_order,
        grading=grading,
        cache_dir=_resolve_cache_dir(args),
        seed=args.seed,
    )
    table = _build_table(config)
    if config.alpha is not None:
        selected = [(config.alpha, table.get(config.alpha))]
    else:
        selected = [(b, table.get(b)) for b in interval_below(config.bound)]
    names = datum.z_names()

    if fmt == "json":
        doc: dict = {
            "engine_version": ENGINE_VERSION,
            "type": datum.label,
            "affine": datum.affine,
            "z_names": names,
            "metadata": _metadata(datum),
        }
        if config.alpha is not None:
            doc["alpha"] = list(config.alpha.coeffs)
            doc["value"] = frac_to_obj(selected[0][1])
        else:
            doc["bound"] = list(config.bound.coeffs)
            doc["entries"] = [
                {"alpha": list(a.coeffs), "value": frac_to_obj(v)} for a, v in selected
            ]
        print(json.dumps(doc, sort_keys=True, indent=2))
        return EXIT_OK

    if fmt == "latex":
        lines = [
            f"J_{{{a}}} = {render_frac(v, names, latex=True)}" for a, v in selected
        ]
        print(_latex_document(lines), end="")
        return EXIT_OK

    header = [f"type: {datum.label}"]
    if config.alpha is not None:
        header.append(f"alpha: {config.alpha}")
    else:
        header.append(f"bound: {config.bound}")
    print("\n".join(header))
    if fmt == "factored":
        for a, v in selected:
            print(f"J[{a}] = {render_frac(v, names)}")
        return EXIT_OK

    # series:N
    print(f"grading: {grading}")
    print(f"order: {series_order}")
    for a, v in selected:
        coefficients = series_expand(v, series_order, grading)
        print(f"J[{a}]:")
        for grade, coeff in enumerate(coefficients):
            print(f"  grade {grade}: {render_poly(coeff, names)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = args.suite
    if suite == "recursion":
        datum = _load_datum(args)
        report = verify_recursion(datum, args.height)
    elif suite == "positivity":
        datum = _load_datum(args)
        grading = args.grading or _default_grading(datum)
        report = verify_positivity(datum, args.height, args.order, grading)
    elif suite == "subdiagram":
        datum = _load_datum(args)
        small = parse_cartan_type(args.sub)
        indices = tuple(int(x) for x in args.indices.split(","))
        alpha = _parse_coeffs(args.alpha, datum)
        report = verify_subdiagram(datum, small, indices, alpha)
    elif suite == "determinant":
        datum = _load_datum(args)
        report = verify_determinant_identity(datum, args.trials, args.seed)
    elif suite == "affine-chart":
        report = verify_affine_chart(args.nodes, seed=args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise CartanParseError(f"unknown suite {suite!r}")
    if args.format == "json":
        print(report.to_json(), end="")
    else:
        print(report.render_text(), end="")
    return EXIT_OK if report.passed else EXIT_SUITE_FAIL


def cmd_stats(args) -> int:
    datum = _load_datum(args)
    alpha = _parse_coeffs(args.alpha, datum)
    record: dict = {
        "type": datum.label,
        "alpha": list(alpha.coeffs),
        "height": height(alpha),
        "dim": 2 * height(alpha),
        "eigenchar": render_poly(eigencharacter(alpha), datum.z_names()),
        "metadata": _metadata(datum),
    }
    if alpha.is_zero():
        record["discrepancy"] = None
        record["discrepancy_reason"] = "defined only for alpha != 0"
    elif not datum.is_simply_laced():
        record["discrepancy"] = None
        record["discrepancy_reason"] = "defined only for simply-laced finite types"
    else:
        record["discrepancy"] = discrepancy(alpha)
        record["discrepancy_reason"] = None
    if datum.affine:
        record["orders"] = list(vanishing_orders(datum, extrapolate=True))
        record["orders_extrapolated"] = True
    else:
        record["orders"] = list(vanishing_orders(datum))
        record["orders_extrapolated"] = False
    print(json.dumps(record, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_cache_roundtrip(args) -> int:
    datum = _load_datum(args)
    bound = _parse_coeffs(args.up_to, datum)
    cache_dir = _resolve_cache_dir(args)
    if not cache_dir:
        raise CartanParseError("cache-roundtrip needs --cache-dir or " + CACHE_ENV_VAR)
    # inspect any existing file before overwriting: damage must surface,
    # while a version mismatch is ignored and recomputed
    load_table(datum, cache_dir)
    table = JTable(datum)
    compute_j(bound, table)
    path = save_table(table, cache_dir)
    loaded = load_table(datum, cache_dir)
    if loaded is None:
        raise CacheCorruptError(f"cache file {path} was not readable after writing")
    for alpha, fresh in table.items_sorted():
        if alpha not in loaded:
            raise CacheCorruptError(f"cache file {path} lost entry {alpha}")
        if entry_bytes(loaded.get(alpha)) != entry_bytes(fresh):
            raise CacheCorruptError(f"cache entry {alpha} differs from recomputation")
    print(f"cache round-trip ok: {len(table)} entries, {path}")
    return EXIT_OK


def _add_datum_arguments(p: argparse.ArgumentParser, required: bool = True) -> None:
    group = p.add_mutually_exclusive_group(required=required)
    group.add_argument("--type", help="catalogued type label, e.g. A3, G2, A1~")
    group.add_argument("--matrix", help="path to a custom Cartan matrix JSON file")
    p.add_argument(
        "--unverified-affine",
        action="store_true",
        help="accept a custom affine matrix; all outputs are tagged conjectural",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkflag",
        description="Exact J-function coefficients of flag manifolds via the fermionic recursion.",
    )
    parser.add_argument("--version", action="version", version=f"qkflag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_jfun = sub.add_parser("jfun", help="compute J_alpha or a truncated table")
    _add_datum_arguments(p_jfun)
    target = p_jfun.add_mutually_exclusive_group(required=True)
    target.add_argument("--alpha", help="comma-separated cone coefficients")
    target.add_argument("--up-to", help="compute all alpha below this bound")
    p_jfun.add_argument("--format", default="factored", help="factored | series:N | json | latex")
    p_jfun.add_argument("--grading", choices=["q", "joint"], help="series grading (default by type)")
    p_jfun.add_argument("--cache-dir", help=f"cache directory (overrides {CACHE_ENV_VAR})")
    p_jfun.add_argument("--seed", type=int, default=0)
    p_jfun.set_defaults(func=cmd_jfun)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    verify_sub = p_verify.add_subparsers(dest="suite", required=True)

    pv_rec = verify_sub.add_parser("recursion", help="cleared-denominator residual is zero")
    _add_datum_arguments(pv_rec)
    pv_rec.add_argument("--height", type=int, default=3, help="check all |alpha| <= height (default 3)")

    pv_pos = verify_sub.add_parser("positivity", help="series coefficients are nonnegative integers")
    _add_datum_arguments(pv_pos)
    pv_pos.add_argument("--height", type=int, default=3, help="check all |alpha| <= height (default 3)")
    pv_pos.add_argument("--order", type=int, help="series order (default 10 for q, 8 for joint)")
    pv_pos.add_argument("--grading", choices=["q", "joint"])

    pv_sub = verify_sub.add_parser("subdiagram", help="restriction to a sub-diagram agrees")
    _add_datum_arguments(pv_sub)
    pv_sub.add_argument("--sub", required=True, help="type label of the sub-diagram")
    pv_sub.add_argument("--indices", required=True, help="big-type indices of the embedded nodes")
    pv_sub.add_argument("--alpha", required=True)

    pv_det = verify_sub.add_parser("determinant", help="pairing decomposition equals the form")
    _add_datum_arguments(pv_det)
    pv_det.add_argument("--trials", type=int, default=100)

    pv_chart = verify_sub.add_parser("affine-chart", help="(t,u,v) chart telescoping and evaluation")
    pv_chart.add_argument("--nodes", type=int, required=True)

    for pv in (pv_rec, pv_pos, pv_sub, pv_det, pv_chart):
        pv.add_argument("--seed", type=int, default=0)
        pv.add_argument("--format", choices=["text", "json"], default="text")
        pv.set_defaults(func=cmd_verify)

    p_stats = sub.add_parser("stats", help="closed-form statistics for one alpha")
    _add_datum_arguments(p_stats)
    p_stats.add_argument("--alpha", required=True)
    p_stats.set_defaults(func=cmd_stats)

    p_cache = sub.add_parser("cache-roundtrip", help="write, re-read, byte-compare a cached table")
    _add_datum_arguments(p_cache)
    p_cache.add_argument("--up-to", required=True)
    p_cache.add_argument("--cache-dir", help=f"cache directory (overrides {CACHE_ENV_VAR})")
    p_cache.set_defaults(func=cmd_cache_roundtrip)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CartanParseError, NotInConeError, DatumMismatchError, GradingError, PoleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except CacheCorruptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except InternalInvariantError as exc:
        print(f"internal error (bug): {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
