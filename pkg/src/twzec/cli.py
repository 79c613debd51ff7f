"""Command-line interface: parse channel documents, run the analyses, and
emit deterministic machine-readable reports.

Exit codes: 0 success, 1 validation error, 2 consistency failure.  Reports
are byte-identical for a fixed seed, flag set, and input document.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .channel import Channel, canonical_channel, derive_confusion, parse_channel
from .codebooks import (
    detecting_vector_check,
    exhaustive_best_pair,
    is_uniquely_decodable,
    lemma8_bound,
    lemma8_search,
    theorem8_construct,
    theorem8_family,
    theorem8_rate_target,
)
from .graphs import Graph
from .inner import best_sub_alphabet, detecting_sets, max_random_coding, rate_hull
from .oneshot import independence_product, rho_lower_certificate, rho_upper_estimate
from .outer import maxmin_bound, minimize_over_q, minmax_bound, region_polygon
from .spectral import (
    capacity_sandwich,
    fractional_clique_cover,
    lovasz_theta,
    noiseless_direction_bound,
)

SCHEMA = "twzec/1"
CONSISTENCY_TOL = 1e-6


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return _num(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def _resolve_seed(args) -> int:
    env = os.environ.get("TWZEC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"TWZEC_SEED must be an integer: {env!r}") from exc
    return args.seed


def _load_channel(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    parsed = parse_channel(raw.decode("utf-8"))
    if isinstance(parsed, Channel):
        ch, fam, fmt = parsed, derive_confusion(parsed), "probability-table"
    else:
        ch, fam, fmt = canonical_channel(parsed), parsed, "graph-family"
    info = {
        "digest": hashlib.sha256(raw).hexdigest(),
        "format": fmt,
        "x1_size": fam.m1,
        "x2_size": fam.m2,
    }
    return ch, fam, info


def _emit(payload, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "method", "value", "residual"])
        for lam, method, value, residual in rows:
            res = "" if residual is None else repr(residual)
            writer.writerow([repr(float(lam)), method, repr(float(value)), res])


def _oneshot_block(fam) -> dict:
    pi, pair = independence_product(fam)
    cert = rho_lower_certificate(fam, pair)
    est = rho_upper_estimate(fam)
    return {
        "pi": int(pi),
        "log_pi": math.log2(pi),
        "witness": {"x1_set": list(pair.s), "x2_set": list(pair.t)},
        "rho": {
            "lower": _num(cert.value),
            "lower_min_eigenvalue": _num(cert.checks["min_eigenvalue"]),
            "upper": _num(est.value),
            "upper_complete": bool(est.complete),
        },
    }


def report_consistency(report: dict) -> list:
    """Re-check the dominance invariants recorded in a report document."""
    violations = []
    for row in report.get("lambda_table", []):
        outer = [e["value"] for e in row["entries"] if e["kind"] == "outer"]
        inner = [e["value"] for e in row["entries"] if e["kind"] == "inner"]
        if outer and inner and max(inner) > min(outer) + CONSISTENCY_TOL:
            violations.append(
                {
                    "kind": "inner-exceeds-outer",
                    "lambda": row["lambda"],
                    "outer": min(outer),
                    "inner": max(inner),
                }
            )
    block = report.get("oneshot")
    if block and abs(block["log_pi"] - math.log2(block["pi"])) > 1e-9:
        violations.append({"kind": "oneshot-log-mismatch", "pi": block["pi"]})
    return violations


def _lambda_grid(count: int):
    if count < 1:
        raise ValueError("lambda grid must have at least one point")
    if count == 1:
        return [0.5]
    return [float(x) for x in np.linspace(0.0, 1.0, count)]


def _cmd_bounds(args) -> int:
    ch, fam, info = _load_channel(args.channel)
    seed = _resolve_seed(args)
    grid = _lambda_grid(args.lambda_grid)
    ops = (("minmax", minmax_bound), ("maxmin", maxmin_bound))
    table = []
    csv_rows = []
    half_planes = []
    inner_points = []
    for lam in grid:
        entries = []
        for name, op in ops:
            if args.minimize_q == "on":
                bound = minimize_over_q(fam, op, lam, seed=seed, effort=args.effort)
            else:
                bound = op(ch, fam, lam, seed=seed, effort=args.effort)
            half_planes.append(bound)
            entries.append(
                {
                    "method": name,
                    "kind": "outer",
                    "value": _num(bound.value),
                    "residual": _num(bound.residual),
                    "meta": _jsonable(bound.meta),
                }
            )
            csv_rows.append((lam, name, bound.value, _num(bound.residual)))
        point = max_random_coding(fam, lam, seed=seed, effort=args.effort)
        inner_points.append(point)
        rc_value = lam * point.r1 + (1 - lam) * point.r2
        entries.append(
            {
                "method": "random-coding",
                "kind": "inner",
                "value": _num(rc_value),
                "residual": _num(point.parameters.get("residual", float("nan"))),
                "rates": [_num(point.r1), _num(point.r2)],
            }
        )
        if fam.m1 <= 10 and fam.m2 <= 10:
            sub = best_sub_alphabet(fam, lam)
            inner_points.append(sub)
            entries.append(
                {
                    "method": "sub-alphabet",
                    "kind": "inner",
                    "value": _num(lam * sub.r1 + (1 - lam) * sub.r2),
                    "residual": None,
                    "rates": [_num(sub.r1), _num(sub.r2)],
                }
            )
            csv_rows.append(
                (lam, "sub-alphabet", lam * sub.r1 + (1 - lam) * sub.r2, None)
            )
        csv_rows.append((lam, "random-coding", rc_value, None))
        table.append({"lambda": lam, "entries": entries})
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "seed": seed,
        "channel": info,
        "settings": {
            "lambda_grid": args.lambda_grid,
            "minimize_q": args.minimize_q,
            "effort": args.effort,
        },
        "lambda_table": table,
        "oneshot": _oneshot_block(fam),
        "region": {
            "outer": _jsonable(region_polygon(half_planes)),
            "inner": _jsonable(rate_hull(inner_points)),
        },
    }
    violations = report_consistency(payload)
    payload["consistency"] = {"ok": not violations, "violations": violations}
    payload["flags"] = ["CONSISTENCY-FAIL"] if violations else []
    _emit(payload, args)
    if args.csv:
        _write_csv(csv_rows, args.csv)
    return 2 if violations else 0


def _cmd_inner(args) -> int:
    _, fam, info = _load_channel(args.channel)
    seed = _resolve_seed(args)
    lam = args.lam
    point = max_random_coding(fam, lam, seed=seed, effort=args.effort)
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "seed": seed,
        "channel": info,
        "detecting_sets": {
            "x1": list(detecting_sets(fam).d1),
            "x2": list(detecting_sets(fam).d2),
        },
        "random_coding": {
            "rates": [_num(point.r1), _num(point.r2)],
            "value": _num(lam * point.r1 + (1 - lam) * point.r2),
            "parameters": _jsonable(point.parameters),
        },
    }
    points = [point]
    if fam.m1 <= 10 and fam.m2 <= 10:
        sub = best_sub_alphabet(fam, lam)
        points.append(sub)
        payload["sub_alphabet"] = {
            "rates": [_num(sub.r1), _num(sub.r2)],
            "value": _num(lam * sub.r1 + (1 - lam) * sub.r2),
            "parameters": _jsonable(sub.parameters),
        }
    payload["inner_hull"] = _jsonable(rate_hull(points))
    _emit(payload, args)
    return 0


def _cmd_oneshot(args) -> int:
    _, fam, info = _load_channel(args.channel)
    payload = {"schema": SCHEMA, "version": __version__, "channel": info}
    payload.update(_oneshot_block(fam))
    _emit(payload, args)
    return 0


def _parse_graph_doc(doc) -> Graph:
    if "adjacency" in doc:
        return Graph.from_adjacency(doc["adjacency"])
    if "n" in doc and "edges" in doc:
        return Graph.from_edges(int(doc["n"]), [tuple(e) for e in doc["edges"]])
    raise ValueError("graph document needs 'adjacency' or 'n' plus 'edges'")


def _cmd_theta(args) -> int:
    with open(args.graph, "rb") as fh:
        raw = fh.read()
    g = _parse_graph_doc(json.loads(raw.decode("utf-8")))
    sandwich = capacity_sandwich(g, max_power=args.max_power)
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "graph": {"digest": hashlib.sha256(raw).hexdigest(), "n": g.n},
        "theta": _num(lovasz_theta(g)),
        "fcc": _num(fractional_clique_cover(g)),
        "sandwich": {
            "lower": _num(sandwich.lower),
            "upper": _num(sandwich.upper),
            "witness_power": sandwich.witness_power,
            "alphas": list(sandwich.alphas),
        },
    }
    _emit(payload, args)
    return 0


def _cmd_search(args) -> int:
    _, fam, info = _load_channel(args.channel)
    result = exhaustive_best_pair(fam, args.n, budget=args.budget)
    pair = result.pair
    verdict = is_uniquely_decodable(pair, fam)
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "channel": info,
        "n": args.n,
        "a": [list(w) for w in pair.a],
        "b": [list(w) for w in pair.b],
        "product": len(pair.a) * len(pair.b),
        "rates": [_num(r) for r in pair.rates],
        "exact": result.exact,
        "explored": result.explored,
        "verified": verdict.ok,
    }
    if not verdict.ok:
        payload["witness"] = _jsonable(verdict.witness)
        payload["witness_side"] = verdict.side
    _emit(payload, args)
    return 0 if verdict.ok else 1


def _cmd_construct(args) -> int:
    seed = _resolve_seed(args)
    if args.lemma8:
        if args.qprime is None:
            raise ValueError("--lemma8 requires --qprime")
        d_set = tuple(int(t) for t in args.d_set.split(",") if t.strip() != "")
        code = lemma8_search(args.q, args.qprime, args.n, args.k, d_set, seed=seed)
        codewords = [list(map(int, w)) for w in code.codewords().tolist()]
        verified = all(
            detecting_vector_check(w, codewords, code.d_set)
            for w in (code.detectors or ())
        )
        payload = {
            "schema": SCHEMA,
            "version": __version__,
            "mode": "lemma8",
            "parameters": {
                "q": args.q,
                "qprime": args.qprime,
                "n": args.n,
                "k": args.k,
                "d_set": list(code.d_set),
            },
            "generator": [list(r) for r in code.generator],
            "detector_count": code.detector_count,
            "size_guarantee": lemma8_bound(args.n, args.k, args.qprime, len(code.d_set)),
            "detectors": None
            if code.detectors is None
            else [list(w) for w in code.detectors],
            "verified": verified,
        }
        _emit(payload, args)
        return 0 if verified else 1
    if args.s is None:
        raise ValueError("construct needs --s (or --lemma8 with --qprime)")
    pair = theorem8_construct(args.q, args.s, args.n, args.k, seed=seed)
    fam = theorem8_family(args.q, args.s)
    verdict = is_uniquely_decodable(pair, fam)
    r1, r2 = pair.rates
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "mode": "theorem8",
        "parameters": {"q": args.q, "s": args.s, "n": args.n, "k": args.k},
        "a": [list(w) for w in pair.a],
        "b": [list(w) for w in pair.b],
        "sizes": {"a": len(pair.a), "b": len(pair.b)},
        "rates": [_num(r1), _num(r2)],
        "sum_rate": _num(r1 + r2),
        "rate_target": _num(theorem8_rate_target(args.q, args.s, args.n, args.k)),
        "noiseless_bound": _num(noiseless_direction_bound(fam)),
        "verified": verdict.ok,
    }
    if not verdict.ok:
        payload["witness"] = _jsonable(verdict.witness)
        payload["witness_side"] = verdict.side
    _emit(payload, args)
    return 0 if verdict.ok else 1


def _cmd_report(args) -> int:
    with open(args.input) as fh:
        report = json.load(fh)
    violations = report_consistency(report)
    payload = {
        "schema": SCHEMA,
        "version": __version__,
        "ok": not violations,
        "violations": violations,
    }
    _emit(payload, args)
    return 2 if violations else 0


class _Parser(argparse.ArgumentParser):
    """argparse's default error exit code is 2, which this tool reserves
    for consistency failures; argument problems are validation errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_io(sp, seed=True):
    sp.add_argument("--out", help="write JSON here instead of stdout")
    if seed:
        sp.add_argument(
            "--seed",
            type=int,
            default=0,
            help="search seed (env TWZEC_SEED overrides)",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="twzec",
        description="Bounds and code constructions for the non-adaptive "
        "zero-error capacity region of a two-way channel.",
    )
    parser.add_argument(
        "--version", action="version", version=f"twzec {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("bounds", help="outer/inner bound table over a lambda grid")
    sp.add_argument("--channel", required=True)
    sp.add_argument("--lambda-grid", type=int, default=11)
    sp.add_argument("--minimize-q", choices=("on", "off"), default="off")
    sp.add_argument("--effort", choices=("search", "fast", "full"), default="full")
    sp.add_argument("--csv", help="write lambda,method,value,residual rows here")
    _add_io(sp)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("inner", help="inner bound detail at one lambda")
    sp.add_argument("--channel", required=True)
    sp.add_argument("--lam", type=float, default=0.5)
    sp.add_argument("--effort", choices=("search", "fast", "full"), default="full")
    _add_io(sp)
    sp.set_defaults(func=_cmd_inner)

    sp = sub.add_parser("oneshot", help="independence product and rho program")
    sp.add_argument("--channel", required=True)
    _add_io(sp, seed=False)
    sp.set_defaults(func=_cmd_oneshot)

    sp = sub.add_parser("theta", help="spectral values of a single graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--max-power", type=int, default=2)
    _add_io(sp, seed=False)
    sp.set_defaults(func=_cmd_theta)

    sp = sub.add_parser("search", help="exhaustive best pair at blocklength n")
    sp.add_argument("--channel", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--budget", type=int, default=1 << 16)
    _add_io(sp, seed=False)
    sp.set_defaults(func=_cmd_search)

    sp = sub.add_parser("construct", help="linear-code and coset constructions")
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--s", type=int)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--lemma8", action="store_true")
    sp.add_argument("--qprime", type=int)
    sp.add_argument("--d-set", default="0")
    _add_io(sp)
    sp.set_defaults(func=_cmd_construct)

    sp = sub.add_parser("report", help="re-check a report's recorded invariants")
    sp.add_argument("--input", required=True)
    _add_io(sp, seed=False)
    sp.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, RuntimeError) as exc:
        print(f"twzec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
