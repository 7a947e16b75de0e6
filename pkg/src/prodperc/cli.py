"""Command line front end.

    prodperc census --graph K2^12 --p 0.3 --seed 7
    prodperc experiment --config experiments.cfg --out results/
    prodperc ytable --eps-min 0.01 --eps-max 2 --steps 50
    prodperc iso --graph K2,K2,K3
    prodperc layers --t 4 --s 2

Exit codes: 0 success, 2 a declared check failed, 1 usage or runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import analysis, harness, percolation
from .percolation import CENSUS_CSV_HEADER, EdgeSampler, census_csv_line
from .product import build, parse_product_spec


def _cmd_census(args) -> int:
    g = build(parse_product_spec(args.graph))
    sampler = EdgeSampler(seed=args.seed, p=args.p, round_tag=args.tag)
    result = percolation.census(g, sampler)
    lines = [CENSUS_CSV_HEADER, census_csv_line(result)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if hasattr(obj, "item"):  # numpy scalars
        return _jsonable(obj.item())
    return obj


def _cmd_experiment(args) -> int:
    specs = harness.load_config(args.config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    any_failed = False
    for spec in specs:
        report = harness.run_experiment(spec)
        records = report.get("records", [])
        if records:
            stem = spec.output_path or f"{spec.name}.csv"
            harness.emit(records, "csv", outdir / stem, spec)
            harness.emit(records, "json", outdir / f"{spec.name}.json", spec)
        full = outdir / f"{spec.name}.report.json"
        full.write_text(json.dumps(_jsonable(report), indent=2,
                                   sort_keys=True) + "\n", encoding="utf-8")
        for name, ok, detail in harness.evaluate_checks(spec, report):
            status = "PASS" if ok else "FAIL"
            print(f"[{status}] {spec.name}.{name}: {detail}")
            any_failed |= not ok
    return 2 if any_failed else 0


def _cmd_ytable(args) -> int:
    lines = ["epsilon,y,residual"]
    for i in range(args.steps):
        eps = args.eps_min + (args.eps_max - args.eps_min) * i / max(
            1, args.steps - 1)
        pt = analysis.solve_y(eps, tol=args.tol)
        lines.append(f"{pt.epsilon:.12g},{pt.y:.12g},{pt.residual:.12g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_iso(args) -> int:
    factors = parse_product_spec(args.graph)
    result = analysis.iso_sandwich_check(factors)
    print(f"i(G) = {result.i_product}")
    print(f"bounds: [{result.lower}, {result.upper}]")
    print(f"sandwich: {'ok' if result.ok else 'VIOLATED'}")
    return 0 if result.ok else 2


def _cmd_layers(args) -> int:
    lc = analysis.layer_census(args.t, args.s, verify=args.verify)
    lines = ["z,size,degree"]
    for z, size in enumerate(lc.sizes):
        lines.append(f"{z},{size},{lc.degree_per_layer[z]}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prodperc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("census", help="single percolation census")
    c.add_argument("--graph", required=True, help="product spec, e.g. K2^12")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--tag", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(fn=_cmd_census)

    e = sub.add_parser("experiment", help="run a config of experiments")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(fn=_cmd_experiment)

    y = sub.add_parser("ytable", help="survival fixed point table")
    y.add_argument("--eps-min", type=float, required=True)
    y.add_argument("--eps-max", type=float, required=True)
    y.add_argument("--steps", type=int, required=True)
    y.add_argument("--tol", type=float, default=1e-12)
    y.add_argument("--out")
    y.set_defaults(fn=_cmd_ytable)

    i = sub.add_parser("iso", help="edge-expansion sandwich on a small product")
    i.add_argument("--graph", required=True)
    i.set_defaults(fn=_cmd_iso)

    l = sub.add_parser("layers", help="star-power layer census")
    l.add_argument("--t", type=int, required=True)
    l.add_argument("--s", type=int, required=True)
    l.add_argument("--verify", action="store_true")
    l.add_argument("--out")
    l.set_defaults(fn=_cmd_layers)
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
