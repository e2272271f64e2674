"""Command line entry point ``interp-kit``.

Exit status: 0 when every pass flag holds, 1 when some check fails,
2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from interpkit import harness, nuclear, representations, retract
from interpkit.couples import WeightedCouple, j_functional, k_exact, k_surrogate
from interpkit.errors import ConfigError, InterpKitError


def read_vector(path: str | Path) -> np.ndarray:
    """One value per row; a header row is skipped and the last column is used."""
    vals = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            try:
                vals.append(float(row[-1]))
            except ValueError:
                if i == 0:
                    continue
                raise ConfigError(f"{path}: line {i + 1}: not a number: {row[-1]!r}") from None
    return np.array(vals)


def read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def read_couple(path: str | Path) -> WeightedCouple:
    try:
        return WeightedCouple.from_spec(read_json(path))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: malformed couple spec: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(harness._jsonable(obj), indent=2) + "\n"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--format", choices=("csv", "json"), help="report format")
    p.add_argument("--trials", type=int, help="override the configured trial count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interp-kit", description="Real interpolation verification toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in harness.EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _common(p)
        if name in ("jk-gap", "nuclear-check"):
            p.add_argument("--source", help="source couple JSON (p = inf)")
            p.add_argument("--target", help="target couple JSON (p = 1)")
            p.add_argument("--x", help="CSV vector over the source index set")
            p.add_argument("--y", help="CSV vector over the target index set")
            p.add_argument("--lambda", dest="lam", type=float, default=None)
        if name == "jk-gap":
            p.add_argument("--method", choices=("lp", "greedy"), default=None)
            p.add_argument("--surrogate", action="store_true", help="use the sup-form K in the denominator")
            p.add_argument("--witness", help="path for the witness CSV")

    p = sub.add_parser("kfun", help="K(t, x) for a couple")
    p.add_argument("--couple", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--t", type=float, action="append", required=True, help="repeatable")
    p.add_argument("--surrogate", action="store_true")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("jfun", help="J(t, x) for a couple")
    p.add_argument("--couple", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--t", type=float, action="append", required=True, help="repeatable")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("calderon", help="discrete Calderon transform of a sequence")
    p.add_argument("--c", required=True, help="CSV sequence")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--k-min", type=int, default=0, help="label of the first entry")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="json")

    p = sub.add_parser("partition", help="block sets e_k of a couple")
    p.add_argument("--couple", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--out")
    return parser


def _table(header: Sequence[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        return _json_text([dict(zip(header, r)) for r in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([harness._cell(v) for v in r])
    return buf.getvalue()


def _direct_gap(args) -> int:
    for flag in ("source", "target", "x", "y"):
        if getattr(args, flag) is None:
            raise ConfigError(f"--{flag} is required with --x/--y")
    source, target = read_couple(args.source), read_couple(args.target)
    x, y = read_vector(args.x), read_vector(args.y)
    lam = args.lam if args.lam is not None else 2.0
    if args.command == "nuclear-check":
        rep = nuclear.nuclearity_equivalence_test(source, target, x, y, lam)
        _emit(_json_text(rep.to_dict()), args.out)
        return 0 if rep.gap_ok and rep.nu_ok else 1
    cert = representations.jk_gap(source, x, target, y, lam, args.method or "lp", surrogate=args.surrogate)
    witness = args.witness
    if witness is None:
        witness = str(Path(args.out).with_suffix("")) + "_witness.csv" if args.out else "jk_gap_witness.csv"
    if cert.witness is not None:
        cert.witness.to_csv(witness)
    else:
        witness = None
    body = {"value": cert.value, "method": cert.method, "witness_csv_path": witness}
    if cert.fallback:
        body["fallback"] = True
    if cert.surrogate:
        body["surrogate_factor"] = 2
    _emit(_json_text(body), args.out)
    return 0


def _experiment(args) -> int:
    overrides = {"seed": args.seed, "trials": args.trials, "format": args.format, "out": args.out}
    if getattr(args, "lam", None) is not None:
        overrides["lam"] = args.lam
    if getattr(args, "method", None) is not None:
        overrides["method"] = args.method
    if args.config:
        cfg = harness.load_config(args.config, **overrides)
        if cfg.experiment != args.command:
            raise ConfigError(f"field 'experiment': config is for {cfg.experiment!r}, not {args.command!r}")
    else:
        cfg = harness.config_from_dict({"experiment": args.command}, **overrides)
    report = harness.run(cfg)
    _emit(report.render(cfg.format), cfg.out)
    return 0 if report.ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("jk-gap", "nuclear-check") and (args.x or args.y):
            return _direct_gap(args)
        if args.command in harness.EXPERIMENTS:
            return _experiment(args)
        if args.command in ("kfun", "jfun"):
            c = read_couple(args.couple)
            x = read_vector(args.x)
            if args.command == "kfun":
                fn = k_surrogate if args.surrogate else k_exact
            else:
                fn = j_functional
            rows = [[t, fn(c, t, x)] for t in args.t]
            _emit(_table(["t", "K" if args.command == "kfun" else "J"], rows, args.format), args.out)
            return 0
        if args.command == "calderon":
            c = read_vector(args.c)
            labels = np.arange(args.k_min, args.k_min + c.size)
            om = representations.calderon(c, args.lam, labels)
            _emit(_table(["k", "omega"], [[int(k), float(v)] for k, v in zip(labels, om)], args.format), args.out)
            return 0
        if args.command == "partition":
            c = read_couple(args.couple)
            part = retract.partition(c, args.lam)
            _emit(_json_text(part.to_json(c)), args.out)
            return 0
    except (InterpKitError, OSError) as exc:
        print(f"interp-kit: error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
