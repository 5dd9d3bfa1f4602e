"""Command-line front end.

Exit status: 0 on success, 1 when the box is not a valid no-signaling box
for the requested operation, 2 on unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .boxcore import (
    TOL,
    BoxError,
    ConditionalBox,
    SignalingError,
    index_to_bits,
    load_box,
    make_isotropic,
    parity_table,
    pair_parity_table,
    sample_counts,
    verify_no_signaling,
)
from .functionals import evaluate
from .icgame import multipartite_ic, scan_grid, tripartite_guess_game
from .wiring import GroupSplit, merge_parties

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _rounded(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def parse_box(source: str) -> ConditionalBox:
    """``isotropic:N:e`` builds a box; anything else is read as a JSON box file."""
    if source.startswith("isotropic:"):
        parts = source.split(":")
        if len(parts) != 3:
            raise InputError(f"generator spec must look like isotropic:N:e, got {source!r}")
        try:
            n, e = int(parts[1]), float(parts[2])
        except ValueError:
            raise InputError(f"cannot parse generator spec {source!r}") from None
        return make_isotropic(n, e)
    path = Path(source)
    if not path.is_file():
        raise InputError(f"no such box file: {source}")
    return load_box(path)


def parse_grid(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"grid must be a comma-separated list of numbers, got {text!r}") from None


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _text(doc: dict) -> str:
    return json.dumps(_rounded(doc), indent=2) + "\n"


def _flat_csv(doc: dict) -> str:
    items = [(k, v) for k, v in doc.items() if not isinstance(v, (list, dict))]
    return _csv([k for k, _ in items], [[v for _, v in items]])


def _emit(doc: dict, fmt_name: str) -> str:
    return _flat_csv(doc) if fmt_name == "csv" else _text(doc)


def sampled_average(box: ConditionalBox, shots: int, seed: int) -> float:
    """Monte Carlo estimate of the Svetlichny average from ``shots`` draws per setting."""
    n = box.n_parties
    seeds = np.random.SeedSequence(seed).spawn(2**n)
    hits = 0.0
    for x in range(2**n):
        counts = sample_counts(box, x, shots, seeds[x])
        good = parity_table(n) == pair_parity_table(n)[x]
        hits += counts[good].sum() / shots
    return hits / 2**n


def cmd_verify(args) -> tuple[int, str]:
    box = parse_box(args.box)
    report = verify_no_signaling(box, args.tol)
    doc = {"n_parties": box.n_parties, **report.to_dict()}
    return (EXIT_OK if report.ok else EXIT_VIOLATION), _emit(doc, args.format)


def cmd_svetlichny(args) -> tuple[int, str]:
    box = parse_box(args.box)
    doc = evaluate(box, args.tol).to_dict()
    if args.shots:
        doc["shots"] = args.shots
        doc["seed"] = args.seed
        doc["sampled_avg_probability"] = sampled_average(box, args.shots, args.seed)
    return EXIT_OK, _emit(doc, args.format)


def cmd_icgame(args) -> tuple[int, str]:
    box = parse_box(args.box)
    if args.depth is None and args.split is None and box.n_parties == 3:
        doc = {"protocol": "tripartite", **tripartite_guess_game(box, args.tol).to_dict()}
    else:
        depth = 1 if args.depth is None else args.depth
        split = box.n_parties - 1 if args.split is None else args.split
        result = multipartite_ic(box, split, depth, args.tol)
        doc = {"protocol": "merged-rac", "split": split, "depth": depth, **result.to_dict()}
    return EXIT_OK, _emit(doc, args.format)


def cmd_merge(args) -> tuple[int, str]:
    box = parse_box(args.box)
    split = GroupSplit(box.n_parties, box.n_parties - 1 if args.split is None else args.split)
    merged = merge_parties(box, split, args.tol)
    if args.format == "csv":
        k, n = split.k, split.n_parties
        rows = []
        for xl in range(2**k):
            for xr in range(2 ** (n - k)):
                probs = [float(p) for p in merged.table[xl, xr].reshape(-1)]
                rows.append([index_to_bits(xl, k) + index_to_bits(xr, n - k), *probs])
        return EXIT_OK, _csv(["inputs", "p00", "p01", "p10", "p11"], rows)
    return EXIT_OK, _text(merged.to_dict())


def cmd_sweep(args) -> tuple[int, str]:
    rows = scan_grid(parse_grid(args.grid), args.kmax)
    if args.format == "text":
        doc = {
            "k_max": args.kmax,
            "rows": [
                {"e": r.e, "k": r.k, "p": r.per_bit_success, "i_fano": r.i_fano, "violates": r.violates}
                for r in rows
            ],
        }
        return EXIT_OK, _text(doc)
    table = [
        [r.e, "none" if r.k is None else r.k, r.per_bit_success, r.i_fano, str(r.violates).lower()]
        for r in rows
    ]
    return EXIT_OK, _csv(["e", "k", "p", "i_fano", "violates"], table)


COMMANDS = {
    "verify": cmd_verify,
    "svetlichny": cmd_svetlichny,
    "icgame": cmd_icgame,
    "merge": cmd_merge,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsbox", description="No-signaling boxes, Svetlichny functionals and information causality."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=TOL, help="probability tolerance (default %(default)s)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "text"), default=None)
    common.add_argument("--out", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def box_cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--box", required=True, help="box JSON file or generator spec isotropic:N:e")
        return p

    box_cmd("verify", "check normalization and no-signaling")
    p = box_cmd("svetlichny", "evaluate the Svetlichny functionals")
    p.add_argument("--shots", type=int, default=0, help="also estimate the average by sampling")
    p = box_cmd("icgame", "run the tripartite guessing game or the merged random access code")
    p.add_argument("--split", type=int)
    p.add_argument("--depth", type=int)
    p = box_cmd("merge", "merge parties 1..k and k+1..N into a bipartite box")
    p.add_argument("--split", type=int)
    p = sub.add_parser("sweep", parents=[common], help="scan biases for the first violating depth")
    p.add_argument("--grid", required=True, help="comma-separated biases")
    p.add_argument("--kmax", type=int, default=25)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "text"
    try:
        status, output = COMMANDS[args.command](args)
    except SignalingError as exc:
        print(f"nsbox: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (InputError, BoxError, ValueError, OSError) as exc:
        print(f"nsbox: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        Path(args.out).write_text(output)
    else:
        sys.stdout.write(output)
    return status


if __name__ == "__main__":
    sys.exit(main())
