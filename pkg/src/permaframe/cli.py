"""Command-line front end.

Subcommands: ``setup`` (build the per-n cache), ``analyze`` (coefficient
table), ``energy`` (shape/eigenvalue energy rows), ``top`` (largest-magnitude
coefficients), ``reconstruct`` (round-trip error), ``gft`` (eigenvalue-norm
rows), ``project`` (signal accumulated onto one Schreier graph).

Exit codes: 0 success, 2 validation error, 3 resource refusal.  The default
cache root comes from ``PERMAFRAME_CACHE_ROOT`` when set.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import cache as cache_mod
from . import frame
from .ballots import load_candidate_names, read_ballot_file, tally
from .combinatorics import IntegerPartition, OrderedSetPartition, check_dense_n
from .errors import (
    CacheFormatError,
    PermaframeError,
    ResourceLimitError,
    ValidationError,
)
from .spectral import key_to_value

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3

CACHE_ROOT_ENV = "PERMAFRAME_CACHE_ROOT"


def _default_cache_root() -> str:
    return os.environ.get(CACHE_ROOT_ENV, "./permaframe-cache")


def _add_cache_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--cache",
        default=_default_cache_root(),
        help=f"cache root directory (default: ${CACHE_ROOT_ENV} or ./permaframe-cache)",
    )


def _add_common_analysis_args(parser: argparse.ArgumentParser) -> None:
    _add_cache_arg(parser)
    parser.add_argument("--ballots", required=True, help="ballot file to tally")
    parser.add_argument(
        "--mode",
        choices=["cached", "streamed", "auto"],
        default="auto",
        help="execution mode for the lifting index maps",
    )
    parser.add_argument("--threads", type=int, default=1, help="worker cap")


def _detect_n(root: str) -> int:
    candidates = sorted(
        int(p.name[2:])
        for p in Path(root).glob("n=*")
        if p.is_dir() and p.name[2:].isdigit()
    )
    if len(candidates) == 1:
        return candidates[0]
    if not candidates:
        raise CacheFormatError(f"no caches found under {root}")
    raise ValidationError(
        f"multiple caches under {root} (n={candidates}); pass --n"
    )


def _load_cache(args) -> cache_mod.FrameCache:
    n = getattr(args, "n", None) or _detect_n(args.cache)
    return cache_mod.load_cache(args.cache, n)


def _load_signal(args, cache) -> tuple[frame.Signal, str]:
    ballots = read_ballot_file(args.ballots)
    if ballots.n != cache.n:
        raise ValidationError(
            f"ballots are for n={ballots.n} but the cache is for n={cache.n}"
        )
    return tally(ballots), ballots.label


def _shape_subset(cache, count: int | None):
    if count is None:
        return None
    if count < 1 or count > len(cache.shapes):
        raise ValidationError(
            f"--shapes {count} out of range 1..{len(cache.shapes)}"
        )
    return list(cache.shapes[:count])


def _write_text(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_setup(args) -> int:
    n = args.n
    check_dense_n(n)
    if args.shapes is None and n > cache_mod.FULL_H_MAX_N:
        raise ResourceLimitError(
            f"full transpose-reduced setup is refused above n={cache_mod.FULL_H_MAX_N}; "
            f"pass --shapes K to build the first K shapes"
        )
    base = cache_mod.cache_dir(args.cache, n)
    if base.exists() and not args.force:
        problems = cache_mod.verify_cache(args.cache, n)
        if not problems:
            print(f"cache at {base} verified; nothing to do")
            return EXIT_OK
        print(f"cache at {base} failed verification; rebuilding:", file=sys.stderr)
        for p in problems:
            print(f"  {p}", file=sys.stderr)
    if args.mode == "cached":
        from math import factorial

        from .combinatorics import h_shapes, multiplicity_constants

        needed = sum(
            multiplicity_constants(s).z for s in h_shapes(n, args.shapes)
        ) * factorial(n) * 8
        budget = cache_mod.memory_budget()
        if needed > budget:
            raise ResourceLimitError(
                f"cached mode would hold {needed / 1024**3:.1f} GiB of index maps, "
                f"over the {budget / 1024**3:.1f} GiB budget; use --mode streamed, "
                f"reduce --shapes, or raise {cache_mod.MEMORY_BUDGET_ENV}"
            )
    built = cache_mod.build_cache(
        n,
        "h",
        top_k=args.shapes,
        hook_fastpath=args.hook_fastpath,
        mode_default=args.mode,
        threads=args.threads,
        log=print,
    )
    cache_mod.save_cache(built, args.cache)
    print(f"cache written to {base} ({built.atom_count()} atoms)")
    return EXIT_OK


def _captured_fractions(cache, signal, table, unfiltered: bool):
    energy = signal.norm2()
    direct = table.total_energy() / energy if energy > 0 else 1.0
    completed = None
    if unfiltered and energy > 0:
        have = set(cache.shapes)
        conj_list = [s for s in cache.shapes if s.transpose() not in have]
        if conj_list:
            flipped = frame.analyze(cache, frame.sign_flip(signal), shapes=conj_list)
            completed = (table.total_energy() + flipped.total_energy()) / energy
        else:
            completed = direct
    return direct, completed


def cmd_analyze(args) -> int:
    cache = _load_cache(args)
    signal, label = _load_signal(args, cache)
    shapes = _shape_subset(cache, args.shapes)
    table = frame.analyze(
        cache,
        signal,
        shapes=shapes,
        max_eigs=args.max_eigs,
        mode=None if args.mode == "auto" else args.mode,
        threads=args.threads,
        dataset=label,
    )
    text = table.to_json_text() if args.format == "json" else table.to_csv_text()
    _write_text(args.out, text)
    unfiltered = args.shapes is None and args.max_eigs is None
    direct, completed = _captured_fractions(cache, signal, table, unfiltered)
    summary = (
        f"signal energy {signal.norm2():.6f}; "
        f"captured fraction {direct:.9f} ({table.row_count} coefficients)"
    )
    if completed is not None:
        summary += f"; with transpose completion {completed:.9f}"
    print(summary)
    return EXIT_OK


def cmd_energy(args) -> int:
    cache = _load_cache(args)
    signal, _ = _load_signal(args, cache)
    shapes = _shape_subset(cache, args.shapes)
    mode = None if args.mode == "auto" else args.mode
    table = frame.analyze(cache, signal, shapes=shapes, mode=mode, threads=args.threads)
    rows = [(shape, key, energy) for shape, key, energy in table.energy_rows()]
    include_conjugates = args.conjugates == "on" or (
        args.conjugates == "auto" and shapes is None
    )
    if include_conjugates:
        have = set(cache.shapes if shapes is None else shapes)
        conj_list = sorted(
            (s for s in have if s.transpose() not in have),
            key=lambda s: s.parts,
            reverse=True,
        )
        if conj_list:
            flipped = frame.analyze(
                cache, frame.sign_flip(signal), shapes=conj_list, mode=mode
            )
            from .spectral import reflected_key

            for shape, key, energy in flipped.energy_rows():
                rows.append((shape.transpose(), reflected_key(cache.n, key), energy))
    rows.sort(key=lambda r: (tuple(-p for p in r[0].parts), r[1]))
    out = ["shape,lambda,energy"]
    for shape, key, energy in rows:
        out.append(f'"{shape.label()}",{key_to_value(key):.6f},{energy!r}')
    _write_text(args.out, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_top(args) -> int:
    cache = _load_cache(args)
    signal, _ = _load_signal(args, cache)
    names = load_candidate_names(args.names) if args.names else None
    table = frame.analyze(
        cache,
        signal,
        shapes=_shape_subset(cache, args.shapes),
        mode=None if args.mode == "auto" else args.mode,
        threads=args.threads,
    )
    ranked = sorted(
        enumerate(table.iter_rows()), key=lambda item: (-abs(item[1][1]), item[0])
    )[: args.count]
    out_rows = []
    for rank, (_order, (atom_id, alpha)) in enumerate(ranked, start=1):
        named = ""
        if names:
            named = "|".join(
                ",".join(names.get(e, str(e)) for e in block)
                for block in atom_id.lifting.blocks
            )
        out_rows.append(
            (
                rank,
                atom_id.shape.label(),
                f"{atom_id.eigenvalue:.6f}",
                atom_id.k,
                atom_id.lifting.label(),
                named,
                repr(alpha),
            )
        )
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "shape", "lambda", "k", "partition", "names", "alpha"])
    writer.writerows(out_rows)
    _write_text(args.out, buf.getvalue())
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    cache = _load_cache(args)
    signal, _ = _load_signal(args, cache)
    mode = None if args.mode == "auto" else args.mode
    rec = frame.reconstruct(cache, signal, mode=mode)
    norm = np.linalg.norm(signal.values)
    err = float(np.linalg.norm(rec.values - signal.values) / norm) if norm else 0.0
    print(f"relative reconstruction error {err:.3e}")
    return EXIT_OK


def cmd_gft(args) -> int:
    cache = _load_cache(args)
    signal, _ = _load_signal(args, cache)
    rows = frame.graph_fourier(cache, signal)
    out = ["lambda,norm"]
    out.extend(f"{key_to_value(key):.6f},{norm!r}" for key, norm in rows)
    _write_text(args.out, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_project(args) -> int:
    cache = _load_cache(args)
    signal, _ = _load_signal(args, cache)
    shape = IntegerPartition.parse(args.shape)
    lifting = OrderedSetPartition.parse_label(args.blocks, cache.n)
    if lifting.shape != shape:
        raise ValidationError(
            f"blocks {args.blocks!r} do not form a partition of shape {shape.parts}"
        )
    values = frame.schreier_projection(cache, signal, shape, lifting)
    bundle = cache.bundle(shape)
    out = ["vertex,value"]
    for vertex, value in zip(bundle.graph.vertices(), values):
        out.append(f'"{vertex.label()}",{float(value)!r}')
    _write_text(args.out, "\n".join(out) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permaframe",
        description=(
            "Tight spectral frame transform for ranked data on the permutahedron"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="build the data-independent cache for one n")
    p.add_argument("--n", type=int, required=True)
    _add_cache_arg(p)
    p.add_argument("--shapes", type=int, default=None, help="keep only the first K shapes")
    p.add_argument("--mode", choices=["cached", "streamed", "auto"], default="auto")
    p.add_argument("--hook-fastpath", action="store_true",
                   help="use closed-form eigenvectors for hook shapes")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--force", action="store_true", help="rebuild even if the cache verifies")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("analyze", help="write the coefficient table for a ballot file")
    _add_common_analysis_args(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--shapes", type=int, default=None, help="first K cached shapes only")
    p.add_argument("--max-eigs", type=int, default=None,
                   help="keep at most M eigenvectors per shape")
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("energy", help="energy per shape-eigenvalue pair")
    _add_common_analysis_args(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--shapes", type=int, default=None)
    p.add_argument("--conjugates", choices=["auto", "on", "off"], default="auto",
                   help="complete transpose shapes through the sign trick")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("top", help="largest-magnitude coefficients")
    _add_common_analysis_args(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--shapes", type=int, default=None)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--names", default=None, help="JSON file of candidate names")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_top)

    p = sub.add_parser("reconstruct", help="round-trip a ballot signal and report the error")
    _add_common_analysis_args(p)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("gft", help="norms of the signal per Laplacian eigenvalue")
    _add_common_analysis_args(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gft)

    p = sub.add_parser("project", help="accumulate the signal onto one Schreier graph")
    _add_common_analysis_args(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--shape", required=True, help='shape, e.g. "8,2"')
    p.add_argument("--blocks", required=True,
                   help='lifting in block-label format, e.g. "245|13"')
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_project)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, CacheFormatError, PermaframeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
