"""Command-line interface.

Subcommands: profile, fit, compare, experiment (random-sample | growth),
convert-asjp.  Every run echoes its effective configuration into the
output (comment lines in TSV, a "meta" object in JSON) and writes
atomically.  Exit codes: 0 success, 2 input or parse error,
3 insufficient or degenerate data, 4 lookup error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import corpus as corpus_mod
from . import experiments, fitting, selection
from .dataset import SizeDataset
from .distributions import CONTINUOUS, DISCRETE, ModelKind, kind_from_name, short_name
from .errors import (
    ConfigError,
    ContractViolationError,
    DegenerateDataError,
    DomainError,
    EmptyCorpusError,
    GramtailError,
    InsufficientDataError,
    NumericsError,
    ParseError,
    TokenizationError,
    UnknownFamilyError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DATA = 3
EXIT_LOOKUP = 4

_INPUT_ERRORS = (ParseError, TokenizationError, ConfigError)
_DATA_ERRORS = (
    InsufficientDataError,
    DegenerateDataError,
    EmptyCorpusError,
    DomainError,
    NumericsError,
    ContractViolationError,
)


def _atomic_write(path, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gramtail-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta_lines(meta: dict) -> str:
    return "".join(f"# {key}\t{meta[key]}\n" for key in sorted(meta))


def _emit(args, meta: dict, header, rows, json_payload=None):
    if args.format == "json":
        payload = {"meta": meta}
        payload.update(json_payload if json_payload is not None else {})
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = [_meta_lines(meta)]
        lines.append("\t".join(str(h) for h in header) + "\n")
        for row in rows:
            lines.append("\t".join(str(v) for v in row) + "\n")
        text = "".join(lines)
    _atomic_write(args.out, text)


def _read_numbers(path, column=None):
    """Newline-separated numbers, or one named column of a TSV."""
    if path == "-":
        lines = sys.stdin.read().splitlines()
    else:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    lines = [l for l in lines if l.strip() and not l.lstrip().startswith("#")]
    if not lines:
        raise ParseError("no numeric input")
    if column is not None:
        header = lines[0].split("\t")
        if column not in header:
            raise ParseError(f"column {column!r} not in header {header}")
        idx = header.index(column)
        cells = []
        for lineno, line in enumerate(lines[1:], start=2):
            fields = line.split("\t")
            if idx >= len(fields):
                raise ParseError("short row", line=lineno)
            cells.append((lineno, fields[idx]))
    else:
        cells = list(enumerate(lines, start=1))
    values = []
    for lineno, cell in cells:
        try:
            values.append(float(cell))
        except ValueError:
            raise ParseError(f"not a number: {cell!r}", line=lineno)
    return np.asarray(values, dtype=float)


def _alphabet(args):
    if getattr(args, "alphabet", None):
        return corpus_mod.load_alphabet(args.alphabet)
    return corpus_mod.DEFAULT_ALPHABET


def _config_meta(args, **extra) -> dict:
    meta = {"command": args.command, "seed": getattr(args, "seed", None)}
    for key in (
        "nmax",
        "convention",
        "tokenize",
        "xmin",
        "bootstrap",
        "format",
        "by",
        "alphabet",
        "candidate_support",
        "column",
        "only",
        "iterations",
        "repeats",
        "family",
        "min_items",
        "min_members",
    ):
        if hasattr(args, key):
            meta[key] = getattr(args, key)
    meta.update(extra)
    return {k: v for k, v in meta.items() if v is not None}


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_profile(args) -> int:
    alphabet = _alphabet(args)
    lists = corpus_mod.parse_canonical_file(args.input)
    if args.by == "genus":
        corpora = corpus_mod.aggregate_by_genus(lists, min_items=args.min_items)
    else:
        corpora = corpus_mod.apply_inclusion_filters(
            lists, min_items=args.min_items, min_members=args.min_members
        )
    if not corpora:
        raise EmptyCorpusError("no corpora left after filtering")
    header, rows = corpus_mod.size_table(
        corpora, n_max=args.nmax, mode=args.tokenize, alphabet=alphabet
    )
    meta = _config_meta(args, input=args.input)
    payload = {"table": [dict(zip(header, row)) for row in rows]}
    _emit(args, meta, header, rows, payload)
    return EXIT_OK


def _comparison_report(values, args):
    support = (
        selection.SUPPORT_OBSERVED if args.candidate_support == "observed"
        else selection.SUPPORT_UNBOUNDED
    )
    if args.xmin == "scan":
        return selection.compare_all(values, convention=args.convention, candidate_support=support)
    try:
        x_min = float(args.xmin)
    except ValueError:
        raise ConfigError(f"--xmin must be 'scan' or a number, got {args.xmin!r}")
    return selection.compare_at(values, x_min, convention=args.convention, candidate_support=support)


def cmd_fit(args) -> int:
    values = _read_numbers(args.numbers, args.column)
    data = SizeDataset(values, label=os.path.basename(str(args.numbers)))
    report = _comparison_report(data, args)
    try:
        alpha_sp = experiments.rank_regression(data).alpha_sp
    except (DomainError, DegenerateDataError):
        alpha_sp = float("nan")
    bootstrap_p = None
    if args.bootstrap:
        pl_fit = report.candidate(ModelKind.POWER_LAW).fit
        bootstrap_p = fitting.bootstrap_gof(values, pl_fit, args.bootstrap, args.seed)

    aic_key = "aic_halved" if args.aic == "halved" else "aic_full"
    header = ["label", "x_min", "ln_L", "n_tail", "alpha_est", "alpha_sp"]
    row = [
        report.label,
        _fmt(report.x_min),
        _fmt(report.pl_log_likelihood),
        report.n_tail,
        _fmt(report.alpha_est),
        _fmt(alpha_sp),
    ]
    for cand in report.candidates:
        header.append(f"{short_name(cand.kind)}_{args.aic}")
        row.append(_fmt(getattr(cand, aic_key)))
    header.append("best")
    row.append(short_name(report.best_by_aic))
    if bootstrap_p is not None:
        header.append("bootstrap_p")
        row.append(_fmt(bootstrap_p))

    meta = _config_meta(args, input=args.numbers, aic=args.aic)
    payload = {"report": selection.report_to_dict(report), "alpha_sp": alpha_sp}
    if bootstrap_p is not None:
        payload["bootstrap_p"] = bootstrap_p
    _emit(args, meta, header, row and [row], payload)
    return EXIT_OK


def cmd_compare(args) -> int:
    values = _read_numbers(args.numbers, args.column)
    data = SizeDataset(values, label=os.path.basename(str(args.numbers)))
    report = _comparison_report(data, args)
    only = kind_from_name(args.only) if args.only else None

    header = ["label"]
    row = [report.label]
    cells = []
    for lrt in report.lrts:
        if only is not None and lrt.candidate is not only:
            continue
        header.append(short_name(lrt.candidate))
        sign = "-" if lrt.favored == selection.FAVORED_CANDIDATE else ""
        star = "*" if lrt.significant else ""
        row.append(f"{sign}{_fmt(lrt.p)}{star}")
        cells.append(
            {
                "candidate": lrt.candidate.value,
                "p": lrt.p,
                "favored": lrt.favored,
                "significant": lrt.significant,
                "R": lrt.R,
            }
        )
    meta = _config_meta(args, input=args.numbers)
    payload = {"label": report.label, "cells": cells, "report": selection.report_to_dict(report)}
    _emit(args, meta, header, [row], payload)
    return EXIT_OK


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(round(float(x), 10))
    return str(x)


def cmd_experiment(args) -> int:
    alphabet = _alphabet(args)
    lists = corpus_mod.parse_canonical_file(args.input)
    corpora = corpus_mod.apply_inclusion_filters(
        lists, min_items=args.min_items, min_members=args.min_members
    )
    if not corpora:
        raise EmptyCorpusError("no corpora left after filtering")
    meta = _config_meta(args, input=args.input, which=args.which)

    if args.which == "growth":
        by_name = {c.name: c for c in corpora}
        if args.family not in by_name:
            raise UnknownFamilyError(args.family, sorted(by_name))
        curve = experiments.growth_curves(
            by_name[args.family],
            iterations=args.iterations,
            seed=args.seed,
            n_max=args.nmax,
            mode=args.tokenize,
            alphabet=alphabet,
        )
        header = ["sample_size"]
        header += [f"per_{n}gram" for n in range(1, args.nmax + 1)]
        header += [f"cumulative_{n}gram" for n in range(1, args.nmax + 1)]
        rows = []
        for idx, i in enumerate(curve.sizes):
            row = [i]
            row += [_fmt(curve.per_n_means[n][idx]) for n in range(1, args.nmax + 1)]
            row += [_fmt(curve.cumulative_means[n][idx]) for n in range(1, args.nmax + 1)]
            rows.append(row)
        sidecar = {"meta": meta, "family": curve.family, "iterations": curve.iterations}
    else:
        sizes = [c.member_count for c in corpora]
        pool = [wl for c in corpora for wl in c.word_lists]
        result = experiments.random_sample_experiment(
            pool,
            sizes,
            seed=args.seed,
            n_max=args.nmax,
            mode=args.tokenize,
            alphabet=alphabet,
            repeats=args.repeats,
        )
        header = ["sample_size", "profile_size"]
        rows = [[s, _fmt(p)] for s, p in zip(result.sizes, result.profile_sizes)]
        sidecar = {
            "meta": meta,
            "regression": {
                "alpha_sp": result.regression.alpha_sp,
                "intercept": result.regression.intercept,
                "r_squared": result.regression.r_squared,
            },
        }

    _emit(args, meta, header, rows)
    sidecar_path = (args.out + ".meta.json") if args.out else None
    sidecar_text = json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
    if sidecar_path:
        _atomic_write(sidecar_path, sidecar_text)
    else:
        sys.stdout.write(sidecar_text)
    return EXIT_OK


def cmd_convert_asjp(args) -> int:
    with open(args.input, encoding="utf-8") as handle:
        rows = list(corpus_mod.convert_asjp_text(handle))
    lines = ["\t".join(corpus_mod.CANONICAL_COLUMNS) + "\n"]
    lines += ["\t".join(row) + "\n" for row in rows]
    _atomic_write(args.out, "".join(lines))
    return EXIT_OK


def read_report_json(path) -> selection.ComparisonReport:
    """Re-ingest a `fit`/`compare` JSON output into a ComparisonReport."""
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    return selection.report_from_dict(payload["report"])


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


def _add_output_flags(p):
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=42)


def _add_corpus_flags(p):
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--tokenize", choices=(corpus_mod.RAW, corpus_mod.COMBINED), default=corpus_mod.RAW)
    p.add_argument("--alphabet", default=None, help="alphabet declaration file")
    p.add_argument("--min-items", dest="min_items", type=int, default=28)
    p.add_argument("--min-members", dest="min_members", type=int, default=4)


def _add_fit_flags(p):
    p.add_argument("numbers", help="newline-separated numbers, a TSV (with --column), or - for stdin")
    p.add_argument("--column", default=None, help="column name when the input is a TSV")
    p.add_argument("--convention", choices=(CONTINUOUS, DISCRETE), default=CONTINUOUS)
    p.add_argument("--xmin", default="scan", help="'scan' or a fixed numeric bound")
    p.add_argument(
        "--candidate-support",
        dest="candidate_support",
        choices=("unbounded", "observed"),
        default="unbounded",
        help="normalize numeric-normalizer candidates on [x_min, inf) or on the observed range",
    )
    p.add_argument("--bootstrap", type=int, default=0, help="goodness-of-fit replicates (0 = off)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramtail",
        description="Heavy-tailed size-distribution fitting and phoneme n-gram profiling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="n-gram profile table for families or genera")
    p.add_argument("input", help="canonical word-list TSV")
    p.add_argument("--by", choices=("family", "genus"), default="family")
    _add_corpus_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("fit", help="fit all candidate models to a column of sizes")
    _add_fit_flags(p)
    p.add_argument("--aic", choices=("halved", "full"), default="halved")
    _add_output_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="signed-p likelihood-ratio table")
    _add_fit_flags(p)
    p.add_argument("--only", default=None, help="restrict to one candidate model")
    _add_output_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("experiment", help="random-sample control or growth curves")
    p.add_argument("which", choices=("random-sample", "growth"))
    p.add_argument("input", help="canonical word-list TSV")
    p.add_argument("--family", default=None, help="family name (growth)")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    _add_corpus_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("convert-asjp", help="best-effort raw word-list to canonical TSV")
    p.add_argument("input")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_convert_asjp)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "which", None) == "growth" and getattr(args, "family", None) is None:
        parser.error("experiment growth requires --family")
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"gramtail: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UnknownFamilyError as exc:
        print(f"gramtail: {exc.args[0]}", file=sys.stderr)
        return EXIT_LOOKUP
    except _DATA_ERRORS as exc:
        print(f"gramtail: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"gramtail: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GramtailError as exc:
        print(f"gramtail: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
