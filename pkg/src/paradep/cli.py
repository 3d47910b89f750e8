"""Command-line interface: align, discover, gen and bench.

Settings resolve as flags, then the ``--config`` file, then built-in
defaults.  The config file is INI-style and shares the ``[distance]`` and
``[overrides]`` sections with ``--distance-config``; it may also carry
``[run]`` (``engine``, ``id_column``), ``[thresholds]`` and ``[gen]``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .charspace import DistanceTable, load_distance_config, read_config
from .discovery import Record, Thresholds, discover, rank_for_output
from .engine import MergeTree, run_engine
from .synth import GenConfig, Plant, digit_plant, generate

log = logging.getLogger("paradep")

NULL_MARKERS = ("", "NULL")
ENGINE_CHOICES = ("single", "baseline", "pruning+", "pruning-", "pruning−")

DEFAULTS = {
    "engine": "pruning+",
    "support_min": Thresholds.support_min,
    "confidence_min": Thresholds.confidence_min,
    "diversity_min": Thresholds.diversity_min,
    "inner_support_min": Thresholds.inner_support_min,
    "length": GenConfig.length,
    "count": GenConfig.count,
    "clusters": GenConfig.clusters,
    "sigma": GenConfig.sigma,
    "delete_prob": None,
    "seed": GenConfig.seed,
}
CONFIG_KEYS = {
    "engine": ("run", str),
    "id_column": ("run", str),
    "support_min": ("thresholds", int),
    "confidence_min": ("thresholds", float),
    "diversity_min": ("thresholds", int),
    "inner_support_min": ("thresholds", int),
    "length": ("gen", int),
    "count": ("gen", int),
    "clusters": ("gen", int),
    "sigma": ("gen", float),
    "delete_prob": ("gen", float),
    "seed": ("gen", int),
}


class CliError(Exception):
    """User-facing failure; printed without a traceback, exit code 2."""


@dataclass
class Corpus:
    ids: list           # distinct ids in first-seen order
    records: list       # one Record per CSV row (duplicates kept)
    attributes: list
    duplicates: dict = field(default_factory=dict)


# -- input -----------------------------------------------------------------

def read_corpus(path: str, id_column: Optional[str] = None, attributes: Optional[Sequence[str]] = None,
                table: Optional[DistanceTable] = None, null_markers: Sequence[str] = NULL_MARKERS) -> Corpus:
    """Parse a header-first CSV and check every id against ``table``'s charset."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from e
    with fh:
        reader = csv.reader(fh, strict=True)
        try:
            header = next(reader)
        except StopIteration:
            raise CliError(f"{path}: empty file, expected a header row") from None
        except csv.Error as e:
            raise CliError(f"{path}:1: {e}") from None
        header = [h.strip() for h in header]
        if id_column is None:
            id_column = header[0]
        if id_column not in header:
            raise CliError(f"{path}: id column {id_column!r} not in header {header}")
        id_idx = header.index(id_column)
        if attributes is None:
            attributes = [h for h in header if h != id_column]
        missing = [a for a in attributes if a not in header]
        if missing:
            raise CliError(f"{path}: attribute columns {missing} not in header")
        attr_idx = [(a, header.index(a)) for a in attributes]

        ids, seen, records, dups = [], set(), [], {}
        try:
            for row in reader:
                line = reader.line_num
                if not row:
                    continue
                if len(row) != len(header):
                    raise CliError(f"{path}:{line}: expected {len(header)} fields, found {len(row)}")
                rid = row[id_idx].strip()
                if rid in null_markers:
                    raise CliError(f"{path}:{line}: empty id in column {id_column!r}")
                if table is not None:
                    for pos, ch in enumerate(rid, 1):
                        if ch not in table:
                            raise CliError(f"{path}:{line}: id {rid!r} has glyph {ch!r} at position {pos} "
                                           f"outside the configured charset")
                attrs = {a: (None if row[k] in null_markers else row[k]) for a, k in attr_idx}
                records.append(Record(rid, attrs))
                if rid in seen:
                    dups[rid] = dups.get(rid, 1) + 1
                else:
                    seen.add(rid)
                    ids.append(rid)
        except csv.Error as e:
            raise CliError(f"{path}:{reader.line_num}: {e}") from None
    if dups:
        shown = ", ".join(f"{k!r}x{v}" for k, v in list(dups.items())[:5])
        log.warning("%d duplicate ids aligned once each, records kept for discovery (%s%s)",
                    len(dups), shown, ", ..." if len(dups) > 5 else "")
    if len(ids) < 2:
        raise CliError(f"need ≥2 strings, found {len(ids)} distinct id(s) in {path}")
    return Corpus(ids, records, list(attributes), dups)


def _resolve(args: argparse.Namespace, parser: configparser.ConfigParser, keys: Sequence[str]) -> dict:
    """Flags over config file over defaults."""
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is None and k in CONFIG_KEYS:
            section, conv = CONFIG_KEYS[k]
            if parser.has_option(section, k):
                raw = parser.get(section, k)
                try:
                    v = conv(raw)
                except ValueError:
                    raise CliError(f"config [{section}] {k}: cannot parse {raw!r}") from None
        out[k] = DEFAULTS.get(k) if v is None else v
    return out


def _load_table(args, parser) -> DistanceTable:
    try:
        if args.distance_config:
            return load_distance_config(args.distance_config)
        return load_distance_config(parser=parser)
    except (OSError, ValueError, configparser.Error) as e:
        raise CliError(f"distance config: {e}") from e


def _write(path: Optional[str], text: str, default=None) -> None:
    if path in (None, "-"):
        stream = default if default is not None else sys.stdout
        stream.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


def _align(args, parser, corpus: Corpus, table: DistanceTable, engine: str):
    run = run_engine(engine, corpus.ids, table)
    if args.metrics_out:
        _write(args.metrics_out, run.metrics.to_text())
    if args.trace:
        lines = [f"{r.new} {r.left} {r.right} {r.size!r} {r.refine_iterations}" for r in run.trace]
        _write(args.trace, "new left right size refine_iterations\n" + "\n".join(lines) + "\n")
    return run


# -- commands ----------------------------------------------------------------

def cmd_align(args, parser) -> int:
    opts = _resolve(args, parser, ["engine", "id_column"])
    table = _load_table(args, parser)
    corpus = read_corpus(args.input, opts["id_column"], table=table)
    run = _align(args, parser, corpus, table, opts["engine"])
    _write(args.output, run.tree.dumps(rows=not args.no_rows))
    if not args.metrics_out:
        sys.stderr.write(run.metrics.to_text())
    return 0


def cmd_discover(args, parser) -> int:
    opts = _resolve(args, parser, ["engine", "id_column", "support_min", "confidence_min",
                                   "diversity_min", "inner_support_min"])
    try:
        th = Thresholds(opts["support_min"], opts["confidence_min"], opts["diversity_min"],
                        opts["inner_support_min"])
    except ValueError as e:
        raise CliError(str(e)) from e
    table = _load_table(args, parser)
    corpus = read_corpus(args.input, opts["id_column"], args.attributes, table=table)
    if args.tree:
        try:
            tree = MergeTree.loads(Path(args.tree).read_text(encoding="utf-8"), table)
        except (OSError, ValueError, KeyError) as e:
            raise CliError(f"cannot load tree {args.tree}: {e}") from e
        unknown = {tree.nodes[n].row_id for n in tree.leaves} ^ set(corpus.ids)
        if unknown:
            raise CliError(f"tree leaves and corpus ids differ on {len(unknown)} id(s), e.g. {sorted(unknown)[:3]}")
    else:
        if opts["engine"] == "single":
            raise CliError("the single engine keeps one growing paradigm and is not used for discovery; "
                           "choose baseline, pruning+ or pruning-")
        tree = _align(args, parser, corpus, table, opts["engine"]).tree
    report = discover(tree, corpus.records, th, corpus.attributes,
                      validate_prune=args.validate_prune2,
                      include_null_keys=not args.exclude_null_keys,
                      confidence_scope=args.confidence_scope)
    deps = rank_for_output(report.dependencies)
    _write(args.output, "".join(d.render() + "\n" for d in deps))
    if args.rules_out:
        _write(args.rules_out, "".join(d.to_json() + "\n" for d in deps))
    log.info("%d rules; %d nodes evaluated, %d pruned; %d cells evaluated, %d skipped",
             len(deps), report.nodes_evaluated, report.nodes_pruned, report.cells_evaluated, report.cells_skipped)
    if args.validate_prune2:
        sys.stderr.write(f"prune2_findings={len(report.findings)}\n")
        for nid, col, attr, conf in report.findings:
            sys.stderr.write(f"finding node={nid} column={col} attribute={attr} confidence={conf:.4f}\n")
    return 0


def _gen_config(opts: dict, args) -> GenConfig:
    plant = None
    if args.plant_column is not None:
        if args.plant_map:
            pairs = dict(p.split("=", 1) for p in args.plant_map.split(","))
            plant = Plant(args.plant_column, args.plant_attribute, pairs)
        else:
            plant = digit_plant(args.plant_column, args.plant_attribute)
    try:
        return GenConfig(opts["length"], opts["count"], opts["clusters"], opts["sigma"],
                         opts["delete_prob"], opts["seed"], plant=plant)
    except ValueError as e:
        raise CliError(str(e)) from e


def cmd_gen(args, parser) -> int:
    opts = _resolve(args, parser, ["length", "count", "clusters", "sigma", "delete_prob", "seed"])
    corpus = generate(_gen_config(opts, args))
    _write(args.output, corpus.to_csv(args.id_column or "id"))
    return 0


def cmd_bench(args, parser) -> int:
    from . import bench

    table = _load_table(args, parser)
    scalar = _resolve(args, parser, ["delete_prob", "seed"])
    sweep = {}
    for k in ("length", "count", "clusters", "sigma"):
        vals = getattr(args, k)
        sweep[k] = vals if vals else [_resolve(argparse.Namespace(), parser, [k])[k]]
    base = GenConfig(sweep["length"][0], sweep["count"][0], sweep["clusters"][0], sweep["sigma"][0],
                     scalar["delete_prob"], scalar["seed"])
    try:
        configs = [c for s in range(args.repeats)
                   for c in bench.sweep(_replace_seed(base, scalar["seed"] + s), **sweep)]
    except ValueError as e:
        raise CliError(str(e)) from e
    engines = [e.replace("−", "-") for e in args.engines]
    rows = bench.run_bench(configs, engines, table)
    bench.check_ordering(rows)
    _write(args.output, bench.format_table(rows))
    if args.out_dir:
        from .report import render_figures

        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.csv").write_text(bench.to_csv(rows), encoding="utf-8")
        (out / "bench.jsonl").write_text(bench.to_jsonl(rows), encoding="utf-8")
        for p in render_figures(rows, out):
            log.info("wrote %s", p)
    return 0


def _replace_seed(cfg: GenConfig, seed: int) -> GenConfig:
    return dataclasses.replace(cfg, seed=seed)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="paradep", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    ap.add_argument("--config", help="INI file with [run], [thresholds], [gen], [distance] sections")
    sub = ap.add_subparsers(dest="command", required=True)

    def corpus_flags(p):
        p.add_argument("--input", required=True, help="CSV with a header row")
        p.add_argument("--id-column", help="identifier column (default: first column)")
        p.add_argument("--engine", choices=ENGINE_CHOICES)
        p.add_argument("--distance-config", help="INI file with [distance] and [overrides]")
        p.add_argument("--metrics-out", help="write the key=value run report here")
        p.add_argument("--trace", help="write one line per committed merge here")
        p.add_argument("-o", "--output", help="default: stdout")

    p = sub.add_parser("align", help="build a merge tree over the id column")
    corpus_flags(p)
    p.add_argument("--no-rows", action="store_true", help="omit paradigm rows from the tree dump")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("discover", help="list paradigm dependencies")
    corpus_flags(p)
    p.add_argument("--attributes", nargs="+", help="attribute columns (default: all but the id)")
    p.add_argument("--tree", help="reuse a tree dump from 'align' instead of aligning again")
    p.add_argument("--support-min", type=int)
    p.add_argument("--confidence-min", type=float)
    p.add_argument("--diversity-min", type=int)
    p.add_argument("--inner-support-min", type=int)
    p.add_argument("--validate-prune2", action="store_true",
                   help="evaluate cells the child-pruning rule skips and report any that pass")
    p.add_argument("--confidence-scope", choices=("paradigm", "dataset"), default="paradigm")
    p.add_argument("--exclude-null-keys", action="store_true",
                   help="ignore tuples whose string has a gap in the column")
    p.add_argument("--rules-out", help="write rules as JSON lines here")
    p.set_defaults(func=cmd_discover)

    def gen_flags(p, many: bool):
        kw = {"nargs": "+"} if many else {}
        p.add_argument("--length", type=int, **kw)
        p.add_argument("--count", type=int, **kw)
        p.add_argument("--clusters", type=int, **kw)
        p.add_argument("--sigma", type=float, **kw)
        p.add_argument("--delete-prob", type=float)
        p.add_argument("--seed", type=int)

    p = sub.add_parser("gen", help="write a synthetic corpus as CSV")
    gen_flags(p, many=False)
    p.add_argument("--id-column", default="id")
    p.add_argument("--plant-column", type=int, help="1-based column whose glyph decides the attribute")
    p.add_argument("--plant-attribute", default="A")
    p.add_argument("--plant-map", help="key=value pairs, comma separated (default: digit k -> v<k>)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="compare engines over a parameter sweep")
    gen_flags(p, many=True)
    p.add_argument("--engines", nargs="+", default=["baseline", "pruning+", "pruning-"],
                   choices=ENGINE_CHOICES)
    p.add_argument("--repeats", type=int, default=1, help="seeds per configuration")
    p.add_argument("--distance-config")
    p.add_argument("--out-dir", help="write bench.csv, bench.jsonl and figures here")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        try:
            parser = read_config(args.config)
        except (OSError, configparser.Error) as e:
            raise CliError(f"config {args.config}: {e}") from e
        return args.func(args, parser)
    except CliError as e:
        print(f"paradep: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"paradep: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
