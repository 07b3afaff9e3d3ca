"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 embedding
service error. Every flag can also come from a ``--config`` file of
``key = value`` lines (keys are flag names without dashes, ``-`` or ``_``);
flags given on the command line win.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from . import __version__
from .buckets import bucket_scores
from .chrf import ChrfConfig, chrfpp, corpus_chrfpp
from .chunking import DEFAULT_WIDTH, FIXED, GROUPED, chunk_fixed, chunk_grouped
from .corpus import ParseError, load_parallel, parse_conllu, parse_plain
from .embeddings import DEFAULT_DIMENSION, BuiltinNgramProvider, ExternalServiceProvider, ProviderError
from .grouping import GroupedSentence, corpus_stats, group_sentence, read_grouped, stats_tsv, write_grouped
from .perturb import LENGTH_FILTERED, ShuffleSpec, filter_corpus, sentence_seed, shuffle, units_of
from .prompt import DEFAULT_MASK, chunk_prompts, ingest_external_scores, load_shots
from .rules import DEFAULT_DELIMITER, default_rules, load_rules
from .similarity import DEFAULT_N_SEEDS, DEFAULT_SETTINGS, similarity_experiment

log = logging.getLogger("wordgroup")

EXIT_USAGE, EXIT_INPUT, EXIT_SERVICE = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    def _get_help_string(self, action):
        if action.default in (None, False) or "default" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


# output helpers


def write_output(path: str, text: str) -> None:
    """Write ``text`` atomically (temp file + rename); ``-`` means stdout."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _require_files(*paths) -> None:
    for p in paths:
        if p and p != "-" and not Path(p).is_file():
            raise FileNotFoundError(f"input file not found: {p}")


def _lang_paths(items: list[str] | None, flag: str) -> dict[str, str]:
    out = {}
    for item in items or []:
        lang, sep, path = item.partition("=")
        if not sep or not lang or not path:
            raise UsageError(f"{flag} expects LANG=FILE, got {item!r}")
        out[lang] = path
    return out


def _pmap(fn, items: list, jobs: int) -> list:
    """Order-preserving map, fanned out over processes when it pays off."""
    if jobs <= 1 or len(items) < 256:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=64))


def _grouped_jsonl(sentences, delimiter: str) -> str:
    buf = io.StringIO()
    write_grouped(sentences, buf, delimiter)
    return buf.getvalue()


def _jsonl(records) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


# subcommands


def _parse_setting(name: str, preserve_groups: bool = False, seed: int = 0) -> ShuffleSpec:
    try:
        return ShuffleSpec.parse(name, preserve_groups, seed)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_group(args) -> int:
    _require_files(args.rules, args.input)
    rules = load_rules(read_input(args.rules), args.delimiter) if args.rules else default_rules(args.delimiter)
    sentences = parse_conllu(read_input(args.input))
    grouped = _pmap(partial(group_sentence, rules=rules), sentences, args.jobs)
    write_output(args.out, _grouped_jsonl(grouped, args.delimiter))
    if args.stats:
        write_output(args.stats, stats_tsv(corpus_stats({args.language: grouped})))
    log.info("grouped %d sentences", len(grouped))
    return 0


def _shuffle_one(g: GroupedSentence, spec: ShuffleSpec, delimiter: str) -> dict:
    units = units_of(g, spec.preserve_groups, delimiter)
    result = shuffle(units, spec.replace(seed=sentence_seed(spec.seed, g.id)))
    d = {"id": g.id, **result.to_dict()}
    d["spec"]["seed"] = spec.seed
    d["spec"]["sentence_seed"] = result.spec.seed
    return d


def cmd_shuffle(args) -> int:
    _require_files(args.input)
    spec = _parse_setting(args.setting, args.preserve_groups, args.seed)
    grouped = read_grouped(read_input(args.input).splitlines())
    if spec.setting == LENGTH_FILTERED:
        grouped = filter_corpus(grouped, spec.size)
        log.info("%d sentences under %d words", len(grouped), spec.size)
    records = _pmap(partial(_shuffle_one, spec=spec, delimiter=args.delimiter), grouped, args.jobs)
    write_output(args.out, _jsonl(records))
    return 0


def cmd_simeval(args) -> int:
    paths = _lang_paths(args.parallel, "--parallel")
    _require_files(args.grouped, *paths.values())
    if args.source_lang not in paths:
        raise UsageError(f"--parallel must include the source language {args.source_lang!r}")
    corpus = load_parallel(paths)
    grouped = read_grouped(read_input(args.grouped).splitlines())
    if args.provider == "builtin":
        provider = BuiltinNgramProvider(args.dim or DEFAULT_DIMENSION)
    else:
        provider = ExternalServiceProvider.from_env(
            args.endpoint, args.dim,
            max_in_flight=args.max_in_flight, retries=args.retries,
        )
    seeds = [args.seed + k for k in range(args.n_seeds)]
    settings = [_parse_setting(s) for s in args.settings.split(",") if s.strip()]
    if not settings:
        raise UsageError("--settings is empty")
    partial_path = args.partial or (args.out + ".partial" if args.out != "-" else "simeval.partial.tsv")
    table = similarity_experiment(corpus, grouped, settings, provider, seeds, args.source_lang, partial_path)
    write_output(args.out, table.to_tsv())
    return 0


def cmd_chunk(args) -> int:
    _require_files(args.input)
    grouped = read_grouped(read_input(args.input).splitlines())
    records = []
    for g in grouped:
        plan = chunk_fixed(g.words, args.width) if args.mode == FIXED else chunk_grouped(g, args.width)
        records.append({"id": g.id, **plan.to_dict()})
    write_output(args.out, _jsonl(records))
    return 0


def cmd_prompt(args) -> int:
    _require_files(args.shots, args.test)
    shots = load_shots(read_input(args.shots).splitlines())
    out_dir = Path(args.out)
    count = 0
    for lineno, line in enumerate(read_input(args.test).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            chunks = rec.get("src_chunks", rec.get("chunks"))
            if not isinstance(chunks, list) or not chunks:
                raise KeyError("src_chunks")
        except (json.JSONDecodeError, KeyError, AttributeError) as e:
            raise ParseError(f"bad test record: {e}", lineno, args.test) from None
        sid = str(rec.get("id", lineno))
        prompts = chunk_prompts(shots, chunks, args.src_lang, args.tgt_lang, args.mask, rec.get("done", ()))
        for k, text in enumerate(prompts, start=1):
            write_output(str(out_dir / f"{sid}_{k:03d}.txt"), text)
            count += 1
    log.info("wrote %d prompts to %s", count, out_dir)
    return 0


def cmd_stats(args) -> int:
    plain = _lang_paths(args.plain, "--plain")
    grouped = _lang_paths(args.grouped, "--grouped")
    if not plain and not grouped:
        raise UsageError("give at least one --plain or --grouped corpus")
    _require_files(*plain.values(), *grouped.values())
    corpora = {}
    for lang, path in plain.items():
        corpora[lang] = parse_plain(read_input(path))
    for lang, path in grouped.items():
        key = lang if lang not in corpora else f"{lang} (grouped)"
        corpora[key] = read_grouped(read_input(path).splitlines())
    write_output(args.out, stats_tsv(corpus_stats(corpora)))
    return 0


def cmd_chrf(args) -> int:
    _require_files(args.hyp, args.ref)
    cfg = ChrfConfig(args.nc, args.nw, args.beta)
    hyps = read_input(args.hyp).split("\n")
    refs = read_input(args.ref).split("\n")
    for lines in (hyps, refs):
        if lines and lines[-1] == "":
            lines.pop()
    if len(hyps) != len(refs):
        raise ParseError(f"{len(hyps)} hypothesis lines vs {len(refs)} reference lines")
    name = f"chrF{args.beta:g}" + "+" * args.nw
    if args.sentence_level:
        text = "".join(f"{i}\t{name}\t{chrfpp(h, r, cfg):.4f}\n" for i, (h, r) in enumerate(zip(hyps, refs), start=1))
    else:
        text = f"{name}\t{corpus_chrfpp(hyps, refs, cfg):.2f}\t{cfg.signature}\n"
    write_output(args.out, text)
    return 0


def cmd_buckets(args) -> int:
    _require_files(args.scores, args.source)
    scores = ingest_external_scores(args.scores)
    if args.metric:
        scores = [s for s in scores if s.metric == args.metric]
    lengths = {s.id: len(s.words) for s in parse_plain(read_input(args.source))}
    pairs = []
    for s in scores:
        if s.id not in lengths:
            raise ParseError(f"score id {s.id!r} has no source sentence", None, args.scores)
        pairs.append((lengths[s.id], s.score))
    write_output(args.out, bucket_scores(pairs, args.min_instances).to_tsv())
    return 0


# parser


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="key = value file supplying defaults for any flag")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="parallel workers for per-sentence work (default: %(default)s)")
    common.add_argument("--log-level", default="WARNING", help="stderr log level (default: %(default)s)")

    p = _Parser(prog="wordgroup", description="Word grouping for dependency-annotated Hindi and its evaluation tools.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    fmt = _HelpFormatter

    g = sub.add_parser("group", parents=[common], formatter_class=fmt, help="group CoNLL-U sentences into word groups")
    g.add_argument("--rules", help="rules file (default: shipped Hindi rules)")
    g.add_argument("--delimiter", default=DEFAULT_DELIMITER, help="joins words inside a rendered group")
    g.add_argument("--in", dest="input", required=True, help="CoNLL-U input ('-' for stdin)")
    g.add_argument("--out", default="-", help="grouped JSONL output")
    g.add_argument("--stats", help="also write a word/group count TSV here")
    g.add_argument("--language", default="hin", help="language label for --stats")
    g.set_defaults(func=cmd_group)

    s = sub.add_parser("shuffle", parents=[common], formatter_class=fmt, help="shuffle grouped sentences")
    s.add_argument("--setting", default="full", help="full, wN (window of N units) or filteredN (sentences under N words)")
    s.add_argument("--preserve-groups", action="store_true", help="shuffle whole groups instead of words")
    s.add_argument("--seed", type=int, default=0, help="base seed (mixed with each sentence id)")
    s.add_argument("--delimiter", default=DEFAULT_DELIMITER, help="joins words inside a group unit")
    s.add_argument("--in", dest="input", required=True, help="grouped JSONL")
    s.add_argument("--out", default="-", help="shuffled JSONL output")
    s.set_defaults(func=cmd_shuffle)

    e = sub.add_parser("simeval", parents=[common], formatter_class=fmt, help="shuffled-sentence similarity table")
    e.add_argument("--grouped", required=True, help="grouped JSONL of the source-language column")
    e.add_argument("--parallel", action="append", metavar="LANG=FILE", help="parallel text file, repeatable")
    e.add_argument("--source-lang", default="hin", help="language of the shuffled sentences")
    e.add_argument("--settings", default=",".join(DEFAULT_SETTINGS), help="comma-separated shuffle settings")
    e.add_argument("--n-seeds", type=int, default=DEFAULT_N_SEEDS, help="shuffles per sentence")
    e.add_argument("--seed", type=int, default=0, help="first seed; seeds are seed..seed+n-1")
    e.add_argument("--provider", choices=["builtin", "external"], default="builtin", help="embedding provider")
    e.add_argument("--endpoint", help="embedding service URL (or $LWG_EMBED_ENDPOINT)")
    e.add_argument("--dim", type=int,
                   help=f"embedding dimension (default: {DEFAULT_DIMENSION} for builtin, $LWG_EMBED_DIM for external)")
    e.add_argument("--max-in-flight", type=int, default=4, help="concurrent requests to the embedding service")
    e.add_argument("--retries", type=int, default=3, help="retries per failed embedding request")
    e.add_argument("--out", default="-", help="similarity TSV")
    e.add_argument("--partial", help="where completed cells go if the provider fails (default: OUT.partial)")
    e.set_defaults(func=cmd_simeval)

    c = sub.add_parser("chunk", parents=[common], formatter_class=fmt, help="split grouped sentences into chunks")
    c.add_argument("--mode", choices=[FIXED, GROUPED], default=FIXED, help="fixed word chunks or whole-group packing")
    c.add_argument("--width", type=int, default=DEFAULT_WIDTH, help="chunk width in words")
    c.add_argument("--in", dest="input", required=True, help="grouped JSONL")
    c.add_argument("--out", default="-", help="chunk JSONL output")
    c.set_defaults(func=cmd_chunk)

    q = sub.add_parser("prompt", parents=[common], formatter_class=fmt, help="render few-shot chunk translation prompts")
    q.add_argument("--shots", required=True, help='JSONL of {"src_chunks": [...], "tgt_chunks": [...]}')
    q.add_argument("--test", required=True, help='JSONL of {"id": ..., "src_chunks": [...]} (chunk output also works)')
    q.add_argument("--src-lang", default="Hindi", help="source language display name")
    q.add_argument("--tgt-lang", required=True, help="target language display name")
    q.add_argument("--mask", default=DEFAULT_MASK, help="placeholder for the chunk to translate")
    q.add_argument("--out", required=True, help="directory for one prompt file per test chunk")
    q.set_defaults(func=cmd_prompt)

    t = sub.add_parser("stats", parents=[common], formatter_class=fmt, help="word and group counts per language")
    t.add_argument("--plain", action="append", metavar="LANG=FILE", help="plain text corpus, repeatable")
    t.add_argument("--grouped", action="append", metavar="LANG=FILE", help="grouped JSONL corpus, repeatable")
    t.add_argument("--out", default="-", help="TSV output")
    t.set_defaults(func=cmd_stats)

    r = sub.add_parser("chrf", parents=[common], formatter_class=fmt, help="chrF++ between hypothesis and reference files")
    r.add_argument("--hyp", required=True, help="hypotheses, one per line")
    r.add_argument("--ref", required=True, help="references, one per line")
    r.add_argument("--nc", type=int, default=6, help="character n-gram order")
    r.add_argument("--nw", type=int, default=2, help="word n-gram order")
    r.add_argument("--beta", type=float, default=2.0, help="recall weight")
    r.add_argument("--sentence-level", action="store_true", help="emit id<TAB>metric<TAB>score per line")
    r.add_argument("--out", default="-", help="output file")
    r.set_defaults(func=cmd_chrf)

    b = sub.add_parser("buckets", parents=[common], formatter_class=fmt, help="length-bucketed mean scores")
    b.add_argument("--scores", "--external-scores", dest="scores", required=True, help="id<TAB>metric<TAB>score TSV")
    b.add_argument("--source", required=True, help="source text; ids are 1-based line numbers")
    b.add_argument("--metric", help="only use rows with this metric name")
    b.add_argument("--min-instances", type=int, default=20, help="smaller buckets merge into a neighbour")
    b.add_argument("--out", default="-", help="bucket TSV output")
    b.set_defaults(func=cmd_buckets)

    p._subparsers_by_name = sub.choices  # type: ignore[attr-defined]
    return p


def read_config(path: str) -> dict[str, str]:
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError("expected key = value", lineno, path)
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        cfg[key.strip().lstrip("-").replace("-", "_")] = value
    return cfg


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("command", nargs="?")
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in parser._subparsers_by_name:
        return
    sub = parser._subparsers_by_name[known.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in read_config(known.config).items():
        dest = "input" if key == "in" else key
        action = actions.get(dest)
        if action is None:
            raise UsageError(f"config key {key!r} is not a flag of {known.command!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(action, argparse._AppendAction):
            defaults[dest] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            defaults[dest] = action.type(value) if action.type else value
        action.required = False
    sub.set_defaults(**defaults)


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            _apply_config(parser, argv)
        except (OSError, ParseError) as e:
            print(f"wordgroup: config error: {e}", file=sys.stderr)
            return EXIT_INPUT
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ProviderError as e:
        print(f"embedding service error: {e}", file=sys.stderr)
        return EXIT_SERVICE
    except (ParseError, ValueError, TypeError, KeyError, OSError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
