"""Command-line interface.

Exit codes are a stable contract across commands: 0 accept, 1 reject,
2 error.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

from .categorial import derive, load_lexicon, parse_type, render_derivation
from .cfgref import crosscheck_store
from .chains import (
    Chain,
    ChainParseError,
    ChainStore,
    Token,
    consolidate,
    format_chain,
    load_store,
    tokenize_sentence,
)
from .complexes import SearchConfig, dangling_token, solve_positions
from .containers import load_pipeline, run_pipeline
from .engine import recognize
from .geometry import StyleMap, embed, export_dot, export_json, export_xyz, load_style

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaingram",
        description="Recognize sentences by bonding token chains into closed complexes.")
    sub = parser.add_subparsers(dest="command", required=True)

    rec = sub.add_parser(
        "recognize",
        help="match a sentence against a chain store",
        description="Exit 0 when the sentence completes a complex, 1 when it "
                    "does not, 2 on errors. Default bounds: 3 copies per chain "
                    "and 8 instances, raised to 9 when the store holds more "
                    "than 7 chains.")
    rec.add_argument("--store", required=True, help="chain-store file")
    rec.add_argument("--sentence", help="sentence to recognize")
    rec.add_argument("--stdin", action="store_true",
                     help="read one sentence per line from stdin; print one verdict per line")
    rec.add_argument("--all", action="store_true", help="list every witness within bounds")
    rec.add_argument("--max-instances", type=int, default=None, metavar="N")
    rec.add_argument("--max-copies", type=int, default=3, metavar="K")
    rec.add_argument("--no-span", action="store_true",
                     help="drop the sentence-span bound on bonded tokens")
    rec.add_argument("--no-conclusion-interval", action="store_true",
                     help="drop the own-body-span bound on bonded conclusions")
    rec.add_argument("--learn", action="store_true",
                     help="append the sentence under its unique conclusion to the store file")
    rec.add_argument("--emit", choices=("json", "dot", "xyz"),
                     help="write the first witness in the chosen format")
    rec.add_argument("--out", metavar="PATH", help="output file for --emit (default stdout)")
    rec.add_argument("--style", metavar="PATH", help="style file for xyz export")
    rec.add_argument("--split-bonds", action="store_true",
                     help="render bonded pairs as two atoms 0.3 apart in xyz export")
    rec.set_defaults(func=_cmd_recognize)

    der = sub.add_parser(
        "derive",
        help="search slash-type derivations for a sentence",
        description="Exit 0 when at least one derivation assigns the target type.")
    der.add_argument("--types", required=True, help="type-lexicon file")
    der.add_argument("--sentence", required=True)
    der.add_argument("--target", default="S", help="target type (default S)")
    der.add_argument("--max-type-atoms", type=int, default=7, metavar="N")
    der.add_argument("--max-unary", type=int, default=2, metavar="N")
    der.add_argument("--all", action="store_true", help="print every derivation")
    der.set_defaults(func=_cmd_derive)

    pipe = sub.add_parser(
        "pipeline",
        help="run a container pipeline over a sentence",
        description="Exit 0 when the final stream is a single trigger token "
                    "of the last container.")
    pipe.add_argument("--config", required=True, help="pipeline INI file")
    pipe.add_argument("--sentence", required=True)
    pipe.add_argument("--trace", action="store_true", help="print each replacement")
    pipe.set_defaults(func=_cmd_pipeline)

    cross = sub.add_parser(
        "crosscheck",
        help="differential check of the grammar reference against the engine",
        description="Enumerates sentences over the store's vocabulary. "
                    "Grammar-accepted sentences the engine rejects are "
                    "violations (exit 1); engine-only accepts are reported "
                    "as analogy findings.")
    cross.add_argument("--store", required=True, help="pure chain-store file")
    cross.add_argument("--max-len", type=int, default=4, metavar="L")
    cross.add_argument("--report", metavar="PATH", help="write per-sentence report")
    cross.set_defaults(func=_cmd_crosscheck)
    return parser


def _search_config(args, mode: str) -> SearchConfig:
    return SearchConfig(
        max_instances=args.max_instances,
        max_copies_per_chain=args.max_copies,
        enforce_span=not args.no_span,
        enforce_conclusion_interval=not args.no_conclusion_interval,
        mode=mode)


def _cmd_recognize(args) -> int:
    store_path = Path(args.store)
    store = load_store(store_path.read_text(encoding="utf-8"))

    if args.stdin:
        if args.sentence is not None:
            print("--stdin and --sentence are mutually exclusive", file=sys.stderr)
            return EXIT_ERROR
        cfg = _search_config(args, "first")
        all_ok = True
        for line in sys.stdin:
            if not line.strip():
                continue
            result = recognize(tokenize_sentence(line), store, cfg)
            if result.accepted:
                labels = sorted(tok.label for tok in result.conclusions)
                print(" ".join(labels))
            else:
                print("-")
                all_ok = False
        return EXIT_ACCEPT if all_ok else EXIT_REJECT

    if args.sentence is None:
        print("one of --sentence or --stdin is required", file=sys.stderr)
        return EXIT_ERROR

    fresh = tokenize_sentence(args.sentence)
    mode = "all" if (args.all or args.learn) else "first"
    result = recognize(fresh, store, _search_config(args, mode))
    if not result.accepted:
        print("no complex found", file=sys.stderr)
        return EXIT_REJECT

    labels = sorted({tok.label for tok in result.conclusions})
    print(" ".join(labels))
    shown = result.witnesses if args.all else result.witnesses[:1]
    for k, (x, _pa) in enumerate(shown, start=1):
        chain_ids = Counter(inst.source for inst in x.instances if not inst.is_fresh)
        summary = ", ".join(f"{cid} x{n}" if n > 1 else cid
                            for cid, n in sorted(chain_ids.items()))
        print(f"witness {k}: {sum(chain_ids.values())} store instances + fresh; "
              f"{len(x.bonds)} bonds; chains: {summary}")

    if args.learn:
        if len(labels) > 1:
            print(f"cannot learn: ambiguous conclusion ({', '.join(labels)})",
                  file=sys.stderr)
            return EXIT_ERROR
        label = Token.category(labels[0])
        grown = consolidate(store, fresh, label)
        if len(grown) > len(store):
            new_chain = grown.chains[-1]
            text = store_path.read_text(encoding="utf-8")
            prefix = "" if (not text or text.endswith("\n")) else "\n"
            with open(store_path, "a", encoding="utf-8") as handle:
                handle.write(f"{prefix}{format_chain(new_chain)}\n")
            print(f"learned: {format_chain(new_chain)}")

    if args.emit:
        x, pa = result.witnesses[0]
        if args.emit == "json":
            payload = export_json(x, None, pa)
        elif args.emit == "dot":
            payload = export_dot(x)
        else:
            style = StyleMap()
            if args.style:
                style = load_style(Path(args.style).read_text(encoding="utf-8"))
            layout = embed(x, pa, seed=0)
            payload = export_xyz(layout, x, style, split_bonds=args.split_bonds)
        if args.out:
            Path(args.out).write_text(payload, encoding="utf-8")
        else:
            sys.stdout.write(payload)
    return EXIT_ACCEPT


def _cmd_derive(args) -> int:
    lexicon = load_lexicon(Path(args.types).read_text(encoding="utf-8"))
    words = args.sentence.split()
    if not words:
        print("empty sentence", file=sys.stderr)
        return EXIT_ERROR
    target = parse_type(args.target)
    derivations = derive(lexicon, words, target,
                         max_type_atoms=args.max_type_atoms,
                         max_unary_chain=args.max_unary)
    count = len(derivations)
    print(f"{count} derivation{'s' if count != 1 else ''}")
    for d in (derivations if args.all else derivations[:1]):
        sys.stdout.write(render_derivation(d))
        print()
    return EXIT_ACCEPT if derivations else EXIT_REJECT


def _cmd_pipeline(args) -> int:
    pipeline = load_pipeline(args.config)
    result = run_pipeline(pipeline, args.sentence)
    if args.trace:
        for name, (i, j), tok in result.trace:
            print(f"{name} [{i},{j}] {tok.label}")
    print("final: " + " ".join(tok.notation() for tok in result.final_stream))
    return EXIT_ACCEPT if result.accepted else EXIT_REJECT


def _cmd_crosscheck(args) -> int:
    store = load_store(Path(args.store).read_text(encoding="utf-8"))
    report = crosscheck_store(store, args.max_len)
    if args.report:
        Path(args.report).write_text(report.render(), encoding="utf-8")
    else:
        sys.stdout.write(report.render())
    accepted_both = sum(1 for _s, c, x in report.lines if c and x)
    print(f"checked {report.checked} sentences: {accepted_both} accepted by both, "
          f"{len(report.violations)} violations, "
          f"{len(report.analogy_accepts)} analogy-only accepts", file=sys.stderr)
    for line in report.violations:
        print(f"violation: {line}", file=sys.stderr)
    return EXIT_REJECT if report.violations else EXIT_ACCEPT


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ChainParseError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
