#!/usr/bin/env python3
"""
Command-line interface for structeval.
Wires grammar loading, evaluation, noisy-histogram generation, comparison
and TSTR export behind one argparse entry point.
"""

import argparse
import asyncio
import logging
import secrets
import sys
from typing import List, NoReturn, Optional

from application.services.report_builder import compare
from domain.entities.corpus import (
    AttributeKind,
    AttributeSpec,
    CorpusRole,
    SidecarSource,
    SidecarSourceSpec,
)
from domain.entities.dp import DpParams
from domain.entities.report import EvalReport
from domain.errors import ConfigError, CorpusIOError, GrammarSyntaxError, StructEvalError
from domain.parsers.grammar_loader import load_grammar_file
from infrastructure import di
from infrastructure.adapters.storage.report_repository import (
    load_report,
    save_report,
    write_comparison,
)
from infrastructure.config import EvalConfigFile, load_eval_config, settings

logger = logging.getLogger("structeval")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IO = 2


def _configure_logging(verbosity: int) -> None:
    level = logging.getLevelName(settings.log_level.upper())
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    seed = secrets.randbits(63)
    print(f"seed: {seed}")
    return seed


def _format_value(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.6g}"


def print_summary(report: EvalReport) -> None:
    """One line per metric: name, value, support and the reason for any n/a."""
    header = f"{report.dataset} / {report.method}"
    if report.epsilon is not None:
        header += f" (eps={report.epsilon:g})"
    print(header)
    width = max([len(name) for name in report.metric_names] + [6])
    print(f"{'metric':<{width}}  {'value':>10}  {'support':>7}")
    for result in report.metrics:
        line = f"{result.name:<{width}}  {_format_value(result.value):>10}  {result.support:>7}"
        if not result.applicable:
            line += f"  ({result.metadata.get('reason', 'not applicable')})"
        print(line)


# Subcommands


def cmd_validate_grammar(args: argparse.Namespace) -> int:
    grammar = load_grammar_file(args.path)
    summary = grammar.summary()
    print(f"{summary.rules} rules, {summary.regex_terminals} regex terminals")
    print(
        f"start: {grammar.start_symbol}; auxiliary rules: {summary.auxiliary_rules}; "
        f"literal terminals: {summary.literal_terminals}"
    )
    return EXIT_OK


def _evaluation_config(args: argparse.Namespace) -> EvalConfigFile:
    config = load_eval_config(args.config) if args.config else EvalConfigFile()
    overrides = {
        "grammar": args.grammar,
        "dataset": args.dataset,
        "method": args.method,
        "epsilon": args.epsilon,
    }
    overrides = {key: value for key, value in overrides.items() if value is not None}
    return config.model_copy(update=overrides)


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _evaluation_config(args)
    if config.grammar is None:
        raise ConfigError(["grammar: required (pass --grammar or set it in the config)"])

    grammar = load_grammar_file(config.grammar)
    config.check_node_types(grammar)
    repository = di.get_repository()
    real = repository.load_corpus(args.real, format=args.format, role=CorpusRole.REAL)
    synth = repository.load_corpus(args.synth, format=args.format, role=CorpusRole.SYNTHETIC)

    service = di.get_evaluation_service(config.embedding)
    report = asyncio.run(
        service.evaluate(
            real,
            synth,
            grammar,
            config.to_metric_config(),
            dataset=config.dataset,
            method=config.method,
            epsilon=config.epsilon,
            include_timestamps=config.report.include_timestamps,
        )
    )
    save_report(report, args.out)
    print_summary(report)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    params = DpParams(
        epsilon=args.epsilon,
        seed=seed,
        n_samples=args.n,
        max_derivation_depth=args.max_depth,
        vocab_size=args.vocab_size,
    )
    grammar = load_grammar_file(args.grammar)
    real = di.get_repository().load_corpus(args.real, format=args.format)
    outcomes = di.get_materializer().parse_all(real, grammar)
    trees = [outcome.tree for outcome in outcomes if outcome.parsed]
    logger.info(f"Fitting on {len(trees)}/{len(real)} parsed samples")

    generator = di.get_generator(grammar)
    histograms = generator.fit_histograms(trees, params)
    synthetic = generator.generate(histograms, params)
    di.get_repository().write_corpus(synthetic, args.out)
    print(f"wrote {len(synthetic)} samples to {args.out} (epsilon={params.epsilon:g})")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    reports = [load_report(path) for path in args.reports]
    bounds = load_eval_config(args.config).report.bounds if args.config else None
    comparison = compare(reports, bounds)
    paths = write_comparison(comparison, args.out)
    for row in comparison.rescaled:
        cells = ", ".join(f"{name}={row[name]:.1f}" for name in comparison.metrics)
        print(f"{row['method']}: {cells}")
    print(f"wrote {', '.join(str(path) for path in paths.values())}")
    return EXIT_OK


def cmd_export_tstr(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    repository = di.get_repository()
    corpus = repository.load_corpus(args.corpus, format=args.format)
    spec = AttributeSpec(
        name="label",
        kind=AttributeKind.CATEGORICAL,
        source=SidecarSourceSpec(sidecar=SidecarSource(real=args.labels, key=args.label_key)),
    )
    labels = repository.load_sidecar_labels(args.labels, spec)
    train, test = repository.export_tstr_split(
        corpus, labels, args.test_fraction, seed, args.out
    )
    print(f"wrote {train} and {test}")
    return EXIT_OK


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit 1; exit code 2 is reserved for I/O failures."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="structeval",
        description="Grammar-driven evaluation and generation of structured synthetic text.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for parsing")
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate-grammar", help="load a .cfg grammar and summarize it")
    validate.add_argument("path")
    validate.set_defaults(handler=cmd_validate_grammar)

    evaluate = sub.add_parser("evaluate", help="score a synthetic corpus against a real one")
    evaluate.add_argument("--grammar", help="overrides the config's grammar path")
    evaluate.add_argument("--real", required=True)
    evaluate.add_argument("--synth", required=True)
    evaluate.add_argument("--config")
    evaluate.add_argument("--out", required=True, help="report JSON path")
    evaluate.add_argument("--format", choices=["jsonl", "lines"], default="jsonl")
    evaluate.add_argument("--dataset")
    evaluate.add_argument("--method")
    evaluate.add_argument("--epsilon", type=float)
    evaluate.set_defaults(handler=cmd_evaluate)

    gen = sub.add_parser("gen", help="fit noisy histograms and sample a synthetic corpus")
    gen.add_argument("--grammar", required=True)
    gen.add_argument("--real", required=True)
    gen.add_argument("--epsilon", type=float, required=True)
    gen.add_argument("--n", type=int, default=100)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", choices=["jsonl", "lines"], default="jsonl")
    gen.add_argument("--max-depth", type=int, default=64)
    gen.add_argument("--vocab-size", type=int, default=1024)
    gen.set_defaults(handler=cmd_gen)

    comp = sub.add_parser("compare", help="rescale and tabulate several reports")
    comp.add_argument("reports", nargs="+")
    comp.add_argument("--out", required=True, help="output directory")
    comp.add_argument("--config", help="config whose report.bounds override the defaults")
    comp.set_defaults(handler=cmd_compare)

    export = sub.add_parser("export-tstr", help="write seeded labeled train/test splits")
    export.add_argument("--corpus", required=True)
    export.add_argument("--labels", required=True)
    export.add_argument("--label-key", default="value")
    export.add_argument("--test-fraction", type=float, default=0.2)
    export.add_argument("--seed", type=int)
    export.add_argument("--out", required=True, help="output directory")
    export.add_argument("--format", choices=["jsonl", "lines"], default="jsonl")
    export.set_defaults(handler=cmd_export_tstr)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    di.configure(jobs=args.jobs)

    try:
        return args.handler(args)
    except (CorpusIOError, OSError) as e:
        logger.debug("I/O failure", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as e:
        print("error: invalid configuration", file=sys.stderr)
        for violation in e.violations:
            print(f"  - {violation}", file=sys.stderr)
        return EXIT_ERROR
    except GrammarSyntaxError as e:
        source = getattr(args, "path", None) or getattr(args, "grammar", "")
        print(f"error: {source}: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (StructEvalError, ValueError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
