"""Toy differentially private generator driven by Laplace-noised grammar histograms.

The released statistics are histograms over grammar choice points and regex
terminal fillings of the real corpus. Every sample spreads a total weight of 1
over its observations in a histogram, so adding or removing one sample changes
each histogram by at most 1 in L1 norm. The budget is split evenly across
histograms; generation only post-processes the released histograms.
"""

import logging
import math
from collections import Counter, defaultdict
from fractions import Fraction
from typing import DefaultDict, Dict, List, Optional, Sequence, Tuple

import numpy as np

from domain.entities.corpus import Corpus, CorpusRole, Sample
from domain.entities.dp import (
    Category,
    DpParams,
    HistogramKind,
    HistogramSet,
    NoisyHistogram,
)
from domain.entities.grammar import (
    Grammar,
    SymbolKind,
    SymbolRef,
    TerminalKind,
    compile_pattern,
)
from domain.entities.parse_tree import ParseNode
from domain.errors import DepthExceeded, GenerationError, NoParsedSamples
from domain.parsers.earley import EarleyParser
from domain.ports.tokenizer_port import TokenizerPort

logger = logging.getLogger(__name__)

FILL_ATTEMPTS = 20


def laplace_inverse_cdf(u: float, scale: float) -> float:
    """Quantile function of Laplace(0, scale) at ``u`` in (0, 1)."""
    centered = u - 0.5
    if centered == 0:
        return 0.0
    return -scale * math.copysign(1.0, centered) * math.log(1.0 - 2.0 * abs(centered))


def laplace_noise(scale: float, rng: np.random.Generator) -> float:
    """One Laplace(0, scale) draw by inverse CDF on a uniform draw."""
    if not scale > 0:
        raise ValueError("Laplace scale must be positive")
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return laplace_inverse_cdf(u, scale)


def normalize_counts(counts: Sequence[float]) -> Tuple[float, ...]:
    """Clamp negatives to 0 and normalize; uniform when nothing stays positive."""
    clamped = [max(0.0, float(c)) for c in counts]
    total = sum(clamped)
    if not clamped:
        return ()
    if total <= 0:
        return tuple(1.0 / len(clamped) for _ in clamped)
    return tuple(c / total for c in clamped)


def seed_streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent generators for histogram noise and for sampling."""
    fit_seq, gen_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(fit_seq), np.random.default_rng(gen_seq)


class _Tally:
    """Per-sample normalized contributions to each histogram."""

    def __init__(self):
        self.totals: DefaultDict[Tuple[HistogramKind, str], Counter] = defaultdict(Counter)
        self.sample: DefaultDict[Tuple[HistogramKind, str], Counter] = defaultdict(Counter)

    def observe(self, kind: HistogramKind, symbol: str, category: Category) -> None:
        self.sample[(kind, symbol)][category] += 1

    def close_sample(self) -> None:
        for key, observed in self.sample.items():
            n = sum(observed.values())
            for category, count in observed.items():
                self.totals[key][category] += count / n
        self.sample.clear()


class DpGenerator:
    """Fits noisy histograms on a real corpus and samples grammar derivations from them."""

    def __init__(self, grammar: Grammar, tokenizer: TokenizerPort):
        self.grammar = grammar
        self.tokenizer = tokenizer
        self.parser = EarleyParser(grammar)

    # Fitting

    def _categories(
        self, params: DpParams, vocabularies: Dict[str, List[str]]
    ) -> Dict[Tuple[HistogramKind, str], Tuple[Category, ...]]:
        """Histogram domains; all but the unigram vocabularies are data-independent."""
        domains: Dict[Tuple[HistogramKind, str], Tuple[Category, ...]] = {}
        for rule in self.grammar.rules:
            if rule.auxiliary:
                domains[(HistogramKind.REPEAT, rule.head)] = tuple(range(params.max_repeat + 1))
                branches = len(rule.alternatives) - 1
                if branches > 1:
                    domains[(HistogramKind.ALTERNATIVE, rule.head)] = tuple(range(branches))
            elif len(rule.alternatives) > 1:
                domains[(HistogramKind.ALTERNATIVE, rule.head)] = tuple(
                    range(len(rule.alternatives))
                )
        for terminal in self.grammar.regex_terminals():
            domains[(HistogramKind.LENGTH, terminal.name)] = tuple(
                range(params.max_terminal_tokens + 1)
            )
            domains[(HistogramKind.UNIGRAM, terminal.name)] = tuple(
                vocabularies.get(terminal.name, [])
            )
        return domains

    def _tally(
        self, trees: List[ParseNode], params: DpParams
    ) -> Tuple[_Tally, Dict[str, List[str]]]:
        tally = _Tally()
        regex_names = {t.name for t in self.grammar.regex_terminals()}
        unigram_true: DefaultDict[str, Counter] = defaultdict(Counter)
        for tree in trees:
            for node in tree.walk():
                for expansion in node.repetitions:
                    tally.observe(
                        HistogramKind.REPEAT,
                        expansion.rule,
                        min(expansion.count, params.max_repeat),
                    )
                    if len(self.grammar.rule(expansion.rule).alternatives) > 2:
                        for choice in expansion.choices:
                            tally.observe(HistogramKind.ALTERNATIVE, expansion.rule, choice)
                if not node.terminal and node.alternative is not None:
                    if len(self.grammar.rule(node.node_type).alternatives) > 1:
                        tally.observe(HistogramKind.ALTERNATIVE, node.node_type, node.alternative)
                if node.terminal and node.node_type in regex_names:
                    tokens = self.tokenizer.tokenize(node.text)
                    tally.observe(
                        HistogramKind.LENGTH,
                        node.node_type,
                        min(len(tokens), params.max_terminal_tokens),
                    )
                    for token in tokens:
                        tally.observe(HistogramKind.UNIGRAM, node.node_type, token)
                        unigram_true[node.node_type][token] += 1
            tally.close_sample()

        vocabularies = {
            name: [
                token
                for token, _ in sorted(counts.items(), key=lambda item: (-item[1], item[0]))[
                    : params.vocab_size
                ]
            ]
            for name, counts in unigram_true.items()
        }
        return tally, vocabularies

    def fit_histograms(
        self,
        trees: Sequence[ParseNode],
        params: DpParams,
        rng: Optional[np.random.Generator] = None,
    ) -> HistogramSet:
        """Release one noisy histogram per grammar choice point and regex terminal.

        Args:
            trees: Parse trees of the real corpus's parsed samples
            params: Privacy budget and caps
            rng: Noise generator; defaults to the fitting stream of ``params.seed``

        Returns:
            HistogramSet whose per-histogram budgets sum exactly to ``params.epsilon``

        Raises:
            NoParsedSamples: ``trees`` is empty
        """
        if not trees:
            raise NoParsedSamples()
        if rng is None:
            rng, _ = seed_streams(params.seed)

        tally, vocabularies = self._tally(list(trees), params)
        domains = self._categories(params, vocabularies)
        budget = Fraction(params.epsilon)
        share = budget / len(domains) if domains else budget
        # Sensitivity 1 per histogram.
        scale = params.noise_scale / float(share)

        histograms: Dict[str, NoisyHistogram] = {}
        for (kind, symbol), categories in domains.items():
            counts = tally.totals.get((kind, symbol), Counter())
            noisy = []
            for category in categories:
                value = float(counts.get(category, 0.0))
                if scale > 0:
                    value += laplace_noise(scale, rng)
                noisy.append(value)
            histogram = NoisyHistogram(
                kind=kind,
                symbol=symbol,
                categories=categories,
                weights=normalize_counts(noisy),
                epsilon_share=share,
            )
            histograms[histogram.key] = histogram

        released = HistogramSet(histograms=histograms, epsilon=budget)
        if domains and released.spent != budget:
            raise GenerationError("privacy ledger does not add up to epsilon")
        logger.info(
            f"Released {len(histograms)} histograms at epsilon={params.epsilon} "
            f"(share {float(share):.4g} each, Laplace scale {scale:.4g})"
        )
        return released

    # Generation

    @staticmethod
    def _draw(histogram: Optional[NoisyHistogram], rng: np.random.Generator) -> Optional[Category]:
        if histogram is None or not histogram.categories:
            return None
        index = int(rng.choice(len(histogram.categories), p=np.asarray(histogram.weights)))
        return histogram.categories[index]

    def _fill(self, name: str, histograms: HistogramSet, rng: np.random.Generator) -> str:
        """Filler text for a regex terminal that the terminal matches on its own."""
        terminal = self.grammar.terminal(name)
        pattern = compile_pattern(terminal.pattern, terminal.flags)
        lengths = histograms.get(HistogramKind.LENGTH, name)
        unigrams = histograms.get(HistogramKind.UNIGRAM, name)
        for _ in range(FILL_ATTEMPTS):
            length = self._draw(lengths, rng) or 0
            tokens = [self._draw(unigrams, rng) for _ in range(int(length))]
            text = " ".join(str(token) for token in tokens if token is not None)
            if pattern.fullmatch(text):
                return text
        raise GenerationError(f"no filler matched regex terminal {name}")

    def _expand(
        self,
        symbol: SymbolRef,
        depth: int,
        histograms: HistogramSet,
        params: DpParams,
        rng: np.random.Generator,
        out: List[str],
    ) -> None:
        if depth > params.max_derivation_depth:
            raise DepthExceeded(params.max_derivation_depth)
        if symbol.is_terminal:
            terminal = self.grammar.terminal(symbol.name)
            if terminal.kind is TerminalKind.LITERAL:
                out.append(terminal.pattern)
            else:
                out.append(self._fill(symbol.name, histograms, rng))
            return

        rule = self.grammar.rule(symbol.name)
        if rule.auxiliary:
            count = self._draw(histograms.get(HistogramKind.REPEAT, rule.head), rng) or 0
            branch_hist = histograms.get(HistogramKind.ALTERNATIVE, rule.head)
            for _ in range(int(count)):
                branch = self._draw(branch_hist, rng) or 0
                # Body without the trailing self-reference.
                for part in rule.alternatives[int(branch) + 1][:-1]:
                    self._expand(part, depth + 1, histograms, params, rng, out)
            return

        choice = 0
        if len(rule.alternatives) > 1:
            choice = self._draw(histograms.get(HistogramKind.ALTERNATIVE, rule.head), rng) or 0
        for part in rule.alternatives[int(choice)]:
            self._expand(part, depth + 1, histograms, params, rng, out)

    def generate_one(
        self, histograms: HistogramSet, params: DpParams, rng: np.random.Generator
    ) -> str:
        """Draw derivations until one parses under the grammar."""
        start = SymbolRef(name=self.grammar.start_symbol, kind=SymbolKind.NONTERMINAL)
        last_error: Optional[Exception] = None
        for _ in range(params.max_attempts):
            out: List[str] = []
            try:
                self._expand(start, 0, histograms, params, rng, out)
            except (DepthExceeded, GenerationError) as e:
                last_error = e
                continue
            text = "".join(out)
            if self.parser.parse(text).parsed:
                return text
            logger.debug("Generated sample failed to parse, redrawing")
        if isinstance(last_error, DepthExceeded):
            raise last_error
        raise GenerationError(
            f"no grammar-valid sample after {params.max_attempts} attempts"
        )

    def generate(
        self,
        histograms: HistogramSet,
        params: DpParams,
        rng: Optional[np.random.Generator] = None,
    ) -> Corpus:
        """Sample ``params.n_samples`` grammar-valid texts from released histograms."""
        if rng is None:
            _, rng = seed_streams(params.seed)
        samples = [
            Sample(id=f"gen-{index}", text=self.generate_one(histograms, params, rng))
            for index in range(params.n_samples)
        ]
        logger.info(f"Generated {len(samples)} samples (seed {params.seed})")
        return Corpus(samples=tuple(samples), role=CorpusRole.SYNTHETIC)
