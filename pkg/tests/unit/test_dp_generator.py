from fractions import Fraction

import numpy as np
import pytest

from application.services.corpus_materializer import CorpusMaterializer
from application.services.dp_generator import (
    DpGenerator,
    laplace_inverse_cdf,
    laplace_noise,
    normalize_counts,
    seed_streams,
)
from domain.entities.dp import DpParams, HistogramKind
from domain.errors import NoParsedSamples
from domain.parsers.earley import EarleyParser
from infrastructure.adapters.storage.corpus_repository import FileCorpusRepository
from infrastructure.adapters.tokenizers.whitespace_tokenizer import WhitespaceTokenizer

SMALL = dict(max_repeat=3, max_terminal_tokens=8)


@pytest.fixture(scope="module")
def real_trees(sharegpt_grammar, fixtures_dir):
    corpus = FileCorpusRepository().load_corpus(fixtures_dir / "real.jsonl")
    outcomes = CorpusMaterializer(WhitespaceTokenizer()).parse_all(corpus, sharegpt_grammar)
    return [outcome.tree for outcome in outcomes if outcome.parsed]


@pytest.fixture
def generator(sharegpt_grammar, tokenizer) -> DpGenerator:
    return DpGenerator(sharegpt_grammar, tokenizer)


def test_laplace_quantiles() -> None:
    assert laplace_inverse_cdf(0.5, 2.0) == 0.0
    assert laplace_inverse_cdf(0.75, 1.0) == pytest.approx(np.log(2.0))
    assert laplace_inverse_cdf(0.25, 1.0) == pytest.approx(-np.log(2.0))


def test_laplace_moments() -> None:
    rng = np.random.default_rng(7)
    scale = 1.0
    draws = np.array([laplace_noise(scale, rng) for _ in range(100_000)])
    assert abs(draws.mean()) < 0.02
    assert draws.var() == pytest.approx(2 * scale**2, rel=0.025)


def test_laplace_needs_positive_scale() -> None:
    with pytest.raises(ValueError):
        laplace_noise(0.0, np.random.default_rng(0))


def test_normalize_counts() -> None:
    assert normalize_counts([3.0, -1.0, 1.0]) == (0.75, 0.0, 0.25)
    assert normalize_counts([-2.0, -1.0]) == (0.5, 0.5)
    assert normalize_counts([]) == ()


def test_seed_streams_are_independent_and_reproducible() -> None:
    fit, gen = seed_streams(3)
    fit_again, gen_again = seed_streams(3)
    assert fit.random() == fit_again.random()
    assert gen.random() == gen_again.random()
    fit, gen = seed_streams(3)
    assert fit.random() != gen.random()


def test_params_validation() -> None:
    with pytest.raises(ValueError):
        DpParams(epsilon=0.0)
    with pytest.raises(ValueError):
        DpParams(epsilon=1.0, delta=1e-5)
    with pytest.raises(ValueError):
        DpParams(epsilon=1.0, n_samples=0)


@pytest.mark.parametrize("epsilon", [0.3, 1.0, 2.5])
def test_ledger_sums_exactly_to_epsilon(generator, real_trees, epsilon) -> None:
    released = generator.fit_histograms(real_trees, DpParams(epsilon=epsilon, seed=1, **SMALL))
    assert released.spent == Fraction(epsilon)
    assert released.epsilon == Fraction(epsilon)
    shares = {h.epsilon_share for h in released.histograms.values()}
    assert len(shares) == 1


def test_histogram_domains(generator, real_trees) -> None:
    released = generator.fit_histograms(real_trees, DpParams(epsilon=1.0, **SMALL))
    kinds = sorted(h.kind.value for h in released.histograms.values())
    assert kinds == ["length", "length", "repeat", "unigram", "unigram"]
    (repeat,) = [h for h in released.histograms.values() if h.kind is HistogramKind.REPEAT]
    assert repeat.categories == (0, 1, 2, 3)
    length = released.get(HistogramKind.LENGTH, "query_text")
    assert length.categories == tuple(range(9))


def test_exact_counts_without_noise(generator, real_trees) -> None:
    params = DpParams(epsilon=1.0, noise_scale=0.0, **SMALL)
    released = generator.fit_histograms(real_trees, params)
    (repeat,) = [h for h in released.histograms.values() if h.kind is HistogramKind.REPEAT]
    # Extra rounds per sample: six with none, three with one, one with two.
    assert repeat.weight_of(0) == pytest.approx(0.6)
    assert repeat.weight_of(1) == pytest.approx(0.3)
    assert repeat.weight_of(2) == pytest.approx(0.1)
    assert repeat.weight_of(3) == 0.0


def test_each_sample_has_unit_weight(generator, sharegpt_grammar) -> None:
    short = EarleyParser(sharegpt_grammar).parse("HUMAN: a GPT: b").tree
    long = EarleyParser(sharegpt_grammar).parse("HUMAN: a b c d e f g h GPT: b").tree
    params = DpParams(epsilon=1.0, noise_scale=0.0, vocab_size=20, **SMALL)
    released = generator.fit_histograms([short, long], params)
    unigrams = released.get(HistogramKind.UNIGRAM, "query_text")
    # The long query spreads its unit weight over eight tokens.
    assert unigrams.weight_of("a") == pytest.approx((1 + 1 / 8) / 2)
    assert unigrams.weight_of("h") == pytest.approx((1 / 8) / 2)


def test_vocabulary_is_capped(generator, real_trees) -> None:
    released = generator.fit_histograms(real_trees, DpParams(epsilon=1.0, vocab_size=5, **SMALL))
    assert len(released.get(HistogramKind.UNIGRAM, "response_text").categories) == 5


def test_fit_needs_parsed_samples(generator) -> None:
    with pytest.raises(NoParsedSamples):
        generator.fit_histograms([], DpParams(epsilon=1.0))


@pytest.mark.parametrize("epsilon", [1.0, 2.0, 4.0])
def test_generated_samples_are_grammar_valid(
    generator, sharegpt_grammar, real_trees, epsilon
) -> None:
    params = DpParams(epsilon=epsilon, seed=17, n_samples=100, **SMALL)
    released = generator.fit_histograms(real_trees, params)
    corpus = generator.generate(released, params)
    assert len(corpus) == 100
    parser = EarleyParser(sharegpt_grammar)
    assert all(parser.parse(text).parsed for text in corpus.texts)
    assert all(text.startswith("HUMAN: ") for text in corpus.texts)
    assert corpus.ids[0] == "gen-0"


def test_generation_is_reproducible(sharegpt_grammar, tokenizer, real_trees) -> None:
    params = DpParams(epsilon=1.0, seed=99, n_samples=20, **SMALL)

    def run():
        generator = DpGenerator(sharegpt_grammar, tokenizer)
        return generator.generate(generator.fit_histograms(real_trees, params), params).texts

    assert run() == run()
