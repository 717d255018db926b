"""Profile-set rules, the stopping-lattice DP, enumeration, and wedge merge."""

from __future__ import annotations

import math
import random

import pytest

from wordcodes.errors import InputError, ResourceError, ValidationError
from wordcodes.source_model import profile_of, word_probability
from wordcodes.word_sets import (
    EmptyRule,
    ExplicitProfilesRule,
    ProfileSet,
    ThresholdHighRule,
    ThresholdLowRule,
    build_word_set,
    check_shift_coverage,
    completeness_defect,
    enumerate_words,
    is_prefix_free,
    lattice_metrics,
    sentinel_runs,
    snapped_frac,
    wedge,
)


def test_snapped_frac_pulls_values_just_below_integers_to_zero():
    assert snapped_frac(2.3) == pytest.approx(0.3)
    assert snapped_frac(3.0 - 1e-15) == 0.0
    assert snapped_frac(5.0) == 0.0


def test_threshold_rules_classify_reference_profiles(binary_model):
    low = ThresholdLowRule(binary_model.d, 0.5)
    high = ThresholdHighRule(binary_model.d, 0.5)
    # fractional parts of the linear form: (1,0)->0.32, (0,1)->0.74,
    # (1,1)->0.06, (0,2)->0.47, (2,1)->0.38, (1,2)->0.80, (0,3)->0.21,
    # (3,0)->0.97, (2,0)->0.64
    assert low.member((1, 0)) and not high.member((1, 0))
    assert high.member((0, 1)) and not low.member((0, 1))
    assert low.member((1, 1))
    assert low.member((0, 2))
    assert low.member((2, 1))
    assert high.member((1, 2)) and not low.member((1, 2))
    assert low.member((0, 3))
    assert high.member((3, 0))
    assert high.member((2, 0))
    assert not low.member((0, 0)) and not high.member((0, 0))


def test_explicit_profile_sets_reproduce_reference_word_sets(binary_model):
    first = ProfileSet(2, 3, ExplicitProfilesRule(frozenset({(1, 0)})))
    words = enumerate_words(binary_model, first, limit=100)
    texts = [binary_model.word_to_text(w) for w in words]
    assert texts == ["a", "baa", "bab", "bba", "bbb"]

    second = ProfileSet(2, 3, ExplicitProfilesRule(frozenset({(1, 1)})))
    words = enumerate_words(binary_model, second, limit=100)
    texts = [binary_model.word_to_text(w) for w in words]
    assert sorted(texts) == ["aaa", "aab", "ab", "ba", "bba", "bbb"]


def test_lattice_metrics_agree_with_enumeration(binary_model, ternary_model):
    rng = random.Random(23)
    for model in (binary_model, ternary_model):
        for _ in range(6):
            t = rng.randint(2, 6)
            cap = rng.randint(4, 9)
            rule = rng.choice(
                [
                    ThresholdLowRule(model.d, 2.0 / t),
                    ThresholdHighRule(model.d, 2.0 / t),
                ]
            )
            pset = ProfileSet(model.m, cap, rule)
            ws = build_word_set(model, pset, enumerate=True)
            words = ws.words
            assert words is not None
            assert len(words) == ws.word_count
            assert is_prefix_free(words)
            mass = math.fsum(word_probability(model, w) for w in words)
            assert mass == pytest.approx(ws.total_prob, abs=1e-12)
            assert mass == pytest.approx(1.0, abs=1e-9)
            avg = math.fsum(
                len(w) * word_probability(model, w) for w in words
            )
            assert avg == pytest.approx(ws.avg_length, abs=1e-12)
            assert max(len(w) for w in words) == ws.max_length


def test_cap_alone_stops_every_path(binary_model):
    pset = ProfileSet(2, 5, EmptyRule())
    ws = build_word_set(binary_model, pset, enumerate=True)
    assert ws.word_count == 2**5
    assert all(len(w) == 5 for w in ws.words)
    assert ws.table.cap_mass == pytest.approx(1.0, abs=1e-12)
    assert ws.total_prob == pytest.approx(1.0, abs=1e-12)


def test_member_empty_profile_is_rejected(binary_model):
    pset = ProfileSet(2, 3, ExplicitProfilesRule(frozenset({(0, 0)})))
    with pytest.raises(ValidationError):
        lattice_metrics(binary_model, pset)
    with pytest.raises(ValidationError):
        enumerate_words(binary_model, pset, limit=10)


def test_enumeration_limit_is_enforced(binary_model):
    pset = ProfileSet(2, 12, EmptyRule())
    with pytest.raises(ResourceError):
        build_word_set(binary_model, pset, enum_limit=100, enumerate=True)


def test_node_limit_is_enforced(ternary_model):
    pset = ProfileSet(3, 200, EmptyRule())
    with pytest.raises(ResourceError):
        lattice_metrics(ternary_model, pset, node_limit=1000)


def test_profile_set_validates_construction():
    with pytest.raises(InputError):
        ProfileSet(1, 3, EmptyRule())
    with pytest.raises(InputError):
        ProfileSet(2, 0, EmptyRule())
    pset = ProfileSet(2, 3, EmptyRule())
    with pytest.raises(InputError):
        pset.member((1, 2, 3))


def test_wedge_merges_reference_sets(binary_model):
    m1 = [binary_model.word_from_text(w) for w in
          ["a", "baa", "bab", "bba", "bbb"]]
    m2 = [binary_model.word_from_text(w) for w in
          ["ab", "ba", "bbb", "bba", "aab", "aaa"]]
    merged = wedge(m1, m2)
    assert [binary_model.word_to_text(w) for w in merged] == [
        "a", "ba", "bba", "bbb",
    ]
    assert completeness_defect(binary_model, merged) <= 1e-12


def test_wedge_is_commutative_associative_idempotent(binary_model):
    rng = random.Random(29)

    def random_trie() -> list:
        words = [(1,), (2,)]
        for _ in range(rng.randrange(6)):
            w = words[rng.randrange(len(words))]
            if len(w) >= 6:
                continue
            words.remove(w)
            words.extend([w + (1,), w + (2,)])
        return sorted(words)

    for _ in range(20):
        a, b, c = random_trie(), random_trie(), random_trie()
        assert wedge(a, b) == wedge(b, a)
        assert wedge(a, a) == sorted(set(a))
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
        merged = wedge(a, b)
        assert is_prefix_free(merged)
        assert completeness_defect(binary_model, merged) <= 1e-12


def test_prefix_remainder_mass_never_exceeds_one(binary_model):
    """For a prefix-free set M and any proper prefix A' of its words, the
    words continuing A' inside M themselves form a prefix-free set, so
    their conditional mass is at most 1."""
    m1 = [binary_model.word_from_text(w) for w in
          ["a", "baa", "bab", "bba", "bbb"]]
    prefixes = {w[:cut] for w in m1 for cut in range(1, len(w))}
    for prefix in prefixes:
        mass = math.fsum(
            word_probability(binary_model, w[len(prefix):])
            for w in m1
            if w[: len(prefix)] == prefix and len(w) > len(prefix)
        )
        assert mass <= 1.0 + 1e-12


def test_sentinel_runs_have_unit_mass_and_known_average(binary_model):
    words, tail = sentinel_runs(binary_model, count=1, max_len=60)
    assert is_prefix_free(words)
    # every word is a run of the sentinel 'b' closed by one 'a'
    assert all(set(w[:-1]) <= {2} and w[-1] == 1 for w in words)
    mass = math.fsum(word_probability(binary_model, w) for w in words)
    assert abs(mass - 1.0) <= 1e-6
    assert mass + tail == pytest.approx(1.0, abs=1e-9)
    avg = math.fsum(len(w) * word_probability(binary_model, w) for w in words)
    assert avg == pytest.approx(1.0 / 0.4, abs=1e-4)


def test_sentinel_words_split_uniquely_into_single_run_factors(binary_model):
    rng = random.Random(31)
    for _ in range(100):
        d = rng.randint(1, 5)
        runs = [rng.randint(0, 6) for _ in range(d)]
        word = ()
        for j in runs:
            word += (2,) * j + (1,)
        # profile count of non-sentinel letters recovers D
        assert profile_of(word, 2)[0] == d
        # splitting after each non-sentinel letter recovers the factors
        factors = []
        start = 0
        for i, s in enumerate(word):
            if s == 1:
                factors.append(word[start : i + 1])
                start = i + 1
        assert len(factors) == d
        assert tuple(x for f in factors for x in f) == word
        assert all(f[-1] == 1 and set(f[:-1]) <= {2} for f in factors)


def test_sentinel_runs_validate_arguments(binary_model):
    with pytest.raises(InputError):
        sentinel_runs(binary_model, count=-1, max_len=10)
    with pytest.raises(InputError):
        sentinel_runs(binary_model, count=5, max_len=3)
    words, tail = sentinel_runs(binary_model, count=0, max_len=10)
    assert words == [()]
    assert tail == 0.0


def test_shift_coverage_sampler_accepts_threshold_set(binary_model):
    t = 4
    pset = ProfileSet(2, 10**6, ThresholdLowRule(binary_model.d, 2.0 / t))
    report = check_shift_coverage(binary_model, pset, t, samples=25)
    assert report.ok, report.counterexample
    assert report.checked == 50


def test_shift_coverage_sampler_reports_counterexamples(binary_model):
    pset = ProfileSet(2, 10**6, EmptyRule())
    report = check_shift_coverage(binary_model, pset, 3, samples=5)
    assert not report.ok
    assert report.counterexample is not None
