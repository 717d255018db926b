"""Memoryless source model and basic word/profile arithmetic.

A source emits symbols 1..m independently with fixed probabilities.  Words are
tuples of symbol indices; the profile of a word counts how often each symbol
occurs, so all words sharing a profile have the same probability.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError

# A word is a tuple of 1-based symbol indices; a profile is a tuple of counts.
Word = tuple[int, ...]
Profile = tuple[int, ...]

PROB_SUM_TOL = 1e-12

# Glyphs used for default symbol labels and for output digits (arity <= 36).
DIGIT_GLYPHS = string.digits + string.ascii_uppercase
DEFAULT_LABELS = string.ascii_lowercase


def _parse_prob(text: str) -> tuple[float, str]:
    """Parse one probability given as a decimal string or a ratio like '2/5'."""
    s = text.strip()
    try:
        value = float(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse probability {text!r}") from exc
    return value, s


@dataclass(frozen=True)
class SourceModel:
    """An i.i.d. source over m symbols together with an output arity n.

    `probs` are stored as binary64 floats; the original spellings are kept in
    `prob_labels` so files written from this model round-trip byte for byte.
    `d[i]` is -log_n(p[i]), the output-digit cost of symbol i+1; it is the
    coefficient vector of the linear form used throughout the constructions.
    """

    probs: tuple[float, ...]
    arity: int
    labels: tuple[str, ...] = ()
    prob_labels: tuple[str, ...] = ()
    d: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.arity < 2:
            raise InputError(f"arity must be >= 2, got {self.arity}")
        if self.arity > len(DIGIT_GLYPHS):
            raise InputError(f"arity must be <= {len(DIGIT_GLYPHS)}, got {self.arity}")
        if len(self.probs) < 2:
            raise InputError("a source needs at least 2 symbols")
        for p in self.probs:
            if not (0.0 < p < 1.0):
                raise InputError(f"probabilities must lie in (0, 1), got {p}")
        if abs(math.fsum(self.probs) - 1.0) > PROB_SUM_TOL:
            raise InputError(f"probabilities sum to {math.fsum(self.probs)!r}, not 1")
        if not self.labels:
            if len(self.probs) > len(DEFAULT_LABELS):
                raise InputError("provide labels explicitly for more than 26 symbols")
            object.__setattr__(
                self, "labels", tuple(DEFAULT_LABELS[: len(self.probs)])
            )
        if len(self.labels) != len(self.probs):
            raise InputError("labels and probs must have the same length")
        if len(set(self.labels)) != len(self.labels):
            raise InputError("symbol labels must be distinct")
        if not self.prob_labels:
            object.__setattr__(
                self, "prob_labels", tuple(repr(p) for p in self.probs)
            )
        ln = math.log(self.arity)
        object.__setattr__(
            self, "d", tuple(-math.log(p) / ln for p in self.probs)
        )

    @property
    def m(self) -> int:
        return len(self.probs)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label) + 1
        except ValueError:
            raise InputError(f"unknown symbol {label!r}") from None

    def word_from_text(self, text: str) -> Word:
        return tuple(self.index_of(ch) for ch in text)

    def word_to_text(self, word: Word) -> str:
        return "".join(self.labels[i - 1] for i in word)


def make_model(probs, arity: int, labels=None) -> SourceModel:
    """Build a SourceModel from floats, Fractions, or decimal/ratio strings."""
    values: list[float] = []
    spellings: list[str] = []
    for p in probs:
        if isinstance(p, str):
            v, s = _parse_prob(p)
        elif isinstance(p, Fraction):
            v, s = float(p), str(p)
        else:
            v, s = float(p), repr(float(p))
        values.append(v)
        spellings.append(s)
    return SourceModel(
        probs=tuple(values),
        arity=arity,
        labels=tuple(labels) if labels else (),
        prob_labels=tuple(spellings),
    )


def entropy(model: SourceModel) -> float:
    """Source entropy in bits per symbol."""
    return -math.fsum(p * math.log2(p) for p in model.probs)


def word_probability(model: SourceModel, word: Word) -> float:
    """Probability of a word under the i.i.d. source; the empty word has p=1."""
    p = 1.0
    for i in word:
        p *= model.probs[i - 1]
    return p


def profile_of(word: Word, m: int) -> Profile:
    """Count occurrences of each symbol 1..m in `word`."""
    counts = [0] * m
    for i in word:
        if not 1 <= i <= m:
            raise InputError(f"symbol index {i} out of range 1..{m}")
        counts[i - 1] += 1
    return tuple(counts)


def profile_probability(model: SourceModel, profile: Profile) -> float:
    """Probability of any single word having the given profile."""
    p = 1.0
    for count, pi in zip(profile, model.probs):
        p *= pi**count
    return p


def linear_form(model: SourceModel, profile: Profile) -> float:
    """Sum of profile counts weighted by d[i] = -log_n p_i.

    Equals -log_n of the probability of any word with this profile, so the
    fractional part of this value decides threshold-set membership.
    """
    if len(profile) != model.m:
        raise InputError(
            f"profile has {len(profile)} coordinates, model has {model.m} symbols"
        )
    return math.fsum(k * di for k, di in zip(profile, model.d))


def non_terminal_count(profile: Profile) -> int:
    """Total count of all symbols except the last one."""
    return sum(profile[:-1])
