"""Variable-to-variable code construction.

The construction builds two stopping sets on the profile lattice: a "low" set
of profiles whose linear form sits just above an integer and a "high" set
sitting just below one.  Words stopped by the low set get codeword length
floor(-log_n p), words stopped by the high set get one digit more; both have
per-word redundancy bounded by the threshold width.  The low set alone
usually violates the Kraft inequality, so its word set is merged with the
high set's words, added in decreasing probability order, until the Kraft sum
first drops to 1 or below.

Small word sets are handled explicitly, word by word.  Large ones never get
enumerated: all accounting runs on the profile lattice with exact big-integer
word counts per profile, and the merge adds whole profile classes at a time,
splitting only the class where the Kraft sum crosses 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from . import analysis
from .codebook import CodeBook, CodeEntry, format_digits, validate_codebook
from .diophantine import (
    best_approx_denominators,
    denominator_of_rational_form,
)
from .errors import InfeasibleError, InputError, ResourceError, ValidationError
from .source_model import (
    Profile,
    SourceModel,
    Word,
    linear_form,
    profile_of,
    profile_probability,
    word_probability,
)
from .word_sets import (
    DEFAULT_ENUM_LIMIT,
    DEFAULT_NODE_LIMIT,
    THRESHOLD_TOL,
    ProfileSet,
    ThresholdHighRule,
    ThresholdLowRule,
    UnionRule,
    completeness_defect,
    is_prefix_free,
    lattice_metrics,
    wedge,
)

DEFAULT_T_MAX = 50


def floor_form(x: float, tol: float = THRESHOLD_TOL) -> int:
    """Integer part of a linear-form value, snapping near-integers upward."""
    fl = math.floor(x)
    if x - fl >= 1.0 - tol:
        fl += 1
    return int(fl)


def code_length_for(form: float, in_second: bool) -> int:
    """Codeword length for a word with the given linear-form value.

    floor(-log_n p) for words of the low set, one more for words of the high
    set; clamped to 1 because an empty codeword is never assignable.
    """
    length = floor_form(form) + (1 if in_second else 0)
    return max(1, length)


def kraft_sum(lengths: Sequence[int], arity: int) -> Fraction:
    """Exact Kraft sum of codeword lengths."""
    return sum(
        (Fraction(1, arity**length) for length in lengths), start=Fraction(0)
    )


def build_threshold_sets(
    model: SourceModel, T: int, cap: int, theta: float | None = None
) -> tuple[ProfileSet, ProfileSet]:
    """Low and high stopping sets with threshold 2/T (or an explicit theta).

    Both are unioned with the hard cap at `cap`, so the induced word sets are
    complete regardless of how sparse the threshold hits are.
    """
    if T < 1:
        raise InputError(f"T must be >= 1, got {T}")
    if cap < 1:
        raise InputError(f"cap must be >= 1, got {cap}")
    width = 2.0 / T if theta is None else theta
    low = ProfileSet(model.m, cap, ThresholdLowRule(model.d, width))
    high = ProfileSet(model.m, cap, ThresholdHighRule(model.d, width))
    return low, high


def huffman_lengths(probs: Sequence[float], arity: int) -> list[int]:
    """Codeword lengths of an optimal prefix code over `arity` digits.

    Pads with zero-weight dummies so every merge takes exactly `arity` nodes.
    Ties break on lowest weight first, then earliest creation, which makes
    the result independent of hash ordering.
    """
    import heapq

    k = len(probs)
    if k == 0:
        raise InputError("cannot build a code for zero words")
    if k == 1:
        return [1]
    dummies = (arity - 1 - (k - 1) % (arity - 1)) % (arity - 1)
    heap: list[tuple[float, int]] = [(p, i) for i, p in enumerate(probs)]
    heap += [(0.0, k + j) for j in range(dummies)]
    heapq.heapify(heap)
    children: dict[int, list[int]] = {}
    next_id = k + dummies
    while len(heap) > 1:
        group = [heapq.heappop(heap) for _ in range(arity)]
        children[next_id] = [node for _, node in group]
        heapq.heappush(heap, (math.fsum(w for w, _ in group), next_id))
        next_id += 1
    root = heap[0][1]
    depth = [0] * k
    stack = [(root, 0)]
    while stack:
        node, d = stack.pop()
        if node < k:
            depth[node] = d
        elif node in children:
            stack.extend((c, d + 1) for c in children[node])
    return depth


def canonical_codewords(lengths: Sequence[int], arity: int) -> list[str]:
    """Numerically increasing codewords for non-decreasing lengths.

    The classic canonical allocation: each codeword is the previous one plus
    one, left-shifted to the next length.  Raises when the lengths violate
    the Kraft inequality and the digits run out.
    """
    out: list[str] = []
    code = 0
    prev = 0
    for length in lengths:
        if length < prev:
            raise InputError("lengths must be sorted in non-decreasing order")
        code *= arity ** (length - prev)
        if code >= arity**length:
            raise InfeasibleError(
                "codeword space exhausted; lengths violate the Kraft inequality"
            )
        out.append(format_digits(code, arity, length))
        code += 1
        prev = length
    return out


def assign_codewords(
    model: SourceModel,
    items: list[tuple[Word, float, int]],
    assignment: str,
) -> list[CodeEntry]:
    """Turn (word, probability, construction length) triples into entries.

    "canonical" keeps the construction lengths; "huffman" replaces them with
    optimal lengths for the word probabilities.  Codewords are allocated
    canonically over entries sorted by (length, word) either way.
    """
    n = model.arity
    if assignment == "huffman":
        by_prob = sorted(items, key=lambda it: (-it[1], it[0]))
        lengths = huffman_lengths([p for _, p, _ in by_prob], n)
        items = [
            (w, p, length) for (w, p, _), length in zip(by_prob, lengths)
        ]
    elif assignment != "canonical":
        raise InputError(f"unknown assignment {assignment!r}")
    ordered = sorted(items, key=lambda it: (it[2], it[0]))
    codewords = canonical_codewords([length for _, _, length in ordered], n)
    return [
        CodeEntry(word=w, codeword=cw, probability=p)
        for (w, p, _), cw in zip(ordered, codewords)
    ]


@dataclass
class MergeStep:
    """One extension step of the Kraft merge."""

    profile: Profile
    word: Word | None  # set for word-level merges, None for class-level
    added: int  # words added in this step
    entered: bool  # whether the addition grew the merged set
    kraft_after: Fraction


@dataclass
class MergeTrace:
    """How the merge reached a Kraft-feasible word set.

    path is "base" (first set already feasible), "extended" (second set's
    words added until the Kraft sum crossed 1), or "swapped" (second set
    taken whole).  For word-level merges `k0` counts consumed words of the
    second set and `nontrivial` lists the ones that actually entered.
    """

    path: str
    steps: list[MergeStep] = field(default_factory=list)
    k0: int | None = None
    nontrivial: list[Word] = field(default_factory=list)
    boundary_profile: Profile | None = None
    boundary_words: int | None = None


def merge_to_kraft(
    model: SourceModel,
    first_words: list[Word],
    second_words: list[Word],
) -> tuple[list[tuple[Word, int]], MergeTrace, dict[str, Fraction | None]]:
    """Word-level Kraft merge of two explicit word sets.

    Lengths follow the construction rule, with membership in the second set
    deciding the extra digit.  Returns the final (word, length) list in
    lexicographic order, the trace, and the Kraft sums of both inputs and of
    their full merge.
    """
    n = model.arity
    second_set = set(second_words)

    def length_of(w: Word) -> int:
        form = linear_form(model, profile_of(w, model.m))
        return code_length_for(form, w in second_set)

    kraft_first = kraft_sum([length_of(w) for w in first_words], n)
    kraft_second = (
        kraft_sum([length_of(w) for w in second_words], n)
        if second_words
        else None
    )
    merged_all = wedge(first_words, second_words)
    kraft_merged = kraft_sum([length_of(w) for w in merged_all], n)
    report = {
        "kraft_first": kraft_first,
        "kraft_second": kraft_second,
        "kraft_merged": kraft_merged,
    }

    if kraft_first <= 1:
        final = sorted(first_words)
        return (
            [(w, length_of(w)) for w in final],
            MergeTrace(path="base"),
            report,
        )

    if kraft_merged <= 1:
        order = sorted(
            second_words,
            key=lambda w: (-word_probability(model, w), w),
        )
        union = set(first_words)
        added: list[Word] = []
        trace = MergeTrace(path="extended")
        for idx, w in enumerate(order, start=1):
            entered = w not in union and not any(
                w[:cut] in union for cut in range(1, len(w))
            )
            union.add(w)
            added.append(w)
            current = wedge(first_words, added)
            g = kraft_sum([length_of(x) for x in current], n)
            if entered:
                trace.nontrivial.append(w)
            trace.steps.append(
                MergeStep(
                    profile=profile_of(w, model.m),
                    word=w,
                    added=1,
                    entered=entered,
                    kraft_after=g,
                )
            )
            if g <= 1:
                trace.k0 = idx
                final = wedge(first_words, added)
                return [(w, length_of(w)) for w in final], trace, report
        raise ValidationError(
            "merge consumed the whole second set without crossing Kraft 1, "
            "yet the full merge was feasible; inputs are inconsistent"
        )

    if kraft_second is not None and kraft_second <= 1:
        final = sorted(second_words)
        return (
            [(w, length_of(w)) for w in final],
            MergeTrace(path="swapped", k0=0),
            report,
        )

    raise InfeasibleError(
        "neither the first set, nor the merge, nor the second set satisfies "
        "the Kraft inequality with the assigned lengths"
    )


class _KraftAcc:
    """Exact sum of count * n^-length terms as a scaled big integer."""

    __slots__ = ("n", "exp", "num")

    def __init__(self, n: int) -> None:
        self.n = n
        self.exp = 0
        self.num = 0

    def add(self, count: int, length: int) -> None:
        if length > self.exp:
            self.num *= self.n ** (length - self.exp)
            self.exp = length
        self.num += count * self.n ** (self.exp - length)

    def fraction(self) -> Fraction:
        return Fraction(self.num, self.n**self.exp)


def _profiles_of_length(total: int, m: int) -> Iterator[Profile]:
    if m == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _profiles_of_length(total - first, m - 1):
            yield (first,) + rest


@dataclass
class _JointTables:
    """Forward DP over both stopping sets at once.

    stops_first[k] = [clean_count, clean_mass, late_count, late_mass] for
    words of the first set stopping at profile k; "clean" paths never crossed
    the second set before stopping, "late" paths did.  stops_second mirrors
    this with the roles swapped.  The clean counts of stops_second at
    profiles outside the first set are exactly the words that would join the
    merged set if that profile's class were added.
    """

    stops_first: dict[Profile, list]
    stops_second: dict[Profile, list]
    kraft_first: Fraction
    kraft_second: Fraction
    cap_mass_first: float
    cap_mass_second: float
    forms: dict[Profile, float]


def _joint_dp(
    model: SourceModel,
    set_low: ProfileSet,
    set_high: ProfileSet,
    node_limit: int,
) -> _JointTables:
    m = model.m
    probs = model.probs
    origin: Profile = (0,) * m
    for s in (set_low, set_high):
        if s.member(origin):
            raise ValidationError("the empty profile cannot be a member")
    if set_low.cap != set_high.cap:
        raise InputError("both stopping sets must share one cap")
    cap = set_low.cap

    # state: paths that have hit neither set, only the first, only the second
    clean: dict[Profile, tuple[int, float]] = {origin: (1, 1.0)}
    only_first: dict[Profile, tuple[int, float]] = {}
    only_second: dict[Profile, tuple[int, float]] = {}

    stops_first: dict[Profile, list] = {}
    stops_second: dict[Profile, list] = {}
    acc_first = _KraftAcc(model.arity)
    acc_second = _KraftAcc(model.arity)
    cap_mass_first = 0.0
    cap_mass_second = 0.0
    forms: dict[Profile, float] = {}
    visited = 0
    level = 0

    def _push(
        src: dict[Profile, tuple[int, float]],
        dst: dict[Profile, tuple[int, float]],
    ) -> None:
        for k, (c, mass) in src.items():
            for i in range(m):
                child = k[:i] + (k[i] + 1,) + k[i + 1 :]
                if child in dst:
                    oc, om = dst[child]
                    dst[child] = (oc + c, om + mass * probs[i])
                else:
                    dst[child] = (c, mass * probs[i])

    while clean or only_first or only_second:
        if level >= cap:
            raise ValidationError("paths alive beyond the cap")
        in_clean: dict[Profile, tuple[int, float]] = {}
        in_first: dict[Profile, tuple[int, float]] = {}
        in_second: dict[Profile, tuple[int, float]] = {}
        _push(clean, in_clean)
        _push(only_first, in_first)
        _push(only_second, in_second)
        level += 1
        keys = set(in_clean) | set(in_first) | set(in_second)
        visited += len(keys)
        if visited > node_limit:
            raise ResourceError(
                f"joint lattice DP exceeded {node_limit} nodes at cap {cap}"
            )
        clean = {}
        only_first = {}
        only_second = {}
        for k in keys:
            c_c, m_c = in_clean.get(k, (0, 0.0))
            c_1, m_1 = in_first.get(k, (0, 0.0))
            c_2, m_2 = in_second.get(k, (0, 0.0))
            b1 = set_low.member(k)
            b2 = set_high.member(k)
            if not (b1 or b2):
                if c_c:
                    clean[k] = (c_c, m_c)
                if c_1:
                    only_first[k] = (c_1, m_1)
                if c_2:
                    only_second[k] = (c_2, m_2)
                continue
            form = linear_form(model, k)
            forms[k] = form
            at_cap = sum(k) == cap
            if b1:
                if c_c or c_2:
                    rec = stops_first.setdefault(k, [0, 0.0, 0, 0.0])
                    rec[0] += c_c
                    rec[1] += m_c
                    rec[2] += c_2
                    rec[3] += m_2
                    if c_c:
                        acc_first.add(c_c, code_length_for(form, b2))
                    if c_2:
                        acc_first.add(c_2, code_length_for(form, False))
                    if at_cap and not set_low.rule.member(k):
                        cap_mass_first += m_c + m_2
            else:
                # second-only member: clean paths would stop here if these
                # words were added to the merged set
                if c_c or c_2:
                    moved_c = c_c + c_2
                    moved_m = m_c + m_2
                    only_second[k] = (moved_c, moved_m)
            if b2:
                if c_c or c_1:
                    rec = stops_second.setdefault(k, [0, 0.0, 0, 0.0])
                    rec[0] += c_c
                    rec[1] += m_c
                    rec[2] += c_1
                    rec[3] += m_1
                    acc_second.add(c_c + c_1, code_length_for(form, True))
                    if at_cap and not set_high.rule.member(k):
                        cap_mass_second += m_c + m_1
            else:
                if c_c or c_1:
                    only_first[k] = (
                        only_first.get(k, (0, 0.0))[0] + c_c + c_1,
                        only_first.get(k, (0, 0.0))[1] + m_c + m_1,
                    )
    return _JointTables(
        stops_first=stops_first,
        stops_second=stops_second,
        kraft_first=acc_first.fraction(),
        kraft_second=acc_second.fraction(),
        cap_mass_first=cap_mass_first,
        cap_mass_second=cap_mass_second,
        forms=forms,
    )


def _knockout_masses(
    model: SourceModel,
    set_low: ProfileSet,
    targets: set[Profile],
    node_limit: int,
) -> dict[Profile, Fraction]:
    """Kraft mass removed per word when a profile's words join the merged set.

    For a profile k outside the low set, W(k) is the Kraft sum over all
    first-low-set stops of paths continuing from k, at floor lengths.  Adding
    one word ending at k knocks exactly those continuation words out.
    Computed for every target profile in a single backward sweep over the
    lattice, with exact integer arithmetic scaled by n^E.
    """
    n = model.arity
    m = model.m
    cap = set_low.cap
    if math.comb(cap + m, m) > node_limit:
        raise ResourceError(
            f"backward sweep needs the full lattice up to {cap}, "
            f"exceeding {node_limit} nodes"
        )
    exp = int(cap * max(model.d)) + 3

    def stop_value(k: Profile) -> int:
        form = linear_form(model, k)
        return n ** (exp - code_length_for(form, False))

    result: dict[Profile, int] = {}
    w_next: dict[Profile, int] = {}
    for level in range(cap - 1, -1, -1):
        w_cur: dict[Profile, int] = {}
        for k in _profiles_of_length(level, m):
            if set_low.member(k):
                continue
            total = 0
            for i in range(m):
                child = k[:i] + (k[i] + 1,) + k[i + 1 :]
                if set_low.member(child):
                    total += stop_value(child)
                else:
                    total += w_next[child]
            w_cur[k] = total
            if k in targets:
                result[k] = total
        w_next = w_cur
    denom = n**exp
    return {k: Fraction(v, denom) for k, v in result.items()}


def _class_scan(
    model: SourceModel,
    tables: _JointTables,
    set_low: ProfileSet,
    knockouts: dict[Profile, Fraction],
    classes: list[tuple[float, Profile, int]],
) -> tuple[set[Profile], tuple[Profile, int] | None, Fraction, list[MergeStep]]:
    """Add whole profile classes until the Kraft sum first reaches 1.

    Classes arrive sorted by decreasing word probability.  The class where
    the sum crosses 1 is split exactly: j words of it are enough, with j
    computed in exact rational arithmetic.
    """
    n = model.arity
    g = tables.kraft_first
    chosen: set[Profile] = set()
    steps: list[MergeStep] = []
    for form, k, count in classes:
        length = code_length_for(form, True)
        delta = Fraction(1, n**length) - knockouts[k]
        g_class = g + count * delta
        if g_class <= 1:
            if delta >= 0:
                raise ValidationError(
                    "Kraft sum crossed 1 on a non-decreasing step"
                )
            j = math.ceil((g - 1) / (-delta))
            g_final = g + j * delta
            steps.append(
                MergeStep(
                    profile=k,
                    word=None,
                    added=j,
                    entered=True,
                    kraft_after=g_final,
                )
            )
            return chosen, (k, j), g_final, steps
        g = g_class
        chosen.add(k)
        steps.append(
            MergeStep(
                profile=k, word=None, added=count, entered=True, kraft_after=g
            )
        )
    raise ValidationError(
        "class scan exhausted the second set without reaching Kraft 1"
    )


@dataclass
class _FinalTable:
    """Stop accounting of the merged word set.

    stops[k] = [clean_count, clean_mass, crossed_count, crossed_mass]; clean
    stops take the length rule with the second-set membership of k, crossed
    stops always take the floor length.
    """

    stops: dict[Profile, list]
    kraft: Fraction
    word_count: int
    total_mass: float
    max_length: int


def _final_dp(
    model: SourceModel,
    primary: ProfileSet,
    secondary: ProfileSet,
    chosen: set[Profile],
    boundary: tuple[Profile, int] | None,
    node_limit: int,
) -> _FinalTable:
    m = model.m
    probs = model.probs
    origin: Profile = (0,) * m
    cap = primary.cap
    boundary_profile = boundary[0] if boundary else None
    boundary_words = boundary[1] if boundary else 0

    clean: dict[Profile, tuple[int, float]] = {origin: (1, 1.0)}
    crossed: dict[Profile, tuple[int, float]] = {}
    stops: dict[Profile, list] = {}
    acc = _KraftAcc(model.arity)
    word_count = 0
    total_mass = 0.0
    max_length = 0
    visited = 0
    level = 0

    def _push(
        src: dict[Profile, tuple[int, float]],
        dst: dict[Profile, tuple[int, float]],
    ) -> None:
        for k, (c, mass) in src.items():
            for i in range(m):
                child = k[:i] + (k[i] + 1,) + k[i + 1 :]
                if child in dst:
                    oc, om = dst[child]
                    dst[child] = (oc + c, om + mass * probs[i])
                else:
                    dst[child] = (c, mass * probs[i])

    while clean or crossed:
        if level >= cap:
            raise ValidationError("paths alive beyond the cap")
        in_clean: dict[Profile, tuple[int, float]] = {}
        in_crossed: dict[Profile, tuple[int, float]] = {}
        _push(clean, in_clean)
        _push(crossed, in_crossed)
        level += 1
        keys = set(in_clean) | set(in_crossed)
        visited += len(keys)
        if visited > node_limit:
            raise ResourceError(
                f"final lattice DP exceeded {node_limit} nodes at cap {cap}"
            )
        clean = {}
        crossed = {}
        for k in keys:
            c_c, m_c = in_clean.get(k, (0, 0.0))
            c_x, m_x = in_crossed.get(k, (0, 0.0))
            b1 = primary.member(k)
            b2 = secondary.member(k)
            if b1:
                form = linear_form(model, k)
                rec = stops.setdefault(k, [0, 0.0, 0, 0.0])
                rec[0] += c_c
                rec[1] += m_c
                rec[2] += c_x
                rec[3] += m_x
                if c_c:
                    acc.add(c_c, code_length_for(form, b2))
                if c_x:
                    acc.add(c_x, code_length_for(form, False))
                word_count += c_c + c_x
                total_mass += m_c + m_x
                max_length = max(max_length, sum(k))
                continue
            if b2:
                if c_x:
                    crossed[k] = (c_x, m_x)
                if c_c:
                    if k in chosen:
                        form = linear_form(model, k)
                        rec = stops.setdefault(k, [0, 0.0, 0, 0.0])
                        rec[0] += c_c
                        rec[1] += m_c
                        acc.add(c_c, code_length_for(form, True))
                        word_count += c_c
                        total_mass += m_c
                        max_length = max(max_length, sum(k))
                    elif k == boundary_profile:
                        form = linear_form(model, k)
                        word_mass = profile_probability(model, k)
                        stop_c = min(boundary_words, c_c)
                        if stop_c != boundary_words:
                            raise ValidationError(
                                "boundary class smaller than its split"
                            )
                        rec = stops.setdefault(k, [0, 0.0, 0, 0.0])
                        rec[0] += stop_c
                        rec[1] += stop_c * word_mass
                        acc.add(stop_c, code_length_for(form, True))
                        word_count += stop_c
                        total_mass += stop_c * word_mass
                        max_length = max(max_length, sum(k))
                        rest = c_c - stop_c
                        if rest:
                            rest_mass = m_c - stop_c * word_mass
                            oc, om = crossed.get(k, (0, 0.0))
                            crossed[k] = (oc + rest, om + rest_mass)
                    else:
                        oc, om = crossed.get(k, (0, 0.0))
                        crossed[k] = (oc + c_c, om + m_c)
                continue
            if c_c:
                clean[k] = (c_c, m_c)
            if c_x:
                oc, om = crossed.get(k, (0, 0.0))
                crossed[k] = (oc + c_x, om + m_x)
    return _FinalTable(
        stops=stops,
        kraft=acc.fraction(),
        word_count=word_count,
        total_mass=total_mass,
        max_length=max_length,
    )


def _enumerate_final(
    model: SourceModel,
    primary: ProfileSet,
    secondary: ProfileSet,
    chosen: set[Profile],
    boundary: tuple[Profile, int] | None,
    limit: int,
) -> list[tuple[Word, int]]:
    """List the merged word set in lexicographic order with its lengths.

    Mirrors the stopping semantics of the final lattice DP word by word; at
    the boundary profile the lexicographically first j entering words stop
    and the rest continue to their first primary-set stop.
    """
    m = model.m
    cap = primary.cap
    boundary_profile = boundary[0] if boundary else None
    boundary_left = boundary[1] if boundary else 0
    out: list[tuple[Word, int]] = []
    origin: Profile = (0,) * m
    # frame: [word, profile, crossed, next symbol index]
    stack: list[list] = [[(), origin, False, 0]]
    while stack:
        frame = stack[-1]
        word, profile, crossed, nxt = frame
        if nxt >= m:
            stack.pop()
            continue
        frame[3] += 1
        sym = nxt  # 0-based position; symbols are 1-based
        child_word = word + (sym + 1,)
        child = (
            profile[:sym] + (profile[sym] + 1,) + profile[sym + 1 :]
        )
        if len(child_word) > cap:
            raise ValidationError("enumeration ran past the cap")
        b1 = primary.member(child)
        b2 = secondary.member(child)
        if b1:
            form = linear_form(model, child)
            length = code_length_for(form, b2 and not crossed)
            out.append((child_word, length))
            if len(out) > limit:
                raise ResourceError(f"word set exceeds {limit} words")
            continue
        if b2:
            if crossed:
                stack.append([child_word, child, True, 0])
                continue
            if child in chosen:
                form = linear_form(model, child)
                out.append((child_word, code_length_for(form, True)))
                if len(out) > limit:
                    raise ResourceError(f"word set exceeds {limit} words")
                continue
            if child == boundary_profile and boundary_left > 0:
                boundary_left -= 1
                form = linear_form(model, child)
                out.append((child_word, code_length_for(form, True)))
                if len(out) > limit:
                    raise ResourceError(f"word set exceeds {limit} words")
                continue
            stack.append([child_word, child, True, 0])
            continue
        stack.append([child_word, child, crossed, 0])
    return out


def threshold_parameter_candidates(
    model: SourceModel, t_max: int = DEFAULT_T_MAX
) -> dict:
    """Candidate threshold parameters T for a source.

    When every exponent -log_n p_i is rational the linear form hits integers
    exactly; any T with threshold 2/T below the hit spacing works, so the
    candidates are doublings of a small multiple of the common denominator.
    Otherwise T runs over the best-approximation denominators of one
    irrational exponent, preferring the last symbol's.
    """
    q = denominator_of_rational_form(list(model.d))
    if q is not None:
        base = q * max(1, math.ceil(5 / q))
        candidates = []
        t = base
        while t <= max(t_max, base):
            candidates.append(t)
            t *= 2
        return {
            "case": "rational",
            "q": q,
            "candidates": candidates,
            "source_symbol": None,
        }
    idx = model.m - 1
    if denominator_of_rational_form([model.d[idx]]) is not None:
        idx = next(
            i
            for i, di in enumerate(model.d)
            if denominator_of_rational_form([di]) is None
        )
    candidates = best_approx_denominators(model.d[idx], t_max)
    return {
        "case": "irrational",
        "q": None,
        "candidates": candidates,
        "source_symbol": model.labels[idx],
    }


def choose_cap(
    model: SourceModel,
    T: int,
    theta: float | None = None,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> tuple[int, ProfileSet, ProfileSet, _JointTables, list[tuple[int, float]]]:
    """Pick the hard stopping cap by doubling until the cap mass is small.

    Starts at T^2 and doubles until the probability of a word being stopped
    by the cap rather than a threshold set drops to T^-2, or the budget
    ceil(8 T^3 ln T) is reached.  Returns the lattice tables of the last
    trial so the caller need not recompute them.
    """
    hard = max(T * T, math.ceil(8 * T**3 * math.log(T)) if T >= 2 else 0)
    target = 1.0 / (T * T)
    cap = T * T
    history: list[tuple[int, float]] = []
    while True:
        if math.comb(cap + model.m, model.m) > node_limit:
            raise ResourceError(
                f"cap {cap} needs more than {node_limit} lattice nodes"
            )
        set_low, set_high = build_threshold_sets(model, T, cap, theta)
        tables = _joint_dp(model, set_low, set_high, node_limit)
        worst = max(tables.cap_mass_first, tables.cap_mass_second)
        history.append((cap, worst))
        if worst <= target or cap >= hard:
            return cap, set_low, set_high, tables, history
        cap = min(2 * cap, hard)


def _metrics_classes(
    model: SourceModel, secondary: ProfileSet, table: _FinalTable
) -> list[tuple[float, int, int, float]]:
    """(mass, word length, codeword length, linear form) per stop class."""
    out: list[tuple[float, int, int, float]] = []
    for k in sorted(table.stops):
        c_c, m_c, c_x, m_x = table.stops[k]
        form = linear_form(model, k)
        word_len = sum(k)
        if c_c:
            out.append(
                (m_c, word_len, code_length_for(form, secondary.member(k)), form)
            )
        if c_x:
            out.append((m_x, word_len, code_length_for(form, False), form))
    return out


@dataclass
class VVResult:
    """A constructed variable-to-variable code.

    `dp_metrics` always reflects the construction lengths, computed exactly
    on the profile lattice.  `book` (and `book_metrics`) are present when the
    word set was small enough to enumerate; with the "huffman" assignment the
    book's lengths are optimal for the word probabilities and its metrics can
    beat the construction's.
    """

    model: SourceModel
    T: int | None
    cap: int | None
    theta: float | None
    grade: str
    path: str
    book: CodeBook | None
    dp_metrics: "analysis.CodeMetrics"
    book_metrics: "analysis.CodeMetrics | None"
    trace: MergeTrace
    provenance: dict


def _pipeline(
    model: SourceModel,
    T: int,
    cap: int | str,
    theta: float | None,
    grade: str,
    assignment: str,
    enum_limit: int,
    node_limit: int,
) -> VVResult:
    n = model.arity
    if cap == "auto":
        cap_val, set_low, set_high, tables, history = choose_cap(
            model, T, theta, node_limit
        )
    else:
        cap_val = int(cap)
        set_low, set_high = build_threshold_sets(model, T, cap_val, theta)
        tables = _joint_dp(model, set_low, set_high, node_limit)
        history = [
            (cap_val, max(tables.cap_mass_first, tables.cap_mass_second))
        ]

    kraft_first = tables.kraft_first
    kraft_second = tables.kraft_second
    kraft_merged: Fraction | None = None
    g_final: Fraction | None = None
    steps: list[MergeStep] = []
    chosen: set[Profile] = set()
    boundary: tuple[Profile, int] | None = None

    if kraft_first <= 1:
        path = "base"
        primary, secondary = set_low, set_high
        expected_kraft = kraft_first
    else:
        union = ProfileSet(
            model.m, cap_val, UnionRule((set_low.rule, set_high.rule))
        )
        union_table = lattice_metrics(model, union, node_limit=node_limit)
        acc = _KraftAcc(n)
        for k, (count, _) in union_table.stops.items():
            form = linear_form(model, k)
            acc.add(count, code_length_for(form, set_high.member(k)))
        kraft_merged = acc.fraction()
        if kraft_merged <= 1:
            classes = sorted(
                (tables.forms[k], k, rec[0])
                for k, rec in tables.stops_second.items()
                if rec[0] and not set_low.member(k)
            )
            knockouts = _knockout_masses(
                model, set_low, {k for _, k, _ in classes}, node_limit
            )
            full = kraft_first + sum(
                count
                * (
                    Fraction(1, n ** code_length_for(form, True))
                    - knockouts[k]
                )
                for form, k, count in classes
            )
            if full != kraft_merged:
                raise ValidationError(
                    "lattice merge bookkeeping is inconsistent: adding every "
                    "class does not reproduce the merged Kraft sum"
                )
            chosen, boundary, g_final, steps = _class_scan(
                model, tables, set_low, knockouts, classes
            )
            path = "extended"
            primary, secondary = set_low, set_high
            expected_kraft = g_final
        elif kraft_second <= 1:
            path = "swapped"
            primary = secondary = set_high
            expected_kraft = kraft_second
        else:
            raise InfeasibleError(
                "neither threshold word set satisfies the Kraft inequality, "
                "in either merge order"
            )

    final = _final_dp(model, primary, secondary, chosen, boundary, node_limit)
    if final.kraft != expected_kraft:
        raise ValidationError(
            "final word set Kraft sum disagrees with the merge accounting"
        )
    if abs(final.total_mass - 1.0) > 1e-6:
        raise ValidationError(
            f"final word set is not complete: mass {final.total_mass!r}"
        )

    dp_metrics = analysis.metrics_from_classes(
        model,
        _metrics_classes(model, secondary, final),
        kraft_exact=final.kraft,
        word_count=final.word_count,
    )

    provenance = {
        "mode": "thresholds",
        "T": T,
        "cap": cap_val,
        "theta": theta if theta is not None else 2.0 / T,
        "path": path,
        "grade": grade,
        "assignment": assignment,
        "word_count": final.word_count,
        "kraft_first": str(kraft_first),
        "kraft_second": str(kraft_second),
        "kraft_merged": None if kraft_merged is None else str(kraft_merged),
        "kraft_final": str(final.kraft),
        "classes_added": len(chosen) + (1 if boundary else 0),
        "boundary_profile": list(boundary[0]) if boundary else None,
        "boundary_words": boundary[1] if boundary else None,
        "cap_history": [[c, mass] for c, mass in history],
    }

    book = None
    book_metrics = None
    if final.word_count <= enum_limit:
        words = _enumerate_final(
            model, primary, secondary, chosen, boundary, enum_limit
        )
        if len(words) != final.word_count:
            raise ValidationError(
                "enumerated word count disagrees with the lattice DP"
            )
        items = [
            (w, word_probability(model, w), length) for w, length in words
        ]
        entries = assign_codewords(model, items, assignment)
        book = CodeBook(
            model=model,
            kind="vv",
            entries=tuple(entries),
            provenance=dict(provenance),
        )
        validate_codebook(book)
        book_metrics = analysis.code_metrics(book)

    trace = MergeTrace(
        path=path,
        steps=steps,
        k0=len(chosen) + (1 if boundary else 0) if path == "extended" else None,
        boundary_profile=boundary[0] if boundary else None,
        boundary_words=boundary[1] if boundary else None,
    )
    return VVResult(
        model=model,
        T=T,
        cap=cap_val,
        theta=theta,
        grade=grade,
        path=path,
        book=book,
        dp_metrics=dp_metrics,
        book_metrics=book_metrics,
        trace=trace,
        provenance=provenance,
    )


def _validate_word_list(
    model: SourceModel, words: list[Word], what: str
) -> None:
    if not words:
        raise InputError(f"the {what} word list is empty")
    if len(set(words)) != len(words):
        raise ValidationError(f"the {what} word list has duplicates")
    for w in words:
        if not w:
            raise ValidationError(f"the {what} word list contains an empty word")
        if any(s < 1 or s > model.m for s in w):
            raise ValidationError(
                f"the {what} word list uses symbols outside the alphabet"
            )
    if not is_prefix_free(words):
        raise ValidationError(f"the {what} word set is not prefix-free")
    defect = completeness_defect(model, words)
    if defect > 1e-9:
        raise ValidationError(
            f"the {what} word set is not complete: defect {defect!r}"
        )


def _explicit(
    model: SourceModel,
    first_words: list[Word],
    second_words: list[Word],
    grade: str,
    assignment: str,
    enum_limit: int,
) -> VVResult:
    _validate_word_list(model, first_words, "first")
    if second_words:
        _validate_word_list(model, second_words, "second")
    if len(first_words) > enum_limit or len(second_words) > enum_limit:
        raise ResourceError(f"explicit word lists exceed {enum_limit} words")

    final_pairs, trace, report = merge_to_kraft(
        model, first_words, second_words
    )
    final_words = [w for w, _ in final_pairs]
    defect = completeness_defect(model, final_words)
    if defect > 1e-9:
        raise ValidationError(
            f"merged word set lost completeness: defect {defect!r}"
        )

    rows = [
        (
            word_probability(model, w),
            len(w),
            length,
            linear_form(model, profile_of(w, model.m)),
        )
        for w, length in final_pairs
    ]
    kraft_exact = kraft_sum([length for _, length in final_pairs], model.arity)
    dp_metrics = analysis.metrics_from_classes(
        model, rows, kraft_exact=kraft_exact, word_count=len(final_pairs)
    )

    provenance = {
        "mode": "explicit",
        "path": trace.path,
        "grade": grade,
        "assignment": assignment,
        "word_count": len(final_pairs),
        "kraft_first": str(report["kraft_first"]),
        "kraft_second": (
            None
            if report["kraft_second"] is None
            else str(report["kraft_second"])
        ),
        "kraft_merged": str(report["kraft_merged"]),
        "kraft_final": str(kraft_exact),
        "k0": trace.k0,
        "nontrivial_words": [
            model.word_to_text(w) for w in trace.nontrivial
        ],
    }

    items = [
        (w, word_probability(model, w), length) for w, length in final_pairs
    ]
    entries = assign_codewords(model, items, assignment)
    book = CodeBook(
        model=model, kind="vv", entries=tuple(entries), provenance=dict(provenance)
    )
    validate_codebook(book)
    book_metrics = analysis.code_metrics(book)

    return VVResult(
        model=model,
        T=None,
        cap=None,
        theta=None,
        grade=grade,
        path=trace.path,
        book=book,
        dp_metrics=dp_metrics,
        book_metrics=book_metrics,
        trace=trace,
        provenance=provenance,
    )


def construct_vv(
    model: SourceModel,
    T: int | str = "auto",
    cap: int | str = "auto",
    theta: float | None = None,
    grade: str = "codec",
    assignment: str = "huffman",
    first_words: list[Word] | None = None,
    second_words: list[Word] | None = None,
    enum_limit: int = DEFAULT_ENUM_LIMIT,
    node_limit: int = DEFAULT_NODE_LIMIT,
    t_max: int = DEFAULT_T_MAX,
) -> VVResult:
    """Construct a variable-to-variable code for a memoryless source.

    With explicit word lists the merge runs word by word and the result
    always carries a code book.  Otherwise the stopping sets come from the
    near-integer thresholds at parameter T ("auto" picks it from the
    source's exponents: at grade "codec" the largest candidate whose word
    set still enumerates, at grade "metrics" the first candidate above 4,
    where the two threshold sets cannot overlap).  The cap ("auto": doubling
    until the cap mass falls below T^-2) bounds word length in every case.

    grade "metrics" skips nothing structural; it only tolerates word sets
    too large to enumerate, returning lattice-level metrics without a book.
    """
    if grade not in ("codec", "metrics"):
        raise InputError(f"unknown grade {grade!r}")
    if assignment not in ("huffman", "canonical"):
        raise InputError(f"unknown assignment {assignment!r}")

    if first_words is not None or second_words is not None:
        if first_words is None:
            raise InputError(
                "a second word list was given without a first one"
            )
        return _explicit(
            model,
            list(first_words),
            list(second_words or []),
            grade,
            assignment,
            enum_limit,
        )

    if T == "auto":
        info = threshold_parameter_candidates(model, t_max)
        candidates = info["candidates"]
        if grade == "metrics":
            above = [t for t in candidates if t > 4]
            choice = above[0] if above else candidates[-1]
            result = _pipeline(
                model,
                choice,
                cap,
                theta,
                grade,
                assignment,
                enum_limit,
                node_limit,
            )
            result.provenance["t_selection"] = info
            return result
        failures: list[str] = []
        for choice in reversed(candidates):
            try:
                result = _pipeline(
                    model,
                    choice,
                    cap,
                    theta,
                    grade,
                    assignment,
                    enum_limit,
                    node_limit,
                )
            except ResourceError as exc:
                failures.append(f"T={choice}: {exc}")
                continue
            if result.book is not None:
                result.provenance["t_selection"] = info
                return result
            failures.append(
                f"T={choice}: {result.provenance['word_count']} words"
            )
        raise ResourceError(
            "no candidate threshold parameter yields an enumerable word "
            "set: " + "; ".join(failures)
        )

    choice = int(T)
    result = _pipeline(
        model, choice, cap, theta, grade, assignment, enum_limit, node_limit
    )
    if grade == "codec" and result.book is None:
        raise ResourceError(
            f"the word set at T={choice} has "
            f"{result.provenance['word_count']} words, above the "
            f"enumeration limit {enum_limit}"
        )
    return result
