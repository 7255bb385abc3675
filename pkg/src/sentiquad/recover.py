"""Parse generated target sequences back into sentiment quads.

Generations are untrusted text: the parser is total, never raises on
malformed input, and reports per-segment failures as data. Segments are
split on the "[SSEP]" separator, then matched against the clause grammar
of the rendering mode. Elements that parse but fall outside their legal
domain (category not in the vocabulary, polarity word unknown, aspect or
opinion not a span of the source sentence) are kept with validity flags so
they can be dropped (strict mode) or analyzed (lenient mode).

Aspect/opinion splitting: the clause tail after " because " may contain
several " is " occurrences when spans themselves contain the word. All
occurrences are candidate split points; candidates whose aspect side is
the pronoun "it" or a substring of the source sentence are preferred, and
the earliest surviving candidate wins. Remaining ambiguity is counted, not
guessed away silently.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .core import CategoryVocab, Polarity, Task, canonicalize
from .linearize import (
    IMPLICIT_PRONOUN,
    NULL_FIELD,
    ProjectionMode,
    polarity_words,
)

_SSEP_SPLIT = re.compile(r"\[ssep\]")
_SYMBOLIC_CATEGORY = re.compile(r"ac([0-9]+)")

# Failure reasons / flag labels reused by the error taxonomy.
CATEGORY_OUT_OF_VOCAB = "category-out-of-vocab"
UNKNOWN_POLARITY_WORD = "unknown-polarity-word"
ASPECT_NOT_A_SPAN = "aspect-not-a-span"
OPINION_NOT_A_SPAN = "opinion-not-a-span"


@dataclass(frozen=True)
class ParseFailure:
    """A segment that could not be decoded, with the reason."""

    segment: str
    reason: str


@dataclass(frozen=True)
class ParsedQuad:
    """A decoded quad with raw fields preserved even when invalid.

    ``polarity`` is None when the surface word is not in the polarity
    table; the word itself is kept in ``polarity_word``. Validity flags
    are computed against the (vocab, sentence) pair given at parse time;
    missing context defaults a flag to True (no evidence of invalidity).
    """

    category: str | None
    aspect: str | None
    opinion: str | None
    polarity: Polarity | None
    polarity_word: str
    in_vocab_category: bool = True
    known_polarity_word: bool = True
    aspect_is_span_or_pronoun: bool = True
    opinion_is_span: bool = True

    @property
    def valid(self) -> bool:
        return (
            self.in_vocab_category
            and self.known_polarity_word
            and self.aspect_is_span_or_pronoun
            and self.opinion_is_span
        )

    def invalid_flags(self) -> tuple[str, ...]:
        """Labels of the validity flags that are False."""
        flags = []
        if not self.in_vocab_category:
            flags.append(CATEGORY_OUT_OF_VOCAB)
        if not self.known_polarity_word:
            flags.append(UNKNOWN_POLARITY_WORD)
        if not self.aspect_is_span_or_pronoun:
            flags.append(ASPECT_NOT_A_SPAN)
        if not self.opinion_is_span:
            flags.append(OPINION_NOT_A_SPAN)
        return tuple(flags)

    def key(self) -> tuple:
        """Element tuple comparable with SentimentQuad.key().

        An unknown polarity can never equal a real class, so such quads
        count as predictions but never match gold.
        """
        polarity = self.polarity if self.polarity is not None else ("?", self.polarity_word)
        return (self.category, self.aspect, self.opinion, polarity)


@dataclass(frozen=True)
class RecoveryResult:
    """All quads and failures recovered from one generated sequence."""

    quads: tuple[ParsedQuad, ...]
    failures: tuple[ParseFailure, ...]
    ambiguous_splits: int = 0

    def keys(self) -> set[tuple]:
        return {q.key() for q in self.quads}


def split_segments(target: str) -> list[str]:
    """Split a generation on "[SSEP]" into canonical clause segments.

    Surrounding whitespace is absorbed, empty segments are dropped, and a
    single trailing period is stripped from each segment.
    """
    segments = []
    for part in _SSEP_SPLIT.split(canonicalize(target)):
        seg = part.strip()
        if seg.endswith("."):
            seg = seg[:-1].rstrip()
        if seg:
            segments.append(seg)
    return segments


def _find_all(haystack: str, needle: str) -> list[int]:
    positions = []
    start = 0
    while True:
        idx = haystack.find(needle, start)
        if idx < 0:
            return positions
        positions.append(idx)
        start = idx + 1


def _split_head(
    segment: str, head: str, mode: ProjectionMode, vocab: CategoryVocab | None
) -> tuple[str, bool, str] | ParseFailure:
    """Split "<category> is <polarity word>"; returns (category, in_vocab, word)."""
    if mode.symbolic_category and vocab is None:
        raise ValueError("symbolic category mode requires a vocabulary")
    if vocab is not None and not mode.symbolic_category:
        # Longest vocab entry that prefixes the head, followed by " is ".
        best = None
        for name in vocab:
            if head.startswith(name + " is ") and (best is None or len(name) > len(best)):
                best = name
        if best is not None:
            return best, True, head[len(best) + len(" is "):]
    idx = head.find(" is ")
    if idx < 0:
        return ParseFailure(segment, "missing ' is '")
    token = head[:idx]
    pol_word = head[idx + len(" is "):]
    if mode.symbolic_category:
        match = _SYMBOLIC_CATEGORY.fullmatch(token)
        if match and vocab is not None:
            position = int(match.group(1))
            if 1 <= position <= len(vocab):
                return vocab.at_index(position), True, pol_word
        return token, False, pol_word
    # No vocabulary to validate against: keep the raw prefix, assume valid.
    return token, vocab is None, pol_word


def parse_clause(
    segment: str,
    task: Task,
    vocab: CategoryVocab | None = None,
    sentence: str | None = None,
    mode: ProjectionMode = ProjectionMode.NATURAL,
    lexicon: Mapping[Polarity, str] | None = None,
    strict: bool = False,
) -> ParsedQuad | ParseFailure:
    """Decode one clause segment, or explain why it does not conform.

    Returns a ParseFailure for grammar violations; out-of-domain elements
    come back as a ParsedQuad with the matching validity flag cleared
    (except under ``strict``, where an unknown polarity word and a TASD
    opinion-slot mismatch also fail).
    """
    parsed, _ = _parse_clause_counted(segment, task, vocab, sentence, mode, lexicon, strict)
    return parsed


def _parse_clause_counted(
    segment: str,
    task: Task,
    vocab: CategoryVocab | None,
    sentence: str | None,
    mode: ProjectionMode,
    lexicon: Mapping[Polarity, str] | None,
    strict: bool,
) -> tuple[ParsedQuad | ParseFailure, bool]:
    """parse_clause plus whether the aspect/opinion split was ambiguous."""
    segment = canonicalize(segment)
    sentence_canon = canonicalize(sentence) if sentence is not None else None
    if mode is ProjectionMode.PLAIN_TUPLE:
        return _parse_plain_tuple(segment, task, vocab, sentence_canon, strict), False

    words = {word.lower(): pol for pol, word in polarity_words(mode, lexicon).items()}

    if task is Task.ASTE:
        prefix = IMPLICIT_PRONOUN + " is "
        if not segment.startswith(prefix):
            return ParseFailure(segment, "clause must start with 'it is'"), False
        rest = segment[len(prefix):]
        because_idx = rest.find(" because ")
        if because_idx < 0:
            return ParseFailure(segment, "missing ' because '"), False
        category: str | None = None
        in_vocab = True
        pol_word = rest[:because_idx]
        tail = rest[because_idx + len(" because "):]
    else:
        because_idx = segment.find(" because ")
        if because_idx < 0:
            return ParseFailure(segment, "missing ' because '"), False
        head = _split_head(segment, segment[:because_idx], mode, vocab)
        if isinstance(head, ParseFailure):
            return head, False
        category, in_vocab, pol_word = head
        tail = segment[because_idx + len(" because "):]

    polarity = words.get(pol_word)
    if polarity is None and strict:
        return ParseFailure(segment, f"{UNKNOWN_POLARITY_WORD}: {pol_word!r}"), False

    candidates = []
    for idx in _find_all(tail, " is "):
        aspect_side = tail[:idx]
        opinion_side = tail[idx + len(" is "):]
        if aspect_side and opinion_side:
            candidates.append((aspect_side, opinion_side))
    if not candidates:
        return ParseFailure(segment, "no aspect/opinion split"), False
    survivors = [
        (a, o)
        for a, o in candidates
        if a == IMPLICIT_PRONOUN or (sentence_canon is not None and a in sentence_canon)
    ]
    ambiguous = len(survivors) > 1
    aspect_side, opinion_side = survivors[0] if survivors else candidates[0]

    if aspect_side == IMPLICIT_PRONOUN:
        aspect: str | None = None
        aspect_ok = True
    else:
        aspect = aspect_side
        aspect_ok = sentence_canon is None or aspect_side in sentence_canon

    if task is Task.TASD:
        if strict and opinion_side != pol_word:
            return ParseFailure(segment, "opinion slot does not echo the polarity word"), ambiguous
        opinion: str | None = None
        opinion_ok = True
    else:
        opinion = opinion_side
        opinion_ok = sentence_canon is None or opinion_side in sentence_canon

    quad = ParsedQuad(
        category=category,
        aspect=aspect,
        opinion=opinion,
        polarity=polarity,
        polarity_word=pol_word,
        in_vocab_category=in_vocab,
        known_polarity_word=polarity is not None,
        aspect_is_span_or_pronoun=aspect_ok,
        opinion_is_span=opinion_ok,
    )
    return quad, ambiguous


def _parse_plain_tuple(
    segment: str,
    task: Task,
    vocab: CategoryVocab | None,
    sentence_canon: str | None,
    strict: bool,
) -> ParsedQuad | ParseFailure:
    if not (segment.startswith("(") and segment.endswith(")")):
        return ParseFailure(segment, "not a parenthesized tuple")
    parts = [p.strip() for p in segment[1:-1].split(",")]
    arity = {Task.ASQP: 4, Task.ASTE: 3, Task.TASD: 3}[task]
    if len(parts) != arity or not all(parts):
        return ParseFailure(segment, f"expected {arity} tuple elements")

    if task is Task.ASQP:
        category, aspect_raw, opinion, pol_word = parts
    elif task is Task.ASTE:
        category = None
        aspect_raw, opinion, pol_word = parts
    else:
        category, aspect_raw, pol_word = parts
        opinion = None

    aspect = None if aspect_raw == NULL_FIELD else aspect_raw
    try:
        polarity: Polarity | None = Polarity.from_label(pol_word)
    except ValueError:
        polarity = None
    if polarity is None and strict:
        return ParseFailure(segment, f"{UNKNOWN_POLARITY_WORD}: {pol_word!r}")

    in_vocab = True
    if category is not None and vocab is not None:
        in_vocab = category in vocab
    aspect_ok = aspect is None or sentence_canon is None or aspect in sentence_canon
    opinion_ok = opinion is None or sentence_canon is None or opinion in sentence_canon
    return ParsedQuad(
        category=category,
        aspect=aspect,
        opinion=opinion,
        polarity=polarity,
        polarity_word=pol_word,
        in_vocab_category=in_vocab,
        known_polarity_word=polarity is not None,
        aspect_is_span_or_pronoun=aspect_ok,
        opinion_is_span=opinion_ok,
    )


def recover_quads(
    target: str,
    task: Task,
    vocab: CategoryVocab | None = None,
    sentence: str | None = None,
    mode: ProjectionMode = ProjectionMode.NATURAL,
    lexicon: Mapping[Polarity, str] | None = None,
    strict: bool = False,
) -> RecoveryResult:
    """Decode a full generation; never raises on malformed input.

    Strict mode treats any quad with a false validity flag as a failed
    prediction (it becomes a ParseFailure); lenient mode keeps flagged
    quads for error analysis. Duplicate quads are collapsed.
    """
    quads: list[ParsedQuad] = []
    failures: list[ParseFailure] = []
    ambiguous = 0
    for segment in split_segments(target):
        parsed, was_ambiguous = _parse_clause_counted(
            segment, task, vocab, sentence, mode, lexicon, strict
        )
        ambiguous += int(was_ambiguous)
        if isinstance(parsed, ParseFailure):
            failures.append(parsed)
            continue
        if strict and not parsed.valid:
            failures.append(ParseFailure(segment, "; ".join(parsed.invalid_flags())))
            continue
        quads.append(parsed)
    return RecoveryResult(tuple(dict.fromkeys(quads)), tuple(failures), ambiguous)
