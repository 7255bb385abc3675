"""Render sentiment tuples as natural-language target sequences.

Every quad becomes one clause of the form

    <category> is <polarity word> because <aspect> is <opinion>

with per-element projections: the polarity maps to an opinion adjective
(POS -> "great", NEU -> "ok", NEG -> "bad", overridable by a lexicon), an
implicit aspect maps to the pronoun "it", and category/opinion pass
through unchanged. Task variants reuse the same template: TASD echoes the
polarity word in the opinion slot, ASTE puts the literal "it" in the
category slot. Symbolic modes replace the polarity and/or category with
indexed tokens (SP1..SP3, AC<j>), and the plain-tuple mode bypasses the
template entirely and emits "(c, a, o, p)".

Multi-quad targets join clauses with " [SSEP] ". Clauses carry no trailing
period; the parser tolerates an optional one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from .core import CategoryVocab, Example, Polarity, SentimentQuad, Task, canonicalize

SSEP = "[SSEP]"
SEGMENT_JOINER = " [SSEP] "
IMPLICIT_PRONOUN = "it"
NULL_FIELD = "null"

POLARITY_WORDS: Mapping[Polarity, str] = {
    Polarity.POS: "great",
    Polarity.NEU: "ok",
    Polarity.NEG: "bad",
}

SYMBOLIC_POLARITY_TOKENS: Mapping[Polarity, str] = {
    Polarity.POS: "SP1",
    Polarity.NEU: "SP2",
    Polarity.NEG: "SP3",
}


class ProjectionMode(enum.Enum):
    """How label semantics are surfaced in the target sequence."""

    NATURAL = "natural"
    SYMBOLIC_POLARITY = "symbolic-polarity"
    SYMBOLIC_CATEGORY = "symbolic-category"
    SYMBOLIC_BOTH = "symbolic-both"
    PLAIN_TUPLE = "plain-tuple"

    @property
    def symbolic_polarity(self) -> bool:
        return self in (ProjectionMode.SYMBOLIC_POLARITY, ProjectionMode.SYMBOLIC_BOTH)

    @property
    def symbolic_category(self) -> bool:
        return self in (ProjectionMode.SYMBOLIC_CATEGORY, ProjectionMode.SYMBOLIC_BOTH)

    @classmethod
    def from_label(cls, label: str) -> "ProjectionMode":
        try:
            return cls(canonicalize(label))
        except ValueError:
            raise ValueError(f"unknown projection mode: {label!r}") from None


def validate_lexicon(lexicon: Mapping[Polarity, str]) -> dict[Polarity, str]:
    """Check a polarity-word override: all three polarities, distinct words."""
    normalized = {}
    for polarity in Polarity:
        if polarity not in lexicon:
            raise ValueError(f"lexicon override must map {polarity.label}")
        word = canonicalize(lexicon[polarity])
        if not word:
            raise ValueError(f"lexicon word for {polarity.label} must be non-empty")
        normalized[polarity] = word
    if len(set(normalized.values())) != len(normalized):
        raise ValueError("lexicon override words must be distinct")
    return normalized


def polarity_words(
    mode: ProjectionMode = ProjectionMode.NATURAL,
    lexicon: Mapping[Polarity, str] | None = None,
) -> dict[Polarity, str]:
    """The polarity -> surface-word table in effect for a mode."""
    if mode.symbolic_polarity:
        return dict(SYMBOLIC_POLARITY_TOKENS)
    if mode is ProjectionMode.PLAIN_TUPLE:
        return {p: p.label for p in Polarity}
    if lexicon is not None:
        return validate_lexicon(lexicon)
    return dict(POLARITY_WORDS)


def project_polarity(
    polarity: Polarity,
    mode: ProjectionMode = ProjectionMode.NATURAL,
    lexicon: Mapping[Polarity, str] | None = None,
) -> str:
    return polarity_words(mode, lexicon)[polarity]


def project_aspect(aspect: str | None) -> str:
    """Implicit aspects render as the pronoun "it"."""
    return IMPLICIT_PRONOUN if aspect is None else canonicalize(aspect)


def project_category(
    category: str,
    mode: ProjectionMode = ProjectionMode.NATURAL,
    vocab: CategoryVocab | None = None,
) -> str:
    if vocab is None:
        raise ValueError("a category vocabulary is required to project categories")
    if mode.symbolic_category:
        return vocab.symbol(category)
    name = canonicalize(category)
    vocab.index(name)  # membership check, raises UnknownCategoryError
    return name


def linearize_quad(
    quad: SentimentQuad,
    task: Task,
    mode: ProjectionMode = ProjectionMode.NATURAL,
    vocab: CategoryVocab | None = None,
    lexicon: Mapping[Polarity, str] | None = None,
) -> str:
    """Render one quad as a single clause (no trailing period)."""
    if task is Task.ASTE and quad.aspect is None:
        raise ValueError("ASTE cannot render an implicit aspect term")
    if mode is ProjectionMode.PLAIN_TUPLE:
        return _plain_tuple(quad, task, vocab)

    pol_word = project_polarity(quad.polarity, mode, lexicon)
    if task is Task.ASTE:
        category_slot = IMPLICIT_PRONOUN
    else:
        if quad.category is None:
            raise ValueError(f"{task.token} requires a category")
        category_slot = project_category(quad.category, mode, vocab)
    aspect_slot = project_aspect(quad.aspect)
    if task is Task.TASD:
        opinion_slot = pol_word
    else:
        if quad.opinion is None:
            raise ValueError(f"{task.token} requires an opinion term")
        opinion_slot = quad.opinion
    return f"{category_slot} is {pol_word} because {aspect_slot} is {opinion_slot}"


def _plain_tuple(quad: SentimentQuad, task: Task, vocab: CategoryVocab | None) -> str:
    def checked_category() -> str:
        if quad.category is None:
            raise ValueError(f"{task.token} requires a category")
        return project_category(quad.category, ProjectionMode.NATURAL, vocab)

    aspect = NULL_FIELD if quad.aspect is None else quad.aspect
    if task is Task.ASQP:
        if quad.opinion is None:
            raise ValueError("ASQP requires an opinion term")
        parts = (checked_category(), aspect, quad.opinion, quad.polarity.label)
    elif task is Task.ASTE:
        if quad.opinion is None:
            raise ValueError("ASTE requires an opinion term")
        parts = (quad.aspect, quad.opinion, quad.polarity.label)  # aspect explicit
    else:
        parts = (checked_category(), aspect, quad.polarity.label)
    return "(" + ", ".join(parts) + ")"


@dataclass(frozen=True)
class LinearizedTarget:
    """A rendered target sequence plus the task/mode it was rendered under."""

    text: str
    task: Task
    mode: ProjectionMode


def build_target(
    example: Example,
    mode: ProjectionMode = ProjectionMode.NATURAL,
    vocab: CategoryVocab | None = None,
    lexicon: Mapping[Polarity, str] | None = None,
) -> LinearizedTarget:
    """Linearize an example's quads, in gold order, joined by " [SSEP] "."""
    if not example.quads:
        raise ValueError("cannot build a target for an example with no quads")
    clauses = [
        linearize_quad(q, example.task, mode=mode, vocab=vocab, lexicon=lexicon)
        for q in example.quads
    ]
    return LinearizedTarget(SEGMENT_JOINER.join(clauses), example.task, mode)


def build_input(sentence: str, task: Task, transfer: bool = False) -> str:
    """Canonical model input; transfer mode appends the task token."""
    text = canonicalize(sentence)
    if transfer:
        return f"{text} {task.token}"
    return text
