"""Parsing and rendering of the "X is as P as Y" caption template.

A templated caption compares a primary concept to a secondary concept
through a shared property.  Parsing is total: every input string yields a
``ParsedMetaphor`` whose ``status`` records whether and how extraction
failed; only rendering rejects bad input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

OK = "ok"
NO_PRIMARY = "no_primary"
NO_SECONDARY = "no_secondary"
NO_PROPERTY = "no_property"
NOT_TEMPLATE = "not_template"

STATUSES = (OK, NO_PRIMARY, NO_SECONDARY, NO_PROPERTY, NOT_TEMPLATE)

ARTICLES = ("a", "an", "the")

_TRAILING_PUNCT = ".,!?;:\"'`)]}…"


@dataclass
class ParsedMetaphor:
    """Concept triple extracted from a templated caption.

    ``primary_concept``, ``property`` and ``secondary_concept`` are
    article-stripped surface spans (original casing preserved); fields
    missing from a failed parse are empty strings.  The raw spans and the
    article flag are kept for span-coverage checks and faithful
    re-rendering, but do not take part in equality.
    """

    primary_concept: str
    property: str
    secondary_concept: str
    status: str = OK
    # None means "not produced by parse_caption" (a synthesized triple).
    sc_had_article: bool | None = field(default=None, compare=False)
    pc_span: str = field(default="", compare=False)
    property_span: str = field(default="", compare=False)
    sc_span: str = field(default="", compare=False)

    @property
    def ok(self) -> bool:
        return self.status == OK


def _strip_article(tokens: list[str]) -> tuple[list[str], bool]:
    if tokens and tokens[0].lower() in ARTICLES:
        return tokens[1:], True
    return tokens, False


def parse_caption(caption: str) -> ParsedMetaphor:
    """Extract (primary concept, property, secondary concept) from a caption.

    Matches ``<PC> is as <property> as <SC>`` case-insensitively, after
    trimming whitespace and trailing punctuation.  The property ends at the
    first "as" following "is as"; leading articles are stripped from both
    concepts.  Never raises: failures are encoded in ``status``.
    """
    tokens = caption.strip().rstrip(_TRAILING_PUNCT).split()
    lowered = [t.lower() for t in tokens]

    skeleton = None
    for i in range(len(lowered) - 1):
        if lowered[i] == "is" and lowered[i + 1] == "as":
            skeleton = i
            break
    if skeleton is None:
        return ParsedMetaphor("", "", "", status=NOT_TEMPLATE)

    second_as = None
    for j in range(skeleton + 2, len(lowered)):
        if lowered[j] == "as":
            second_as = j
            break
    if second_as is None:
        return ParsedMetaphor("", "", "", status=NOT_TEMPLATE)

    pc_raw = tokens[:skeleton]
    prop_raw = tokens[skeleton + 2 : second_as]
    sc_raw = tokens[second_as + 1 :]

    pc, _ = _strip_article(pc_raw)
    sc, sc_had_article = _strip_article(sc_raw)

    if not pc:
        status = NO_PRIMARY
    elif not prop_raw:
        status = NO_PROPERTY
    elif not sc:
        status = NO_SECONDARY
    else:
        status = OK

    return ParsedMetaphor(
        primary_concept=" ".join(pc) if pc else "",
        property=" ".join(prop_raw),
        secondary_concept=" ".join(sc) if sc else "",
        status=status,
        sc_had_article=sc_had_article,
        pc_span=" ".join(pc_raw),
        property_span=" ".join(prop_raw),
        sc_span=" ".join(sc_raw),
    )


def indefinite_article(word: str) -> str:
    """Initial-vowel heuristic: "an apple", "a cheetah"."""
    return "an" if word[:1].lower() in "aeiou" else "a"


def render_caption(pm: ParsedMetaphor) -> str:
    """Render the canonical caption for an ok parse.

    The secondary concept keeps its parse-time article state: concepts that
    were parsed without one (mass nouns like "snow") render bare, while
    synthesized triples default to an indefinite article.
    """
    if pm.status != OK:
        raise ValueError(f"cannot render a metaphor with status {pm.status!r}")
    if pm.sc_had_article is False:
        sc = pm.secondary_concept
    else:
        sc = f"{indefinite_article(pm.secondary_concept)} {pm.secondary_concept}"
    return f"The {pm.primary_concept} is as {pm.property} as {sc}"
