"""Query complexity scoring for routing decisions.

A query's complexity score combines three signals:

    1. Salience (0-1): how much cognitive load the wording implies. Pluggable;
       the built-in provider is a deterministic lexical proxy (content-word
       ratio plus rare-token ratio) so desk runs need no model weights.
    2. Normalized length (0-1): token count over the maximum observed corpus
       length, frozen in a corpus pre-pass and clamped for unseen longer text.
    3. Structural heuristic (>= 0): named-entity density and multi-hop
       indicator density, acting as a multiplier on top of the linguistic part.

The combined score is

    kappa = (w_a * salience + w_l * length_norm) * (1 + structural)

and the effective score folds in an optional rule-based path hint as a bounded
additive nudge (lower-clamped at zero, no upper clamp).
"""

from __future__ import annotations

import csv
import json
import logging
import math
import re
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from .types import Dataset, PathHint, ValidationError, ContractViolationError

logger = logging.getLogger(__name__)

# A token is a scalar in the query text: word, number, or number+unit glob.
_TOKEN_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9'\-\.,%]*")

# Multi-hop indicator phrases, counted on the casefolded text. Configurable.
DEFAULT_HOP_KEYWORDS: tuple[str, ...] = (
    "and", "who also", "before", "after", "the same",
)

# Minimal stopword list for the lexical salience proxy.
_STOPWORDS = frozenset(
    "a an the of in on at to for from by with as is are was were be been "
    "do does did how what when where who which why that this these those "
    "it its his her their there then than or not no so if but".split()
)

DEFAULT_HINT_DELTA = 0.15


@dataclass(frozen=True)
class Query:
    """A routed unit of work.

    ``entity_spans`` are half-open ``(start, end)`` token ranges;
    ``hop_markers`` counts multi-hop indicator keywords found in the text.
    A query with no tokens may exist (e.g. built from empty text) but is not
    routable; scoring operations reject it.
    """

    id: str
    text: str
    tokens: tuple[str, ...]
    dataset: Dataset = Dataset.OTHER
    entity_spans: tuple[tuple[int, int], ...] = ()
    hop_markers: int = 0

    def __post_init__(self) -> None:
        n = len(self.tokens)
        for start, end in self.entity_spans:
            if not (0 <= start < end <= n):
                raise ValidationError(
                    f"entity span ({start}, {end}) outside token range [0, {n})"
                )
        if self.hop_markers < 0:
            raise ValidationError("hop_markers must be >= 0")


@dataclass(frozen=True)
class ComplexityWeights:
    """Weights for the complexity score plus the frozen corpus length."""

    w_a: float = 1.0
    w_l: float = 1.0
    w_sh1: float = 0.05
    w_sh2: float = 0.1
    max_corpus_len: int = 48

    def __post_init__(self) -> None:
        for name in ("w_a", "w_l", "w_sh1", "w_sh2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and non-negative, got {v}")
        if self.max_corpus_len <= 0:
            raise ValidationError("max_corpus_len must be positive")


@dataclass(frozen=True)
class ComplexityBreakdown:
    """Per-component view of a query's complexity score."""

    salience: float
    length_norm: float
    structural: float
    kappa: float
    rule_suggestion: PathHint | None = None
    kappa_eff: float = 0.0


# A salience provider maps a token sequence to a scalar in [0, 1] and must be
# deterministic for identical input.
SalienceProvider = Callable[[Sequence[str]], float]


class LexicalSalience:
    """Deterministic lexical stand-in for a model-based salience signal.

    Scores a token sequence by the fraction of content words (non-stopwords)
    and the fraction of rare-looking tokens (long words or tokens containing
    digits), blended into [0, 1].
    """

    def __init__(self, content_weight: float = 0.35, rare_weight: float = 0.65,
                 rare_min_len: int = 8) -> None:
        if content_weight < 0 or rare_weight < 0 or content_weight + rare_weight > 1.0 + 1e-9:
            raise ValidationError("salience weights must be non-negative and sum to <= 1")
        self.content_weight = content_weight
        self.rare_weight = rare_weight
        self.rare_min_len = rare_min_len

    def __call__(self, tokens: Sequence[str]) -> float:
        if not tokens:
            return 0.0
        n = len(tokens)
        content = sum(1 for t in tokens if t.casefold() not in _STOPWORDS)
        rare = sum(
            1 for t in tokens
            if len(t) >= self.rare_min_len or any(c.isdigit() for c in t)
        )
        score = self.content_weight * (content / n) + self.rare_weight * (rare / n)
        return min(1.0, max(0.0, score))


class FixedSalience:
    """Salience provider returning a constant; handy for tests and demos."""

    def __init__(self, value: float) -> None:
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"fixed salience must be in [0, 1], got {value}")
        self.value = value

    def __call__(self, tokens: Sequence[str]) -> float:
        return self.value


def tokenize(text: str) -> tuple[str, ...]:
    """Split text into word/number tokens, dropping bare punctuation."""
    return tuple(_TOKEN_RE.findall(text))


def detect_entity_spans(
    tokens: Sequence[str], gazetteer: frozenset[str] = frozenset()
) -> tuple[tuple[int, int], ...]:
    """Find entity spans via gazetteer membership plus a capitalization heuristic.

    A maximal run of capitalized tokens counts as one entity; the leading token
    of the text only starts a span if it appears in the gazetteer (sentence
    case is not evidence of a name there).
    """
    spans: list[tuple[int, int]] = []
    i = 0
    n = len(tokens)

    def _entityish(idx: int, allow_leading_cap: bool) -> bool:
        tok = tokens[idx]
        if tok.casefold() in gazetteer:
            return True
        return tok[:1].isupper() and (allow_leading_cap or idx > 0)

    while i < n:
        if _entityish(i, allow_leading_cap=False):
            j = i + 1
            while j < n and _entityish(j, allow_leading_cap=True):
                j += 1
            spans.append((i, j))
            i = j
        else:
            i += 1
    return tuple(spans)


def count_hop_markers(
    text: str, keywords: Sequence[str] = DEFAULT_HOP_KEYWORDS
) -> int:
    """Count non-overlapping multi-hop indicator phrases in the text."""
    folded = text.casefold()
    total = 0
    for kw in keywords:
        total += len(re.findall(r"\b" + re.escape(kw) + r"\b", folded))
    return total


def build_query(
    id: str,
    text: str,
    dataset: Dataset = Dataset.OTHER,
    gazetteer: frozenset[str] = frozenset(),
    hop_keywords: Sequence[str] = DEFAULT_HOP_KEYWORDS,
) -> Query:
    """Tokenize text and run entity/hop detection to produce a Query."""
    tokens = tokenize(text)
    return Query(
        id=id,
        text=text,
        tokens=tokens,
        dataset=dataset,
        entity_spans=detect_entity_spans(tokens, gazetteer),
        hop_markers=count_hop_markers(text, hop_keywords),
    )


def structural_heuristic(q: Query, w: ComplexityWeights) -> float:
    """Entity-density and hop-density term of the complexity score.

    Returns ``w_sh1 * (n_entities / n_tokens) + w_sh2 * (n_hops / n_tokens)``;
    non-decreasing in entity and hop count for fixed length.
    """
    n = len(q.tokens)
    if n == 0:
        raise ValidationError(f"query {q.id!r} has no tokens")
    return w.w_sh1 * (len(q.entity_spans) / n) + w.w_sh2 * (q.hop_markers / n)


def compute_kappa(
    q: Query, salience: SalienceProvider, w: ComplexityWeights
) -> ComplexityBreakdown:
    """Score a query's complexity.

    ``length_norm`` is the token count over the frozen corpus maximum, clamped
    to [0, 1] for queries longer than anything seen in the pre-pass. The
    salience provider must return a value in [0, 1]; anything else is a
    contract violation.
    """
    n = len(q.tokens)
    if n == 0:
        raise ValidationError(f"query {q.id!r} has no tokens")
    s = salience(q.tokens)
    if not isinstance(s, (int, float)) or not math.isfinite(s) or not 0.0 <= s <= 1.0:
        raise ContractViolationError(
            f"salience provider returned {s!r}, expected a finite value in [0, 1]"
        )
    length_norm = min(1.0, n / w.max_corpus_len)
    structural = structural_heuristic(q, w)
    kappa = (w.w_a * s + w.w_l * length_norm) * (1.0 + structural)
    return ComplexityBreakdown(
        salience=float(s),
        length_norm=length_norm,
        structural=structural,
        kappa=kappa,
        rule_suggestion=None,
        kappa_eff=kappa,
    )


def effective_complexity(
    b: ComplexityBreakdown,
    rule_hint: PathHint | None,
    hint_delta: float = DEFAULT_HINT_DELTA,
) -> ComplexityBreakdown:
    """Fold an optional rule-based path hint into the score.

    A symbolic hint lowers the effective score by ``hint_delta`` (clamped at
    zero), a neural hint raises it by the same amount (no upper clamp), and a
    hybrid hint leaves it unchanged. Without a hint the effective score equals
    the raw score.
    """
    if rule_hint is None:
        return replace(b, rule_suggestion=None, kappa_eff=b.kappa)
    if rule_hint is PathHint.PREFER_SYMBOLIC:
        eff = max(0.0, b.kappa - hint_delta)
    elif rule_hint is PathHint.PREFER_NEURAL:
        eff = b.kappa + hint_delta
    else:
        eff = b.kappa
    return replace(b, rule_suggestion=rule_hint, kappa_eff=eff)


def max_token_count(queries: Iterable[Query]) -> int:
    """Corpus pre-pass: maximum token count over all queries (>= 1)."""
    best = 0
    for q in queries:
        best = max(best, len(q.tokens))
    return max(best, 1)


PROFILE_COLUMNS = ("id", "salience", "length_norm", "structural", "kappa", "kappa_eff")


def profile_corpus(
    in_path: str,
    out_path: str,
    salience: SalienceProvider | None = None,
    weights: ComplexityWeights | None = None,
    gazetteer: frozenset[str] = frozenset(),
) -> tuple[int, int, int]:
    """Score a line-delimited query file and write a complexity-profile CSV.

    Input lines are JSON objects with ``id``, ``text`` and an optional
    ``dataset`` tag. When ``weights`` is not given, the maximum token count is
    computed in a first pass and frozen for the run. Unparseable or empty
    records are skipped with a logged diagnostic.

    Returns ``(rows_written, frozen_max_len, skipped)``.
    """
    salience = salience or LexicalSalience()
    queries: list[Query] = []
    skipped = 0
    with open(in_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                dataset = Dataset(rec.get("dataset", Dataset.OTHER.value))
                q = build_query(str(rec["id"]), rec["text"], dataset, gazetteer)
            except (KeyError, ValueError, TypeError) as exc:
                logger.warning("skipping line %d of %s: %s", line_no, in_path, exc)
                skipped += 1
                continue
            if not q.tokens:
                logger.warning("skipping line %d of %s: no tokens", line_no, in_path)
                skipped += 1
                continue
            queries.append(q)

    if weights is None:
        weights = ComplexityWeights(max_corpus_len=max_token_count(queries))

    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PROFILE_COLUMNS)
        for q in queries:
            b = compute_kappa(q, salience, weights)
            writer.writerow(
                [q.id, b.salience, b.length_norm, b.structural, b.kappa, b.kappa_eff]
            )
    return len(queries), weights.max_corpus_len, skipped
