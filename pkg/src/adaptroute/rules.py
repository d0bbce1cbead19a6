"""Pattern-rule registry with support counts, plus rule-guided chunk scoring.

Rules are regular expressions tagged with a type, an answer type, an
occurrence count over the corpus they were mined from (their support), and an
optional path suggestion. Under-supported rules are dropped at load time.
Matching feeds two consumers: path hints for the effective complexity score,
and a boost term in retrieval chunk scoring

    total = alpha * embedding_sim + beta * support_fact + gamma * boost

where boost counts how many rule patterns match the chunk (capped so it stays
on the same scale as the other terms).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .types import AnswerType, PathHint, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_MIN_SUPPORT = 5
DEFAULT_SCORE_WEIGHTS = (0.6, 0.3, 0.1)
DEFAULT_BOOST_CAP = 10
DEFAULT_MATCH_BUDGET_S = 0.25


class RuleType(str, Enum):
    NUMBER = "number"
    SPANS = "spans"
    COUNT = "count"
    DIFFERENCE = "difference"
    ENTITY_ROLE = "entity_role"
    OTHER = "other"


@dataclass(frozen=True)
class Rule:
    """One pattern rule. The pattern must compile; support is the rule's
    occurrence count over its source corpus."""

    id: str
    rule_type: RuleType
    pattern: str
    support: int
    answer_type: AnswerType = AnswerType.SPAN
    suggested_path: PathHint | None = None
    compiled: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.support < 0:
            raise ValidationError(f"rule {self.id!r}: support must be >= 0")
        try:
            object.__setattr__(self, "compiled", re.compile(self.pattern))
        except re.error as exc:
            raise ValidationError(f"rule {self.id!r}: bad pattern: {exc}") from exc


@dataclass(frozen=True)
class RuleMatch:
    rule: Rule
    captures: tuple[str, ...]
    span: tuple[int, int]


@dataclass
class LoadReport:
    kept: int = 0
    dropped_support: int = 0
    rejected_malformed: list[tuple[int, str]] = field(default_factory=list)
    rejected_duplicate: int = 0


class RuleRegistry:
    """Immutable-after-load collection of rules, indexed by rule type and
    answer type. Duplicate (type, pattern) pairs are rejected."""

    def __init__(self, min_support: int = DEFAULT_MIN_SUPPORT) -> None:
        self.min_support = min_support
        self._rules: dict[str, Rule] = {}
        self._by_type: dict[RuleType, list[Rule]] = {}
        self._by_answer: dict[AnswerType, list[Rule]] = {}
        self._keys: set[tuple[RuleType, str]] = set()
        self.load_report = LoadReport()

    def __len__(self) -> int:
        return len(self._rules)

    def __iter__(self):
        return iter(self.rules())

    def rules(self) -> list[Rule]:
        """All rules in deterministic (id) order."""
        return [self._rules[k] for k in sorted(self._rules)]

    def by_type(self, rule_type: RuleType) -> list[Rule]:
        return sorted(self._by_type.get(rule_type, []), key=lambda r: r.id)

    def by_answer_type(self, answer_type: AnswerType) -> list[Rule]:
        return sorted(self._by_answer.get(answer_type, []), key=lambda r: r.id)

    def add(self, rule: Rule) -> bool:
        """Add one rule; returns False (and counts it) if it is a duplicate
        or under-supported."""
        key = (rule.rule_type, rule.pattern)
        if key in self._keys:
            self.load_report.rejected_duplicate += 1
            logger.warning("duplicate rule (%s, %r) rejected", rule.rule_type.value,
                           rule.pattern)
            return False
        if rule.support < self.min_support:
            self.load_report.dropped_support += 1
            return False
        if rule.id in self._rules:
            self.load_report.rejected_duplicate += 1
            logger.warning("duplicate rule id %r rejected", rule.id)
            return False
        self._rules[rule.id] = rule
        self._keys.add(key)
        self._by_type.setdefault(rule.rule_type, []).append(rule)
        self._by_answer.setdefault(rule.answer_type, []).append(rule)
        self.load_report.kept += 1
        return True


def _rule_from_record(rec: dict) -> Rule:
    return Rule(
        id=str(rec["id"]),
        rule_type=RuleType(rec["type"]),
        pattern=rec["pattern"],
        support=int(rec["support"]),
        answer_type=AnswerType(rec.get("answer_type", AnswerType.SPAN.value)),
        suggested_path=PathHint(rec["suggested_path"]) if rec.get("suggested_path") else None,
    )


def load_rules(path: str, min_support: int = DEFAULT_MIN_SUPPORT) -> RuleRegistry:
    """Load a line-delimited JSON rule file.

    Records failing to parse or compile are rejected with a line-numbered
    diagnostic on the registry's load report; under-supported and duplicate
    records are dropped and counted.
    """
    reg = RuleRegistry(min_support=min_support)
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rule = _rule_from_record(json.loads(line))
            except (KeyError, TypeError, ValueError, ValidationError) as exc:
                reg.load_report.rejected_malformed.append((line_no, str(exc)))
                logger.warning("%s:%d: rejected rule record: %s", path, line_no, exc)
                continue
            reg.add(rule)
    return reg


def save_rules(registry: RuleRegistry | Iterable[Rule], path: str) -> int:
    """Write rules as line-delimited JSON; returns the number written."""
    rules = registry.rules() if isinstance(registry, RuleRegistry) else list(registry)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in rules:
            rec = {
                "id": r.id,
                "type": r.rule_type.value,
                "pattern": r.pattern,
                "support": r.support,
                "answer_type": r.answer_type.value,
                "suggested_path": r.suggested_path.value if r.suggested_path else None,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            n += 1
    return n


def match_rules(
    text: str,
    reg: RuleRegistry,
    budget_s: float | None = DEFAULT_MATCH_BUDGET_S,
) -> list[RuleMatch]:
    """Every rule whose pattern matches the text, in rule-id order.

    Each matching rule contributes one entry carrying the first match's
    capture groups and character span. A rule whose scan exceeds the per-rule
    time budget has its result discarded and logged (guard against
    pathological backtracking); pass ``budget_s=None`` to disable.
    """
    out: list[RuleMatch] = []
    for rule in reg.rules():
        t0 = time.perf_counter()
        m = rule.compiled.search(text)
        if budget_s is not None and time.perf_counter() - t0 > budget_s:
            logger.warning(
                "rule %r exceeded the %.3fs match budget; skipped", rule.id, budget_s
            )
            continue
        if m is not None:
            out.append(RuleMatch(rule, tuple(g if g is not None else "" for g in m.groups()),
                                 m.span()))
    return out


@dataclass(frozen=True)
class ChunkScore:
    embedding_sim: float
    support_fact: float
    boost: int
    total: float


def score_chunk(
    embedding_sim: float,
    support_fact: float,
    text: str,
    reg: RuleRegistry,
    weights: tuple[float, float, float] = DEFAULT_SCORE_WEIGHTS,
    boost_cap: int = DEFAULT_BOOST_CAP,
) -> ChunkScore:
    """Blend embedding similarity, supporting-fact alignment and the count of
    matching rule patterns into one retrieval score."""
    if not -1.0 <= embedding_sim <= 1.0:
        raise ValidationError(f"embedding_sim must be in [-1, 1], got {embedding_sim}")
    if not 0.0 <= support_fact <= 1.0:
        raise ValidationError(f"support_fact must be in [0, 1], got {support_fact}")
    alpha, beta, gamma = weights
    raw_boost = len(match_rules(text, reg))
    boost = min(boost_cap, raw_boost)
    if raw_boost > boost_cap:
        logger.info("boost capped at %d (raw %d)", boost_cap, raw_boost)
    total = alpha * embedding_sim + beta * support_fact + gamma * boost
    return ChunkScore(embedding_sim, support_fact, boost, total)


def suggest_path(matches: Sequence[RuleMatch]) -> PathHint | None:
    """Majority vote over matched rules' path suggestions; ties and empty
    inputs yield no hint."""
    votes = Counter(
        m.rule.suggested_path for m in matches if m.rule.suggested_path is not None
    )
    if not votes:
        return None
    ranked = votes.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return None
    return ranked[0][0]


def count_support(rule: Rule, corpus: Iterable[str]) -> int:
    """Total occurrence count of a rule's pattern over a corpus."""
    total = 0
    for text in corpus:
        total += sum(1 for _ in rule.compiled.finditer(text))
    return total


def revalidate_rules(
    rules: Iterable[Rule],
    corpus: Sequence[str],
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> tuple[list[Rule], list[Rule]]:
    """Recount supports over a corpus and split rules into (kept, dropped).

    Kept rules carry their recomputed support. This is the statistical half
    of dynamic rule maintenance: patterns must keep earning their support.
    """
    kept: list[Rule] = []
    dropped: list[Rule] = []
    for r in rules:
        support = count_support(r, corpus)
        updated = Rule(r.id, r.rule_type, r.pattern, support, r.answer_type,
                       r.suggested_path)
        (kept if support >= min_support else dropped).append(updated)
    return kept, dropped


class HashedEmbedding:
    """Deterministic hashed bag-of-tokens embedding with cosine similarity.

    Stands in for a model embedding behind the same interface: stable across
    processes (token buckets come from a digest, not the salted builtin
    hash).
    """

    def __init__(self, dim: int = 256) -> None:
        if dim <= 0:
            raise ValidationError("dim must be positive")
        self.dim = dim

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2s(token.casefold().encode("utf-8"), digest_size=4)
        return int.from_bytes(digest.digest(), "big") % self.dim

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for token in re.findall(r"\w+", text):
            vec[self._bucket(token)] += 1.0
        return vec

    def similarity(self, a: str, b: str) -> float:
        va, vb = self.embed(a), self.embed(b)
        dot = sum(x * y for x, y in zip(va, vb))
        na = math.sqrt(sum(x * x for x in va))
        nb = math.sqrt(sum(y * y for y in vb))
        if na == 0.0 or nb == 0.0:
            return 0.0
        return dot / (na * nb)


def exemplar_rules() -> list[Rule]:
    """The built-in exemplar rule set for discrete-reasoning questions.

    Six mined-style patterns spanning the number, span, count, difference and
    entity-role families, with representative support counts. Count and
    difference questions carry a symbolic path suggestion since they resolve
    by direct extraction and arithmetic.
    """
    return [
        Rule("r001", RuleType.NUMBER,
             r"Saints losing to Tampa Bay\s+([0-9][0-9,\.]*)\s+- 17",
             support=120, answer_type=AnswerType.NUMBER),
        Rule("r002", RuleType.NUMBER,
             r"in a Week\s+([0-9][0-9,\.]*)\s+rematch",
             support=55, answer_type=AnswerType.NUMBER),
        Rule("r003", RuleType.SPANS,
             r"26.20%\s+([\w\s]+?),",
             support=66, answer_type=AnswerType.SPAN),
        Rule("r004", RuleType.COUNT,
             r"\bhow\s+many\s+([\w]+?)s?\b",
             support=38, answer_type=AnswerType.NUMBER,
             suggested_path=PathHint.PREFER_SYMBOLIC),
        Rule("r005", RuleType.DIFFERENCE,
             r"\bdifference\s+([\w\s]+?)\b",
             support=10, answer_type=AnswerType.NUMBER,
             suggested_path=PathHint.PREFER_SYMBOLIC),
        Rule("r006", RuleType.ENTITY_ROLE,
             r"\bwho\s+(scored|threw|kicked)\s+([\w\s]+?)\b",
             support=25, answer_type=AnswerType.SPAN),
    ]


def exemplar_registry(min_support: int = DEFAULT_MIN_SUPPORT) -> RuleRegistry:
    reg = RuleRegistry(min_support=min_support)
    for r in exemplar_rules():
        reg.add(r)
    return reg
