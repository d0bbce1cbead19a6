"""Answer fusion for the hybrid path: type/value agreement, confidence
scaling, and low-confidence fallback.

Two answers agree when their types match and their values match (numbers
within a relative tolerance, spans after normalization, dates componentwise).
The fused confidence is piecewise: agreement boosts the weaker confidence,
value conflict discounts the stronger one, and a type mismatch discounts the
mean; the result is clamped to [0, 1]. When either side is missing or under
the minimum usable confidence, control falls back to the other side instead
of fusing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum

from .types import AnswerType, ContractViolationError, RoutePath, ValidationError

DateValue = tuple[int, int, int]

_ARTICLE_RE = re.compile(r"^(?:a|an|the)\s+")
_TERMINAL_PUNCT_RE = re.compile(r"[\.\,\;\:\!\?]+$")


@dataclass(frozen=True)
class Answer:
    """A candidate answer with its type, confidence and producing path."""

    value: float | str | DateValue
    answer_type: AnswerType
    confidence: float
    source: RoutePath

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.answer_type is AnswerType.NUMBER:
            ok = isinstance(self.value, (int, float)) and not isinstance(self.value, bool)
        elif self.answer_type is AnswerType.SPAN:
            ok = isinstance(self.value, str)
        else:
            ok = (
                isinstance(self.value, tuple)
                and len(self.value) == 3
                and all(isinstance(p, int) for p in self.value)
            )
        if not ok:
            raise ValidationError(
                f"value {self.value!r} does not match answer type {self.answer_type.value}"
            )


@dataclass(frozen=True)
class FusionPolicy:
    """Confidence adjustment factors and matching tolerances."""

    beta_agree: float = 1.2
    beta_conflict: float = 0.8
    beta_mismatch: float = 0.6
    min_confidence: float = 0.3
    numeric_tolerance: float = 1e-6

    def __post_init__(self) -> None:
        if not self.beta_mismatch <= self.beta_conflict <= self.beta_agree:
            raise ValidationError(
                "fusion factors must satisfy mismatch <= conflict <= agree"
            )


class FusionCase(str, Enum):
    AGREE = "agree"
    CONFLICT = "conflict"
    MISMATCH = "mismatch"
    FALLBACK_SYM = "fallback_sym"
    FALLBACK_NEUR = "fallback_neur"
    BOTH_FAILED = "both_failed"


@dataclass(frozen=True)
class FusionOutcome:
    answer: Answer | None
    c_fusion: float
    case: FusionCase
    type_match: bool = False
    value_match: bool = False


def normalize_span(s: str) -> str:
    """QA exact-match normalization: casefold, strip a leading article,
    strip terminal punctuation, collapse whitespace."""
    s = s.casefold().strip()
    s = _ARTICLE_RE.sub("", s)
    s = _TERMINAL_PUNCT_RE.sub("", s)
    return " ".join(s.split())


def type_match(a: Answer, b: Answer) -> bool:
    return a.answer_type is b.answer_type


def value_match(a: Answer, b: Answer, pol: FusionPolicy) -> bool:
    """Whether two same-typed answers carry the same value.

    Comparing across types is undefined and raises.
    """
    if not type_match(a, b):
        raise ContractViolationError(
            f"value comparison across types {a.answer_type.value} vs "
            f"{b.answer_type.value} is undefined"
        )
    if a.answer_type is AnswerType.NUMBER:
        x, y = float(a.value), float(b.value)  # type: ignore[arg-type]
        if x == y:
            return True
        return abs(x - y) <= pol.numeric_tolerance * max(abs(x), abs(y))
    if a.answer_type is AnswerType.SPAN:
        return normalize_span(a.value) == normalize_span(b.value)  # type: ignore[arg-type]
    return a.value == b.value


def _winner(sym: Answer, neur: Answer) -> Answer:
    # Higher confidence wins; ties go to the symbolic side.
    return neur if neur.confidence > sym.confidence else sym


def fuse(sym: Answer, neur: Answer, pol: FusionPolicy | None = None) -> FusionOutcome:
    """Combine a symbolic-side and a neural-side answer.

    Agreement: fused confidence is the weaker side scaled by the agreement
    factor and the answer is the agreed value attributed to the hybrid path.
    Value conflict: the stronger side's value wins with the stronger
    confidence discounted. Type mismatch: the stronger side wins with the
    mean confidence discounted further. Confidence is clamped to 1.0.
    """
    pol = pol or FusionPolicy()
    tm = type_match(sym, neur)
    vm = value_match(sym, neur, pol) if tm else False
    if tm and vm:
        c = min(sym.confidence, neur.confidence) * pol.beta_agree
        c = min(1.0, c)
        chosen = _winner(sym, neur)
        answer = Answer(chosen.value, chosen.answer_type, c, RoutePath.HYBRID)
        return FusionOutcome(answer, c, FusionCase.AGREE, True, True)
    if tm:
        c = min(1.0, max(sym.confidence, neur.confidence) * pol.beta_conflict)
        chosen = _winner(sym, neur)
        return FusionOutcome(replace(chosen, confidence=c), c,
                             FusionCase.CONFLICT, True, False)
    c = min(1.0, ((sym.confidence + neur.confidence) / 2.0) * pol.beta_mismatch)
    chosen = _winner(sym, neur)
    return FusionOutcome(replace(chosen, confidence=c), c,
                         FusionCase.MISMATCH, False, False)


def fallback(
    sym: Answer | None, neur: Answer | None, pol: FusionPolicy | None = None
) -> FusionOutcome:
    """Reconcile possibly-missing path outputs.

    Both sides present and usable (confidence at or above the minimum)
    delegates to ``fuse``. One usable side is returned as a fallback.
    Neither usable yields the best available answer, possibly none, with the
    best available confidence.
    """
    pol = pol or FusionPolicy()
    sym_ok = sym is not None and sym.confidence >= pol.min_confidence
    neur_ok = neur is not None and neur.confidence >= pol.min_confidence
    if sym_ok and neur_ok:
        assert sym is not None and neur is not None
        return fuse(sym, neur, pol)
    if sym_ok:
        assert sym is not None
        return FusionOutcome(sym, sym.confidence, FusionCase.FALLBACK_SYM)
    if neur_ok:
        assert neur is not None
        return FusionOutcome(neur, neur.confidence, FusionCase.FALLBACK_NEUR)
    candidates = [a for a in (sym, neur) if a is not None]
    if not candidates:
        return FusionOutcome(None, 0.0, FusionCase.BOTH_FAILED)
    best = max(candidates, key=lambda a: a.confidence)
    return FusionOutcome(best, best.confidence, FusionCase.BOTH_FAILED)


def exact_match(a: Answer, gold: Answer, pol: FusionPolicy | None = None) -> bool:
    """Correctness check against a gold answer: types equal, values equal
    under the same normalization used for fusion."""
    pol = pol or FusionPolicy()
    if not type_match(a, gold):
        return False
    return value_match(a, gold, pol)
