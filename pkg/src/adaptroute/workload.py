"""Synthetic workloads and workload file IO.

The default mixed workload blends three question shapes: short lookups, mid
-length discrete-reasoning questions (counts, differences), and long
multi-hop questions. Template parameters are calibrated so the resulting
complexity scores populate the three routing regions in roughly the
proportions seen in real traces: a thin sliver of trivially simple queries,
a majority mid band, and a large complex tail.

Also hosts the complexity-vs-latency sample generator used to validate the
statistics pipeline: latency follows ``1.85 + 0.1 * kappa (+ 0.23 if
hybrid) + N(0, 0.4^2)`` over a wide complexity population.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import numpy as np

from .complexity import Query, build_query
from .fusion import Answer
from .types import AnswerType, Dataset, RoutePath, ValidationError

DEFAULT_MAX_CORPUS_LEN = 48


@dataclass(frozen=True)
class WorkloadItem:
    query: Query
    gold: Answer | None = None


_TEAMS = (
    "Green Bay", "Tampa Bay", "Dallas", "Chicago", "Denver", "Seattle",
    "New Orleans", "Kansas City",
)
_PEOPLE = (
    "Robert Zemeckis", "Ava Duvernay", "James Cameron", "Greta Gerwig",
    "Sofia Coppola", "Jordan Peele",
)
_THINGS = ("touchdowns", "field goals", "interceptions", "completions", "penalties")
_PLACES = ("Springfield", "Riverside", "Fairview", "Georgetown")

_SIMPLE_TEMPLATES = (
    "what was the final score",
    "who won the match",
    "when did the game end",
    "what is the total now",
)

_MEDIUM_TEMPLATES = (
    "how many {thing} did {team} record in the second quarter of the {year} "
    "season opener played at {place} stadium",
    "how many more {thing} than {thing2} did {team} manage during the {year} "
    "championship game hosted in {place}",
    "what was the difference in {thing} between {team} and {team2} over the "
    "{year} regular season matchups in {place}",
)

_COMPLEX_TEMPLATES = (
    "who was the director of the film that won the academy award for best "
    "picture in {year} and in what year was the same director born before the "
    "ceremony took place in {place} after the nominations were announced",
    "which quarterback played for {team} and {team2} before joining the "
    "{year} roster and who also holds the franchise record for {thing} set "
    "after the same stadium in {place} reopened following renovations",
    "what is the name of the {place} architect who designed the library that "
    "opened before the {year} festival and who also planned the same riverside "
    "walkway connecting {place2} after the flood recovery program ended",
)


def _simple_item(i: int, rng: random.Random) -> WorkloadItem:
    text = rng.choice(_SIMPLE_TEMPLATES)
    q = build_query(f"q{i:05d}", text, Dataset.OTHER)
    gold = Answer(float(rng.randint(1, 40)), AnswerType.NUMBER, 1.0, RoutePath.HYBRID)
    return WorkloadItem(q, gold)


def _medium_item(i: int, rng: random.Random) -> WorkloadItem:
    template = rng.choice(_MEDIUM_TEMPLATES)
    team = rng.choice(_TEAMS)
    team2 = rng.choice([t for t in _TEAMS if t != team])
    thing = rng.choice(_THINGS)
    thing2 = rng.choice([t for t in _THINGS if t != thing])
    text = template.format(
        thing=thing, thing2=thing2, team=team, team2=team2,
        year=rng.randint(1998, 2015), place=rng.choice(_PLACES),
    )
    q = build_query(f"q{i:05d}", text, Dataset.DISCRETE_REASONING)
    gold = Answer(float(rng.randint(0, 8)), AnswerType.NUMBER, 1.0, RoutePath.HYBRID)
    return WorkloadItem(q, gold)


def _complex_item(i: int, rng: random.Random) -> WorkloadItem:
    template = rng.choice(_COMPLEX_TEMPLATES)
    place = rng.choice(_PLACES)
    place2 = rng.choice([p for p in _PLACES if p != place])
    team = rng.choice(_TEAMS)
    team2 = rng.choice([t for t in _TEAMS if t != team])
    text = template.format(
        team=team, team2=team2, thing=rng.choice(_THINGS),
        year=rng.randint(1988, 2012), place=place, place2=place2,
    )
    q = build_query(f"q{i:05d}", text, Dataset.MULTI_HOP)
    if rng.random() < 0.5:
        gold = Answer(rng.choice(_PEOPLE), AnswerType.SPAN, 1.0, RoutePath.HYBRID)
    else:
        gold = Answer((rng.randint(1930, 1990), rng.randint(1, 12), rng.randint(1, 28)),
                      AnswerType.DATE, 1.0, RoutePath.HYBRID)
    return WorkloadItem(q, gold)


def generate_mixed_workload(
    n: int,
    seed: int,
    simple_share: float = 0.03,
    medium_share: float = 0.54,
) -> list[WorkloadItem]:
    """Deterministic default workload: ``n`` queries in the calibrated mix.

    Shares are sampled, not exact quotas, so consecutive queries are
    independent draws; the complex share is the remainder.
    """
    if n < 0:
        raise ValidationError("n must be >= 0")
    if simple_share < 0 or medium_share < 0 or simple_share + medium_share > 1.0:
        raise ValidationError("shares must be non-negative and sum to <= 1")
    rng = random.Random(seed)
    items: list[WorkloadItem] = []
    for i in range(n):
        u = rng.random()
        if u < simple_share:
            items.append(_simple_item(i, rng))
        elif u < simple_share + medium_share:
            items.append(_medium_item(i, rng))
        else:
            items.append(_complex_item(i, rng))
    return items


def _gold_to_json(gold: Answer | None) -> dict | None:
    if gold is None:
        return None
    value = list(gold.value) if gold.answer_type is AnswerType.DATE else gold.value
    return {"type": gold.answer_type.value, "value": value}


def _gold_from_json(obj: dict | None) -> Answer | None:
    if obj is None:
        return None
    answer_type = AnswerType(obj["type"])
    value = obj["value"]
    if answer_type is AnswerType.DATE:
        value = tuple(int(v) for v in value)
    elif answer_type is AnswerType.NUMBER:
        value = float(value)
    return Answer(value, answer_type, 1.0, RoutePath.HYBRID)


def save_workload_jsonl(items: list[WorkloadItem], path: str) -> int:
    """Write a workload as line-delimited JSON records."""
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            rec = {
                "id": item.query.id,
                "text": item.query.text,
                "dataset": item.query.dataset.value,
                "gold": _gold_to_json(item.gold),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return len(items)


def load_workload_jsonl(path: str) -> list[WorkloadItem]:
    """Read a line-delimited workload file (id, text, dataset, optional gold)."""
    items: list[WorkloadItem] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                dataset = Dataset(rec.get("dataset", Dataset.OTHER.value))
                q = build_query(str(rec["id"]), rec["text"], dataset)
                gold = _gold_from_json(rec.get("gold"))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{line_no}: bad workload record: {exc}") from exc
            if not q.tokens:
                raise ValidationError(f"{path}:{line_no}: query has no tokens")
            items.append(WorkloadItem(q, gold))
    return items


def complexity_latency_sample(
    n: int = 1000,
    seed: int = 0,
    hybrid_share: float = 0.0,
    kappa_max: float = 8.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded (complexity, latency) sample from the calibrated latency model.

    Latency is ``1.85 + 0.1 * kappa + 0.23 * I[hybrid] + N(0, 0.4^2)``.
    Complexity is uniform on ``[0, kappa_max]``; the default width puts the
    model's linear signal at the same scale as its noise, which is the regime
    the statistics pipeline is validated in (correlation near 0.5).
    """
    if n < 3:
        raise ValidationError("n must be >= 3")
    rng = np.random.default_rng(seed)
    kappas = rng.uniform(0.0, kappa_max, size=n)
    hybrid = rng.random(n) < hybrid_share
    times = 1.85 + 0.1 * kappas + 0.23 * hybrid + rng.normal(0.0, 0.4, size=n)
    return kappas, times
