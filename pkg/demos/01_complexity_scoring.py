"""
Scoring query complexity
========================

Walks from raw text to the routable complexity score: tokens, entities and
hop markers, the lexical salience proxy, and the effective score once a
pattern rule chimes in with a path suggestion.
"""

from adaptroute import build_query, compute_kappa, effective_complexity
from adaptroute.complexity import ComplexityWeights, LexicalSalience
from adaptroute.types import PathHint

weights = ComplexityWeights(max_corpus_len=48)
salience = LexicalSalience()

texts = [
    "what was the final score",
    "how many field goals did Dallas kick in the second quarter of the 2004 "
    "season opener played at Riverside stadium",
    "who was the director of the film that won the academy award for best "
    "picture in 1994 and in what year was the same director born before the "
    "ceremony took place in Georgetown after the nominations were announced",
]

for text in texts:
    q = build_query("demo", text)
    b = compute_kappa(q, salience, weights)
    print(f"{text[:58]:<60} tokens={len(q.tokens):>2} entities={len(q.entity_spans)} "
          f"hops={q.hop_markers}")
    print(f"  salience={b.salience:.3f} length={b.length_norm:.3f} "
          f"structural={b.structural:.4f} -> kappa={b.kappa:.3f}")

# a count-style question usually carries a symbolic path suggestion from the
# rule registry; the hint nudges the effective score down, never below zero
q = build_query("demo", texts[1])
b = compute_kappa(q, salience, weights)
hinted = effective_complexity(b, PathHint.PREFER_SYMBOLIC)
print(f"\nwith a symbolic hint: kappa={b.kappa:.3f} -> kappa_eff={hinted.kappa_eff:.3f}")
