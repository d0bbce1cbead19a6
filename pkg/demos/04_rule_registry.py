"""
Pattern rules: matching, path hints, and guided chunk scoring
=============================================================

Loads the built-in exemplar rules, matches a few question texts, shows the
majority-vote path hint, and scores retrieval chunks with the rule boost
term blended into embedding and supporting-fact signals.
"""

from adaptroute import exemplar_registry, match_rules, score_chunk, suggest_path
from adaptroute.rules import HashedEmbedding, revalidate_rules

registry = exemplar_registry()
print(f"registry holds {len(registry)} rules\n")

for text in (
    "how many players scored in the second half",
    "how many yards difference from midfield did they gain",
    "who threw the longest pass of the game",
):
    matches = match_rules(text, registry)
    names = [f"{m.rule.rule_type.value}({m.captures[0] if m.captures else ''})"
             for m in matches]
    hint = suggest_path(matches)
    print(f"{text:<55} -> {', '.join(names) or 'no match'}")
    print(f"{'':55}    hint: {hint.value if hint else 'none'}")

# chunk scoring: the boost term counts matching rule patterns in the chunk
emb = HashedEmbedding()
query = "how many touchdowns were scored"
chunks = [
    "the team scored three touchdowns and kicked one field goal",
    "how many yards difference from the previous drive remained",
    "attendance figures were not released until the following week",
]
print("\nchunk scores (0.6*sim + 0.3*sf + 0.1*boost):")
for chunk in chunks:
    sim = emb.similarity(query, chunk)
    score = score_chunk(sim, support_fact=0.5, text=chunk, reg=registry)
    print(f"  sim={sim:.3f} boost={score.boost} total={score.total:.3f}  | {chunk[:48]}")

# support counts must be re-earned over a new corpus
corpus = ["how many points were scored"] * 4 + ["unrelated sentence"]
kept, dropped = revalidate_rules(registry.rules(), corpus, min_support=4)
print(f"\nrevalidation over a tiny corpus: kept {len(kept)}, dropped {len(dropped)}")
