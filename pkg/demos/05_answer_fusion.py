"""
Fusing symbolic and neural answers
==================================

The three agreement cases (agree, value conflict, type mismatch) with their
confidence scaling, plus the low-confidence fallback that returns a single
usable side instead of fusing.
"""

from adaptroute import Answer, fallback, fuse
from adaptroute.types import AnswerType, RoutePath


def show(label, outcome):
    value = outcome.answer.value if outcome.answer else None
    print(f"{label:<28} case={outcome.case.value:<13} "
          f"c_fusion={outcome.c_fusion:.2f} value={value!r}")


num = lambda v, c, src: Answer(float(v), AnswerType.NUMBER, c, src)
span = lambda v, c, src: Answer(v, AnswerType.SPAN, c, src)

show("both say 30", fuse(num(30, 0.8, RoutePath.SYMBOLIC), num(30, 0.9, RoutePath.NEURAL)))
show("30 vs 17", fuse(num(30, 0.8, RoutePath.SYMBOLIC), num(17, 0.9, RoutePath.NEURAL)))
show("number vs span", fuse(num(30, 0.6, RoutePath.SYMBOLIC),
                            span("thirty", 0.8, RoutePath.NEURAL)))
show("certain agreement", fuse(num(5, 1.0, RoutePath.SYMBOLIC), num(5, 1.0, RoutePath.NEURAL)))

print()
show("symbolic side failed", fallback(None, num(12, 0.7, RoutePath.NEURAL)))
show("neural too weak", fallback(num(12, 0.8, RoutePath.SYMBOLIC),
                                 num(40, 0.1, RoutePath.NEURAL)))
show("both under threshold", fallback(num(12, 0.2, RoutePath.SYMBOLIC),
                                      num(40, 0.25, RoutePath.NEURAL)))

# span values agree after normalization: casefold, articles, punctuation
agreed = fuse(span("Robert Zemeckis", 0.8, RoutePath.SYMBOLIC),
              span("robert zemeckis.", 0.7, RoutePath.NEURAL))
print(f"\nnormalized spans agree: case={agreed.case.value}, value={agreed.answer.value!r}")
