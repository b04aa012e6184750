"""Random small programs for the property suites.

Programs are built as source text over a fixed signature: x, y in range(3),
a flag b and loop counters i, j (one per nesting level). Loops are bounded for-loops, so every program
terminates with residual 0.
"""
from hypothesis import strategies as st

HEADER = """program rnd
var x: range(3) = 0
var y: range(3) = 0
var b: bool = false
var i: range(3) = 0
var j: range(3) = 0
begin
"""

ints = st.deferred(lambda: st.one_of(
    st.sampled_from(["x", "y", "0", "1", "2"]),
    st.tuples(ints, st.sampled_from(["+", "*", "-"]), ints).map(lambda t: f"(({t[0]} {t[1]} {t[2]}) % 3)"),
))
small_ints = st.sampled_from(["x", "y", "0", "1", "2", "((x + y) % 3)", "((x * 2) % 3)", "((y + 1) % 3)"])
bools = st.deferred(lambda: st.one_of(
    st.sampled_from(["b", "true", "false"]),
    st.tuples(small_ints, st.sampled_from(["=", "!=", "<", "<="]), small_ints).map(lambda t: f"{t[0]} {t[1]} {t[2]}"),
    bools.map(lambda e: f"!({e})"),
    st.tuples(bools, st.sampled_from(["&&", "||"]), bools).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
))

samples = st.sampled_from([
    "x <$ uniform(range(3));", "y <$ uniform(range(3));", "x <$ uniform{0, 2};",
    "y <$ uniform{1, 2};", "b <$ flip(1/3);", "b <$ flip(1/2);", "b <$ uniform(bool);",
])


def _stmt(depth):
    leaves = st.one_of(
        samples,
        st.tuples(st.sampled_from(["x", "y"]), small_ints).map(lambda t: f"{t[0]} := {t[1]};"),
        bools.map(lambda e: f"b := {e};"),
        st.just("skip;"),
    )
    if depth == 0:
        return leaves
    sub = st.lists(_stmt(depth - 1), min_size=1, max_size=2).map(" ".join)
    return st.one_of(
        leaves,
        st.tuples(bools, sub, sub).map(lambda t: f"if {t[0]} {{ {t[1]} }} else {{ {t[2]} }}"),
        sub.map(lambda s, c="ij"[2 - depth]: f"for {c} = 0 to 1 {{ {s} }}"),
    )


bodies = st.lists(_stmt(2), min_size=1, max_size=4).map(lambda ss: "\n".join("  " + s for s in ss))
programs = bodies.map(lambda b: HEADER + b + "\nend\n")
straight_bodies = st.lists(_stmt(0), min_size=1, max_size=5).map(lambda ss: "\n".join("  " + s for s in ss))
straight_programs = straight_bodies.map(lambda b: HEADER + b + "\nend\n")


def rationals(max_den=12):
    return st.fractions(min_value=0, max_value=1, max_denominator=max_den)


@st.composite
def distributions(draw, carrier=5, proper=False):
    """A SubDist over {0..k-1} (k <= carrier) with small denominators."""
    from fractions import Fraction
    from couplecheck.semantics import SubDist
    k = draw(st.integers(1, carrier))
    weights = draw(st.lists(st.integers(0, 6), min_size=k, max_size=k))
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    scale = Fraction(1) if proper else draw(st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(3, 4)]))
    return SubDist({i: Fraction(w, total) * scale for i, w in enumerate(weights) if w})
