import random
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellwp.freedec import VerdictKind
from ellwp.term import E, Gen, GroupWord, eval_z2, parse, random_term, to_text
from ellwp.wreath import (
    GroupOracle,
    LexPoint,
    WreathElement,
    WreathProduct,
    factor_text,
    free_oracle,
    lex_w_decide,
    sum_factor,
    w_decide,
    w_decide_by_weight,
    weight,
    z2_oracle,
)

FREE = free_oracle(["g", "h"])
W = WreathProduct(FREE)
WZ = WreathProduct(z2_oracle("g"))


def rand_elem(rng, wp=W, gens=("g", "h", "c"), leaves=5):
    return wp.evaluate(random_term(rng, gens, rng.randint(1, leaves)))


# --- an independent model: W acting on Z x (Z + Z) on the right
#
# (n, v) . (base, k) = (n + k, v + base[n]), with G = Z + Z and g -> (1, -1)


def act(elem: WreathElement, point):
    n, v = point
    z = eval_z2(elem.entry(n))
    return n + elem.shift, (v[0] + z.m1, v[1] + z.m2)


def same_action(a, b, rng):
    for _ in range(30):
        p = (rng.randint(-6, 6), (rng.randint(-3, 3), rng.randint(-3, 3)))
        if act(a, p) != act(b, p):
            return False
    return True


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_multiplication_is_composition_of_actions(seed):
    rng = random.Random(seed)
    a, b = rand_elem(rng, WZ, ("g", "c")), rand_elem(rng, WZ, ("g", "c"))
    ab = WZ.mul(a, b)
    for _ in range(20):
        p = (rng.randint(-6, 6), (0, 0))
        assert act(ab, p) == act(b, act(a, p))
    assert same_action(WZ.mul(a, WZ.inv(a)), WZ.identity(), rng)


# --- arithmetic


def test_identity_products():
    assert W.mul(W.identity(), W.identity()) == WreathElement((), 0)
    assert W.mul(W.c(), W.c()) == WreathElement((), 2)


def test_conjugating_by_c_moves_base_up_one():
    v = W.evaluate(parse("conj(g, c)"))
    assert v.shift == 0 and v.support == [1]
    assert W.evaluate(parse("conj(g, c^-2)")).support == [-2]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_associativity_and_inverses(seed):
    rng = random.Random(seed)
    a, b, c = (rand_elem(rng, WZ, ("g", "c")) for _ in range(3))
    assert WZ.equal(WZ.mul(WZ.mul(a, b), c), WZ.mul(a, WZ.mul(b, c)))
    assert WZ.is_unit(WZ.mul(a, WZ.inv(a)))
    assert WZ.is_unit(WZ.mul(WZ.inv(a), a))


def test_join_examples():
    assert W.join(W.c(), W.identity()) == W.c()
    a = W.evaluate(parse("g c"))
    assert W.equal(W.join(a, a), a)
    x, y = W.element({0: Gen("g")}), W.element({0: Gen("h")})
    assert W.equal(W.join(x, y), W.element({0: parse("g \\/ h")}))


def test_join_of_singletons_is_componentwise_brute_force():
    # two-element supports: {0: u, 1: v} \/ {0: u', 1: v'} entrywise
    rng = random.Random(3)
    for _ in range(50):
        u, v, u2, v2 = (random_term(rng, ["g"], 2) for _ in range(4))
        a, b = WZ.element({0: u, 1: v}), WZ.element({0: u2, 1: v2})
        j = WZ.join(a, b)
        for idx, (p, q) in enumerate([(u, u2), (v, v2)]):
            zp, zq, zj = eval_z2(p), eval_z2(q), eval_z2(j.entry(idx))
            assert (zj.m1, zj.m2) == (max(zp.m1, zq.m1), max(zp.m2, zq.m2))


def _positive_by_definition(a: WreathElement) -> bool:
    if a.shift != 0:
        return a.shift > 0
    return all(eval_z2(t).m1 >= 0 and eval_z2(t).m2 >= 0 for _, t in a.base)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_order_matches_positive_cone(seed):
    rng = random.Random(seed)
    a = rand_elem(rng, WZ, ("g", "c"))
    assert WZ.leq(WZ.identity(), a) == _positive_by_definition(a)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_lattice_laws_and_translation_invariance(seed):
    rng = random.Random(seed)
    x, y, z, t = (rand_elem(rng, WZ, ("g", "c"), leaves=4) for _ in range(4))
    j, m = WZ.join(x, y), WZ.meet(x, y)
    assert WZ.leq(x, j) and WZ.leq(y, j) and WZ.leq(m, x) and WZ.leq(m, y)
    assert WZ.equal(WZ.join(x, WZ.meet(x, y)), x)
    assert WZ.equal(WZ.meet(x, WZ.join(y, z)), WZ.join(WZ.meet(x, y), WZ.meet(x, z)))
    lhs = WZ.mul(WZ.mul(x, WZ.join(y, z)), t)
    rhs = WZ.join(WZ.mul(WZ.mul(x, y), t), WZ.mul(WZ.mul(x, z), t))
    assert WZ.equal(lhs, rhs)


def test_free_group_arithmetic_small_cases():
    rng = random.Random(2)
    for _ in range(10):
        a, b, c = (rand_elem(rng, leaves=2) for _ in range(3))
        assert W.equal(W.mul(W.mul(a, b), c), W.mul(a, W.mul(b, c)))
        assert W.is_unit(W.mul(a, W.inv(a)))


# --- deciding


def test_relations_of_the_presentation_hold():
    assert w_decide(parse("c /\\ e"), FREE).is_identity
    for m in [-3, -1, 1, 2]:
        for a, b in [("g", "h"), ("g", "g")]:
            t = parse(f"abs(conj({a}, c^{m})) /\\ abs({b})")
            assert w_decide(t, FREE).is_identity
    assert not w_decide(parse("abs(g) /\\ abs(h)"), FREE).is_identity


def test_nonzero_weight_words_are_not_identity():
    rng = random.Random(1)
    for _ in range(50):
        letters = [(rng.choice("gh"), rng.choice([1, -1])) for _ in range(rng.randint(0, 5))]
        letters.append(("c", rng.choice([-3, -2, -1, 1, 2, 3])))
        rng.shuffle(letters)
        word = GroupWord.reduce(letters)
        assert weight(word, "c") != 0
        assert w_decide(word.to_term(), FREE).kind is VerdictKind.NOT_IDENTITY


def test_weights():
    assert weight(GroupWord.reduce([("c", 1), ("g", 1), ("c", -1)]), "c") == 0
    assert weight(GroupWord.reduce([("c", 2), ("g", 1)]), "c") == 2
    assert weight(GroupWord.gen("g"), "c") == 0


def test_sum_factor_example():
    t = parse("g_x_1 g_xp_2^-1 /\\ g_x_3")
    parts = sum_factor(t, {"g_x_1": "x", "g_x_3": "x", "g_xp_2": "xp"})
    assert to_text(parts["x"]) == "g_x_1 /\\ g_x_3"
    assert to_text(parts["xp"]) == "g_xp_2^-1 /\\ e"
    assert factor_text(parts) == "(g_x_1 /\\ g_x_3) (g_xp_2^-1 /\\ e)"


def test_sum_factor_trivial_cases():
    t = parse("g h \\/ h")
    assert sum_factor(t, {"g": "A", "h": "A"}) == {"A": parse("g h \\/ h")}
    assert sum_factor(E, {"g": "A", "h": "B"}) == {"A": E, "B": E}
    with pytest.raises(ValueError):
        sum_factor(t, {"g": "A"})


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_direct_and_weight_routes_agree(seed):
    rng = random.Random(seed)
    t = random_term(rng, ["g", "h", "c"], rng.randint(1, 7))
    assert w_decide(t, FREE).kind == w_decide_by_weight(t, FREE).kind


def test_lex_tower_relations():
    assert lex_w_decide(parse("abs(conj(a, c)) /\\ abs(a)"), FREE).is_identity
    assert lex_w_decide(parse("abs(conj(a, c^3)) /\\ abs(a)"), FREE).is_identity
    assert not lex_w_decide(parse("c^2"), FREE).is_identity
    assert not lex_w_decide(parse("abs(a) /\\ abs(conj(a, g))"), FREE).is_identity


def test_lex_tower_base_matches_oracle():
    rng = random.Random(4)
    for _ in range(40):
        t = random_term(rng, ["g", "h"], rng.randint(1, 4))
        assert lex_w_decide(t, FREE).is_identity == FREE.is_identity(t)


def test_g_infinitesimal_against_a_and_a_against_c():
    inner = WreathProduct(FREE, "a")
    outer = WreathProduct(inner, "c")
    for m in range(-5, 6):
        for g in ["g", "h"]:
            assert outer.leq(outer.evaluate(parse(f"{g}^{m}")), outer.evaluate(parse("a")))
        assert outer.leq(outer.evaluate(parse(f"a^{m}")), outer.evaluate(parse("c")))


def test_lex_points():
    assert LexPoint(y=0, x=5) < LexPoint(y=1, x=0)
    assert LexPoint(y=1, x=0) < LexPoint(y=1, x=2)


# --- oracles


def test_oracle_positivity_contract():
    assert FREE.is_positive(parse("abs(g)"))
    assert not FREE.is_positive(parse("g"))
    assert not FREE.is_positive(E)


def test_oracle_rejects_foreign_generators():
    with pytest.raises(ValueError):
        FREE.is_identity(parse("q"))


def test_oracle_is_thread_safe():
    calls = []
    lock = threading.Lock()

    def slow(t):
        with lock:
            calls.append(t)
        return FREE.is_identity(t)

    oracle = GroupOracle(["g", "h"], slow)
    terms = [parse(s) for s in ["g g^-1", "abs(g) /\\ e", "g h", "comm(g, h)"]] * 25
    with ThreadPoolExecutor(8) as pool:
        got = list(pool.map(oracle.is_identity, terms))
    assert got == [FREE.is_identity(t) for t in terms]


def test_shift_generator_clash():
    with pytest.raises(ValueError):
        WreathProduct(free_oracle(["c"]), "c")
