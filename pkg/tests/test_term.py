import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellwp import freedec, perm
from ellwp.term import (
    E,
    Gen,
    GroupWord,
    Identity,
    Inverse,
    Join,
    JoinOfMeets,
    Meet,
    Product,
    ParseError,
    UnknownGenerator,
    Z2Element,
    abs_,
    combine_relations,
    eval_z2,
    generators,
    iter_terms,
    join,
    meet,
    normalize,
    parse,
    power,
    product,
    size,
    substitute,
    to_text,
)

x, y, z = Gen("x"), Gen("y"), Gen("z")


def terms(gens=("x", "y"), max_leaves=6):
    leaf = st.sampled_from([E] + [Gen(g) for g in gens])

    def extend(children):
        return st.one_of(
            children.map(Inverse),
            st.tuples(children, children).map(lambda ab: product(*ab)),
            st.tuples(children, children).map(lambda ab: join(*ab)),
            st.tuples(children, children).map(lambda ab: meet(*ab)),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def w(*letters):
    return GroupWord.reduce(letters)


# --- parsing and printing


def test_parse_identity():
    assert parse("e") == Identity()


def test_parse_join_with_inverse():
    assert parse("x \\/ x^-1") == Join((x, Inverse(x)))


def test_parse_meet_then_product():
    assert parse("(x /\\ y) z") == Product((Meet((x, y)), z))


def test_parse_precedence_and_sugar():
    assert parse("x y \\/ z /\\ e") == join(product(x, y), meet(z, E))
    assert parse("x^3") == product(x, x, x)
    assert parse("x^-2") == product(Inverse(x), Inverse(x))
    assert parse("x^0") == E
    assert parse("abs(x)") == abs_(x)
    assert parse("conj(x, y)") == product(Inverse(y), x, y)
    assert parse("comm(x, y)") == product(Inverse(x), Inverse(y), x, y)
    assert parse("(x y)^-1") == Inverse(product(x, y))


def test_parse_identifiers_with_digits_and_underscores():
    assert parse("g_x_1 a0") == product(Gen("g_x_1"), Gen("a0"))


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        parse("x \\/ (y")
    assert info.value.pos == 7


def test_parse_rejects_trailing_garbage():
    with pytest.raises(ParseError):
        parse("x )")


def test_unknown_generator():
    with pytest.raises(UnknownGenerator):
        parse("x y", alphabet=["x"])


@given(terms())
def test_print_parse_round_trip(t):
    assert parse(to_text(t)) == t


@given(terms())
def test_printer_is_stable_on_normalized_text(t):
    text = str(normalize(t))
    assert to_text(parse(text)) == text


# --- smart constructors


def test_constructors_flatten():
    assert product(x, product(y, z)) == Product((x, y, z))
    # identity factors are syntax and survive until normalization
    assert product(x, E) == Product((x, E))
    assert product() == E
    assert join(x, join(y, z)) == Join((x, y, z))
    assert meet(x) == x
    assert power(x, 0) == E


def test_abs_examples():
    assert abs_(x) == Join((x, Inverse(x)))
    assert normalize(abs_(E)) == normalize(E)
    assert abs_(meet(x, E)) == Join((meet(x, E), Inverse(meet(x, E))))


def test_combine_relations_examples():
    assert combine_relations([x]) == abs_(x)
    assert combine_relations([x, y]) == join(abs_(x), abs_(y))
    assert normalize(combine_relations([E, E])) == normalize(E)
    with pytest.raises(ValueError):
        combine_relations([])


def test_generators_size_substitute():
    t = parse("x (y \\/ e)")
    assert generators(t) == {"x", "y"}
    assert size(parse("x \\/ y^-1")) == 4
    assert substitute(t, {"y": E}) == product(x, join(E, E))


# --- group words


def test_group_word_reduction():
    assert w(("x", 1), ("x", -1)) == GroupWord()
    assert w(("x", 2), ("y", 1), ("y", -1), ("x", 1)).letters == (("x", 3),)
    assert len(w(("x", -2), ("y", 3))) == 5
    with pytest.raises(ValueError):
        GroupWord((("x", 1), ("x", 1)))


@given(st.lists(st.tuples(st.sampled_from("xy"), st.sampled_from([1, -1])), max_size=12))
def test_group_word_inverse(letters):
    u = GroupWord.reduce(letters)
    assert (u * u.inverse()).is_identity()
    assert normalize(u.to_term()) == JoinOfMeets(((u,),))


# --- normal form


def test_normalize_distributes_products_over_joins():
    nf = normalize(parse("x (y \\/ z)"))
    assert nf.rows == ((w(("x", 1), ("y", 1)),), (w(("x", 1), ("z", 1)),))


def test_normalize_de_morgan():
    nf = normalize(parse("(x \\/ y)^-1"))
    assert nf.rows == ((w(("x", -1)), w(("y", -1))),)


def test_normalize_free_reduction():
    assert normalize(parse("x x^-1")).rows == ((GroupWord(),),)


def test_normalize_absorption():
    # x \/ (x /\ y) = x
    assert normalize(parse("x \\/ (x /\\ y)")).rows == ((w(("x", 1)),),)


@given(terms(max_leaves=5))
def test_normalize_idempotent(t):
    nf = normalize(t)
    assert normalize(nf.to_term()) == nf


@settings(max_examples=40, deadline=None)
@given(terms(max_leaves=5), st.integers(0, 10**6))
def test_normalize_preserves_value_in_pl_model(t, seed):
    rng = random.Random(seed)
    assignment = perm.random_assignment(rng, ["x", "y"])
    lhs = perm.term_map(t, assignment)
    rhs = perm.term_map(normalize(t).to_term(), assignment)
    assert lhs == rhs


# --- one-generator oracle


def test_eval_z2_generator():
    assert eval_z2(x) == Z2Element(1, -1)


def test_eval_z2_join_identity():
    assert eval_z2(parse("x \\/ e")) == Z2Element(1, 0)


def test_eval_z2_product_of_parts():
    assert eval_z2(parse("(x \\/ e)(x /\\ e)")) == Z2Element(1, -1)
    assert freedec.decide(parse("(x \\/ e)(x /\\ e) x^-1")).is_identity


def test_eval_z2_rejects_two_generators():
    with pytest.raises(ValueError):
        eval_z2(parse("x y"))


@given(terms(gens=("x",), max_leaves=6))
def test_eval_z2_is_a_homomorphism_of_the_normal_form(t):
    assert eval_z2(t) == eval_z2(normalize(t).to_term())


@settings(max_examples=50, deadline=None)
@given(terms(max_leaves=5), st.integers(0, 10**6))
def test_abs_is_positive_in_pl_model(t, seed):
    rng = random.Random(seed)
    assignment = perm.random_assignment(rng, ["x", "y"])
    m = perm.term_map(abs_(t), assignment)
    for k in range(0, 65):
        q = Fraction(k, 4)
        assert m(q) >= q


# --- enumeration


def _count_terms(n_leaves, max_nodes):
    # exactly-n-node trees: inverse of an (n-1)-tree, or one of three binary ops
    exact = {1: n_leaves}
    for n in range(2, max_nodes + 1):
        exact[n] = exact[n - 1] + 3 * sum(exact[a] * exact[n - 1 - a] for a in range(1, n - 1))
    return sum(exact.values())


def test_iter_terms_counts():
    assert sum(1 for _ in iter_terms(["x"], 7)) == _count_terms(2, 7) == 5618
    assert sum(1 for _ in iter_terms(["x", "y"], 5)) == _count_terms(3, 5)


def test_iter_terms_are_distinct_trees():
    ts = list(iter_terms(["x"], 5))
    assert len(set(ts)) == len(ts)
