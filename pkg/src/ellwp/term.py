"""Term language for lattice-ordered groups.

Terms are immutable trees built from named generators with the group
operations (product, inverse, identity) and the lattice operations
(join, meet).  Group words are stored freely reduced with packed
exponents.  Every term can be brought to a join of meets of group words,
using two-sided distributivity of multiplication over the lattice
operations and ``(f \\/ g)^-1 = f^-1 /\\ g^-1``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, TypeVar

__all__ = [
    "LTerm",
    "Identity",
    "Gen",
    "Inverse",
    "Product",
    "Join",
    "Meet",
    "E",
    "product",
    "join",
    "meet",
    "inverse",
    "power",
    "abs_",
    "conj",
    "comm",
    "combine_relations",
    "GroupWord",
    "JoinOfMeets",
    "MeetString",
    "Z2Element",
    "ParseError",
    "UnknownGenerator",
    "parse",
    "to_text",
    "normalize",
    "generators",
    "size",
    "substitute",
    "fold",
    "eval_z2",
    "check_identifier",
    "iter_terms",
    "random_term",
]

RESERVED = frozenset({"e", "abs", "conj", "comm"})
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def check_identifier(name: str) -> str:
    if not isinstance(name, str) or not _IDENT.match(name):
        raise ValueError(f"invalid generator name: {name!r}")
    if name in RESERVED:
        raise ValueError(f"generator name {name!r} is reserved")
    return name


# ---------------------------------------------------------------------------
# Abstract syntax


class LTerm:
    """Base class of the term tree.  Subclasses are frozen dataclasses."""

    __slots__ = ()

    def __mul__(self, other: LTerm) -> LTerm:
        return product(self, other)

    def __or__(self, other: LTerm) -> LTerm:
        return join(self, other)

    def __and__(self, other: LTerm) -> LTerm:
        return meet(self, other)

    def inv(self) -> LTerm:
        return inverse(self)

    def __pow__(self, k: int) -> LTerm:
        return power(self, k)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Identity(LTerm):
    def __repr__(self) -> str:
        return "Identity()"


@dataclass(frozen=True)
class Gen(LTerm):
    name: str

    def __repr__(self) -> str:
        return f"Gen({self.name!r})"


@dataclass(frozen=True)
class Inverse(LTerm):
    child: LTerm


@dataclass(frozen=True)
class Product(LTerm):
    children: tuple[LTerm, ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("Product needs at least two children")


@dataclass(frozen=True)
class Join(LTerm):
    children: tuple[LTerm, ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("Join needs at least two children")


@dataclass(frozen=True)
class Meet(LTerm):
    children: tuple[LTerm, ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("Meet needs at least two children")


E = Identity()


def _flatten(kind: type, terms: Iterable[LTerm]) -> list[LTerm]:
    out: list[LTerm] = []
    for t in terms:
        if isinstance(t, kind):
            out.extend(t.children)  # type: ignore[attr-defined]
        else:
            out.append(t)
    return out


def product(*terms: LTerm) -> LTerm:
    """Flattened product; identity factors are kept (they are syntax)."""
    items = _flatten(Product, terms)
    if not items:
        return E
    if len(items) == 1:
        return items[0]
    return Product(tuple(items))


def join(*terms: LTerm) -> LTerm:
    items = _flatten(Join, terms)
    if not items:
        raise ValueError("join of nothing")
    if len(items) == 1:
        return items[0]
    return Join(tuple(items))


def meet(*terms: LTerm) -> LTerm:
    items = _flatten(Meet, terms)
    if not items:
        raise ValueError("meet of nothing")
    if len(items) == 1:
        return items[0]
    return Meet(tuple(items))


def inverse(t: LTerm) -> LTerm:
    return Inverse(t)


def power(t: LTerm, k: int) -> LTerm:
    if k == 0:
        return E
    if k == 1:
        return t
    if k == -1:
        return Inverse(t)
    base = t if k > 0 else Inverse(t)
    return product(*([base] * abs(k)))


def abs_(t: LTerm) -> LTerm:
    """``|t| = t \\/ t^-1``."""
    return Join((t, Inverse(t)))


def conj(f: LTerm, g: LTerm) -> LTerm:
    """``g^-1 f g``."""
    return product(Inverse(g), f, g)


def comm(f: LTerm, g: LTerm) -> LTerm:
    """``f^-1 g^-1 f g``."""
    return product(Inverse(f), Inverse(g), f, g)


def combine_relations(ws: Sequence[LTerm]) -> LTerm:
    """Single relator equivalent to ``w = e`` for every ``w`` in *ws*."""
    if not ws:
        raise ValueError("combine_relations needs at least one relator")
    return join(*[abs_(w) for w in ws])


def generators(t: LTerm) -> frozenset[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Gen):
            out.add(s.name)
        elif isinstance(s, Inverse):
            stack.append(s.child)
        elif isinstance(s, (Product, Join, Meet)):
            stack.extend(s.children)
    return frozenset(out)


def size(t: LTerm) -> int:
    """Number of AST nodes."""
    if isinstance(t, (Identity, Gen)):
        return 1
    if isinstance(t, Inverse):
        return 1 + size(t.child)
    return 1 + sum(size(c) for c in t.children)  # type: ignore[attr-defined]


def substitute(t: LTerm, mapping: Mapping[str, LTerm]) -> LTerm:
    if isinstance(t, Gen):
        return mapping.get(t.name, t)
    if isinstance(t, Identity):
        return t
    if isinstance(t, Inverse):
        return Inverse(substitute(t.child, mapping))
    kids = [substitute(c, mapping) for c in t.children]  # type: ignore[attr-defined]
    if isinstance(t, Product):
        return product(*kids)
    if isinstance(t, Join):
        return join(*kids)
    return meet(*kids)


T = TypeVar("T")


def fold(
    t: LTerm,
    leaf: Callable[[str], T],
    identity: T,
    mul: Callable[[T, T], T],
    inv: Callable[[T], T],
    sup: Callable[[T, T], T],
    inf: Callable[[T, T], T],
) -> T:
    """Evaluate *t* homomorphically in an l-group given by its operations."""
    if isinstance(t, Identity):
        return identity
    if isinstance(t, Gen):
        return leaf(t.name)
    if isinstance(t, Inverse):
        return inv(fold(t.child, leaf, identity, mul, inv, sup, inf))
    vals = [fold(c, leaf, identity, mul, inv, sup, inf) for c in t.children]  # type: ignore[attr-defined]
    op = mul if isinstance(t, Product) else sup if isinstance(t, Join) else inf
    acc = vals[0]
    for v in vals[1:]:
        acc = op(acc, v)
    return acc


# ---------------------------------------------------------------------------
# Group words


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced group word with packed exponents, e.g. ``x^2 y^-1``."""

    letters: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        prev = None
        for name, k in self.letters:
            if k == 0 or name == prev:
                raise ValueError(f"word not freely reduced: {self.letters}")
            prev = name

    @classmethod
    def reduce(cls, letters: Iterable[tuple[str, int]]) -> GroupWord:
        out: list[list] = []
        for name, k in letters:
            if k == 0:
                continue
            if out and out[-1][0] == name:
                out[-1][1] += k
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([name, k])
        return cls(tuple((n, k) for n, k in out))

    @classmethod
    def gen(cls, name: str, k: int = 1) -> GroupWord:
        return cls.reduce([(name, k)])

    def __mul__(self, other: GroupWord) -> GroupWord:
        return GroupWord.reduce(itertools.chain(self.letters, other.letters))

    def inverse(self) -> GroupWord:
        return GroupWord(tuple((n, -k) for n, k in reversed(self.letters)))

    def __len__(self) -> int:
        return sum(abs(k) for _, k in self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def expand(self) -> list[tuple[str, int]]:
        """Letters with unit exponents, left to right."""
        out = []
        for name, k in self.letters:
            step = 1 if k > 0 else -1
            out.extend([(name, step)] * abs(k))
        return out

    def exponent_sum(self, name: str) -> int:
        return sum(k for n, k in self.letters if n == name)

    def sort_key(self) -> tuple:
        # identity sorts after every non-trivial word
        return (not self.letters, self.letters)

    def to_term(self) -> LTerm:
        if not self.letters:
            return E
        return product(*[power(Gen(n), k) for n, k in self.letters])

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return " ".join(n if k == 1 else f"{n}^{k}" for n, k in self.letters)


MeetString = tuple  # a non-empty tuple of GroupWord read as their meet


@dataclass(frozen=True)
class JoinOfMeets:
    """``\\/_i /\\_j w_ij`` with every ``w_ij`` a reduced group word.

    Rows are kept in a canonical order so that equal normal forms compare
    equal structurally.  Each row is a meet string.
    """

    rows: tuple[tuple[GroupWord, ...], ...]

    def __post_init__(self) -> None:
        if not self.rows or any(not r for r in self.rows):
            raise ValueError("JoinOfMeets needs non-empty rows")

    @classmethod
    def canonical(cls, rows: Iterable[Iterable[GroupWord]]) -> JoinOfMeets:
        sets = {frozenset(r) for r in rows}
        # absorption: a row whose words include another row's words is redundant
        kept = [s for s in sets if not any(o < s for o in sets)]
        ordered = sorted(
            (tuple(sorted(s, key=GroupWord.sort_key)) for s in kept),
            key=lambda r: [w.sort_key() for w in r],
        )
        return cls(tuple(ordered))

    @property
    def words(self) -> list[GroupWord]:
        return [w for r in self.rows for w in r]

    @property
    def meet_strings(self) -> tuple[tuple[GroupWord, ...], ...]:
        return self.rows

    def is_meet_string(self) -> bool:
        return len(self.rows) == 1

    def to_term(self) -> LTerm:
        return join(*[meet(*[w.to_term() for w in r]) for r in self.rows])

    def __str__(self) -> str:
        return to_text(self.to_term())


def _row_product(a: tuple[GroupWord, ...], b: tuple[GroupWord, ...]) -> tuple[GroupWord, ...]:
    return tuple({u * v for u in a for v in b})


def _dedupe_rows(rows: Iterable[Iterable[GroupWord]]) -> list[tuple[GroupWord, ...]]:
    """Distinct rows, dropping any row that contains another (absorption)."""
    sets = sorted({frozenset(r) for r in rows}, key=len)
    kept: list[frozenset] = []
    for s in sets:
        if not any(k <= s for k in kept):
            kept.append(s)
    return [tuple(s) for s in kept]


def _nf(t: LTerm) -> list[tuple[GroupWord, ...]]:
    if isinstance(t, Identity):
        return [(GroupWord(),)]
    if isinstance(t, Gen):
        return [(GroupWord(((t.name, 1),)),)]
    if isinstance(t, Join):
        return _dedupe_rows(r for c in t.children for r in _nf(c))
    if isinstance(t, Meet):
        acc = _nf(t.children[0])
        for c in t.children[1:]:
            rhs = _nf(c)
            acc = _dedupe_rows(a + b for a in acc for b in rhs)
        return acc
    if isinstance(t, Product):
        acc = _nf(t.children[0])
        for c in t.children[1:]:
            rhs = _nf(c)
            acc = _dedupe_rows(_row_product(a, b) for a in acc for b in rhs)
        return acc
    if isinstance(t, Inverse):
        rows = _nf(t.child)
        # (\/_i /\_j w_ij)^-1 = /\_i \/_j w_ij^-1, redistributed
        return _dedupe_rows(
            tuple(w.inverse() for w in choice) for choice in itertools.product(*rows)
        )
    raise TypeError(f"not a term: {t!r}")


def normalize(t: LTerm) -> JoinOfMeets:
    return JoinOfMeets.canonical(_nf(t))


# ---------------------------------------------------------------------------
# Printing

_PREC = {Join: 0, Meet: 1, Product: 2}


def _prec(t: LTerm) -> int:
    return _PREC.get(type(t), 3)


def _atom_power(t: LTerm) -> Optional[tuple[str, int]]:
    if isinstance(t, Gen):
        return t.name, 1
    if isinstance(t, Inverse) and isinstance(t.child, Gen):
        return t.child.name, -1
    return None


def to_text(t: LTerm) -> str:
    """Render *t* in the input grammar; ``parse(to_text(t)) == t``."""
    if isinstance(t, Identity):
        return "e"
    if isinstance(t, Gen):
        return t.name
    if isinstance(t, Inverse):
        if isinstance(t.child, Gen):
            return f"{t.child.name}^-1"
        return f"({to_text(t.child)})^-1"
    if isinstance(t, Product):
        parts = []
        kids = list(t.children)
        i = 0
        while i < len(kids):
            ap = _atom_power(kids[i])
            if ap is not None:
                j = i
                while j + 1 < len(kids) and kids[j + 1] == kids[i]:
                    j += 1
                n = (j - i + 1) * ap[1]
                parts.append(ap[0] if n == 1 else f"{ap[0]}^{n}")
                i = j + 1
                continue
            k = kids[i]
            parts.append(f"({to_text(k)})" if _prec(k) < 2 or isinstance(k, Product) else to_text(k))
            i += 1
        return " ".join(parts)
    sep = " \\/ " if isinstance(t, Join) else " /\\ "
    mine = _prec(t)
    return sep.join(
        f"({to_text(c)})" if _prec(c) <= mine else to_text(c) for c in t.children  # type: ignore[attr-defined]
    )


# ---------------------------------------------------------------------------
# Parsing


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnknownGenerator(ParseError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<join>\\/)|(?P<meet>/\\)|(?P<int>-?\d+)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<sym>[()^,]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        val = m.group(kind)
        toks.append((kind if kind != "sym" else val, val, m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text: str, alphabet: Optional[Iterable[str]]):
        self.toks = _tokenize(text)
        self.i = 0
        self.alphabet = None if alphabet is None else frozenset(alphabet)

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if tok[0] != kind:
            want = {"eof": "end of input"}.get(kind, repr(kind))
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ParseError(f"expected {want}, got {got}", tok[2])
        self.i += 1
        return tok

    def term(self) -> LTerm:
        parts = [self.meet()]
        while self.peek()[0] == "join":
            self.i += 1
            parts.append(self.meet())
        return join(*parts)

    def meet(self) -> LTerm:
        parts = [self.prod()]
        while self.peek()[0] == "meet":
            self.i += 1
            parts.append(self.prod())
        return meet(*parts)

    def prod(self) -> LTerm:
        parts = [self.atom()]
        while self.peek()[0] in ("ident", "("):
            parts.append(self.atom())
        return product(*parts)

    def exponent(self, t: LTerm) -> LTerm:
        if self.peek()[0] != "^":
            return t
        self.i += 1
        k = int(self.take("int")[1])
        if k < 0 and not isinstance(t, Inverse):
            return power(Inverse(t), -k) if k != -1 else Inverse(t)
        return power(t, k)

    def atom(self) -> LTerm:
        kind, val, pos = self.peek()
        if kind == "(":
            self.i += 1
            t = self.term()
            self.take(")")
            return self.exponent(t)
        if kind != "ident":
            got = "end of input" if kind == "eof" else repr(val)
            raise ParseError(f"expected a term, got {got}", pos)
        self.i += 1
        if val == "e":
            return self.exponent(E)
        if val in ("abs", "conj", "comm"):
            self.take("(")
            a = self.term()
            if val == "abs":
                self.take(")")
                return self.exponent(abs_(a))
            self.take(",")
            b = self.term()
            self.take(")")
            return self.exponent(conj(a, b) if val == "conj" else comm(a, b))
        if self.alphabet is not None and val not in self.alphabet:
            raise UnknownGenerator(f"unknown generator {val!r}", pos)
        return self.exponent(Gen(val))


def parse(text: str, alphabet: Optional[Iterable[str]] = None) -> LTerm:
    """Parse *text*; with *alphabet* given, other generator names are rejected."""
    p = _Parser(text, alphabet)
    t = p.term()
    p.take("eof")
    return t


# ---------------------------------------------------------------------------
# The free l-group on one generator is Z + Z with the cardinal order.


@dataclass(frozen=True, order=True)
class Z2Element:
    m1: int
    m2: int

    def __add__(self, other: Z2Element) -> Z2Element:
        return Z2Element(self.m1 + other.m1, self.m2 + other.m2)

    def __neg__(self) -> Z2Element:
        return Z2Element(-self.m1, -self.m2)

    def sup(self, other: Z2Element) -> Z2Element:
        return Z2Element(max(self.m1, other.m1), max(self.m2, other.m2))

    def inf(self, other: Z2Element) -> Z2Element:
        return Z2Element(min(self.m1, other.m1), min(self.m2, other.m2))

    def is_zero(self) -> bool:
        return self.m1 == 0 and self.m2 == 0


Z2_ZERO = Z2Element(0, 0)


def eval_z2(t: LTerm) -> Z2Element:
    gens = generators(t)
    if len(gens) > 1:
        raise ValueError(f"eval_z2 needs a one-generator term, got {sorted(gens)}")
    x = Z2Element(1, -1)
    return fold(
        t,
        lambda _: x,
        Z2_ZERO,
        Z2Element.__add__,
        Z2Element.__neg__,
        Z2Element.sup,
        Z2Element.inf,
    )


def iter_terms(gens: Sequence[str], max_nodes: int, binary: bool = True) -> Iterator[LTerm]:
    """All term trees with at most *max_nodes* nodes (raw, not flattened)."""
    table: dict[int, list[LTerm]] = {1: [E] + [Gen(g) for g in gens]}
    for n in range(2, max_nodes + 1):
        out = [Inverse(c) for c in table[n - 1]]
        for left in range(1, n - 1):
            right = n - 1 - left
            for a in table[left]:
                for b in table[right]:
                    out.append(Product((a, b)))
                    out.append(Join((a, b)))
                    out.append(Meet((a, b)))
        table[n] = out
    for n in range(1, max_nodes + 1):
        yield from table[n]


def random_term(rng, gens: Sequence[str], leaves: int, inverse_rate: float = 0.2, identity_rate: float = 0.05) -> LTerm:
    """Random term with *leaves* leaves; *rng* is a ``random.Random``."""
    if leaves <= 1:
        t: LTerm = E if rng.random() < identity_rate else Gen(rng.choice(list(gens)))
    else:
        k = rng.randint(1, leaves - 1)
        a = random_term(rng, gens, k, inverse_rate, identity_rate)
        b = random_term(rng, gens, leaves - k, inverse_rate, identity_rate)
        t = rng.choice([product, join, meet])(a, b)
    return Inverse(t) if rng.random() < inverse_rate else t
