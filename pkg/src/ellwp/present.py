"""Finitely presented l-groups: numbering, semi-deciders and relator schemas.

``<Y : r_1 = e, ..., r_n = e>`` is the free l-group on ``Y`` modulo the
l-ideal generated by the relators.  Membership of ``w`` in that l-ideal is
witnessed by ``|w| <= prod_k h_k^-1 R h_k`` where ``R = |r_1| \\/ ... \\/ |r_n|``;
such an inequality is checked in the free l-group by the diagram engine.
Non-membership is witnessed by an l-homomorphism into a computable l-group
that kills every relator but not ``w``.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence

from . import freedec, perm
from .term import (
    E,
    Gen,
    GroupWord,
    LTerm,
    abs_,
    check_identifier,
    conj,
    fold,
    generators,
    inverse,
    join,
    meet,
    parse,
    power,
    product,
    to_text,
)
from .wreath import WreathElement, WreathProduct

__all__ = [
    "Presentation",
    "Certificate",
    "InvalidAssignment",
    "pseudo_godel",
    "godel_index",
    "word_code",
    "word_from_code",
    "conjugator_words",
    "ideal_semidecide",
    "hom_refute",
    "solve",
    "verify_certificate",
    "CardinalTarget",
    "PLTarget",
    "WreathTarget",
    "leq_relator",
    "orth_relator",
    "eq_relator",
    "gdagger_schema",
    "refute_search",
    "gdagger_alphabet",
    "SchemaRelator",
]


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[LTerm, ...] = ()
    # relator i beyond the listed ones, for recursively enumerable presentations
    more: Optional[Callable[[int], LTerm]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for g in self.generators:
            check_identifier(g)
        for r in self.relators:
            extra = generators(r) - set(self.generators)
            if extra:
                raise ValueError(f"relator {to_text(r)} uses unknown generators {sorted(extra)}")

    def relator_prefix(self, n: int) -> tuple[LTerm, ...]:
        if self.more is None or n <= len(self.relators):
            return self.relators[:n]
        extra = tuple(self.more(i) for i in range(len(self.relators), n))
        return self.relators + extra

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> Presentation:
        gens = tuple(data["generators"])
        return cls(gens, tuple(parse(r, gens) for r in data.get("relators", [])))

    @classmethod
    def load(cls, path: str) -> Presentation:
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {"generators": list(self.generators), "relators": [to_text(r) for r in self.relators]}


# ---------------------------------------------------------------------------
# Pseudo-Goedel numbering of meet strings
#
# A meet string is a non-empty tuple of freely reduced words.  Words are
# numbered bijectively (shortlex over the letters g, g^-1 in alphabet
# order); non-empty sequences of numbers are numbered bijectively; the
# final index pairs that number with a padding number that decoding
# ignores, so each meet string has one index per padding value.


def _pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def _unpair(n: int) -> tuple[int, int]:
    s = (math.isqrt(8 * n + 1) - 1) // 2
    b = n - s * (s + 1) // 2
    return s - b, b


def _seq_code(xs: Sequence[int]) -> int:
    if len(xs) == 1:
        return 2 * xs[0]
    return 2 * _pair(xs[0], _seq_code(xs[1:])) + 1


def _seq_decode(n: int) -> list[int]:
    out = []
    while n % 2 == 1:
        a, n = _unpair((n - 1) // 2)
        out.append(a)
    out.append(n // 2)
    return out


def _letters(alphabet: Sequence[str]) -> list[tuple[str, int]]:
    return [(g, e) for g in alphabet for e in (1, -1)]


def _count(n_letters: int, length: int) -> int:
    if length == 0:
        return 1
    if n_letters == 0:
        return 0
    return n_letters * (n_letters - 1) ** (length - 1)


def word_code(w: GroupWord, alphabet: Sequence[str]) -> int:
    letters = _letters(alphabet)
    k = len(letters)
    seq = w.expand()
    offset = sum(_count(k, n) for n in range(len(seq)))
    rank = 0
    prev = None
    for name, e in seq:
        if (name, e) not in letters:
            raise ValueError(f"letter {name} not in alphabet")
        allowed = [l for l in letters if prev is None or l != (prev[0], -prev[1])]
        rank = rank * len(allowed) + allowed.index((name, e))
        prev = (name, e)
    return offset + rank


def word_from_code(n: int, alphabet: Sequence[str]) -> GroupWord:
    letters = _letters(alphabet)
    k = len(letters)
    length = 0
    while n >= _count(k, length):
        n -= _count(k, length)
        length += 1
    digits = []
    for i in range(length - 1, -1, -1):
        base = k if i == 0 else k - 1
        digits.append(n % base)
        n //= base
    digits.reverse()
    seq: list[tuple[str, int]] = []
    for d in digits:
        allowed = [l for l in letters if not seq or l != (seq[-1][0], -seq[-1][1])]
        seq.append(allowed[d])
    return GroupWord.reduce(seq)


def pseudo_godel(n: int, alphabet: Sequence[str]) -> tuple[GroupWord, ...]:
    """The meet string with index *n*; every natural number decodes."""
    if n < 0:
        raise ValueError("indices are natural numbers")
    code, _pad = _unpair(n)
    return tuple(word_from_code(c, alphabet) for c in _seq_decode(code))


def godel_index(s: Sequence[GroupWord], alphabet: Sequence[str], padding: int = 0) -> int:
    """One of the infinitely many indices of *s* (one per padding value)."""
    if not s:
        raise ValueError("meet strings are non-empty")
    return _pair(_seq_code([word_code(w, alphabet) for w in s]), padding)


# ---------------------------------------------------------------------------
# Certificates


class InvalidAssignment(ValueError):
    """An assignment that does not kill every relator."""


@dataclass(frozen=True)
class Certificate:
    kind: str  # "proved" | "refuted" | "unknown"
    conjugators: tuple[GroupWord, ...] = ()
    n_relators: int = 0
    target: Optional[str] = None
    assignment: Optional[Mapping[str, Any]] = None
    checked: int = 0

    def dominator(self, p: Presentation) -> LTerm:
        """``prod_k h_k^-1 R h_k`` for a proved certificate."""
        R = join(*[abs_(r) for r in p.relator_prefix(self.n_relators)])
        return product(*[R if h.is_identity() else conj(R, h.to_term()) for h in self.conjugators])

    def to_json(self, p: Optional[Presentation] = None) -> dict:
        out: dict[str, Any] = {"certificate": self.kind, "checked": self.checked}
        if self.kind == "proved":
            out["conjugators"] = [str(h) for h in self.conjugators]
            out["relators_used"] = self.n_relators
            if p is not None:
                out["dominator"] = to_text(self.dominator(p))
        if self.kind == "refuted":
            out["target"] = self.target
            out["assignment"] = dict(self.assignment or {})
        return out


def _domination_term(w: LTerm, P: LTerm) -> LTerm:
    """Equals ``e`` iff ``|w| <= P``."""
    return join(product(abs_(w), inverse(P)), E)


def conjugator_words(alphabet: Sequence[str]) -> Iterator[GroupWord]:
    """All reduced words, by length and then lexicographically."""
    letters = sorted(_letters(alphabet))
    yield GroupWord()
    length = 1
    while alphabet:
        for seq in itertools.product(letters, repeat=length):
            if all(a[0] != b[0] or a[1] == b[1] for a, b in zip(seq, seq[1:])):
                yield GroupWord.reduce(seq)
        length += 1


def _words_upto(alphabet: Sequence[str], length: int) -> list[GroupWord]:
    return list(itertools.takewhile(lambda w: len(w) <= length, conjugator_words(alphabet)))


def _sequences(words: Sequence[GroupWord], cost: int) -> Iterator[tuple[GroupWord, ...]]:
    """Sequences of conjugators with total cost ``sum(1 + |h|) == cost``."""
    if cost == 0:
        yield ()
        return
    for h in words:
        c = 1 + len(h)
        if c > cost:
            continue
        for rest in _sequences(words, cost - c):
            yield (h,) + rest


def _candidates(p: Presentation) -> Iterator[tuple[int, tuple[GroupWord, ...]]]:
    cost = 1
    while True:
        words = _words_upto(p.generators, cost - 1)
        n_rel = len(p.relators) if p.more is None else max(len(p.relators), cost)
        for seq in _sequences(words, cost):
            yield n_rel, seq
        cost += 1


def ideal_semidecide(
    p: Presentation,
    w: LTerm,
    budget: int = 100,
    max_diagrams: Optional[int] = 200_000,
    seed: int = 0,
    prefilter: int = 8,
) -> Certificate:
    """Search for a proof that ``w = e`` in *p*.

    Candidates ``prod_k h_k^-1 R h_k`` are tried by increasing
    ``sum_k (1 + |h_k|)``; each costs one unit of *budget*.  Random PL
    assignments (*prefilter* samples) discard candidates that visibly fail
    before the diagram engine is asked; only the engine can accept.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    for step in _prover(p, w, max_diagrams, seed, prefilter):
        if step.kind == "proved" or step.checked >= budget:
            return step if step.kind == "proved" else Certificate("unknown", checked=step.checked)
    raise AssertionError("unreachable")


def _prover(p, w, max_diagrams, seed, prefilter) -> Iterator[Certificate]:
    if budget_free_identity(w, max_diagrams):
        yield Certificate("proved", (), 0, checked=0)
        return
    if not p.relators and p.more is None:
        checked = 0
        while True:
            checked += 1
            yield Certificate("unknown", checked=checked)
    checked = 0
    for n_rel, seq in _candidates(p):
        checked += 1
        cert = Certificate("proved", seq, n_rel, checked=checked)
        q = _domination_term(w, cert.dominator(p))
        if prefilter and perm.find_witness(q, budget=prefilter, seed=seed + checked) is not None:
            yield Certificate("unknown", checked=checked)
            continue
        try:
            ok = freedec.decide(q, max_diagrams=max_diagrams).is_identity
        except freedec.ResourceExhausted:
            ok = False
        yield cert if ok else Certificate("unknown", checked=checked)


def budget_free_identity(w: LTerm, max_diagrams: Optional[int]) -> bool:
    try:
        return freedec.decide(w, max_diagrams=max_diagrams).is_identity
    except freedec.ResourceExhausted:
        return False


# ---------------------------------------------------------------------------
# Refutation by l-homomorphisms


class CardinalTarget:
    """``Z^k`` with the componentwise order; ``Z2`` is ``k = 2``."""

    def __init__(self, k: int = 2):
        self.k = k
        self.name = "Z2" if k == 2 else f"Z^{k}"

    def coerce(self, v: Any) -> tuple[int, ...]:
        if hasattr(v, "m1"):
            v = (v.m1, v.m2)
        v = tuple(int(x) for x in v)
        if len(v) != self.k:
            raise ValueError(f"expected {self.k} coordinates, got {v}")
        return v

    def evaluate(self, t: LTerm, assignment: Mapping[str, Any]) -> tuple[int, ...]:
        vals = {g: self.coerce(v) for g, v in assignment.items()}
        return fold(
            t,
            lambda g: vals[g],
            (0,) * self.k,
            lambda a, b: tuple(x + y for x, y in zip(a, b)),
            lambda a: tuple(-x for x in a),
            lambda a, b: tuple(map(max, a, b)),
            lambda a, b: tuple(map(min, a, b)),
        )

    def is_identity(self, v: tuple[int, ...]) -> bool:
        return not any(v)

    def encode(self, v: Any) -> Any:
        return list(self.coerce(v))


class PLTarget:
    name = "PLMap"

    def evaluate(self, t: LTerm, assignment: Mapping[str, perm.PLMap]) -> perm.PLMap:
        return perm.term_map(t, assignment)

    def is_identity(self, v: perm.PLMap) -> bool:
        return v.is_identity()

    def encode(self, v: perm.PLMap) -> Any:
        return v.to_json()


class WreathTarget:
    def __init__(self, wreath: WreathProduct):
        self.wreath = wreath
        self.name = f"Wreath({wreath.name})"

    def evaluate(self, t: LTerm, assignment: Mapping[str, WreathElement]) -> WreathElement:
        return self.wreath.evaluate(t, assignment)

    def is_identity(self, v: WreathElement) -> bool:
        return self.wreath.is_unit(v)

    def encode(self, v: WreathElement) -> Any:
        return v.to_json()


def _kills_relators(p: Presentation, assignment, target) -> Optional[LTerm]:
    """First relator not sent to the identity, or None."""
    for r in p.relators:
        if not target.is_identity(target.evaluate(r, assignment)):
            return r
    return None


def hom_refute(p: Presentation, w: LTerm, assignment: Mapping[str, Any], target) -> Certificate:
    """Refute ``w = e`` by an assignment killing every relator but not *w*."""
    missing = set(p.generators) - set(assignment)
    if missing:
        raise InvalidAssignment(f"unassigned generators {sorted(missing)}")
    bad = _kills_relators(p, assignment, target)
    if bad is not None:
        raise InvalidAssignment(f"relator {to_text(bad)} is not sent to the identity")
    if target.is_identity(target.evaluate(w, assignment)):
        return Certificate("unknown", checked=1)
    encoded = {g: target.encode(v) for g, v in sorted(assignment.items())}
    return Certificate("refuted", target=target.name, assignment=encoded, checked=1)


def _refuter(p: Presentation, w: LTerm, seed: int) -> Iterator[Certificate]:
    """Random assignments into Z^2 and into PL maps, alternately."""
    z2, pl = CardinalTarget(2), PLTarget()
    i = 0
    while True:
        rng = random.Random(f"{seed}:refute:{i}")
        if i % 2 == 0:
            target = z2
            assignment = {g: (rng.randint(-2, 2), rng.randint(-2, 2)) for g in p.generators}
        else:
            target = pl
            assignment = perm.random_assignment(rng, p.generators, identity_rate=0.5)
        i += 1
        if _kills_relators(p, assignment, target) is None:
            cert = hom_refute(p, w, assignment, target)
            if cert.kind == "refuted":
                yield Certificate("refuted", target=cert.target, assignment=cert.assignment, checked=i)
                return
        yield Certificate("unknown", checked=i)


def refute_search(p: Presentation, w: LTerm, budget: int = 100, seed: int = 0) -> Certificate:
    """Try up to *budget* random assignments; Refuted or Unknown."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    for cert in _refuter(p, w, seed):
        if cert.kind == "refuted" or cert.checked >= budget:
            return cert
    raise AssertionError("unreachable")


def solve(
    p: Presentation,
    w: LTerm,
    budget: int = 1000,
    seed: int = 0,
    max_diagrams: Optional[int] = 200_000,
) -> Certificate:
    """Run the prover and the refuter in lockstep; the first definite answer wins.

    *budget* bounds the number of steps of each.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    prover = _prover(p, w, max_diagrams, seed, 8)
    refuter = _refuter(p, w, seed)
    for step in range(budget):
        for gen in (prover, refuter):
            cert = next(gen)
            if cert.kind != "unknown":
                return cert
    return Certificate("unknown", checked=budget)


def verify_certificate(cert: Certificate, p: Presentation, w: LTerm, max_diagrams: Optional[int] = None) -> bool:
    """Re-check a certificate independently of how it was found."""
    if cert.kind == "proved":
        if not cert.conjugators:
            return freedec.decide(w, max_diagrams=max_diagrams).is_identity
        q = _domination_term(w, cert.dominator(p))
        return freedec.decide(q, max_diagrams=max_diagrams).is_identity
    if cert.kind == "refuted":
        if cert.target == "PLMap":
            target: Any = PLTarget()
            assignment = {g: perm.PLMap.from_json(v) for g, v in cert.assignment.items()}
        elif cert.target and cert.target.startswith("Z"):
            k = 2 if cert.target == "Z2" else int(cert.target.split("^")[1])
            target = CardinalTarget(k)
            assignment = dict(cert.assignment)
        else:
            raise ValueError(f"cannot re-verify target {cert.target!r}")
        if _kills_relators(p, assignment, target) is not None:
            return False
        return not target.is_identity(target.evaluate(w, assignment))
    return False


# ---------------------------------------------------------------------------
# Relator encodings and the schema of extra relations


def leq_relator(a: LTerm, b: LTerm) -> LTerm:
    """``a <= b`` as ``a b^-1 \\/ e = e``."""
    return join(product(a, inverse(b)), E)


def orth_relator(f: LTerm, g: LTerm) -> LTerm:
    """``f _|_ g`` as ``|f| /\\ |g| = e``."""
    return meet(abs_(f), abs_(g))


def eq_relator(a: LTerm, b: LTerm) -> LTerm:
    return product(a, inverse(b))


@dataclass(frozen=True)
class SchemaRelator:
    family: str  # "3", "4", "5" or "6"
    params: tuple[int, ...]
    relator: LTerm

    def to_json(self) -> dict:
        return {"family": self.family, "params": list(self.params), "relator": to_text(self.relator)}


def _prod(*factors: LTerm) -> LTerm:
    return product(*[f for f in factors if f != E])


def _conj(f: LTerm, g: LTerm) -> LTerm:
    return f if g == E else conj(f, g)


def gdagger_schema(
    g_alphabet: Sequence[str],
    uv_pairs: Sequence[tuple[LTerm, LTerm]],
    m_max: int,
    k_max: int,
    a: str = "a0",
    c: str = "c1",
    s_prefix: str = "s_",
) -> list[SchemaRelator]:
    """Finite truncation of the relations adjoining the conjugators ``s_m``.

    For ``0 <= m, m' < m_max``, ``1 <= k <= k_max`` and generators ``g`` of G:

    * ``|s_m|^k <= a * c^m``
    * ``s_m * c^-m  _|_  g * a^(+-k)``
    * ``s_m * c^-m  _|_  s_m' * (c^-m' a^(+-k))``
    * ``u_m * (c^m s_m) = v_m * c^m``

    where ``f * h`` is ``h^-1 f h``.
    """
    if m_max <= 0 or k_max <= 0:
        raise ValueError("m_max and k_max must be positive")
    if len(uv_pairs) < m_max:
        raise ValueError(f"need {m_max} (u, v) pairs, got {len(uv_pairs)}")
    names = [f"{s_prefix}{m}" for m in range(m_max)]
    clash = (set(names) | {a, c}) & set(g_alphabet)
    if clash:
        raise ValueError(f"schema generators clash with G: {sorted(clash)}")
    A, C = Gen(a), Gen(c)
    S = [Gen(n) for n in names]
    ks = [k for k in range(1, k_max + 1)]
    signed = [s * k for k in ks for s in (1, -1)]
    out: list[SchemaRelator] = []
    for m in range(m_max):
        for k in ks:
            out.append(SchemaRelator("3", (m, k), leq_relator(power(abs_(S[m]), k), _conj(A, power(C, m)))))
    for m in range(m_max):
        for g in g_alphabet:
            for k in signed:
                out.append(
                    SchemaRelator("4", (m, k), orth_relator(_conj(S[m], power(C, -m)), _conj(Gen(g), power(A, k))))
                )
    for m in range(m_max):
        for m2 in range(m_max):
            for k in signed:
                rhs = _conj(S[m2], _prod(power(C, -m2), power(A, k)))
                out.append(SchemaRelator("5", (m, m2, k), orth_relator(_conj(S[m], power(C, -m)), rhs)))
    for m in range(m_max):
        u, v = uv_pairs[m]
        lhs = _conj(u, _prod(power(C, m), S[m]))
        out.append(SchemaRelator("6", (m,), eq_relator(lhs, _conj(v, power(C, m)))))
    return out


def gdagger_alphabet(g_alphabet: Sequence[str], m_max: int, a: str = "a0", c: str = "c1", s_prefix: str = "s_") -> list[str]:
    return list(g_alphabet) + [a, c] + [f"{s_prefix}{m}" for m in range(m_max)]
