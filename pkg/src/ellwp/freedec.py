"""Word problem for free lattice-ordered groups by diagram enumeration.

A term is first brought to ``\\/_i /\\_j w_ij``.  Each group word is traced
letter by letter from a base point ``0`` through a *diagram*: a finite
chain of abstract points together with, for every generator, a partial
order-isomorphism between points.  Whenever the image of the current point
is not yet determined, the diagram branches over every consistent
placement of that image (strictly inside a gap of the chain, or on an
existing point).  Since finite partial order-isomorphisms of the line
extend to order-automorphisms generating the free l-group, the term is the
identity iff ``0 w = 0`` in every completed diagram.
"""

from __future__ import annotations

import concurrent.futures as cf
import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .term import E, GroupWord, JoinOfMeets, LTerm, join, meet, normalize

__all__ = [
    "Diagram",
    "VerdictKind",
    "Verdict",
    "Sign",
    "ResourceExhausted",
    "extend",
    "placements",
    "decide",
    "is_leq_identity",
    "is_identity",
    "sign",
    "render",
]

DEFAULT_MAX_DIAGRAMS = 2_000_000


class ResourceExhausted(RuntimeError):
    """The diagram budget ran out before a verdict was reached."""

    def __init__(self, limit: int, explored: int):
        super().__init__(f"diagram budget of {limit} exhausted after {explored} diagrams")
        self.limit = limit
        self.explored = explored


@dataclass(frozen=True, eq=False)
class Diagram:
    """Chain of points plus a partial order-isomorphism per generator.

    ``chain`` lists point ids in increasing order.  ``maps[g]`` sends a point
    to its image under ``g``.  ``trace`` records, for traced words, the point
    reached from the base point.
    """

    chain: tuple[int, ...] = (0,)
    maps: Mapping[str, Mapping[int, int]] = field(default_factory=dict)
    trace: tuple[tuple[str, int], ...] = ()
    base: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "_pos", {p: i for i, p in enumerate(self.chain)})
        object.__setattr__(self, "_back", {})

    def pos(self, p: int) -> int:
        return self._pos[p]  # type: ignore[attr-defined]

    def _inverse_map(self, g: str) -> Mapping[int, int]:
        back = self._back  # type: ignore[attr-defined]
        if g not in back:
            back[g] = {b: a for a, b in self.maps.get(g, {}).items()}
        return back[g]

    def image(self, p: int, g: str, eps: int) -> Optional[int]:
        """Image of ``p`` under ``g^eps`` if the diagram already fixes it."""
        if eps > 0:
            return self.maps.get(g, {}).get(p)
        return self._inverse_map(g).get(p)

    def compare(self, p: int, q: int) -> int:
        a, b = self.pos(p), self.pos(q)
        return (a > b) - (a < b)

    def is_legitimate(self) -> bool:
        if self.base not in self._pos or len(set(self.chain)) != len(self.chain):  # type: ignore[attr-defined]
            return False
        for pairs in self.maps.values():
            if len(set(pairs.values())) != len(pairs):
                return False
            items = sorted(pairs.items(), key=lambda ab: self.pos(ab[0]))
            imgs = [self.pos(b) for _, b in items]
            if any(x >= y for x, y in zip(imgs, imgs[1:])):
                return False
        return True

    def contains(self, other: Diagram) -> bool:
        """True if this diagram refines *other* (same points ordered alike, maps extended)."""
        if not set(other.chain) <= set(self.chain):
            return False
        sub = [p for p in self.chain if p in other._pos]  # type: ignore[attr-defined]
        if tuple(sub) != other.chain:
            return False
        return all(
            self.maps.get(g, {}).get(a) == b for g, pairs in other.maps.items() for a, b in pairs.items()
        )

    def signature(self) -> tuple:
        idx = self._pos  # type: ignore[attr-defined]
        return (
            len(self.chain),
            idx[self.base],
            tuple(
                (g, tuple(sorted((idx[a], idx[b]) for a, b in pairs.items())))
                for g, pairs in sorted(self.maps.items())
                if pairs
            ),
        )

    def to_json(self) -> dict:
        return {
            "chain": list(self.chain),
            "base": self.base,
            "maps": {g: sorted([a, b] for a, b in pairs.items()) for g, pairs in sorted(self.maps.items())},
            "trace": [
                {"word": w, "point": p, "sign": self.compare(p, self.base)} for w, p in self.trace
            ],
        }


def placements(d: Diagram, p: int, g: str, eps: int) -> tuple[list[int], list[int]]:
    """Where the image of ``p`` under ``g^eps`` may go.

    Returns ``(gaps, points)``: chain insertion indices for a new point, and
    existing points it may coincide with.  Both are empty when the image is
    already forced.
    """
    if d.image(p, g, eps) is not None:
        return [], []
    fwd = d.maps.get(g, {})
    pairs = fwd.items() if eps > 0 else d._inverse_map(g).items()
    used = set(fwd.values()) if eps > 0 else set(fwd)
    pp = d.pos(p)
    lo, hi = -1, len(d.chain)
    for a, b in pairs:
        pa, pb = d.pos(a), d.pos(b)
        if pa < pp:
            lo = max(lo, pb)
        else:
            hi = min(hi, pb)
    gaps = list(range(lo + 1, hi + 1))
    points = [d.chain[i] for i in range(lo + 1, hi) if d.chain[i] not in used]
    return gaps, points


def _with_pair(d: Diagram, chain: tuple[int, ...], p: int, q: int, g: str, eps: int) -> Diagram:
    src, dst = (p, q) if eps > 0 else (q, p)
    maps = dict(d.maps)
    m = dict(maps.get(g, {}))
    m[src] = dst
    maps[g] = m
    return Diagram(chain, maps, d.trace, d.base)


def extend(
    d: Diagram, p: int, g: str, eps: int, include_equalities: bool = False
) -> list[Diagram]:
    """Every legitimate one-step extension defining ``p g^eps``.

    New points are listed from the bottom of the chain upwards, then the
    coincidences with existing points.
    """
    if d.image(p, g, eps) is not None:
        return [d]
    gaps, points = placements(d, p, g, eps)
    fresh = max(d.chain) + 1
    out = []
    for i in gaps:
        chain = d.chain[:i] + (fresh,) + d.chain[i:]
        out.append(_with_pair(d, chain, p, fresh, g, eps))
    if include_equalities:
        for q in points:
            out.append(_with_pair(d, d.chain, p, q, g, eps))
    return out


# ---------------------------------------------------------------------------
# Verdicts


class VerdictKind(str, enum.Enum):
    EQUALS_IDENTITY = "EqualsIdentity"
    NOT_IDENTITY = "NotIdentity"


class Sign(str, enum.Enum):
    ZERO = "Zero"
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    witness: Optional[Diagram] = None
    explored: int = 0
    normal_form: Optional[JoinOfMeets] = None

    @property
    def is_identity(self) -> bool:
        return self.kind is VerdictKind.EQUALS_IDENTITY

    def to_json(self) -> dict:
        out = {"verdict": self.kind.value, "diagrams": self.explored}
        if self.normal_form is not None:
            out["normal_form"] = str(self.normal_form)
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


_IDENT, _NOT = "ident", "not"


class _Problem:
    """The traced words of one normal form plus the pruning logic."""

    def __init__(self, nf: JoinOfMeets):
        self.nf = nf
        self.words: list[GroupWord] = []
        self.letters: list[list[tuple[str, int]]] = []
        self.rows: list[list[int]] = []
        for row in nf.rows:
            idx = []
            for w in row:
                idx.append(len(self.words))
                self.words.append(w)
                self.letters.append(w.expand())
            self.rows.append(idx)

    def status(self, signs: Sequence[Optional[int]], d: Optional[Diagram] = None):
        """``_IDENT``/``_NOT`` when the signs settle ``0w`` vs ``0``, else the next word."""
        possible_rows = []
        for idx in self.rows:
            known = [signs[k] for k in idx if signs[k] is not None]
            m = min(known) if known else 1
            if len(known) == len(idx) or m < 0:
                possible_rows.append({m})
            else:
                possible_rows.append({v for v in (-1, 0, 1) if v <= m})
        floor = max(min(r) for r in possible_rows)
        union = set().union(*possible_rows)
        possible = {v for v in union if v >= floor}
        if possible == {0}:
            return _IDENT
        if 0 not in possible:
            return _NOT
        open_words = [
            k for idx, r in zip(self.rows, possible_rows) if len(r) > 1 for k in idx if signs[k] is None
        ]
        if not open_words:
            raise AssertionError("unsettled verdict with every row settled")
        if d is None:
            return open_words[0]
        # trace the word needing the fewest new letters first
        return min(open_words, key=lambda k: self.undefined_letters(d, k))

    def undefined_letters(self, d: Diagram, k: int) -> int:
        p = d.base
        letters = self.letters[k]
        for i, (g, eps) in enumerate(letters):
            p = d.image(p, g, eps)
            if p is None:
                return len(letters) - i
        return 0

    def complete(self, d: Diagram, signs: Sequence[Optional[int]]) -> Diagram:
        """Trace every word through *d*, branching arbitrarily where needed."""
        trace = []
        for k, letters in enumerate(self.letters):
            p = d.base
            for g, eps in letters:
                q = d.image(p, g, eps)
                if q is None:
                    d = extend(d, p, g, eps)[0]
                    q = d.image(p, g, eps)
                p = q
            trace.append((str(self.words[k]), p))
        return Diagram(d.chain, d.maps, tuple(trace), d.base)


# state: (diagram, word index or -1 at a word boundary, letter index, point, signs)
_State = tuple


class _Search:
    def __init__(self, problem: _Problem, max_diagrams: Optional[int], include_equalities: bool = False):
        self.problem = problem
        self.limit = max_diagrams
        self.count = 0
        self.seen: set = set()
        self.include_equalities = include_equalities

    def expand(self, state: _State):
        """One step: returns ``("ident", None)``, ``("not", diagram)`` or ``("branch", children)``."""
        d, k, li, p, signs = state
        prob = self.problem
        if k < 0:
            key = (d.signature(), signs)
            if key in self.seen:
                return _IDENT, None
            self.seen.add(key)
            st = prob.status(signs, d)
            if st == _IDENT:
                return _IDENT, None
            if st == _NOT:
                return _NOT, prob.complete(d, signs)
            k, li, p = st, 0, d.base
        letters = prob.letters[k]
        while li < len(letters):
            g, eps = letters[li]
            q = d.image(p, g, eps)
            if q is None:
                break
            p, li = q, li + 1
        if li == len(letters):
            new = list(signs)
            new[k] = d.compare(p, d.base)
            return "branch", [(d, -1, 0, d.base, tuple(new))]
        kids = extend(d, p, g, eps, self.include_equalities)
        self.count += len(kids)
        if self.limit is not None and self.count > self.limit:
            raise ResourceExhausted(self.limit, self.count)
        return "branch", [(c, k, li + 1, c.image(p, g, eps), signs) for c in kids]

    def run(self, stack: list[_State]) -> Optional[Diagram]:
        while stack:
            kind, payload = self.expand(stack.pop())
            if kind == _NOT:
                return payload
            if kind == "branch":
                stack.extend(reversed(payload))
        return None


def _initial(problem: _Problem) -> _State:
    return (Diagram(), -1, 0, 0, (None,) * len(problem.words))


def _run_subtree(problem: _Problem, state: _State, limit: Optional[int], equalities: bool):
    s = _Search(problem, limit, equalities)
    try:
        return s.run([state]), s.count, False
    except ResourceExhausted:
        return None, s.count, True


def decide(
    t: LTerm,
    max_diagrams: Optional[int] = DEFAULT_MAX_DIAGRAMS,
    jobs: int = 1,
    deterministic: bool = True,
    equalities: bool = False,
) -> Verdict:
    """Decide whether *t* equals the identity in the free l-group.

    Exploration is depth-first and stops at the first diagram in which the
    endpoint ``0 t`` differs from ``0``.  Branches whose outcome is already
    settled by the signs of the traced words are not explored further.
    With ``jobs > 1`` disjoint subtrees are searched in worker processes;
    ``max_diagrams`` then bounds each subtree.

    New points are placed strictly between existing ones.  A term that moves
    some point under some assignment also does so under a nearby generic
    assignment, where distinct paths from the base point never meet, so this
    loses nothing; ``equalities=True`` also tries coinciding placements.
    """
    nf = normalize(t)
    problem = _Problem(nf)
    if jobs <= 1:
        search = _Search(problem, max_diagrams, equalities)
        witness = search.run([_initial(problem)])
        return _verdict(witness, search.count, nf)
    return _decide_parallel(problem, nf, max_diagrams, jobs, deterministic, equalities)


def _verdict(witness: Optional[Diagram], count: int, nf: JoinOfMeets) -> Verdict:
    if witness is None:
        return Verdict(VerdictKind.EQUALS_IDENTITY, None, count, nf)
    return Verdict(VerdictKind.NOT_IDENTITY, witness, count, nf)


def _decide_parallel(problem, nf, max_diagrams, jobs, deterministic, equalities) -> Verdict:
    search = _Search(problem, max_diagrams, equalities)
    frontier = [_initial(problem)]
    target = 4 * jobs
    while frontier and len(frontier) < target:
        kind, payload = search.expand(frontier.pop(0))
        if kind == _NOT:
            return _verdict(payload, search.count, nf)
        if kind == "branch":
            frontier.extend(payload)
    if not frontier:
        return _verdict(None, search.count, nf)
    total = search.count
    exhausted = False
    with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_subtree, problem, s, max_diagrams, equalities) for s in frontier]
        order = futures if deterministic else cf.as_completed(futures)
        for fut in order:
            witness, count, hit_limit = fut.result()
            total += count
            exhausted |= hit_limit
            if witness is not None:
                for f in futures:
                    f.cancel()
                return _verdict(witness, total, nf)
    if exhausted:
        raise ResourceExhausted(max_diagrams, total)
    return _verdict(None, total, nf)


def is_identity(t: LTerm, **kw) -> bool:
    return decide(t, **kw).is_identity


def is_leq_identity(t: LTerm, **kw) -> bool:
    """``t <= e``, i.e. ``t \\/ e = e``."""
    return decide(join(t, E), **kw).is_identity


def sign(t: LTerm, **kw) -> Sign:
    if decide(t, **kw).is_identity:
        return Sign.ZERO
    if decide(meet(t, E), **kw).is_identity:
        return Sign.POSITIVE
    if decide(join(t, E), **kw).is_identity:
        return Sign.NEGATIVE
    return Sign.INCOMPARABLE


def render(d: Diagram) -> str:
    """ASCII picture: the chain bottom to top, generator arrows, traced endpoints."""

    def name(p: int) -> str:
        return "0" if p == d.base else f"p{p}"

    lines = ["chain: " + " < ".join(name(p) for p in d.chain)]
    for g, pairs in sorted(d.maps.items()):
        arrows = sorted(pairs.items(), key=lambda ab: d.pos(ab[0]))
        lines.append(f"{g}: " + ", ".join(f"{name(a)} -{g}-> {name(b)}" for a, b in arrows))
    rel = {-1: "<", 0: "=", 1: ">"}
    for w, p in d.trace:
        lines.append(f"0 [{w}] = {name(p)} {rel[d.compare(p, d.base)]} 0")
    return "\n".join(lines)
