"""Piecewise-linear order-automorphisms of the rational line.

All arithmetic is exact (``fractions.Fraction``).  Maps act on the right,
as in the term language: ``x (a b) = (x a) b``, so ``a * b`` applies ``a``
first.  The lattice operations are pointwise max and min.
"""

from __future__ import annotations

import bisect
import concurrent.futures as cf
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .term import Gen, Identity, Inverse, Join, LTerm, Meet, Product, fold, generators

__all__ = [
    "PLMap",
    "Bump",
    "LazyConjugator",
    "ConjugatorBudgetExceeded",
    "UnassignedGenerator",
    "Witness",
    "supports",
    "eval_term",
    "term_map",
    "random_plmap",
    "random_assignment",
    "find_witness",
    "conjugator",
    "to_fraction",
]

Rational = Union[Fraction, int, str]


def to_fraction(v: Rational) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class PLMap:
    """Order-bijection given by breakpoints, identity outside their hull.

    Breakpoints are kept canonical: no collinear interior points and no
    fixed leading or trailing segments, so equal maps compare equal.
    """

    __slots__ = ("points", "_xs", "_ys")

    def __init__(self, points: Iterable[Sequence[Rational]] = ()):
        pts = [(to_fraction(x), to_fraction(y)) for x, y in points]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if not (x0 < x1 and y0 < y1):
                raise ValueError("breakpoints must be strictly increasing in x and y")
        if pts and (pts[0][0] != pts[0][1] or pts[-1][0] != pts[-1][1]):
            raise ValueError("first and last breakpoints must be fixed points")
        pts = _simplify(pts)
        self.points: tuple[tuple[Fraction, Fraction], ...] = tuple(pts)
        self._xs = [x for x, _ in pts]
        self._ys = [y for _, y in pts]

    @classmethod
    def identity(cls) -> PLMap:
        return cls()

    def is_identity(self) -> bool:
        return not self.points

    def __call__(self, x: Rational) -> Fraction:
        return _interp(self._xs, self._ys, to_fraction(x))

    def preimage(self, y: Rational) -> Fraction:
        return _interp(self._ys, self._xs, to_fraction(y))

    def inverse(self) -> PLMap:
        return PLMap((y, x) for x, y in self.points)

    def __mul__(self, other: PLMap) -> PLMap:
        """``self`` then ``other``."""
        cands = set(self._xs) | {self.preimage(x) for x in other._xs}
        return PLMap((x, other(self(x))) for x in sorted(cands))

    def __pow__(self, k: int) -> PLMap:
        base = self if k >= 0 else self.inverse()
        out = PLMap()
        for _ in range(abs(k)):
            out = out * base
        return out

    def join(self, other: PLMap) -> PLMap:
        return _pointwise(self, other, max)

    def meet(self, other: PLMap) -> PLMap:
        return _pointwise(self, other, min)

    __or__ = join
    __and__ = meet

    def conj(self, g: PLMap) -> PLMap:
        """``g^-1 self g``."""
        return g.inverse() * self * g

    def __le__(self, other: PLMap) -> bool:
        return self.meet(other) == self

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PLMap) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        return f"PLMap({[(str(x), str(y)) for x, y in self.points]})"

    def breakpoints_x(self) -> list[Fraction]:
        return list(self._xs)

    def to_json(self) -> list[list[str]]:
        return [[_fmt(x), _fmt(y)] for x, y in self.points]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> PLMap:
        return cls((Fraction(x), Fraction(y)) for x, y in data)


def _interp(xs: list[Fraction], ys: list[Fraction], x: Fraction) -> Fraction:
    if not xs or x <= xs[0] or x >= xs[-1]:
        return x
    i = bisect.bisect_right(xs, x)
    x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def _simplify(pts: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    out: list[tuple[Fraction, Fraction]] = []
    for p in pts:
        if out and out[-1] == p:
            continue
        while len(out) >= 2:
            (x0, y0), (x1, y1) = out[-2], out[-1]
            if (y1 - y0) * (p[0] - x1) == (p[1] - y1) * (x1 - x0):
                out.pop()
            else:
                break
        out.append(p)
    # a leading or trailing segment between two fixed points is the identity
    while len(out) >= 2 and out[0][0] == out[0][1] and out[1][0] == out[1][1]:
        out.pop(0)
    while len(out) >= 2 and out[-1][0] == out[-1][1] and out[-2][0] == out[-2][1]:
        out.pop()
    if len(out) == 1:
        out = []
    return out


def _pointwise(a: PLMap, b: PLMap, pick) -> PLMap:
    xs = sorted(set(a._xs) | set(b._xs))
    cands = set(xs)
    for x0, x1 in zip(xs, xs[1:]):
        d0, d1 = a(x0) - b(x0), a(x1) - b(x1)
        if d0 * d1 < 0:
            cands.add(x0 + (x1 - x0) * d0 / (d0 - d1))
    return PLMap((x, pick(a(x), b(x))) for x in sorted(cands))


# ---------------------------------------------------------------------------
# Supports


@dataclass(frozen=True)
class Bump:
    """A maximal open interval of moved points, with the map it belongs to."""

    lo: Fraction
    hi: Fraction
    parent: PLMap = field(repr=False, compare=False)

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        return self.lo, self.hi

    def is_positive(self) -> bool:
        mid = (self.lo + self.hi) / 2
        return self.parent(mid) > mid

    def restriction(self) -> PLMap:
        inner = [(x, y) for x, y in self.parent.points if self.lo < x < self.hi]
        return PLMap([(self.lo, self.lo), *inner, (self.hi, self.hi)])


def supports(a: PLMap) -> list[Bump]:
    """Supporting intervals of *a*, ascending."""
    xs = a.breakpoints_x()
    cands = set(xs)
    for x0, x1 in zip(xs, xs[1:]):
        d0, d1 = a(x0) - x0, a(x1) - x1
        if d0 * d1 < 0:
            cands.add(x0 + (x1 - x0) * d0 / (d0 - d1))
    pts = sorted(cands)
    out: list[Bump] = []
    lo = None
    for x0, x1 in zip(pts, pts[1:]):
        mid = (x0 + x1) / 2
        moved = a(mid) != mid
        if moved and lo is None:
            lo = x0
        if lo is not None and (not moved or a(x1) == x1):
            out.append(Bump(lo, x0 if not moved else x1, a))
            lo = None
    return out


# ---------------------------------------------------------------------------
# Evaluating terms


class UnassignedGenerator(KeyError):
    pass


def _lookup(assignment: Mapping[str, PLMap], name: str) -> PLMap:
    try:
        return assignment[name]
    except KeyError:
        raise UnassignedGenerator(name) from None


def eval_term(t: LTerm, assignment: Mapping[str, PLMap], x: Rational) -> Fraction:
    """Image of *x* under the automorphism denoted by *t*, computed pointwise."""

    def ev(s: LTerm, x: Fraction, inv: bool) -> Fraction:
        if isinstance(s, Identity):
            return x
        if isinstance(s, Gen):
            f = _lookup(assignment, s.name)
            return f.preimage(x) if inv else f(x)
        if isinstance(s, Inverse):
            return ev(s.child, x, not inv)
        if isinstance(s, Product):
            for c in reversed(s.children) if inv else s.children:
                x = ev(c, x, inv)
            return x
        # (f \/ g)^-1 = f^-1 /\ g^-1
        vals = [ev(c, x, inv) for c in s.children]  # type: ignore[attr-defined]
        use_max = isinstance(s, Join) != inv
        return max(vals) if use_max else min(vals)

    return ev(t, to_fraction(x), False)


def term_map(t: LTerm, assignment: Mapping[str, PLMap]) -> PLMap:
    """The PL map denoted by *t* under *assignment*."""
    return fold(
        t,
        lambda g: _lookup(assignment, g),
        PLMap(),
        PLMap.__mul__,
        PLMap.inverse,
        PLMap.join,
        PLMap.meet,
    )


# ---------------------------------------------------------------------------
# Random witnesses


def random_plmap(
    rng: random.Random,
    lo: Rational = 0,
    hi: Rational = 16,
    grid: int = 4,
    max_breaks: int = 5,
) -> PLMap:
    """Random map supported in a random subinterval of ``(lo, hi)``.

    Coordinates lie on the grid of step ``1/grid``.
    """
    lo, hi = to_fraction(lo), to_fraction(hi)
    n = int((hi - lo) * grid)
    while True:
        a, b = sorted(rng.sample(range(n + 1), 2))
        if b - a < 2:
            continue
        k = rng.randint(1, min(max_breaks, b - a - 1))
        xs = sorted(rng.sample(range(a + 1, b), k))
        ys = sorted(rng.sample(range(a + 1, b), k))
        if xs == ys:
            continue
        pts = [(a, a), *zip(xs, ys), (b, b)]
        return PLMap((lo + Fraction(x, grid), lo + Fraction(y, grid)) for x, y in pts)


def random_assignment(rng: random.Random, gens: Iterable[str], identity_rate: float = 0.0, **kw) -> dict[str, PLMap]:
    out = {}
    for g in sorted(gens):
        out[g] = PLMap() if rng.random() < identity_rate else random_plmap(rng, **kw)
    return out


@dataclass(frozen=True)
class Witness:
    """An assignment under which ``x t != x``: a proof that ``t != e``."""

    assignment: Mapping[str, PLMap]
    x: Fraction
    image: Fraction

    def to_json(self) -> dict:
        return {
            "assignment": {g: m.to_json() for g, m in sorted(self.assignment.items())},
            "x": _fmt(self.x),
            "image": _fmt(self.image),
        }


def _sample_rng(seed: int, i: int) -> random.Random:
    return random.Random(f"{seed}:{i}")


def _try_sample(t: LTerm, gens: Sequence[str], seed: int, i: int) -> Optional[Witness]:
    rng = _sample_rng(seed, i)
    assignment = random_assignment(rng, gens)
    m = term_map(t, assignment)
    if m.is_identity():
        return None
    bump = supports(m)[0]
    x = (bump.lo + bump.hi) / 2
    return Witness(assignment, x, eval_term(t, assignment, x))


def _try_range(t: LTerm, gens: Sequence[str], seed: int, start: int, stop: int) -> Optional[tuple[int, Witness]]:
    for i in range(start, stop):
        w = _try_sample(t, gens, seed, i)
        if w is not None:
            return i, w
    return None


def find_witness(
    t: LTerm,
    budget: int = 1000,
    seed: int = 0,
    jobs: int = 1,
    deterministic: bool = True,
) -> Optional[Witness]:
    """Search random PL assignments for one that moves a point.

    Sample ``i`` draws from its own generator seeded by ``(seed, i)``, so the
    first witness found is the same whether or not samples run in parallel
    (with ``deterministic`` set).
    """
    gens = sorted(generators(t))
    if jobs <= 1:
        found = _try_range(t, gens, seed, 0, budget)
        return None if found is None else found[1]
    chunk = max(1, -(-budget // (4 * jobs)))
    ranges = [(s, min(budget, s + chunk)) for s in range(0, budget, chunk)]
    with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
        futs = [pool.submit(_try_range, t, gens, seed, a, b) for a, b in ranges]
        order = futs if deterministic else cf.as_completed(futs)
        for fut in order:
            found = fut.result()
            if found is not None:
                for f in futs:
                    f.cancel()
                return found[1]
    return None


# ---------------------------------------------------------------------------
# Conjugating one bump onto another


class ConjugatorBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class LazyConjugator:
    """``h`` with ``h^-1 f h = g``, evaluated on demand.

    On the support of ``f``, ``h`` is the union of ``f^-m h0 g^m`` over the
    fundamental domains ``[alpha f^m, alpha f^(m+1)]``.  Outside it, ``h``
    translates the two complementary rays onto those of ``g``.
    """

    f: PLMap
    g: PLMap
    alpha: Fraction
    beta: Fraction
    h0: tuple[tuple[Fraction, Fraction], ...]  # breakpoints of [alpha, alpha f] -> [beta, beta g]
    f_support: tuple[Fraction, Fraction]
    g_support: tuple[Fraction, Fraction]
    budget: int = 10**6

    def h0_at(self, x: Fraction) -> Fraction:
        xs = [p[0] for p in self.h0]
        ys = [p[1] for p in self.h0]
        if x == xs[-1]:
            return ys[-1]
        i = bisect.bisect_right(xs, x)
        x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def apply(self, x: Rational) -> Fraction:
        x = to_fraction(x)
        flo, fhi = self.f_support
        glo, ghi = self.g_support
        if x <= flo:
            return x - flo + glo
        if x >= fhi:
            return x - fhi + ghi
        top = self.f(self.alpha)
        m = 0
        while x >= top:
            x = self.f.preimage(x)
            m += 1
            if m > self.budget:
                raise ConjugatorBudgetExceeded(f"more than {self.budget} iterations of f")
        while x < self.alpha:
            x = self.f(x)
            m -= 1
            if -m > self.budget:
                raise ConjugatorBudgetExceeded(f"more than {self.budget} iterations of f")
        y = self.h0_at(x)
        step = self.g if m > 0 else self.g.preimage
        for _ in range(abs(m)):
            y = step(y)
        return y

    __call__ = apply


def _single_positive_bump(m: PLMap, label: str) -> tuple[Fraction, Fraction]:
    bumps = supports(m)
    if len(bumps) != 1 or not bumps[0].is_positive():
        raise ValueError(f"{label} must be a single positive bump")
    return bumps[0].interval


def conjugator(
    f: PLMap,
    g: PLMap,
    alpha: Rational,
    beta: Rational,
    h0: Optional[Sequence[Sequence[Rational]]] = None,
    budget: int = 10**6,
) -> LazyConjugator:
    """Extend ``h0: [alpha, alpha f] -> [beta, beta g]`` to ``h`` with ``h^-1 f h = g``.

    *h0* is a list of breakpoints from ``(alpha, beta)`` to
    ``(alpha f, beta g)``; the affine bijection is used when omitted.
    """
    alpha, beta = to_fraction(alpha), to_fraction(beta)
    fs = _single_positive_bump(f, "f")
    gs = _single_positive_bump(g, "g")
    if not fs[0] < alpha < fs[1]:
        raise ValueError("alpha must lie in the support of f")
    if not gs[0] < beta < gs[1]:
        raise ValueError("beta must lie in the support of g")
    frag = (
        [(alpha, beta), (f(alpha), g(beta))]
        if h0 is None
        else [(to_fraction(x), to_fraction(y)) for x, y in h0]
    )
    if frag[0] != (alpha, beta) or frag[-1] != (f(alpha), g(beta)):
        raise ValueError("h0 must map alpha to beta and alpha f to beta g")
    for (x0, y0), (x1, y1) in zip(frag, frag[1:]):
        if not (x0 < x1 and y0 < y1):
            raise ValueError("h0 must be strictly increasing")
    return LazyConjugator(f, g, alpha, beta, tuple(frag), fs, gs, budget)
