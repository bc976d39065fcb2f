"""Base spaces, open sets, partial homeomorphisms and inverse-semigroup actions.

Two kinds of space: finite discrete point sets, and finite unions of closed
rational intervals.  All interval arithmetic is exact (fractions.Fraction);
half-open boundary bookkeeping is explicit per endpoint so that sets like
[-1, 0) are first-class citizens.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteSpace:
    points: tuple[str, ...]

    kind = "discrete"

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate points")

    def full_set(self) -> "DiscreteSet":
        return DiscreteSet(frozenset(self.points))

    def empty_set(self) -> "DiscreteSet":
        return DiscreteSet(frozenset())

    def subset(self, points: Iterable[str]) -> "DiscreteSet":
        pts = frozenset(points)
        unknown = pts - set(self.points)
        if unknown:
            raise ValueError(f"points {sorted(unknown)} not in space")
        return DiscreteSet(pts)


@dataclass(frozen=True)
class IntervalSpace:
    components: tuple[tuple[Fraction, Fraction], ...]

    kind = "interval"

    def __post_init__(self):
        comps = tuple((frac(a), frac(b)) for a, b in self.components)
        for a, b in comps:
            if a > b:
                raise ValueError(f"component [{a},{b}] has lo > hi")
        for (a1, b1), (a2, b2) in zip(comps, comps[1:]):
            if b1 >= a2:
                raise ValueError("components must be disjoint and sorted")
        object.__setattr__(self, "components", comps)

    def full_set(self) -> "RationalSet":
        return RationalSet(tuple(Piece(a, True, b, True) for a, b in self.components))

    def empty_set(self) -> "RationalSet":
        return RationalSet(())

    def component_of(self, x: Fraction) -> tuple[Fraction, Fraction] | None:
        for a, b in self.components:
            if a <= x <= b:
                return (a, b)
        return None


Space = Union[DiscreteSpace, IntervalSpace]


# ---------------------------------------------------------------------------
# Point sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteSet:
    """A subset of a discrete space. Every subset is clopen."""

    points: frozenset[str]

    def __contains__(self, x) -> bool:
        return x in self.points

    def is_empty(self) -> bool:
        return not self.points

    def union(self, other: "DiscreteSet") -> "DiscreteSet":
        return DiscreteSet(self.points | other.points)

    def intersect(self, other: "DiscreteSet") -> "DiscreteSet":
        return DiscreteSet(self.points & other.points)

    def complement_in(self, space: DiscreteSpace) -> "DiscreteSet":
        return DiscreteSet(frozenset(space.points) - self.points)

    def closure(self, space: DiscreteSpace) -> "DiscreteSet":
        return self

    def issubset(self, other: "DiscreteSet") -> bool:
        return self.points <= other.points

    def boundary_points(self, space: DiscreteSpace) -> tuple:
        return ()

    def sample_points(self) -> tuple[str, ...]:
        return tuple(sorted(self.points))


@dataclass(frozen=True)
class Piece:
    """One interval with explicit endpoint-inclusion flags."""

    lo: Fraction
    lo_closed: bool
    hi: Fraction
    hi_closed: bool

    def __post_init__(self):
        object.__setattr__(self, "lo", frac(self.lo))
        object.__setattr__(self, "hi", frac(self.hi))
        if self.lo > self.hi:
            raise ValueError("piece with lo > hi")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError("degenerate piece must be closed on both sides")

    def __contains__(self, x) -> bool:
        x = frac(x)
        if self.lo < x < self.hi:
            return True
        if x == self.lo and self.lo_closed:
            return True
        if x == self.hi and self.hi_closed:
            return True
        return False

    def sample_point(self) -> Fraction:
        if self.lo == self.hi:
            return self.lo
        return (self.lo + self.hi) / 2

    def is_degenerate(self) -> bool:
        return self.lo == self.hi


def _merge_pieces(pieces: Iterable[Piece]) -> tuple[Piece, ...]:
    items = sorted(pieces, key=lambda p: (p.lo, not p.lo_closed, p.hi, p.hi_closed))
    merged: list[Piece] = []
    for p in items:
        if not merged:
            merged.append(p)
            continue
        c = merged[-1]
        touches = p.lo < c.hi or (p.lo == c.hi and (c.hi_closed or p.lo_closed))
        if touches:
            if p.hi > c.hi:
                hi, hic = p.hi, p.hi_closed
            elif p.hi == c.hi:
                hi, hic = c.hi, c.hi_closed or p.hi_closed
            else:
                hi, hic = c.hi, c.hi_closed
            merged[-1] = Piece(c.lo, c.lo_closed, hi, hic)
        else:
            merged.append(p)
    return tuple(merged)


@dataclass(frozen=True)
class RationalSet:
    """A finite union of rational intervals in canonical (merged, sorted) form.

    Canonical form makes equality structural; all set operations are exact.
    """

    pieces: tuple[Piece, ...]

    def __post_init__(self):
        object.__setattr__(self, "pieces", _merge_pieces(self.pieces))

    def __contains__(self, x) -> bool:
        x = frac(x)
        return any(x in p for p in self.pieces)

    def is_empty(self) -> bool:
        return not self.pieces

    def union(self, other: "RationalSet") -> "RationalSet":
        return RationalSet(self.pieces + other.pieces)

    def intersect(self, other: "RationalSet") -> "RationalSet":
        out = []
        for p in self.pieces:
            for q in other.pieces:
                if p.lo > q.lo or (p.lo == q.lo and (q.lo_closed or not p.lo_closed)):
                    lo, loc = p.lo, p.lo_closed and (q.lo < p.lo or q.lo_closed)
                else:
                    lo, loc = q.lo, q.lo_closed and (p.lo < q.lo or p.lo_closed)
                if p.hi < q.hi or (p.hi == q.hi and (q.hi_closed or not p.hi_closed)):
                    hi, hic = p.hi, p.hi_closed and (q.hi > p.hi or q.hi_closed)
                else:
                    hi, hic = q.hi, q.hi_closed and (p.hi > q.hi or p.hi_closed)
                if lo < hi or (lo == hi and loc and hic):
                    out.append(Piece(lo, loc, hi, hic))
        return RationalSet(tuple(out))

    def complement_in(self, space: IntervalSpace) -> "RationalSet":
        out = []
        for a, b in space.components:
            comp = self.intersect(RationalSet((Piece(a, True, b, True),)))
            cur_lo, cur_closed = a, True
            for p in comp.pieces:
                if cur_lo < p.lo:
                    out.append(Piece(cur_lo, cur_closed, p.lo, not p.lo_closed))
                elif cur_lo == p.lo and cur_closed and not p.lo_closed:
                    out.append(Piece(cur_lo, True, cur_lo, True))
                cur_lo, cur_closed = p.hi, not p.hi_closed
            if cur_lo < b:
                out.append(Piece(cur_lo, cur_closed, b, True))
            elif cur_lo == b and cur_closed:
                out.append(Piece(b, True, b, True))
        return RationalSet(tuple(out))

    def closure(self, space: IntervalSpace | None = None) -> "RationalSet":
        return RationalSet(tuple(Piece(p.lo, True, p.hi, True) for p in self.pieces))

    def issubset(self, other: "RationalSet") -> bool:
        return self.intersect(other) == self

    def boundary_points(self, space: IntervalSpace) -> tuple[Fraction, ...]:
        """Points of closure(self) \\ self, i.e. the missing endpoints."""
        out = []
        for p in self.pieces:
            if not p.lo_closed and p.lo not in self:
                out.append(p.lo)
            if not p.hi_closed and p.hi not in self:
                out.append(p.hi)
        return tuple(sorted(set(out)))

    def endpoints(self) -> tuple[Fraction, ...]:
        out = set()
        for p in self.pieces:
            out.add(p.lo)
            out.add(p.hi)
        return tuple(sorted(out))

    def sample_points(self) -> tuple[Fraction, ...]:
        return tuple(p.sample_point() for p in self.pieces)

    def is_relatively_open(self, space: IntervalSpace) -> bool:
        """True if the set is open in the subspace topology of the components."""
        for p in self.pieces:
            comp_lo = space.component_of(p.lo)
            comp_hi = space.component_of(p.hi)
            if comp_lo is None or comp_hi is None:
                return False
            if p.is_degenerate():
                if comp_lo[0] != comp_lo[1]:
                    return False
                continue
            if p.lo_closed and p.lo != comp_lo[0]:
                return False
            if p.hi_closed and p.hi != comp_hi[1]:
                return False
        return True


PointSet = Union[DiscreteSet, RationalSet]


def closure(u: PointSet, x_space: Space) -> PointSet:
    """Closure of an open set, in the same representation family."""
    return u.closure(x_space)


# ---------------------------------------------------------------------------
# Partial homeomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteMap:
    """A partial bijection of a discrete space (stored as sorted pairs)."""

    space: DiscreteSpace
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple(sorted(self.pairs))
        srcs = [a for a, _ in pairs]
        dsts = [b for _, b in pairs]
        if len(set(srcs)) != len(srcs) or len(set(dsts)) != len(dsts):
            raise ValueError("map is not a partial bijection")
        known = set(self.space.points)
        if not set(srcs) <= known or not set(dsts) <= known:
            raise ValueError("map uses points outside the space")
        object.__setattr__(self, "pairs", pairs)

    def domain(self) -> DiscreteSet:
        return DiscreteSet(frozenset(a for a, _ in self.pairs))

    def range(self) -> DiscreteSet:
        return DiscreteSet(frozenset(b for _, b in self.pairs))

    def apply(self, x: str) -> str:
        for a, b in self.pairs:
            if a == x:
                return b
        raise KeyError(x)

    def invert(self) -> "DiscreteMap":
        return DiscreteMap(self.space, tuple((b, a) for a, b in self.pairs))

    def compose(self, other: "DiscreteMap") -> "DiscreteMap":
        """self after other."""
        dom = self.domain()
        out = [(a, self.apply(b)) for a, b in other.pairs if b in dom]
        return DiscreteMap(self.space, tuple(out))

    def restrict(self, u: DiscreteSet) -> "DiscreteMap":
        return DiscreteMap(self.space, tuple((a, b) for a, b in self.pairs if a in u))

    @staticmethod
    def identity_on(space: DiscreteSpace, u: DiscreteSet) -> "DiscreteMap":
        return DiscreteMap(space, tuple((x, x) for x in sorted(u.points)))


@dataclass(frozen=True)
class AffinePiece:
    """x |-> alpha*x + beta on one domain piece. Degenerate pieces are
    normalized to alpha = 1 so structural equality is meaningful."""

    domain: Piece
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        alpha, beta = frac(self.alpha), frac(self.beta)
        if self.domain.is_degenerate():
            y = alpha * self.domain.lo + beta
            alpha, beta = Fraction(1), y - self.domain.lo
        elif alpha == 0:
            raise ValueError("non-degenerate affine piece must have alpha != 0")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    def apply(self, x: Fraction) -> Fraction:
        return self.alpha * frac(x) + self.beta

    def image(self) -> Piece:
        d = self.domain
        ya, yb = self.apply(d.lo), self.apply(d.hi)
        if self.alpha > 0:
            return Piece(ya, d.lo_closed, yb, d.hi_closed)
        return Piece(yb, d.hi_closed, ya, d.lo_closed)

    def orientation(self) -> int:
        return 1 if self.alpha > 0 else -1

    def invert(self) -> "AffinePiece":
        return AffinePiece(self.image(), 1 / self.alpha, -self.beta / self.alpha)


def _canonical_affine(pieces: Iterable[AffinePiece]) -> tuple[AffinePiece, ...]:
    items = sorted(pieces, key=lambda p: (p.domain.lo, not p.domain.lo_closed))
    merged: list[AffinePiece] = []
    for p in items:
        if merged:
            c = merged[-1]
            same_map = (c.alpha, c.beta) == (p.alpha, p.beta)
            # a degenerate piece continuing an affine neighbour also merges
            if not same_map and p.domain.is_degenerate():
                same_map = c.apply(p.domain.lo) == p.apply(p.domain.lo)
            if not same_map and c.domain.is_degenerate():
                same_map = p.apply(c.domain.lo) == c.apply(c.domain.lo)
            touching = p.domain.lo < c.domain.hi or (
                p.domain.lo == c.domain.hi and (c.domain.hi_closed or p.domain.lo_closed)
            )
            if same_map and touching:
                dom = _merge_pieces([c.domain, p.domain])
                if len(dom) == 1:
                    alpha, beta = (p.alpha, p.beta) if c.domain.is_degenerate() else (c.alpha, c.beta)
                    merged[-1] = AffinePiece(dom[0], alpha, beta)
                    continue
        merged.append(p)
    return tuple(merged)


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """A piecewise-affine partial homeomorphism with rational data."""

    space: IntervalSpace
    pieces: tuple[AffinePiece, ...]

    def __post_init__(self):
        pieces = _canonical_affine(self.pieces)
        for i, p in enumerate(pieces):
            for q in pieces[i + 1 :]:
                if not RationalSet((p.domain,)).intersect(RationalSet((q.domain,))).is_empty():
                    raise ValueError("domain pieces overlap")
                if not RationalSet((p.image(),)).intersect(RationalSet((q.image(),))).is_empty():
                    raise ValueError("map is not globally injective")
        object.__setattr__(self, "pieces", pieces)

    def domain(self) -> RationalSet:
        return RationalSet(tuple(p.domain for p in self.pieces))

    def range(self) -> RationalSet:
        return RationalSet(tuple(p.image() for p in self.pieces))

    def apply(self, x) -> Fraction:
        x = frac(x)
        for p in self.pieces:
            if x in p.domain:
                return p.apply(x)
        raise KeyError(x)

    def invert(self) -> "PiecewiseAffineMap":
        return PiecewiseAffineMap(self.space, tuple(p.invert() for p in self.pieces))

    def compose(self, other: "PiecewiseAffineMap") -> "PiecewiseAffineMap":
        """self after other, domain = other^{-1}(range(other) & domain(self))."""
        out = []
        for g in other.pieces:
            gi = g.invert()
            for f in self.pieces:
                overlap = RationalSet((g.image(),)).intersect(RationalSet((f.domain,)))
                for piece in overlap.pieces:
                    lo, hi = gi.apply(piece.lo), gi.apply(piece.hi)
                    if gi.alpha > 0:
                        back = Piece(lo, piece.lo_closed, hi, piece.hi_closed)
                    else:
                        back = Piece(hi, piece.hi_closed, lo, piece.lo_closed)
                    out.append(
                        AffinePiece(back, f.alpha * g.alpha, f.alpha * g.beta + f.beta)
                    )
        return PiecewiseAffineMap(self.space, tuple(out))

    def restrict(self, u: RationalSet) -> "PiecewiseAffineMap":
        out = []
        for p in self.pieces:
            for piece in RationalSet((p.domain,)).intersect(u).pieces:
                out.append(AffinePiece(piece, p.alpha, p.beta))
        return PiecewiseAffineMap(self.space, tuple(out))

    @staticmethod
    def identity_on(space: IntervalSpace, u: RationalSet) -> "PiecewiseAffineMap":
        return PiecewiseAffineMap(
            space, tuple(AffinePiece(p, Fraction(1), Fraction(0)) for p in u.pieces)
        )


PartialHomeo = Union[DiscreteMap, PiecewiseAffineMap]


def identity_on(space: Space, u: PointSet) -> PartialHomeo:
    if space.kind == "discrete":
        return DiscreteMap.identity_on(space, u)
    return PiecewiseAffineMap.identity_on(space, u)


def compose_partial(f: PartialHomeo, g: PartialHomeo) -> PartialHomeo:
    """f after g as partial maps; the empty-domain result is valid."""
    if f.space != g.space:
        raise ValueError("partial maps over different spaces")
    return f.compose(g)


def find_difference_point(f: PartialHomeo, g: PartialHomeo):
    """A point witnessing f != g (in domain or in values), or None."""
    df, dg = f.domain(), g.domain()
    if df != dg:
        if isinstance(df, DiscreteSet):
            diff = (df.points - dg.points) | (dg.points - df.points)
            return sorted(diff)[0]
        only_f = df.intersect(dg.complement_in(f.space))
        only_g = dg.intersect(df.complement_in(f.space))
        for s in (only_f, only_g):
            if not s.is_empty():
                return s.pieces[0].sample_point()
        # domains differ structurally but cover the same points: impossible in
        # canonical form
        raise AssertionError("canonical domains differ without a point witness")
    if isinstance(f, DiscreteMap):
        for x in sorted(df.points):
            if f.apply(x) != g.apply(x):
                return x
        return None
    if f == g:
        return None
    # same domain, different affine data: compare on the common refinement
    cuts = sorted(set(df.endpoints()) | {p.domain.lo for p in f.pieces} | {p.domain.hi for p in f.pieces}
                  | {p.domain.lo for p in g.pieces} | {p.domain.hi for p in g.pieces})
    candidates = list(cuts)
    for a, b in zip(cuts, cuts[1:]):
        candidates.extend([a + (b - a) / 3, a + (b - a) * 2 / 3])
    for x in candidates:
        if x in df and f.apply(x) != g.apply(x):
            return x
    return None


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------


class ActionError(ValueError):
    def __init__(self, message, witness):
        super().__init__(f"{message}: witness {witness}")
        self.witness = witness


class DomainMismatch(ActionError):
    def __init__(self, s):
        super().__init__("dom(theta(s)) != dom(theta(s*s))", (s,))


class NotHomomorphism(ActionError):
    def __init__(self, s, t, point):
        super().__init__("theta(s) o theta(t) != theta(st)", (s, t, point))


class IdempotentNotIdentity(ActionError):
    def __init__(self, e, point):
        super().__init__("theta(e) is not the identity on its domain", (e, point))


@dataclass(frozen=True)
class Action:
    """A validated action of an inverse semigroup by partial homeomorphisms."""

    semigroup: object
    space: Space
    theta: dict

    def theta_of(self, s: str) -> PartialHomeo:
        return self.theta[s]

    def domain_of(self, s: str) -> PointSet:
        """U_{s*s} = dom(theta(s)); for idempotent e this is U_e."""
        return self.theta[s].domain()

    def unit_cover(self) -> PointSet:
        """Union of the U_e over all idempotents."""
        idems = self.semigroup.idempotents()
        acc = self.space.empty_set()
        for e in idems:
            acc = acc.union(self.theta[e].domain())
        return acc


def validate_action(s, x_space: Space, theta: dict) -> Action:
    """Exhaustively verify the action axioms over all element pairs."""
    S = s
    for el in S.elements:
        if el not in theta:
            raise ValueError(f"theta is not total: missing {el!r}")
        if theta[el].space != x_space:
            raise ValueError(f"theta({el!r}) is over a different space")
        if x_space.kind == "interval" and not theta[el].domain().is_relatively_open(x_space):
            raise ValueError(f"dom(theta({el!r})) is not relatively open")

    for e in S.idempotents():
        ident = identity_on(x_space, theta[e].domain())
        w = find_difference_point(theta[e], ident)
        if w is not None:
            raise IdempotentNotIdentity(e, w)

    for el in S.elements:
        if theta[el].domain() != theta[S.source(el)].domain():
            raise DomainMismatch(el)
        w = find_difference_point(theta[S.star(el)], theta[el].invert())
        if w is not None:
            raise NotHomomorphism(S.star(el), el, w)

    for a in S.elements:
        for b in S.elements:
            comp = compose_partial(theta[a], theta[b])
            w = find_difference_point(comp, theta[S.mul(a, b)])
            if w is not None:
                raise NotHomomorphism(a, b, w)

    return Action(semigroup=S, space=x_space, theta=dict(theta))
