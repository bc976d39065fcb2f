"""Finite inverse semigroups given by multiplication tables.

Elements are opaque string labels with a fixed total order (input order).
Validation is an exhaustive axiom scan; every rejection carries a witness
tuple that can be re-checked against the raw table.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class InverseSemigroupError(ValueError):
    """Base class for table-validation failures. Carries a witness tuple."""

    def __init__(self, message: str, witness: tuple):
        super().__init__(f"{message}: witness {witness}")
        self.witness = witness


class NotAssociative(InverseSemigroupError):
    def __init__(self, a, b, c):
        super().__init__("multiplication table is not associative", (a, b, c))


class NoUniqueInverse(InverseSemigroupError):
    def __init__(self, s, candidates):
        super().__init__(
            f"element {s!r} has {len(candidates)} generalized inverses", (s, tuple(candidates))
        )


class IdempotentsDoNotCommute(InverseSemigroupError):
    def __init__(self, e, f):
        super().__init__("idempotents do not commute", (e, f))


class BadZeroElement(InverseSemigroupError):
    def __init__(self, zero, s):
        super().__init__(f"declared zero {zero!r} does not absorb", (zero, s))


class NoZeroElement(ValueError):
    pass


@dataclass(frozen=True)
class InverseSemigroup:
    """A validated finite inverse semigroup.

    Construct through :func:`validate_inverse_semigroup`; the constructor
    itself does not re-check the axioms.
    """

    elements: tuple[str, ...]
    table: tuple[tuple[str, ...], ...]  # table[i][j] = elements[i] * elements[j]
    star_map: dict[str, str]
    zero: str | None = None
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.elements)})

    def mul(self, a: str, b: str) -> str:
        return self.table[self._index[a]][self._index[b]]

    def star(self, s: str) -> str:
        return self.star_map[s]

    def is_idempotent(self, s: str) -> bool:
        return self.mul(s, s) == s

    def idempotents(self) -> tuple[str, ...]:
        return tuple(s for s in self.elements if self.is_idempotent(s))

    def leq(self, s: str, t: str) -> bool:
        """Natural partial order: s <= t iff s = t * (s*s)."""
        return s == self.mul(t, self.mul(self.star(s), s))

    def source(self, s: str) -> str:
        """The idempotent s*s."""
        return self.mul(self.star(s), s)

    def range(self, s: str) -> str:
        """The idempotent ss*."""
        return self.mul(s, self.star(s))

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, s) -> bool:
        return s in self._index


def validate_inverse_semigroup(
    elements, table, zero: str | None = None
) -> InverseSemigroup:
    """Check the inverse-semigroup axioms exhaustively and fill in the star.

    ``table`` is a square array of labels, ``table[i][j] = elements[i]*elements[j]``.
    Raises NotAssociative / NoUniqueInverse / IdempotentsDoNotCommute /
    BadZeroElement with a concrete witness on the first failure (scan order is
    the input element order, so rejection is deterministic).
    """
    elements = tuple(elements)
    if len(set(elements)) != len(elements):
        raise ValueError("duplicate element labels")
    n = len(elements)
    rows = tuple(tuple(row) for row in table)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError("multiplication table is not square")
    for row in rows:
        for v in row:
            if v not in set(elements):
                raise ValueError(f"table entry {v!r} is not an element")

    idx = {s: i for i, s in enumerate(elements)}

    def mul(a, b):
        return rows[idx[a]][idx[b]]

    for a in elements:
        for b in elements:
            ab = mul(a, b)
            for c in elements:
                if mul(ab, c) != mul(a, mul(b, c)):
                    raise NotAssociative(a, b, c)

    star = {}
    for s in elements:
        candidates = [t for t in elements if mul(mul(s, t), s) == s and mul(mul(t, s), t) == t]
        if len(candidates) != 1:
            raise NoUniqueInverse(s, candidates)
        star[s] = candidates[0]

    idems = [e for e in elements if mul(e, e) == e]
    for e in idems:
        for f in idems:
            if mul(e, f) != mul(f, e):
                raise IdempotentsDoNotCommute(e, f)

    if zero is not None:
        if zero not in idx:
            raise ValueError(f"declared zero {zero!r} is not an element")
        for s in elements:
            if mul(zero, s) != zero or mul(s, zero) != zero:
                raise BadZeroElement(zero, s)

    return InverseSemigroup(elements=elements, table=rows, star_map=star, zero=zero)


def idempotents(S: InverseSemigroup) -> tuple[str, ...]:
    """The idempotent semilattice E(S), in input order."""
    return S.idempotents()


def natural_order(S: InverseSemigroup) -> frozenset[tuple[str, str]]:
    """All pairs (s, t) with s <= t in the natural partial order."""
    return frozenset((s, t) for s in S.elements for t in S.elements if S.leq(s, t))


def is_continuous(S: InverseSemigroup) -> tuple[bool, tuple[str, str] | None]:
    """Decide triviality of the relation s ~ t given by: s*s = t*t and every
    nonzero idempotent f <= s*s dominates a nonzero idempotent e <= f with
    se = te.

    Requires a zero element. Returns (True, None) or (False, (s, t)) with a
    witnessing pair s != t that are related.
    """
    if S.zero is None:
        raise NoZeroElement("continuity predicate needs a declared zero element")
    nonzero_idems = [e for e in S.idempotents() if e != S.zero]
    for s in S.elements:
        for t in S.elements:
            if s == t:
                continue
            if S.source(s) != S.source(t):
                continue
            related = True
            for f in nonzero_idems:
                if not S.leq(f, S.source(s)):
                    continue
                if not any(
                    S.leq(e, f) and S.mul(s, e) == S.mul(t, e) for e in nonzero_idems
                ):
                    related = False
                    break
            if related:
                return False, (s, t)
    return True, None


def adjoin_zero(S: InverseSemigroup, label: str = "0") -> InverseSemigroup:
    """Adjoin a fresh zero element below everything."""
    if label in S:
        raise ValueError(f"label {label!r} already in use")
    elements = S.elements + (label,)
    rows = [list(row) + [label] for row in S.table] + [[label] * len(elements)]
    return validate_inverse_semigroup(elements, rows, zero=label)
