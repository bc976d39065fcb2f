"""Named fixtures and the seeded random bundle generator.

Random bundles arise as the tautological action of a closed set of partial
bijections of a finite point set, twisted by an exact coboundary cocycle
with values in the fourth roots of unity (the only systematic way to
mass-produce tables that satisfy the cocycle identity and the slot
normalizations exactly).
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction as F

from germlab.fellbundle import (
    Cocycle,
    FellBundle,
    GroupoidPresentation,
    TwistedActionPresentation,
    build_bundle,
)
from germlab.germgpd import FiniteGroupoid, build_germ_groupoid
from germlab.invsgp import InverseSemigroup, adjoin_zero, validate_inverse_semigroup
from germlab.spaces import (
    DiscreteMap,
    DiscreteSpace,
    IntervalSpace,
    Piece,
    RationalSet,
    identity_on,
    validate_action,
)

FOURTH_ROOTS = (1 + 0j, 1j, -1 + 0j, -1j)


# ---------------------------------------------------------------------------
# Semigroups
# ---------------------------------------------------------------------------


def z2_semigroup() -> InverseSemigroup:
    return validate_inverse_semigroup(["1", "g"], [["1", "g"], ["g", "1"]])


def z4_semigroup() -> InverseSemigroup:
    elems = ["g0", "g1", "g2", "g3"]
    table = [[f"g{(i + j) % 4}" for j in range(4)] for i in range(4)]
    return validate_inverse_semigroup(elems, table)


def s3_semigroup(zero: str | None = "e") -> InverseSemigroup:
    return validate_inverse_semigroup(
        ["e", "1", "s"],
        [["e", "e", "e"], ["e", "1", "s"], ["e", "s", "1"]],
        zero=zero,
    )


def semilattice_01_semigroup() -> InverseSemigroup:
    return validate_inverse_semigroup(["0", "1"], [["0", "0"], ["0", "1"]], zero="0")


# ---------------------------------------------------------------------------
# Named bundles
# ---------------------------------------------------------------------------


def z2_flip_bundle() -> FellBundle:
    """Z/2 flipping two points; untwisted."""
    S = z2_semigroup()
    space = DiscreteSpace(("x", "y"))
    theta = {
        "1": DiscreteMap.identity_on(space, space.full_set()),
        "g": DiscreteMap(space, (("x", "y"), ("y", "x"))),
    }
    action = validate_action(S, space, theta)
    return build_bundle(TwistedActionPresentation(S, action))


def z2_flip_with_zero_bundle() -> FellBundle:
    """Z/2 flip with an adjoined zero and trivial zero fiber."""
    S = adjoin_zero(z2_semigroup())
    space = DiscreteSpace(("x", "y"))
    theta = {
        "1": DiscreteMap.identity_on(space, space.full_set()),
        "g": DiscreteMap(space, (("x", "y"), ("y", "x"))),
        "0": DiscreteMap(space, ()),
    }
    action = validate_action(S, space, theta)
    return build_bundle(TwistedActionPresentation(S, action))


def semilattice_01_bundle() -> FellBundle:
    """A_0 = C({x0}) included in A_1 = C({x0, x1})."""
    S = semilattice_01_semigroup()
    space = DiscreteSpace(("x0", "x1"))
    theta = {
        "0": DiscreteMap(space, (("x0", "x0"),)),
        "1": DiscreteMap.identity_on(space, space.full_set()),
    }
    action = validate_action(S, space, theta)
    return build_bundle(TwistedActionPresentation(S, action))


def zero_bundle(S: InverseSemigroup | None = None) -> FellBundle:
    """All fibers zero: the empty space forces the empty groupoid."""
    S = S or s3_semigroup()
    space = DiscreteSpace(())
    theta = {s: DiscreteMap(space, ()) for s in S.elements}
    action = validate_action(S, space, theta)
    return build_bundle(TwistedActionPresentation(S, action))


def worked_example_bundle(grid_resolution: int = 101) -> FellBundle:
    """The three-element semigroup acting trivially on [-1, 1] with
    U_e = [-1, 0): fibers C0[-1,0), C[-1,1], C[-1,1]."""
    S = s3_semigroup()
    space = IntervalSpace(((F(-1), F(1)),))
    u_e = RationalSet((Piece(F(-1), True, F(0), False),))
    theta = {
        "e": identity_on(space, u_e),
        "1": identity_on(space, space.full_set()),
        "s": identity_on(space, space.full_set()),
    }
    action = validate_action(S, space, theta)
    return build_bundle(
        TwistedActionPresentation(S, action, grid_resolution=grid_resolution)
    )


def z4_cocycle_bundle() -> FellBundle:
    """Z/4 on a point with the bilinear cocycle w(g^a, g^b) = i^(ab).

    Built through the groupoid presentation: the twisted-action normalization
    w(s, s*) = 1 does not hold for this cocycle.
    """
    g, sigma = z4_twisted_groupoid()
    family = [frozenset({a}) for a in g.arrows]
    return build_bundle(GroupoidPresentation(g, sigma, tuple(family)))


# ---------------------------------------------------------------------------
# Finite twisted groupoids (round-trip inputs)
# ---------------------------------------------------------------------------


def group_groupoid(n: int, unit: str = "u") -> FiniteGroupoid:
    """Z/n as a one-unit groupoid with arrows g0..g(n-1)."""
    arrows = tuple(f"g{i}" for i in range(n))
    compose = {(f"g{i}", f"g{j}"): f"g{(i + j) % n}" for i in range(n) for j in range(n)}
    return FiniteGroupoid(
        units=("g0",),
        arrows=arrows,
        src={a: "g0" for a in arrows},
        rng={a: "g0" for a in arrows},
        compose_table=compose,
        inv_table={f"g{i}": f"g{(-i) % n}" for i in range(n)},
    )


def pair_groupoid(points: tuple[str, ...]) -> FiniteGroupoid:
    """The full equivalence-relation groupoid on a finite point set; the
    arrow p->q is named a:p:q and the unit at p is a:p:p."""

    def nm(p, q):
        return f"a:{p}:{q}"

    units = tuple(nm(p, p) for p in points)
    arrows = tuple(nm(p, q) for p in points for q in points)
    src = {nm(p, q): nm(p, p) for p in points for q in points}
    rng = {nm(p, q): nm(q, q) for p in points for q in points}
    compose = {}
    for p in points:
        for q in points:
            for p2 in points:
                for q2 in points:
                    if q == p2:  # src of the left factor == rng of the right
                        compose[(nm(p2, q2), nm(p, q))] = nm(p, q2)
    inv = {nm(p, q): nm(q, p) for p in points for q in points}
    return FiniteGroupoid(
        units=units, arrows=arrows, src=src, rng=rng,
        compose_table=compose, inv_table=inv,
    )


def unit_space_groupoid(points: tuple[str, ...]) -> FiniteGroupoid:
    """A space viewed as a groupoid: units only."""
    units = tuple(f"e{p}" for p in points)
    return FiniteGroupoid(
        units=units,
        arrows=units,
        src={u: u for u in units},
        rng={u: u for u in units},
        compose_table={(u, u): u for u in units},
        inv_table={u: u for u in units},
    )


def z4_twisted_groupoid():
    g = group_groupoid(4)
    sigma = {
        (f"g{i}", f"g{j}"): FOURTH_ROOTS[(i * j) % 4] for i in range(4) for j in range(4)
    }
    return g, sigma


def z2_twisted_groupoid(nontrivial: bool = True):
    g = group_groupoid(2)
    sigma = {("g1", "g1"): -1 + 0j} if nontrivial else {}
    return g, sigma


def all_bissections(g: FiniteGroupoid):
    """Every subset with injective source and range (small groupoids only)."""
    out = []
    for r in range(len(g.arrows) + 1):
        for combo in itertools.combinations(g.arrows, r):
            if g.is_bissection(combo):
                out.append(frozenset(combo))
    return out


def closed_family(g: FiniteGroupoid, members):
    members = {frozenset(m) for m in members}
    while True:
        new = set()
        for u in members:
            new.add(g.inverse_set(u))
            for v in members:
                new.add(g.product_set(u, v))
        if new <= members:
            return members
        members |= new


def singleton_family(g: FiniteGroupoid):
    return closed_family(g, [frozenset({a}) for a in g.arrows])


def twisted_groupoid_fixtures():
    """Ten finite twisted-groupoid fixtures for round-trip verification,
    including nontrivial circle cocycles on Z/2 and Z/4."""
    out = []
    gp2 = pair_groupoid(("p", "q"))
    out.append((gp2, {}, all_bissections(gp2)))
    out.append((gp2, {}, singleton_family(gp2)))
    g2, s2 = z2_twisted_groupoid(nontrivial=False)
    out.append((g2, s2, singleton_family(g2)))
    g2n, s2n = z2_twisted_groupoid(nontrivial=True)
    out.append((g2n, s2n, singleton_family(g2n)))
    g4, s4 = z4_twisted_groupoid()
    out.append((g4, s4, singleton_family(g4)))
    out.append((group_groupoid(4), {}, singleton_family(group_groupoid(4))))
    out.append((group_groupoid(3), {}, singleton_family(group_groupoid(3))))
    gu = unit_space_groupoid(("a", "b", "c"))
    out.append((gu, {}, all_bissections(gu)))
    gp3 = pair_groupoid(("p", "q", "r"))
    out.append((gp3, {}, singleton_family(gp3)))
    # nontrivial-valued coboundary on the pair groupoid; the asymmetric gauge
    # makes sigma(g, g^-1) = i, exercising the weak normalization path
    gauge = {a: 1 + 0j for a in gp2.units}
    gauge["a:p:q"], gauge["a:q:p"] = 1j, 1 + 0j
    sigma = {
        (a, b): gauge[a] * gauge[b] / gauge[gp2.compose_table[(a, b)]]
        for a in gp2.arrows
        for b in gp2.arrows
        if (a, b) in gp2.compose_table
    }
    out.append((gp2, sigma, all_bissections(gp2)))
    return out


# ---------------------------------------------------------------------------
# Seeded random bundles
# ---------------------------------------------------------------------------


def _close_partial_bijections(gens: list[tuple], cap: int):
    """Close a set of partial bijections (as sorted pair-tuples) under
    composition and inversion; None when the closure exceeds the cap."""

    def compose(f, g):  # f after g
        fd = dict(f)
        return tuple(sorted((x, fd[y]) for x, y in g if y in fd))

    def invert(f):
        return tuple(sorted((y, x) for x, y in f))

    closure = set()
    work = [tuple(sorted(g)) for g in gens]
    while work:
        f = work.pop()
        if f in closure:
            continue
        closure.add(f)
        if len(closure) > cap:
            return None
        for g in list(closure):
            for h in (compose(f, g), compose(g, f)):
                if h not in closure:
                    work.append(h)
        inv = invert(f)
        if inv not in closure:
            work.append(inv)
    return closure


def random_action(seed: int, max_elements: int = 8, max_points: int = 16):
    """The tautological action of a random closed set of partial bijections."""
    rng = random.Random(seed)
    while True:
        n_pts = rng.randint(2, max_points)
        pts = [f"x{i}" for i in range(n_pts)]
        gens = []
        rotation_only = n_pts >= 3 and rng.random() < 0.35
        if rotation_only:
            # a cyclic rotation: orbits of length >= 3 make room for twists
            # that conjugate-paired gauges cannot cancel
            k = rng.randint(3, min(5, n_pts))
            cyc = rng.sample(pts, k)
            gens.append(tuple((cyc[i], cyc[(i + 1) % k]) for i in range(k)))
            if rng.random() < 0.5:
                patch = rng.sample(pts, rng.randint(1, n_pts))
                gens.append(tuple((x, x) for x in patch))
        else:
            for _ in range(rng.randint(1, 3)):
                k = rng.randint(1, min(6, n_pts))
                dom = rng.sample(pts, k)
                img = rng.sample(pts, k)
                gens.append(tuple(zip(dom, img)))
            if rng.random() < 0.7:
                # an identity patch keeps the closure tame but widens the space
                patch = rng.sample(pts, rng.randint(1, n_pts))
                gens.append(tuple((x, x) for x in patch))
        closure = _close_partial_bijections(gens, max_elements)
        if closure is None:
            continue
        maps = sorted(closure)
        labels = [f"s{i}" for i in range(len(maps))]
        index = {m: l for m, l in zip(maps, labels)}

        def compose(f, g):
            fd = dict(f)
            return tuple(sorted((x, fd[y]) for x, y in g if y in fd))

        table = [[index[compose(f, g)] for g in maps] for f in maps]
        zero = index.get(()) if () in index else None
        S = validate_inverse_semigroup(labels, table, zero=zero)

        covered = sorted({x for m in maps for x, _ in m} | {y for m in maps for _, y in m})
        if not covered:
            continue
        space = DiscreteSpace(tuple(covered))
        theta = {index[m]: DiscreteMap(space, m) for m in maps}
        action = validate_action(S, space, theta)
        return S, action, rng


def _coboundary_cocycle(S, action, rng: random.Random) -> Cocycle:
    """w(s,t)(x) = c([s,th_t x]) c([t,x]) / c([st,x]) for a germ-constant
    unimodular gauge c with c(unit) = 1 and c(inverse) = conjugate."""
    g = build_germ_groupoid(action)
    gauge = {}
    for germ in g.germs:
        if germ in gauge:
            continue
        if germ in g.units:
            gauge[germ] = 1 + 0j
            continue
        inv = g.inv(germ)
        if inv == germ:
            gauge[germ] = rng.choice((1 + 0j, -1 + 0j))  # forced real on involutions
        elif inv in gauge:
            gauge[germ] = gauge[inv].conjugate()
        else:
            gauge[germ] = rng.choice(FOURTH_ROOTS)

    def c(s, x):
        return gauge[g.germ(s, x)]

    entries = {}
    for s in S.elements:
        for t in S.elements:
            st = S.mul(s, t)
            th_t = action.theta_of(t)
            per_point = {}
            for x in sorted(action.domain_of(st).points):
                per_point[x] = c(s, th_t.apply(x)) * c(t, x) / c(st, x)
            if per_point:
                entries[(s, t)] = per_point
    return Cocycle(entries)


def random_bundle(seed: int, max_elements: int = 8, max_points: int = 16) -> FellBundle:
    """A valid random twisted-action bundle, reproducible from the seed."""
    S, action, rng = random_action(seed, max_elements, max_points)
    omega = _coboundary_cocycle(S, action, rng)
    return build_bundle(TwistedActionPresentation(S, action, omega))


# ---------------------------------------------------------------------------
# Mutations (rejection oracles)
# ---------------------------------------------------------------------------


def mutate_semigroup_table(S: InverseSemigroup, rng: random.Random):
    """A mutated multiplication table together with an independent
    certificate that one axiom instance is broken by construction.

    Returns (elements, table, certificate) or None if this draw found no
    breaking mutation (caller redraws).
    """
    elems = list(S.elements)
    n = len(elems)
    if n < 2:
        return None
    table = [list(row) for row in S.table]
    for _ in range(64):
        i, j = rng.randrange(n), rng.randrange(n)
        old = table[i][j]
        new = rng.choice([e for e in elems if e != old])
        table[i][j] = new

        def mul(a, c):
            return table[elems.index(a)][elems.index(c)]

        # independent single-instance re-checks, not the validator scan
        broken = None
        for a, c, d in itertools.product(elems, repeat=3):
            if mul(mul(a, c), d) != mul(a, mul(c, d)):
                broken = ("assoc", (a, c, d))
                break
        if broken is None:
            for a in elems:
                invs = [
                    t for t in elems
                    if mul(mul(a, t), a) == a and mul(mul(t, a), t) == t
                ]
                if len(invs) != 1:
                    broken = ("inverse", (a, tuple(invs)))
                    break
        if broken is None:
            idem = [e for e in elems if mul(e, e) == e]
            for e, f in itertools.product(idem, repeat=2):
                if mul(e, f) != mul(f, e):
                    broken = ("idem", (e, f))
                    break
        if broken is not None:
            return elems, table, broken
        table[i][j] = old
    return None


def mutate_cocycle(b: FellBundle, rng: random.Random):
    """Denormalize one cocycle slot of a valid twisted-action bundle; the
    mutated entry is broken by construction (a forced-1 slot set to != 1)."""
    S = b.semigroup
    slots = []
    for s in S.elements:
        for t in S.elements:
            if not (S.is_idempotent(s) or S.is_idempotent(t) or t == S.star(s)):
                continue
            st = S.mul(s, t)
            pts = sorted(b.action.domain_of(st).points)
            for x in pts:
                slots.append((s, t, x))
    if not slots:
        return None
    s, t, x = rng.choice(slots)
    bad = rng.choice([v for v in FOURTH_ROOTS if v != 1] + [2.0 + 0j])
    entries = {k: (dict(v) if isinstance(v, dict) else v) for k, v in b.omega.entries.items()}
    cur = entries.get((s, t), {})
    if not isinstance(cur, dict):
        cur = {p: cur for p in sorted(b.action.domain_of(S.mul(s, t)).points)}
    cur[x] = bad
    entries[(s, t)] = cur
    return Cocycle(entries), (s, t, x, bad)


class RescaledInclusionBundle(FellBundle):
    """A test double whose inclusions are 2 x (extension by zero)."""

    def incl(self, t, a):
        out = super().incl(t, a)
        return self.scale(2.0, out)


def rescaled_inclusion_bundle(b: FellBundle) -> FellBundle:
    return RescaledInclusionBundle(
        semigroup=b.semigroup,
        action=b.action,
        omega=b.omega,
        presentation=b.presentation,
        grid_resolution=b.grid_resolution,
    )
