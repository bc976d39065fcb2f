from fractions import Fraction as F

from germlab.fixtures import (
    pair_groupoid,
    worked_example_bundle,
    random_bundle,
    semilattice_01_bundle,
    z2_flip_bundle,
    z2_flip_with_zero_bundle,
    zero_bundle,
)
from germlab.germgpd import (
    BasicOpen,
    Germ,
    bissection_Os,
    build_germ_groupoid,
    germ_equal,
    is_hausdorff,
    is_wide,
    is_wide_family,
    map_s_to_Os_injective,
)
from germlab.spaces import DiscreteSet, Piece, RationalSet


def test_zero_action_empty_groupoid():
    g = build_germ_groupoid(zero_bundle().action)
    assert g.is_empty()
    assert not g.units


def test_semilattice_groupoid_is_the_space():
    b = semilattice_01_bundle()
    g = build_germ_groupoid(b.action)
    assert len(g.germs) == 2
    assert g.units == frozenset(g.germs)
    # [0, x0] = [1, x0]: the inclusion collapses to one unit germ
    assert g.germ("0", "x0") == g.germ("1", "x0")


def test_z2_flip_transformation_groupoid():
    b = z2_flip_bundle()
    g = build_germ_groupoid(b.action)
    assert len(g.germs) == 4
    assert len(g.units) == 2
    arrows = [x for x in g.germs if x not in g.units]
    for a in arrows:
        assert g.source(a) != g.range(a)
    # groupoid axioms, exhaustively
    for g1 in g.germs:
        assert g.inv(g.inv(g1)) == g1
        assert g.source(g.inv(g1)) == g.range(g1)
        ux = g.unit_of(g.source(g1))
        assert g.compose(g1, ux) == g1
        for g2 in g.germs:
            if not g.composable(g1, g2):
                continue
            g12 = g.compose(g1, g2)
            assert g.source(g12) == g.source(g2)
            assert g.range(g12) == g.range(g1)
            for g3 in g.germs:
                if g.composable(g2, g3):
                    assert g.compose(g12, g3) == g.compose(g1, g.compose(g2, g3))


def test_unit_space_bijection():
    for seed in range(8):
        b = random_bundle(seed)
        g = build_germ_groupoid(b.action)
        units = {g.unit_of(x) for x in b.space.points}
        assert units == set(g.units)
        assert len(units) == len(b.space.points)


def test_worked_example_germ_cells():
    b = worked_example_bundle(grid_resolution=11)
    g = build_germ_groupoid(b.action)
    cells = {(c.s, (c.piece.lo, c.piece.lo_closed, c.piece.hi, c.piece.hi_closed))
             for c in g.cells}
    assert cells == {
        ("e", (F(-1), True, F(0), False)),
        ("1", (F(0), True, F(1), True)),
        ("s", (F(0), True, F(1), True)),
    }


def test_worked_example_germ_equalities():
    b = worked_example_bundle(grid_resolution=11)
    act = b.action
    assert germ_equal(act, "1", F(-1, 2), "s", F(-1, 2))
    assert germ_equal(act, "e", F(-1, 2), "1", F(-1, 2))
    assert not germ_equal(act, "1", F(1, 2), "s", F(1, 2))
    assert not germ_equal(act, "1", F(0), "s", F(0))


def test_worked_example_germ_composition():
    b = worked_example_bundle(grid_resolution=11)
    g = build_germ_groupoid(b.action)
    gs = g.germ("s", F(1, 2))
    assert g.compose(gs, gs) == g.germ("1", F(1, 2))
    assert g.inv(gs) == gs
    # over the shared region every leg gives the same (unit) germ
    assert g.germ("s", F(-1, 2)) == g.germ("e", F(-1, 2))
    assert g.is_unit(g.germ("s", F(-1, 2)))
    assert not g.is_unit(g.germ("s", F(1, 2)))


def test_discrete_always_hausdorff():
    for seed in range(8):
        b = random_bundle(seed)
        g = build_germ_groupoid(b.action)
        ok, witnesses = is_hausdorff(g)
        assert ok and not witnesses


def test_worked_example_not_hausdorff_with_exact_witness():
    b = worked_example_bundle(grid_resolution=11)
    g = build_germ_groupoid(b.action)
    ok, witnesses = is_hausdorff(g)
    assert not ok
    assert witnesses == ((Germ("1", F(0)), Germ("s", F(0))),)


def test_restricted_component_is_hausdorff():
    from germlab.fellbundle import TwistedActionPresentation, build_bundle
    from germlab.fixtures import s3_semigroup
    from germlab.spaces import IntervalSpace, identity_on, validate_action

    S = s3_semigroup()
    space = IntervalSpace(((F(1, 4), F(1)),))
    theta = {
        "e": identity_on(space, space.empty_set()),
        "1": identity_on(space, space.full_set()),
        "s": identity_on(space, space.full_set()),
    }
    action = validate_action(S, space, theta)
    b = build_bundle(TwistedActionPresentation(S, action))
    g = build_germ_groupoid(action)
    ok, witnesses = is_hausdorff(g)
    assert ok and not witnesses


def test_bissection_identities():
    for bundle in (z2_flip_bundle(), semilattice_01_bundle()):
        g = build_germ_groupoid(bundle.action)
        for s in bundle.semigroup.elements:
            bo = bissection_Os(g, s)
            assert bo.s == s
            assert bo.u == bundle.action.domain_of(s)


def test_bissection_Os_interval():
    b = worked_example_bundle(grid_resolution=11)
    g = build_germ_groupoid(b.action)
    bo = bissection_Os(g, "e")
    assert bo.u == RationalSet((Piece(F(-1), True, F(0), False),))


def test_Os_family_is_wide_worked_example():
    b = worked_example_bundle(grid_resolution=11)
    g = build_germ_groupoid(b.action)
    family = [bissection_Os(g, s) for s in b.semigroup.elements]
    ok, why = is_wide(g, family)
    assert ok, why


def test_family_missing_Os_not_wide():
    b = worked_example_bundle(grid_resolution=11)
    g = build_germ_groupoid(b.action)
    family = [bissection_Os(g, s) for s in ("e", "1")]
    ok, why = is_wide(g, family)
    assert not ok
    assert "covering" in why and "[s," in why


def test_singletons_are_wide_in_finite_groupoid():
    g = pair_groupoid(("p", "q"))
    singles = [frozenset({a}) for a in g.arrows]
    ok, why = is_wide_family(g, singles)
    assert ok, why


def test_singleton_basic_opens_are_wide():
    b = z2_flip_bundle()
    g = build_germ_groupoid(b.action)
    singles = [
        BasicOpen(germ.s, DiscreteSet(frozenset({germ.x}))) for germ in g.germs
    ]
    ok, why = is_wide(g, singles)
    assert ok, why


def test_Os_family_wide_discrete():
    b = z2_flip_bundle()
    g = build_germ_groupoid(b.action)
    family = [bissection_Os(g, s) for s in b.semigroup.elements]
    ok, why = is_wide(g, family)
    assert ok, why


def test_injectivity_zero_bundle():
    rep = map_s_to_Os_injective(zero_bundle())
    assert not rep.injective
    assert rep.witness is not None
    assert rep.implication_ok  # hypotheses fail, so no contradiction


def test_injectivity_semilattice():
    rep = map_s_to_Os_injective(semilattice_01_bundle())
    assert rep.injective
    assert rep.continuous is True
    assert rep.semi_faithful
    assert rep.zero_fiber_empty is False  # U_0 = {x0} is nonempty
    assert rep.implication_ok


def test_injectivity_group_bundle_with_zero():
    rep = map_s_to_Os_injective(z2_flip_with_zero_bundle())
    assert rep.injective
    assert rep.continuous is True
    assert rep.semi_faithful
    assert rep.zero_fiber_empty is True
    assert rep.hypotheses_hold
    assert rep.implication_ok


def test_injectivity_random_bundles_consistent():
    for seed in range(10):
        rep = map_s_to_Os_injective(random_bundle(seed))
        assert rep.implication_ok, seed


def test_Os_triple_product_germ_set_oracle():
    # O_s O_{s*} O_s = O_s, computed as literal germ-set products
    for bundle in (z2_flip_bundle(), semilattice_01_bundle(), random_bundle(13)):
        g = build_germ_groupoid(bundle.action)
        S = bundle.semigroup

        def germ_set(s):
            return {
                g.germ(s, x) for x in bundle.space.points
                if x in bundle.action.domain_of(s)
            }

        def set_product(a_set, b_set):
            return {
                g.compose(a, c) for a in a_set for c in b_set if g.composable(a, c)
            }

        for s in S.elements:
            os_set = germ_set(s)
            triple = set_product(set_product(os_set, germ_set(S.star(s))), os_set)
            assert triple == os_set
            assert set_product(germ_set(s), germ_set(S.star(s))) == germ_set(
                S.mul(s, S.star(s))
            )
