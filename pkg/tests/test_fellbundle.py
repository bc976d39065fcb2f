import random

import pytest

from germlab.fellbundle import (
    CocycleNotAssociative,
    CocycleNotNormalized,
    Cocycle,
    SpaceNotCovered,
    TwistedActionPresentation,
    build_bundle,
    eqx,
    is_saturated,
    is_semi_abelian,
    theta_from_element,
    theta_s,
    validate_axioms,
)
from germlab.fixtures import (
    worked_example_bundle,
    random_bundle,
    rescaled_inclusion_bundle,
    s3_semigroup,
    semilattice_01_bundle,
    z2_flip_bundle,
    z4_cocycle_bundle,
    zero_bundle,
)
from germlab.spaces import DiscreteMap, DiscreteSpace, validate_action


def test_z2_flip_fiber_dimensions():
    b = z2_flip_bundle()
    assert b.fiber_dim("1") == 2
    assert b.fiber_dim("g") == 2


def test_zero_bundle_valid_saturated_semiabelian():
    b = zero_bundle()
    assert is_semi_abelian(b)
    assert is_saturated(b)
    assert validate_axioms(b).ok
    assert all(b.fiber_dim(s) == 0 for s in b.semigroup.elements)


def test_worked_example_builds_and_validates():
    b = worked_example_bundle(grid_resolution=21)
    assert is_semi_abelian(b)
    assert is_saturated(b)
    report = validate_axioms(b)
    assert report.ok, report.failures


def test_space_not_covered_rejected():
    S = s3_semigroup()
    space = DiscreteSpace(("x", "y"))
    # U_e = U_1 = {x}: point y is in no U_e
    theta = {
        "e": DiscreteMap(space, (("x", "x"),)),
        "1": DiscreteMap(space, (("x", "x"),)),
        "s": DiscreteMap(space, (("x", "x"),)),
    }
    action = validate_action(S, space, theta)
    with pytest.raises(SpaceNotCovered):
        build_bundle(TwistedActionPresentation(S, action))


def test_cocycle_normalization_enforced():
    b = z2_flip_bundle()
    bad = Cocycle({("g", "g"): {"x": 1j, "y": 1j}})  # w(g, g*) must be 1
    with pytest.raises(CocycleNotNormalized):
        build_bundle(TwistedActionPresentation(b.semigroup, b.action, bad))


def test_cocycle_identity_enforced():
    # z/4 acting trivially on one point, one nonzero slot breaks the identity
    from germlab.fixtures import z4_semigroup
    from germlab.spaces import identity_on

    S = z4_semigroup()
    space = DiscreteSpace(("x",))
    theta = {s: identity_on(space, space.full_set()) for s in S.elements}
    action = validate_action(S, space, theta)
    bad = Cocycle({("g1", "g1"): {"x": 1j}})
    with pytest.raises((CocycleNotAssociative, CocycleNotNormalized)):
        build_bundle(TwistedActionPresentation(S, action, bad))


def test_axiom_scan_catches_rescaled_inclusion():
    base = semilattice_01_bundle()
    bad = rescaled_inclusion_bundle(base)
    report = validate_axioms(bad)
    assert not report.ok
    assert any("inclusion" in kind for kind, _ in report.failures)


def test_matrix_fiber_fixture_is_not_semi_abelian():
    # hand-built duck-typed bundle whose idempotent fiber is 2x2 matrices
    import numpy as np

    class MatrixFiber:
        def __init__(self, s, m):
            self.s, self.m = s, m

    class MatrixBundle:
        class _S:
            elements = ("e",)

            def idempotents(self):
                return ("e",)

            def mul(self, a, b):
                return "e"

        semigroup = _S()

        def fiber_basis(self, s):
            units = []
            for i in range(2):
                for j in range(2):
                    m = np.zeros((2, 2))
                    m[i, j] = 1.0
                    units.append(MatrixFiber(s, m))
            return units

        def mul(self, a, c):
            return MatrixFiber("e", a.m @ c.m)

        def _sorted_points(self, u):
            return [(i, j) for i in range(2) for j in range(2)]

        def fiber_domain(self, s):
            return None

    class _Elem(MatrixFiber):
        pass

    bundle = MatrixBundle()

    # patch value access used by is_semi_abelian
    MatrixFiber.value = lambda self, x: complex(self.m[x])
    assert not is_semi_abelian(bundle)


def test_truncated_fiber_not_saturated():
    b = z2_flip_bundle()
    # truncate the fiber over g to multiples of the single indicator at x
    b.fiber_basis_map["g"] = [b.indicator("g", "x")]
    assert not is_saturated(b)


def test_theta_from_element_z2_swap():
    b = z2_flip_bundle()
    a = b.indicator("g", "x")
    th = theta_from_element(b, a)
    assert th.pairs == (("x", "y"),)
    # theta on the idempotent fiber is the identity
    e = b.indicator("1", "x")
    assert theta_from_element(b, e).pairs == (("x", "x"),)
    # zero element gives the empty map
    z = b.zero("g")
    assert theta_from_element(b, z).domain().is_empty()


def test_theta_agrees_with_invert_on_star():
    b = z2_flip_bundle()
    a = b.indicator("g", "x")
    th = theta_from_element(b, a)
    th_star = theta_from_element(b, b.star(a))
    assert th_star == th.invert()


def test_theta_s_glues_to_full_swap():
    b = z2_flip_bundle()
    th = theta_s(b, "g")
    assert th.apply("x") == "y" and th.apply("y") == "x"
    th1 = theta_s(b, "1")
    assert th1 == DiscreteMap.identity_on(b.space, b.space.full_set())


def test_theta_s_worked_example_involution_is_identity():
    b = worked_example_bundle(grid_resolution=11)
    th = theta_s(b, "s")
    assert th == b.action.theta_of("s")
    assert th.apply(0) == 0


def test_theta_s_detects_unsaturated_fiber():
    from germlab.fellbundle import NotSaturated

    b = z2_flip_bundle()
    b.fiber_basis_map["g"] = [b.indicator("g", "x")]
    with pytest.raises(NotSaturated):
        theta_s(b, "g")


def test_eqx_basic():
    b = z2_flip_bundle()
    a = b.indicator("g", "x")
    assert eqx(b, a, a, "x")
    a2 = b.add(a, b.indicator("g", "y"))  # differs only away from x
    assert eqx(b, a, a2, "x")
    assert not eqx(b, a, b.scale(3.0, a), "x")  # (2a)*(2a)(x) = 4


def test_eqx_fiber_mismatch():
    from germlab.fellbundle import FiberMismatch

    b = z2_flip_bundle()
    with pytest.raises(FiberMismatch):
        eqx(b, b.indicator("g", "x"), b.indicator("1", "x"), "x")


def test_ad_equals_transported_da():
    # a.d = (d o theta_s^{-1}).a for d in the source idempotent fiber
    b = z2_flip_bundle()
    S = b.semigroup
    for s in S.elements:
        for a in b.fiber_basis(s):
            for d in b.fiber_basis(S.source(s)):
                lhs = b.mul(a, d)
                th = b.action.theta_of(s)
                transported = {th.apply(x): v for x, v in d.coeffs.items()}
                rhs = b.mul(
                    type(a)(S.range(s), coeffs=transported), a
                )
                pts = b._sorted_points(b.fiber_domain(s))
                assert all(abs(lhs.value(x) - rhs.value(x)) < 1e-12 for x in pts)


def test_abc_symmetry():
    # a b* c = c b* a within one fiber
    b = random_bundle(3)
    S = b.semigroup
    rng = random.Random(0)
    for s in S.elements:
        basis = b.fiber_basis(s)
        if not basis:
            continue
        for _ in range(5):
            a, c, d = (rng.choice(basis) for _ in range(3))
            lhs = b.mul(b.mul(a, b.star(c)), d)
            rhs = b.mul(b.mul(d, b.star(c)), a)
            pts = b._sorted_points(b.fiber_domain(lhs.s))
            assert all(abs(lhs.value(x) - rhs.value(x)) < 1e-12 for x in pts)


def test_aa_star_transport():
    # (a*a)(x) = (aa*)(theta_s(x))
    b = random_bundle(7)
    for s in b.semigroup.elements:
        th = b.action.theta_of(s)
        for a in b.fiber_basis(s):
            for x in b._sorted_points(b.fiber_domain(s)):
                lhs = b.value_aa(a, x)
                rhs = b.star_mul(b.star(a), b.star(a)).value(th.apply(x))
                assert abs(lhs - rhs.real) < 1e-12


def test_random_bundles_validate():
    for seed in range(12):
        b = random_bundle(seed)
        assert is_semi_abelian(b)
        assert is_saturated(b)
        report = validate_axioms(b)
        assert report.ok, (seed, report.failures)


def test_z4_nontrivial_cocycle_bundle_validates():
    b = z4_cocycle_bundle()
    assert is_semi_abelian(b)
    assert is_saturated(b)
    report = validate_axioms(b)
    assert report.ok, report.failures
    assert not b.omega.is_trivial()


def test_axiom_scan_is_the_safety_net_for_corrupt_cocycles():
    # a non-unimodular entry smuggled past construction must be caught by the
    # scan through the C*-identity (the star/mul pair scales a*a by |w|^2)
    b = z4_cocycle_bundle()
    S = b.semigroup
    s = next(t for t in S.elements if S.star(t) != t)
    key = (S.star(s), s)
    entry = b.omega.entries.get(key, {})
    if not isinstance(entry, dict):
        entry = {}
    for x in b.space.points:
        entry[x] = 2.0 + 0j
    b.omega.entries[key] = entry
    report = validate_axioms(b)
    assert not report.ok
    kinds = {kind for kind, _ in report.failures}
    assert kinds & {"cstar_identity", "positivity", "star_involutive", "submultiplicative"}


def interval_reflection_bundle():
    """Z/2 acting on [-1, 1] by x -> -x."""
    from fractions import Fraction as F

    from germlab.fellbundle import TwistedActionPresentation, build_bundle
    from germlab.fixtures import z2_semigroup
    from germlab.spaces import AffinePiece, IntervalSpace, Piece, PiecewiseAffineMap, identity_on

    S = z2_semigroup()
    space = IntervalSpace(((F(-1), F(1)),))
    refl = PiecewiseAffineMap(space, (AffinePiece(Piece(F(-1), True, F(1), True), F(-1), F(0)),))
    from germlab.spaces import validate_action

    action = validate_action(
        S, space, {"1": identity_on(space, space.full_set()), "g": refl}
    )
    return build_bundle(TwistedActionPresentation(S, action, grid_resolution=21))


def interval_component_swap_bundle():
    """Z/2 exchanging the two components [0,1] and [2,3] by translation."""
    from fractions import Fraction as F

    from germlab.fellbundle import TwistedActionPresentation, build_bundle
    from germlab.fixtures import z2_semigroup
    from germlab.spaces import AffinePiece, IntervalSpace, Piece, PiecewiseAffineMap, identity_on
    from germlab.spaces import validate_action

    S = z2_semigroup()
    space = IntervalSpace(((F(0), F(1)), (F(2), F(3))))
    swap = PiecewiseAffineMap(
        space,
        (
            AffinePiece(Piece(F(0), True, F(1), True), F(1), F(2)),
            AffinePiece(Piece(F(2), True, F(3), True), F(1), F(-2)),
        ),
    )
    action = validate_action(
        S, space, {"1": identity_on(space, space.full_set()), "g": swap}
    )
    return build_bundle(TwistedActionPresentation(S, action, grid_resolution=21))


def test_interval_reflection_bundle():
    from fractions import Fraction as F

    from germlab.germgpd import build_germ_groupoid, is_hausdorff

    b = interval_reflection_bundle()
    assert is_semi_abelian(b)
    report = validate_axioms(b)
    assert report.ok, report.failures
    th = theta_s(b, "g")
    assert th.apply(F(1, 3)) == F(-1, 3)
    g = build_germ_groupoid(b.action)
    # no idempotent ever merges the two legs, so one cell per element
    cells = {(c.s, (c.piece.lo, c.piece.hi)) for c in g.cells}
    assert cells == {("1", (F(-1), F(1))), ("g", (F(-1), F(1)))}
    ok, witnesses = is_hausdorff(g)
    assert ok and not witnesses
    germ = g.germ("g", F(1, 2))
    assert g.range(germ) == F(-1, 2)
    assert g.compose(g.germ("g", F(-1, 2)), germ) == g.germ("1", F(1, 2))
    assert g.inv(germ) == g.germ("g", F(-1, 2))


def test_interval_component_swap_bundle():
    from fractions import Fraction as F

    from germlab.germgpd import build_germ_groupoid, is_hausdorff

    b = interval_component_swap_bundle()
    report = validate_axioms(b)
    assert report.ok, report.failures
    g = build_germ_groupoid(b.action)
    ok, _ = is_hausdorff(g)
    assert ok
    germ = g.germ("g", F(1, 2))
    assert g.range(germ) == F(5, 2)
    assert g.inv(germ) == g.germ("g", F(5, 2))
