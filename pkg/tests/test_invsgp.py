import pytest

from germlab.invsgp import (
    IdempotentsDoNotCommute,
    InverseSemigroupError,
    NoUniqueInverse,
    NotAssociative,
    NoZeroElement,
    adjoin_zero,
    idempotents,
    is_continuous,
    natural_order,
    validate_inverse_semigroup,
)

# the three-element semigroup with zero e, unit 1 and a self-inverse sigma
S3_ELEMS = ["e", "1", "s"]
S3_TABLE = [
    ["e", "e", "e"],
    ["e", "1", "s"],
    ["e", "s", "1"],
]


def s3():
    return validate_inverse_semigroup(S3_ELEMS, S3_TABLE, zero="e")


def z2():
    return validate_inverse_semigroup(["1", "g"], [["1", "g"], ["g", "1"]])


def semilattice_01():
    return validate_inverse_semigroup(["0", "1"], [["0", "0"], ["0", "1"]], zero="0")


def test_s3_valid_star_and_idempotents():
    S = s3()
    assert S.star("s") == "s"
    assert S.star("1") == "1"
    assert set(idempotents(S)) == {"e", "1"}


def test_trivial_group():
    S = validate_inverse_semigroup(["1"], [["1"]])
    assert S.star("1") == "1"


def test_mutated_s3_rejected_with_witness():
    table = [row[:] for row in S3_TABLE]
    table[2][1] = "1"  # s*1 = 1 breaks associativity at (s, s, s)
    with pytest.raises(InverseSemigroupError) as exc:
        validate_inverse_semigroup(S3_ELEMS, table)
    assert isinstance(exc.value, (NoUniqueInverse, NotAssociative, IdempotentsDoNotCommute))
    assert exc.value.witness


def test_squashed_s3_is_the_chain_semilattice():
    # replacing s*s = 1 by s*s = s does not break any axiom: the result is the
    # chain semilattice e < s < 1, so the validator must accept it
    table = [row[:] for row in S3_TABLE]
    table[2][2] = "s"
    S = validate_inverse_semigroup(S3_ELEMS, table)
    assert set(idempotents(S)) == {"e", "1", "s"}
    assert S.leq("s", "1") and S.leq("e", "s")


def test_group_idempotents():
    assert idempotents(z2()) == ("1",)


def test_semilattice_idempotents():
    assert idempotents(semilattice_01()) == ("0", "1")


def test_idempotents_closed_under_multiplication():
    S = s3()
    E = idempotents(S)
    for e in E:
        for f in E:
            assert S.mul(e, f) in E


def test_natural_order_s3():
    S = s3()
    order = natural_order(S)
    assert ("e", "1") in order and ("e", "s") in order
    assert ("1", "s") not in order and ("s", "1") not in order
    # reflexive
    for x in S.elements:
        assert (x, x) in order


def test_natural_order_group_is_equality():
    S = z2()
    assert natural_order(S) == frozenset({("1", "1"), ("g", "g")})


def test_natural_order_semilattice():
    assert ("0", "1") in natural_order(semilattice_01())


def test_order_compatibilities():
    S = s3()
    for a, b in natural_order(S):
        assert S.leq(S.star(a), S.star(b))
        for u, v in natural_order(S):
            assert S.leq(S.mul(a, u), S.mul(b, v))


def test_star_is_involutive_antihomomorphism():
    for S in (s3(), z2(), semilattice_01()):
        for a in S.elements:
            assert S.star(S.star(a)) == a
            assert S.mul(S.mul(a, S.star(a)), a) == a
            for b in S.elements:
                assert S.star(S.mul(a, b)) == S.mul(S.star(b), S.star(a))


def test_continuity_semilattice():
    ok, witness = is_continuous(semilattice_01())
    assert ok and witness is None


def test_continuity_group_with_adjoined_zero():
    S = adjoin_zero(z2())
    ok, witness = is_continuous(S)
    assert ok and witness is None


def test_continuity_s3_with_its_own_zero():
    ok, witness = is_continuous(s3())
    assert ok and witness is None


def test_continuity_needs_zero():
    with pytest.raises(NoZeroElement):
        is_continuous(z2())


def test_continuity_failure_witness():
    # adjoining a *fresh* zero below e makes e a nonzero idempotent on which
    # 1 and s agree, and no smaller nonzero idempotent separates them
    base = validate_inverse_semigroup(S3_ELEMS, S3_TABLE)
    S = adjoin_zero(base)
    ok, witness = is_continuous(S)
    assert not ok
    assert set(witness) == {"1", "s"}
    s, t = witness
    assert s != t and S.source(s) == S.source(t)


def test_zero_validation():
    with pytest.raises(InverseSemigroupError):
        validate_inverse_semigroup(["0", "1"], [["0", "0"], ["0", "1"]], zero="1")
