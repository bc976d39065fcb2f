import pytest

from germlab.fellbundle import SubsemigroupNotWide
from germlab.fixtures import (
    closed_family,
    pair_groupoid,
    singleton_family,
    twisted_groupoid_fixtures,
    z4_twisted_groupoid,
)
from germlab.linebundle import round_trip

FIXTURES = twisted_groupoid_fixtures()


@pytest.mark.parametrize("idx", range(len(FIXTURES)))
def test_round_trip_fixtures(idx):
    g, sigma, family = FIXTURES[idx]
    report = round_trip(g, sigma, family)
    assert report.ok, (idx, report.failures)
    assert report.exact
    assert report.n_germs == len(g.arrows)


def test_ten_fixtures_with_a_nontrivial_z4_cocycle():
    assert len(FIXTURES) == 10
    assert any(
        any(abs(v - 1) > 0 for v in sigma.values()) and len(g.arrows) == 4
        and len(g.units) == 1
        for g, sigma, _ in FIXTURES
    )


def test_round_trip_rejects_non_wide_family():
    g = pair_groupoid(("p", "q"))
    # keep only the diagonal bissections: covering fails
    family = closed_family(g, [frozenset({u}) for u in g.units])
    with pytest.raises(SubsemigroupNotWide):
        round_trip(g, {}, family)


def test_round_trip_cocycle_carried_exactly():
    g, sigma = z4_twisted_groupoid()
    report = round_trip(g, sigma, singleton_family(g))
    assert report.ok and report.exact
