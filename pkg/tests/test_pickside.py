import pytest
from hypothesis import given, settings, strategies as st

from twoside.errors import InputError
from twoside.generate import COMPLEMENTARY_ORG, GenProfile, gen
from twoside.pickside import (
    contract_id,
    make_org_market,
    matching_from_outcome,
    org_da_equivalence,
    run_org_da,
    to_contract_market,
)
from twoside.stability import is_stable

seeds = st.integers(min_value=0, max_value=2**32)


def outcome_of(matching):
    return frozenset(contract_id(a, o) for a, o in matching.assignment.items() if o is not None)


def test_first_org_o1(market):
    om = market("two_orgs")
    matching, trace = run_org_da(om, "o1")
    assert matching.members("o1") == frozenset({"i1", "i4", "i5"})
    assert matching.members("o2") == frozenset({"i2", "i3"})
    assert not matching.unmatched()
    assert len(trace.stages) == 2


def test_first_org_o2(market):
    om = market("two_orgs")
    matching, trace = run_org_da(om, "o2")
    assert matching.members("o2") == frozenset({"i1", "i2", "i3", "i4"})
    assert matching.members("o1") == frozenset()
    assert matching.unmatched() == frozenset({"i5"})
    assert trace.to_text().splitlines()[-3:] == ["o2={i1,i2,i3,i4}", "o1={}", "unmatched={i5}"]


def test_procedure_matches_contract_da(market):
    om = market("two_orgs")
    report = org_da_equivalence(om)
    assert report.equal
    conv = to_contract_market(om)
    for _, org_match, _, _, _ in report.rows:
        assert is_stable(conv, outcome_of(org_match)).stable


def test_procedure_needs_two_orgs(market):
    with pytest.raises(InputError, match="exactly two"):
        run_org_da(market("three_orgs"))


def test_unknown_first_org(market):
    with pytest.raises(InputError, match="unknown org"):
        run_org_da(market("two_orgs"), "o9")


def test_conversion_wings(market):
    conv = to_contract_market(market("two_orgs"))
    assert conv.tiered
    assert conv.contracts["i1@o1"].wing.value == "left"
    assert conv.contracts["i1@o2"].upstream == "i1"
    assert "i5@o2" not in conv.contracts
    assert not to_contract_market(market("three_orgs")).tiered


def test_org_bundles_naming_unwilling_applicants_are_dropped():
    om = make_org_market(["o1", "o2"], {"o1": [["i1", "i2"], ["i1"]]}, {"i1": ["o1"], "i2": ["o2"]})
    conv = to_contract_market(om)
    assert conv.preferences["o1"].ranking == (frozenset({"i1@o1"}),)


def test_matching_from_outcome_rejects_double_assignment(market):
    om = market("two_orgs")
    with pytest.raises(InputError, match="holds contracts"):
        matching_from_outcome(om, {"i1@o1", "i1@o2"})


def test_org_market_validation():
    with pytest.raises(InputError, match="at least two"):
        make_org_market(["o1"], {}, {})
    with pytest.raises(InputError, match="unknown org"):
        make_org_market(["o1", "o2"], {}, {"i1": ["o3"]})
    with pytest.raises(InputError, match="repeats"):
        make_org_market(["o1", "o2"], {}, {"i1": ["o1", "o1"]})


@settings(max_examples=150)
@given(seeds)
def test_generated_org_markets_agree_and_are_stable(seed):
    om = gen(GenProfile(seed=seed, family=COMPLEMENTARY_ORG))
    report = org_da_equivalence(om)
    assert report.equal, report.divergences()
    conv = to_contract_market(om)
    for row in report.rows:
        assert is_stable(conv, outcome_of(row[1])).stable
