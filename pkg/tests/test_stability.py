import pytest
from hypothesis import given, settings, strategies as st

from twoside.errors import InputError, SizeGuardError
from twoside.generate import COMPLEMENTARY_NTU, PICK_ONE_SIDE_NTU, UNCONSTRAINED, GenProfile, gen
from twoside.ntu import make_market, nonempty_subsets, subsets
from twoside.pickside import to_contract_market
from twoside.stability import (
    SETWISE,
    BlockCertificate,
    IrViolation,
    check_one_wing_projections,
    compare_stability_notions,
    enumerate_stable,
    find_block,
    is_setwise_stable,
    is_stable,
    verify_certificate,
)

seeds = st.integers(min_value=0, max_value=2**32)


def setwise_oracle(m, y):
    """Setwise stability by enumerating renegotiated outcomes first."""
    for agent in m.agents:
        held = y & m.contracts_of(agent)
        if m.choose(agent, held) != held:
            return False
    for y_star in subsets(m.all_contracts):
        for z in nonempty_subsets(y_star - y):
            if not z <= y_star <= y | z:
                continue
            ok = True
            for i in m.neighbours(z):
                new, old = y_star & m.contracts_of(i), y & m.contracts_of(i)
                if m.choose(i, new) != new or not m.prefers(i, new, old):
                    ok = False
                    break
            if ok:
                return False
    return True


def test_setwise_gap_verdicts(market):
    m = market("setwise_gap")
    assert enumerate_stable(m) == [frozenset("z")]
    assert enumerate_stable(m, SETWISE) == []
    verdict = is_setwise_stable(m, {"z"})
    assert verdict.line() == "setwise-block Z={x,y} Y*={x,y}"
    assert verify_certificate(m, {"z"}, verdict.witness)


def test_inconsistent_drops_verdicts(market):
    m = market("inconsistent_drops")
    verdict = is_stable(m, {"x"})
    assert verdict.witness == BlockCertificate(frozenset("yz"))
    assert verify_certificate(m, {"x"}, verdict.witness)
    assert is_setwise_stable(m, {"x"}).stable


def test_ir_violation_reported_first(market):
    m = market("two_stage")
    verdict = is_stable(m, {"x"})
    assert isinstance(verdict.witness, IrViolation)
    assert verdict.line() == "not-individually-rational agent=M1 held={x} choice={}"
    assert verify_certificate(m, {"x"}, verdict.witness)


def test_two_stage_unique_stable_outcome(market):
    m = market("two_stage")
    assert enumerate_stable(m) == [frozenset("uvw")]
    assert is_stable(m, "xyz").witness.line() == "block Z={v,w}"


def test_three_orgs_has_no_stable_outcome(market):
    assert enumerate_stable(to_contract_market(market("three_orgs"))) == []


def test_notion_comparison_requires_pick_one_side(market):
    with pytest.raises(InputError, match="pick-one-side profile fails at M"):
        compare_stability_notions(market("setwise_gap"))


def test_size_guard():
    n = 13
    m = make_market({"L": "left", "M": "center"}, [(f"c{k:02d}", "left", "L", "M") for k in range(n)], {})
    with pytest.raises(SizeGuardError, match="exceeds"):
        enumerate_stable(m)


def test_unknown_contract_in_outcome(market):
    with pytest.raises(InputError, match="unknown contract"):
        is_stable(market("two_stage"), {"q"})


@settings(max_examples=60)
@given(seeds, st.sampled_from([COMPLEMENTARY_NTU, UNCONSTRAINED]))
def test_setwise_oracle_agrees(seed, family):
    m = gen(GenProfile(seed=seed, family=family, n_contracts=4))
    for y in subsets(m.all_contracts):
        assert is_setwise_stable(m, y).stable == setwise_oracle(m, y)


@settings(max_examples=60)
@given(seeds)
def test_every_certificate_verifies(seed):
    m = gen(GenProfile(seed=seed, family=UNCONSTRAINED, n_contracts=5))
    for y in subsets(m.all_contracts):
        for verdict in (is_stable(m, y), is_setwise_stable(m, y)):
            if not verdict.stable:
                assert verify_certificate(m, y, verdict.witness)


@settings(max_examples=60)
@given(seeds)
def test_one_wing_projections_block(seed):
    m = gen(GenProfile(seed=seed, family=PICK_ONE_SIDE_NTU, n_contracts=5))
    for y in subsets(m.all_contracts):
        if is_stable(m, y).stable:
            continue
        cert = find_block(m, y)
        if cert is not None:
            assert check_one_wing_projections(m, y, cert.blocker).ok
        sw = is_setwise_stable(m, y).witness
        if sw is not None and not isinstance(sw, IrViolation):
            assert check_one_wing_projections(m, y, sw.blocker, setwise=True).ok


@settings(max_examples=40)
@given(seeds)
def test_pick_one_side_notions_coincide(seed):
    m = gen(GenProfile(seed=seed, family=PICK_ONE_SIDE_NTU))
    assert compare_stability_notions(m).equal
