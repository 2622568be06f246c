"""Small hand-checked cases across modules, on the bundled fixtures."""

from fractions import Fraction

from twoside.alternate_da import left_phase, right_phase
from twoside.conditions import check_complementarity, check_pick_one_side, check_same_side_cross_side, validate_market
from twoside.ntu import Side, is_individually_rational, make_market
from twoside.pickside import make_org_market, org_da_equivalence, run_org_da, to_contract_market
from twoside.stability import compare_stability_notions, find_block, find_setwise_block, is_setwise_stable, is_stable
from twoside.tu import (
    PriceVector,
    Valuation,
    check_full_complementarity,
    check_supermodular,
    demand_of,
    demand_relation_check,
    falsify_gross_complements,
    flip_all,
    flip_allocation,
    flip_central,
    g,
    is_equilibrium,
    make_tu_market,
    sampled_condition_probe,
    utility,
)
from twoside.tu_solver import find_tu_block, maximize_welfare, solve_equilibrium, support_prices

F = Fraction


def fs(s=""):
    return frozenset(s)


def single_tu(vl, vm):
    return make_tu_market({"L": "left", "M": "center"}, [("w", "left", "L", "M")], {"L": {("w",): vl}, "M": {("w",): vm}})


# choice and rejection on the two-stage market


def test_two_stage_choices(market):
    m = market("two_stage")
    assert m.choose("M1", "xyzu") == fs("xy")
    assert m.choose("M1", "yu") == fs("u")
    assert m.choose("R2", "x") == fs()
    assert m.reject("M1", "xyzuvw") == fs("u")
    assert m.reject("M2", "xyzuvw") == fs("z")
    assert m.side_split("xyu") == (fs("xy"), fs("u"))
    assert m.side_split("uvw") == (fs(), fs("uvw"))
    assert is_individually_rational(m, "uvw") == (True, None)
    assert is_individually_rational(m, "") == (True, None)


def test_two_stage_phases(market):
    m = market("two_stage")
    a, steps = left_phase(m, fs("xyz"), Side.LEFT, 1)
    assert a == fs("xyz") and len(steps) == 1 and not steps[0].rejected
    d, a_next, flag, _ = right_phase(m, a, Side.LEFT, 1, "settle")
    assert (d, a_next, flag) == (fs("vw"), fs("xy"), True)
    a, steps = left_phase(m, fs("xy"), Side.LEFT, 2)
    assert a == fs() and [s.rejected for s in steps] == [fs("y"), fs("x")]
    d, _, flag, _ = right_phase(m, fs(), Side.LEFT, 2, "settle")
    assert (d, flag) == (fs("uvw"), False)
    assert left_phase(m, fs(), Side.LEFT, 3)[0] == fs()


def test_condition_cases(market):
    ex = market("two_stage")
    gap = market("setwise_gap")
    assert check_complementarity(ex, "L2") is None
    assert check_same_side_cross_side(ex, "M2") is None
    assert check_same_side_cross_side(gap, "M") is None
    assert check_pick_one_side(gap, "M").y == fs("xz")
    two = make_market({"L": "left", "M": "center"}, [("x", "left", "L", "M"), ("y", "left", "L", "M")], {"L": [["x"], ["y"]]})
    v = check_complementarity(two, "L")
    assert (v.y, v.z) == (fs("y"), fs("xy"))
    assert check_pick_one_side(two, "M") is None
    assert validate_market(to_contract_market(market("two_orgs")), "pick-one-side").ok


def test_stability_cases(market):
    ex, gap = market("two_stage"), market("setwise_gap")
    assert is_stable(ex, "uvw").stable
    assert not is_stable(ex, "xyz").stable
    assert find_block(gap, "z") is None and is_stable(gap, "z").stable
    # {x,y} is listed, so M keeps it; z still blocks
    assert is_stable(gap, "xy").witness.line() == "block Z={z}"
    assert is_individually_rational(gap, "xyz") == (False, "M")
    assert find_block(ex, ex.all_contracts) is None
    assert find_setwise_block(ex, ex.all_contracts) is None
    nobody = make_market({"L": "left", "M": "center"}, [("x", "left", "L", "M")], {})
    assert is_setwise_stable(nobody, "").stable
    assert compare_stability_notions(to_contract_market(market("two_orgs"))).equal


def test_org_cases():
    # nobody accepts o1: the second org picks from everyone
    om = make_org_market(["o1", "o2"], {"o2": [["i1", "i2"]]}, {"i1": ["o2"], "i2": ["o2"]})
    matching, trace = run_org_da(om, "o1")
    assert trace.stages[0].first_proposals == fs()
    assert matching.members("o2") == fs({"i1", "i2"})
    one = make_org_market(["o1", "o2"], {"o1": [["i1"]], "o2": [["i1"]]}, {"i1": ["o2", "o1"]})
    for row in org_da_equivalence(one).rows:
        assert row[1].assignment == row[2].assignment == {"i1": "o2"}
    conv = to_contract_market(make_org_market(["o1", "o2"], {}, {"i1": ["o1"]}))
    assert set(conv.contracts) == {"i1@o1"}
    assert not to_contract_market(make_org_market(["o1", "o2"], {}, {})).contracts


# TU


def test_utility_and_demand():
    m = single_tu(2, 1)
    assert utility(m, "L", [("w", F(1, 2))]) == F(3, 2)
    assert utility(m, "L", []) == 0
    v = Valuation.from_map("i", ["a", "b"], {("a", "b"): 5})
    assert demand_of(v, {"a": 2, "b": 2}) == [fs("ab")]
    assert demand_of(v, {"a": 9, "b": 9}) == [fs()]
    assert demand_of(v, {"a": F(5, 2), "b": F(5, 2)}) == [fs(), fs("ab")]


def test_equilibrium_cases():
    m = single_tu(2, 1)
    assert is_equilibrium(m, "w", PriceVector({"w": F(1, 2)}))[0]
    assert not is_equilibrium(m, "w", PriceVector({"w": 3}))[0]
    assert is_equilibrium(single_tu(-2, 1), "", PriceVector({"w": -1}))[0]


def test_supermodularity_cases():
    additive = Valuation.from_map("i", ["a", "b"], {("a",): 1, ("b",): 2, ("a", "b"): 3})
    assert check_supermodular(additive) is None
    assert check_supermodular(Valuation.from_map("i", ["a", "b"], {("a", "b"): 5})) is None
    unit = Valuation.from_map("u", ["a", "b"], {("a",): 1, ("b",): 1, ("a", "b"): 1})
    cert = falsify_gross_complements(unit)
    assert cert.bound == 4 and 0 < cert.p["a"] < 1
    assert demand_of(unit, cert.p) == [fs("a")] and demand_of(unit, cert.q) == [fs("b")]
    injected = sampled_condition_probe(unit, 0, 0, injected=[(cert.p, cert.q)])
    assert injected.falsified
    assert not sampled_condition_probe(Valuation("e", (), (F(0),)), 500).falsified


def test_cross_side_synergy_fails_transformed_check():
    # v = |left| * |right| for a central agent
    m = make_tu_market(
        {"L": "left", "M": "center", "R": "right"},
        [("a", "left", "L", "M"), ("b", "right", "M", "R")],
        {"M": {("a", "b"): 1}},
    )
    assert not check_full_complementarity(m).ok
    assert check_full_complementarity(single_tu(3, -1)).ok


def test_flip_cases():
    v = Valuation.from_map("j", ["a", "b"], {(): 7, ("a",): 1})
    assert flip_all(v)({"a", "b"}) == 7
    c = Valuation.from_map("m", ["l", "r"], {("l",): 3, ("l", "r"): 5})
    assert flip_central(c, ["r"])({"l", "r"}) == c({"l"})
    m = make_tu_market(
        {"L": "left", "M": "center", "R": "right"}, [("l", "left", "L", "M"), ("r", "right", "M", "R")], {}
    )
    assert g(m, PriceVector({"l": 0, "r": 3})).transfers == {"l": 0, "r": -3}
    assert g(m, PriceVector({"l": 0, "r": 0})).transfers == {"l": 0, "r": 0}
    assert flip_allocation(m, {"r"}) == fs()
    assert flip_allocation(m, set()) == fs("r")
    for agent in ("L", "M", "R"):
        assert demand_relation_check(m, agent, {w: 0 for w in m.primitives_of(agent)}).ok


def test_welfare_and_support_cases():
    assert maximize_welfare(single_tu(2, 1)) == (3, [fs("w")])
    assert maximize_welfare(single_tu(-2, 1)) == (0, [fs()])
    empty = make_tu_market({"L": "left"}, [], {})
    assert maximize_welfare(empty) == (0, [fs()])
    assert support_prices(single_tu(2, 1), "w").transfers == {"w": F(1, 2)}
    assert support_prices(single_tu(2, 1), "") is None
    assert support_prices(empty, "").transfers == {}
    assert solve_equilibrium(empty).allocation == fs()


def test_block_cases():
    # a second primitive with more surplus, left out of the outcome, gets re-signed
    m = make_tu_market(
        {"L": "left", "M": "center"},
        [("w", "left", "L", "M"), ("w2", "left", "L", "M")],
        {"L": {("w",): 2, ("w2",): 5, ("w", "w2"): 7}, "M": {("w",): 1, ("w2",): 1, ("w", "w2"): 2}},
    )
    cert = find_tu_block(m, [("w", F(1, 2))])
    assert cert is not None and "w2" in cert.psi
    y = find_tu_block(single_tu(2, 1), [])
    assert y.psi == fs("w") and -1 < y.prices["w"] < 2
