from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from twoside.errors import InputError
from twoside.generate import FULLY_COMPLEMENTARY_TU, GenProfile, gen, random_valuation, supermodular_valuation
from twoside.ntu import subsets
from twoside.tu import (
    NEG_INF,
    PriceVector,
    Valuation,
    certify,
    check_full_complementarity,
    check_supermodular,
    demand_of,
    demand_relation_check,
    falsify_gross_complements,
    flip_all,
    flip_central,
    fmt_outcome,
    g,
    indirect_utility,
    is_equilibrium,
    kappa,
    sampled_condition_probe,
    transform_market,
    utility,
)

F = Fraction
seeds = st.integers(min_value=0, max_value=2**32)
sizes = st.integers(min_value=0, max_value=4)


def valuation(seed, n, supermodular=False):
    rng = random.Random(seed)
    dom = [f"w{k}" for k in range(n)]
    return supermodular_valuation(rng, "a", dom) if supermodular else random_valuation(rng, "a", dom)


def prices_for(seed, dom):
    rng = random.Random(seed)
    return {w: F(rng.randint(-12, 12), rng.choice((1, 2, 3))) for w in dom}


def lattice_supermodular(v):
    dom = v.domain
    return all(v(a | b) + v(a & b) >= v(a) + v(b) for a in subsets(dom) for b in subsets(dom))


UNIT = Valuation.from_map("u", ["a", "b"], {"a": 1, "b": 1, ("a", "b"): 1})


def test_valuation_construction():
    v = Valuation.from_map("i", ["b", "a"], {("a",): F(1, 2), ("a", "b"): 3})
    assert v.domain == ("a", "b")
    assert v({"a"}) == F(1, 2) and v({"b"}) == 0 and v({"a", "b"}) == 3
    assert [str(x) for _, x in v.items()] == ["0", "1/2", "0", "3"]
    with pytest.raises(InputError, match="float"):
        Valuation.from_map("i", ["a"], {("a",): 0.5})
    with pytest.raises(InputError, match="not one of its primitives"):
        Valuation.from_map("i", ["a"], {("c",): 1})


def test_upstream_pays_transfer(market):
    m = market("tu_single")
    assert m.sign("w", "L") == 1 and m.sign("w", "M") == -1
    assert utility(m, "L", [("w", F(1, 2))]) == F(3, 2)
    assert utility(m, "M", [("w", F(1, 2))]) == F(3, 2)
    assert utility(m, "L", [("w", 0), ("w", 1)]) == NEG_INF


def test_equilibrium_check_and_certificate(market):
    m = market("tu_single")
    p = PriceVector({"w": F(1, 2)})
    assert is_equilibrium(m, {"w"}, p) == (True, None)
    assert is_equilibrium(m, set(), p) == (False, "L")
    assert is_equilibrium(m, {"w"}, PriceVector({"w": 3})) == (False, "L")
    cert = certify(m, {"w"}, p)
    assert cert.verify(m)
    assert cert.lines() == ["allocation={w}", "prices w=1/2"]
    assert fmt_outcome(kappa({"w"}, p)) == "{w@1/2}"


def test_unit_demand_falsifier():
    assert check_supermodular(UNIT) == (frozenset(), frozenset("b"), "a")
    cert = falsify_gross_complements(UNIT)
    assert cert.p == {"a": F(1, 2), "b": 4}
    assert cert.q == {"a": F(1, 2), "b": -4}
    assert (cert.demand_p, cert.demand_q) == (frozenset("a"), frozenset("b"))
    assert cert.verify(UNIT)
    assert sampled_condition_probe(UNIT, 500, 0).falsified


def test_falsifier_refuses_supermodular():
    with pytest.raises(InputError, match="supermodular"):
        falsify_gross_complements(Valuation.from_map("i", ["a"], {("a",): 1}))


def test_full_complementarity_report(market):
    report = check_full_complementarity(market("tu_no_equilibrium"))
    assert not report.ok
    assert report.label == "sufficient-condition"
    assert report.lines()[0] == "tu-full fails (sufficient-condition)"
    assert check_full_complementarity(market("tu_single")).ok


@given(seeds, sizes)
def test_demand_matches_enumeration(seed, n):
    v = valuation(seed, n)
    p = prices_for(seed + 1, v.domain)
    pay = {s: v(s) - sum((p[w] for w in s), F(0)) for s in subsets(v.domain)}
    best = max(pay.values())
    assert demand_of(v, p) == [s for s in subsets(v.domain) if pay[s] == best]
    assert indirect_utility(v, p) == best


@given(seeds, sizes, st.booleans())
def test_supermodular_check_matches_lattice_form(seed, n, sm):
    v = valuation(seed, n, sm)
    assert (check_supermodular(v) is None) == lattice_supermodular(v)
    if sm:
        assert check_supermodular(v) is None


@given(seeds, st.integers(min_value=1, max_value=4))
def test_falsifier_always_verifies(seed, n):
    v = valuation(seed, n)
    if check_supermodular(v) is not None:
        assert falsify_gross_complements(v).verify(v)


@settings(max_examples=60)
@given(seeds, st.integers(min_value=1, max_value=4))
def test_supermodular_valuations_survive_probe(seed, n):
    v = valuation(seed, n, supermodular=True)
    assert not sampled_condition_probe(v, 200, seed).falsified


@settings(max_examples=60)
@given(seeds, st.integers(min_value=1, max_value=2), st.integers(min_value=1, max_value=2))
def test_flipped_central_valuations_survive_probe(seed, nl, nr):
    left = [f"l{k}" for k in range(nl)]
    right = [f"r{k}" for k in range(nr)]
    base = supermodular_valuation(random.Random(seed), "m", left + right)
    v = flip_central(base, right)
    assert not sampled_condition_probe(v, 200, seed, wings=(left, right)).falsified


@given(seeds, sizes)
def test_flips_are_involutions(seed, n):
    v = valuation(seed, n)
    assert flip_all(flip_all(v)) == v
    right = v.domain[: n // 2]
    assert flip_central(flip_central(v, right), right) == v


@settings(max_examples=50)
@given(seeds)
def test_transform_and_price_map_are_involutions(seed):
    m = gen(GenProfile(seed=seed, family=FULLY_COMPLEMENTARY_TU, n_contracts=4))
    assert transform_market(transform_market(m)).valuations == m.valuations
    p = PriceVector(prices_for(seed, sorted(m.omega)))
    assert g(m, g(m, p)) == p


@settings(max_examples=80)
@given(seeds)
def test_demand_relation_holds_for_any_valuation(seed):
    m = gen(GenProfile(seed=seed, family=FULLY_COMPLEMENTARY_TU, n_contracts=4))
    rng = random.Random(seed)
    # the flip correspondence does not need complementarity: scramble values
    vals = {a: random_valuation(rng, a, v.domain) for a, v in m.valuations.items()}
    m = type(m)(m.agents, m.primitives, vals)
    for agent in sorted(m.agents):
        prices = prices_for(seed, sorted(m.primitives_of(agent)))
        assert demand_relation_check(m, agent, prices).ok
