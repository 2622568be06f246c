"""Seeded random markets aimed at the hypotheses of the existence results.

Every family re-validates its output before returning it, so a generator bug
surfaces as ``GenerationError`` rather than as a silently wrong test case.
Identical profiles give identical markets (``random.Random`` seeded with the
profile's integer seed, ids iterated in sorted order).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from twoside.conditions import check_complementarity, check_same_side_cross_side, validate_market
from twoside.errors import InputError
from twoside.ntu import Contract, NtuMarket, RankedPreference, Side, subsets
from twoside.pickside import OrgMarket, make_org_market, to_contract_market
from twoside.tu import TuMarket, Valuation, check_full_complementarity, flip_central

COMPLEMENTARY_NTU = "complementary-ntu"
PICK_ONE_SIDE_NTU = "pick-one-side-ntu"
FULLY_COMPLEMENTARY_TU = "fully-complementary-tu"
UNCONSTRAINED = "unconstrained"
COMPLEMENTARY_ORG = "complementary-org"
FAMILIES = (COMPLEMENTARY_NTU, PICK_ONE_SIDE_NTU, FULLY_COMPLEMENTARY_TU, UNCONSTRAINED, COMPLEMENTARY_ORG)


class GenerationError(InputError):
    pass


@dataclass(frozen=True)
class GenProfile:
    seed: int
    family: str = COMPLEMENTARY_NTU
    n_left: int = 2
    n_center: int = 2
    n_right: int = 2
    n_contracts: int = 6
    n_applicants: int = 4
    max_tries: int = 40  # rejection-sampling attempts per agent before the fallback

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if min(self.n_left, self.n_center, self.n_right, self.n_contracts, self.n_applicants) < 0:
            raise InputError("sizes must be nonnegative")


def _structure(rng: random.Random, p: GenProfile):
    lefts = [f"L{k}" for k in range(1, p.n_left + 1)]
    centers = [f"M{k}" for k in range(1, p.n_center + 1)]
    rights = [f"R{k}" for k in range(1, p.n_right + 1)]
    agents = {a: Side.LEFT for a in lefts}
    agents.update({a: Side.CENTER for a in centers})
    agents.update({a: Side.RIGHT for a in rights})
    wings = []
    if lefts and centers:
        wings.append(Side.LEFT)
    if rights and centers:
        wings.append(Side.RIGHT)
    contracts = {}
    if wings:
        width = len(str(p.n_contracts))
        for k in range(1, p.n_contracts + 1):
            cid = f"c{k:0{width}d}"
            wing = rng.choice(wings)
            m = rng.choice(centers)
            if wing is Side.LEFT:
                contracts[cid] = Contract(cid, rng.choice(lefts), m, wing)
            else:
                contracts[cid] = Contract(cid, m, rng.choice(rights), wing)
    own = {a: [] for a in agents}
    for cid in sorted(contracts):
        c = contracts[cid]
        own[c.upstream].append(cid)
        own[c.downstream].append(cid)
    return agents, contracts, own


def _chain(rng: random.Random, items: list) -> list:
    """Random decreasing chain of nested nonempty bundles over ``items``."""
    if not items:
        return []
    order = list(items)
    rng.shuffle(order)
    sizes = sorted(rng.sample(range(1, len(order) + 1), rng.randint(1, len(order))), reverse=True)
    return [frozenset(order[:k]) for k in sizes]


def _random_ranking(rng: random.Random, items: list, max_len: int = 3) -> list:
    if not items:
        return []
    pool = [b for b in subsets(items) if b]
    return rng.sample(pool, min(len(pool), rng.randint(1, max_len)))


def _one_agent_market(agents, contracts, agent, ranking) -> NtuMarket:
    prefs = {a: RankedPreference(a, ()) for a in agents}
    prefs[agent] = RankedPreference(agent, tuple(ranking))
    return NtuMarket(agents, contracts, prefs)


def _side_ranking(rng, p, agents, contracts, agent, items) -> list:
    """Nested chain, or a random ranking that passes complementarity."""
    if rng.random() < 0.5:
        for _ in range(p.max_tries):
            ranking = _random_ranking(rng, items)
            if check_complementarity(_one_agent_market(agents, contracts, agent, ranking), agent) is None:
                return ranking
    return _chain(rng, items)


def _two_chains(rng, left_items, right_items) -> list:
    first, second = _chain(rng, left_items), _chain(rng, right_items)
    if rng.random() < 0.5:
        first, second = second, first
    return first + second


def _central_ranking(rng, p, agents, contracts, agent, own, pick_one_side: bool) -> list:
    left = [c for c in own if contracts[c].wing is Side.LEFT]
    right = [c for c in own if contracts[c].wing is Side.RIGHT]
    variant = "same-side" if pick_one_side else "full"
    if rng.random() < 0.5:
        for _ in range(p.max_tries):
            if pick_one_side:
                ranking = _random_ranking(rng, left) + _random_ranking(rng, right)
                rng.shuffle(ranking)
            else:
                ranking = _random_ranking(rng, own)
            m = _one_agent_market(agents, contracts, agent, ranking)
            if check_same_side_cross_side(m, agent, variant) is None:
                return ranking
    return _two_chains(rng, left, right)


def _ntu(rng: random.Random, p: GenProfile) -> NtuMarket:
    agents, contracts, own = _structure(rng, p)
    prefs = {}
    pick = p.family == PICK_ONE_SIDE_NTU
    for agent in sorted(agents):
        items = own[agent]
        if p.family == UNCONSTRAINED:
            ranking = _random_ranking(rng, items)
        elif agents[agent] is Side.CENTER:
            ranking = _central_ranking(rng, p, agents, contracts, agent, items, pick)
        else:
            ranking = _side_ranking(rng, p, agents, contracts, agent, items)
        prefs[agent] = RankedPreference(agent, tuple(ranking))
    return NtuMarket(agents, contracts, prefs)


def _supermodular(rng: random.Random, owner: str, domain: list) -> Valuation:
    """``c0 + sum a_w + sum_T c_T 1[T <= S]`` with ``c_T >= 0`` for ``|T| >= 2``."""
    dom = sorted(domain)
    c0 = Fraction(rng.randint(-2, 2))
    single = {w: Fraction(rng.randint(-6, 6), rng.choice((1, 2))) for w in dom}
    bonus = {}
    for k in range(2, len(dom) + 1):
        for t in combinations(dom, k):
            if rng.random() < 0.5:
                bonus[frozenset(t)] = Fraction(rng.randint(0, 6), rng.choice((1, 2)))

    def value(s):
        return c0 + sum((single[w] for w in s), Fraction(0)) + sum(
            (c for t, c in bonus.items() if t <= s), Fraction(0)
        )

    return Valuation.from_function(owner, dom, value)


def _tu(rng: random.Random, p: GenProfile) -> TuMarket:
    agents, prims, own = _structure(rng, p)
    vals = {}
    for agent in sorted(agents):
        v = _supermodular(rng, agent, own[agent])
        if agents[agent] is Side.CENTER:
            right = [w for w in own[agent] if prims[w].wing is Side.RIGHT]
            v = flip_central(v, right)
        vals[agent] = v
    return TuMarket(agents, prims, vals)


def _org(rng: random.Random, p: GenProfile) -> OrgMarket:
    applicants = [f"i{k}" for k in range(1, p.n_applicants + 1)]
    orgs = ["o1", "o2"]
    app_rank = {}
    for a in applicants:
        acceptable = [o for o in orgs if rng.random() < 0.8]
        rng.shuffle(acceptable)
        app_rank[a] = acceptable
    org_rank = {}
    for o in orgs:
        pool = [a for a in applicants if o in app_rank[a]]
        org_rank[o] = [sorted(b) for b in _chain(rng, pool)]
    return make_org_market(orgs, org_rank, app_rank)


def gen(profile: GenProfile):
    """Build and re-validate one market for ``profile``."""
    rng = random.Random(profile.seed)
    fam = profile.family
    if fam in (COMPLEMENTARY_NTU, PICK_ONE_SIDE_NTU, UNCONSTRAINED):
        market = _ntu(rng, profile)
        if fam != UNCONSTRAINED:
            report = validate_market(market, "full" if fam == COMPLEMENTARY_NTU else "pick-one-side")
            if not report.ok:
                raise GenerationError(f"seed {profile.seed}: {fam} market fails validation: {report.lines()[1]}")
        return market
    if fam == FULLY_COMPLEMENTARY_TU:
        market = _tu(rng, profile)
        report = check_full_complementarity(market)
        if not report.ok:
            raise GenerationError(f"seed {profile.seed}: tu market fails full complementarity")
        return market
    market = _org(rng, profile)
    conv = to_contract_market(market)
    for o in market.orgs:
        if check_complementarity(conv, o) is not None:
            raise GenerationError(f"seed {profile.seed}: org {o} is not complementary")
    return market


def gen_seeds(family: str, count: int, start: int = 0, **sizes) -> list:
    return [gen(GenProfile(seed=s, family=family, **sizes)) for s in range(start, start + count)]


def random_valuation(rng: random.Random, owner: str, domain, low: int = -4, high: int = 6) -> Valuation:
    """Unstructured rational valuation with ``v(empty) = 0``."""
    dom = sorted(domain)
    table = [Fraction(0)] + [Fraction(rng.randint(low, high), rng.choice((1, 2, 3))) for _ in range((1 << len(dom)) - 1)]
    return Valuation(owner, tuple(dom), tuple(table))


def supermodular_valuation(rng: random.Random, owner: str, domain) -> Valuation:
    return _supermodular(rng, owner, list(domain))


__all__ = [
    "COMPLEMENTARY_NTU",
    "COMPLEMENTARY_ORG",
    "FAMILIES",
    "FULLY_COMPLEMENTARY_TU",
    "GenProfile",
    "GenerationError",
    "PICK_ONE_SIDE_NTU",
    "UNCONSTRAINED",
    "gen",
    "gen_seeds",
    "random_valuation",
    "supermodular_valuation",
]
