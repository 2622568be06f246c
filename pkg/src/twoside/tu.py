"""TU markets: primitive contracts, exact valuations, prices and demand.

Prices are stored once per primitive as the transfer ``t`` paid by the
upstream participant (the left agent on left contracts, the central agent on
right contracts); the downstream participant's component is ``-t``.
Valuations are kept as tables indexed by bitmasks over the agent's sorted
primitives, with omitted subsets worth 0.
"""

from __future__ import annotations

import random
from itertools import combinations
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from twoside.errors import InputError, guard
from twoside.ntu import Contract, Side, _check_wing, bundle_key, fmt_bundle

PrimitiveContract = Contract

MAX_DEMAND = 16
NEG_INF = float("-inf")  # marker for signing a primitive twice; never mixed into arithmetic


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise InputError(f"refusing float value {x!r}; use an exact rational")
    return Fraction(x)


def _masks_over(bits: list):
    """Masks over ``bits`` in canonical (cardinality, lexicographic) order."""
    for r in range(len(bits) + 1):
        for combo in combinations(bits, r):
            m = 0
            for b in combo:
                m |= 1 << b
            yield m


@dataclass(frozen=True)
class Valuation:
    """Exact valuation over subsets of ``domain`` (a sorted tuple of ids)."""

    owner: str
    domain: tuple
    table: tuple

    def __post_init__(self):
        domain = tuple(sorted(self.domain))
        if len(set(domain)) != len(domain):
            raise InputError(f"valuation of {self.owner}: repeated primitive")
        if len(self.table) != 1 << len(domain):
            raise InputError(f"valuation of {self.owner}: table has the wrong length")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "table", tuple(_frac(x) for x in self.table))
        object.__setattr__(self, "_bit", {w: 1 << k for k, w in enumerate(domain)})

    @classmethod
    def from_map(cls, owner: str, domain: Iterable[str], values: Mapping) -> "Valuation":
        dom = tuple(sorted(domain))
        bit = {w: 1 << k for k, w in enumerate(dom)}
        table = [Fraction(0)] * (1 << len(dom))
        seen = set()
        for bundle, val in values.items():
            b = frozenset(bundle)
            if b in seen:
                raise InputError(f"valuation of {owner}: bundle {fmt_bundle(b)} given twice")
            seen.add(b)
            mask = 0
            for w in b:
                if w not in bit:
                    raise InputError(f"valuation of {owner}: {w!r} is not one of its primitives")
                mask |= bit[w]
            table[mask] = _frac(val)
        return cls(owner, dom, tuple(table))

    @classmethod
    def from_function(cls, owner: str, domain: Iterable[str], fn) -> "Valuation":
        dom = tuple(sorted(domain))
        table = []
        for mask in range(1 << len(dom)):
            table.append(_frac(fn(frozenset(w for k, w in enumerate(dom) if mask >> k & 1))))
        return cls(owner, dom, tuple(table))

    def mask(self, bundle: Iterable[str]) -> int:
        m = 0
        for w in bundle:
            try:
                m |= self._bit[w]
            except KeyError:
                raise InputError(f"{w!r} is not a primitive of {self.owner}") from None
        return m

    def bundle(self, mask: int) -> frozenset:
        return frozenset(w for k, w in enumerate(self.domain) if mask >> k & 1)

    def __call__(self, bundle: Iterable[str]) -> Fraction:
        return self.table[self.mask(bundle)]

    def items(self):
        """``(bundle, value)`` pairs in canonical order."""
        for m in _masks_over(list(range(len(self.domain)))):
            yield self.bundle(m), self.table[m]


@dataclass(frozen=True)
class TuMarket:
    agents: Mapping[str, Side]
    primitives: Mapping[str, Contract]
    valuations: Mapping[str, Valuation]
    _by_agent: dict = field(init=False, repr=False, compare=False)
    _sets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        agents = dict(self.agents)
        prims = dict(self.primitives)
        vals = dict(self.valuations)
        by_agent: dict = {a: set() for a in agents}
        for a, s in agents.items():
            if not isinstance(s, Side):
                raise InputError(f"agent {a}: side must be left, center or right")
        for wid, w in prims.items():
            if wid != w.id:
                raise InputError(f"primitive key {wid!r} does not match id {w.id!r}")
            for a in w.participants:
                if a not in agents:
                    raise InputError(f"primitive {wid}: unknown agent {a!r}")
            _check_wing(w, agents)
            by_agent[w.upstream].add(wid)
            by_agent[w.downstream].add(wid)
        for a in agents:
            own = frozenset(by_agent[a])
            v = vals.get(a)
            if v is None:
                v = Valuation.from_map(a, own, {})
            elif frozenset(v.domain) != own:
                raise InputError(f"valuation of {a} is over {fmt_bundle(v.domain)}, primitives are {fmt_bundle(own)}")
            vals[a] = v
        for a in vals:
            if a not in agents:
                raise InputError(f"valuation for unknown agent {a!r}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "primitives", prims)
        object.__setattr__(self, "valuations", vals)
        object.__setattr__(self, "_by_agent", {a: frozenset(s) for a, s in by_agent.items()})
        left = frozenset(w for w, c in prims.items() if c.wing is Side.LEFT)
        object.__setattr__(self, "_sets", (frozenset(prims), left, frozenset(prims) - left))

    @property
    def omega(self) -> frozenset:
        return self._sets[0]

    @property
    def left(self) -> frozenset:
        return self._sets[1]

    @property
    def right(self) -> frozenset:
        return self._sets[2]

    def primitives_of(self, agent: str) -> frozenset:
        try:
            return self._by_agent[agent]
        except KeyError:
            raise InputError(f"unknown agent {agent!r}") from None

    def sign(self, w: str, agent: str) -> int:
        """+1 when ``agent`` pays ``t^w`` (upstream), -1 when it receives it."""
        c = self.primitives[w]
        if agent == c.upstream:
            return 1
        if agent == c.downstream:
            return -1
        raise InputError(f"{agent} does not sign {w}")

    def check_primitives(self, bundle: Iterable[str]) -> frozenset:
        b = frozenset(bundle)
        if not b <= self.omega:
            raise InputError(f"unknown primitive(s) {fmt_bundle(b - self.omega)}")
        return b

    def agent_prices(self, prices: "PriceVector", agent: str) -> dict:
        return {w: prices.component(self, w, agent) for w in sorted(self.primitives_of(agent))}


def make_tu_market(sides: Mapping[str, str], primitives: Iterable[tuple], values: Mapping[str, Mapping]) -> TuMarket:
    """``primitives`` holds ``(id, wing, upstream, downstream)``; ``values`` maps agent -> {bundle: value}."""
    agents = {a: Side(s) for a, s in sides.items()}
    prims = {}
    for wid, wing, up, down in primitives:
        if wid in prims:
            raise InputError(f"duplicate primitive id {wid!r}")
        prims[wid] = Contract(wid, up, down, Side(wing))
    own: dict = {a: set() for a in agents}
    for wid, c in prims.items():
        for a in c.participants:
            if a in own:
                own[a].add(wid)
    vals = {a: Valuation.from_map(a, own[a], values.get(a, {})) for a in agents}
    return TuMarket(agents, prims, vals)


@dataclass(frozen=True)
class PriceVector:
    """Transfer ``t^w`` per primitive, paid by the upstream participant."""

    transfers: Mapping[str, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "transfers", {w: _frac(t) for w, t in sorted(dict(self.transfers).items())})

    def __getitem__(self, w: str) -> Fraction:
        return self.transfers[w]

    def component(self, market: TuMarket, w: str, agent: str) -> Fraction:
        return market.sign(w, agent) * self.transfers[w]

    def text(self) -> str:
        return " ".join(f"{w}={t}" for w, t in self.transfers.items())


def utility(market: TuMarket, agent: str, contracts: Iterable[tuple]):
    """``v_i(tau(Y)) - sum of i's payments``; ``NEG_INF`` if a primitive repeats.

    ``contracts`` holds ``(primitive, t)`` pairs in canonical orientation.
    """
    own = market.primitives_of(agent)
    items = list(contracts)
    prims = [w for w, _ in items]
    for w in prims:
        if w not in own:
            raise InputError(f"{w!r} is not a primitive of {agent}")
    if len(set(prims)) != len(prims):
        return NEG_INF
    pay = sum((market.sign(w, agent) * _frac(t) for w, t in items), Fraction(0))
    return market.valuations[agent](prims) - pay


def _payoffs(v: Valuation, prices: Mapping[str, Fraction]) -> list:
    """``v(S) - p(S)`` for every mask, with prices summed incrementally."""
    n = len(v.domain)
    p = [_frac(prices[w]) for w in v.domain]
    psum = [Fraction(0)] * (1 << n)
    for m in range(1, 1 << n):
        low = m & -m
        psum[m] = psum[m ^ low] + p[low.bit_length() - 1]
    return [v.table[m] - psum[m] for m in range(1 << n)]


def demand_of(v: Valuation, prices: Mapping[str, Fraction]) -> list:
    """All maximizers of ``v(S) - sum p^w`` in canonical order."""
    guard(f"demand of {v.owner}", len(v.domain), MAX_DEMAND)
    missing = [w for w in v.domain if w not in prices]
    if missing:
        raise InputError(f"no price for {', '.join(missing)}")
    pay = _payoffs(v, prices)
    best = max(pay)
    out = [v.bundle(m) for m in range(len(pay)) if pay[m] == best]
    return sorted(out, key=bundle_key)


def demand(market: TuMarket, agent: str, prices: Mapping[str, Fraction]) -> list:
    """``D_i(p_i)``; ``prices`` are the agent's own components ``p^w_i``."""
    return demand_of(market.valuations[agent], prices)


def indirect_utility(v: Valuation, prices: Mapping[str, Fraction]) -> Fraction:
    return max(_payoffs(v, prices))


def is_equilibrium(market: TuMarket, allocation: Iterable[str], prices: PriceVector) -> tuple[bool, Optional[str]]:
    """``Phi_i in D_i(p_i)`` for every agent; returns the first violator by id."""
    phi = market.check_primitives(allocation)
    for w in market.omega:
        if w not in prices.transfers:
            raise InputError(f"no price for {w}")
    for agent in sorted(market.agents):
        v = market.valuations[agent]
        guard(f"demand of {agent}", len(v.domain), MAX_DEMAND)
        pay = _payoffs(v, market.agent_prices(prices, agent))
        if pay[v.mask(phi & market.primitives_of(agent))] != max(pay):
            return False, agent
    return True, None


def kappa(allocation: Iterable[str], prices: PriceVector) -> frozenset:
    """Priced outcome ``{(w, t^w) : w in allocation}``."""
    return frozenset((w, prices[w]) for w in allocation)


def fmt_outcome(outcome: Iterable[tuple]) -> str:
    return "{" + ",".join(f"{w}@{t}" for w, t in sorted(outcome)) + "}"


@dataclass(frozen=True)
class EquilibriumCertificate:
    allocation: frozenset
    prices: PriceVector
    evidence: Mapping[str, Fraction]  # optimal indirect utility per agent

    def verify(self, market: TuMarket) -> bool:
        ok, _ = is_equilibrium(market, self.allocation, self.prices)
        if not ok:
            return False
        for agent, best in self.evidence.items():
            if indirect_utility(market.valuations[agent], market.agent_prices(self.prices, agent)) != best:
                return False
        return True

    def lines(self) -> list[str]:
        return [f"allocation={fmt_bundle(self.allocation)}", f"prices {self.prices.text()}".rstrip()]


def certify(market: TuMarket, allocation: Iterable[str], prices: PriceVector) -> Optional[EquilibriumCertificate]:
    phi = market.check_primitives(allocation)
    ok, _ = is_equilibrium(market, phi, prices)
    if not ok:
        return None
    evidence = {
        a: indirect_utility(market.valuations[a], market.agent_prices(prices, a)) for a in sorted(market.agents)
    }
    return EquilibriumCertificate(phi, prices, evidence)


# supermodularity and gross complements


def check_supermodular(v: Valuation) -> Optional[tuple]:
    """First ``(Phi, Psi, w)`` with ``Phi < Psi``, ``w`` outside ``Psi`` and a
    larger marginal value of ``w`` at ``Phi`` than at ``Psi``; None if none.

    Order: ``w`` by id, then ``Psi`` and ``Phi`` canonically.
    """
    guard(f"supermodularity check of {v.owner}", len(v.domain), MAX_DEMAND)
    n = len(v.domain)
    t = v.table
    for k in range(n):
        bit = 1 << k
        rest = [j for j in range(n) if j != k]
        for psi in _masks_over(rest):
            gain_psi = t[psi | bit] - t[psi]
            for phi in _masks_over([j for j in rest if psi >> j & 1]):
                if phi == psi:
                    continue
                if t[phi | bit] - t[phi] > gain_psi:
                    return v.bundle(phi), v.bundle(psi), v.domain[k]
    return None


@dataclass(frozen=True)
class GcViolation:
    """Price pair ``p >= q`` with unique demands ``Phi``, ``Psi`` and a primitive
    whose price is unchanged that is demanded at ``p`` but not at ``q``."""

    p: Mapping[str, Fraction]
    q: Mapping[str, Fraction]
    demand_p: frozenset
    demand_q: frozenset
    primitive: str
    bound: Optional[Fraction] = None

    def verify(self, v: Valuation) -> bool:
        if any(self.p[w] < self.q[w] for w in v.domain):
            return False
        dp, dq = demand_of(v, self.p), demand_of(v, self.q)
        if dp != [self.demand_p] or dq != [self.demand_q]:
            return False
        w = self.primitive
        return self.p[w] == self.q[w] and w in self.demand_p and w not in self.demand_q

    def lines(self) -> list[str]:
        fmt = lambda d: " ".join(f"{w}={x}" for w, x in sorted(d.items()))
        return [
            f"p {fmt(self.p)}".rstrip(),
            f"q {fmt(self.q)}".rstrip(),
            f"D(p)={fmt_bundle(self.demand_p)} D(q)={fmt_bundle(self.demand_q)} lost={self.primitive}",
        ]


def falsify_gross_complements(v: Valuation) -> GcViolation:
    """Turn a supermodularity witness into a certified gross-complements failure.

    ``H`` is one more than the sum of all ``|v|``.  At ``p`` the primitives of
    ``Phi`` cost ``-H``, everything outside ``Phi + w`` costs ``H`` and ``w``
    costs the midpoint of its two marginal values; ``q`` also drops the
    primitives of ``Psi - Phi`` to ``-H``.
    """
    witness = check_supermodular(v)
    if witness is None:
        raise InputError(f"valuation of {v.owner} is supermodular; nothing to falsify")
    phi, psi, w = witness
    big = sum((abs(x) for x in v.table), Fraction(0)) + 1
    high = v(phi | {w}) - v(phi)
    low = v(psi | {w}) - v(psi)
    p = {}
    for x in v.domain:
        if x in phi:
            p[x] = -big
        elif x == w:
            p[x] = (high + low) / 2
        else:
            p[x] = big
    q = dict(p)
    for x in psi - phi:
        q[x] = -big
    out = GcViolation(p, q, phi | {w}, psi, w, big)
    if not out.verify(v):
        raise AssertionError(f"falsifier for {v.owner} did not verify; this is a bug")
    return out


@dataclass(frozen=True)
class ProbeResult:
    falsified: bool
    condition: Optional[str] = None
    p: Optional[dict] = None
    q: Optional[dict] = None
    detail: str = ""
    trials: int = 0

    def line(self) -> str:
        if not self.falsified:
            return f"no-violation-found trials={self.trials}"
        return f"falsified {self.condition}: {self.detail}"


ANTITONE = "antitone"
GROSS_COMPLEMENTS = "gross-complements"
SAME_SIDE_GC = "same-side-gc-cross-side-gs"


def _draw_price(rng: random.Random, scale: Fraction) -> Fraction:
    return Fraction(rng.randint(-64, 64), 64) * scale


def _check_pair(v: Valuation, p: dict, q: dict, conditions, left: frozenset, right: frozenset):
    dp, dq = demand_of(v, p), demand_of(v, q)
    if ANTITONE in conditions:
        for a in dp:
            for b in dq:
                if a & b not in dp or a | b not in dq:
                    return ANTITONE, f"D(p)={_fam(dp)} D(q)={_fam(dq)} fails at {fmt_bundle(a)},{fmt_bundle(b)}"
    if len(dp) != 1 or len(dq) != 1:
        return None
    phi, psi = dp[0], dq[0]
    same = frozenset(w for w in v.domain if p[w] == q[w])
    if GROSS_COMPLEMENTS in conditions and not (phi & same) <= psi:
        return GROSS_COMPLEMENTS, f"D(p)={fmt_bundle(phi)} D(q)={fmt_bundle(psi)} lost {fmt_bundle((phi & same) - psi)}"
    if SAME_SIDE_GC in conditions:
        for fixed, moving in ((left, right), (right, left)):
            if all(p[w] == q[w] for w in fixed) and all(p[w] >= q[w] for w in moving):
                if not (phi & moving & same) <= psi or not (psi & fixed) <= (phi & fixed):
                    return SAME_SIDE_GC, f"D(p)={fmt_bundle(phi)} D(q)={fmt_bundle(psi)}"
    return None


def _fam(family) -> str:
    return "[" + ",".join(fmt_bundle(b) for b in family) + "]"


def sampled_condition_probe(
    v: Valuation,
    trials: int = 500,
    seed: int = 0,
    wings: Optional[tuple] = None,
    injected: Iterable[tuple] = (),
) -> ProbeResult:
    """Search random price pairs for a violation; never proves absence.

    Without ``wings`` the agent is probed for antitone demand and gross
    complements.  With ``wings = (left, right)`` (a central agent) it is probed
    for same-side gross complements and cross-side gross substitutes, one
    wing's prices held equal while the other's fall.  Pairs in ``injected``
    are checked first.  Coordinates are drawn from ``[-(H+1), H+1]``, mixed
    with a tighter scale around the valuation's own spread; each lowered
    coordinate is kept equal with probability one half.
    """
    dom = v.domain
    if wings is None:
        conditions = (ANTITONE, GROSS_COMPLEMENTS)
        left, right = frozenset(), frozenset()
    else:
        conditions = (SAME_SIDE_GC,)
        left, right = frozenset(wings[0]) & frozenset(dom), frozenset(wings[1]) & frozenset(dom)
    for p, q in injected:
        found = _check_pair(v, dict(p), dict(q), conditions, left, right)
        if found:
            return ProbeResult(True, found[0], dict(p), dict(q), found[1], 0)
    if not dom:
        return ProbeResult(False, trials=trials)
    rng = random.Random(seed)
    big = sum((abs(x) for x in v.table), Fraction(0)) + 1
    spread = max(v.table) - min(v.table) + 1
    for trial in range(1, trials + 1):
        scale = big if rng.random() < 0.25 else spread
        q = {w: _draw_price(rng, scale) for w in dom}
        if wings is not None:
            moving = right if rng.random() < 0.5 else left
        else:
            moving = frozenset(dom)
        p = {}
        for w in dom:
            if w in moving and rng.random() < 0.5:
                p[w] = q[w] + abs(_draw_price(rng, scale))
            else:
                p[w] = q[w]
        found = _check_pair(v, p, q, conditions, left, right)
        if found:
            return ProbeResult(True, found[0], p, q, found[1], trial)
    return ProbeResult(False, trials=trials)


@dataclass
class FullComplementarityReport:
    """Per-agent supermodularity verdicts.

    For central agents the check runs on the flipped valuation, which is a
    sufficient condition only; the label says so.
    """

    rows: list = field(default_factory=list)  # (agent, side, witness or None)
    label: str = "sufficient-condition"

    @property
    def ok(self) -> bool:
        return all(w is None for _, _, w in self.rows)

    def lines(self) -> list[str]:
        out = [f"tu-full {'ok' if self.ok else 'fails'} ({self.label})"]
        for agent, side, w in self.rows:
            if w is not None:
                phi, psi, x = w
                out.append(
                    f"violation {agent} ({side.value}{', flipped' if side is Side.CENTER else ''}): "
                    f"marginal of {x} at {fmt_bundle(phi)} exceeds that at {fmt_bundle(psi)}"
                )
        return out


def check_full_complementarity(market: TuMarket) -> FullComplementarityReport:
    report = FullComplementarityReport()
    for agent in sorted(market.agents):
        side = market.agents[agent]
        v = market.valuations[agent]
        if side is Side.CENTER:
            v = flip_central(v, market.right & market.primitives_of(agent))
        report.rows.append((agent, side, check_supermodular(v)))
    return report


# transformation


def flip_central(v: Valuation, right: Iterable[str]) -> Valuation:
    """``v~(Psi) = v(Psi^L u (Omega^R - Psi^R))``."""
    rmask = v.mask(frozenset(right) & frozenset(v.domain))
    return Valuation(v.owner, v.domain, tuple(v.table[m ^ rmask] for m in range(len(v.table))))


def flip_all(v: Valuation) -> Valuation:
    """``v~(Phi) = v(Omega - Phi)``."""
    full = len(v.table) - 1
    return Valuation(v.owner, v.domain, tuple(v.table[m ^ full] for m in range(len(v.table))))


def transform_market(market: TuMarket) -> TuMarket:
    """Left agents unchanged, central agents flipped on the right wing, right agents fully flipped."""
    vals = {}
    for agent, side in market.agents.items():
        v = market.valuations[agent]
        if side is Side.CENTER:
            v = flip_central(v, market.right & market.primitives_of(agent))
        elif side is Side.RIGHT:
            v = flip_all(v)
        vals[agent] = v
    return TuMarket(market.agents, market.primitives, vals)


def g(market: TuMarket, prices: PriceVector) -> PriceVector:
    """Reverse the transfer on every right-wing primitive."""
    right = market.right
    return PriceVector({w: (-t if w in right else t) for w, t in prices.transfers.items()})


def flip_allocation(market: TuMarket, allocation: Iterable[str]) -> frozenset:
    """``Psi^L u (Omega^R - Psi^R)``."""
    psi = market.check_primitives(allocation)
    return (psi & market.left) | (market.right - psi)


@dataclass(frozen=True)
class MappedEquilibrium:
    allocation: frozenset
    prices: PriceVector
    verified: bool


def map_equilibrium(market: TuMarket, allocation: Iterable[str], prices: PriceVector) -> MappedEquilibrium:
    """Carry an equilibrium of the transformed market back to ``market``."""
    psi = market.check_primitives(allocation)
    ok, agent = is_equilibrium(transform_market(market), psi, prices)
    if not ok:
        raise InputError(f"not an equilibrium of the transformed market (agent {agent})")
    phi = flip_allocation(market, psi)
    back = g(market, prices)
    verified, _ = is_equilibrium(market, phi, back)
    return MappedEquilibrium(phi, back, verified)


@dataclass
class DemandRelationReport:
    checked: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def demand_relation_check(market: TuMarket, agent: str, prices: Mapping[str, Fraction]) -> DemandRelationReport:
    """Compare ``D~_i(g(p_i))`` with the flipped image of ``D_i(p_i)`` bundle by bundle.

    ``prices`` are the agent's own components.  Left agents are accepted and
    compare identical families.
    """
    side = market.agents.get(agent)
    if side is None:
        raise InputError(f"unknown agent {agent!r}")
    v = market.valuations[agent]
    own_right = market.right & market.primitives_of(agent)
    if side is Side.CENTER:
        vt, flipmask = flip_central(v, own_right), v.mask(own_right)
    elif side is Side.RIGHT:
        vt, flipmask = flip_all(v), len(v.table) - 1
    else:
        vt, flipmask = v, 0
    gp = {w: (-x if w in own_right else x) for w, x in prices.items()}
    guard(f"demand of {agent}", len(v.domain), MAX_DEMAND)
    orig, trans = _payoffs(v, prices), _payoffs(vt, gp)
    best_o, best_t = max(orig), max(trans)
    rep = DemandRelationReport()
    for m in range(len(v.table)):
        rep.checked += 1
        in_t = trans[m] == best_t
        in_o = orig[m ^ flipmask] == best_o
        if in_t != in_o:
            rep.mismatches.append((agent, v.bundle(m), dict(prices)))
    return rep
