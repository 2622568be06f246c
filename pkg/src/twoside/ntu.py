"""NTU markets: agents on three tiers, bilateral contracts, ranked bundles.

A contract joins a left-side agent with a central agent (left wing) or a
central agent with a right-side agent (right wing).  Participants are stored
as ``(upstream, downstream)``: ``(left, center)`` on the left wing and
``(center, right)`` on the right wing.

Preferences are ranked lists of bundles.  Bundles that are not listed rank
strictly below the empty bundle, ordered among themselves by cardinality and
then by their sorted contract ids.  The completion never changes choice
behaviour (the empty bundle is always available) and only matters when two
bundles are compared directly, as setwise blocking does.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import chain, combinations
from typing import Iterable, Iterator, Mapping, Optional

from twoside.errors import InputError

Bundle = frozenset
EMPTY: frozenset = frozenset()


class Side(str, enum.Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"

    @property
    def mirror(self) -> "Side":
        if self is Side.LEFT:
            return Side.RIGHT
        if self is Side.RIGHT:
            return Side.LEFT
        return self


def bundle_key(bundle: Iterable[str]) -> tuple:
    """Canonical order: cardinality first, then sorted ids."""
    ids = tuple(sorted(bundle))
    return (len(ids), ids)


def fmt_bundle(bundle: Iterable[str]) -> str:
    return "{" + ",".join(sorted(bundle)) + "}"


def subsets(items: Iterable[str], proper: bool = False) -> Iterator[frozenset]:
    """All subsets in canonical (cardinality, lexicographic) order."""
    ordered = sorted(items)
    top = len(ordered) if not proper else len(ordered) - 1
    for k in range(top + 1):
        for combo in combinations(ordered, k):
            yield frozenset(combo)


def nonempty_subsets(items: Iterable[str]) -> Iterator[frozenset]:
    ordered = sorted(items)
    return (
        frozenset(c)
        for c in chain.from_iterable(combinations(ordered, k) for k in range(1, len(ordered) + 1))
    )


@dataclass(frozen=True)
class Contract:
    id: str
    upstream: str
    downstream: str
    wing: Optional[Side]

    @property
    def participants(self) -> tuple[str, str]:
        return (self.upstream, self.downstream)

    def other(self, agent: str) -> str:
        return self.downstream if agent == self.upstream else self.upstream


@dataclass(frozen=True)
class RankedPreference:
    owner: str
    ranking: tuple[frozenset, ...]

    def __post_init__(self):
        ranking = tuple(frozenset(b) for b in self.ranking)
        if len(set(ranking)) != len(ranking):
            raise InputError(f"agent {self.owner}: duplicate bundle in ranking")
        object.__setattr__(self, "ranking", ranking)
        keys: dict = {}
        for pos, b in enumerate(ranking):
            keys[b] = (0, pos)
        if EMPTY not in keys:
            keys[EMPTY] = (0, len(ranking))
        object.__setattr__(self, "_keys", keys)

    def choose(self, available: frozenset) -> frozenset:
        """Highest-ranked listed bundle inside ``available`` (or the empty set)."""
        for b in self.ranking:
            if b <= available:
                return b
        return EMPTY

    def rank_key(self, bundle: frozenset) -> tuple:
        key = self._keys.get(bundle)
        if key is not None:
            return key
        return (1,) + bundle_key(bundle)

    def prefers(self, a: frozenset, b: frozenset) -> bool:
        """Strict preference ``a`` over ``b`` under the completed order."""
        return self.rank_key(frozenset(a)) < self.rank_key(frozenset(b))

    def acceptable(self) -> tuple[frozenset, ...]:
        """Listed bundles ranked strictly above the empty bundle."""
        out = []
        for b in self.ranking:
            if not b:
                break
            out.append(b)
        return tuple(out)


@dataclass(frozen=True)
class NtuMarket:
    """Immutable NTU market.

    ``agents`` maps ids to sides (``None`` for every agent when ``tiered`` is
    false, which is only used for the three-agent fixture where any pair of
    agents may sign).
    """

    agents: Mapping[str, Optional[Side]]
    contracts: Mapping[str, Contract]
    preferences: Mapping[str, RankedPreference]
    tiered: bool = True
    _by_agent: dict = field(init=False, repr=False, compare=False)
    _all: frozenset = field(init=False, repr=False, compare=False)
    _left: frozenset = field(init=False, repr=False, compare=False)
    _right: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        agents = dict(self.agents)
        contracts = dict(self.contracts)
        prefs = dict(self.preferences)
        by_agent: dict[str, set] = {a: set() for a in agents}
        for cid, c in contracts.items():
            if cid != c.id:
                raise InputError(f"contract key {cid!r} does not match id {c.id!r}")
            for a in c.participants:
                if a not in agents:
                    raise InputError(f"contract {cid}: unknown agent {a!r}")
            if c.upstream == c.downstream:
                raise InputError(f"contract {cid}: an agent cannot contract with itself")
            if self.tiered:
                _check_wing(c, agents)
            elif c.wing is not None:
                raise InputError(f"contract {cid}: untiered markets carry no wings")
            by_agent[c.upstream].add(cid)
            by_agent[c.downstream].add(cid)
        if self.tiered:
            for a, side in agents.items():
                if not isinstance(side, Side):
                    raise InputError(f"agent {a}: side must be left, center or right")
        elif any(s is not None for s in agents.values()):
            raise InputError("untiered markets carry no sides")
        for a in agents:
            if a not in prefs:
                raise InputError(f"agent {a}: missing preference record")
        for a, pref in prefs.items():
            if a not in agents:
                raise InputError(f"preference for unknown agent {a!r}")
            if pref.owner != a:
                raise InputError(f"preference keyed {a!r} is owned by {pref.owner!r}")
            own = by_agent[a]
            for b in pref.ranking:
                if not b <= own:
                    extra = fmt_bundle(b - own)
                    raise InputError(f"agent {a}: bundle {fmt_bundle(b)} names contracts {extra} it does not sign")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "contracts", contracts)
        object.__setattr__(self, "preferences", prefs)
        object.__setattr__(self, "_by_agent", {a: frozenset(s) for a, s in by_agent.items()})
        object.__setattr__(self, "_all", frozenset(contracts))
        object.__setattr__(self, "_left", frozenset(c for c, x in contracts.items() if x.wing is Side.LEFT))
        object.__setattr__(self, "_right", frozenset(c for c, x in contracts.items() if x.wing is Side.RIGHT))

    @property
    def all_contracts(self) -> frozenset:
        return self._all

    @property
    def left_contracts(self) -> frozenset:
        return self._left

    @property
    def right_contracts(self) -> frozenset:
        return self._right

    def agents_on(self, side: Side) -> list[str]:
        return sorted(a for a, s in self.agents.items() if s is side)

    def contracts_of(self, agent: str) -> frozenset:
        try:
            return self._by_agent[agent]
        except KeyError:
            raise InputError(f"unknown agent {agent!r}") from None

    def neighbours(self, bundle: Iterable[str]) -> frozenset:
        """N(Y): every participant of some contract in ``bundle``."""
        out: set = set()
        for cid in bundle:
            out.update(self.contracts[cid].participants)
        return frozenset(out)

    def check_bundle(self, bundle: Iterable[str]) -> frozenset:
        b = frozenset(bundle)
        if not b <= self._all:
            raise InputError(f"unknown contract(s) {fmt_bundle(b - self._all)}")
        return b

    def restrict(self, bundle: Iterable[str], agent: str) -> frozenset:
        return self.check_bundle(bundle) & self.contracts_of(agent)

    def side_split(self, bundle: Iterable[str]) -> tuple[frozenset, frozenset]:
        b = self.check_bundle(bundle)
        return b & self._left, b & self._right

    def choose(self, agent: str, bundle: Iterable[str]) -> frozenset:
        own = self.contracts_of(agent)
        return self.preferences[agent].choose(self.check_bundle(bundle) & own)

    def reject(self, agent: str, bundle: Iterable[str]) -> frozenset:
        held = self.restrict(bundle, agent)
        return held - self.preferences[agent].choose(held)

    def prefers(self, agent: str, a: Iterable[str], b: Iterable[str]) -> bool:
        return self.preferences[agent].prefers(frozenset(a), frozenset(b))

    def mirrored(self) -> "NtuMarket":
        """Same market with the two wings exchanged."""
        if not self.tiered:
            raise InputError("only tiered markets can be mirrored")
        agents = {a: s.mirror for a, s in self.agents.items()}
        contracts = {
            cid: Contract(cid, c.downstream, c.upstream, c.wing.mirror) for cid, c in self.contracts.items()
        }
        return NtuMarket(agents, contracts, self.preferences, tiered=True)


def _check_wing(c: Contract, agents: Mapping[str, Optional[Side]]) -> None:
    up, down = agents[c.upstream], agents[c.downstream]
    if c.wing is Side.LEFT:
        ok = up is Side.LEFT and down is Side.CENTER
    elif c.wing is Side.RIGHT:
        ok = up is Side.CENTER and down is Side.RIGHT
    else:
        raise InputError(f"contract {c.id}: wing must be left or right")
    if not ok:
        raise InputError(
            f"contract {c.id}: a {c.wing.value}-wing contract cannot join "
            f"{c.upstream} ({up.value if up else '?'}) and {c.downstream} ({down.value if down else '?'})"
        )


def is_individually_rational(market: NtuMarket, outcome: Iterable[str]) -> tuple[bool, Optional[str]]:
    """``Y_i == Ch_i(Y)`` for every agent; returns the first violator by id."""
    y = market.check_bundle(outcome)
    for agent in sorted(market.agents):
        held = y & market.contracts_of(agent)
        if market.preferences[agent].choose(held) != held:
            return False, agent
    return True, None


def make_market(
    sides: Mapping[str, Optional[str]],
    contracts: Iterable[tuple],
    rankings: Mapping[str, Iterable[Iterable[str]]],
    tiered: bool = True,
) -> NtuMarket:
    """Convenience constructor from plain data.

    ``contracts`` holds ``(id, wing, upstream, downstream)`` tuples (wing may
    be ``None`` for untiered markets); rankings list bundles best first.
    """
    agents = {a: (Side(s) if s is not None else None) for a, s in sides.items()}
    cs = {}
    for cid, wing, up, down in contracts:
        if cid in cs:
            raise InputError(f"duplicate contract id {cid!r}")
        cs[cid] = Contract(cid, up, down, Side(wing) if wing is not None else None)
    prefs = {a: RankedPreference(a, tuple(frozenset(b) for b in rankings.get(a, ()))) for a in agents}
    return NtuMarket(agents, cs, prefs, tiered=tiered)
