"""Exhaustive checks of the preference conditions on NTU agents.

Every check quantifies over all pairs of bundles of one agent, so the cost is
about ``4 ** |X_i|``; agents with more than ``MAX_AGENT_CONTRACTS`` contracts
are refused.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from twoside.errors import InputError, guard
from twoside.ntu import EMPTY, NtuMarket, Side, fmt_bundle, subsets

MAX_AGENT_CONTRACTS = 14

COMPLEMENTARITY = "Complementarity"
SAME_SIDE = "SameSideComplementarity"
CROSS_SIDE = "CrossSideSubstitutability"
PICK_ONE_SIDE = "PickOneSide"

# variant flags for the central-agent check
FULL = "full"
SAME_SIDE_ONLY = "same-side"
CROSS_SIDE_ONLY = "cross-side"


@dataclass(frozen=True)
class ConditionViolation:
    """Witness that an agent's preferences fail a condition.

    ``inclusion`` names the failed containment, e.g. ``"ch(Y)^L <= ch(Z)^L"``;
    for pick-one-side ``y`` is the offending bundle and ``z`` is empty.
    """

    agent: str
    kind: str
    y: frozenset
    z: frozenset
    inclusion: str
    grows: Optional[str] = None

    def describe(self) -> str:
        eq = f" ({self.grows} grows)" if self.grows else ""
        return f"{self.agent}: {self.kind}{eq} fails {self.inclusion} at Y={fmt_bundle(self.y)} Z={fmt_bundle(self.z)}"


def _own(market: NtuMarket, agent: str) -> frozenset:
    own = market.contracts_of(agent)
    guard(f"condition check for {agent}", len(own), MAX_AGENT_CONTRACTS)
    return own


def _part(bundle: frozenset, side: str, market: NtuMarket) -> frozenset:
    if side == "L":
        return bundle & market.left_contracts
    if side == "R":
        return bundle & market.right_contracts
    return bundle


# (inclusion label) -> (left-hand choice, right-hand choice, projected side)
_INCLUSIONS = {
    "ch(Y)^R <= ch(Z)^R": ("Y", "Z", "R"),
    "ch(Z)^L <= ch(Y)^L": ("Z", "Y", "L"),
    "ch(Y)^L <= ch(Z)^L": ("Y", "Z", "L"),
    "ch(Z)^R <= ch(Y)^R": ("Z", "Y", "R"),
    "ch(Y) <= ch(Z)": ("Y", "Z", "*"),
}


def inclusion_holds(market: NtuMarket, agent: str, y: frozenset, z: frozenset, inclusion: str) -> bool:
    lhs_of, rhs_of, side = _INCLUSIONS[inclusion]
    pref = market.preferences[agent]
    chosen = {"Y": pref.choose(y), "Z": pref.choose(z)}
    return _part(chosen[lhs_of], side, market) <= _part(chosen[rhs_of], side, market)


def reproduces(market: NtuMarket, v: ConditionViolation) -> bool:
    """Re-evaluate a witness; True when the named failure shows up again."""
    if v.kind == PICK_ONE_SIDE:
        pref = market.preferences[v.agent]
        return (
            pref.prefers(v.y, EMPTY)
            and not v.y <= market.left_contracts
            and not v.y <= market.right_contracts
        )
    return not inclusion_holds(market, v.agent, v.y, v.z, v.inclusion)


def check_complementarity(market: NtuMarket, agent: str) -> Optional[ConditionViolation]:
    """``Ch(Y) <= Ch(Y')`` whenever ``Y <= Y'``; None when it holds.

    The returned witness is minimal by ``|Y'|``, then ``|Y|``, then ids.
    """
    own = _own(market, agent)
    pref = market.preferences[agent]
    for bigger in subsets(own):
        ch_big = pref.choose(bigger)
        for smaller in subsets(bigger):
            if not pref.choose(smaller) <= ch_big:
                return ConditionViolation(agent, COMPLEMENTARITY, smaller, bigger, "ch(Y) <= ch(Z)", "all")
    return None


def check_same_side_cross_side(
    market: NtuMarket, agent: str, variant: str = FULL
) -> Optional[ConditionViolation]:
    """Same-side complementarity and cross-side substitutability of a central agent.

    Pairs with equal left parts and nested right parts are checked first
    (expansion on the right, contraction on the left), then the mirror pairs.
    ``variant`` restricts the check to the expansion (``"same-side"``) or the
    contraction (``"cross-side"``) inclusions.
    """
    if market.agents.get(agent) is not Side.CENTER:
        if agent not in market.agents:
            raise InputError(f"unknown agent {agent!r}")
        raise InputError(f"agent {agent} is not a central agent")
    if variant not in (FULL, SAME_SIDE_ONLY, CROSS_SIDE_ONLY):
        raise InputError(f"unknown variant {variant!r}")
    own = _own(market, agent)
    pref = market.preferences[agent]
    left, right = own & market.left_contracts, own & market.right_contracts
    checks = [
        # (growing wing, growing set, fixed set, same-side inclusion, cross-side inclusion)
        ("right", right, left, "ch(Y)^R <= ch(Z)^R", "ch(Z)^L <= ch(Y)^L"),
        ("left", left, right, "ch(Y)^L <= ch(Z)^L", "ch(Z)^R <= ch(Y)^R"),
    ]
    for grows, growing, fixed, same_inc, cross_inc in checks:
        wanted = []
        if variant in (FULL, SAME_SIDE_ONLY):
            wanted.append((same_inc, SAME_SIDE))
        if variant in (FULL, CROSS_SIDE_ONLY):
            wanted.append((cross_inc, CROSS_SIDE))
        for base in subsets(fixed):
            for big in subsets(growing):
                z = base | big
                ch_z = pref.choose(z)
                for small in subsets(big):
                    y = base | small
                    ch_y = pref.choose(y)
                    for inc, kind in wanted:
                        lhs_of, rhs_of, side = _INCLUSIONS[inc]
                        pick = {"Y": ch_y, "Z": ch_z}
                        if not _part(pick[lhs_of], side, market) <= _part(pick[rhs_of], side, market):
                            return ConditionViolation(agent, kind, y, z, inc, grows)
    return None


def check_pick_one_side(market: NtuMarket, agent: str) -> Optional[ConditionViolation]:
    """Every bundle ranked above the empty bundle lies on a single wing."""
    if market.agents.get(agent) is not Side.CENTER:
        if agent not in market.agents:
            raise InputError(f"unknown agent {agent!r}")
        raise InputError(f"agent {agent} is not a central agent")
    for b in market.preferences[agent].acceptable():
        if not (b <= market.left_contracts or b <= market.right_contracts):
            return ConditionViolation(agent, PICK_ONE_SIDE, b, EMPTY, "Y <= X^L or Y <= X^R")
    return None


@dataclass
class ValidationReport:
    profile: str
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        if self.ok:
            return [f"profile={self.profile} ok"]
        return [f"profile={self.profile} violations={len(self.violations)}"] + [
            "violation " + v.describe() for v in self.violations
        ]


PROFILES = ("full", "pick-one-side")


def validate_market(market: NtuMarket, profile: str = "full") -> ValidationReport:
    """Check the conditions under which stable outcomes exist (``full``) or the two stability notions agree (``pick-one-side``).

    ``full``: complementarity for side agents, same-side complementarity and
    cross-side substitutability for central agents.
    ``pick-one-side``: complementarity for side agents, same-side
    complementarity alone plus pick-one-side for central agents.
    """
    if profile not in PROFILES:
        raise InputError(f"unknown profile {profile!r}")
    if not market.tiered:
        raise InputError("condition profiles need a tiered market")
    report = ValidationReport(profile)
    for agent in sorted(market.agents):
        if market.agents[agent] is Side.CENTER:
            if profile == "full":
                found = [check_same_side_cross_side(market, agent, FULL)]
            else:
                found = [
                    check_same_side_cross_side(market, agent, SAME_SIDE_ONLY),
                    check_pick_one_side(market, agent),
                ]
        else:
            found = [check_complementarity(market, agent)]
        report.violations.extend(v for v in found if v is not None)
    return report
