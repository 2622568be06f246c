"""Two organizations recruiting from a shared applicant pool.

Organizations rank subsets of applicants; applicants rank the organizations
they find acceptable (anything not listed ranks below staying unmatched).
The market embeds into the three-tier contract model with the first
organization on the left, the second on the right and every applicant in
the center, one contract per acceptable applicant-organization pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from twoside.alternate_da import DaConfig, run
from twoside.conditions import check_complementarity
from twoside.errors import InputError
from twoside.ntu import Contract, NtuMarket, RankedPreference, Side, fmt_bundle


def contract_id(applicant: str, org: str) -> str:
    return f"{applicant}@{org}"


@dataclass(frozen=True)
class OrgMarket:
    """Organizations, applicants and both sides' rankings.

    ``org_preferences[o]`` lists applicant subsets best first;
    ``applicant_preferences[a]`` lists acceptable organizations best first.
    More than two organizations are accepted only so that the three-org
    nonexistence fixture can be converted; the proposal procedure needs
    exactly two.
    """

    orgs: tuple
    applicants: tuple
    org_preferences: Mapping[str, RankedPreference]
    applicant_preferences: Mapping[str, tuple]

    def __post_init__(self):
        orgs = tuple(self.orgs)
        applicants = tuple(sorted(self.applicants))
        if len(orgs) < 2:
            raise InputError("an org market needs at least two organizations")
        if len(set(orgs)) != len(orgs):
            raise InputError("duplicate organization id")
        if len(set(applicants)) != len(applicants):
            raise InputError("duplicate applicant id")
        if set(orgs) & set(applicants):
            raise InputError(f"ids used as both org and applicant: {fmt_bundle(set(orgs) & set(applicants))}")
        org_prefs = dict(self.org_preferences)
        app_prefs = {a: tuple(v) for a, v in self.applicant_preferences.items()}
        for o in orgs:
            pref = org_prefs.setdefault(o, RankedPreference(o, ()))
            for b in pref.ranking:
                if not b <= set(applicants):
                    raise InputError(f"org {o}: unknown applicant(s) {fmt_bundle(b - set(applicants))}")
        for o in org_prefs:
            if o not in orgs:
                raise InputError(f"preference for unknown org {o!r}")
        for a in applicants:
            ranking = app_prefs.setdefault(a, ())
            if len(set(ranking)) != len(ranking):
                raise InputError(f"applicant {a}: ordering repeats an organization")
            for o in ranking:
                if o not in orgs:
                    raise InputError(f"applicant {a}: unknown org {o!r}")
        for a in app_prefs:
            if a not in applicants:
                raise InputError(f"preference for unknown applicant {a!r}")
        object.__setattr__(self, "orgs", orgs)
        object.__setattr__(self, "applicants", applicants)
        object.__setattr__(self, "org_preferences", org_prefs)
        object.__setattr__(self, "applicant_preferences", app_prefs)

    def acceptable(self, applicant: str, org: str) -> bool:
        return org in self.applicant_preferences[applicant]

    def prefers(self, applicant: str, a: Optional[str], b: Optional[str]) -> bool:
        """Strict preference of ``a`` over ``b`` (``None`` is unmatched)."""
        ranking = self.applicant_preferences[applicant]

        def pos(o):
            if o is None:
                return len(ranking)
            return ranking.index(o) if o in ranking else len(ranking) + 1

        return pos(a) < pos(b)

    def org_choose(self, org: str, available) -> frozenset:
        return self.org_preferences[org].choose(frozenset(available))


@dataclass(frozen=True)
class OrgMatching:
    assignment: Mapping[str, Optional[str]]

    def members(self, org: str) -> frozenset:
        return frozenset(a for a, o in self.assignment.items() if o == org)

    def unmatched(self) -> frozenset:
        return frozenset(a for a, o in self.assignment.items() if o is None)

    def lines(self, orgs) -> list[str]:
        out = [f"{o}={fmt_bundle(self.members(o))}" for o in orgs]
        out.append(f"unmatched={fmt_bundle(self.unmatched())}")
        return out


def to_contract_market(om: OrgMarket) -> NtuMarket:
    """Contract-market embedding.

    With two organizations the result is tiered (first org left, second org
    right).  With more it is untiered, which is enough for the stability
    oracles.  Org bundles naming an applicant who rejects the org can never
    become available and are dropped.
    """
    tiered = len(om.orgs) == 2
    agents: dict = {}
    contracts = {}
    for i, o in enumerate(om.orgs):
        agents[o] = (Side.LEFT if i == 0 else Side.RIGHT) if tiered else None
    for a in om.applicants:
        agents[a] = Side.CENTER if tiered else None
        for o in om.applicant_preferences[a]:
            cid = contract_id(a, o)
            if not tiered:
                contracts[cid] = Contract(cid, o, a, None)
            elif o == om.orgs[0]:
                contracts[cid] = Contract(cid, o, a, Side.LEFT)
            else:
                contracts[cid] = Contract(cid, a, o, Side.RIGHT)
    prefs = {}
    for o in om.orgs:
        ranking = []
        for b in om.org_preferences[o].ranking:
            if all(om.acceptable(a, o) for a in b):
                ranking.append(frozenset(contract_id(a, o) for a in b))
        prefs[o] = RankedPreference(o, tuple(ranking))
    for a in om.applicants:
        prefs[a] = RankedPreference(a, tuple(frozenset([contract_id(a, o)]) for o in om.applicant_preferences[a]))
    return NtuMarket(agents, contracts, prefs, tiered=tiered)


def matching_from_outcome(om: OrgMarket, outcome) -> OrgMatching:
    """Read an assignment off a contract outcome (applicants hold at most one)."""
    assignment: dict = {a: None for a in om.applicants}
    for a in om.applicants:
        held = [o for o in om.orgs if contract_id(a, o) in outcome]
        if len(held) > 1:
            raise InputError(f"applicant {a} holds contracts with {', '.join(held)}")
        if held:
            assignment[a] = held[0]
    return OrgMatching(assignment)


@dataclass(frozen=True)
class OrgStage:
    stage: int
    first_proposals: frozenset
    first_chosen: frozenset
    second_proposals: Optional[frozenset] = None
    second_chosen: Optional[frozenset] = None

    def lines(self, first: str, second: str) -> list[str]:
        out = [
            f"stage={self.stage} org={first} proposals={fmt_bundle(self.first_proposals)} "
            f"chosen={fmt_bundle(self.first_chosen)}"
        ]
        if self.second_proposals is not None:
            out.append(
                f"stage={self.stage} org={second} proposals={fmt_bundle(self.second_proposals)} "
                f"chosen={fmt_bundle(self.second_chosen)}"
            )
        return out


@dataclass(frozen=True)
class OrgTrace:
    first_org: str
    second_org: str
    stages: tuple
    matching: OrgMatching

    def to_text(self) -> str:
        lines = []
        for st in self.stages:
            lines.extend(st.lines(self.first_org, self.second_org))
        lines.extend(self.matching.lines([self.first_org, self.second_org]))
        return "\n".join(lines) + "\n"


def run_org_da(om: OrgMarket, first_org: Optional[str] = None) -> tuple[OrgMatching, OrgTrace]:
    """Proposal procedure alternating between the two organizations.

    Applicants who find ``first_org`` acceptable start out matched to it.
    Each stage the first org keeps its favourite subset of its members (the
    rest become unmatched); from stage 2 on, a stage with no such rejection
    ends the run.  Otherwise every applicant weakly preferring the second org
    to their current position proposes to it; those it chooses join it, its
    own rejected members become unmatched and other rejected proposers stay
    put.  The run ends when the second org's choice takes nobody away from
    the first org (membership read after the first org's choice).
    """
    if len(om.orgs) != 2:
        raise InputError(f"the proposal procedure needs exactly two organizations, got {len(om.orgs)}")
    first = om.orgs[0] if first_org is None else first_org
    if first not in om.orgs:
        raise InputError(f"unknown org {first!r}")
    second = om.orgs[1] if first == om.orgs[0] else om.orgs[0]
    position: dict = {a: (first if om.acceptable(a, first) else None) for a in om.applicants}
    stages = []
    stage = 1
    # each stage either ends the run or moves someone from the first org to
    # the second; nobody returns to the first org, so this bounds the loop
    while True:
        proposals = frozenset(a for a, o in position.items() if o == first)
        chosen = om.org_choose(first, proposals)
        for a in proposals - chosen:
            position[a] = None
        if stage >= 2 and chosen == proposals:
            stages.append(OrgStage(stage, proposals, chosen))
            break
        to_second = frozenset(
            a
            for a in om.applicants
            if om.acceptable(a, second) and not om.prefers(a, position[a], second)
        )
        taken = om.org_choose(second, to_second)
        stages.append(OrgStage(stage, proposals, chosen, to_second, taken))
        moved = frozenset(a for a in taken if position[a] == first)
        for a in to_second - taken:
            if position[a] == second:
                position[a] = None
        for a in taken:
            position[a] = second
        if not moved:
            break
        stage += 1
    matching = OrgMatching(dict(sorted(position.items())))
    return matching, OrgTrace(first, second, tuple(stages), matching)


@dataclass
class EquivalenceReport:
    """Per first org: the proposal-procedure matching and the contract-DA one."""

    rows: list = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return all(r[1].assignment == r[2].assignment for r in self.rows)

    def divergences(self) -> list:
        return [r for r in self.rows if r[1].assignment != r[2].assignment]


def org_da_equivalence(om: OrgMarket) -> EquivalenceReport:
    """Compare the proposal procedure with alternate DA on the embedding.

    Both organizations must have complementary choice after conversion.
    Rows are ``(first_org, org_matching, da_matching, org_trace, da_trace)``.
    """
    market = to_contract_market(om)
    for o in om.orgs:
        v = check_complementarity(market, o)
        if v is not None:
            raise InputError(f"org {o} is not complementary: {v.describe()}")
    report = EquivalenceReport()
    for o in om.orgs:
        org_match, org_trace = run_org_da(om, o)
        start = market.agents[o]
        outcome, da_trace = run(market, DaConfig(start_side=start))
        report.rows.append((o, org_match, matching_from_outcome(om, outcome), org_trace, da_trace))
    return report


def make_org_market(orgs, org_rankings: Mapping[str, list], applicant_rankings: Mapping[str, list]) -> OrgMarket:
    prefs = {o: RankedPreference(o, tuple(frozenset(b) for b in org_rankings.get(o, ()))) for o in orgs}
    return OrgMarket(tuple(orgs), tuple(applicant_rankings), prefs, dict(applicant_rankings))
