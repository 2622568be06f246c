"""Exhaustive stability and setwise-stability oracles for NTU markets.

Candidate blockers are enumerated by cardinality and then lexicographically
on sorted ids, so the first certificate returned is deterministic.  The
setwise search quantifies individual rationality of the renegotiated outcome
over the participants of the blocker only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from twoside.conditions import check_pick_one_side, validate_market
from twoside.errors import InputError, guard
from twoside.ntu import NtuMarket, Side, fmt_bundle, is_individually_rational, nonempty_subsets, subsets

MAX_BLOCK_SEARCH = 20
MAX_SETWISE = 12
MAX_ENUMERATE = 12


@dataclass(frozen=True)
class BlockCertificate:
    blocker: frozenset

    def line(self) -> str:
        return f"block Z={fmt_bundle(self.blocker)}"


@dataclass(frozen=True)
class SetwiseBlockCertificate:
    blocker: frozenset
    renegotiated: frozenset

    def line(self) -> str:
        return f"setwise-block Z={fmt_bundle(self.blocker)} Y*={fmt_bundle(self.renegotiated)}"


@dataclass(frozen=True)
class IrViolation:
    agent: str
    held: frozenset
    chosen: frozenset

    def line(self) -> str:
        return f"not-individually-rational agent={self.agent} held={fmt_bundle(self.held)} choice={fmt_bundle(self.chosen)}"


@dataclass(frozen=True)
class Verdict:
    """``stable`` plus the witness of the failed clause (None when stable)."""

    stable: bool
    witness: object = None

    def line(self) -> str:
        return "stable" if self.stable else self.witness.line()


def blocks(market: NtuMarket, outcome: frozenset, z: frozenset) -> bool:
    """``Z_i <= Ch_i(Y u Z)`` for every participant of a nonempty ``Z`` outside ``Y``."""
    if not z or z & outcome:
        return False
    union = outcome | z
    for i in market.neighbours(z):
        if not z & market.contracts_of(i) <= market.choose(i, union):
            return False
    return True


def setwise_renegotiation(market: NtuMarket, outcome: frozenset, z: frozenset) -> Optional[frozenset]:
    """First ``Y*`` with ``Z <= Y* <= Y u Z`` making ``Z`` a setwise block."""
    if not z or z & outcome:
        return None
    participants = sorted(market.neighbours(z))
    for extra in subsets(outcome):
        y_star = z | extra
        if _setwise_ok(market, outcome, y_star, participants):
            return y_star
    return None


def _setwise_ok(market: NtuMarket, outcome: frozenset, y_star: frozenset, participants) -> bool:
    for i in participants:
        own = market.contracts_of(i)
        new, old = y_star & own, outcome & own
        pref = market.preferences[i]
        if pref.choose(new) != new or not pref.prefers(new, old):
            return False
    return True


def find_block(market: NtuMarket, outcome: Iterable[str]) -> Optional[BlockCertificate]:
    y = market.check_bundle(outcome)
    free = market.all_contracts - y
    guard("block search over X \\ Y", len(free), MAX_BLOCK_SEARCH)
    for z in nonempty_subsets(free):
        if blocks(market, y, z):
            return BlockCertificate(z)
    return None


def find_setwise_block(market: NtuMarket, outcome: Iterable[str]) -> Optional[SetwiseBlockCertificate]:
    y = market.check_bundle(outcome)
    guard("setwise block search over X", len(market.all_contracts), MAX_SETWISE)
    for z in nonempty_subsets(market.all_contracts - y):
        y_star = setwise_renegotiation(market, y, z)
        if y_star is not None:
            return SetwiseBlockCertificate(z, y_star)
    return None


def _ir_verdict(market: NtuMarket, y: frozenset) -> Optional[Verdict]:
    ok, agent = is_individually_rational(market, y)
    if ok:
        return None
    held = y & market.contracts_of(agent)
    return Verdict(False, IrViolation(agent, held, market.choose(agent, held)))


def is_stable(market: NtuMarket, outcome: Iterable[str]) -> Verdict:
    y = market.check_bundle(outcome)
    bad = _ir_verdict(market, y)
    if bad is not None:
        return bad
    cert = find_block(market, y)
    return Verdict(cert is None, cert)


def is_setwise_stable(market: NtuMarket, outcome: Iterable[str]) -> Verdict:
    y = market.check_bundle(outcome)
    bad = _ir_verdict(market, y)
    if bad is not None:
        return bad
    cert = find_setwise_block(market, y)
    return Verdict(cert is None, cert)


def verify_certificate(market: NtuMarket, outcome: Iterable[str], cert) -> bool:
    """Re-check a certificate against the choice primitives alone."""
    y = market.check_bundle(outcome)
    if isinstance(cert, BlockCertificate):
        return blocks(market, y, cert.blocker)
    if isinstance(cert, SetwiseBlockCertificate):
        z, y_star = cert.blocker, cert.renegotiated
        if not z or z & y or not (z <= y_star <= y | z):
            return False
        return _setwise_ok(market, y, y_star, sorted(market.neighbours(z)))
    if isinstance(cert, IrViolation):
        held = y & market.contracts_of(cert.agent)
        return held == cert.held and market.choose(cert.agent, held) != held
    raise TypeError(f"not a certificate: {cert!r}")


STABLE = "stable"
SETWISE = "setwise"


def enumerate_stable(market: NtuMarket, mode: str = STABLE) -> list[frozenset]:
    """Every outcome passing the chosen oracle, in canonical order."""
    if mode not in (STABLE, SETWISE):
        raise InputError(f"unknown mode {mode!r}")
    guard("stable-set enumeration", len(market.all_contracts), MAX_ENUMERATE)
    oracle = is_stable if mode == STABLE else is_setwise_stable
    return [y for y in subsets(market.all_contracts) if oracle(market, y).stable]


@dataclass
class NotionComparison:
    stable: list
    setwise: list
    discrepancies: list = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return not self.discrepancies


def compare_stability_notions(market: NtuMarket) -> NotionComparison:
    """Stable and setwise-stable sets coincide under pick-one-side.

    Raises InputError naming the first failing agent when the market misses
    the hypotheses (same-side complementarity and pick-one-side).
    """
    report = validate_market(market, "pick-one-side")
    if not report.ok:
        v = report.violations[0]
        raise InputError(f"pick-one-side profile fails at {v.agent}: {v.describe()}")
    st = enumerate_stable(market, STABLE)
    sw = enumerate_stable(market, SETWISE)
    out = NotionComparison(st, sw)
    for y in sorted(set(st) ^ set(sw), key=lambda b: (len(b), sorted(b))):
        out.discrepancies.append((y, is_stable(market, y), is_setwise_stable(market, y)))
    return out


@dataclass
class ProjectionReport:
    left_ok: Optional[bool]
    right_ok: Optional[bool]

    @property
    def ok(self) -> bool:
        return self.left_ok is not False and self.right_ok is not False


def check_one_wing_projections(market: NtuMarket, outcome: Iterable[str], z: Iterable[str], setwise: bool = False) -> ProjectionReport:
    """Each one-wing projection of a (setwise) blocker blocks on its own.

    ``None`` in the report marks an empty projection (nothing to check).
    """
    y = market.check_bundle(outcome)
    zz = market.check_bundle(z)
    for a in market.agents_on(Side.CENTER):
        v = check_pick_one_side(market, a)
        if v is not None:
            raise InputError(f"pick-one-side fails at {a}")
    if setwise:
        holds = setwise_renegotiation(market, y, zz) is not None
    else:
        holds = blocks(market, y, zz)
    if not holds:
        raise InputError(f"{fmt_bundle(zz)} does not {'setwise ' if setwise else ''}block {fmt_bundle(y)}")
    zl, zr = market.side_split(zz)

    def check(part: frozenset) -> Optional[bool]:
        if not part:
            return None
        if setwise:
            return setwise_renegotiation(market, y, part) is not None
        return blocks(market, y, part)

    return ProjectionReport(check(zl), check(zr))
