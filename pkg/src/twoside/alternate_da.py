"""Alternate deferred acceptance over the two wings of an NTU market.

Each stage runs a one-sided DA on the start wing (start-side and central
agents repeatedly reject from the available start-wing contracts) followed by
a DA on the other wing, where the other wing restarts from all of its
contracts, the start-wing set is held fixed, and only other-wing rejections
are removed between steps.  Start-wing contracts rejected at the last step of
the second phase are dropped before the next stage.

First-phase rejections come from start-side and central agents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from twoside.errors import InputError
from twoside.ntu import EMPTY, NtuMarket, Side, fmt_bundle, subsets

ORIGINAL = "original"
MODIFIED = "modified"

# exit rules for the second phase
SETTLE = "settle"
EARLY = "early"


@dataclass(frozen=True)
class DaConfig:
    """``exit_rule`` decides when the second phase ends.

    ``settle`` (default) runs until a step rejects no other-wing contract,
    even if that step sees an empty other wing.  ``early`` also stops as soon
    as the rejections empty the other wing; start-wing rejections recorded at
    that step were made against contracts that are gone, and the output can
    be unstable even when every condition holds.
    """

    start_side: Side = Side.LEFT
    variant: str = ORIGINAL
    exit_rule: str = SETTLE

    def __post_init__(self):
        side = Side(self.start_side)
        if side is Side.CENTER:
            raise InputError("start side must be left or right")
        if self.variant not in (ORIGINAL, MODIFIED):
            raise InputError(f"unknown variant {self.variant!r}")
        if self.exit_rule not in (SETTLE, EARLY):
            raise InputError(f"unknown exit rule {self.exit_rule!r}")
        object.__setattr__(self, "start_side", side)


@dataclass(frozen=True)
class Step:
    stage: int
    wing: Side
    index: int
    available: frozenset
    rejected: frozenset

    def line(self) -> str:
        return (
            f"stage={self.stage} phase={self.wing.value[0].upper()} step={self.index} "
            f"avail={fmt_bundle(self.available)} rejected={fmt_bundle(self.rejected)}"
        )


@dataclass(frozen=True)
class StageRecord:
    """One stage. ``a_*`` sets live on the start wing, ``d_*`` on the other."""

    stage: int
    a_init: frozenset
    first_steps: tuple
    a_final: frozenset
    second_steps: tuple = ()
    d_final: Optional[frozenset] = None
    a_next: Optional[frozenset] = None

    @property
    def has_second_phase(self) -> bool:
        return self.d_final is not None


@dataclass(frozen=True)
class AlgorithmTrace:
    start_side: Side
    variant: str
    stages: tuple
    terminated_wing: Side
    terminated_stage: int
    output: frozenset

    @property
    def steps(self) -> list:
        out = []
        for st in self.stages:
            out.extend(st.first_steps)
            out.extend(st.second_steps)
        return out

    def to_text(self) -> str:
        lines = [s.line() for s in self.steps]
        lines.append(
            f"output={fmt_bundle(self.output)} terminated={self.terminated_wing.value}@{self.terminated_stage}"
        )
        return "\n".join(lines) + "\n"


def _wing_sets(market: NtuMarket, start: Side) -> tuple[frozenset, frozenset]:
    if start is Side.LEFT:
        return market.left_contracts, market.right_contracts
    return market.right_contracts, market.left_contracts


def _rejections(market: NtuMarket, agents: Iterable[str], available: frozenset) -> frozenset:
    out: set = set()
    for a in agents:
        held = available & market.contracts_of(a)
        if held:
            out |= held - market.preferences[a].choose(held)
    return frozenset(out)


def _require_tiered(market: NtuMarket) -> None:
    if not market.tiered:
        raise InputError("alternate DA needs a tiered market")


def left_phase(
    market: NtuMarket, a_init: Iterable[str], start_side: Side = Side.LEFT, stage: int = 1
) -> tuple[frozenset, tuple]:
    """One-sided DA of the start wing.

    Returns the surviving set and every step, including a final step with
    no rejections when the phase ends that way.
    """
    _require_tiered(market)
    start_wing, _ = _wing_sets(market, start_side)
    avail = market.check_bundle(a_init)
    if not avail <= start_wing:
        raise InputError(f"{fmt_bundle(avail - start_wing)} not on the {start_side.value} wing")
    agents = market.agents_on(start_side) + market.agents_on(Side.CENTER)
    steps = []
    index = 1
    while True:
        rejected = _rejections(market, agents, avail)
        steps.append(Step(stage, start_side, index, avail, rejected))
        rest = avail - rejected
        if rejected and rest:
            avail = rest
            index += 1
            continue
        return rest, tuple(steps)


def right_phase(
    market: NtuMarket,
    a_k: Iterable[str],
    start_side: Side = Side.LEFT,
    stage: int = 1,
    exit_rule: str = SETTLE,
) -> tuple[frozenset, frozenset, bool, tuple]:
    """DA on the other wing with the start-wing set ``a_k`` held fixed.

    Returns ``(D^k, A^{k+1(1)}, start_wing_rejected, steps)``.
    """
    _require_tiered(market)
    start_wing, other_wing = _wing_sets(market, start_side)
    held = market.check_bundle(a_k)
    if not held <= start_wing:
        raise InputError(f"{fmt_bundle(held - start_wing)} not on the {start_side.value} wing")
    other = start_side.mirror
    agents = market.agents_on(Side.CENTER) + market.agents_on(other)
    d = other_wing
    steps = []
    index = 1
    while True:
        avail = held | d
        rejected = _rejections(market, agents, avail)
        steps.append(Step(stage, other, index, avail, rejected))
        rest = d - rejected
        if rejected & other_wing and (rest or exit_rule == SETTLE):
            d = rest
            index += 1
            continue
        return rest, held - rejected, bool(rejected & start_wing), tuple(steps)


def run(market: NtuMarket, config: Optional[DaConfig] = None) -> tuple[frozenset, AlgorithmTrace]:
    """Run alternate DA and return the outcome with its full trace.

    The run never refuses a market whose preferences violate the conditions;
    termination only relies on the start-wing set shrinking between stages.
    """
    cfg = config or DaConfig()
    _require_tiered(market)
    start = cfg.start_side
    start_wing, _ = _wing_sets(market, start)
    a_init = start_wing
    prev_d: Optional[frozenset] = None
    stages = []
    stage = 1
    while True:
        a_k, first = left_phase(market, a_init, start, stage)
        if cfg.variant == ORIGINAL and stage >= 2 and a_k == a_init:
            stages.append(StageRecord(stage, a_init, first, a_k))
            out = a_k | prev_d
            return out, AlgorithmTrace(start, cfg.variant, tuple(stages), start, stage, out)
        d_k, a_next, start_rejected, second = right_phase(market, a_k, start, stage, cfg.exit_rule)
        stages.append(StageRecord(stage, a_init, first, a_k, second, d_k, a_next))
        if not start_rejected:
            out = a_k | d_k
            return out, AlgorithmTrace(start, cfg.variant, tuple(stages), start.mirror, stage, out)
        a_init, prev_d = a_next, d_k
        stage += 1


def variants_agree(market: NtuMarket, start_side: Side = Side.LEFT) -> bool:
    """Original and modified runs produce the same outcome."""
    a, _ = run(market, DaConfig(start_side, ORIGINAL))
    b, _ = run(market, DaConfig(start_side, MODIFIED))
    return a == b


@dataclass
class InvariantReport:
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_trace_invariants(
    market: NtuMarket, trace: AlgorithmTrace, conditions_hold: bool = False
) -> InvariantReport:
    """Structural trace invariants, plus the condition-dependent ones.

    Always checked: step chaining inside each phase, the other wing
    restarting from all its contracts, and the shrinking start-wing chain.
    With ``conditions_hold`` (the market passes the full profile) the
    expanding other-wing chain and both largest-set properties are checked
    by enumeration as well.
    """
    rep = InvariantReport()
    fail = rep.failures.append
    start = trace.start_side
    start_wing, other_wing = _wing_sets(market, start)
    first_agents = market.agents_on(start) + market.agents_on(Side.CENTER)
    second_agents = market.agents_on(Side.CENTER) + market.agents_on(start.mirror)

    if trace.stages[0].a_init != start_wing:
        fail("stage 1 does not start from the whole start wing")
    chain = []
    for st in trace.stages:
        steps = st.first_steps
        if steps[0].available != st.a_init:
            fail(f"stage {st.stage}: first step does not start from the stage's start-wing set")
        for prev, nxt in zip(steps, steps[1:]):
            if nxt.available != prev.available - prev.rejected:
                fail(f"stage {st.stage}: a first-phase step is not the previous one minus its rejections")
        if st.a_final != steps[-1].available - steps[-1].rejected:
            fail(f"stage {st.stage}: the first-phase result does not match its last step")
        chain += [st.a_init, st.a_final]
        if st.has_second_phase:
            d_steps = st.second_steps
            if d_steps[0].available != st.a_final | other_wing:
                fail(f"stage {st.stage}: the second phase does not restart from the whole other wing")
            for prev, nxt in zip(d_steps, d_steps[1:]):
                if nxt.available - st.a_final != (prev.available - st.a_final) - prev.rejected:
                    fail(f"stage {st.stage}: a second-phase step is not the previous one minus its rejections")
            last = d_steps[-1]
            if st.d_final != (last.available - st.a_final) - last.rejected:
                fail(f"stage {st.stage}: the second-phase result does not match its last step")
            if st.a_next != st.a_final - last.rejected:
                fail(f"stage {st.stage}: the carried start-wing set does not match the last step")
    for bigger, smaller in zip(chain, chain[1:]):
        if not smaller <= bigger:
            fail("start-wing chain is not shrinking")
            break
    with_second = [st for st in trace.stages if st.has_second_phase]
    # the next stage's initial set must be the previous A^(k+1(1))
    for st, nxt in zip(trace.stages, trace.stages[1:]):
        if st.a_next != nxt.a_init:
            fail(f"stage {nxt.stage}: the start-wing set differs from the previous stage's carry-over")

    if conditions_hold:
        for st, nxt in zip(with_second, with_second[1:]):
            if not st.d_final <= nxt.d_final:
                fail(f"other-wing result of stage {st.stage} is not contained in that of stage {nxt.stage}")
        for st in trace.stages:
            for y in subsets(st.a_init):
                if all(market.choose(i, y) == y & market.contracts_of(i) for i in first_agents):
                    if not y <= st.a_final:
                        fail(f"stage {st.stage}: IR set {fmt_bundle(y)} escapes the first-phase result")
                        break
            if st.has_second_phase:
                for y in subsets(other_wing):
                    avail = st.a_final | y
                    if all(y & market.contracts_of(i) <= market.choose(i, avail) for i in second_agents):
                        if not y <= st.d_final:
                            fail(f"stage {st.stage}: chosen set {fmt_bundle(y)} escapes the second-phase result")
                            break
    return rep


__all__ = [
    "AlgorithmTrace",
    "DaConfig",
    "EMPTY",
    "InvariantReport",
    "MODIFIED",
    "ORIGINAL",
    "EARLY",
    "SETTLE",
    "StageRecord",
    "Step",
    "check_trace_invariants",
    "left_phase",
    "right_phase",
    "run",
    "variants_agree",
]
