"""Competitive equilibria and the exact blocking oracle for TU markets.

Equilibria are searched welfare-first: transfers cancel, so any equilibrium
allocation maximizes total value, and each maximizer is tried in canonical
order until one admits supporting prices.  Blocks are searched over sets of
re-signed primitives with block prices solved exactly by ``lp_feasible``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Optional

from twoside.errors import InputError, guard
from twoside.lp import LinearSystem, lp_feasible
from twoside.ntu import bundle_key, fmt_bundle, nonempty_subsets, subsets
from twoside.tu import (
    NEG_INF,
    EquilibriumCertificate,
    PriceVector,
    TuMarket,
    certify,
    check_full_complementarity,
    fmt_outcome,
    map_equilibrium,
    transform_market,
    utility,
)

MAX_WELFARE = 16
MAX_BLOCK = 8

DIRECT = "direct"
TRANSFORM = "transform"


class SolverDefect(RuntimeError):
    """No equilibrium found although the market passes full complementarity."""


def maximize_welfare(market: TuMarket) -> tuple[Fraction, list]:
    """Optimal total value and every allocation attaining it, canonically ordered."""
    omega = sorted(market.omega)
    guard("welfare enumeration over primitives", len(omega), MAX_WELFARE)
    bit = {w: 1 << k for k, w in enumerate(omega)}
    # per agent: map global mask -> local mask through the agent's own bits
    parts = []
    for agent in sorted(market.agents):
        v = market.valuations[agent]
        parts.append((v.table, [(bit[w], 1 << k) for k, w in enumerate(v.domain)]))
    totals = []
    for mask in range(1 << len(omega)):
        total = Fraction(0)
        for table, bits in parts:
            local = 0
            for gb, lb in bits:
                if mask & gb:
                    local |= lb
            total += table[local]
        totals.append(total)
    best = max(totals)
    winners = [
        frozenset(w for w in omega if m & bit[w]) for m in range(len(totals)) if totals[m] == best
    ]
    return best, sorted(winners, key=bundle_key)


def support_prices(
    market: TuMarket, allocation: Iterable[str], fixed: Optional[Mapping[str, Fraction]] = None
) -> Optional[PriceVector]:
    """Prices at which every agent demands its part of ``allocation``.

    ``fixed`` pins some transfers (used to ask whether an outcome is
    supported at its own prices).
    """
    phi = market.check_primitives(allocation)
    omega = sorted(market.omega)
    system = LinearSystem(tuple(omega))
    for w, t in (fixed or {}).items():
        if w not in market.omega:
            raise InputError(f"unknown primitive {w!r}")
        system.add({w: 1}, -Fraction(t))
        system.add({w: -1}, Fraction(t))
    for agent in sorted(market.agents):
        v = market.valuations[agent]
        own = phi & market.primitives_of(agent)
        base = v(own)
        for s in subsets(v.domain):
            if s == own:
                continue
            # v(own) - p(own) >= v(s) - p(s)
            coeffs: dict = {}
            for w in own - s:
                coeffs[w] = coeffs.get(w, 0) - market.sign(w, agent)
            for w in s - own:
                coeffs[w] = coeffs.get(w, 0) + market.sign(w, agent)
            system.add(coeffs, base - v(s))
    point = lp_feasible(system)
    if point is None:
        return None
    return PriceVector({w: point[w] for w in omega})


def _direct(market: TuMarket) -> Optional[EquilibriumCertificate]:
    _, winners = maximize_welfare(market)
    for phi in winners:
        prices = support_prices(market, phi)
        if prices is not None:
            cert = certify(market, phi, prices)
            if cert is None:
                raise SolverDefect(f"LP prices for {fmt_bundle(phi)} fail the demand re-check")
            return cert
    return None


def solve_equilibrium(market: TuMarket, route: str = DIRECT) -> Optional[EquilibriumCertificate]:
    """A verified competitive equilibrium, or None.

    ``direct`` searches the market itself; ``transform`` solves the flipped
    market and maps the result back.  None with a market that passes full
    complementarity raises ``SolverDefect``.
    """
    if route == DIRECT:
        cert = _direct(market)
    elif route == TRANSFORM:
        cert = None
        inner = _direct(transform_market(market))
        if inner is not None:
            mapped = map_equilibrium(market, inner.allocation, inner.prices)
            if not mapped.verified:
                raise SolverDefect("mapped equilibrium fails the re-check in the original market")
            cert = certify(market, mapped.allocation, mapped.prices)
    else:
        raise InputError(f"unknown route {route!r}")
    if cert is None and check_full_complementarity(market).ok:
        raise SolverDefect("no equilibrium found in a market passing full complementarity")
    return cert


# blocking


@dataclass(frozen=True)
class TuIrViolation:
    agent: str
    better: frozenset

    def line(self) -> str:
        return f"not-individually-rational agent={self.agent} better={fmt_outcome(self.better)}"


@dataclass(frozen=True)
class TuBlockCertificate:
    psi: frozenset
    chosen: Mapping[str, frozenset]  # agent -> A^i as (w, t) pairs
    prices: Mapping[str, Fraction]

    @property
    def blocker(self) -> frozenset:
        return frozenset((w, self.prices[w]) for w in self.psi)

    def line(self) -> str:
        return f"block Z={fmt_outcome(self.blocker)}"

    def lines(self) -> list[str]:
        out = [self.line()]
        for agent in sorted(self.chosen):
            out.append(f"  {agent} takes {fmt_outcome(self.chosen[agent])}")
        return out


@dataclass(frozen=True)
class TuVerdict:
    stable: bool
    witness: object = None

    def line(self) -> str:
        return "stable" if self.stable else self.witness.line()


def check_tu_outcome(market: TuMarket, outcome: Iterable[tuple]) -> frozenset:
    y = frozenset((w, Fraction(t)) for w, t in outcome)
    prims = [w for w, _ in y]
    if len(set(prims)) != len(prims):
        raise InputError("an outcome signs each primitive at most once")
    market.check_primitives(prims)
    return y


def _own(market: TuMarket, y: frozenset, agent: str) -> frozenset:
    own = market.primitives_of(agent)
    return frozenset(c for c in y if c[0] in own)


def tu_ir_violation(market: TuMarket, outcome: Iterable[tuple]) -> Optional[TuIrViolation]:
    """First agent (by id) strictly preferring some subset of its contracts."""
    y = check_tu_outcome(market, outcome)
    for agent in sorted(market.agents):
        held = _own(market, y, agent)
        u = utility(market, agent, held)
        for s in subsets(held):
            if utility(market, agent, s) > u:
                return TuIrViolation(agent, s)
    return None


def _agent_rows(market: TuMarket, agent: str, psi_i: frozenset, kept: frozenset, held: frozenset, u_y: Fraction):
    """Constraints making ``A = Z_i + kept`` optimal in ``Y_i + Z_i`` and strictly better than ``Y_i``.

    Returns ``(rows, surplus)`` where rows are ``(coeffs, const, strict)`` and
    ``surplus`` is the constant part of the strict row.
    """
    v = market.valuations[agent]
    sign = {w: market.sign(w, agent) for w in psi_i}
    kept_prims = frozenset(w for w, _ in kept)
    kept_pay = sum((market.sign(w, agent) * t for w, t in kept), Fraction(0))
    base = v(psi_i | kept_prims) - kept_pay
    rows = []
    surplus = base - u_y
    rows.append(({w: -sign[w] for w in psi_i}, surplus, True))
    # u(A) >= u(S) for S = Z' + K', Z' <= Z_i, K' <= Y_i on other primitives;
    # for each Z' keep the best K' (coefficients depend on Z' only)
    for z_part in subsets(psi_i):
        best = None
        for k in subsets(held):
            k_prims = frozenset(w for w, _ in k)
            if k_prims & z_part:
                continue
            val = v(z_part | k_prims) - sum((market.sign(w, agent) * t for w, t in k), Fraction(0))
            if best is None or val > best:
                best = val
        if z_part == psi_i and best == base:
            continue
        coeffs = {w: -sign[w] for w in psi_i - z_part}
        rows.append((coeffs, base - best, False))
    return rows, surplus


def find_tu_block(market: TuMarket, outcome: Iterable[tuple]) -> Optional[TuBlockCertificate]:
    """First blocking set in canonical order of the re-signed primitives ``Psi``.

    For each ``Psi`` every participant picks which old contracts on other
    primitives it keeps; a combination is solved only if the summed surplus
    (transfers cancel) is positive and each agent's own system is feasible.
    """
    y = check_tu_outcome(market, outcome)
    omega = sorted(market.omega)
    guard("TU block search over primitives", len(omega), MAX_BLOCK)
    utilities = {a: utility(market, a, _own(market, y, a)) for a in market.agents}
    for psi in nonempty_subsets(omega):
        agents = sorted({p for w in psi for p in market.primitives[w].participants})
        options = []
        for agent in agents:
            psi_i = psi & market.primitives_of(agent)
            held = _own(market, y, agent)
            old = frozenset(c for c in held if c[0] not in psi)
            opts = []
            for kept in subsets(old):
                rows, surplus = _agent_rows(market, agent, psi_i, kept, held, utilities[agent])
                opts.append((kept, rows, surplus))
            options.append(opts)
        if sum(max(o[2] for o in opts) for opts in options) <= 0:
            continue
        filtered = []
        for agent, opts in zip(agents, options):
            keep = []
            for kept, rows, surplus in opts:
                local = sorted(psi & market.primitives_of(agent))
                system = LinearSystem(tuple(local))
                for coeffs, const, strict in rows:
                    system.add(coeffs, const, strict)
                if lp_feasible(system) is not None:
                    keep.append((kept, rows, surplus))
            filtered.append(keep)
        if any(not f for f in filtered):
            continue
        if sum(max(o[2] for o in f) for f in filtered) <= 0:
            continue
        for combo in product(*filtered):
            if sum(o[2] for o in combo) <= 0:
                continue
            system = LinearSystem(tuple(sorted(psi)))
            for _, rows, _ in combo:
                for coeffs, const, strict in rows:
                    system.add(coeffs, const, strict)
            point = lp_feasible(system)
            if point is None:
                continue
            prices = {w: point[w] for w in sorted(psi)}
            chosen = {
                agent: frozenset(kept) | frozenset((w, prices[w]) for w in psi & market.primitives_of(agent))
                for agent, (kept, _, _) in zip(agents, combo)
            }
            cert = TuBlockCertificate(frozenset(psi), chosen, prices)
            if not verify_tu_block(market, y, cert):
                raise SolverDefect(f"block certificate for Psi={fmt_bundle(psi)} fails re-verification")
            return cert
    return None


def verify_tu_block(market: TuMarket, outcome: Iterable[tuple], cert: TuBlockCertificate) -> bool:
    """Re-check a block certificate by enumerating every participant's options."""
    y = check_tu_outcome(market, outcome)
    z = cert.blocker
    if not z or z & y:
        return False
    union = y | z
    for agent in sorted({p for w in cert.psi for p in market.primitives[w].participants}):
        a = cert.chosen.get(agent)
        if a is None:
            return False
        z_i = _own(market, z, agent)
        if not z_i <= a <= _own(market, union, agent):
            return False
        u_a = utility(market, agent, a)
        if u_a == NEG_INF or u_a <= utility(market, agent, _own(market, y, agent)):
            return False
        for s in subsets(_own(market, union, agent)):
            if utility(market, agent, s) > u_a:
                return False
    return True


def is_tu_stable(market: TuMarket, outcome: Iterable[tuple]) -> TuVerdict:
    bad = tu_ir_violation(market, outcome)
    if bad is not None:
        return TuVerdict(False, bad)
    cert = find_tu_block(market, outcome)
    return TuVerdict(cert is None, cert)
