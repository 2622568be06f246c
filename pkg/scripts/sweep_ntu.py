"""Sweep generated NTU markets: alternate DA output against the stability oracle.

    python3 scripts/sweep_ntu.py --count 1000 --family complementary-ntu
"""

import argparse
import time
from collections import Counter
from dataclasses import dataclass

from twoside.alternate_da import EARLY, MODIFIED, ORIGINAL, SETTLE, DaConfig, check_trace_invariants, run
from twoside.conditions import validate_market
from twoside.generate import COMPLEMENTARY_NTU, PICK_ONE_SIDE_NTU, UNCONSTRAINED, GenProfile, gen
from twoside.ntu import Side
from twoside.stability import is_stable


@dataclass(frozen=True)
class SweepConfig:
    family: str = COMPLEMENTARY_NTU
    count: int = 500
    start: int = 0
    n_contracts: int = 6
    exit_rule: str = SETTLE


def sweep(cfg: SweepConfig) -> Counter:
    tally: Counter = Counter()
    for seed in range(cfg.start, cfg.start + cfg.count):
        market = gen(GenProfile(seed=seed, family=cfg.family, n_contracts=cfg.n_contracts))
        valid = validate_market(market, "full").ok
        tally["valid" if valid else "invalid"] += 1
        for side in (Side.LEFT, Side.RIGHT):
            outcome, trace = run(market, DaConfig(side, ORIGINAL, cfg.exit_rule))
            tally[f"stages={len(trace.stages)}"] += 1
            stable = is_stable(market, outcome).stable
            tally["stable" if stable else ("unstable-valid" if valid else "unstable-invalid")] += 1
            if run(market, DaConfig(side, MODIFIED, cfg.exit_rule))[0] != outcome:
                tally["variants-differ"] += 1
            if not check_trace_invariants(market, trace, conditions_hold=valid).ok:
                tally["invariant-failures"] += 1
    return tally


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--family", choices=[COMPLEMENTARY_NTU, PICK_ONE_SIDE_NTU, UNCONSTRAINED], default=COMPLEMENTARY_NTU)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--n-contracts", type=int, default=6)
    p.add_argument("--exit-rule", choices=[SETTLE, EARLY], default=SETTLE)
    a = p.parse_args()
    cfg = SweepConfig(a.family, a.count, a.start, a.n_contracts, a.exit_rule)
    t0 = time.perf_counter()
    tally = sweep(cfg)
    for key in sorted(tally):
        print(f"{key} {tally[key]}")
    print(f"seconds {time.perf_counter() - t0:.2f}")


if __name__ == "__main__":
    main()
