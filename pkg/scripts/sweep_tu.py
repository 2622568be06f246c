"""Sweep generated TU markets: equilibria on both routes and stability of the induced outcome.

    python3 scripts/sweep_tu.py --count 200 --n-contracts 5
"""

import argparse
import time
from collections import Counter
from dataclasses import dataclass

from twoside.generate import FULLY_COMPLEMENTARY_TU, GenProfile, gen
from twoside.tu import kappa
from twoside.tu_solver import DIRECT, TRANSFORM, is_tu_stable, solve_equilibrium


@dataclass(frozen=True)
class SweepConfig:
    count: int = 200
    start: int = 0
    n_contracts: int = 5


def sweep(cfg: SweepConfig) -> Counter:
    tally: Counter = Counter()
    for seed in range(cfg.start, cfg.start + cfg.count):
        market = gen(GenProfile(seed=seed, family=FULLY_COMPLEMENTARY_TU, n_contracts=cfg.n_contracts))
        direct = solve_equilibrium(market, DIRECT)
        via = solve_equilibrium(market, TRANSFORM)
        tally["direct-ok" if direct and direct.verify(market) else "direct-failed"] += 1
        tally["transform-ok" if via and via.verify(market) else "transform-failed"] += 1
        if direct and via and direct.allocation != via.allocation:
            tally["routes-pick-different-allocations"] += 1
        if direct:
            stable = is_tu_stable(market, kappa(direct.allocation, direct.prices)).stable
            tally["outcome-stable" if stable else "outcome-blocked"] += 1
            tally["empty-allocation" if not direct.allocation else "nonempty-allocation"] += 1
    return tally


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--n-contracts", type=int, default=5)
    a = p.parse_args()
    t0 = time.perf_counter()
    tally = sweep(SweepConfig(a.count, a.start, a.n_contracts))
    for key in sorted(tally):
        print(f"{key} {tally[key]}")
    print(f"seconds {time.perf_counter() - t0:.2f}")


if __name__ == "__main__":
    main()
