"""Matching markets in which central agents contract with two opposite sides.

NTU side: ranked-bundle preferences, the alternate deferred acceptance
algorithm, exhaustive stability and setwise-stability oracles.
TU side: exact-rational valuations, demand, the right-wing flip
transformation and a competitive-equilibrium solver with a blocking oracle.
"""

from twoside.errors import InputError, SizeGuardError
from twoside.ntu import Contract, NtuMarket, RankedPreference, Side

__all__ = [
    "Contract",
    "InputError",
    "NtuMarket",
    "RankedPreference",
    "Side",
    "SizeGuardError",
]

__version__ = "0.1.0"
