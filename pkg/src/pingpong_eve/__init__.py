"""Exact-state simulation and security analysis of eavesdropping on the
ping-pong protocol.

Subpackages:

* engine       -- 54-dimensional pure-state engine (gates, measurements)
* attacks      -- the travel-photon attack, symmetrization, profiles
* conventions  -- exhaustive search over gate-convention readings
* protocol     -- seeded Monte Carlo of protocol rounds
* information  -- outcome distributions, mutual information, security bounds
* verify       -- exact self-check registry backing the CLI verify command
"""

__version__ = "0.1.0"

from .attacks import AttackProfile, improved_profile, wojcik_profile
from .engine import BasisKet, BellOutcome, Occupation, PureState, make_initial
from .information import exact_joint, insecurity_bound, mutual_information
from .protocol import ProtocolConfig, RoundRecord, RunStats, run_simulation

__all__ = [
    "AttackProfile",
    "BasisKet",
    "BellOutcome",
    "Occupation",
    "ProtocolConfig",
    "PureState",
    "RoundRecord",
    "RunStats",
    "__version__",
    "exact_joint",
    "improved_profile",
    "insecurity_bound",
    "make_initial",
    "mutual_information",
    "run_simulation",
    "wojcik_profile",
]
