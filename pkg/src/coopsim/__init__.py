"""Cooperation dynamics in mixed human/AI populations.

The package covers three complementary models of the same one-shot
prisoner's dilemma with a fixed number of committed AI agents mixed into
a human population:

* ``wellmixed``:   exact birth-death Markov analysis of a finite well-mixed
                   population (fixation probabilities, cooperation frequency,
                   closed forms, risk dominance).
* ``replicator``:  deterministic mean-field dynamics for an infinite
                   population with a fraction of AI agents.
* ``abm``:         stochastic agent-based simulation on arbitrary graphs
                   (complete, lattice, scale-free) with a compiled kernel
                   and a pure-Python fallback.

``cli`` exposes the ``simulate`` command that sweeps parameter grids and
writes CSV results plus a reproducibility manifest.
"""

__version__ = "0.1.0"

from .game import (
    AIBehavior,
    DonationParams,
    PayoffMatrix,
    Strategy,
    donation,
    donation_matrix,
    fermi_prob,
)
from .wellmixed import WellMixedConfig
from .replicator import ReplicatorConfig
from .abm import SimConfig

__all__ = [
    "__version__",
    "AIBehavior",
    "DonationParams",
    "PayoffMatrix",
    "Strategy",
    "donation",
    "donation_matrix",
    "fermi_prob",
    "WellMixedConfig",
    "ReplicatorConfig",
    "SimConfig",
]
