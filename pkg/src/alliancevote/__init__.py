"""Alliance-aware single-winner voting rules, axiom checkers and experiments."""

from alliancevote.election import (
    AllianceStructure,
    Election,
    ElectionError,
    build_pref_matrix,
    condorcet_winner,
    majority_winner,
    remove_candidates,
)
from alliancevote.rules import Rule, get_rule
from alliancevote.standard_rules import TallyResult

__all__ = [
    "AllianceStructure",
    "Election",
    "ElectionError",
    "Rule",
    "TallyResult",
    "build_pref_matrix",
    "condorcet_winner",
    "get_rule",
    "majority_winner",
    "remove_candidates",
]

__version__ = "0.1.0"
