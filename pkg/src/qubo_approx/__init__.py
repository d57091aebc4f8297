from qubo_approx.config import get_settings
from qubo_approx.qubo import ConstraintTag, QuboMatrix, energy, entry_stats, new_qubo, set_entry

__all__ = [
    "ConstraintTag",
    "QuboMatrix",
    "energy",
    "entry_stats",
    "get_settings",
    "new_qubo",
    "set_entry",
]
