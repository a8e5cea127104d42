# ============================================================================
# utils/__init__.py
# ============================================================================

"""
Utilidades del sistema.
"""

from utils.calculations import (
    calculate_average,
    calculate_std_dev,
    derive_rng,
    iteration_bound,
    zero_crossing_gain
)

from utils.validators import (
    validate_transition_structure,
    validate_split_structure,
    validate_enclosing_triangle,
    format_validation_errors
)

from utils.constants import (
    TERMINATION_REASONS,
    METHODS,
    SYSTEM_VERSION
)

__all__ = [
    # Calculations
    'calculate_average',
    'calculate_std_dev',
    'derive_rng',
    'iteration_bound',
    'zero_crossing_gain',

    # Validators
    'validate_transition_structure',
    'validate_split_structure',
    'validate_enclosing_triangle',
    'format_validation_errors',

    # Constants
    'TERMINATION_REASONS',
    'METHODS',
    'SYSTEM_VERSION'
]
