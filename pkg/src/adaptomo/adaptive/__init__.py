"""Adaptive measurement selection."""

from .self_guided import (
    SelfGuidedState,
    exact_oracle,
    fix_gauge,
    gains,
    self_guided_step,
    shot_oracle,
)
from .strategies import (
    STRATEGY_KINDS,
    Strategy,
    aligned_tetrahedron,
    candidate_states,
    choose_next,
    select_projector,
    static_measurements,
)
from .two_step import (
    TWO_STEP_VARIANTS,
    TwoStepPlan,
    eigen_frame,
    first_phase_length,
    guo_probabilities,
    rotation_to,
    two_step_schedule,
)
from .utilities import (
    binary_fidelity_utility,
    binary_info_gain,
    fidelity_utility,
    info_gain_brute_force,
    info_gain_utility,
    predictive_probabilities,
)
