"""Question catalogue: ids, answer spaces, and question subsets.

The engine answers 14 clip-level questions about ego-motion. Every answer
emitted anywhere in the pipeline must be a member of its question's answer
space; ``UNPARSED`` is the reserved out-of-space marker for model responses
that could not be mapped to a label.
"""

from __future__ import annotations

UNPARSED = "unparsed"

# Canonical question order; 14-tuples follow this order everywhere.
ANSWER_SPACES: dict[str, tuple[str, ...]] = {
    "turn_direction": ("left", "right", "straight"),
    "braking_intensity": ("emergency", "moderate", "low", "none"),
    "speed_regime": ("stopped", "slow", "urban", "highway"),
    "driving_smoothness": ("smooth", "moderate", "aggressive"),
    "speed_trend": ("accelerating", "decelerating", "steady"),
    "mean_speed_low": ("yes", "no"),
    "heading_change": ("yes", "no"),
    "extreme_maneuver": ("yes", "no"),
    "motion_axis": ("longitudinal", "lateral", "none"),
    "lateral_accel": ("yes", "no"),
    "stop_and_go": ("yes", "no"),
    "brake_then_turn": ("yes", "no"),
    "speed_peak_half": ("first_half", "second_half", "no_peak"),
    "contrastive_halves": ("first_half", "second_half", "similar"),
}

QUESTION_ORDER: tuple[str, ...] = tuple(ANSWER_SPACES)

# Questions about event ordering within the clip.
TEMPORAL_QUESTIONS: tuple[str, ...] = ("speed_peak_half", "contrastive_halves")

# Subset answerable from purely geometric motion proxies.
GEOMETRIC_SUBSET: tuple[str, ...] = (
    "turn_direction",
    "speed_trend",
    "lateral_accel",
    "heading_change",
    "stop_and_go",
    "brake_then_turn",
)


def answer_space(question_id: str) -> tuple[str, ...]:
    try:
        return ANSWER_SPACES[question_id]
    except KeyError:
        raise KeyError(f"unknown question id: {question_id!r}") from None
