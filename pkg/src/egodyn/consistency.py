"""Boolean implication rules over a clip's answer set, plus WPCR/PCov.

Ten hard implications (antecedent A => consequent B) relate answers that
physics couples: a clip that reports a significant heading change but a
straight trajectory is internally incoherent regardless of ground truth.
A clip contributes to the weighted consistency rate only when it violates
nothing and triggers at least one rule; the contribution is the fraction
of the rule table it triggers, so evasive answer sets cannot score high
by triggering nothing.

Missing (unparsed) answers: an absent antecedent leaves the rule
untriggered; an absent consequent under a holding antecedent counts as a
violation, since the implication cannot be verified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EmptySet
from .questions import UNPARSED


@dataclass(frozen=True)
class Condition:
    question: str
    op: str  # "eq" | "ne"
    label: str

    def holds(self, value: str) -> bool:
        return (value == self.label) if self.op == "eq" else (value != self.label)


@dataclass(frozen=True)
class Rule:
    rule_id: str
    antecedent: Condition
    consequent: Condition


def _rule(rid, a_q, a_op, a_label, c_q, c_op, c_label) -> Rule:
    return Rule(rid, Condition(a_q, a_op, a_label), Condition(c_q, c_op, c_label))


RULES_V1: tuple[Rule, ...] = (
    _rule("R1", "heading_change", "eq", "yes", "turn_direction", "ne", "straight"),
    _rule("R2", "lateral_accel", "eq", "yes", "turn_direction", "ne", "straight"),
    _rule("R3", "turn_direction", "eq", "straight", "heading_change", "eq", "no"),
    _rule("R4", "turn_direction", "eq", "straight", "lateral_accel", "eq", "no"),
    _rule("R5", "speed_regime", "eq", "highway", "mean_speed_low", "eq", "no"),
    _rule("R6", "speed_regime", "eq", "stopped", "mean_speed_low", "eq", "yes"),
    _rule("R7", "speed_regime", "eq", "stopped", "speed_trend", "ne", "accelerating"),
    _rule("R8", "brake_then_turn", "eq", "yes", "braking_intensity", "ne", "none"),
    _rule("R9", "brake_then_turn", "eq", "yes", "turn_direction", "ne", "straight"),
    _rule("R10", "stop_and_go", "eq", "yes", "speed_regime", "ne", "stopped"),
)


@dataclass(frozen=True)
class RuleOutcome:
    rule_id: str
    triggered: bool
    violated: bool

    def __post_init__(self) -> None:
        if self.violated and not self.triggered:
            raise ValueError("a rule cannot be violated without triggering")


@dataclass(frozen=True)
class ClipConsistency:
    clip_id: str
    triggered: int
    violated: int
    contribution: float
    triggered_rules: tuple[str, ...]
    violated_rules: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "triggered": list(self.triggered_rules),
            "violated": list(self.violated_rules),
            "contribution": self.contribution,
        }


def _answer(answers: Mapping[str, str | None], question: str) -> str | None:
    value = answers.get(question)
    if value is None or value == UNPARSED:
        return None
    return value


def evaluate_rules(
    answers: Mapping[str, str | None], rules: Sequence[Rule] = RULES_V1
) -> list[RuleOutcome]:
    """Evaluate every rule against one clip's answers."""
    outcomes = []
    for rule in rules:
        a_val = _answer(answers, rule.antecedent.question)
        if a_val is None or not rule.antecedent.holds(a_val):
            outcomes.append(RuleOutcome(rule.rule_id, False, False))
            continue
        c_val = _answer(answers, rule.consequent.question)
        violated = c_val is None or not rule.consequent.holds(c_val)
        outcomes.append(RuleOutcome(rule.rule_id, True, violated))
    return outcomes


def clip_consistency(
    clip_id: str,
    answers: Mapping[str, str | None],
    rules: Sequence[Rule] = RULES_V1,
) -> ClipConsistency:
    """Fold rule outcomes into the clip's triggered/violated counts."""
    outcomes = evaluate_rules(answers, rules)
    trig = tuple(o.rule_id for o in outcomes if o.triggered)
    viol = tuple(o.rule_id for o in outcomes if o.violated)
    t, v = len(trig), len(viol)
    contribution = t / len(rules) if (v == 0 and t > 0) else 0.0
    return ClipConsistency(clip_id, t, v, contribution, trig, viol)


def wpcr(clips: Sequence[ClipConsistency]) -> float:
    """Mean clip contribution: T_c over |R| for clean clips, else zero."""
    if not clips:
        raise EmptySet("wpcr needs at least one clip")
    return float(sum(c.contribution for c in clips) / len(clips))


def pcov(clips: Sequence[ClipConsistency], n_rules: int | None = None) -> float:
    """Mean fraction of rules triggered per clip."""
    if not clips:
        raise EmptySet("pcov needs at least one clip")
    n_rules = n_rules or len(RULES_V1)
    return float(sum(c.triggered / n_rules for c in clips) / len(clips))
