"""Greedy multi-objective selection of a balanced benchmark subset.

Selection repeatedly finds the (question, class) pair with the largest
deficit against its target frequency, filters the unselected pool to
clips that answer that class (falling back to all cap-satisfying clips if
none do), and among those picks the clip whose answers fill the most
deficit mass across the remaining questions. Ties break lexicographically
for (question, class) and by pool order for clips, so identical pools
produce identical selections.

Frequencies are maintained as integer counts and divided on demand, which
keeps the incremental state exactly equal to a from-scratch recount.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InfeasibleCaps, PoolExhausted
from .questions import ANSWER_SPACES

Targets = Mapping[str, Mapping[str, float]]


def uniform_targets(
    spaces: Mapping[str, Sequence[str]] | None = None,
) -> dict[str, dict[str, float]]:
    """Target frequency 1/|classes| for every class of every question."""
    spaces = spaces if spaces is not None else ANSWER_SPACES
    return {
        q: {c: 1.0 / len(classes) for c in classes} for q, classes in spaces.items()
    }


@dataclass(frozen=True)
class PoolClip:
    """A candidate benchmark clip: id, provenance, and its full answer set."""

    clip_id: str
    source: str
    answers: Mapping[str, str]


@dataclass
class BalanceState:
    """Running selection with count-based class frequencies."""

    targets: Targets
    selected: list[str] = field(default_factory=list)
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    source_counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.counts:
            self.counts = {
                q: {c: 0 for c in classes} for q, classes in self.targets.items()
            }

    def frequency(self, question: str, label: str) -> float:
        n = len(self.selected)
        if n == 0:
            return 0.0
        return self.counts[question].get(label, 0) / n

    def add(self, clip: PoolClip) -> None:
        self.selected.append(clip.clip_id)
        for q in self.targets:
            label = clip.answers[q]
            self.counts[q][label] = self.counts[q].get(label, 0) + 1
        self.source_counts[clip.source] = self.source_counts.get(clip.source, 0) + 1


def worst_imbalance(state: BalanceState, targets: Targets) -> tuple[str, str]:
    """(question, class) with the largest target-minus-empirical deficit."""
    best = None
    best_deficit = -float("inf")
    for question in sorted(targets):
        for label in sorted(targets[question]):
            deficit = targets[question][label] - state.frequency(question, label)
            if deficit > best_deficit:
                best_deficit = deficit
                best = (question, label)
    assert best is not None
    return best


def helpfulness(
    clip: PoolClip, state: BalanceState, targets: Targets, q_worst: str
) -> float:
    """Sum of positive deficits this clip's answers would help fill,
    over every question except the one already being targeted."""
    score = 0.0
    for question in targets:
        if question == q_worst:
            continue
        label = clip.answers[question]
        deficit = targets[question].get(label, 0.0) - state.frequency(question, label)
        if deficit > 0:
            score += deficit
    return score


def _validate_pool(pool: Sequence[PoolClip], targets: Targets) -> None:
    for clip in pool:
        for question, classes in targets.items():
            answer = clip.answers.get(question)
            if answer is None:
                raise ValueError(
                    f"clip {clip.clip_id} missing answer for {question}"
                )
            if answer not in classes:
                raise ValueError(
                    f"clip {clip.clip_id}: answer {answer!r} outside the "
                    f"target classes of {question}"
                )


def balance(
    pool: Sequence[PoolClip],
    n: int,
    caps: Mapping[str, int] | None = None,
    targets: Targets | None = None,
) -> list[str]:
    """Select ``n`` clip ids approaching the target class frequencies.

    ``caps`` limits selected clips per source; sources absent from the
    mapping are unlimited.

    Raises:
        PoolExhausted: fewer than ``n`` clips are available.
        InfeasibleCaps: the caps admit fewer than ``n`` selections.
    """
    targets = targets if targets is not None else uniform_targets()
    _validate_pool(pool, targets)
    if n < 0:
        raise ValueError("n must be non-negative")
    if len(pool) < n:
        raise PoolExhausted(f"pool has {len(pool)} clips, need {n}")
    if caps is not None:
        per_source: dict[str, int] = {}
        for clip in pool:
            per_source[clip.source] = per_source.get(clip.source, 0) + 1
        admissible = sum(
            min(count, caps.get(src, count)) for src, count in per_source.items()
        )
        if admissible < n:
            raise InfeasibleCaps(
                f"caps admit at most {admissible} clips, need {n}"
            )

    if n == len(pool):
        return [clip.clip_id for clip in pool]

    state = BalanceState(targets=targets)
    chosen: set[str] = set()

    def cap_ok(clip: PoolClip) -> bool:
        if caps is None or clip.source not in caps:
            return True
        return state.source_counts.get(clip.source, 0) < caps[clip.source]

    while len(state.selected) < n:
        q_worst, c_worst = worst_imbalance(state, targets)
        candidates = [
            clip
            for clip in pool
            if clip.clip_id not in chosen
            and cap_ok(clip)
            and clip.answers[q_worst] == c_worst
        ]
        if not candidates:
            candidates = [
                clip for clip in pool if clip.clip_id not in chosen and cap_ok(clip)
            ]
        if not candidates:
            raise PoolExhausted("no cap-satisfying clips remain")
        best_clip = None
        best_score = -float("inf")
        for clip in candidates:  # pool order; strictly-greater keeps first
            score = helpfulness(clip, state, targets, q_worst)
            if score > best_score:
                best_score = score
                best_clip = clip
        state.add(best_clip)
        chosen.add(best_clip.clip_id)
    return list(state.selected)


def imbalance_report(
    selected: Sequence[PoolClip], targets: Targets | None = None
) -> dict[str, dict]:
    """Per-question deviation table for the final selection."""
    targets = targets if targets is not None else uniform_targets()
    n = len(selected)
    report: dict[str, dict] = {}
    for question, classes in targets.items():
        freq = {c: 0.0 for c in classes}
        for clip in selected:
            freq[clip.answers[question]] += 1.0
        if n > 0:
            freq = {c: count / n for c, count in freq.items()}
        max_dev = max(abs(freq[c] - classes[c]) for c in classes)
        report[question] = {"max_abs_deviation": max_dev, "freq": freq}
    return report
