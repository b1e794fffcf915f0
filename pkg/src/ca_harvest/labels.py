"""The five-way participation label set and its serialized names."""

from __future__ import annotations

import enum

from ca_harvest.errors import DataFormatError


class ParticipationLabel(enum.Enum):
    PROBLEM_SOLUTION = "problem-solution"
    CALL_TO_ACTION = "call-to-action"
    INTENTION = "intention"
    EXECUTION = "execution"
    NONE = "none"

    @property
    def is_participation(self) -> bool:
        return self is not ParticipationLabel.NONE

    def __str__(self) -> str:
        return self.value


# Deterministic tie-break order for centroid classification: earliest wins.
TIE_ORDER = [
    ParticipationLabel.NONE,
    ParticipationLabel.PROBLEM_SOLUTION,
    ParticipationLabel.CALL_TO_ACTION,
    ParticipationLabel.INTENTION,
    ParticipationLabel.EXECUTION,
]

# Participation levels only, in ascending order of commitment.
LEVELS = [
    ParticipationLabel.PROBLEM_SOLUTION,
    ParticipationLabel.CALL_TO_ACTION,
    ParticipationLabel.INTENTION,
    ParticipationLabel.EXECUTION,
]

_BY_NAME = {label.value: label for label in ParticipationLabel}

# Serialized name of the binary positive class.
PARTICIPATION = "participation"


def parse_label(name: str) -> ParticipationLabel:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise DataFormatError(f"unknown participation label {name!r}") from None


def parse_binary_label(name: str) -> bool:
    """Parse a stage-1 label: 'participation', 'none', or any level name."""
    if name == PARTICIPATION:
        return True
    return parse_label(name).is_participation


def binary_name(is_participation: bool) -> str:
    return PARTICIPATION if is_participation else ParticipationLabel.NONE.value


# Canonical ordering of serialized label names, for deterministic
# iteration over models and reports that key on strings. Mirrors
# TIE_ORDER, with the binary positive name after the five-way labels.
NAME_ORDER = {
    name: position
    for position, name in enumerate(
        [label.value for label in TIE_ORDER] + [PARTICIPATION]
    )
}


def name_sort_key(name: str) -> tuple[int, str]:
    """Sort key placing known labels in NAME_ORDER, others after, by name."""
    return (NAME_ORDER.get(name, len(NAME_ORDER)), name)
