"""Collective-action lexicon: loading, scoring, threshold tuning.

The dictionary classifier scores a text as the fraction of its tokens
matching the lexicon and compares the score against a threshold tuned
to maximize Youden's J (TPR minus FPR) on labeled training data.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from ca_harvest import kernels
from ca_harvest.errors import DataFormatError, DegenerateInputError


@dataclass(frozen=True)
class Lexicon:
    terms: frozenset[str]
    name: str = ""
    source: str = ""

    def __post_init__(self):
        if not self.terms:
            raise DataFormatError("lexicon is empty")
        for term in self.terms:
            if not term or any(ch.isspace() for ch in term):
                raise DataFormatError(f"lexicon term {term!r} contains whitespace")


@dataclass(frozen=True)
class ThresholdModel:
    tau: float
    j_statistic: float
    candidates_evaluated: int


def load_lexicon_lines(lines: Iterable[str], name: str = "", source: str = "") -> Lexicon:
    terms = set()
    for line in lines:
        term = line.strip()
        if not term or term.startswith("#"):
            continue
        terms.add(term.lower())
    return Lexicon(terms=frozenset(terms), name=name, source=source)


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        return load_lexicon_lines(fh, name=path.stem, source=str(path))


def dictionary_score(text: str, lexicon: Lexicon) -> float:
    """Fraction of the text's tokens that match the lexicon."""
    spans = kernels.token_spans(text)
    if not spans:
        raise DegenerateInputError("cannot score a zero-token text")
    matches = kernels.count_matches(text, lexicon.terms)
    return matches / len(spans)


def tune_threshold(scored: list[tuple[float, bool]]) -> ThresholdModel:
    """Pick the score threshold maximizing J = TPR - FPR.

    Candidates are the observed unique scores (J is piecewise constant
    between them, so the sweep is exhaustive). The decision rule is
    score >= tau => Participation. Ties go to the smallest candidate,
    which maximizes recall at equal J.
    """
    positives = sum(1 for _, label in scored if label)
    negatives = len(scored) - positives
    if positives == 0 or negatives == 0:
        raise DegenerateInputError("threshold tuning needs both classes present")

    candidates = sorted({score for score, _ in scored})
    best_tau = candidates[0]
    best_j = None
    for tau in candidates:
        tp = 0
        fp = 0
        for score, label in scored:
            if score >= tau:
                if label:
                    tp += 1
                else:
                    fp += 1
        j = tp / positives - fp / negatives
        if best_j is None or j > best_j:
            best_j = j
            best_tau = tau
    return ThresholdModel(
        tau=best_tau, j_statistic=best_j, candidates_evaluated=len(candidates)
    )


def classify_dictionary(score: float, model: ThresholdModel) -> bool:
    """True (Participation) iff score >= tau. Boundary is inclusive."""
    return score >= model.tau


def save_threshold_model(model: ThresholdModel, stream: IO[str]) -> None:
    stream.write(f"tau={model.tau!r}\n")
    stream.write(f"j={model.j_statistic!r}\n")
    stream.write(f"candidates={model.candidates_evaluated}\n")


def load_threshold_model(stream: IO[str]) -> ThresholdModel:
    fields = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError(f"threshold model line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    try:
        return ThresholdModel(
            tau=float(fields["tau"]),
            j_statistic=float(fields["j"]),
            candidates_evaluated=int(fields.get("candidates", "0")),
        )
    except KeyError as exc:
        raise DataFormatError(f"threshold model missing key {exc}") from None
    except ValueError as exc:
        raise DataFormatError(f"threshold model: {exc}") from None
