"""Crowdsourced-annotation quality control and label augmentation.

Covers the post-collection half of the annotation workflow: scoring
workers on control items, majority aggregation, Krippendorff's alpha,
propagation of labels to similar same-thread snippets, and assembly of
the named training-set variants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Any, Iterable

from ca_harvest.corpus import Snippet, record_to_snippet, snippet_to_record
from ca_harvest.embeddings import EmbeddingStore, cosine_similarity
from ca_harvest.errors import (
    DataFormatError,
    DegenerateInputError,
    MissingDataError,
)
from ca_harvest.labels import ParticipationLabel, parse_label
from ca_harvest.records import dump_record, iter_records

# The manual review checklist for synthetic candidates, as record keys.
VALIDITY_FLAGS = (
    "semantic_similarity",
    "structure",
    "meaning",
    "intent",
    "key_details",
)

VARIANTS = ("CS", "CS+SynI/E", "CS+SynA", "Ext", "Ext+SynI/E")


@dataclass(frozen=True)
class AnnotationRecord:
    sample_id: str
    worker_id: str
    label: ParticipationLabel
    is_control: bool = False
    gold: ParticipationLabel | None = None

    def __post_init__(self):
        if self.is_control != (self.gold is not None):
            raise DataFormatError(
                f"annotation for {self.sample_id!r}: gold label must be present "
                "exactly when is_control"
            )


@dataclass(frozen=True)
class WorkerScore:
    controls_seen: int
    controls_passed: int

    @property
    def pass_rate(self) -> float | None:
        if self.controls_seen == 0:
            return None
        return self.controls_passed / self.controls_seen

    @property
    def discard(self) -> bool:
        # Discard when failing strictly more than half of the controls.
        # Integer arithmetic keeps the 50% boundary exact.
        failed = self.controls_seen - self.controls_passed
        return 2 * failed > self.controls_seen


@dataclass(frozen=True)
class AggregatedSample:
    sample_id: str
    label: ParticipationLabel
    n_annotators: int
    vote_margin: int


@dataclass
class RejectionLog:
    discarded_annotations: int = 0
    control_samples: int = 0
    too_few_annotators: list[str] = field(default_factory=list)
    no_clear_majority: list[str] = field(default_factory=list)


def load_annotation_records(stream: IO[str]) -> list[AnnotationRecord]:
    records = []
    for lineno, raw in iter_records(stream):
        try:
            sample_id = raw["sample_id"]
            worker_id = raw["worker_id"]
            label = parse_label(raw["label"])
        except KeyError as exc:
            raise DataFormatError(f"line {lineno}: annotation missing key {exc}") from None
        is_control = bool(raw.get("is_control", False))
        gold_name = raw.get("gold")
        gold = parse_label(gold_name) if gold_name is not None else None
        try:
            records.append(
                AnnotationRecord(
                    sample_id=sample_id,
                    worker_id=worker_id,
                    label=label,
                    is_control=is_control,
                    gold=gold,
                )
            )
        except DataFormatError as exc:
            raise DataFormatError(f"line {lineno}: {exc}") from None
    return records


def score_workers(records: Iterable[AnnotationRecord]) -> dict[str, WorkerScore]:
    """Per-worker control performance. Workers with zero control
    exposures get pass_rate None and are retained (no evidence against
    them); audit output flags them.
    """
    seen: dict[str, int] = {}
    passed: dict[str, int] = {}
    for record in records:
        seen.setdefault(record.worker_id, 0)
        passed.setdefault(record.worker_id, 0)
        if record.is_control:
            seen[record.worker_id] += 1
            if record.label == record.gold:
                passed[record.worker_id] += 1
    return {
        worker: WorkerScore(controls_seen=seen[worker], controls_passed=passed[worker])
        for worker in seen
    }


def retained_workers(scores: dict[str, WorkerScore]) -> set[str]:
    return {worker for worker, score in scores.items() if not score.discard}


def aggregate_majority(
    records: Iterable[AnnotationRecord], worker_filter: set[str]
) -> tuple[list[AggregatedSample], RejectionLog]:
    """Majority aggregation under the QC rules.

    A sample survives only with at least two annotations from retained
    workers and a strict unique plurality among them. Control samples
    never reach the output dataset. Output keeps first-seen sample
    order, so identical inputs aggregate identically.
    """
    log = RejectionLog()
    by_sample: dict[str, list[ParticipationLabel]] = {}
    control_ids: set[str] = set()
    for record in records:
        if record.is_control:
            control_ids.add(record.sample_id)
        if record.worker_id not in worker_filter:
            log.discarded_annotations += 1
            continue
        by_sample.setdefault(record.sample_id, []).append(record.label)
    log.control_samples = len(control_ids)

    aggregated = []
    for sample_id, votes in by_sample.items():
        if sample_id in control_ids:
            continue
        if len(votes) < 2:
            log.too_few_annotators.append(sample_id)
            continue
        tallies: dict[ParticipationLabel, int] = {}
        for vote in votes:
            tallies[vote] = tallies.get(vote, 0) + 1
        ranked = sorted(tallies.values(), reverse=True)
        top = ranked[0]
        if ranked.count(top) > 1:
            log.no_clear_majority.append(sample_id)
            continue
        winner = next(label for label, n in tallies.items() if n == top)
        runner_up = ranked[1] if len(ranked) > 1 else 0
        aggregated.append(
            AggregatedSample(
                sample_id=sample_id,
                label=winner,
                n_annotators=len(votes),
                vote_margin=top - runner_up,
            )
        )
    return aggregated, log


def krippendorff_alpha(records: Iterable[AnnotationRecord]) -> float:
    """Krippendorff's alpha with the nominal difference metric.

    Computed as 1 - D_o/D_e over the coincidence matrix of units
    carrying at least two annotations; units with fewer contribute
    nothing (standard treatment). Perfect agreement gives exactly 1.0;
    zero expected disagreement also maps to 1.0 by convention.
    """
    by_unit: dict[str, list[ParticipationLabel]] = {}
    for record in records:
        by_unit.setdefault(record.sample_id, []).append(record.label)

    units = [votes for votes in by_unit.values() if len(votes) >= 2]
    if not units:
        raise DegenerateInputError(
            "agreement is undefined: no unit has two or more annotations"
        )

    n_total = 0
    observed_disagreement = 0.0
    label_totals: dict[ParticipationLabel, int] = {}
    for votes in units:
        n_u = len(votes)
        n_total += n_u
        counts: dict[ParticipationLabel, int] = {}
        for vote in votes:
            counts[vote] = counts.get(vote, 0) + 1
            label_totals[vote] = label_totals.get(vote, 0) + 1
        # Ordered disagreeing pairs within the unit: n_u^2 - sum(m_c^2).
        disagreeing = n_u * n_u - sum(m * m for m in counts.values())
        observed_disagreement += disagreeing / (n_u - 1)

    if observed_disagreement == 0.0:
        return 1.0
    d_o = observed_disagreement / n_total
    expected_pairs = n_total * n_total - sum(m * m for m in label_totals.values())
    d_e = expected_pairs / (n_total * (n_total - 1))
    if d_e == 0.0:
        return 1.0
    return 1.0 - d_o / d_e


def extend_reddit_informed(
    anchor: tuple[Snippet, ParticipationLabel],
    thread: list[Snippet],
    vectors: EmbeddingStore,
) -> list[tuple[Snippet, ParticipationLabel]]:
    """Propagate the anchor's label to its most similar thread-mates.

    Candidates more similar than 0.95 are dropped first (the bot
    filter), then the top ceil(5%) of what remains is returned, most
    similar first. The anchor itself never propagates.
    """
    anchor_snippet, label = anchor
    if not thread:
        return []
    anchor_vec = vectors.vector(anchor_snippet.comment_id)
    scored: list[tuple[float, str, Snippet]] = []
    for candidate in thread:
        if candidate.thread_id != anchor_snippet.thread_id:
            raise DataFormatError(
                f"candidate {candidate.comment_id!r} is from thread "
                f"{candidate.thread_id!r}, anchor is from {anchor_snippet.thread_id!r}"
            )
        if candidate.comment_id == anchor_snippet.comment_id:
            continue
        sim = cosine_similarity(vectors.vector(candidate.comment_id), anchor_vec)
        if sim > 0.95:
            continue
        scored.append((sim, candidate.comment_id, candidate))
    if not scored:
        return []
    scored.sort(key=lambda item: (-item[0], item[1]))
    take = (len(scored) + 19) // 20  # ceil(0.05 * n), exactly
    return [(snippet, label) for _, _, snippet in scored[:take]]


@dataclass(frozen=True)
class SyntheticRecord:
    snippet: Snippet
    label: ParticipationLabel
    anchor_id: str
    flags: dict[str, bool]

    @property
    def valid(self) -> bool:
        return all(self.flags.get(flag, False) for flag in VALIDITY_FLAGS)


def labeled_to_record(snippet: Snippet, label: ParticipationLabel) -> dict[str, Any]:
    record = snippet_to_record(snippet)
    record["label"] = label.value
    return record


def labeled_to_line(snippet: Snippet, label: ParticipationLabel) -> str:
    return dump_record(labeled_to_record(snippet, label))


def load_labeled_records(stream: IO[str]) -> list[tuple[Snippet, ParticipationLabel]]:
    samples = []
    for lineno, raw in iter_records(stream):
        if "label" not in raw:
            raise DataFormatError(f"line {lineno}: labeled record missing 'label'")
        try:
            samples.append((record_to_snippet(raw), parse_label(raw["label"])))
        except DataFormatError as exc:
            raise DataFormatError(f"line {lineno}: {exc}") from None
    return samples


def load_synthetic_records(
    stream: IO[str], only_valid: bool = True
) -> list[SyntheticRecord]:
    """Synthetic candidates; by default only records whose five review
    flags are all true survive (the others failed manual review).
    """
    out = []
    for lineno, raw in iter_records(stream):
        for key in ("label", "anchor_id"):
            if key not in raw:
                raise DataFormatError(f"line {lineno}: synthetic record missing {key!r}")
        flags = {}
        for flag in VALIDITY_FLAGS:
            if flag not in raw:
                raise DataFormatError(
                    f"line {lineno}: synthetic record missing validity flag {flag!r}"
                )
            value = raw[flag]
            if not isinstance(value, bool):
                raise DataFormatError(
                    f"line {lineno}: validity flag {flag!r} must be boolean"
                )
            flags[flag] = value
        try:
            record = SyntheticRecord(
                snippet=record_to_snippet(raw),
                label=parse_label(raw["label"]),
                anchor_id=raw["anchor_id"],
                flags=flags,
            )
        except DataFormatError as exc:
            raise DataFormatError(f"line {lineno}: {exc}") from None
        if only_valid and not record.valid:
            continue
        out.append(record)
    return out


@dataclass
class TrainingSetVariant:
    name: str
    samples: list[tuple[Snippet, ParticipationLabel]]
    counts: dict[ParticipationLabel, int]


def _count_labels(
    samples: Iterable[tuple[Snippet, ParticipationLabel]]
) -> dict[ParticipationLabel, int]:
    counts: dict[ParticipationLabel, int] = {}
    for _, label in samples:
        counts[label] = counts.get(label, 0) + 1
    return counts


def merge_training_sets(
    cs: list[tuple[Snippet, ParticipationLabel]],
    synthetic: list[tuple[Snippet, ParticipationLabel]],
    extension: list[tuple[Snippet, ParticipationLabel]],
    variant: str,
) -> TrainingSetVariant:
    """Compose one named training-set variant.

    CS is the crowdsourced base. SynI/E adds synthetic Intention and
    Execution; SynA adds synthetic everything except Problem-solution;
    Ext adds the Reddit-informed extension. Inputs must already be
    deduplicated by sample id.
    """
    if variant == "CS":
        samples = list(cs)
    elif variant == "CS+SynI/E":
        samples = list(cs) + [
            pair
            for pair in synthetic
            if pair[1]
            in (ParticipationLabel.INTENTION, ParticipationLabel.EXECUTION)
        ]
    elif variant == "CS+SynA":
        samples = list(cs) + [
            pair
            for pair in synthetic
            if pair[1] is not ParticipationLabel.PROBLEM_SOLUTION
        ]
    elif variant == "Ext":
        samples = list(cs) + list(extension)
    elif variant == "Ext+SynI/E":
        samples = (
            list(cs)
            + list(extension)
            + [
                pair
                for pair in synthetic
                if pair[1]
                in (ParticipationLabel.INTENTION, ParticipationLabel.EXECUTION)
            ]
        )
    else:
        raise ValueError(f"unknown training-set variant {variant!r}")
    return TrainingSetVariant(
        name=variant, samples=samples, counts=_count_labels(samples)
    )


def aggregated_to_record(sample: AggregatedSample) -> dict[str, Any]:
    return {
        "sample_id": sample.sample_id,
        "label": sample.label.value,
        "n_annotators": sample.n_annotators,
        "vote_margin": sample.vote_margin,
    }
