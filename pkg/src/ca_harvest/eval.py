"""Metrics and the keyword-ablation robustness harness.

Precision, recall, and F1 use the zero-on-zero-denominator convention.
Macro averages run over classes present in the gold labels; weighted
averages weight by gold support.

The four perturbation modes stress a classifier's reliance on the
lexicon. The two random modes are matched-budget controls: they edit
exactly as many tokens as the text has lexicon matches, so differences
against the lexicon modes isolate *which* tokens were edited rather
than how many.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

from ca_harvest import kernels
from ca_harvest.corpus import Snippet
from ca_harvest.errors import DataFormatError, DegenerateInputError
from ca_harvest.labels import name_sort_key
from ca_harvest.lexicon import Lexicon
from ca_harvest.util import derive_seed

logger = logging.getLogger(__name__)

PERTURBATION_MODES = (
    "remove_lexicon",
    "replace_lexicon",
    "remove_random",
    "replace_random",
)


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: list[str]
    counts: list[list[int]]  # rows = gold, columns = predicted

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[str, ClassMetrics]
    macro: tuple[float, float, float]
    weighted: tuple[float, float, float]


def confusion(
    gold: Sequence[str], pred: Sequence[str], labels: Sequence[str] | None = None
) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise DataFormatError(
            f"gold and prediction lengths differ: {len(gold)} vs {len(pred)}"
        )
    if labels is None:
        labels = sorted(set(gold) | set(pred), key=name_sort_key)
    else:
        labels = list(labels)
        known = set(labels)
        for value in list(gold) + list(pred):
            if value not in known:
                raise DataFormatError(f"label {value!r} not in the declared label set")
    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for g, p in zip(gold, pred):
        counts[index[g]][index[p]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def report(conf: ConfusionMatrix) -> EvalReport:
    n = len(conf.labels)
    per_class: dict[str, ClassMetrics] = {}
    for i, label in enumerate(conf.labels):
        tp = conf.counts[i][i]
        support = sum(conf.counts[i])
        predicted = sum(conf.counts[r][i] for r in range(n))
        precision = _ratio(tp, predicted)
        recall = _ratio(tp, support)
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        per_class[label] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, support=support
        )

    present = [m for m in per_class.values() if m.support > 0]
    if present:
        macro = (
            sum(m.precision for m in present) / len(present),
            sum(m.recall for m in present) / len(present),
            sum(m.f1 for m in present) / len(present),
        )
        total_support = sum(m.support for m in present)
        weighted = (
            sum(m.precision * m.support for m in present) / total_support,
            sum(m.recall * m.support for m in present) / total_support,
            sum(m.f1 * m.support for m in present) / total_support,
        )
    else:
        macro = (0.0, 0.0, 0.0)
        weighted = (0.0, 0.0, 0.0)
    return EvalReport(per_class=per_class, macro=macro, weighted=weighted)


@dataclass(frozen=True)
class PerturbationMode:
    mode: str
    seed: int = 0

    def __post_init__(self):
        if self.mode not in PERTURBATION_MODES:
            raise ValueError(f"unknown perturbation mode {self.mode!r}")


def perturb(
    text: str,
    lexicon: Lexicon,
    mode: PerturbationMode,
    vocabulary: Sequence[str] = (),
    sample_id: str = "",
) -> str:
    """Apply one perturbation mode to one text.

    The output is the surviving tokens joined by single spaces;
    punctuation does not survive (every downstream consumer of the
    perturbed text is token-based). Texts with no lexicon matches have
    an empty edit budget and are returned unchanged. The RNG is seeded
    from (seed, sample_id, mode), so results do not depend on the order
    in which samples are perturbed.
    """
    spans = kernels.token_spans(text)
    tokens = [text[a:b] for a, b in spans]
    is_match = [text[a:b].lower() in lexicon.terms for a, b in spans]
    budget = sum(is_match)
    if budget == 0:
        return text
    if mode.mode in ("replace_lexicon", "replace_random") and not vocabulary:
        raise ValueError(f"mode {mode.mode!r} needs a nonempty vocabulary")

    rng = random.Random(derive_seed(mode.seed, sample_id, mode.mode))
    if mode.mode == "remove_lexicon":
        out = [t for t, m in zip(tokens, is_match) if not m]
    elif mode.mode == "replace_lexicon":
        out = [rng.choice(vocabulary) if m else t for t, m in zip(tokens, is_match)]
    else:
        candidates = [i for i, m in enumerate(is_match) if not m]
        if budget > len(candidates):
            logger.warning(
                "perturb %s: budget %d exceeds %d non-lexicon tokens; clamped",
                mode.mode,
                budget,
                len(candidates),
            )
            budget = len(candidates)
        chosen = sorted(rng.sample(candidates, budget))
        if mode.mode == "remove_random":
            drop = set(chosen)
            out = [t for i, t in enumerate(tokens) if i not in drop]
        else:
            out = list(tokens)
            for i in chosen:
                out[i] = rng.choice(vocabulary)
    return " ".join(out)


def robustness_report(
    snippets: Iterable[Snippet],
    classify_text: Callable[[str], bool],
    lexicon: Lexicon,
    modes: Sequence[str] = PERTURBATION_MODES,
    seed: int = 0,
    vocabulary: Sequence[str] = (),
) -> dict[str, float]:
    """Positive-prediction fraction per perturbation mode.

    classify_text maps a (possibly perturbed) text to the binary
    participation decision. Perturbed texts that end up with zero
    tokens count as negative: there is nothing left to express
    participation with.
    """
    snippets = list(snippets)
    if not snippets:
        raise DegenerateInputError("robustness report needs at least one snippet")
    for mode in modes:
        if mode not in PERTURBATION_MODES:
            raise DataFormatError(f"unknown perturbation mode {mode!r}")

    fractions: dict[str, float] = {}
    positives = sum(1 for s in snippets if classify_text(s.text))
    fractions["baseline"] = positives / len(snippets)
    for mode_name in modes:
        mode = PerturbationMode(mode=mode_name, seed=seed)
        positives = 0
        for snippet in snippets:
            variant = perturb(
                snippet.text, lexicon, mode, vocabulary, snippet.comment_id
            )
            if kernels.token_spans(variant) and classify_text(variant):
                positives += 1
        fractions[mode_name] = positives / len(snippets)
    return fractions


def report_to_records(rep: EvalReport) -> list[dict[str, Any]]:
    """Flatten a report to line-delimited machine records."""
    records: list[dict[str, Any]] = []
    for label in sorted(rep.per_class, key=name_sort_key):
        m = rep.per_class[label]
        records.append(
            {
                "type": "class",
                "label": label,
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }
        )
    for name, (p, r, f1) in (("macro", rep.macro), ("weighted", rep.weighted)):
        records.append(
            {"type": "average", "name": name, "precision": p, "recall": r, "f1": f1}
        )
    return records


def format_report(rep: EvalReport) -> str:
    """Human-readable table, aligned, for terminal output."""
    rows = [("class", "precision", "recall", "f1", "support")]
    for label in sorted(rep.per_class, key=name_sort_key):
        m = rep.per_class[label]
        rows.append(
            (label, f"{m.precision:.4f}", f"{m.recall:.4f}", f"{m.f1:.4f}", str(m.support))
        )
    total_support = sum(m.support for m in rep.per_class.values())
    for name, (p, r, f1) in (("macro avg", rep.macro), ("weighted avg", rep.weighted)):
        rows.append((name, f"{p:.4f}", f"{r:.4f}", f"{f1:.4f}", str(total_support)))
    widths = [max(len(row[col]) for row in rows) for col in range(5)]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [
            row[col].rjust(widths[col]) for col in range(1, 5)
        ]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)
