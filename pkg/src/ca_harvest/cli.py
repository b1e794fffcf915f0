"""Subcommand front end tying the modules into runnable workflows.

Exit status: 0 success, 1 usage error, 2 data error. Every subcommand
reads line-delimited input from standard input when a path is '-' and
writes to standard output the same way. Runs that write to a real
output path also emit a <output>.manifest.json with the resolved
configuration and input digests (override with --manifest).

The --store option names either a CAES embedding-store file or the
built-in deterministic embedder as `fallback` / `fallback:<dim>`. The
fallback keeps every workflow runnable without precomputed embeddings;
it is a hash projection, not a semantic model, and the CLI says so on
standard error whenever it is used.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
from typing import Any, Callable, Iterable, Iterator

from ca_harvest import analytics, kernels
from ca_harvest.annotation import (
    VARIANTS,
    aggregate_majority,
    aggregated_to_record,
    extend_reddit_informed,
    krippendorff_alpha,
    labeled_to_record,
    load_annotation_records,
    load_labeled_records,
    load_synthetic_records,
    merge_training_sets,
    retained_workers,
    score_workers,
)
from ca_harvest.config import (
    OptionRegistry,
    find_config_path,
    load_config_file,
    manifest_path_for,
    write_manifest,
)
from ca_harvest.corpus import (
    IngestStats,
    Snippet,
    extract_snippet,
    filter_near_duplicates,
    parse_comment_line,
    record_to_snippet,
    snippet_to_line,
)
from ca_harvest.embeddings import (
    FALLBACK_DIMENSION,
    EmbeddingStore,
    build_fallback_store,
    classify_centroid,
    compute_centroids,
    fallback_hash_embed,
    load_centroid_model,
    load_embedding_store,
    save_centroid_model,
)
from ca_harvest.errors import DataFormatError, DegenerateInputError, HarvestError
from ca_harvest.eval import (
    PERTURBATION_MODES,
    confusion,
    format_report,
    report,
    report_to_records,
    robustness_report,
)
from ca_harvest.labels import (
    TIE_ORDER,
    ParticipationLabel,
    binary_name,
)
from ca_harvest.lexicon import (
    Lexicon,
    classify_dictionary,
    dictionary_score,
    load_lexicon,
    load_threshold_model,
    save_threshold_model,
    tune_threshold,
)
from ca_harvest.pipeline import (
    CentroidStage,
    DictionaryStage,
    ExternalStage,
    Prediction,
    class_weights,
    load_external_predictions,
    prediction_to_line,
    run_direct,
    run_layered,
)
from ca_harvest.records import dump_record, iter_records
from ca_harvest.util import open_input, open_output

PROG = "ca-harvest"
SHARD_LINES = 4096


class UsageError(Exception):
    """Bad flag combination or missing required option: exit 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this pipeline reserves 2 for
    # data errors, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _stderr(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------- input


def _read_snippets(path: str) -> list[Snippet]:
    snippets = []
    with open_input(path) as fh:
        for lineno, raw in iter_records(fh):
            try:
                snippets.append(record_to_snippet(raw))
            except DataFormatError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from None
    return snippets


def _read_labeled(path: str) -> list[tuple[Snippet, ParticipationLabel]]:
    with open_input(path) as fh:
        try:
            return load_labeled_records(fh)
        except DataFormatError as exc:
            raise DataFormatError(f"{path}: {exc}") from None


def _load_vocabulary(path: str) -> list[str]:
    tokens = []
    with open_input(path) as fh:
        for line in fh:
            token = line.strip()
            if token and not token.startswith("#"):
                tokens.append(token)
    if not tokens:
        raise DataFormatError(f"vocabulary file {path} has no tokens")
    return tokens


def _require(args: argparse.Namespace, dest: str, flag: str) -> Any:
    value = getattr(args, dest, None)
    if value is None:
        raise UsageError(f"{flag} is required (flag or config key {dest!r})")
    return value


def _require_lexicon(args: argparse.Namespace) -> Lexicon:
    return load_lexicon(_require(args, "lexicon", "--lexicon"))


def _resolve_vectors(
    spec: str | None, items: Iterable[tuple[str, str]]
) -> EmbeddingStore:
    """Build the vector source for --store: a CAES file or fallback."""
    if spec is None:
        spec = "fallback"
    if spec == "fallback" or spec.startswith("fallback:"):
        _, _, dim_text = spec.partition(":")
        dimension = int(dim_text) if dim_text else FALLBACK_DIMENSION
        _stderr(
            f"{PROG}: using fallback hash embeddings (dimension={dimension}); "
            "these are deterministic but not semantic"
        )
        return build_fallback_store(items, dimension)
    return load_embedding_store(spec)


def _vector_source(
    spec: str | None, args: argparse.Namespace
) -> Callable[[Snippet], Any]:
    if spec is None:
        spec = "fallback"
    if spec == "fallback" or spec.startswith("fallback:"):
        _, _, dim_text = spec.partition(":")
        dimension = int(dim_text) if dim_text else FALLBACK_DIMENSION
        _stderr(
            f"{PROG}: using fallback hash embeddings (dimension={dimension}); "
            "these are deterministic but not semantic"
        )
        return lambda snippet: fallback_hash_embed(snippet.text, dimension)
    store = load_embedding_store(spec)
    return lambda snippet: store.vector(snippet.comment_id)


def _write_lines(path: str, lines: Iterable[str]) -> int:
    n = 0
    with open_output(path) as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
            n += 1
    return n


def _emit_manifest(
    args: argparse.Namespace,
    subcommand: str,
    inputs: list[str | None],
    outputs: list[str | None],
    counts: dict[str, Any],
) -> None:
    output = outputs[0] if outputs else None
    path = manifest_path_for(output, getattr(args, "manifest", None))
    if path:
        write_manifest(
            path,
            subcommand,
            args,
            [p for p in inputs if p],
            [p for p in outputs if p],
            counts,
        )


# ---------------------------------------------------------------- ingest


_INGEST_LEXICON: Lexicon | None = None


def _init_ingest_worker(terms: frozenset[str]) -> None:
    global _INGEST_LEXICON
    _INGEST_LEXICON = Lexicon(terms=terms, name="worker")


def _ingest_shard(
    lines: list[str],
) -> tuple[int, int, list[tuple[str, str | None]]]:
    malformed = 0
    parsed: list[tuple[str, str | None]] = []
    for line in lines:
        comment = parse_comment_line(line)
        if comment is None:
            malformed += 1
            continue
        snippet = extract_snippet(comment, _INGEST_LEXICON)
        parsed.append((comment.id, snippet_to_line(snippet) if snippet else None))
    return len(lines), malformed, parsed


def _shards(stream: Iterable[str], size: int) -> Iterator[list[str]]:
    shard: list[str] = []
    for line in stream:
        if not line.strip():
            continue
        shard.append(line)
        if len(shard) >= size:
            yield shard
            shard = []
    if shard:
        yield shard


def cmd_ingest(args: argparse.Namespace) -> int:
    lexicon = _require_lexicon(args)
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    stats = IngestStats()
    seen: set[str] = set()
    written = 0

    def _emit(fout, parsed: list[tuple[str, str | None]]) -> None:
        nonlocal written
        for comment_id, snippet_line in parsed:
            if comment_id in seen:
                stats.duplicates += 1
                stats.malformed += 1
                continue
            seen.add(comment_id)
            stats.comments += 1
            if snippet_line is not None:
                fout.write(snippet_line)
                fout.write("\n")
                written += 1

    with open_input(args.input) as fin, open_output(args.output) as fout:
        if threads <= 1:
            _init_ingest_worker(lexicon.terms)
            for shard in _shards(fin, SHARD_LINES):
                n_lines, malformed, parsed = _ingest_shard(shard)
                stats.lines += n_lines
                stats.malformed += malformed
                _emit(fout, parsed)
        else:
            with multiprocessing.Pool(
                threads, initializer=_init_ingest_worker, initargs=(lexicon.terms,)
            ) as pool:
                for n_lines, malformed, parsed in pool.imap(
                    _ingest_shard, _shards(fin, SHARD_LINES)
                ):
                    stats.lines += n_lines
                    stats.malformed += malformed
                    _emit(fout, parsed)

    counts = {
        "lines": stats.lines,
        "comments": stats.comments,
        "malformed": stats.malformed,
        "duplicates": stats.duplicates,
        "snippets": written,
    }
    _stderr(
        f"{PROG}: ingest: lines={stats.lines} comments={stats.comments} "
        f"malformed={stats.malformed} duplicates={stats.duplicates} "
        f"snippets={written}"
    )
    _emit_manifest(args, "ingest", [args.input, args.lexicon], [args.output], counts)
    return 0


# ---------------------------------------------------------------- dedup


def cmd_dedup(args: argparse.Namespace) -> int:
    snippets = _read_snippets(args.input)
    vectors = _resolve_vectors(
        args.store, ((s.comment_id, s.text) for s in snippets)
    )
    kept = filter_near_duplicates(snippets, vectors.entries, args.threshold)
    _write_lines(args.output, (snippet_to_line(s) for s in kept))
    counts = {"input": len(snippets), "kept": len(kept), "dropped": len(snippets) - len(kept)}
    _stderr(
        f"{PROG}: dedup: kept {len(kept)} of {len(snippets)} "
        f"(threshold {args.threshold})"
    )
    _emit_manifest(args, "dedup", [args.input, args.store], [args.output], counts)
    return 0


# ---------------------------------------------------------------- models


def cmd_tune_dict(args: argparse.Namespace) -> int:
    lexicon = _require_lexicon(args)
    labeled = _read_labeled(args.input)
    scored = [
        (dictionary_score(snippet.text, lexicon), label.is_participation)
        for snippet, label in labeled
    ]
    model = tune_threshold(scored)
    with open_output(args.model_out) as fh:
        save_threshold_model(model, fh)
    summary = (
        f"tau={model.tau!r} j={model.j_statistic!r} "
        f"candidates={model.candidates_evaluated}"
    )
    print(summary, file=sys.stderr if args.model_out == "-" else sys.stdout)
    _emit_manifest(
        args,
        "tune-dict",
        [args.input, args.lexicon],
        [args.model_out],
        {"samples": len(scored), "tau": model.tau, "j": model.j_statistic},
    )
    return 0


def cmd_centroid_train(args: argparse.Namespace) -> int:
    labeled = _read_labeled(args.input)
    vectors = _resolve_vectors(
        args.store, ((s.comment_id, s.text) for s, _ in labeled)
    )
    pairs = []
    for snippet, label in labeled:
        name = binary_name(label.is_participation) if args.binary else label.value
        pairs.append((vectors.vector(snippet.comment_id), name))
    model = compute_centroids(pairs)
    with open_output(args.model_out) as fh:
        save_centroid_model(model, fh)
    _stderr(
        f"{PROG}: centroid-train: classes "
        + ", ".join(f"{c}={model.class_counts[c]}" for c in model.classes)
    )
    _emit_manifest(
        args,
        "centroid-train",
        [args.input, args.store],
        [args.model_out],
        {"samples": len(pairs), "classes": len(model.classes)},
    )
    return 0


# ---------------------------------------------------------------- classify


def _build_stage(spec: str, role: str, args: argparse.Namespace):
    if spec == "dict":
        if role == "stage2":
            raise UsageError(
                "the dictionary classifier is binary-only; "
                "stage 2 needs centroid or external:<path>"
            )
        lexicon = _require_lexicon(args)
        model_path = _require(args, "dict_model", "--dict-model")
        with open_input(model_path) as fh:
            model = load_threshold_model(fh)
        return DictionaryStage(lexicon, model)
    if spec == "centroid" or spec.startswith("centroid:"):
        model_path = spec.partition(":")[2] or getattr(args, "centroid_model", None)
        if not model_path:
            raise UsageError(
                f"--{role} centroid requires --centroid-model or centroid:<path>"
            )
        with open_input(model_path) as fh:
            model = load_centroid_model(fh)
        return CentroidStage(model, _vector_source(args.store, args))
    if spec.startswith("external:"):
        path = spec.partition(":")[2]
        if not path:
            raise UsageError(f"--{role} external needs a path: external:<path>")
        with open_input(path) as fh:
            predictions = load_external_predictions(fh)
        return ExternalStage(predictions, threshold=args.decision_threshold)
    raise UsageError(
        f"unknown {role} classifier {spec!r}; "
        "expected dict, centroid[:<model>], or external:<path>"
    )


def cmd_classify(args: argparse.Namespace) -> int:
    # build the classifiers before touching the input stream so flag
    # mistakes surface as usage errors, not half-consumed stdin
    if args.direct:
        spec = args.stage2 or args.stage1
        if not spec:
            raise UsageError("--direct requires --stage2 (the 5-way classifier)")
        classifier = _build_stage(spec, "stage2", args)
        snippets = _read_snippets(args.input)
        predictions = run_direct(snippets, classifier)
    else:
        if not args.stage1 or not args.stage2:
            raise UsageError("layered classification requires --stage1 and --stage2")
        stage1 = _build_stage(args.stage1, "stage1", args)
        stage2 = _build_stage(args.stage2, "stage2", args)
        snippets = _read_snippets(args.input)
        predictions = run_layered(snippets, stage1, stage2)
    _write_lines(args.output, (prediction_to_line(p) for p in predictions))
    positives = sum(1 for p in predictions if p.stage1)
    counts = {"snippets": len(snippets), "positives": positives}
    _stderr(
        f"{PROG}: classify: {len(predictions)} predictions, {positives} participation"
    )
    _emit_manifest(
        args,
        "classify",
        [args.input, args.lexicon, args.dict_model, args.centroid_model, args.store],
        [args.output],
        counts,
    )
    return 0


# ---------------------------------------------------------------- annotation


def cmd_aggregate(args: argparse.Namespace) -> int:
    with open_input(args.input) as fh:
        records = load_annotation_records(fh)
    scores = score_workers(records)
    retained = retained_workers(scores)
    aggregated, log = aggregate_majority(records, retained)
    _write_lines(args.output, (dump_record(aggregated_to_record(s)) for s in aggregated))
    if args.log:
        audit = {
            "workers": {
                worker: {
                    "controls_seen": score.controls_seen,
                    "controls_passed": score.controls_passed,
                    "pass_rate": score.pass_rate,
                    "discarded": score.discard,
                    "zero_controls": score.controls_seen == 0,
                }
                for worker, score in sorted(scores.items())
            },
            "discarded_annotations": log.discarded_annotations,
            "control_samples": log.control_samples,
            "too_few_annotators": log.too_few_annotators,
            "no_clear_majority": log.no_clear_majority,
        }
        with open_output(args.log) as fh:
            json.dump(audit, fh, indent=2, sort_keys=True)
            fh.write("\n")
    counts = {
        "annotations": len(records),
        "workers": len(scores),
        "workers_discarded": len(scores) - len(retained),
        "samples_out": len(aggregated),
        "rejected_too_few": len(log.too_few_annotators),
        "rejected_no_majority": len(log.no_clear_majority),
        "control_samples": log.control_samples,
    }
    _stderr(
        f"{PROG}: aggregate: {len(aggregated)} samples from {len(records)} "
        f"annotations; {len(scores) - len(retained)} of {len(scores)} workers discarded"
    )
    _emit_manifest(args, "aggregate", [args.input], [args.output, args.log], counts)
    return 0


def cmd_alpha(args: argparse.Namespace) -> int:
    with open_input(args.input) as fh:
        records = load_annotation_records(fh)
    value = krippendorff_alpha(records)
    print(f"alpha={value!r}")
    return 0


def cmd_extend(args: argparse.Namespace) -> int:
    anchors = _read_labeled(args.anchors)
    candidates = _read_snippets(args.candidates)
    items = [(s.comment_id, s.text) for s, _ in anchors]
    items += [(s.comment_id, s.text) for s in candidates]
    vectors = _resolve_vectors(args.store, items)
    by_thread: dict[str, list[Snippet]] = {}
    for snippet in candidates:
        by_thread.setdefault(snippet.thread_id, []).append(snippet)

    lines = []
    for anchor_snippet, label in anchors:
        thread = by_thread.get(anchor_snippet.thread_id, [])
        for snippet, propagated in extend_reddit_informed(
            (anchor_snippet, label), thread, vectors
        ):
            record = labeled_to_record(snippet, propagated)
            record["anchor_id"] = anchor_snippet.comment_id
            lines.append(dump_record(record))
    _write_lines(args.output, lines)
    counts = {"anchors": len(anchors), "candidates": len(candidates), "propagated": len(lines)}
    _stderr(
        f"{PROG}: extend: {len(lines)} propagated labels from {len(anchors)} anchors"
    )
    _emit_manifest(
        args,
        "extend",
        [args.anchors, args.candidates, args.store],
        [args.output],
        counts,
    )
    return 0


def cmd_merge_train(args: argparse.Namespace) -> int:
    variant = args.variant
    cs = _read_labeled(_require(args, "cs", "--cs"))
    synthetic: list[tuple[Snippet, ParticipationLabel]] = []
    extension: list[tuple[Snippet, ParticipationLabel]] = []
    if "Syn" in variant:
        path = _require(args, "synthetic", "--synthetic")
        with open_input(path) as fh:
            synthetic = [
                (record.snippet, record.label)
                for record in load_synthetic_records(fh)
            ]
    if variant.startswith("Ext"):
        extension = _read_labeled(_require(args, "extension", "--extension"))
    merged = merge_training_sets(cs, synthetic, extension, variant)
    _write_lines(
        args.output,
        (dump_record(labeled_to_record(s, label)) for s, label in merged.samples),
    )
    counts = {
        label.value: merged.counts.get(label, 0) for label in TIE_ORDER
    }
    counts["total"] = len(merged.samples)
    _stderr(
        f"{PROG}: merge-train {variant}: "
        + " ".join(f"{label.value}={merged.counts.get(label, 0)}" for label in TIE_ORDER)
        + f" total={len(merged.samples)}"
    )
    _emit_manifest(
        args,
        "merge-train",
        [args.cs, args.synthetic, args.extension],
        [args.output],
        counts,
    )
    return 0


# ---------------------------------------------------------------- evaluate


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold = _read_labeled(args.gold)
    with open_input(args.pred) as fh:
        predictions = load_external_predictions(fh)
    gold_names = []
    pred_names = []
    for snippet, label in gold:
        entry = predictions.get(snippet.comment_id)
        if entry is None:
            raise DataFormatError(
                f"no prediction for gold sample {snippet.comment_id!r}"
            )
        predicted = entry[0]
        if args.binary:
            gold_names.append(binary_name(label.is_participation))
            pred_names.append(binary_name(predicted.is_participation))
        else:
            gold_names.append(label.value)
            pred_names.append(predicted.value)
    conf = confusion(gold_names, pred_names)
    rep = report(conf)
    _write_lines(args.output, (dump_record(r) for r in report_to_records(rep)))
    _stderr(format_report(rep))
    counts = {
        "samples": len(gold_names),
        "macro_f1": rep.macro[2],
        "weighted_f1": rep.weighted[2],
    }
    _emit_manifest(args, "evaluate", [args.gold, args.pred], [args.output], counts)
    return 0


# ---------------------------------------------------------------- perturb


def _text_classifier(args: argparse.Namespace) -> Callable[[str], bool]:
    spec = args.stage1 or "dict"
    if spec == "dict":
        lexicon = _require_lexicon(args)
        model_path = _require(args, "dict_model", "--dict-model")
        with open_input(model_path) as fh:
            model = load_threshold_model(fh)
        return lambda text: classify_dictionary(dictionary_score(text, lexicon), model)
    if spec == "centroid" or spec.startswith("centroid:"):
        model_path = spec.partition(":")[2] or getattr(args, "centroid_model", None)
        if not model_path:
            raise UsageError(
                "--stage1 centroid requires --centroid-model or centroid:<path>"
            )
        with open_input(model_path) as fh:
            model = load_centroid_model(fh)
        dimension = args.dim or FALLBACK_DIMENSION
        _stderr(
            f"{PROG}: perturb: classifying perturbed text with fallback hash "
            f"embeddings (dimension={dimension})"
        )
        none = ParticipationLabel.NONE.value
        return lambda text: (
            classify_centroid(fallback_hash_embed(text, dimension), model)[0] != none
        )
    raise UsageError(
        "perturbation needs a text-capable classifier: dict or centroid "
        "(external prediction files cannot score perturbed text)"
    )


def cmd_perturb(args: argparse.Namespace) -> int:
    snippets = _read_snippets(args.input)
    lexicon = _require_lexicon(args)
    modes = (
        [m.strip() for m in args.modes.split(",") if m.strip()]
        if args.modes
        else list(PERTURBATION_MODES)
    )
    for mode in modes:
        if mode not in PERTURBATION_MODES:
            raise UsageError(
                f"unknown mode {mode!r}; choose from {', '.join(PERTURBATION_MODES)}"
            )
    vocabulary: list[str] = []
    if args.vocabulary:
        vocabulary = _load_vocabulary(args.vocabulary)
    elif any(m.startswith("replace") for m in modes):
        raise UsageError("replace modes need --vocabulary")
    classify_text = _text_classifier(args)
    fractions = robustness_report(
        snippets, classify_text, lexicon, modes, args.seed, vocabulary
    )
    _write_lines(
        args.output,
        (
            dump_record({"mode": mode, "fraction": fraction})
            for mode, fraction in fractions.items()
        ),
    )
    if args.emit_plot_data:
        with open_output(args.emit_plot_data) as fh:
            fh.write("mode\tfraction\n")
            for mode, fraction in fractions.items():
                fh.write(f"{mode}\t{fraction!r}\n")
    _stderr(
        f"{PROG}: perturb: "
        + " ".join(f"{mode}={fraction:.4f}" for mode, fraction in fractions.items())
    )
    _emit_manifest(
        args,
        "perturb",
        [args.input, args.lexicon, args.vocabulary, args.dict_model],
        [args.output, args.emit_plot_data],
        {mode: fraction for mode, fraction in fractions.items()},
    )
    return 0


# ---------------------------------------------------------------- analytics


def cmd_rank(args: argparse.Namespace) -> int:
    lexicon = _require_lexicon(args)
    with open_input(args.pred) as fh:
        predictions = load_external_predictions(fh)
    rows = []
    malformed = 0
    seen: set[str] = set()
    with open_input(args.comments) as fh:
        for line in fh:
            if not line.strip():
                continue
            comment = parse_comment_line(line)
            if comment is None:
                malformed += 1
                continue
            if comment.id in seen:
                malformed += 1
                continue
            seen.add(comment.id)
            has_keywords = kernels.count_matches(comment.body, lexicon.terms) >= 1
            entry = predictions.get(comment.id)
            label = entry[0] if entry else ParticipationLabel.NONE
            rows.append((comment.community, has_keywords, label))
    stats = analytics.community_stats(rows)
    rank_keyword = {
        s.community: rank
        for rank, s in analytics.rank_communities(stats, "keyword", args.min_comments)
    }
    rank_participation = {
        s.community: rank
        for rank, s in analytics.rank_communities(
            stats, "participation", args.min_comments
        )
    }
    qualifying = [s for s in stats if s.n_comments >= args.min_comments]
    spearman_value: float | None
    try:
        spearman_value = analytics.spearman(
            [s.keyword_fraction for s in qualifying],
            [s.participation_fraction for s in qualifying],
        )
    except (DegenerateInputError, DataFormatError) as exc:
        spearman_value = None
        _stderr(f"{PROG}: rank: spearman undefined: {exc}")

    def _stat_record(s: analytics.CommunityStats) -> dict[str, Any]:
        return {
            "type": "community",
            "community": s.community,
            "n_comments": s.n_comments,
            "keyword_fraction": s.keyword_fraction,
            "participation_fraction": s.participation_fraction,
            "level_fractions": {
                label.value: s.level_fractions[label] for label in TIE_ORDER
            },
            "rank_keyword": rank_keyword.get(s.community),
            "rank_participation": rank_participation.get(s.community),
        }

    lines = [dump_record(_stat_record(s)) for s in stats]
    lines.append(
        dump_record(
            {
                "type": "summary",
                "n_communities": len(stats),
                "n_ranked": len(qualifying),
                "min_comments": args.min_comments,
                "spearman": spearman_value,
            }
        )
    )
    _write_lines(args.output, lines)
    _stderr(
        f"{PROG}: rank: {len(qualifying)} of {len(stats)} communities ranked; "
        f"spearman={spearman_value!r}"
    )
    _emit_manifest(
        args,
        "rank",
        [args.comments, args.pred, args.lexicon],
        [args.output],
        {
            "communities": len(stats),
            "ranked": len(qualifying),
            "malformed": malformed,
            "spearman": spearman_value,
        },
    )
    return 0


def cmd_crosstab(args: argparse.Namespace) -> int:
    with open_input(args.pred) as fh:
        prediction_map = load_external_predictions(fh)
    predictions = [
        Prediction(
            sample_id=sample_id,
            stage1=label.is_participation,
            stage2=label if label.is_participation else None,
            scores=scores,
        )
        for sample_id, (label, scores) in prediction_map.items()
    ]
    categories: dict[str, str] = {}
    with open_input(args.categories) as fh:
        for lineno, raw in iter_records(fh):
            try:
                sample_id = raw["sample_id"]
                category = raw["category"]
            except KeyError as exc:
                raise DataFormatError(
                    f"{args.categories}: line {lineno}: missing key {exc}"
                ) from None
            if sample_id in categories:
                raise DataFormatError(
                    f"{args.categories}: line {lineno}: duplicate sample {sample_id!r}"
                )
            categories[sample_id] = category
    rows = analytics.crosstab(predictions, categories)
    _write_lines(
        args.output,
        (
            dump_record(
                {
                    "category": row.category,
                    "participation": row.participation,
                    "none": row.none,
                    "participation_fraction": row.participation_fraction,
                    "none_fraction": row.none_fraction,
                }
            )
            for row in rows
        ),
    )
    _emit_manifest(
        args,
        "crosstab",
        [args.pred, args.categories],
        [args.output],
        {"categories": len(rows), "predictions": len(predictions)},
    )
    return 0


def cmd_dims(args: argparse.Namespace) -> int:
    communities = load_embedding_store(_require(args, "store", "--store"))
    axes = load_embedding_store(args.axes)
    lines = []
    scores_by_axis: dict[str, list[tuple[str, float]]] = {}
    for axis in sorted(axes.entries):
        axis_vector = axes.entries[axis]
        for community in sorted(communities.entries):
            score = analytics.dimension_score(
                communities.entries[community], axis_vector
            )
            scores_by_axis.setdefault(axis, []).append((community, score))
            lines.append(
                dump_record(
                    {"type": "score", "community": community, "axis": axis, "score": score}
                )
            )
    if args.bins:
        stats_path = _require(args, "stats", "--stats")
        fractions: dict[str, float] = {}
        with open_input(stats_path) as fh:
            for lineno, raw in iter_records(fh):
                if raw.get("type") != "community":
                    continue
                fractions[raw["community"]] = raw["participation_fraction"]
        for axis in sorted(scores_by_axis):
            bins = analytics.quantile_bins(scores_by_axis[axis], args.bins, fractions)
            for b in bins:
                lines.append(
                    dump_record(
                        {
                            "type": "bin",
                            "axis": axis,
                            "bin_index": b.bin_index,
                            "lo": b.lo,
                            "hi": b.hi,
                            "n_communities": b.n_communities,
                            "mean_fraction": b.mean_fraction,
                        }
                    )
                )
    _write_lines(args.output, lines)
    _emit_manifest(
        args,
        "dims",
        [args.store, args.axes, getattr(args, "stats", None)],
        [args.output],
        {"communities": len(communities.entries), "axes": len(axes.entries)},
    )
    return 0


def cmd_weights(args: argparse.Namespace) -> int:
    labeled = _read_labeled(args.input)
    counts: dict[str, int] = {}
    for _, label in labeled:
        name = binary_name(label.is_participation) if args.binary else label.value
        counts[name] = counts.get(name, 0) + 1
    weights = class_weights(counts)
    order = [l.value for l in TIE_ORDER] + ["participation"]
    names = [n for n in order if n in counts]
    _write_lines(
        args.output,
        (
            dump_record({"label": name, "count": counts[name], "weight": weights[name]})
            for name in names
        ),
    )
    _stderr(
        f"{PROG}: weights: "
        + " ".join(f"{name}={weights[name]:.4f}" for name in names)
    )
    _emit_manifest(
        args,
        "weights",
        [args.input],
        [args.output],
        {"samples": len(labeled), "classes": len(names)},
    )
    return 0


# ---------------------------------------------------------------- parser


def _build_parser() -> tuple[_Parser, dict[str, OptionRegistry]]:
    parser = _Parser(
        prog=PROG,
        description=(
            "Extract, classify, and analyze expressions of participation in "
            "collective action from social-media comments."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
    registries: dict[str, OptionRegistry] = {}

    def sub(name: str, func, help_text: str) -> tuple[argparse.ArgumentParser, OptionRegistry]:
        p = subparsers.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="key=value config file (or CA_HARVEST_CONFIG)")
        p.add_argument("--manifest", help="manifest path (default <output>.manifest.json)")
        registry = OptionRegistry()
        registries[name] = registry
        return p, registry

    def io_opts(p, registry, input_help="input records ('-' = stdin)"):
        registry.add(p, "--input", "-i", default="-", help=input_help)
        registry.add(p, "--output", "-o", default="-", help="output path ('-' = stdout)")

    p, r = sub("ingest", cmd_ingest, "parse comments, apply the retention gate, emit snippets")
    io_opts(p, r, "comment records ('-' = stdin)")
    r.add(p, "--lexicon", help="lexicon file, one term per line")
    r.add(p, "--threads", type=int, default=0, help="worker processes (default: all cores)")

    p, r = sub("dedup", cmd_dedup, "greedy near-duplicate filter over snippets")
    io_opts(p, r, "snippet records")
    r.add(p, "--store", help="embedding store path, or fallback[:<dim>]")
    r.add(p, "--threshold", type=float, default=0.95, help="cosine threshold (drop above)")

    p, r = sub("tune-dict", cmd_tune_dict, "tune the dictionary threshold on labeled snippets")
    r.add(p, "--input", "-i", default="-", help="labeled snippet records")
    r.add(p, "--lexicon", help="lexicon file")
    r.add(p, "--model-out", dest="model_out", default="-", help="threshold model output")

    p, r = sub("centroid-train", cmd_centroid_train, "compute class centroids from labeled snippets")
    r.add(p, "--input", "-i", default="-", help="labeled snippet records")
    r.add(p, "--store", help="embedding store path, or fallback[:<dim>]")
    r.add(p, "--model-out", dest="model_out", default="-", help="centroid model output")
    p.add_argument("--binary", action="store_true", help="collapse labels to participation/none")

    p, r = sub("classify", cmd_classify, "layered (or direct) classification of snippets")
    io_opts(p, r, "snippet records")
    r.add(p, "--stage1", help="dict | centroid[:<model>] | external:<path>")
    r.add(p, "--stage2", help="centroid[:<model>] | external:<path>")
    r.add(p, "--lexicon", help="lexicon file (for dict)")
    r.add(p, "--dict-model", dest="dict_model", help="threshold model file (for dict)")
    r.add(p, "--centroid-model", dest="centroid_model", help="centroid model file")
    r.add(p, "--store", help="embedding store path, or fallback[:<dim>]")
    r.add(
        p,
        "--threshold",
        dest="decision_threshold",
        type=float,
        default=0.5,
        help="score threshold for external stage-1 'participation' scores",
    )
    p.add_argument("--direct", action="store_true", help="single-stage 5-way classification")

    p, r = sub("aggregate", cmd_aggregate, "crowdsourcing QC and majority aggregation")
    io_opts(p, r, "annotation records")
    r.add(p, "--log", help="write the audit/rejection log (JSON) here")

    p, r = sub("alpha", cmd_alpha, "Krippendorff's alpha over annotation records")
    r.add(p, "--input", "-i", default="-", help="annotation records")

    p, r = sub("extend", cmd_extend, "Reddit-informed label propagation within threads")
    r.add(p, "--anchors", help="labeled snippet records (the seed labels)")
    r.add(p, "--candidates", help="snippet records forming the thread pool")
    r.add(p, "--store", help="embedding store path, or fallback[:<dim>]")
    r.add(p, "--output", "-o", default="-", help="output path")

    p, r = sub("merge-train", cmd_merge_train, "assemble one training-set variant")
    r.add(p, "--cs", help="crowdsourced labeled records")
    r.add(p, "--synthetic", help="synthetic candidate records (validity-flagged)")
    r.add(p, "--extension", help="Reddit-informed extension records")
    p.add_argument("--variant", choices=VARIANTS, required=True)
    r.add(p, "--output", "-o", default="-", help="output path")

    p, r = sub("evaluate", cmd_evaluate, "precision/recall/F1 report against gold labels")
    r.add(p, "--gold", help="labeled snippet records")
    r.add(p, "--pred", help="prediction records")
    r.add(p, "--output", "-o", default="-", help="machine-readable report records")
    p.add_argument("--binary", action="store_true", help="evaluate the binary view")

    p, r = sub("perturb", cmd_perturb, "keyword-ablation robustness report")
    io_opts(p, r, "snippet records")
    r.add(p, "--lexicon", help="lexicon file")
    r.add(p, "--vocabulary", help="replacement token file (for replace modes)")
    r.add(p, "--modes", help=f"comma list of {','.join(PERTURBATION_MODES)} (default all)")
    r.add(p, "--seed", type=int, default=0, help="perturbation seed")
    r.add(p, "--stage1", help="dict | centroid[:<model>] (text-capable classifiers only)")
    r.add(p, "--dict-model", dest="dict_model", help="threshold model file")
    r.add(p, "--centroid-model", dest="centroid_model", help="centroid model file")
    r.add(p, "--dim", type=int, default=0, help="fallback embedding dimension for centroid")
    r.add(p, "--emit-plot-data", dest="emit_plot_data", help="write mode/fraction TSV here")

    p, r = sub("rank", cmd_rank, "community participation rankings and their correlation")
    r.add(p, "--comments", default="-", help="raw comment records")
    r.add(p, "--pred", help="prediction records keyed by comment id")
    r.add(p, "--lexicon", help="lexicon file")
    r.add(p, "--min-comments", dest="min_comments", type=int, default=analytics.DEFAULT_MIN_COMMENTS)
    r.add(p, "--output", "-o", default="-", help="output path")

    p, r = sub("crosstab", cmd_crosstab, "participation by external category (stance, topic)")
    r.add(p, "--pred", help="prediction records")
    r.add(p, "--categories", help="records with sample_id and category")
    r.add(p, "--output", "-o", default="-", help="output path")

    p, r = sub("dims", cmd_dims, "sociodemographic axis scores (and quantile bins)")
    r.add(p, "--store", help="community vector store (CAES)")
    r.add(p, "--axes", help="axis vector store (CAES)")
    r.add(p, "--bins", type=int, default=0, help="quantile bin count (0 = skip binning)")
    r.add(p, "--stats", help="rank output records supplying participation fractions")
    r.add(p, "--output", "-o", default="-", help="output path")

    p, r = sub("weights", cmd_weights, "class weights for external trainers")
    r.add(p, "--input", "-i", default="-", help="labeled snippet records")
    r.add(p, "--output", "-o", default="-", help="output path")
    p.add_argument("--binary", action="store_true", help="collapse labels to participation/none")

    return parser, registries


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, registries = _build_parser()
    if not argv:
        parser.print_help(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return 1
    try:
        config_path = args.config or find_config_path(argv)
        config = load_config_file(config_path) if config_path else {}
        registries[args.command].resolve(args, config)
        return args.func(args)
    except UsageError as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except HarvestError as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
