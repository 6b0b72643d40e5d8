"""Command line interface.

Subcommands: stats, segment, evaluate, grid-search, validate, partition.
Exit codes: 0 on success, 1 on validation or metric failure conditions,
2 on usage and I/O errors. Every file an invocation writes gets a sibling
``<file>.manifest.json`` recording the command, resolved configuration,
input digests, tool version, and timestamp, so runs can be reproduced and
compared byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shlex
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__
from .corpus import (
    ErCorpus,
    compute_stats,
    filter_noise,
    load_corpus,
    partition,
    save_corpus,
)
from .errors import ErsegError, MetricError, ScorerError
from .metrics import (
    DEFAULT_MARKER,
    SegmentedText,
    break_f1,
    evaluate_corpus,
    validate_hypothesis,
    window_profile,
)
from .scorers import (
    DEFAULT_TIMEOUT_SECS,
    FileScorer,
    SidecarSession,
    SubprocessScorer,
)
from .segmenter import GapScores, SegmentationConfig, segment_corpus
from .sentence import Sentence
from .trees import TreeScorer, load_tree_file

TIMEOUT_ENV = "ERSEG_SIDECAR_TIMEOUT_SECS"


# -- manifests ---------------------------------------------------------------


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """What produced an output file, pinned down enough to rerun it."""

    command: list[str]
    config: dict
    inputs: dict[str, str]
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(
            timespec="seconds"
        )
    )
    outputs: list[str] = field(default_factory=list)

    def write_for(self, out_path: str) -> str:
        manifest_path = out_path + ".manifest.json"
        if out_path not in self.outputs:
            self.outputs.append(out_path)
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(self.__dict__, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
        return manifest_path


def _manifest(args: argparse.Namespace, config: dict, inputs: list[str]) -> RunManifest:
    return RunManifest(
        command=["erseg"] + (args._argv or []),
        config=config,
        inputs={p: _sha256(p) for p in inputs},
    )


# -- shared helpers ----------------------------------------------------------


def _sidecar_timeout() -> float:
    raw = os.environ.get(TIMEOUT_ENV)
    if raw is None:
        return DEFAULT_TIMEOUT_SECS
    try:
        value = float(raw)
    except ValueError:
        raise ErsegError(f"{TIMEOUT_ENV} must be a number, got {raw!r}")
    if value <= 0:
        raise ErsegError(f"{TIMEOUT_ENV} must be positive")
    return value


@contextmanager
def open_scorer(spec: str):
    """Resolve a scorer spec: tree:<file>, file:<file>, subprocess:<command>."""
    kind, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise ErsegError(
            f"bad scorer spec {spec!r}; expected tree:<file>, file:<file>, "
            "or subprocess:<command>"
        )
    if kind == "tree":
        yield TreeScorer(load_tree_file(arg))
    elif kind == "file":
        yield FileScorer.from_path(arg)
    elif kind == "subprocess":
        session = SidecarSession(shlex.split(arg), timeout=_sidecar_timeout())
        try:
            yield SubprocessScorer(session)
        finally:
            session.close()
    else:
        raise ErsegError(f"unknown scorer kind {kind!r} in {spec!r}")


class _CachingScorer:
    """Score each sentence once and replay the result (or failure)."""

    def __init__(self, inner):
        self.inner = inner
        self._cache: dict[str, GapScores | ScorerError] = {}

    def score(self, sid: str, sentence: Sentence) -> GapScores:
        hit = self._cache.get(sid)
        if hit is None:
            try:
                hit = self.inner.score(sid, sentence)
            except ScorerError as exc:
                hit = exc
            self._cache[sid] = hit
        if isinstance(hit, ScorerError):
            raise hit
        return hit


def _read_plain_sentences(path: str, marker: str) -> list[Sentence]:
    """Read one sentence per line, dropping any break markers already there."""
    sentences: list[Sentence] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = [t for t in line.split() if t != marker]
            if not tokens:
                raise ErsegError(f"{path}:{lineno}: empty sentence")
            sentences.append(Sentence.from_raw(" ".join(tokens)))
    if not sentences:
        raise ErsegError(f"{path}: empty input")
    return sentences


def _config_from_args(args: argparse.Namespace) -> SegmentationConfig:
    try:
        return SegmentationConfig(
            min_words=args.min_words,
            max_words=args.max_words,
            beam_width=args.beam,
            penalty=args.penalty,
        )
    except ValueError as exc:
        raise ErsegError(str(exc))


def _results_to_segmented(results) -> list[SegmentedText]:
    return [
        SegmentedText(r.sentence.tokens, r.path.break_gaps) for r in results
    ]


def _emit(text: str, out: str | None, manifest: RunManifest | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        if manifest is not None:
            manifest.write_for(out)
    else:
        sys.stdout.write(text)


def _table(rows: list[tuple[str, object]]) -> str:
    width = max(len(label) for label, _ in rows)
    lines = []
    for label, value in rows:
        if isinstance(value, float):
            value = f"{value:.2f}"
        lines.append(f"{label.ljust(width)}  {value}")
    return "\n".join(lines) + "\n"


def _fmt_null(value: float | None) -> object:
    return "-" if value is None else value


# -- subcommands -------------------------------------------------------------


def cmd_stats(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, marker=args.marker)
    removed = None
    if args.filter_noise:
        corpus, removed = filter_noise(corpus)
    stats = compute_stats(corpus)
    payload = stats.to_dict()
    if removed is not None:
        payload["noise_removed"] = removed
    manifest = _manifest(args, {"marker": args.marker, "filter_noise": args.filter_noise},
                         [args.corpus])
    if args.format == "json":
        if args.out:
            payload["manifest"] = args.out + ".manifest.json"
        text = json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
    else:
        rows = [
            ("sentences", stats.n_sentences),
            ("breaks", stats.n_breaks),
            ("% breaks", stats.pct_with_breaks),
            ("sentences w/o seg", stats.n_unsegmented),
            ("avg len w/o seg", _fmt_null(stats.avg_len_unsegmented)),
            ("sentences w/ seg", stats.n_segmented),
            ("avg breaks w/ seg", _fmt_null(stats.avg_breaks_segmented)),
            ("avg sent len w/ seg", _fmt_null(stats.avg_sent_len_segmented)),
            ("avg seg len", _fmt_null(stats.avg_seg_len)),
        ]
        if removed is not None:
            rows.append(("noise removed", removed))
        text = _table(rows)
    _emit(text, args.out, manifest)
    return 0


def _run_segmentation(args, sentences, config):
    with open_scorer(args.scorer) as scorer:
        return segment_corpus(sentences, scorer, config, jobs=args.jobs)


def cmd_segment(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    sentences = _read_plain_sentences(args.input, args.marker)
    results = _run_segmentation(args, sentences, config)

    if args.format == "json":
        lines = []
        for i, res in enumerate(results, start=1):
            lines.append(
                json.dumps(
                    {
                        "id": str(i),
                        "text": res.path.to_marker_text(res.sentence, args.marker),
                        "path_score": res.path.path_score,
                        "segments": [list(s) for s in res.path.segments],
                        "error": res.error,
                    },
                    ensure_ascii=False,
                )
            )
        text = "\n".join(lines) + "\n"
    else:
        text = (
            "\n".join(
                res.path.to_marker_text(res.sentence, args.marker)
                for res in results
            )
            + "\n"
        )
    manifest = _manifest(
        args,
        {
            "scorer": args.scorer,
            "min_words": config.min_words,
            "max_words": config.max_words,
            "beam_width": config.beam_width,
            "penalty": config.penalty,
            "marker": args.marker,
            "jobs": args.jobs,
        },
        [args.input],
    )
    _emit(text, args.out, manifest)

    failures = [(i, r.error) for i, r in enumerate(results, start=1) if r.error]
    for i, err in failures:
        print(f"sentence {i}: {err}", file=sys.stderr)
    if failures:
        print(
            f"{len(failures)} of {len(results)} sentences were not scored and "
            "were emitted unsegmented",
            file=sys.stderr,
        )
        return 1
    return 0


def _eval_payload(args, hyps: ErCorpus, refs: ErCorpus) -> dict:
    report = evaluate_corpus(list(hyps), list(refs), marker=args.marker)
    payload = report.to_dict()
    if args.min_words is not None and args.max_words is not None:
        profile = window_profile(list(refs), args.min_words, args.max_words)
        payload["window"] = {
            "min_words": args.min_words,
            "max_words": args.max_words,
            "ref_segments": profile.n_segments,
            "frac_under_min": profile.frac_under,
            "frac_over_max": profile.frac_over,
        }
    return payload


def cmd_evaluate(args: argparse.Namespace) -> int:
    hyps = load_corpus(args.hypothesis, marker=args.marker)
    refs = load_corpus(args.reference, marker=args.marker)
    payload = _eval_payload(args, hyps, refs)
    manifest = _manifest(args, {"marker": args.marker},
                         [args.hypothesis, args.reference])
    if args.format == "json":
        if args.out:
            payload["manifest"] = args.out + ".manifest.json"
        text = json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
    else:
        altered = sum(1 for p in payload["per_sentence"] if not p["preserved"])
        rows = [
            ("Sigma", payload["sigma"]),
            ("BLEU (no breaks)", payload["bleu_nb"]),
            ("F1", payload["f1"]),
            ("precision", payload["precision"]),
            ("recall", payload["recall"]),
            ("BLEU (with breaks)", payload["bleu_br"]),
            ("altered sentences", altered),
        ]
        if "window" in payload:
            win = payload["window"]
            rows.append(
                (
                    f"ref segments < {win['min_words']} words",
                    f"{100 * win['frac_under_min']:.2f}%",
                )
            )
            rows.append(
                (
                    f"ref segments > {win['max_words']} words",
                    f"{100 * win['frac_over_max']:.2f}%",
                )
            )
        text = _table(rows)
    _emit(text, args.out, manifest)
    return 0


def cmd_grid_search(args: argparse.Namespace) -> int:
    lo_min, hi_min = _parse_range(args.min_range)
    lo_max, hi_max = _parse_range(args.max_range)
    refs = load_corpus(args.corpus, marker=args.marker)
    sentences = [Sentence.from_raw(" ".join(e.words)) for e in refs.entries]

    cells: list[dict] = []
    best: dict | None = None
    with open_scorer(args.scorer) as scorer:
        cached = _CachingScorer(scorer)
        for mn in range(lo_min, hi_min + 1):
            for mx in range(lo_max, hi_max + 1):
                if mx < mn:
                    continue
                config = SegmentationConfig(
                    min_words=mn,
                    max_words=mx,
                    beam_width=args.beam,
                    penalty=args.penalty,
                )
                results = segment_corpus(sentences, cached, config, jobs=args.jobs)
                hyps = _results_to_segmented(results)
                score = break_f1(hyps, list(refs)).f1
                profile = window_profile(list(refs), mn, mx)
                cell = {
                    "min_words": mn,
                    "max_words": mx,
                    "f1": score,
                    "frac_under_min": profile.frac_under,
                    "frac_over_max": profile.frac_over,
                }
                cells.append(cell)
                if best is None or score > best["f1"]:
                    best = cell
    if not cells:
        raise ErsegError("empty grid: no cell satisfies min_words <= max_words")

    payload = {"cells": cells, "best": best}
    manifest = _manifest(
        args,
        {
            "scorer": args.scorer,
            "min_range": args.min_range,
            "max_range": args.max_range,
            "beam_width": args.beam,
            "penalty": args.penalty,
            "marker": args.marker,
        },
        [args.corpus],
    )
    if args.format == "json":
        if args.out:
            payload["manifest"] = args.out + ".manifest.json"
        text = json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
    else:
        lines = ["min  max  f1      under%  over%"]
        for c in cells:
            lines.append(
                f"{c['min_words']:<4d} {c['max_words']:<4d} "
                f"{c['f1']:<7.2f} {100 * c['frac_under_min']:<7.2f} "
                f"{100 * c['frac_over_max']:.2f}"
            )
        lines.append(
            f"best: min_words={best['min_words']} max_words={best['max_words']} "
            f"f1={best['f1']:.2f}"
        )
        text = "\n".join(lines) + "\n"
    _emit(text, args.out, manifest)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    hyps = load_corpus(args.hypothesis, marker=args.marker)
    srcs = _read_plain_sentences(args.source, args.marker)
    if len(hyps) != len(srcs):
        raise ErsegError(
            f"hypothesis has {len(hyps)} sentences, source has {len(srcs)}"
        )
    records = []
    for k, (hyp, src) in enumerate(zip(hyps.entries, srcs), start=1):
        res = validate_hypothesis(hyp, src.tokens)
        records.append(
            {
                "index": k,
                "preserved": res.preserved,
                "bleu_nb": res.bleu_nb,
                "diff": [list(d) for d in res.diff],
            }
        )
    altered = [r for r in records if not r["preserved"]]
    if args.format == "json":
        text = (
            json.dumps(
                {"sentences": records, "altered": len(altered)},
                ensure_ascii=False,
                indent=2,
            )
            + "\n"
        )
    else:
        lines = []
        for r in altered:
            edits = " ".join(f"{op}{tok}" for op, tok in r["diff"])
            lines.append(
                f"line {r['index']}: altered (bleu_nb {r['bleu_nb']:.2f}) {edits}"
            )
        lines.append(f"{len(records) - len(altered)}/{len(records)} preserved")
        text = "\n".join(lines) + "\n"
    manifest = _manifest(args, {"marker": args.marker},
                         [args.hypothesis, args.source])
    _emit(text, args.out, manifest)
    return 1 if altered else 0


def cmd_partition(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, marker=args.marker)
    removed = 0
    if args.filter_noise:
        corpus, removed = filter_noise(corpus)
    try:
        parts = partition(corpus, dev_size=args.dev, test_size=args.test,
                          seed=args.seed)
    except ValueError as exc:
        raise ErsegError(str(exc))
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.corpus))[0]
    manifest = _manifest(
        args,
        {
            "dev": args.dev,
            "test": args.test,
            "seed": args.seed,
            "marker": args.marker,
            "filter_noise": args.filter_noise,
        },
        [args.corpus],
    )
    for name, part in (("train", parts.train), ("dev", parts.dev),
                       ("test", parts.test)):
        path = os.path.join(args.out_dir, f"{stem}.{name}.txt")
        save_corpus(part, path, marker=args.marker)
        manifest.write_for(path)
        print(f"{name}: {len(part)} sentences -> {path}")
    if args.filter_noise:
        print(f"noise filter removed {removed} sentences")
    return 0


# -- argument parsing --------------------------------------------------------


def _parse_range(spec: str) -> tuple[int, int]:
    try:
        lo_s, hi_s = spec.split(":")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise ErsegError(f"bad range {spec!r}; expected LO:HI")
    if lo < 1 or hi < lo:
        raise ErsegError(f"bad range {spec!r}; need 1 <= LO <= HI")
    return lo, hi


def _add_window_flags(p: argparse.ArgumentParser, with_defaults: bool = True) -> None:
    kw = {"default": 5} if with_defaults else {"default": None}
    p.add_argument("--min-words", type=int, help="smallest segment size", **kw)
    kw = {"default": 15} if with_defaults else {"default": None}
    p.add_argument("--max-words", type=int, help="largest segment size", **kw)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--marker", default=DEFAULT_MARKER, help="break marker token")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, help="write output to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erseg",
        description="Segment sentences into Easy-Read lines and evaluate the result.",
    )
    parser.add_argument("--version", action="version", version=f"erseg {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("stats", help="corpus segmentation statistics")
    p.add_argument("corpus")
    p.add_argument("--filter-noise", action="store_true",
                   help="drop sentences with stranded final punctuation first")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("segment", help="segment plain sentences, one per line")
    p.add_argument("input")
    p.add_argument("--scorer", required=True,
                   help="tree:<file>, file:<file>, or subprocess:<command>")
    _add_window_flags(p)
    p.add_argument("--beam", type=int, default=5, help="beam width")
    p.add_argument("--penalty", type=float, default=0.0,
                   help="score of a forced under-window final segment")
    p.add_argument("--jobs", type=int, default=1, help="parallel scoring threads")
    _add_common(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score a hypothesis against a reference")
    p.add_argument("hypothesis")
    p.add_argument("reference")
    _add_window_flags(p, with_defaults=False)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("grid-search", help="sweep segment-size windows")
    p.add_argument("corpus", help="reference corpus with break markers")
    p.add_argument("--scorer", required=True)
    p.add_argument("--min-range", required=True, help="LO:HI for min_words")
    p.add_argument("--max-range", required=True, help="LO:HI for max_words")
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--penalty", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_grid_search)

    p = sub.add_parser("validate", help="check hypotheses only moved breaks")
    p.add_argument("hypothesis")
    p.add_argument("source", help="original sentences, one per line")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("partition", help="seeded train/dev/test split")
    p.add_argument("corpus")
    p.add_argument("--dev", type=int, required=True)
    p.add_argument("--test", type=int, required=True)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--filter-noise", action="store_true")
    p.add_argument("--marker", default=DEFAULT_MARKER)
    p.set_defaults(func=cmd_partition)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = list(argv)
    try:
        return args.func(args)
    except MetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ErsegError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
