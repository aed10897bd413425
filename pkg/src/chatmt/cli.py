"""Command-line entry point for all pipeline stages.

Exit codes: 0 success, 1 usage/config error, 2 data error (with record
locus), 3 internal invariant violation. Outputs are written atomically
(temp file in the destination directory, then rename), so an
interrupted run never leaves a partial file at the target path.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Iterable

from . import __version__
from .corpus import (
    BitextPair,
    CorpusError,
    ParseStats,
    parse_bitext,
    parse_chat,
    write_bitext,
)
from .chatprep import (
    ContextConfig,
    MIXED_LANGUAGE,
    SAME_LANGUAGE,
    TagError,
    prepare_chat_corpus,
)
from .denoise import DenoiseConfig, DenoiseFormatError, denoise_corpus
from .ensemble import ScoreSet, select_ensemble
from .filtering import FilterConfig, filter_corpus
from .attention import kernels_selfcheck

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of calling sys.exit(2)."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _atomic_write_lines(path: str | Path, lines: Iterable[str]) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_json(path: str | Path, obj) -> None:
    _atomic_write_lines(path, [json.dumps(obj, ensure_ascii=False, indent=2) + "\n"])


def _read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8", errors="strict") as fh:
        return fh.readlines()


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "jsonl" if str(path).endswith((".jsonl", ".json")) else "tsv"


def _emit_report(report: dict, report_path: str | None) -> None:
    if report_path:
        _atomic_write_json(report_path, report)
    else:
        print(json.dumps(report, ensure_ascii=False), file=sys.stderr)


def _require_input(path: str) -> None:
    if not os.path.exists(path):
        raise UsageError(f"input path does not exist: {path}")


# ---------------------------------------------------------------- filter

def _run_filter(args) -> dict:
    _require_input(args.infile)
    cfg = FilterConfig(
        max_sentence_words=args.max_words,
        max_word_chars=args.max_word_chars,
        max_ratio=args.max_ratio,
    )
    in_fmt = _infer_format(args.infile, args.in_format)
    out_fmt = _infer_format(args.outfile, args.out_format)
    stats = ParseStats()
    on_error = "skip" if args.fail_mode == "skip_and_count" else "raise"
    pairs = parse_bitext(_read_lines(args.infile), in_fmt, on_error, stats)
    started = time.monotonic()
    kept, report = filter_corpus(pairs, cfg)
    _atomic_write_lines(args.outfile, write_bitext(kept, out_fmt))
    return {
        "command": "filter",
        "config": {
            "max_words": cfg.max_sentence_words,
            "max_word_chars": cfg.max_word_chars,
            "max_ratio": cfg.max_ratio,
            "fail_mode": args.fail_mode,
        },
        "parse_skipped": stats.skipped,
        "seconds": round(time.monotonic() - started, 6),
        **report.as_dict(),
    }


# -------------------------------------------------------------- chatprep

def _run_chatprep(args) -> dict:
    _require_input(args.infile)
    cfg = ContextConfig(
        n_prev=args.n_prev,
        mode=SAME_LANGUAGE if args.mode == "same" else MIXED_LANGUAGE,
        speaker_tags=args.speaker_tags == "on",
    )
    out_fmt = _infer_format(args.outfile, args.out_format)
    started = time.monotonic()
    dialogues = parse_chat(_read_lines(args.infile))
    pairs = list(prepare_chat_corpus(dialogues, cfg))
    _atomic_write_lines(args.outfile, write_bitext(pairs, out_fmt))
    return {
        "command": "chatprep",
        "config": {
            "n_prev": cfg.n_prev,
            "mode": cfg.mode,
            "speaker_tags": cfg.speaker_tags,
        },
        "dialogues": len(dialogues),
        "pairs": len(pairs),
        "seconds": round(time.monotonic() - started, 6),
    }


# --------------------------------------------------------------- denoise

def _load_denoise_input(path: str, fmt: str):
    pairs: list[BitextPair] = []
    spans: list[tuple[int, int] | None] = []
    extra: list[dict] = []
    if fmt == "tsv":
        for pair in parse_bitext(_read_lines(path), "tsv"):
            pairs.append(pair)
            spans.append(None)
            extra.append({})
        return pairs, spans, extra
    for lineno, raw in enumerate(_read_lines(path), start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"invalid JSON: {exc}", lineno) from exc
        pairs.append(
            BitextPair(
                source=obj["source"],
                target=obj["target"],
                origin=obj.get("origin", "genuine"),
            )
        )
        span = obj.get("target_payload_span")
        spans.append(tuple(span) if span is not None else None)
        extra.append(
            {"target_payload_span": span} if span is not None else {}
        )
    return pairs, spans, extra


def _run_denoise(args) -> dict:
    _require_input(args.infile)
    cfg = DenoiseConfig(
        pair_fraction=args.pair_fraction,
        token_replace_prob=args.token_prob,
        seed=args.seed,
    )
    fmt = _infer_format(args.infile, args.in_format)
    out_fmt = _infer_format(args.outfile, args.out_format) if args.outfile else fmt
    started = time.monotonic()
    pairs, spans, extra = _load_denoise_input(args.infile, fmt)
    noised = denoise_corpus(pairs, cfg, spans)
    if out_fmt == "tsv":
        _atomic_write_lines(args.outfile, write_bitext(noised, "tsv"))
    else:
        lines = []
        for pair, meta in zip(noised, extra):
            obj = {"source": pair.source, "target": pair.target, "origin": pair.origin}
            obj.update(meta)
            lines.append(json.dumps(obj, ensure_ascii=False) + "\n")
        _atomic_write_lines(args.outfile, lines)
    changed = sum(1 for a, b in zip(pairs, noised) if a.target != b.target)
    return {
        "command": "denoise",
        "config": {
            "seed": cfg.seed,
            "pair_fraction": cfg.pair_fraction,
            "token_prob": cfg.token_replace_prob,
        },
        "pairs": len(pairs),
        "chosen": len(pairs) and int(cfg.pair_fraction * len(pairs) + 1e-9),
        "changed_targets": changed,
        "seconds": round(time.monotonic() - started, 6),
    }


# ----------------------------------------------------------- bsce-select

def _run_bsce(args) -> dict:
    _require_input(args.scores)
    with open(args.scores, encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        score_set = ScoreSet.from_lists(obj["models"], obj["comet"], obj["pairwise"])
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"bad scores file: {exc}") from exc
    if not 1 <= args.ensemble_size <= score_set.n:
        raise UsageError(
            f"--ensemble-size must be in 1..{score_set.n}, got {args.ensemble_size}"
        )
    started = time.monotonic()
    selection = select_ensemble(score_set, args.ensemble_size)
    out = selection.as_dict()
    if args.outfile:
        _atomic_write_json(args.outfile, out)
    else:
        print(json.dumps(out, ensure_ascii=False, indent=2))
    return {
        "command": "bsce-select",
        "config": {"ensemble_size": args.ensemble_size},
        "candidates": score_set.n,
        "selected": out["selected"],
        "seconds": round(time.monotonic() - started, 6),
    }


# --------------------------------------------------------- kernels-check

def _run_kernels_check(args) -> dict:
    deviations = kernels_selfcheck(seed=args.seed)
    for name, dev in deviations.items():
        print(f"{name}: max abs deviation {dev:.3e}")
    worst = max(deviations.values())
    if worst > 1e-9:
        raise AssertionError(f"kernel self-check deviation {worst:.3e} > 1e-9")
    return {"command": "kernels-check", "deviations": deviations}


# -------------------------------------------------------------- pipeline

def _run_pipeline(args) -> dict:
    _require_input(args.config)
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)

    filter_cfg = cfg.get("filter", {})
    chat_cfg = cfg.get("chatprep", {})
    den_cfg = cfg.get("denoise", {})
    for stage, c, key in (
        ("filter", filter_cfg, "input"),
        ("chatprep", chat_cfg, "input"),
    ):
        if key not in c:
            raise UsageError(f"pipeline config: {stage}.{key} missing")
        _require_input(c[key])
    for stage, c in (("filter", filter_cfg), ("chatprep", chat_cfg), ("denoise", den_cfg)):
        if "output" not in c:
            raise UsageError(f"pipeline config: {stage}.output missing")

    ns = argparse.Namespace
    reports = []
    reports.append(
        _run_filter(
            ns(
                infile=filter_cfg["input"],
                outfile=filter_cfg["output"],
                in_format=filter_cfg.get("format"),
                out_format=filter_cfg.get("format"),
                max_words=filter_cfg.get("max_words", 100),
                max_word_chars=filter_cfg.get("max_word_chars", 40),
                max_ratio=filter_cfg.get("max_ratio", 4.0),
                fail_mode=cfg.get("fail_mode", "fail_fast"),
            )
        )
    )
    reports.append(
        _run_chatprep(
            ns(
                infile=chat_cfg["input"],
                outfile=chat_cfg["output"],
                out_format=chat_cfg.get("format"),
                n_prev=chat_cfg.get("n_prev", 2),
                mode=chat_cfg.get("mode", "same"),
                speaker_tags="on" if chat_cfg.get("speaker_tags", True) else "off",
            )
        )
    )
    reports.append(
        _run_denoise(
            ns(
                infile=den_cfg.get("input", chat_cfg["output"]),
                outfile=den_cfg["output"],
                in_format=den_cfg.get("format"),
                out_format=den_cfg.get("format"),
                seed=den_cfg.get("seed", cfg.get("seed", 0)),
                pair_fraction=den_cfg.get("pair_fraction", 0.30),
                token_prob=den_cfg.get("token_prob", 0.15),
            )
        )
    )
    return {"command": "pipeline", "config_path": args.config, "stages": reports}


# ----------------------------------------------------------------- main

def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="chatmt", description=__doc__)
    parser.add_argument("--version", action="version", version=f"chatmt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", default=None, help="write the run report here")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker count; never affects output bytes")

    p = sub.add_parser("filter", help="apply the corpus filtering rules")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--in-format", choices=("tsv", "jsonl"), default=None)
    p.add_argument("--out-format", choices=("tsv", "jsonl"), default=None)
    p.add_argument("--max-words", type=int, default=100)
    p.add_argument("--max-word-chars", type=int, default=40)
    p.add_argument("--max-ratio", type=float, default=4.0)
    p.add_argument("--fail-mode", choices=("fail_fast", "skip_and_count"),
                   default="fail_fast")
    common(p)
    p.set_defaults(func=_run_filter)

    p = sub.add_parser("chatprep", help="build the speaker/context corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--out-format", choices=("tsv", "jsonl"), default=None)
    p.add_argument("--n-prev", type=int, choices=(0, 1, 2, 3), default=2)
    p.add_argument("--mode", choices=("same", "mixed"), default="same")
    p.add_argument("--speaker-tags", choices=("on", "off"), default="on")
    common(p)
    p.set_defaults(func=_run_chatprep)

    p = sub.add_parser("denoise", help="generate the target-denoised corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--in-format", choices=("tsv", "jsonl"), default=None)
    p.add_argument("--out-format", choices=("tsv", "jsonl"), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pair-fraction", type=float, default=0.30)
    p.add_argument("--token-prob", type=float, default=0.15)
    common(p)
    p.set_defaults(func=_run_denoise)

    p = sub.add_parser("bsce-select", help="greedy diversity-aware ensemble selection")
    p.add_argument("--scores", required=True)
    p.add_argument("--ensemble-size", type=int, required=True)
    p.add_argument("--out", dest="outfile", default=None)
    common(p)
    p.set_defaults(func=_run_bsce)

    p = sub.add_parser("kernels-check", help="run the attention kernel self-checks")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=_run_kernels_check)

    p = sub.add_parser("pipeline", help="run filter, chatprep, denoise in order")
    p.add_argument("config", help="pipeline config (JSON)")
    common(p)
    p.set_defaults(func=_run_pipeline)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        report = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ValueError,) as exc:
        if isinstance(exc, (CorpusError, TagError, DenoiseFormatError)):
            print(f"data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _emit_report(report, getattr(args, "report", None))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
