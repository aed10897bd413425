"""Corpus filtering: punctuation normalization, length, dedup, and ratio rules.

Rules run in a fixed order (normalize, length, dedup, ratio) and each
dropped pair is attributed to the first rule that rejects it, so the
report always satisfies input_count == kept_count + sum(drops).

All "exceeds" thresholds are strict: a 100-word sentence, a 40-char
word, and an exact 4:1 ratio are all kept.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .corpus import BitextPair

RULE_NORMALIZE = "normalize"
RULE_LENGTH = "length"
RULE_DEDUP = "dedup"
RULE_RATIO = "ratio"
ALL_RULES = frozenset({RULE_NORMALIZE, RULE_LENGTH, RULE_DEDUP, RULE_RATIO})
# Rules that can drop a pair, in application order.
DROP_RULES = (RULE_LENGTH, RULE_DEDUP, RULE_RATIO)

# Pinned normalization mapping: curly quotes, guillemets, dashes,
# ellipsis, and exotic spaces, applied bit-exact and idempotent.
_CHAR_MAP = {
    0x201C: '"', 0x201D: '"', 0x201E: '"', 0x00AB: '"', 0x00BB: '"',
    0x2018: "'", 0x2019: "'", 0x201A: "'",
    0x2013: "-", 0x2014: "-",
    0x2026: "...",
    0x00A0: " ", 0x2009: " ", 0x202F: " ",
}
_SPACE_RUN = re.compile(r" {2,}")


def normalize_punctuation(text: str) -> str:
    text = text.translate(_CHAR_MAP)
    text = _SPACE_RUN.sub(" ", text)
    return text.strip()


@dataclass(frozen=True)
class FilterConfig:
    max_sentence_words: int = 100
    max_word_chars: int = 40
    max_ratio: float = 4.0
    rules_enabled: frozenset = ALL_RULES

    def __post_init__(self):
        if self.max_sentence_words <= 0 or self.max_word_chars <= 0:
            raise ValueError("length thresholds must be positive")
        if self.max_ratio < 1:
            raise ValueError("max_ratio must be >= 1")
        unknown = set(self.rules_enabled) - ALL_RULES
        if unknown:
            raise ValueError(f"unknown rules: {sorted(unknown)}")


@dataclass
class FilterReport:
    input_count: int = 0
    kept_count: int = 0
    dropped_by_rule: dict = field(
        default_factory=lambda: {r: 0 for r in DROP_RULES}
    )

    def as_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "kept_count": self.kept_count,
            "dropped_by_rule": dict(self.dropped_by_rule),
        }


def check_length(pair: BitextPair, cfg: FilterConfig) -> str | None:
    """Return a drop reason or None. Character counts are code points."""
    for side in (pair.source, pair.target):
        words = side.split()
        if len(words) > cfg.max_sentence_words:
            return "sentence_too_long"
        if any(len(w) > cfg.max_word_chars for w in words):
            return "word_too_long"
    return None


def check_ratio(pair: BitextPair, cfg: FilterConfig) -> str | None:
    """Drop when the word-count ratio strictly exceeds max_ratio (either
    direction). A zero-word side is dropped instead of dividing by zero."""
    n_src = len(pair.source.split())
    n_tgt = len(pair.target.split())
    if n_src == 0 or n_tgt == 0:
        return "empty_side"
    if max(n_src, n_tgt) > cfg.max_ratio * min(n_src, n_tgt):
        return "ratio"
    return None


def dedup(pairs: Iterable[BitextPair]):
    """Keep the first occurrence of each exact (source, target) pair."""
    seen: set[tuple[str, str]] = set()
    for pair in pairs:
        key = (pair.source, pair.target)
        if key in seen:
            continue
        seen.add(key)
        yield pair


def filter_corpus(
    pairs: Iterable[BitextPair], cfg: FilterConfig | None = None
) -> tuple[list[BitextPair], FilterReport]:
    """Apply the enabled rules in order; survivors keep input order."""
    cfg = cfg or FilterConfig()
    report = FilterReport()
    kept: list[BitextPair] = []
    seen: set[tuple[str, str]] = set()
    for pair in pairs:
        report.input_count += 1
        if RULE_NORMALIZE in cfg.rules_enabled:
            pair = BitextPair(
                source=normalize_punctuation(pair.source),
                target=normalize_punctuation(pair.target),
                origin=pair.origin,
            )
        if RULE_LENGTH in cfg.rules_enabled and check_length(pair, cfg):
            report.dropped_by_rule[RULE_LENGTH] += 1
            continue
        if RULE_DEDUP in cfg.rules_enabled:
            key = (pair.source, pair.target)
            if key in seen:
                report.dropped_by_rule[RULE_DEDUP] += 1
                continue
            seen.add(key)
        if RULE_RATIO in cfg.rules_enabled and check_ratio(pair, cfg):
            report.dropped_by_rule[RULE_RATIO] += 1
            continue
        report.kept_count += 1
        kept.append(pair)
    return kept, report
