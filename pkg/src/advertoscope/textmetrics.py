"""Lexical diversity and readability metrics for disclosure auditing.

The tokenizer and syllable rules are pinned here so scores are reproducible:

* Sentences split on ``.``, ``!``, ``?`` followed by whitespace or end of
  text. This is abbreviation-blind ("U.S." becomes two sentences); callers
  comparing styles are affected equally on both sides.
* Words are maximal runs of Unicode letters, with internal apostrophes or
  hyphens, lowercased. Numbers are not tokens.
* Syllables: vowel groups (aeiouy) per hyphen/apostrophe-separated part;
  a trailing silent 'e' is dropped (kept after consonant+'le', and never
  below one group); the '-ment(s)' suffix is counted separately so magic-e
  stems like advertise+ment keep their silent 'e'. Heuristic by nature;
  non-English text gets the same rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EmptyText

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])(?=\s|$)")
_WORD_RE = re.compile(r"[^\W\d_]+(?:['’-][^\W\d_]+)*", re.UNICODE)
_VOWEL_GROUP = re.compile(r"[aeiouy]+")

LINSEAR_WINDOW = 100
EASY_MAX_SYLLABLES = 2


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[str, ...]
    sentence_bounds: tuple[tuple[int, int], ...]  # half-open [start, end)

    @property
    def n_sentences(self) -> int:
        return len(self.sentence_bounds)


def tokenize(s: str) -> TokenStream:
    """Split text into lowercase word tokens grouped into sentences."""
    tokens: list[str] = []
    bounds: list[tuple[int, int]] = []
    for chunk in _SENTENCE_SPLIT.split(s):
        words = [m.group(0).lower() for m in _WORD_RE.finditer(chunk)]
        if not words:
            continue
        start = len(tokens)
        tokens.extend(words)
        bounds.append((start, len(tokens)))
    return TokenStream(tokens=tuple(tokens), sentence_bounds=tuple(bounds))


def _part_syllables(part: str) -> int:
    if not part:
        return 0
    if part.endswith("ments") and _VOWEL_GROUP.search(part[:-5]):
        return _part_syllables(part[:-5]) + 1
    if part.endswith("ment") and _VOWEL_GROUP.search(part[:-4]):
        return _part_syllables(part[:-4]) + 1
    groups = len(_VOWEL_GROUP.findall(part))
    if (
        groups >= 2
        and part.endswith("e")
        and not (len(part) >= 3 and part.endswith("le") and part[-3] not in "aeiouy")
    ):
        groups -= 1
    return groups


def count_syllables(word: str) -> int:
    """Heuristic syllable count, always >= 1."""
    if not word:
        raise ValueError("word must be non-empty")
    total = sum(_part_syllables(p) for p in re.split(r"['’-]", word.lower()))
    return max(1, total)


def type_token_ratio(ts: TokenStream) -> float:
    """Distinct tokens / total tokens, in (0, 1]."""
    if not ts.tokens:
        raise EmptyText("type_token_ratio needs at least one token")
    return len(set(ts.tokens)) / len(ts.tokens)


def linsear_write(ts: TokenStream) -> float:
    """Linsear-Write readability over the first 100 tokens.

    Easy words (<= 2 syllables) score 1 point, hard words (>= 3) score 3.
    The sentence count covers the sentences those tokens span; a partially
    covered final sentence counts as one sentence. With r = points/sentences,
    the score is r/2 when r > 20, else r/2 - 1.
    """
    if not ts.tokens or not ts.sentence_bounds:
        raise EmptyText("linsear_write needs at least one token and one sentence")
    window = min(LINSEAR_WINDOW, len(ts.tokens))
    points = sum(
        1 if count_syllables(tok) <= EASY_MAX_SYLLABLES else 3 for tok in ts.tokens[:window]
    )
    sentences = sum(1 for start, _ in ts.sentence_bounds if start < window)
    r = points / sentences
    return r / 2.0 if r > 20.0 else r / 2.0 - 1.0


def text_metrics(s: str) -> dict:
    """Convenience bundle for reports: ttr, linsear_write, token/sentence counts."""
    ts = tokenize(s)
    if not ts.tokens:
        return {"ttr": None, "linsear_write": None, "tokens": 0, "sentences": 0}
    return {
        "ttr": type_token_ratio(ts),
        "linsear_write": linsear_write(ts),
        "tokens": len(ts.tokens),
        "sentences": ts.n_sentences,
    }
