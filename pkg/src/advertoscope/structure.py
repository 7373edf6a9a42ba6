"""Structure-based advertorial detection.

Two signals decide whether a page *looks like* an advertorial: a multilingual
lexicon of legal-disclaimer key phrases matched against visible text, and
selector rules that fingerprint testimonial/comment/review sections in the
markup. Both are exact by design — no fuzzy matching — so an empty lexicon
and rule set can never flag anything.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import cssmini
from .errors import SelectorParseError
from .page import PageDocument

_LANGUAGES = ("en", "nl", "de", "el", "he", "es", "pt")
_KINDS = ("banner", "disclaimer", "either")
_CATEGORIES = ("comments", "testimonials", "reviews", "other")


def normalize_text(s: str) -> str:
    """NFKC, Unicode default case folding, whitespace collapsed, trimmed.

    Idempotent: normalize_text(normalize_text(s)) == normalize_text(s).
    """
    return " ".join(unicodedata.normalize("NFKC", s).casefold().split())


@dataclass(frozen=True)
class LexiconEntry:
    phrase: str  # pre-normalized
    language: str
    kind_hint: str  # banner | disclaimer | either


@dataclass(frozen=True)
class DisclaimerLexicon:
    entries: tuple[LexiconEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def languages(self) -> set[str]:
        return {e.language for e in self.entries}

    def hint_for(self, phrase: str) -> str:
        for e in self.entries:
            if e.phrase == phrase:
                return e.kind_hint
        return "either"

    @classmethod
    def from_pairs(cls, pairs) -> "DisclaimerLexicon":
        entries = []
        seen = set()
        for phrase, language, kind_hint in pairs:
            norm = normalize_text(phrase)
            if not norm:
                raise ValueError("empty phrase in lexicon")
            if kind_hint not in _KINDS:
                raise ValueError(f"bad kind_hint {kind_hint!r} for {phrase!r}")
            if norm in seen:
                continue
            seen.add(norm)
            entries.append(LexiconEntry(norm, language, kind_hint))
        return cls(tuple(entries))


@dataclass(frozen=True)
class SelectorRule:
    id: str
    category: str
    selector: cssmini.Selector


@dataclass(frozen=True)
class StructureMatch:
    """One structural hit: a phrase inside an element, or a selector rule."""

    kind: str  # "phrase" | "selector"
    rule_or_phrase_id: str
    element_index: int
    matched_text: str
    language: str | None = None


def load_lexicon(path: str | Path | None = None) -> DisclaimerLexicon:
    """Load a lexicon file: ``phrase<TAB>language<TAB>kind_hint``, # comments.

    With no path, the bundled seed lexicon is returned. The seed approximates
    the published 103-phrase list from its publicly quoted entries plus
    translations; it is NOT that list and is meant to be user-replaced.
    """
    if path is None:
        text = resources.files("advertoscope.data").joinpath("disclaimer_lexicon.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ValueError(f"lexicon line {lineno}: expected 3 tab-separated columns")
        pairs.append((cols[0], cols[1].strip(), cols[2].strip()))
    return DisclaimerLexicon.from_pairs(pairs)


def load_selector_rules(path: str | Path | None = None) -> list[SelectorRule]:
    """Load rules: ``id<TAB>category<TAB>selector`` per line, # comments.

    Selector syntax errors raise SelectorParseError here, never at match time.
    """
    if path is None:
        text = resources.files("advertoscope.data").joinpath("selector_rules.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    rules: list[SelectorRule] = []
    seen_ids = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise SelectorParseError(f"rules line {lineno}: expected 3 tab-separated columns")
        rule_id, category, selector_text = (c.strip() for c in cols)
        if rule_id in seen_ids:
            raise SelectorParseError(f"rules line {lineno}: duplicate rule id {rule_id!r}")
        if category not in _CATEGORIES:
            raise SelectorParseError(f"rules line {lineno}: unknown category {category!r}")
        seen_ids.add(rule_id)
        rules.append(SelectorRule(rule_id, category, cssmini.parse_selector(selector_text)))
    return rules


def match_disclaimers(doc: PageDocument, lex: DisclaimerLexicon) -> list[StructureMatch]:
    """Exact substring search of every lexicon phrase in every visible element.

    Hidden text is excluded: users never see it, so it cannot disclose
    anything. Order is (element index, lexicon order); multiple phrases may
    hit one element.
    """
    if not lex.entries:
        raise ValueError("lexicon must be non-empty")
    matches: list[StructureMatch] = []
    for idx, el in enumerate(doc.elements):
        if el.hidden:
            continue
        hay = normalize_text(el.text)
        if not hay:
            continue
        for entry in lex.entries:
            if entry.phrase in hay:
                matches.append(
                    StructureMatch(
                        kind="phrase",
                        rule_or_phrase_id=entry.phrase,
                        element_index=idx,
                        matched_text=entry.phrase,
                        language=entry.language,
                    )
                )
    return matches


def match_selectors(doc: PageDocument, rules: list[SelectorRule]) -> list[StructureMatch]:
    """Match selector rules against each element's node chain.

    A rule hits an element when its compound chain matches the element itself
    or any node on the element's ancestor chain (structure exists regardless
    of which descendant carries the text). Hidden elements still match:
    visibility matters for disclosure auditing, not structural fingerprints.
    Results are deduplicated by (rule id, element index).
    """
    matches: list[StructureMatch] = []
    seen: set[tuple[str, int]] = set()
    for idx, el in enumerate(doc.elements):
        chain = list(el.chain)
        if not chain:
            continue
        for rule in rules:
            key = (rule.id, idx)
            if key in seen:
                continue
            # Anchor the subject compound at the element or at any ancestor.
            for anchor in range(len(chain), 0, -1):
                if rule.selector.matches_chain(chain[:anchor]):
                    seen.add(key)
                    matches.append(
                        StructureMatch(
                            kind="selector",
                            rule_or_phrase_id=rule.id,
                            element_index=idx,
                            matched_text=el.text,
                            language=None,
                        )
                    )
                    break
    matches.sort(key=lambda m: (m.element_index, m.rule_or_phrase_id))
    return matches


@dataclass(frozen=True)
class StructureVerdict:
    is_candidate: bool
    matches: tuple[StructureMatch, ...]


def structure_verdict(
    doc: PageDocument, lex: DisclaimerLexicon, rules: list[SelectorRule]
) -> StructureVerdict:
    """Candidate iff at least one phrase match OR one selector match."""
    phrase_matches = match_disclaimers(doc, lex) if lex.entries else []
    selector_matches = match_selectors(doc, rules)
    all_matches = tuple(phrase_matches + selector_matches)
    return StructureVerdict(is_candidate=bool(all_matches), matches=all_matches)
