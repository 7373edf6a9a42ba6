"""How disclosures are presented: kind, position, contrast, font prominence.

Contrast math follows the W3C WCAG 2.x definition (relative luminance with
the 0.03928 linearization threshold; some references use 0.04045 — we
standardize on the W3C-cited form). AA passes at ratio >= 4.5, AAA at 7.0,
both inclusive per the "at least" wording.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .colors import ColorValue
from .errors import NoVisibleText
from .page import PageDocument
from .structure import StructureMatch

AA_THRESHOLD = 4.5
AAA_THRESHOLD = 7.0
BANNER_MAX_TOKENS = 5


def relative_luminance(c: ColorValue) -> float:
    """WCAG relative luminance of an opaque color, in [0, 1]."""
    if not c.opaque:
        raise ValueError("relative_luminance needs an opaque color; composite first")

    def lin(v: int) -> float:
        s = v / 255.0
        return s / 12.92 if s <= 0.03928 else ((s + 0.055) / 1.055) ** 2.4

    return 0.2126 * lin(c.r) + 0.7152 * lin(c.g) + 0.0722 * lin(c.b)


def contrast_ratio(fg: ColorValue, bg: ColorValue) -> float:
    """(L_lighter + 0.05) / (L_darker + 0.05); always >= 1, <= 21."""
    la = relative_luminance(fg)
    lb = relative_luminance(bg)
    lighter, darker = (la, lb) if la >= lb else (lb, la)
    return (lighter + 0.05) / (darker + 0.05)


def classify_disclosure(
    m: StructureMatch,
    doc: PageDocument,
    lexicon=None,
    banner_max_tokens: int = BANNER_MAX_TOKENS,
) -> str:
    """banner (short label) vs disclaimer (formal legal text).

    The element's full normalized text is token-counted; a lexicon kind_hint
    other than 'either' overrides the threshold. The token threshold stands
    in for an unpublished split criterion and is a config knob.
    """
    el = doc.elements[m.element_index]
    if lexicon is not None and m.kind == "phrase":
        hint = lexicon.hint_for(m.rule_or_phrase_id)
        if hint in ("banner", "disclaimer"):
            return hint
    tokens = el.text.split()
    return "banner" if len(tokens) <= banner_max_tokens else "disclaimer"


def disclosure_position(m: StructureMatch, doc: PageDocument) -> float:
    """Vertical position (percent from document top) of the matched element."""
    return doc.elements[m.element_index].position_pct


@dataclass(frozen=True)
class FontProminence:
    page_median_font_px: float
    per_target: tuple[str, ...]  # "below" | "equal" | "above"


def font_prominence(doc: PageDocument, targets: list[int]) -> FontProminence:
    """Compare target elements' font sizes to the page median.

    Median is the lower median of visible elements' sizes (even counts take
    the smaller middle value).
    """
    visible = doc.visible_text_elements()
    if not visible:
        raise NoVisibleText(f"no visible text on {doc.url}")
    sizes = sorted(e.font_size_px for e in visible)
    median = sizes[(len(sizes) - 1) // 2]
    labels = []
    for idx in targets:
        size = doc.elements[idx].font_size_px
        if size < median:
            labels.append("below")
        elif size > median:
            labels.append("above")
        else:
            labels.append("equal")
    return FontProminence(page_median_font_px=median, per_target=tuple(labels))


@dataclass(frozen=True)
class DisclosureRecord:
    element_index: int
    kind: str  # banner | disclaimer
    position_pct: float
    contrast_ratio: float
    font_size_px: float
    below_page_median_font: bool
    wcag_aa_pass: bool
    wcag_aaa_pass: bool
    matched_phrase: str
    language: str | None

    def to_dict(self) -> dict:
        return {
            "element_index": self.element_index,
            "kind": self.kind,
            "position_pct": self.position_pct,
            "contrast_ratio": self.contrast_ratio,
            "font_size_px": self.font_size_px,
            "below_page_median_font": self.below_page_median_font,
            "wcag_aa_pass": self.wcag_aa_pass,
            "wcag_aaa_pass": self.wcag_aaa_pass,
            "matched_phrase": self.matched_phrase,
            "language": self.language,
        }


@dataclass(frozen=True)
class DarkPatternReport:
    records: tuple[DisclosureRecord, ...]
    page_median_font_px: float | None
    share_below_median_font: float | None
    share_below_aa: float | None
    aa_threshold: float = AA_THRESHOLD
    banner_max_tokens: int = BANNER_MAX_TOKENS

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "page_median_font_px": self.page_median_font_px,
            "summary": {
                "share_below_median_font": self.share_below_median_font,
                "share_below_aa": self.share_below_aa,
            },
            "aa_threshold": self.aa_threshold,
            "banner_max_tokens": self.banner_max_tokens,
        }


def analyze_dark_patterns(
    doc: PageDocument,
    matches: list[StructureMatch],
    lexicon_hints: dict[str, str] | None = None,
    aa_threshold: float = AA_THRESHOLD,
    banner_max_tokens: int = BANNER_MAX_TOKENS,
) -> DarkPatternReport:
    """Audit every phrase-kind match as a disclosure.

    Selector matches fingerprint page structure, not disclosure text, so
    they are ignored here. Shares are None when the page has no disclosures.
    """
    hints = lexicon_hints or {}
    disclosures = [m for m in matches if m.kind == "phrase"]
    # Deduplicate per element: one element is one disclosure even if several
    # phrases hit it; the strongest hint (disclaimer > banner > either) wins.
    by_element: dict[int, list[StructureMatch]] = {}
    for m in disclosures:
        by_element.setdefault(m.element_index, []).append(m)
    if not by_element:
        return DarkPatternReport(
            records=(),
            page_median_font_px=None,
            share_below_median_font=None,
            share_below_aa=None,
            aa_threshold=aa_threshold,
            banner_max_tokens=banner_max_tokens,
        )

    indices = sorted(by_element)
    prominence = font_prominence(doc, indices)
    records = []
    for idx, label in zip(indices, prominence.per_target):
        el = doc.elements[idx]
        element_matches = by_element[idx]
        hint = "either"
        for m in element_matches:
            h = hints.get(m.rule_or_phrase_id, "either")
            if h == "disclaimer":
                hint = "disclaimer"
                break
            if h == "banner":
                hint = "banner"
        if hint != "either":
            kind = hint
        else:
            kind = "banner" if len(el.text.split()) <= banner_max_tokens else "disclaimer"
        ratio = contrast_ratio(el.fg_color, el.bg_color)
        records.append(
            DisclosureRecord(
                element_index=idx,
                kind=kind,
                position_pct=el.position_pct,
                contrast_ratio=ratio,
                font_size_px=el.font_size_px,
                below_page_median_font=(label == "below"),
                wcag_aa_pass=ratio >= aa_threshold,
                wcag_aaa_pass=ratio >= AAA_THRESHOLD,
                matched_phrase=element_matches[0].rule_or_phrase_id,
                language=element_matches[0].language,
            )
        )
    n = len(records)
    return DarkPatternReport(
        records=tuple(records),
        page_median_font_px=prominence.page_median_font_px,
        share_below_median_font=sum(r.below_page_median_font for r in records) / n,
        share_below_aa=sum(not r.wcag_aa_pass for r in records) / n,
        aa_threshold=aa_threshold,
        banner_max_tokens=banner_max_tokens,
    )
