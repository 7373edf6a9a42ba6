"""Full audit pipeline: structure verdict AND content verdict conjunction.

A page is `problematic_advertorial` only when the structural detector fires
AND the content classifier labels the domain suspicious — both stages must
concur. A structural hit without classifier agreement (including the
classifier being unavailable offline with a cold cache) downgrades to
`candidate_only`, never to problematic. Dark-pattern and readability
metrics are computed for every page regardless of verdict, so the tool
doubles as a disclosure auditor.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlsplit

from . import __version__
from .darkpattern import (
    AA_THRESHOLD,
    BANNER_MAX_TOKENS,
    DarkPatternReport,
    analyze_dark_patterns,
    classify_disclosure,
)
from .engines import EngineCache, collect_reports
from .errors import AdvertoscopeError, EmptyDocument, SchemaError, UnresolvableSuffix, InvalidHostname
from .features import encode_and_impute
from .forest import ForestModel, predict
from .page import PageDocument, RawPage, ingest_snapshot, load_snapshot, parse_static
from .structure import DisclaimerLexicon, SelectorRule, StructureVerdict, structure_verdict
from .corpus.psl import etld_plus_one
from .textmetrics import text_metrics

REPORT_SCHEMA_VERSION = "1"

VERDICT_PROBLEMATIC = "problematic_advertorial"
VERDICT_BENIGN = "benign"
VERDICT_CANDIDATE = "candidate_only"


@dataclass(frozen=True)
class RunConfig:
    lexicon: DisclaimerLexicon
    rules: tuple[SelectorRule, ...]
    model: ForestModel | None = None
    clients: tuple = ()
    cache: EngineCache | None = None
    offline: bool = False
    deterministic: bool = False
    aa_threshold: float = AA_THRESHOLD
    banner_max_tokens: int = BANNER_MAX_TOKENS
    seed: int = 0
    workers: int = 1


def split_main_vs_disclaimer(
    doc: PageDocument,
    matches,
    lexicon: DisclaimerLexicon | None = None,
    banner_max_tokens: int = BANNER_MAX_TOKENS,
) -> dict:
    """Partition visible text into main text vs disclaimer text.

    Elements containing a disclaimer-kind phrase match form the disclaimer
    side; every other visible element (banners included — short labels are
    not formal legal disclosure) is main text. The split is exact and
    disjoint at the element level.
    """
    disclaimer_elements = set()
    for m in matches:
        if m.kind != "phrase":
            continue
        kind = classify_disclosure(m, doc, lexicon=lexicon, banner_max_tokens=banner_max_tokens)
        if kind == "disclaimer":
            disclaimer_elements.add(m.element_index)
    main_parts = []
    disclaimer_parts = []
    for idx, el in enumerate(doc.elements):
        if el.hidden:
            continue
        (disclaimer_parts if idx in disclaimer_elements else main_parts).append(el.text)
    return {
        "main_text": " ".join(main_parts),
        "disclaimer_text": " ".join(disclaimer_parts),
    }


@dataclass(frozen=True)
class ContentResult:
    status: str  # "ok" | "skipped" | "unavailable"
    label: str | None = None
    probability: float | None = None
    features_used: int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "label": self.label,
            "probability": self.probability,
            "features_used": self.features_used,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class AuditReport:
    url: str
    mode: str
    verdict: str
    structure_is_candidate: bool
    structure_matches: tuple
    content: ContentResult
    darkpatterns: DarkPatternReport
    metrics: dict
    tool_version: str = __version__
    generated_at: str = ""
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "report_schema_version": REPORT_SCHEMA_VERSION,
            "url": self.url,
            "mode": self.mode,
            "verdict": self.verdict,
            "structure": {
                "is_candidate": self.structure_is_candidate,
                "matches": [
                    {
                        "kind": m.kind,
                        "id": m.rule_or_phrase_id,
                        "element_index": m.element_index,
                        "matched_text": m.matched_text,
                        "language": m.language,
                    }
                    for m in self.structure_matches
                ],
            },
            "content": self.content.to_dict(),
            "darkpatterns": self.darkpatterns.to_dict(),
            "metrics": self.metrics,
            "tool_version": self.tool_version,
            "generated_at": self.generated_at,
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


def _now_iso(deterministic: bool) -> str:
    if deterministic:
        return "1970-01-01T00:00:00+00:00"
    return datetime.now(timezone.utc).isoformat()


def _domain_of(url: str) -> str | None:
    host = urlsplit(url).hostname
    if not host:
        return None
    try:
        return etld_plus_one(host)
    except (UnresolvableSuffix, InvalidHostname):
        return host


def _content_stage(doc: PageDocument, config: RunConfig) -> ContentResult:
    if config.model is None:
        return ContentResult(status="unavailable", detail="no model configured")
    if not config.clients:
        return ContentResult(status="unavailable", detail="no engine clients configured")
    domain = _domain_of(doc.url)
    if domain is None:
        return ContentResult(status="unavailable", detail="cannot derive domain from url")
    reports = collect_reports(
        domain,
        list(config.clients),
        cache=config.cache,
        offline=config.offline,
    )
    # Local page-size signal comes from the already-parsed page, not a fetch.
    if doc.html_char_count > 0:
        reports = list(reports) + [
            _LocalReport(domain, {"local.page_size_chars": float(doc.html_char_count)})
        ]
    if all(r.all_missing for r in reports):
        return ContentResult(
            status="unavailable",
            detail="all engine signals missing (offline with cold cache?)",
        )
    try:
        vector = encode_and_impute(reports, config.model.schema, domain=domain)
        result = predict(config.model, vector)
    except (SchemaError, AdvertoscopeError) as exc:
        return ContentResult(status="unavailable", detail=str(exc))
    return ContentResult(
        status="ok",
        label=result.label,
        probability=result.probability,
        features_used=len(config.model.schema),
    )


class _LocalReport:
    """Ad-hoc EngineReport stand-in for page-derived signals."""

    def __init__(self, domain: str, signals: dict):
        self.engine_id = "local"
        self.domain = domain
        self.signals = signals
        self.retrieved_at = ""
        self.all_missing = all(v is None for v in signals.values())


def classify_page(doc: PageDocument, config: RunConfig) -> AuditReport:
    """Run both stages plus the unconditional audit metrics on one page."""
    verdict_info: StructureVerdict = structure_verdict(doc, config.lexicon, list(config.rules))

    if verdict_info.is_candidate:
        content = _content_stage(doc, config)
    else:
        content = ContentResult(status="skipped", detail="structure stage did not fire")

    hints = {e.phrase: e.kind_hint for e in config.lexicon.entries}
    dark = analyze_dark_patterns(
        doc,
        list(verdict_info.matches),
        lexicon_hints=hints,
        aa_threshold=config.aa_threshold,
        banner_max_tokens=config.banner_max_tokens,
    )
    split = split_main_vs_disclaimer(
        doc, verdict_info.matches, lexicon=config.lexicon, banner_max_tokens=config.banner_max_tokens
    )
    main_metrics = text_metrics(split["main_text"])
    disc_metrics = text_metrics(split["disclaimer_text"])
    metrics = {
        "ttr_main": main_metrics["ttr"],
        "ttr_disclaimer": disc_metrics["ttr"],
        "linsear_main": main_metrics["linsear_write"],
        "linsear_disclaimer": disc_metrics["linsear_write"],
        "tokens_main": main_metrics["tokens"],
        "tokens_disclaimer": disc_metrics["tokens"],
        "chars_text": len(doc.plain_text),
        "chars_html": doc.html_char_count,
    }

    if verdict_info.is_candidate and content.status == "ok" and content.label == "suspicious":
        verdict = VERDICT_PROBLEMATIC
    elif verdict_info.is_candidate:
        verdict = VERDICT_CANDIDATE
    else:
        verdict = VERDICT_BENIGN

    return AuditReport(
        url=doc.url,
        mode=doc.mode,
        verdict=verdict,
        structure_is_candidate=verdict_info.is_candidate,
        structure_matches=verdict_info.matches,
        content=content,
        darkpatterns=dark,
        metrics=metrics,
        generated_at=_now_iso(config.deterministic),
    )


def _error_report(url: str, mode: str, message: str, config: RunConfig) -> AuditReport:
    return AuditReport(
        url=url,
        mode=mode,
        verdict=VERDICT_BENIGN,
        structure_is_candidate=False,
        structure_matches=(),
        content=ContentResult(status="skipped", detail="input failed to parse"),
        darkpatterns=DarkPatternReport(
            records=(), page_median_font_px=None, share_below_median_font=None,
            share_below_aa=None, aa_threshold=config.aa_threshold,
            banner_max_tokens=config.banner_max_tokens,
        ),
        metrics={
            "ttr_main": None, "ttr_disclaimer": None,
            "linsear_main": None, "linsear_disclaimer": None,
            "tokens_main": 0, "tokens_disclaimer": 0,
            "chars_text": 0, "chars_html": 0,
        },
        generated_at=_now_iso(config.deterministic),
        error=message,
    )


def load_input(path: Path) -> PageDocument:
    """One batch input: .html/.htm raw markup, or .json rendered snapshot."""
    if path.suffix.lower() in (".html", ".htm"):
        raw = path.read_bytes()
        page = RawPage.from_bytes(url=f"file://{path.resolve()}", raw=raw)
        return parse_static(page)
    if path.suffix.lower() == ".json":
        return ingest_snapshot(load_snapshot(path))
    raise SchemaError(f"unsupported input type: {path.name}")


@dataclass
class BatchResult:
    reports: list[AuditReport] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if self.failures else 0

    def summary(self) -> dict:
        counts = {VERDICT_PROBLEMATIC: 0, VERDICT_CANDIDATE: 0, VERDICT_BENIGN: 0}
        text_lengths: list[int] = []
        html_lengths: list[int] = []
        for r in self.reports:
            if r.error is None:
                counts[r.verdict] += 1
                text_lengths.append(r.metrics.get("chars_text") or 0)
                html_lengths.append(r.metrics.get("chars_html") or 0)

        def lower_median(values: list[int]) -> int | None:
            if not values:
                return None
            ordered = sorted(values)
            return ordered[(len(ordered) - 1) // 2]

        return {
            "inputs": len(self.reports),
            "failed_inputs": len(self.failures),
            "verdicts": counts,
            "median_chars_text": lower_median(text_lengths),
            "median_chars_html": lower_median(html_lengths),
        }


def run_batch(inputs: list[Path], config: RunConfig) -> BatchResult:
    """Audit every input; per-input failures are recorded, never fatal.

    Report order always equals input order regardless of worker count.
    """
    result = BatchResult()

    def work(path: Path) -> AuditReport:
        try:
            doc = load_input(path)
        except (AdvertoscopeError, OSError, ValueError) as exc:
            return _error_report(f"file://{path}", "static", f"{type(exc).__name__}: {exc}", config)
        return classify_page(doc, config)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(work, inputs))  # map preserves input order
    else:
        reports = [work(p) for p in inputs]

    for path, report in zip(inputs, reports):
        result.reports.append(report)
        if report.error is not None:
            result.failures.append((str(path), report.error))
    return result
