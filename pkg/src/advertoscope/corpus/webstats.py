"""Third-party/tracker analysis and corpus size statistics.

Request logs come from HAR-compatible captures (only URLs are consumed);
tracker domains come from the Disconnect services format. Hosts are grouped
at the eTLD+1 level before counting so subdomain fan-out never inflates the
numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlsplit

from ..errors import EmptySample, InvalidHostname, UnresolvableSuffix
from ..page import PageDocument
from .ks import ks_pvalue, ks_statistic
from .psl import PublicSuffixList, etld_plus_one


@dataclass(frozen=True)
class RequestLog:
    """All request URLs observed while loading one first-party page."""

    first_party: str  # eTLD+1
    requests: tuple[str, ...]


@dataclass(frozen=True)
class TrackerList:
    entries: frozenset[str]  # tracker eTLD+1 domains, lowercased

    def __contains__(self, domain: str) -> bool:
        return domain.lower() in self.entries

    @classmethod
    def from_domains(cls, domains, psl: PublicSuffixList | None = None) -> "TrackerList":
        collected = set()
        for d in domains:
            try:
                collected.add(etld_plus_one(d, psl))
            except (UnresolvableSuffix, InvalidHostname):
                continue
        return cls(entries=frozenset(collected))

    @classmethod
    def from_disconnect_json(cls, path: str | Path, psl: PublicSuffixList | None = None) -> "TrackerList":
        """Ingest the Disconnect services format (categories -> entities -> domains)."""
        data = json.loads(Path(path).read_text("utf-8"))
        domains: list[str] = []
        for entities in (data.get("categories") or {}).values():
            for entity in entities:
                for props in entity.values():
                    if not isinstance(props, dict):
                        continue
                    for value in props.values():
                        if isinstance(value, list):
                            domains.extend(str(v) for v in value)
        return cls.from_domains(domains, psl)


def load_har_request_log(
    path: str | Path, first_party: str, psl: PublicSuffixList | None = None
) -> RequestLog:
    """Build a RequestLog from a HAR capture; only entry URLs are consumed."""
    data = json.loads(Path(path).read_text("utf-8"))
    urls = []
    for entry in (data.get("log") or {}).get("entries") or []:
        url = (entry.get("request") or {}).get("url")
        if url:
            urls.append(str(url))
    return RequestLog(first_party=etld_plus_one(first_party, psl), requests=tuple(urls))


@dataclass(frozen=True)
class ThirdPartyStats:
    distinct_third_parties: int
    distinct_trackers: int
    parties: tuple[str, ...]  # sorted third-party eTLD+1s

    def to_dict(self) -> dict:
        return {
            "distinct_third_parties": self.distinct_third_parties,
            "distinct_trackers": self.distinct_trackers,
            "parties": list(self.parties),
        }


def third_party_stats(
    log: RequestLog, trackers: TrackerList, psl: PublicSuffixList | None = None
) -> ThirdPartyStats:
    """Distinct third parties and known trackers contacted during a load."""
    first = etld_plus_one(log.first_party, psl)
    parties: set[str] = set()
    for url in log.requests:
        host = urlsplit(url).hostname
        if not host:
            continue
        try:
            domain = etld_plus_one(host, psl)
        except (UnresolvableSuffix, InvalidHostname):
            continue
        if domain != first:
            parties.add(domain)
    tracker_hits = {p for p in parties if p in trackers}
    return ThirdPartyStats(
        distinct_third_parties=len(parties),
        distinct_trackers=len(tracker_hits),
        parties=tuple(sorted(parties)),
    )


def _lower_median(values: list[float]) -> float:
    if not values:
        raise EmptySample("median of empty group")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def text_length_report(groups: dict[str, list[PageDocument]]) -> dict:
    """Per-group text/HTML size medians plus pairwise KS comparisons."""
    for name, docs in groups.items():
        if not docs:
            raise EmptySample(f"group {name!r} is empty")
    per_group = {}
    text_lengths = {}
    html_lengths = {}
    for name, docs in groups.items():
        text_lengths[name] = [float(len(d.plain_text)) for d in docs]
        html_lengths[name] = [float(d.html_char_count) for d in docs]
        per_group[name] = {
            "n": len(docs),
            "median_chars_text": _lower_median(text_lengths[name]),
            "median_chars_html": _lower_median(html_lengths[name]),
        }
    names = sorted(groups)
    pairwise = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            entry = {"a": a, "b": b}
            for metric, data in (("text", text_lengths), ("html", html_lengths)):
                d = ks_statistic(data[a], data[b])
                entry[f"ks_{metric}_d"] = d
                entry[f"ks_{metric}_p"] = ks_pvalue(d, len(data[a]), len(data[b]))
            pairwise.append(entry)
    return {"groups": per_group, "pairwise_ks": pairwise}
