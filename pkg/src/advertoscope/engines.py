"""Engine clients, the report cache, and report collection.

An engine client is anything with an ``id``, a declared ``signals`` tuple,
and ``fetch(domain) -> EngineReport``. Failures must surface as reports with
all signals missing — never as exceptions into the pipeline. The repo ships
two real local engines (landing-page size, RDAP-derived registration data),
a fixture-backed replay engine for tests, and plugin stubs for the
third-party reputation engines whose adapters users must supply themselves.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Protocol

from .errors import FetchError
from .features import THIRD_PARTY_ENGINE_IDS
from .page import RawPage

DEFAULT_CACHE_ENV = "ADVERTOSCOPE_CACHE"
DEFAULT_TTL_DAYS = 30.0


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class EngineReport:
    engine_id: str
    domain: str
    signals: dict  # namespaced "engine.signal" -> number|str|bool|None
    retrieved_at: str  # ISO-8601 UTC

    @property
    def all_missing(self) -> bool:
        return all(v is None for v in self.signals.values())


class EngineClient(Protocol):
    id: str
    signals: tuple[str, ...]

    def fetch(self, domain: str) -> EngineReport: ...


def missing_report(engine_id: str, domain: str, signals: tuple[str, ...], now=None) -> EngineReport:
    ts = (now() if now else _utcnow()).isoformat()
    return EngineReport(
        engine_id=engine_id, domain=domain, signals={name: None for name in signals}, retrieved_at=ts
    )


def page_size_signal(page: RawPage) -> float:
    """Landing-page size in HTML characters, as the local crawler measures it."""
    if not page.html:
        raise FetchError(f"empty body for {page.url}")
    return float(len(page.html))


class PageSizeEngine:
    """Local crawler signal: landing-page HTML size.

    ``page_loader(domain) -> RawPage`` is injectable; the default fetches
    ``https://<domain>/`` with requests. Unreachable pages yield a missing
    signal (contract: engines never raise into the pipeline).
    """

    id = "local"
    signals = ("local.page_size_chars",)

    def __init__(self, page_loader: Callable[[str], RawPage] | None = None, now=None):
        self._loader = page_loader or self._default_loader
        self._now = now or _utcnow

    @staticmethod
    def _default_loader(domain: str) -> RawPage:
        import requests

        url = f"https://{domain}/"
        try:
            resp = requests.get(url, timeout=20)
        except requests.RequestException as exc:
            raise FetchError(str(exc)) from exc
        if resp.status_code >= 400 or not resp.text:
            raise FetchError(f"HTTP {resp.status_code} for {url}")
        return RawPage(url=url, html=resp.text, fetched_at=_utcnow().isoformat())

    def fetch(self, domain: str) -> EngineReport:
        try:
            size = page_size_signal(self._loader(domain))
        except FetchError:
            return missing_report(self.id, domain, self.signals, now=self._now)
        return EngineReport(
            engine_id=self.id,
            domain=domain,
            signals={"local.page_size_chars": size},
            retrieved_at=self._now().isoformat(),
        )


class RdapEngine:
    """Registration metadata signals from the corpus RDAP resolver."""

    id = "rdap"
    signals = ("rdap.domain_age_days", "rdap.registrar", "rdap.recent")

    def __init__(self, resolver=None, now=None):
        from .corpus.rdap import RdapResolver

        self._resolver = resolver or RdapResolver()
        self._now = now or _utcnow

    def fetch(self, domain: str) -> EngineReport:
        record = self._resolver.lookup(domain)
        registrar = record.registrar.lower() if record.registrar else None
        return EngineReport(
            engine_id=self.id,
            domain=domain,
            signals={
                "rdap.domain_age_days": float(record.age_days) if record.age_days is not None else None,
                "rdap.registrar": registrar,
                "rdap.recent": record.recent,
            },
            retrieved_at=self._now().isoformat(),
        )


class ReplayEngine:
    """Fixture-backed engine for tests and offline batch replay."""

    def __init__(self, engine_id: str, signals: tuple[str, ...], fixtures: dict[str, dict], now=None):
        self.id = engine_id
        self.signals = signals
        self._fixtures = fixtures
        self._now = now or _utcnow

    def fetch(self, domain: str) -> EngineReport:
        row = self._fixtures.get(domain)
        if row is None:
            return missing_report(self.id, domain, self.signals, now=self._now)
        signals = {name: row.get(name) for name in self.signals}
        return EngineReport(
            engine_id=self.id, domain=domain, signals=signals, retrieved_at=self._now().isoformat()
        )


class StubEngine:
    """Plugin point for a third-party reputation engine without an adapter.

    Declares the documented signal names but always reports them missing;
    users wire real HTTP adapters by replacing ``fetch``.
    """

    def __init__(self, engine_id: str, extra_signals: tuple[str, ...] = (), now=None):
        self.id = engine_id
        self.signals = (f"{engine_id}.risk_score", f"{engine_id}.verdict") + extra_signals
        self._now = now or _utcnow

    def fetch(self, domain: str) -> EngineReport:
        return missing_report(self.id, domain, self.signals, now=self._now)


def third_party_stub_engines(now=None) -> list[StubEngine]:
    extras = {
        "virustotal": ("virustotal.detections", "virustotal.total_scanners"),
        "mywot": ("mywot.child_safety",),
        "scamadviser": ("scamadviser.trust_score",),
    }
    return [
        StubEngine(engine_id, extras.get(engine_id, ()), now=now)
        for engine_id in THIRD_PARTY_ENGINE_IDS
    ]


class EngineCache:
    """Append-only JSONL cache keyed on (engine_id, domain).

    Later records shadow earlier ones; reads are lock-free over an in-memory
    index while writes are serialized. TTL is enforced at read time.
    """

    def __init__(self, path: str | Path | None = None, now=None):
        env = os.environ.get(DEFAULT_CACHE_ENV)
        self.path = Path(path) if path is not None else Path(env) if env else None
        self._now = now or _utcnow
        self._lock = threading.Lock()
        self._index: dict[tuple[str, str], EngineReport] = {}
        if self.path and self.path.exists():
            self._load()

    def _load(self) -> None:
        for line in self.path.read_text("utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                report = EngineReport(
                    engine_id=rec["engine_id"],
                    domain=rec["domain"],
                    signals=rec["signals"],
                    retrieved_at=rec["retrieved_at"],
                )
            except (ValueError, KeyError, TypeError):
                continue  # skip corrupt lines; the cache is advisory
            self._index[(report.engine_id, report.domain)] = report

    def get(self, engine_id: str, domain: str, ttl_days: float = DEFAULT_TTL_DAYS) -> EngineReport | None:
        report = self._index.get((engine_id, domain))
        if report is None:
            return None
        try:
            retrieved = datetime.fromisoformat(report.retrieved_at)
        except ValueError:
            return None
        if retrieved.tzinfo is None:
            retrieved = retrieved.replace(tzinfo=timezone.utc)
        if self._now() - retrieved > timedelta(days=ttl_days):
            return None
        return report

    def put(self, report: EngineReport) -> None:
        with self._lock:
            self._index[(report.engine_id, report.domain)] = report
            if self.path:
                record = {
                    "engine_id": report.engine_id,
                    "domain": report.domain,
                    "retrieved_at": report.retrieved_at,
                    "signals": report.signals,
                }
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")

    def clear(self) -> None:
        with self._lock:
            self._index.clear()
            if self.path and self.path.exists():
                self.path.unlink()

    def __len__(self) -> int:
        return len(self._index)


def collect_reports(
    domain: str,
    clients: list,
    cache: EngineCache | None = None,
    ttl_days: float = DEFAULT_TTL_DAYS,
    offline: bool = False,
    timeout: float = 30.0,
    max_workers: int = 4,
    now=None,
) -> list[EngineReport]:
    """Gather one report per engine, cache-first, ordered by engine id.

    A cached record inside the TTL wins without any fetch. In offline mode
    cold engines yield all-missing reports. Fetch errors and timeouts become
    all-missing reports too; the pipeline never sees engine exceptions.
    """
    if not clients:
        raise ValueError("collect_reports needs at least one engine client")
    ordered = sorted(clients, key=lambda c: c.id)
    results: dict[str, EngineReport] = {}
    to_fetch = []
    for client in ordered:
        cached = cache.get(client.id, domain, ttl_days) if cache else None
        if cached is not None:
            results[client.id] = cached
        elif offline:
            results[client.id] = missing_report(client.id, domain, client.signals, now=now)
        else:
            to_fetch.append(client)
    if to_fetch:
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
            futures = {client.id: pool.submit(client.fetch, domain) for client in to_fetch}
            for client in to_fetch:
                try:
                    report = futures[client.id].result(timeout=timeout)
                except FutureTimeout:
                    report = missing_report(client.id, domain, client.signals, now=now)
                except Exception:
                    report = missing_report(client.id, domain, client.signals, now=now)
                results[client.id] = report
                if cache is not None and not report.all_missing:
                    cache.put(report)
    return [results[c.id] for c in ordered]
