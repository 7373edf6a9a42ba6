"""RDAP registration lookups with a bundled bootstrap snapshot.

Endpoint discovery follows the IANA bootstrap registry format (RFC 9224);
a curated snapshot ships with the package and can be refreshed online.
Responses are parsed per RFC 9083: the ``registration`` event date and the
``registrar`` entity. Failures degrade to unknown-valued records so batch
analyses never abort.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, datetime, timezone
from importlib import resources
from pathlib import Path

from ..errors import RdapUnavailable

IANA_BOOTSTRAP_URL = "https://data.iana.org/rdap/dns.json"

# "Registered after May 2023" recency boundary used in recency flags.
RECENCY_BOUNDARY = date(2023, 6, 1)


@dataclass(frozen=True)
class DomainRecord:
    domain: str
    tld: str
    registrar: str | None
    registration_date: date | None
    age_days: int | None
    recent: bool | None

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "tld": self.tld,
            "registrar": self.registrar if self.registrar is not None else "unknown",
            "registration_date": (
                self.registration_date.isoformat()
                if self.registration_date is not None
                else "unknown"
            ),
            "age_days": self.age_days,
            "recent": self.recent,
        }


def _unknown_record(domain: str) -> DomainRecord:
    return DomainRecord(
        domain=domain,
        tld=domain.rsplit(".", 1)[-1],
        registrar=None,
        registration_date=None,
        age_days=None,
        recent=None,
    )


def _default_transport(url: str) -> tuple[int, dict]:
    import requests

    resp = requests.get(url, timeout=20, headers={"Accept": "application/rdap+json"})
    try:
        body = resp.json()
    except ValueError:
        body = {}
    return resp.status_code, body


def parse_rdap_domain(domain: str, body: dict, reference_date: date) -> DomainRecord:
    """Extract registrar and registration date from an RDAP domain object."""
    reg_date: date | None = None
    for event in body.get("events") or []:
        if event.get("eventAction") == "registration" and event.get("eventDate"):
            raw = str(event["eventDate"]).replace("Z", "+00:00")
            try:
                reg_date = datetime.fromisoformat(raw).date()
            except ValueError:
                reg_date = None
            break
    registrar: str | None = None
    for entity in body.get("entities") or []:
        if "registrar" not in (entity.get("roles") or []):
            continue
        vcard = entity.get("vcardArray")
        if isinstance(vcard, list) and len(vcard) == 2:
            for prop in vcard[1]:
                if isinstance(prop, list) and len(prop) >= 4 and prop[0] == "fn":
                    registrar = str(prop[3])
                    break
        if registrar is None and entity.get("handle"):
            registrar = str(entity["handle"])
        break
    age_days = max(0, (reference_date - reg_date).days) if reg_date else None
    recent = (reg_date >= RECENCY_BOUNDARY) if reg_date else None
    return DomainRecord(
        domain=domain,
        tld=domain.rsplit(".", 1)[-1],
        registrar=registrar,
        registration_date=reg_date,
        age_days=age_days,
        recent=recent,
    )


class RdapResolver:
    """Bootstrap-driven RDAP client with offline fixture support."""

    def __init__(
        self,
        bootstrap: dict | None = None,
        transport=None,
        offline: bool = False,
        fixtures_dir: str | Path | None = None,
        reference_date: date | None = None,
        politeness_delay: float = 1.0,
        max_concurrency: int = 4,
        sleeper=time.sleep,
    ):
        self.bootstrap = bootstrap if bootstrap is not None else load_bundled_bootstrap()
        self.transport = transport or _default_transport
        self.offline = offline
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.reference_date = reference_date or datetime.now(timezone.utc).date()
        self.politeness_delay = politeness_delay
        self.max_concurrency = max(1, max_concurrency)
        self._sleeper = sleeper
        self._last_call: dict[str, float] = {}
        self._lock = threading.Lock()

    def base_urls_for(self, domain: str) -> list[str]:
        tld = domain.rsplit(".", 1)[-1].lower()
        for tlds, urls in self.bootstrap.get("services", []):
            if tld in [t.lower() for t in tlds]:
                return [u if u.endswith("/") else u + "/" for u in urls]
        return []

    def _fixture_body(self, domain: str) -> dict | None:
        if not self.fixtures_dir:
            return None
        path = self.fixtures_dir / f"{domain}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))

    def _polite_wait(self, host: str) -> None:
        if self.politeness_delay <= 0:
            return
        with self._lock:
            now = time.monotonic()
            wait = self._last_call.get(host, -1e9) + self.politeness_delay - now
            self._last_call[host] = max(now, now + wait)
        if wait > 0:
            self._sleeper(wait)

    def lookup(self, domain: str) -> DomainRecord:
        """Resolve one registrable domain; unknowns on any failure."""
        domain = domain.strip().lower().rstrip(".")
        fixture = self._fixture_body(domain)
        if fixture is not None:
            return parse_rdap_domain(domain, fixture, self.reference_date)
        if self.offline:
            return _unknown_record(domain)
        try:
            bases = self.base_urls_for(domain)
            if not bases:
                raise RdapUnavailable(f"no RDAP service for {domain!r} in bootstrap")
            for base in bases:
                host = base.split("/")[2] if "//" in base else base
                self._polite_wait(host)
                try:
                    status, body = self.transport(f"{base}domain/{domain}")
                except Exception as exc:
                    raise RdapUnavailable(str(exc)) from exc
                if status == 200 and isinstance(body, dict):
                    return parse_rdap_domain(domain, body, self.reference_date)
            return _unknown_record(domain)
        except RdapUnavailable:
            return _unknown_record(domain)

    def lookup_batch(self, domains: list[str]) -> list[DomainRecord]:
        """Concurrent lookups (bounded fan-out); order follows the input."""
        with ThreadPoolExecutor(max_workers=self.max_concurrency) as pool:
            return list(pool.map(self.lookup, domains))


def load_bundled_bootstrap() -> dict:
    text = resources.files("advertoscope.data").joinpath("rdap_bootstrap.json").read_text("utf-8")
    return json.loads(text)


def rdap_lookup(domain: str, resolver: RdapResolver | None = None) -> DomainRecord:
    """One-shot lookup with a default resolver (online unless configured)."""
    return (resolver or RdapResolver()).lookup(domain)


def refresh_bootstrap(destination: str | Path, transport=None) -> Path:
    """Fetch the IANA bootstrap registry to ``destination`` (online)."""
    if transport is None:
        transport = _default_transport
    status, body = transport(IANA_BOOTSTRAP_URL)
    if status != 200 or "services" not in body:
        raise RdapUnavailable(f"bootstrap refresh failed with HTTP {status}")
    dest = Path(destination)
    dest.write_text(json.dumps(body, indent=2), encoding="utf-8")
    return dest
