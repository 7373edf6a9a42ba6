"""Registrable-domain (eTLD+1) resolution against a vendored PSL snapshot.

Implements the publicsuffix.org lookup algorithm: among all matching rules
the longest wins, exception rules beat wildcards, and an unmatched hostname
falls back to the implicit ``*`` rule (its last label is the suffix). The
bundled snapshot is versioned and refreshable with ``--refresh-psl``.
"""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..errors import InvalidHostname, UnresolvableSuffix

PSL_URL = "https://publicsuffix.org/list/public_suffix_list.dat"

_LABEL_RE = re.compile(r"^[^\s.]+$")


def _to_unicode_label(label: str) -> str:
    if label.startswith("xn--"):
        try:
            return label.encode("ascii").decode("idna")
        except (UnicodeError, UnicodeDecodeError):
            return label
    return label


@dataclass(frozen=True)
class DomainSplit:
    registrable: str
    public_suffix: str
    is_ip: bool


class PublicSuffixList:
    """Parsed rule set with the standard prevailing-rule semantics."""

    def __init__(self, rules: list[str], version: str = "unversioned"):
        self.version = version
        self._exact: set[tuple[str, ...]] = set()
        self._wildcard: set[tuple[str, ...]] = set()  # stored without the '*'
        self._exception: set[tuple[str, ...]] = set()
        for raw in rules:
            rule = raw.strip().lower()
            if not rule or rule.startswith("//"):
                continue
            exception = rule.startswith("!")
            if exception:
                rule = rule[1:]
            labels = tuple(_to_unicode_label(l) for l in rule.split("."))
            if exception:
                self._exception.add(labels)
            elif labels[0] == "*":
                self._wildcard.add(labels[1:])
            else:
                self._exact.add(labels)

    @classmethod
    def from_text(cls, text: str, version: str = "unversioned") -> "PublicSuffixList":
        return cls(text.splitlines(), version=version)

    @classmethod
    def from_file(cls, path: str | Path) -> "PublicSuffixList":
        p = Path(path)
        return cls.from_text(p.read_text("utf-8"), version=p.name)

    @classmethod
    def bundled(cls) -> "PublicSuffixList":
        text = resources.files("advertoscope.data").joinpath("public_suffix_list.dat").read_text("utf-8")
        version = "bundled-snapshot"
        for line in text.splitlines():
            if line.startswith("// VERSION:"):
                version = line.split(":", 1)[1].strip()
                break
        return cls.from_text(text, version=version)

    def _suffix_length(self, labels: tuple[str, ...]) -> int:
        """Number of trailing labels forming the public suffix."""
        n = len(labels)
        # Exception rules prevail over everything.
        for take in range(n, 0, -1):
            if labels[n - take:] in self._exception:
                return take - 1
        best = 1  # implicit '*' default rule
        for take in range(1, n + 1):
            tail = labels[n - take:]
            if tail in self._exact:
                best = max(best, take)
            # '*.<tail-minus-first>' — wildcard consumes one extra label.
            if take >= 2 and tail[1:] in self._wildcard:
                best = max(best, take)
        return best

    def split(self, host: str) -> DomainSplit:
        """Split a hostname into registrable domain and public suffix.

        IP literals are returned unchanged with is_ip=True. Raises
        InvalidHostname for unparseable input and UnresolvableSuffix when
        the host is itself a public suffix.
        """
        if not host or not host.strip():
            raise InvalidHostname("empty hostname")
        h = host.strip().rstrip(".").lower()
        bare = h[1:-1] if h.startswith("[") and h.endswith("]") else h
        try:
            ipaddress.ip_address(bare)
            return DomainSplit(registrable=h, public_suffix="", is_ip=True)
        except ValueError:
            pass
        if not h:
            raise InvalidHostname(f"hostname {host!r} has no labels")
        labels = h.split(".")
        if any(not _LABEL_RE.match(l) for l in labels):
            raise InvalidHostname(f"hostname {host!r} has empty or malformed labels")
        match_labels = tuple(_to_unicode_label(l) for l in labels)
        suffix_len = self._suffix_length(match_labels)
        if suffix_len >= len(labels):
            raise UnresolvableSuffix(f"{host!r} is itself a public suffix")
        return DomainSplit(
            registrable=".".join(labels[-(suffix_len + 1):]),
            public_suffix=".".join(labels[-suffix_len:]),
            is_ip=False,
        )

    def etld_plus_one(self, host: str) -> str:
        return self.split(host).registrable


@lru_cache(maxsize=1)
def _bundled() -> PublicSuffixList:
    return PublicSuffixList.bundled()


def etld_plus_one(host: str, psl: PublicSuffixList | None = None) -> str:
    """Registrable domain of a hostname using the bundled snapshot by default."""
    return (psl or _bundled()).etld_plus_one(host)


def refresh_psl(destination: str | Path, transport=None) -> Path:
    """Download a fresh PSL snapshot to ``destination`` (online operation)."""
    if transport is None:
        import requests

        def transport(url: str) -> str:
            resp = requests.get(url, timeout=30)
            resp.raise_for_status()
            return resp.text

    text = transport(PSL_URL)
    dest = Path(destination)
    dest.write_text(text, encoding="utf-8")
    return dest
