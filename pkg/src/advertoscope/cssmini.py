"""A deliberately small CSS subset: selectors and declaration blocks.

Selectors support tag, ``.class``, ``#id``, ``[attr=value]`` and the
descendant (space) combinator — nothing else. This is the matching engine
used both for same-document ``<style>`` resolution and for structural
fingerprint rules. External stylesheets are never fetched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import SelectorParseError

_COMMENT_RE = re.compile(r"/\*.*?\*/", re.DOTALL)
_PART_RE = re.compile(
    r"""^
    (?P<tag>\*|[a-zA-Z][a-zA-Z0-9-]*)?
    (?P<rest>(?:[#.][\w-]+|\[[^\]]*\])*)
    $""",
    re.VERBOSE,
)
_TOKEN_RE = re.compile(r"[#.][\w-]+|\[[^\]]*\]")


@dataclass(frozen=True)
class Compound:
    """One space-separated selector part: tag/classes/id/attr constraints."""

    tag: str | None = None
    classes: frozenset[str] = frozenset()
    id: str | None = None
    attrs: tuple[tuple[str, str], ...] = ()

    def matches(self, node: "NodeLike") -> bool:
        if self.tag and self.tag != "*" and node.tag != self.tag:
            return False
        if self.id is not None and node.id != self.id:
            return False
        if not self.classes <= node.classes:
            return False
        for name, value in self.attrs:
            if node.attrs.get(name) != value:
                return False
        return True


@dataclass(frozen=True)
class Selector:
    """A descendant chain of compounds; the last one names the subject."""

    parts: tuple[Compound, ...]
    source: str

    @property
    def specificity(self) -> tuple[int, int, int]:
        ids = sum(1 for p in self.parts if p.id is not None)
        classes = sum(len(p.classes) + len(p.attrs) for p in self.parts)
        tags = sum(1 for p in self.parts if p.tag and p.tag != "*")
        return (ids, classes, tags)

    def matches_chain(self, chain: list["NodeLike"]) -> bool:
        """Match against a root-to-subject node chain (subject last)."""
        if not chain or not self.parts[-1].matches(chain[-1]):
            return False
        # Remaining parts must match strictly closer-to-root ancestors, in order.
        pos = len(chain) - 1
        for part in reversed(self.parts[:-1]):
            pos -= 1
            while pos >= 0 and not part.matches(chain[pos]):
                pos -= 1
            if pos < 0:
                return False
        return True


@dataclass
class NodeLike:
    """The minimal element surface a selector can see."""

    tag: str
    classes: frozenset[str] = frozenset()
    id: str | None = None
    attrs: dict[str, str] = field(default_factory=dict)


def parse_compound(text: str) -> Compound:
    m = _PART_RE.match(text)
    if not m or (not m.group("tag") and not m.group("rest")):
        raise SelectorParseError(f"cannot parse selector part {text!r}")
    tag = m.group("tag")
    classes: set[str] = set()
    ident: str | None = None
    attrs: list[tuple[str, str]] = []
    for tok in _TOKEN_RE.findall(m.group("rest") or ""):
        if tok.startswith("."):
            classes.add(tok[1:])
        elif tok.startswith("#"):
            if ident is not None:
                raise SelectorParseError(f"multiple ids in {text!r}")
            ident = tok[1:]
        else:
            body = tok[1:-1].strip()
            if "=" not in body:
                raise SelectorParseError(f"attribute selector needs '=': {tok!r}")
            name, _, value = body.partition("=")
            attrs.append((name.strip().lower(), value.strip().strip("'\"")))
    return Compound(
        tag=tag.lower() if tag else None,
        classes=frozenset(classes),
        id=ident,
        attrs=tuple(attrs),
    )


def parse_selector(text: str) -> Selector:
    """Parse a descendant-combinator selector; raises SelectorParseError."""
    cleaned = text.strip()
    if not cleaned:
        raise SelectorParseError("empty selector")
    for bad in (">", "+", "~", "::", ":"):
        if bad in cleaned:
            raise SelectorParseError(f"unsupported combinator {bad!r} in {text!r}")
    parts = tuple(parse_compound(p) for p in cleaned.split())
    return Selector(parts=parts, source=cleaned)


def parse_declarations(text: str) -> dict[str, str]:
    """Parse 'prop: value; ...' into a lowercase-keyed dict, last write wins."""
    out: dict[str, str] = {}
    for chunk in text.split(";"):
        if ":" not in chunk:
            continue
        prop, _, value = chunk.partition(":")
        prop = prop.strip().lower()
        value = value.strip()
        if prop and value:
            out[prop] = value
    return out


def _strip_at_rules(css: str) -> str:
    """Drop @-rules (including nested blocks) rather than misparse them."""
    out: list[str] = []
    i = 0
    n = len(css)
    while i < n:
        c = css[i]
        if c == "@":
            # Skip to the end of either the statement or the balanced block.
            j = i
            while j < n and css[j] not in "{;":
                j += 1
            if j < n and css[j] == "{":
                depth = 1
                j += 1
                while j < n and depth:
                    if css[j] == "{":
                        depth += 1
                    elif css[j] == "}":
                        depth -= 1
                    j += 1
            else:
                j += 1
            i = j
        else:
            out.append(c)
            i += 1
    return "".join(out)


def parse_stylesheet(css: str) -> list[tuple[Selector, dict[str, str]]]:
    """Parse a same-document stylesheet into (selector, declarations) rules.

    Unparseable selectors are skipped (lenient), matching how browsers drop
    rules they do not understand.
    """
    css = _COMMENT_RE.sub(" ", css)
    css = _strip_at_rules(css)
    rules: list[tuple[Selector, dict[str, str]]] = []
    for block in css.split("}"):
        if "{" not in block:
            continue
        selector_text, _, body = block.partition("{")
        decls = parse_declarations(body)
        if not decls:
            continue
        for single in selector_text.split(","):
            single = single.strip()
            if not single:
                continue
            try:
                sel = parse_selector(single)
            except SelectorParseError:
                continue
            rules.append((sel, decls))
    return rules
