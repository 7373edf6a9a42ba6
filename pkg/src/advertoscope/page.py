"""Uniform page model: visible text elements with styles and positions.

Two ingestion paths produce the same :class:`PageDocument`:

* :func:`parse_static` — lenient HTML parsing of raw markup. Styles come from
  inline ``style`` attributes and same-document ``<style>`` blocks only;
  vertical position is approximated by character offset into the page's
  plain text (``mode="static"``).
* :func:`ingest_snapshot` — a rendered-snapshot capture with true geometry
  and computed styles (``mode="snapshot"``).

Reports carry ``mode`` so consumers know which position semantics apply.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path

from . import cssmini
from .colors import BLACK, WHITE, ColorValue, effective_color, parse_css_color
from .errors import EmptyDocument, GeometryError, SchemaError

DEFAULT_FONT_PX = 16.0

# Elements whose text is never page content.
_NON_CONTENT = {"script", "style", "template", "noscript", "head", "title", "textarea"}
_VOID = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}
_FONT_KEYWORDS = {
    "xx-small": 9.0, "x-small": 10.0, "small": 13.0, "medium": 16.0,
    "large": 18.0, "x-large": 24.0, "xx-large": 32.0,
}


def normalize_extracted(s: str) -> str:
    """NFKC-normalize, collapse whitespace runs to one space, trim."""
    return " ".join(unicodedata.normalize("NFKC", s).split())


@dataclass(frozen=True)
class RawPage:
    """A fetched page: absolute URL, decoded HTML text, fetch timestamp."""

    url: str
    html: str
    fetched_at: str = ""

    def __post_init__(self) -> None:
        if not self.html:
            raise ValueError("html must be non-empty")
        if "://" not in self.url:
            raise ValueError(f"url {self.url!r} is not absolute")

    @classmethod
    def from_bytes(cls, url: str, raw: bytes, fetched_at: str = "") -> "RawPage":
        return cls(url=url, html=raw.decode("utf-8", errors="replace"), fetched_at=fetched_at)


@dataclass(frozen=True)
class SnapshotElement:
    text: str
    tag: str
    attributes: dict[str, str]
    font_size_px: float
    fg_color: ColorValue
    bg_color: ColorValue
    top_px: float
    height_px: float
    visible: bool


@dataclass(frozen=True)
class RenderedSnapshot:
    """Rendered geometry captured by a companion browser script."""

    url: str
    elements: tuple[SnapshotElement, ...]
    document_height_px: float


@dataclass(frozen=True)
class TextElement:
    """One visible-or-hidden text run with resolved style and position."""

    text: str
    tag: str
    attr_classes: frozenset[str]
    attr_id: str | None
    attrs: dict[str, str]
    font_size_px: float
    fg_color: ColorValue
    bg_color: ColorValue
    position_pct: float
    char_offset: int
    hidden: bool
    # Root-to-self node chain; selector rules match against it. Snapshot
    # captures are flat, so their chain holds only the element itself.
    chain: tuple[cssmini.NodeLike, ...] = ()

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "tag": self.tag,
            "classes": sorted(self.attr_classes),
            "id": self.attr_id,
            "attrs": dict(self.attrs),
            "font_size_px": self.font_size_px,
            "fg_color": list(self.fg_color.as_tuple()),
            "bg_color": list(self.bg_color.as_tuple()),
            "position_pct": self.position_pct,
            "char_offset": self.char_offset,
            "hidden": self.hidden,
            "chain": [
                {"tag": n.tag, "classes": sorted(n.classes), "id": n.id, "attrs": dict(n.attrs)}
                for n in self.chain
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TextElement":
        fg = d["fg_color"]
        bg = d["bg_color"]
        return cls(
            text=d["text"],
            tag=d["tag"],
            attr_classes=frozenset(d["classes"]),
            attr_id=d["id"],
            attrs=dict(d["attrs"]),
            font_size_px=d["font_size_px"],
            fg_color=ColorValue(fg[0], fg[1], fg[2], fg[3]),
            bg_color=ColorValue(bg[0], bg[1], bg[2], bg[3]),
            position_pct=d["position_pct"],
            char_offset=d["char_offset"],
            hidden=d["hidden"],
            chain=tuple(
                cssmini.NodeLike(
                    tag=n["tag"], classes=frozenset(n["classes"]), id=n["id"], attrs=dict(n["attrs"])
                )
                for n in d["chain"]
            ),
        )


@dataclass(frozen=True)
class PageDocument:
    """Immutable parsed page; safe to share across threads."""

    url: str
    elements: tuple[TextElement, ...]
    plain_text: str
    html_char_count: int
    mode: str  # "static" | "snapshot"

    def visible_text_elements(self) -> list[TextElement]:
        """Exactly the elements with hidden=False, document order preserved."""
        return [e for e in self.elements if not e.hidden]

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "mode": self.mode,
            "html_char_count": self.html_char_count,
            "plain_text": self.plain_text,
            "elements": [e.to_dict() for e in self.elements],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PageDocument":
        return cls(
            url=d["url"],
            elements=tuple(TextElement.from_dict(e) for e in d["elements"]),
            plain_text=d["plain_text"],
            html_char_count=d["html_char_count"],
            mode=d["mode"],
        )

    @classmethod
    def from_json(cls, s: str) -> "PageDocument":
        return cls.from_dict(json.loads(s))


# --------------------------------------------------------------------------
# Static-mode parsing
# --------------------------------------------------------------------------


class _Dom:
    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: dict[str, str], parent: "_Dom | None"):
        self.tag = tag
        self.attrs = attrs
        self.children: list[object] = []  # _Dom or str
        self.parent = parent


class _TreeBuilder(HTMLParser):
    """Error-tolerant DOM builder; malformed markup never aborts."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = _Dom("html", {}, None)
        self._stack = [self.root]
        self.style_blocks: list[str] = []
        self._in_style = 0

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        node = _Dom(tag, {k.lower(): (v if v is not None else "") for k, v in attrs}, self._stack[-1])
        self._stack[-1].children.append(node)
        if tag == "style":
            self._in_style += 1
        if tag not in _VOID:
            self._stack.append(node)

    def handle_startendtag(self, tag, attrs):
        tag = tag.lower()
        node = _Dom(tag, {k.lower(): (v if v is not None else "") for k, v in attrs}, self._stack[-1])
        self._stack[-1].children.append(node)

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag == "style" and self._in_style:
            self._in_style -= 1
        for i in range(len(self._stack) - 1, 0, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return
        # Stray close tag: ignore.

    def handle_data(self, data):
        if self._in_style:
            self.style_blocks.append(data)
            return
        self._stack[-1].children.append(data)


def _parse_font_size(value: str, parent_px: float) -> float | None:
    v = value.strip().lower()
    if v in _FONT_KEYWORDS:
        return _FONT_KEYWORDS[v]
    try:
        if v.endswith("px"):
            return float(v[:-2])
        if v.endswith("pt"):
            return float(v[:-2]) * 4.0 / 3.0
        if v.endswith("rem"):
            return float(v[:-3]) * DEFAULT_FONT_PX
        if v.endswith("em"):
            return float(v[:-2]) * parent_px
        if v.endswith("%"):
            return float(v[:-1]) * parent_px / 100.0
        return float(v)  # bare number, e.g. "0"
    except ValueError:
        return None


class _Style:
    """Resolved style state carried down the DOM walk."""

    __slots__ = ("fg", "bg_float", "font_px", "display_none", "visibility_hidden")

    def __init__(self, fg, bg_float, font_px, display_none, visibility_hidden):
        self.fg = fg
        self.bg_float = bg_float  # (r, g, b) floats, already opaque
        self.font_px = font_px
        self.display_none = display_none
        self.visibility_hidden = visibility_hidden


def _compose_float(bg: tuple[float, float, float], layer: ColorValue) -> tuple[float, float, float]:
    a = layer.a
    return (
        layer.r * a + bg[0] * (1.0 - a),
        layer.g * a + bg[1] * (1.0 - a),
        layer.b * a + bg[2] * (1.0 - a),
    )


def _round_color(rgb: tuple[float, float, float]) -> ColorValue:
    from .colors import _round_half_up

    return ColorValue(_round_half_up(rgb[0]), _round_half_up(rgb[1]), _round_half_up(rgb[2]), 1.0)


def _node_like(node: _Dom) -> cssmini.NodeLike:
    classes = frozenset((node.attrs.get("class") or "").split())
    return cssmini.NodeLike(
        tag=node.tag, classes=classes, id=node.attrs.get("id"), attrs=node.attrs
    )


@dataclass
class _PendingElement:
    text: str
    node: cssmini.NodeLike
    chain: tuple[cssmini.NodeLike, ...]
    font_px: float
    fg: ColorValue
    bg: ColorValue
    hidden: bool


def _resolve(
    node: _Dom,
    chain: list[cssmini.NodeLike],
    style: _Style,
    rules: list[tuple[int, cssmini.Selector, dict[str, str]]],
    out: list[_PendingElement],
) -> None:
    like = _node_like(node)
    chain = chain + [like]

    # Cascade: stylesheet rules by (specificity, source order), inline last.
    decls: dict[str, str] = {}
    applicable = [
        (sel.specificity, order, d)
        for order, sel, d in rules
        if sel.matches_chain(chain)
    ]
    applicable.sort(key=lambda t: (t[0], t[1]))
    for _, _, d in applicable:
        decls.update(d)
    inline = node.attrs.get("style")
    if inline:
        decls.update(cssmini.parse_declarations(inline))

    fg = style.fg
    if "color" in decls:
        parsed = parse_css_color(decls["color"])
        if parsed is not None:
            fg = parsed
    bg_float = style.bg_float
    bg_decl = decls.get("background-color") or decls.get("background")
    if bg_decl:
        parsed = parse_css_color(bg_decl)
        if parsed is not None:
            bg_float = _compose_float(bg_float, parsed)
    font_px = style.font_px
    if "font-size" in decls:
        parsed_px = _parse_font_size(decls["font-size"], style.font_px)
        if parsed_px is not None:
            font_px = parsed_px

    display_none = style.display_none or decls.get("display", "").strip().lower() == "none"
    if "hidden" in node.attrs:
        display_none = True
    visibility_hidden = style.visibility_hidden
    vis = decls.get("visibility", "").strip().lower()
    if vis in ("hidden", "collapse"):
        visibility_hidden = True
    elif vis == "visible":
        visibility_hidden = False

    new_style = _Style(fg, bg_float, font_px, display_none, visibility_hidden)
    hidden = display_none or visibility_hidden or font_px <= 0.0

    bg_color = _round_color(bg_float)
    fg_eff = _round_color(_compose_float(bg_float, fg)) if not fg.opaque else ColorValue(fg.r, fg.g, fg.b, 1.0)

    for child in node.children:
        if isinstance(child, _Dom):
            if child.tag in _NON_CONTENT:
                continue
            _resolve(child, chain, new_style, rules, out)
        else:
            text = normalize_extracted(child)
            if not text:
                continue
            out.append(
                _PendingElement(
                    text=text,
                    node=like,
                    chain=tuple(chain),
                    font_px=font_px,
                    fg=fg_eff,
                    bg=bg_color,
                    hidden=hidden,
                )
            )


def parse_static(page: RawPage) -> PageDocument:
    """Parse raw HTML into a PageDocument (static mode).

    Styles come from inline attributes and same-document ``<style>`` blocks
    with simple selectors; unstyled text defaults to 16px black on white.
    Vertical position is the character-offset fraction of the page's plain
    text — a documented proxy for rendered geometry.

    Raises EmptyDocument if no text nodes survive parsing.
    """
    builder = _TreeBuilder()
    builder.feed(page.html)
    builder.close()

    rules = [
        (i, sel, decls)
        for i, (sel, decls) in enumerate(cssmini.parse_stylesheet("\n".join(builder.style_blocks)))
    ]

    pending: list[_PendingElement] = []
    base = _Style(
        fg=BLACK, bg_float=(255.0, 255.0, 255.0), font_px=DEFAULT_FONT_PX,
        display_none=False, visibility_hidden=False,
    )
    _resolve(builder.root, [], base, rules, pending)
    if not pending:
        raise EmptyDocument(f"no text nodes survive parsing of {page.url}")

    # Offsets index into plain_text (single-space joined visible texts).
    parts: list[str] = []
    cursor = 0
    offsets: list[int] = []
    for p in pending:
        offsets.append(cursor)
        if not p.hidden:
            parts.append(p.text)
            cursor += len(p.text) + 1  # +1 for the joining space
    plain_text = " ".join(parts)
    total = len(plain_text)

    elements = tuple(
        TextElement(
            text=p.text,
            tag=p.node.tag,
            attr_classes=p.node.classes,
            attr_id=p.node.id,
            attrs=dict(p.node.attrs),
            font_size_px=p.font_px,
            fg_color=p.fg,
            bg_color=p.bg,
            position_pct=min(100.0, offsets[i] / total * 100.0) if total else 0.0,
            char_offset=offsets[i],
            hidden=p.hidden,
            chain=p.chain,
        )
        for i, p in enumerate(pending)
    )
    return PageDocument(
        url=page.url,
        elements=elements,
        plain_text=plain_text,
        html_char_count=len(page.html),
        mode="static",
    )


# --------------------------------------------------------------------------
# Snapshot-mode ingestion
# --------------------------------------------------------------------------


def _color_from_json(value, where: str) -> ColorValue:
    if (
        not isinstance(value, (list, tuple))
        or len(value) not in (3, 4)
        or not all(isinstance(c, (int, float)) for c in value)
    ):
        raise SchemaError(f"{where}: color must be [r, g, b] or [r, g, b, a]")
    r, g, b = (int(value[i]) for i in range(3))
    a = float(value[3]) if len(value) == 4 else 1.0
    try:
        return ColorValue(r, g, b, a)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def snapshot_from_dict(d: dict) -> RenderedSnapshot:
    """Validate and build a RenderedSnapshot from its file representation."""
    try:
        url = d["url"]
        height = float(d["document_height_px"])
        raw_elements = d["elements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"snapshot missing required field: {exc}") from exc
    if height <= 0:
        raise SchemaError("document_height_px must be > 0")
    elements = []
    for i, e in enumerate(raw_elements):
        where = f"elements[{i}]"
        try:
            el = SnapshotElement(
                text=str(e["text"]),
                tag=str(e["tag"]).lower(),
                attributes={str(k).lower(): str(v) for k, v in (e.get("attributes") or {}).items()},
                font_size_px=float(e["font_size_px"]),
                fg_color=_color_from_json(e["fg_color"], where),
                bg_color=_color_from_json(e["bg_color"], where),
                top_px=float(e["top_px"]),
                height_px=float(e["height_px"]),
                visible=bool(e["visible"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: {exc}") from exc
        if el.font_size_px <= 0:
            raise SchemaError(f"{where}: font_size_px must be > 0")
        if el.height_px < 0:
            raise SchemaError(f"{where}: height_px must be >= 0")
        elements.append(el)
    snap = RenderedSnapshot(url=url, elements=tuple(elements), document_height_px=height)
    for i, el in enumerate(snap.elements):
        if el.top_px < 0:
            raise GeometryError(f"elements[{i}]: top_px {el.top_px} < 0")
        if el.visible and el.top_px > snap.document_height_px:
            raise GeometryError(
                f"elements[{i}]: visible element at top_px {el.top_px} beyond document height"
            )
    return snap


def load_snapshot(path: str | Path) -> RenderedSnapshot:
    """Read a one-page-per-file snapshot capture (JSON)."""
    with open(path, "r", encoding="utf-8") as fh:
        return snapshot_from_dict(json.load(fh))


def ingest_snapshot(snap: RenderedSnapshot) -> PageDocument:
    """Build a PageDocument from rendered geometry (snapshot mode)."""
    if snap.document_height_px <= 0:
        raise GeometryError("document_height_px must be > 0")

    pending = []
    for el in snap.elements:
        text = normalize_extracted(el.text)
        if not text:
            continue
        hidden = (not el.visible) or el.height_px == 0.0
        pct = el.top_px / snap.document_height_px * 100.0
        pct = min(100.0, max(0.0, pct))
        bg = effective_color(el.bg_color, [WHITE])
        fg = effective_color(el.fg_color, [bg])
        classes = frozenset((el.attributes.get("class") or "").split())
        like = cssmini.NodeLike(
            tag=el.tag, classes=classes, id=el.attributes.get("id"), attrs=el.attributes
        )
        pending.append((text, el, hidden, pct, fg, bg, like))

    parts: list[str] = []
    cursor = 0
    elements = []
    for text, el, hidden, pct, fg, bg, like in pending:
        offset = cursor
        if not hidden:
            parts.append(text)
            cursor += len(text) + 1
        elements.append(
            TextElement(
                text=text,
                tag=el.tag,
                attr_classes=like.classes,
                attr_id=like.id,
                attrs=dict(el.attributes),
                font_size_px=el.font_size_px,
                fg_color=fg,
                bg_color=bg,
                position_pct=pct,
                char_offset=offset,
                hidden=hidden,
                chain=(like,),
            )
        )
    return PageDocument(
        url=snap.url,
        elements=tuple(elements),
        plain_text=" ".join(parts),
        html_char_count=0,
        mode="snapshot",
    )
