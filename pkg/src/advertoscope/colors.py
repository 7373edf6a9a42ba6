"""RGBA color values, CSS color parsing, and source-over alpha compositing.

Everything downstream (contrast ratios, dark-pattern audits) works on opaque
colors, so translucent declarations are flattened with :func:`composite_over`
against the page's background stack before any luminance math runs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass


def _round_half_up(x: float) -> int:
    # Channel rounding is round-half-up by contract (127.5 -> 128), not
    # banker's rounding.
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class ColorValue:
    """An sRGB color with 8-bit channels and a float alpha in [0, 1]."""

    r: int
    g: int
    b: int
    a: float = 1.0

    def __post_init__(self) -> None:
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 255:
                raise ValueError(f"channel {name}={v!r} outside 0..255")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"alpha {self.a!r} outside 0..1")

    @property
    def opaque(self) -> bool:
        return self.a >= 1.0

    def to_hex(self) -> str:
        return f"#{self.r:02x}{self.g:02x}{self.b:02x}"

    def as_tuple(self) -> tuple[int, int, int, float]:
        return (self.r, self.g, self.b, self.a)


BLACK = ColorValue(0, 0, 0, 1.0)
WHITE = ColorValue(255, 255, 255, 1.0)
TRANSPARENT = ColorValue(0, 0, 0, 0.0)

# CSS3 extended color keywords (the full X11 set plus 'transparent').
_NAMED = {
    "aliceblue": (240, 248, 255), "antiquewhite": (250, 235, 215),
    "aqua": (0, 255, 255), "aquamarine": (127, 255, 212),
    "azure": (240, 255, 255), "beige": (245, 245, 220),
    "bisque": (255, 228, 196), "black": (0, 0, 0),
    "blanchedalmond": (255, 235, 205), "blue": (0, 0, 255),
    "blueviolet": (138, 43, 226), "brown": (165, 42, 42),
    "burlywood": (222, 184, 135), "cadetblue": (95, 158, 160),
    "chartreuse": (127, 255, 0), "chocolate": (210, 105, 30),
    "coral": (255, 127, 80), "cornflowerblue": (100, 149, 237),
    "cornsilk": (255, 248, 220), "crimson": (220, 20, 60),
    "cyan": (0, 255, 255), "darkblue": (0, 0, 139),
    "darkcyan": (0, 139, 139), "darkgoldenrod": (184, 134, 11),
    "darkgray": (169, 169, 169), "darkgreen": (0, 100, 0),
    "darkgrey": (169, 169, 169), "darkkhaki": (189, 183, 107),
    "darkmagenta": (139, 0, 139), "darkolivegreen": (85, 107, 47),
    "darkorange": (255, 140, 0), "darkorchid": (153, 50, 204),
    "darkred": (139, 0, 0), "darksalmon": (233, 150, 122),
    "darkseagreen": (143, 188, 143), "darkslateblue": (72, 61, 139),
    "darkslategray": (47, 79, 79), "darkslategrey": (47, 79, 79),
    "darkturquoise": (0, 206, 209), "darkviolet": (148, 0, 211),
    "deeppink": (255, 20, 147), "deepskyblue": (0, 191, 255),
    "dimgray": (105, 105, 105), "dimgrey": (105, 105, 105),
    "dodgerblue": (30, 144, 255), "firebrick": (178, 34, 34),
    "floralwhite": (255, 250, 240), "forestgreen": (34, 139, 34),
    "fuchsia": (255, 0, 255), "gainsboro": (220, 220, 220),
    "ghostwhite": (248, 248, 255), "gold": (255, 215, 0),
    "goldenrod": (218, 165, 32), "gray": (128, 128, 128),
    "green": (0, 128, 0), "greenyellow": (173, 255, 47),
    "grey": (128, 128, 128), "honeydew": (240, 255, 240),
    "hotpink": (255, 105, 180), "indianred": (205, 92, 92),
    "indigo": (75, 0, 130), "ivory": (255, 255, 240),
    "khaki": (240, 230, 140), "lavender": (230, 230, 250),
    "lavenderblush": (255, 240, 245), "lawngreen": (124, 252, 0),
    "lemonchiffon": (255, 250, 205), "lightblue": (173, 216, 230),
    "lightcoral": (240, 128, 128), "lightcyan": (224, 255, 255),
    "lightgoldenrodyellow": (250, 250, 210), "lightgray": (211, 211, 211),
    "lightgreen": (144, 238, 144), "lightgrey": (211, 211, 211),
    "lightpink": (255, 182, 193), "lightsalmon": (255, 160, 122),
    "lightseagreen": (32, 178, 170), "lightskyblue": (135, 206, 250),
    "lightslategray": (119, 136, 153), "lightslategrey": (119, 136, 153),
    "lightsteelblue": (176, 196, 222), "lightyellow": (255, 255, 224),
    "lime": (0, 255, 0), "limegreen": (50, 205, 50),
    "linen": (250, 240, 230), "magenta": (255, 0, 255),
    "maroon": (128, 0, 0), "mediumaquamarine": (102, 205, 170),
    "mediumblue": (0, 0, 205), "mediumorchid": (186, 85, 211),
    "mediumpurple": (147, 112, 219), "mediumseagreen": (60, 179, 113),
    "mediumslateblue": (123, 104, 238), "mediumspringgreen": (0, 250, 154),
    "mediumturquoise": (72, 209, 204), "mediumvioletred": (199, 21, 133),
    "midnightblue": (25, 25, 112), "mintcream": (245, 255, 250),
    "mistyrose": (255, 228, 225), "moccasin": (255, 228, 181),
    "navajowhite": (255, 222, 173), "navy": (0, 0, 128),
    "oldlace": (253, 245, 230), "olive": (128, 128, 0),
    "olivedrab": (107, 142, 35), "orange": (255, 165, 0),
    "orangered": (255, 69, 0), "orchid": (218, 112, 214),
    "palegoldenrod": (238, 232, 170), "palegreen": (152, 251, 152),
    "paleturquoise": (175, 238, 238), "palevioletred": (219, 112, 147),
    "papayawhip": (255, 239, 213), "peachpuff": (255, 218, 185),
    "peru": (205, 133, 63), "pink": (255, 192, 203),
    "plum": (221, 160, 221), "powderblue": (176, 224, 230),
    "purple": (128, 0, 128), "rebeccapurple": (102, 51, 153),
    "red": (255, 0, 0), "rosybrown": (188, 143, 143),
    "royalblue": (65, 105, 225), "saddlebrown": (139, 69, 19),
    "salmon": (250, 128, 114), "sandybrown": (244, 164, 96),
    "seagreen": (46, 139, 87), "seashell": (255, 245, 238),
    "sienna": (160, 82, 45), "silver": (192, 192, 192),
    "skyblue": (135, 206, 235), "slateblue": (106, 90, 205),
    "slategray": (112, 128, 144), "slategrey": (112, 128, 144),
    "snow": (255, 250, 250), "springgreen": (0, 255, 127),
    "steelblue": (70, 130, 180), "tan": (210, 180, 140),
    "teal": (0, 128, 128), "thistle": (216, 191, 216),
    "tomato": (255, 99, 71), "turquoise": (64, 224, 208),
    "violet": (238, 130, 238), "wheat": (245, 222, 179),
    "white": (255, 255, 255), "whitesmoke": (245, 245, 245),
    "yellow": (255, 255, 0), "yellowgreen": (154, 205, 50),
}

_RGB_RE = re.compile(
    r"rgba?\(\s*([0-9.]+%?)\s*,\s*([0-9.]+%?)\s*,\s*([0-9.]+%?)"
    r"(?:\s*,\s*([0-9.]+%?))?\s*\)",
    re.IGNORECASE,
)


def _channel(tok: str) -> int:
    if tok.endswith("%"):
        v = float(tok[:-1]) * 255.0 / 100.0
    else:
        v = float(tok)
    return max(0, min(255, _round_half_up(v)))


def parse_css_color(value: str) -> ColorValue | None:
    """Parse a CSS color literal; returns None for unsupported syntax.

    Supports #rgb/#rgba/#rrggbb/#rrggbbaa, rgb()/rgba(), named colors and
    'transparent'. Gradients, hsl() and var() are not resolved.
    """
    s = value.strip().lower()
    if not s:
        return None
    if s == "transparent":
        return TRANSPARENT
    if s in _NAMED:
        r, g, b = _NAMED[s]
        return ColorValue(r, g, b, 1.0)
    if s.startswith("#"):
        h = s[1:]
        if not re.fullmatch(r"[0-9a-f]+", h):
            return None
        if len(h) == 3:
            h = "".join(c * 2 for c in h)
        elif len(h) == 4:
            h = "".join(c * 2 for c in h)
        if len(h) == 6:
            return ColorValue(int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16), 1.0)
        if len(h) == 8:
            return ColorValue(
                int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16), int(h[6:8], 16) / 255.0
            )
        return None
    m = _RGB_RE.fullmatch(s)
    if m:
        r, g, b = (_channel(m.group(i)) for i in (1, 2, 3))
        a = 1.0
        if m.group(4) is not None:
            tok = m.group(4)
            a = float(tok[:-1]) / 100.0 if tok.endswith("%") else float(tok)
            a = max(0.0, min(1.0, a))
        return ColorValue(r, g, b, a)
    return None


def composite_over(fg: ColorValue, bg: ColorValue) -> ColorValue:
    """Source-over composite of fg onto an opaque bg; result is opaque."""
    if not bg.opaque:
        raise ValueError("background of a composite step must be opaque")
    if fg.opaque:
        return ColorValue(fg.r, fg.g, fg.b, 1.0)
    a = fg.a
    r = _round_half_up(fg.r * a + bg.r * (1.0 - a))
    g = _round_half_up(fg.g * a + bg.g * (1.0 - a))
    b = _round_half_up(fg.b * a + bg.b * (1.0 - a))
    return ColorValue(r, g, b, 1.0)


def effective_color(fg: ColorValue, stack: list[ColorValue]) -> ColorValue:
    """Flatten fg over a background stack (bottom first, bottom opaque).

    Channel rounding happens once, after the whole float-space composite,
    so stacking order cannot accumulate rounding error.
    """
    if not stack:
        raise ValueError("background stack must contain at least the page default")
    bottom = stack[0]
    if not bottom.opaque:
        raise ValueError("bottom of the background stack must be opaque")
    r, g, b = float(bottom.r), float(bottom.g), float(bottom.b)
    for layer in list(stack[1:]) + [fg]:
        a = layer.a
        r = layer.r * a + r * (1.0 - a)
        g = layer.g * a + g * (1.0 - a)
        b = layer.b * a + b * (1.0 - a)
    return ColorValue(_round_half_up(r), _round_half_up(g), _round_half_up(b), 1.0)
