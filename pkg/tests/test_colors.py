"""Color parsing and alpha compositing."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from advertoscope.colors import (
    BLACK,
    TRANSPARENT,
    WHITE,
    ColorValue,
    composite_over,
    effective_color,
    parse_css_color,
)


def test_channel_validation():
    with pytest.raises(ValueError):
        ColorValue(256, 0, 0)
    with pytest.raises(ValueError):
        ColorValue(0, -1, 0)
    with pytest.raises(ValueError):
        ColorValue(0, 0, 0, 1.5)


@pytest.mark.parametrize(
    "literal, expected",
    [
        ("#000", (0, 0, 0, 1.0)),
        ("#FFFFFF", (255, 255, 255, 1.0)),
        ("#767676", (0x76, 0x76, 0x76, 1.0)),
        ("#00000080", (0, 0, 0, 128 / 255)),
        ("rgb(1, 2, 3)", (1, 2, 3, 1.0)),
        ("rgba(10, 20, 30, 0.5)", (10, 20, 30, 0.5)),
        ("rgb(100%, 0%, 50%)", (255, 0, 128, 1.0)),
        ("red", (255, 0, 0, 1.0)),
        ("rebeccapurple", (102, 51, 153, 1.0)),
        ("transparent", (0, 0, 0, 0.0)),
    ],
)
def test_parse_css_color(literal, expected):
    assert parse_css_color(literal).as_tuple() == expected


@pytest.mark.parametrize("literal", ["", "url(x)", "#12", "hsl(1,2%,3%)", "notacolor"])
def test_parse_css_color_unsupported(literal):
    assert parse_css_color(literal) is None


def test_opaque_fg_unchanged():
    c = ColorValue(12, 34, 56, 1.0)
    assert effective_color(c, [WHITE]) == c


def test_fully_transparent_fg_yields_background():
    assert effective_color(TRANSPARENT, [WHITE]) == WHITE


def test_half_black_over_white_rounds_half_up():
    # 0*0.5 + 255*0.5 = 127.5 -> round-half-up -> 128 on every channel
    out = effective_color(ColorValue(0, 0, 0, 0.5), [WHITE])
    assert out == ColorValue(128, 128, 128, 1.0)


def test_stack_composites_bottom_up():
    # 50% black over (50% white over black) = 50% black over #808080 -> 64
    out = effective_color(ColorValue(0, 0, 0, 0.5), [BLACK, ColorValue(255, 255, 255, 0.5)])
    assert out == ColorValue(64, 64, 64, 1.0)


def test_bottom_must_be_opaque():
    with pytest.raises(ValueError):
        effective_color(BLACK, [ColorValue(0, 0, 0, 0.5)])
    with pytest.raises(ValueError):
        effective_color(BLACK, [])


def test_composite_over_matches_effective_for_single_layer():
    fg = ColorValue(200, 100, 50, 0.25)
    assert composite_over(fg, WHITE) == effective_color(fg, [WHITE])


@given(
    st.integers(0, 255), st.integers(0, 255), st.integers(0, 255),
    st.floats(0.0, 1.0, allow_nan=False),
)
def test_effective_color_always_opaque(r, g, b, a):
    out = effective_color(ColorValue(r, g, b, a), [WHITE])
    assert out.opaque
    assert 0 <= out.r <= 255 and 0 <= out.g <= 255 and 0 <= out.b <= 255
