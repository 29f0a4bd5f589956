"""Embedded 5x7 bitmap glyphs for deterministic, font-free text rendering.

Coverage is the small alphabet the generator actually prints: digits,
sign/decimal characters, and the lowercase letters used in category and
series labels.  Unknown characters render as blanks.
"""

from __future__ import annotations

import numpy as np

GLYPH_WIDTH = 5
GLYPH_HEIGHT = 7
GLYPH_ADVANCE = 6  # width plus one column of spacing

_GLYPHS: dict[str, tuple[str, ...]] = {
    "0": (".XXX.", "X...X", "X..XX", "X.X.X", "XX..X", "X...X", ".XXX."),
    "1": ("..X..", ".XX..", "..X..", "..X..", "..X..", "..X..", ".XXX."),
    "2": (".XXX.", "X...X", "....X", "...X.", "..X..", ".X...", "XXXXX"),
    "3": (".XXX.", "X...X", "....X", "..XX.", "....X", "X...X", ".XXX."),
    "4": ("...X.", "..XX.", ".X.X.", "X..X.", "XXXXX", "...X.", "...X."),
    "5": ("XXXXX", "X....", "XXXX.", "....X", "....X", "X...X", ".XXX."),
    "6": (".XXX.", "X....", "X....", "XXXX.", "X...X", "X...X", ".XXX."),
    "7": ("XXXXX", "....X", "...X.", "..X..", "..X..", "..X..", "..X.."),
    "8": (".XXX.", "X...X", "X...X", ".XXX.", "X...X", "X...X", ".XXX."),
    "9": (".XXX.", "X...X", "X...X", ".XXXX", "....X", "....X", ".XXX."),
    "-": (".....", ".....", ".....", "XXXXX", ".....", ".....", "....."),
    "+": (".....", "..X..", "..X..", "XXXXX", "..X..", "..X..", "....."),
    ".": (".....", ".....", ".....", ".....", ".....", ".XX..", ".XX.."),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
    "a": (".....", ".....", ".XXX.", "....X", ".XXXX", "X...X", ".XXXX"),
    "b": ("X....", "X....", "XXXX.", "X...X", "X...X", "X...X", "XXXX."),
    "c": (".....", ".....", ".XXX.", "X....", "X....", "X...X", ".XXX."),
    "d": ("....X", "....X", ".XXXX", "X...X", "X...X", "X...X", ".XXXX"),
    "e": (".....", ".....", ".XXX.", "X...X", "XXXXX", "X....", ".XXX."),
    "g": (".....", ".XXXX", "X...X", "X...X", ".XXXX", "....X", ".XXX."),
    "i": ("..X..", ".....", ".XX..", "..X..", "..X..", "..X..", ".XXX."),
    "l": (".XX..", "..X..", "..X..", "..X..", "..X..", "..X..", ".XXX."),
    "m": (".....", ".....", "XX.X.", "X.X.X", "X.X.X", "X.X.X", "X.X.X"),
    "n": (".....", ".....", "XXXX.", "X...X", "X...X", "X...X", "X...X"),
    "o": (".....", ".....", ".XXX.", "X...X", "X...X", "X...X", ".XXX."),
    "p": (".....", "XXXX.", "X...X", "X...X", "XXXX.", "X....", "X...."),
    "r": (".....", ".....", "X.XX.", "XX..X", "X....", "X....", "X...."),
    "s": (".....", ".....", ".XXXX", "X....", ".XXX.", "....X", "XXXX."),
    "t": ("..X..", "..X..", "XXXXX", "..X..", "..X..", "..X.X", "...X."),
    "u": (".....", ".....", "X...X", "X...X", "X...X", "X...X", ".XXXX"),
    "x": (".....", ".....", "X...X", ".X.X.", "..X..", ".X.X.", "X...X"),
    "y": (".....", "X...X", "X...X", ".XXXX", "....X", "X...X", ".XXX."),
}

_MASKS = {
    ch: np.array([[c == "X" for c in row] for row in rows], dtype=bool)
    for ch, rows in _GLYPHS.items()
}


def text_width(text: str) -> int:
    return GLYPH_ADVANCE * len(text)


def draw_text(canvas: np.ndarray, x: int, y: int, text: str,
              color: tuple[int, int, int]) -> None:
    """Stamp text onto an rgb8 canvas, clipped to the canvas bounds."""
    h, w = canvas.shape[:2]
    col = np.array(color, dtype=np.uint8)
    for k, ch in enumerate(text):
        mask = _MASKS.get(ch)
        if mask is None:
            continue
        gx = x + k * GLYPH_ADVANCE
        for dy in range(GLYPH_HEIGHT):
            py = y + dy
            if not 0 <= py < h:
                continue
            for dx in range(GLYPH_WIDTH):
                px = gx + dx
                if 0 <= px < w and mask[dy, dx]:
                    canvas[py, px] = col
