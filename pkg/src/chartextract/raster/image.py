"""Image buffer plus PNG codec, grayscale conversion, and binarization."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import ChartExtractError


class ImageBuffer:
    """Immutable 8-bit raster: gray8 (H, W) or rgb8 (H, W, 3), uint8."""

    def __init__(self, array: np.ndarray):
        arr = np.asarray(array)
        if arr.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {arr.dtype}")
        if arr.ndim == 2:
            channels = "gray8"
        elif arr.ndim == 3 and arr.shape[2] == 3:
            channels = "rgb8"
        else:
            raise ValueError(f"unsupported array shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be >= 1")
        arr = np.ascontiguousarray(arr).copy()
        arr.flags.writeable = False
        self._array = arr
        self.channels = channels

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def width(self) -> int:
        return self._array.shape[1]

    @property
    def height(self) -> int:
        return self._array.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.channels == other.channels and np.array_equal(self._array, other._array)

    def __repr__(self) -> str:
        return f"ImageBuffer({self.channels}, {self.width}x{self.height})"


def decode_image(data: bytes) -> ImageBuffer:
    """Decode a PNG stream into gray8 or rgb8. Other formats/depths error."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format != "PNG":
                raise ChartExtractError(f"unsupported image format {img.format!r}, only PNG")
            if img.mode == "L":
                return ImageBuffer(np.asarray(img, dtype=np.uint8))
            if img.mode == "RGB":
                return ImageBuffer(np.asarray(img, dtype=np.uint8))
            if img.mode in ("P", "RGBA", "LA", "1"):
                # paletted / alpha PNGs are still 8-bit sources; flatten to RGB
                return ImageBuffer(np.asarray(img.convert("RGB"), dtype=np.uint8))
            raise ChartExtractError(f"unsupported PNG mode {img.mode!r}")
    except UnidentifiedImageError as exc:
        raise ChartExtractError("malformed PNG stream") from exc
    except OSError as exc:
        raise ChartExtractError(f"truncated or corrupt PNG stream: {exc}") from exc


def encode_image(img: ImageBuffer) -> bytes:
    mode = "L" if img.channels == "gray8" else "RGB"
    out = io.BytesIO()
    Image.fromarray(img.array, mode=mode).save(out, format="PNG")
    return out.getvalue()


def to_gray(img: ImageBuffer) -> ImageBuffer:
    """ITU-R 601 luma: round(0.299 r + 0.587 g + 0.114 b), saturated."""
    if img.channels == "gray8":
        return img
    rgb = img.array.astype(np.float64)
    gray = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    return ImageBuffer(np.clip(np.round(gray), 0, 255).astype(np.uint8))


def binarize(img: ImageBuffer, threshold: int, polarity: str = "dark-foreground") -> ImageBuffer:
    """Threshold a gray image to 0/255.

    dark-foreground: value < threshold is foreground (255).
    light-foreground: value >= threshold is foreground.
    """
    if img.channels != "gray8":
        raise ValueError("binarize requires a gray8 image")
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must be in 0..255")
    if polarity == "dark-foreground":
        mask = img.array < threshold
    elif polarity == "light-foreground":
        mask = img.array >= threshold
    else:
        raise ValueError(f"unknown polarity {polarity!r}")
    return ImageBuffer(np.where(mask, 255, 0).astype(np.uint8))
