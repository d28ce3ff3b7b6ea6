"""Grayscale rasters, label maps and binary PGM (P5) I/O."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from segseed.errors import DimensionMismatchError, InvalidClassError, PGMError

BACKGROUND, CSF, GM, WM = 0, 1, 2, 3
TISSUE_CLASSES = (CSF, GM, WM)
CLASS_NAMES = {BACKGROUND: "background", CSF: "CSF", GM: "GM", WM: "WM"}


class Point(NamedTuple):
    x: int
    y: int

    def __str__(self):
        return f"{self.x},{self.y}"


def _frozen(values, dtype=np.uint8) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Image2D:
    """Immutable 8-bit grayscale image stored as a (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.pixels)
        if raw.ndim != 2 or raw.shape[0] < 1 or raw.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {raw.shape}")
        if raw.dtype != np.uint8:
            if raw.size and (raw.min() < 0 or raw.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            if np.issubdtype(raw.dtype, np.floating) and not np.all(raw == np.round(raw)):
                raise ValueError("intensities must be integers")
        object.__setattr__(self, "pixels", _frozen(raw))

    @classmethod
    def from_values(cls, width: int, height: int, data) -> "Image2D":
        """Build from a row-major flat sequence."""
        data = list(data)
        if len(data) != width * height:
            raise ValueError(f"expected {width * height} values, got {len(data)}")
        return cls(np.array(data, dtype=np.int64).reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    @property
    def data(self) -> list[int]:
        return self.pixels.ravel().tolist()

    def __getitem__(self, p: Point) -> int:
        return int(self.pixels[p[1], p[0]])

    def contains(self, p: Point) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height

    def __eq__(self, other):
        if not isinstance(other, Image2D) or type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class LabelMap(Image2D):
    """Per-pixel class codes: 0 background, 1 CSF, 2 GM, 3 WM."""

    def __post_init__(self):
        super().__post_init__()
        if self.pixels.max() > WM:
            raise ValueError(f"label codes must be in 0..3, found {int(self.pixels.max())}")

    @property
    def labels(self) -> list[int]:
        return self.data

    @classmethod
    def blank(cls, width: int, height: int) -> "LabelMap":
        return cls(np.zeros((height, width), dtype=np.uint8))


def check_same_shape(a: Image2D, b: Image2D, what="images") -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"{what} differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def mask_of_class(labels: LabelMap, class_code: int) -> Image2D:
    """Binary image, 1 where ``labels`` equals ``class_code``."""
    if class_code not in TISSUE_CLASSES:
        raise InvalidClassError(f"invalid class code {class_code!r}; expected 1, 2 or 3")
    return Image2D((labels.pixels == class_code).astype(np.uint8))


# Header tokens are separated by whitespace and may be interleaved with
# comments; exactly one whitespace byte separates maxval from the raster.
_TOKEN = re.compile(rb"(?:\s|#[^\n\r]*[\n\r])*([^\s#]+)")


def _read_header(buf: bytes):
    if not buf:
        raise PGMError("header", "truncated header (empty file)")
    pos = 0
    tokens = []
    for name in ("magic", "width", "height", "maxval"):
        m = _TOKEN.match(buf, pos)
        if m is None:
            raise PGMError(name, "truncated header")
        tokens.append(m.group(1))
        pos = m.end()
    if pos >= len(buf) or buf[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r", b"\v", b"\f"):
        raise PGMError("maxval", "truncated header (no separator before raster)")
    magic, w, h, maxval = tokens
    if magic != b"P5":
        raise PGMError("magic", f"expected P5, got {magic[:8]!r}")
    values = {}
    for name, tok in (("width", w), ("height", h), ("maxval", maxval)):
        if not tok.isdigit():
            raise PGMError(name, f"not a non-negative integer: {tok[:16]!r}")
        values[name] = int(tok)
    if values["width"] < 1 or values["height"] < 1:
        raise PGMError("width" if values["width"] < 1 else "height", "must be >= 1")
    if values["maxval"] != 255:
        raise PGMError("maxval", f"unsupported maxval {values['maxval']} (only 255)")
    return values["width"], values["height"], pos + 1


def parse_pgm(buf: bytes) -> Image2D:
    width, height, offset = _read_header(buf)
    n = width * height
    payload = buf[offset : offset + n]
    if len(payload) < n:
        raise PGMError("payload", f"truncated payload: expected {n} bytes, got {len(payload)}")
    return Image2D(np.frombuffer(payload, dtype=np.uint8).reshape(height, width))


def load_pgm(path) -> Image2D:
    with open(path, "rb") as fh:
        buf = fh.read()
    try:
        return parse_pgm(buf)
    except PGMError as exc:
        raise PGMError(exc.field, f"{path}: {exc.message}") from None


def load_labels(path) -> LabelMap:
    img = load_pgm(path)
    try:
        return LabelMap(img.pixels)
    except ValueError as exc:
        raise PGMError("payload", f"{path}: {exc}") from None


def encode_pgm(image: Image2D) -> bytes:
    return b"P5\n%d %d\n255\n" % (image.width, image.height) + image.pixels.tobytes()


def save_pgm(image: Image2D, path) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(encode_pgm(image))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write PGM: {exc.strerror}", os.fspath(path)) from exc
