"""Image containers, gray-level histograms and PGM file I/O.

All containers are frozen dataclasses wrapping read-only numpy arrays, so
they can be shared freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_LEVELS = 256


class DegenerateInputError(ValueError):
    """Input carries too little information for the requested operation."""


class PGMFormatError(ValueError):
    """Malformed or truncated PGM byte stream."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GrayImage:
    """2-D scalar raster of quantized intensities in ``[0, levels-1]``.

    ``pixels`` has shape ``(height, width)``; row-major order is the numpy
    C order.
    """

    pixels: np.ndarray
    levels: int = DEFAULT_LEVELS

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"expected a non-empty 2-D pixel array, got shape {px.shape}")
        if not np.issubdtype(px.dtype, np.integer):
            raise ValueError(f"pixels must be integers, got {px.dtype}")
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        if px.min() < 0 or px.max() >= self.levels:
            raise ValueError(f"pixel values must lie in [0, {self.levels - 1}]")
        dtype = np.uint8 if self.levels <= 256 else np.int64
        object.__setattr__(self, "pixels", _frozen(px.astype(dtype)))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.levels == other.levels and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel class index in ``[0, num_classes)``."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2 or lab.size == 0:
            raise ValueError(f"expected a non-empty 2-D label array, got shape {lab.shape}")
        if not np.issubdtype(lab.dtype, np.integer):
            raise ValueError(f"labels must be integers, got {lab.dtype}")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if lab.min() < 0 or lab.max() >= self.num_classes:
            raise ValueError(f"labels must lie in [0, {self.num_classes - 1}]")
        object.__setattr__(self, "labels", _frozen(lab.astype(np.int64)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.num_classes == other.num_classes and np.array_equal(self.labels, other.labels)


@dataclass(frozen=True, eq=False)
class MembershipImage:
    """Per-pixel vectors of non-negative class scores, shape ``(H, W, C)``.

    ``normalized`` marks fields whose per-pixel vectors sum to one
    (posteriors); likelihood fields leave it ``False``.
    """

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or v.shape[0] == 0 or v.shape[1] == 0 or v.shape[2] == 0:
            raise ValueError(f"expected an (H, W, C) array, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or v.min() < 0:
            raise ValueError("membership values must be finite and non-negative")
        if self.normalized and not np.allclose(v.sum(axis=2), 1.0, rtol=0, atol=1e-6):
            raise ValueError("normalized membership vectors must sum to 1")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def num_classes(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[:2]

    def plane(self, c: int) -> np.ndarray:
        return self.values[:, :, c]


@dataclass(frozen=True, eq=False)
class Histogram:
    """Normalized gray-level histogram with prefix moment tables.

    ``cum_prob[i]`` and ``cum_mean[i]`` are inclusive prefix sums of
    ``p_j`` and ``j * p_j`` for ``j <= i``; ``cum_count`` is the integer
    analogue used to detect empty classes exactly.
    """

    counts: np.ndarray
    probabilities: np.ndarray = field(init=False)
    cum_prob: np.ndarray = field(init=False)
    cum_mean: np.ndarray = field(init=False)
    cum_count: np.ndarray = field(init=False)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size < 2:
            raise ValueError("histogram needs at least two bins")
        if not np.issubdtype(counts.dtype, np.integer) or counts.min() < 0:
            raise ValueError("histogram counts must be non-negative integers")
        counts = counts.astype(np.int64)
        total = int(counts.sum())
        if total == 0:
            raise DegenerateInputError("histogram is empty")
        p = counts / total
        levels = np.arange(counts.size, dtype=np.float64)
        object.__setattr__(self, "counts", _frozen(counts))
        object.__setattr__(self, "probabilities", _frozen(p))
        object.__setattr__(self, "cum_prob", _frozen(np.cumsum(p)))
        object.__setattr__(self, "cum_mean", _frozen(np.cumsum(levels * p)))
        object.__setattr__(self, "cum_count", _frozen(np.cumsum(counts)))

    @property
    def num_bins(self) -> int:
        return self.counts.size

    @property
    def total(self) -> int:
        return int(self.cum_count[-1])

    @property
    def nonempty_bins(self) -> np.ndarray:
        return np.flatnonzero(self.counts)

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


def compute_histogram(image: GrayImage) -> Histogram:
    """Count intensities of ``image`` into ``image.levels`` bins."""
    counts = np.bincount(image.pixels.ravel(), minlength=image.levels)
    return Histogram(counts)


# --------------------------------------------------------------------------
# PGM
# --------------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\v\f"


class _Tokenizer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def _skip(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            ch = data[self.pos : self.pos + 1]
            if ch in _WHITESPACE:
                self.pos += 1
            elif ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = n if end < 0 else end + 1
            else:
                break

    def next_int(self, what: str) -> int:
        self._skip()
        start = self.last_start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos : self.pos + 1] not in _WHITESPACE + b"#":
            self.pos += 1
        token = data[start : self.pos]
        if not token:
            raise PGMFormatError(f"unexpected end of data while reading {what}", start)
        if not token.isdigit():
            raise PGMFormatError(f"invalid {what} {token[:16]!r}", start)
        return int(token)


def load_pgm(data: bytes) -> GrayImage:
    """Decode a binary (P5) or ASCII (P2) graymap with maxval <= 255.

    Intensities are passed through unscaled into a 256-level image.
    """
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise PGMFormatError(f"bad magic number {magic!r}", 0)
    tok = _Tokenizer(data, 2)
    if len(data) > 2 and data[2:3] not in _WHITESPACE + b"#":
        raise PGMFormatError("missing whitespace after magic number", 2)
    width = tok.next_int("width")
    height = tok.next_int("height")
    maxval = tok.next_int("maxval")
    maxval_offset = tok.last_start
    if width < 1 or height < 1:
        raise PGMFormatError(f"invalid dimensions {width}x{height}", maxval_offset)
    if not 1 <= maxval <= 255:
        raise PGMFormatError(f"unsupported maxval {maxval}", maxval_offset)
    npix = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if tok.pos >= len(data) or data[tok.pos : tok.pos + 1] not in _WHITESPACE:
            raise PGMFormatError("missing whitespace after maxval", tok.pos)
        start = tok.pos + 1
        payload = data[start : start + npix]
        if len(payload) < npix:
            raise PGMFormatError(
                f"truncated payload: expected {npix} bytes, got {len(payload)}",
                start + len(payload),
            )
        pixels = np.frombuffer(payload, dtype=np.uint8)
    else:
        values = np.empty(npix, dtype=np.int64)
        for idx in range(npix):
            offset = tok.pos
            try:
                values[idx] = tok.next_int("pixel value")
            except PGMFormatError as exc:
                if offset >= len(data) or tok.pos >= len(data):
                    raise PGMFormatError(
                        f"truncated payload: expected {npix} values, got {idx}", exc.offset
                    ) from None
                raise
            if values[idx] > maxval:
                raise PGMFormatError(f"pixel value {values[idx]} exceeds maxval {maxval}", offset)
        pixels = values.astype(np.uint8)

    if pixels.max() > maxval:
        bad = int(np.argmax(pixels > maxval))
        raise PGMFormatError(f"pixel value exceeds maxval {maxval}", start + bad)
    return GrayImage(pixels.reshape(height, width), levels=DEFAULT_LEVELS)


def _encode_p5(pixels: np.ndarray) -> bytes:
    h, w = pixels.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def save_pgm(image: GrayImage) -> bytes:
    """Encode ``image`` as a binary P5 graymap with maxval 255."""
    if image.pixels.max() > 255:
        raise ValueError("only 8-bit images can be written as PGM")
    return _encode_p5(image.pixels)


def label_scale(num_classes: int) -> int:
    return 255 // (num_classes - 1) if num_classes > 1 else 0


def save_label_pgm(labels: LabelMap, scale: bool = True) -> bytes:
    """Render a label map as P5.

    With ``scale`` the labels are spread over the gray range (label ``v`` is
    written as ``v * floor(255 / (C - 1))``), otherwise raw indices are
    written.
    """
    if not scale and labels.num_classes > 256:
        raise ValueError("raw label maps need at most 256 classes")
    out = labels.labels * (label_scale(labels.num_classes) if scale else 1)
    return _encode_p5(out.astype(np.uint8))


def load_label_pgm(data: bytes, num_classes: int, scaled: bool | None = None) -> LabelMap:
    """Inverse of :func:`save_label_pgm`.

    ``scaled=None`` auto-detects: values all below ``num_classes`` are read
    as raw labels, anything else must be multiples of the scale step.
    """
    pixels = load_pgm(data).pixels.astype(np.int64)
    step = label_scale(num_classes)
    if scaled is None:
        scaled = bool(pixels.max() >= num_classes)
    if scaled:
        if step == 0 or np.any(pixels % step) or pixels.max() // step >= num_classes:
            raise ValueError(f"pixel values are not a scaled {num_classes}-class label map")
        pixels = pixels // step
    elif pixels.max() >= num_classes:
        raise ValueError(f"label value {pixels.max()} out of range for {num_classes} classes")
    return LabelMap(pixels, num_classes)
