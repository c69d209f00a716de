"""Raster types and binary Netpbm (P5/P6) I/O."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedHeader, TruncatedData, UnsupportedMaxval

_WHITESPACE = b" \t\n\r\v\f"


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Grayscale raster, ``pixels`` has shape (height, width)."""

    pixels: np.ndarray
    max_value: int = 255

    def __post_init__(self):
        if not 1 <= self.max_value <= 65535:
            raise UnsupportedMaxval(f"max_value {self.max_value} outside [1, 65535]")
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > self.max_value):
            raise ValueError(f"intensities must lie in [0, {self.max_value}]")
        dtype = np.uint8 if self.max_value <= 255 else np.uint16
        object.__setattr__(self, "pixels", _frozen(arr, dtype))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.max_value == other.max_value
            and self.shape == other.shape
            and np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Foreground/background raster, ``bits`` is a (height, width) uint8 array of 0/1."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.bool_ and arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(arr, np.uint8))

    @classmethod
    def zeros(cls, height: int, width: int) -> BinaryMask:
        return cls(np.zeros((height, width), dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def issubset(self, other: BinaryMask) -> bool:
        return self.shape == other.shape and not np.any(self.bits & ~other.bits & 1)

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.bits, other.bits)

    __hash__ = None


def mask_to_image(mask: BinaryMask) -> GrayImage:
    return GrayImage(mask.bits.astype(np.uint8) * 255, 255)


def to_8bit(img: GrayImage) -> GrayImage:
    """Rescale wide samples to [0, 255] with floor(p * 255 / maxval).

    Images whose max_value already fits in a byte are returned unchanged.
    """
    if img.max_value <= 255:
        return img
    scaled = img.pixels.astype(np.uint32) * 255 // img.max_value
    return GrayImage(scaled.astype(np.uint8), 255)


# -- Netpbm ---------------------------------------------------------------


def _parse_header(data: bytes, magic: bytes) -> tuple[int, int, int, int]:
    """Return (width, height, maxval, raster_offset) for a binary Netpbm file."""
    if data[:2] != magic:
        raise MalformedHeader(f"bad magic {data[:2]!r}, expected {magic!r}")
    pos = 2
    fields = []
    while len(fields) < 3:
        # at least one whitespace byte separates every token
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise MalformedHeader("missing whitespace in header")
        while pos < len(data) and (data[pos] in _WHITESPACE or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise MalformedHeader(f"non-numeric header field {token!r}")
        fields.append(int(token))
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise MalformedHeader("maxval must be followed by a single whitespace byte")
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedHeader(f"invalid dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise UnsupportedMaxval(f"maxval {maxval} not in [1, 65535]")
    return width, height, maxval, pos + 1


def _read_samples(data: bytes, offset: int, count: int, maxval: int) -> np.ndarray:
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = count * dtype.itemsize
    if len(data) - offset < need:
        raise TruncatedData(f"expected {need} raster bytes, found {len(data) - offset}")
    return np.frombuffer(data, dtype=dtype, count=count, offset=offset)


def _header(magic: str, width: int, height: int, maxval: int) -> bytes:
    return f"{magic}\n{width} {height}\n{maxval}\n".encode("ascii")


def read_pgm(data: bytes) -> GrayImage:
    width, height, maxval, offset = _parse_header(data, b"P5")
    samples = _read_samples(data, offset, width * height, maxval)
    if samples.max(initial=0) > maxval:
        raise MalformedHeader(f"sample exceeds declared maxval {maxval}")
    return GrayImage(samples.reshape(height, width), maxval)


def write_pgm(img: GrayImage) -> bytes:
    dtype = ">u2" if img.max_value > 255 else "u1"
    raster = img.pixels.astype(dtype).tobytes()
    return _header("P5", img.width, img.height, img.max_value) + raster


def read_ppm(data: bytes) -> tuple[np.ndarray, int]:
    """Decode a binary P6 file into a (height, width, 3) array and its maxval."""
    width, height, maxval, offset = _parse_header(data, b"P6")
    samples = _read_samples(data, offset, width * height * 3, maxval)
    return samples.reshape(height, width, 3).copy(), maxval


def load_pgm(path) -> GrayImage:
    return read_pgm(Path(path).read_bytes())


def save_pgm(img: GrayImage, path) -> None:
    Path(path).write_bytes(write_pgm(img))


def load_mask(path) -> BinaryMask:
    """Read a PGM as a mask: any nonzero sample is foreground."""
    return BinaryMask(load_pgm(path).pixels > 0)
