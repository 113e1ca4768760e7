"""Grayscale image ingestion: binary PGM (P5) parsing and writing, bilinear
resizing, tensor conversion, dataset manifests and the synthetic corpus
generator."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .prng import Prng

LABELS = ("healthy", "tumor")
SPLITS = ("train", "test")


class ImageFormatError(ValueError):
    """Base for PGM parse failures."""


class BadMagicError(ImageFormatError):
    pass


class BadHeaderError(ImageFormatError):
    pass


class UnsupportedMaxvalError(ImageFormatError):
    pass


class ZeroDimensionError(ImageFormatError):
    pass


class TruncatedPayloadError(ImageFormatError):
    pass


class TrailingDataError(ImageFormatError):
    pass


class ManifestError(ValueError):
    """Base for manifest validation failures."""


class ManifestFormatError(ManifestError):
    pass


class DuplicatePathError(ManifestError):
    pass


class UnknownTokenError(ManifestError):
    pass


class EmptyTrainSplitError(ManifestError):
    pass


class GrayImage:
    """8-bit grayscale raster. Pixels are held as a uint8 array of shape
    (height, width), row-major with the origin at the top left."""

    __slots__ = ("pixels",)

    def __init__(self, width: int, height: int, pixels):
        if width < 1 or height < 1:
            raise ValueError("image dimensions must be positive")
        arr = np.asarray(pixels)
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} pixels, got {arr.size}")
        if arr.dtype != np.uint8:
            if np.any((arr < 0) | (arr > 255)):
                raise ValueError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        self.pixels = arr.reshape(height, width)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GrayImage":
        arr = np.asarray(arr)
        return cls(arr.shape[1], arr.shape[0], arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self.pixels.reshape(-1)

    def __eq__(self, other):
        return (
            isinstance(other, GrayImage)
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


def _parse_header_ints(data: bytes, pos: int, count: int) -> tuple[list[int], int]:
    """Read `count` ASCII integers starting at `pos`, skipping whitespace and
    '#' comment lines."""
    values = []
    n = len(data)
    while len(values) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] != ord("\n"):
                pos += 1
            continue
        start = pos
        while pos < n and data[pos : pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise BadHeaderError(f"expected integer at byte {start}")
        values.append(int(data[start:pos]))
    return values, pos


def load_pgm(data: bytes) -> GrayImage:
    """Decode a binary PGM (P5, maxval 255). Comment lines are accepted in
    the header; the payload must be exactly width*height raw bytes."""
    if data[:2] != b"P5":
        raise BadMagicError(f"not a P5 file (starts with {data[:2]!r})")
    (width, height, maxval), pos = _parse_header_ints(data, 2, 3)
    if maxval != 255:
        raise UnsupportedMaxvalError(f"maxval must be 255, got {maxval}")
    if width == 0 or height == 0:
        raise ZeroDimensionError(f"zero dimension in {width}x{height}")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise BadHeaderError("missing whitespace after maxval")
    pos += 1
    payload = data[pos : pos + width * height]
    if len(payload) < width * height:
        raise TruncatedPayloadError(
            f"payload has {len(payload)} bytes, expected {width * height}"
        )
    if len(data) > pos + width * height:
        raise TrailingDataError(f"{len(data) - pos - width * height} bytes after payload")
    return GrayImage(width, height, np.frombuffer(payload, dtype=np.uint8))


def save_pgm(img: GrayImage) -> bytes:
    """Canonical encoding: header "P5\\n<w> <h>\\n255\\n" plus raw pixels.
    load_pgm(save_pgm(x)) == x, and save_pgm(load_pgm(b)) == b for files
    already in canonical form."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Bilinear resize with half-pixel-center sampling: source coordinate =
    (dst + 0.5) * (src/dst) - 0.5 clamped to [0, src-1], result rounded
    half-up."""
    if out_w < 1 or out_h < 1:
        raise ValueError("output dimensions must be positive")
    src = img.pixels.astype(np.float64)

    def axis_coords(n_src: int, n_dst: int):
        scale = n_src / n_dst
        pos = (np.arange(n_dst) + 0.5) * scale - 0.5
        pos = np.clip(pos, 0.0, n_src - 1.0)
        i0 = np.floor(pos).astype(np.int64)
        frac = pos - i0
        i1 = np.minimum(i0 + 1, n_src - 1)
        return i0, i1, frac

    y0, y1, fy = axis_coords(img.height, out_h)
    x0, x1, fx = axis_coords(img.width, out_w)
    fy = fy[:, None]
    fx = fx[None, :]
    p00 = src[np.ix_(y0, x0)]
    p01 = src[np.ix_(y0, x1)]
    p10 = src[np.ix_(y1, x0)]
    p11 = src[np.ix_(y1, x1)]
    val = (1.0 - fy) * ((1.0 - fx) * p00 + fx * p01) + fy * ((1.0 - fx) * p10 + fx * p11)
    out = np.floor(val + 0.5)
    return GrayImage(out_w, out_h, out.astype(np.uint8))


def to_tensor(img: GrayImage) -> np.ndarray:
    """Float64 tensor of shape [1, height, width] with values pixel/255."""
    return (img.pixels.astype(np.float64) / 255.0)[None, :, :]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def counts(self) -> dict[tuple[str, str], int]:
        """Number of entries per (label, split)."""
        out: dict[tuple[str, str], int] = {}
        for e in self.entries:
            key = (e.label, e.split)
            out[key] = out.get(key, 0) + 1
        return out

    def split(self, name: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == name]


def load_manifest(data: bytes) -> DatasetManifest:
    """Parse and validate a manifest: a JSON array of
    {"path": ..., "label": "healthy"|"tumor", "split": "train"|"test"}."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ManifestFormatError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(obj, list):
        raise ManifestFormatError("manifest must be a JSON array")
    entries = []
    seen = set()
    for i, item in enumerate(obj):
        if not isinstance(item, dict) or not {"path", "label", "split"} <= set(item):
            raise ManifestFormatError(f"entry {i} must have path, label and split")
        path, label, split = item["path"], item["label"], item["split"]
        if not isinstance(path, str):
            raise ManifestFormatError(f"entry {i}: path must be a string")
        if label not in LABELS:
            raise UnknownTokenError(f"entry {i}: unknown label {label!r}")
        if split not in SPLITS:
            raise UnknownTokenError(f"entry {i}: unknown split {split!r}")
        if path in seen:
            raise DuplicatePathError(f"duplicate path {path!r}")
        seen.add(path)
        entries.append(ManifestEntry(path, label, split))
    train_labels = {e.label for e in entries if e.split == "train"}
    if not train_labels:
        raise EmptyTrainSplitError("train split is empty")
    for label in LABELS:
        if label not in train_labels:
            raise EmptyTrainSplitError(f"train split has no {label!r} entries")
    return DatasetManifest(tuple(entries))


def save_manifest(manifest: DatasetManifest) -> bytes:
    obj = [{"path": e.path, "label": e.label, "split": e.split} for e in manifest.entries]
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def generate_synthetic(seed: int, n_per_class: int, size: int) -> list[tuple[GrayImage, str]]:
    """Deterministic synthetic corpus: noisy dark background for both
    classes (mean 60, sigma 20, clamped), plus one bright ellipse of
    uniform random intensity in [200, 255] for the tumor class. Returns
    all healthy images first, then all tumor images.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    if size < 16:
        raise ValueError("size must be >= 16")
    rng = Prng.for_stream(seed, "synthetic")
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)

    def background() -> np.ndarray:
        noise = rng.normals(size * size).reshape(size, size)
        return np.clip(np.floor(60.0 + 20.0 * noise + 0.5), 0, 255)

    images: list[tuple[GrayImage, str]] = []
    for _ in range(n_per_class):
        images.append((GrayImage(size, size, background().astype(np.uint8)), "healthy"))
    lo, hi = size / 8.0, size / 4.0
    for _ in range(n_per_class):
        pix = background()
        intensity = 200 + rng.below(56)
        a = lo + rng.uniform() * (hi - lo)
        b = lo + rng.uniform() * (hi - lo)
        cx = a + rng.uniform() * (size - 1 - 2 * a)
        cy = b + rng.uniform() * (size - 1 - 2 * b)
        mask = ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0
        pix[mask] = intensity
        images.append((GrayImage(size, size, pix.astype(np.uint8)), "tumor"))
    return images
