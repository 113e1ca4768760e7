import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btd.imageio import (
    BadHeaderError,
    BadMagicError,
    DatasetManifest,
    DuplicatePathError,
    EmptyTrainSplitError,
    GrayImage,
    ManifestEntry,
    ManifestFormatError,
    TrailingDataError,
    TruncatedPayloadError,
    UnknownTokenError,
    UnsupportedMaxvalError,
    ZeroDimensionError,
    generate_synthetic,
    load_manifest,
    load_pgm,
    resize_bilinear,
    save_manifest,
    save_pgm,
    to_tensor,
)

# ---------------------------------------------------------------- PGM


def test_load_minimal_pgm():
    img = load_pgm(b"P5\n1 1\n255\n\x00")
    assert (img.width, img.height) == (1, 1)
    assert img.flat.tolist() == [0]


def test_load_512_square():
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, size=(512, 512)).astype(np.uint8)
    img = load_pgm(save_pgm(GrayImage.from_array(pixels)))
    assert img.width == img.height == 512


def test_save_single_white_pixel():
    assert save_pgm(GrayImage(1, 1, [255])) == b"P5\n1 1\n255\n\xff"


def test_save_two_pixels():
    assert save_pgm(GrayImage(2, 1, [0, 255])) == b"P5\n2 1\n255\n\x00\xff"


def test_header_comments_accepted():
    img = load_pgm(b"P5\n# a comment\n2 1\n# another\n255\n\x05\x06")
    assert img.flat.tolist() == [5, 6]


@given(
    w=st.integers(1, 17),
    h=st.integers(1, 17),
    seed=st.integers(0, 2**31),
)
@settings(max_examples=60, deadline=None)
def test_pgm_round_trip(w, h, seed):
    rng = np.random.default_rng(seed)
    img = GrayImage(w, h, rng.integers(0, 256, size=w * h))
    encoded = save_pgm(img)
    decoded = load_pgm(encoded)
    assert decoded == img
    assert save_pgm(decoded) == encoded


@pytest.mark.parametrize(
    "data,error",
    [
        (b"P6\n1 1\n255\n\x00", BadMagicError),
        (b"hello", BadMagicError),
        (b"P5\n1 1\n254\n\x00", UnsupportedMaxvalError),
        (b"P5\n0 5\n255\n", ZeroDimensionError),
        (b"P5\n2 2\n255\n\x00\x00", TruncatedPayloadError),
        (b"P5\n1 1\n255\n\x00\x00", TrailingDataError),
        (b"P5\nx 1\n255\n\x00", BadHeaderError),
        (b"P5\n1 1\n255", BadHeaderError),
    ],
)
def test_pgm_errors(data, error):
    with pytest.raises(error):
        load_pgm(data)


def test_gray_image_validation():
    with pytest.raises(ValueError):
        GrayImage(2, 2, [0, 1, 2])
    with pytest.raises(ValueError):
        GrayImage(1, 1, [256])
    with pytest.raises(ValueError):
        GrayImage(0, 1, [])


# ---------------------------------------------------------------- resize


def _resize_oracle(img, out_w, out_h):
    """Direct scalar evaluation of the half-pixel-center convention."""
    src = img.pixels.astype(np.float64)
    h, w = img.height, img.width
    out = np.zeros((out_h, out_w), dtype=np.uint8)
    for dy in range(out_h):
        pos_y = (dy + 0.5) * (h / out_h) - 0.5
        pos_y = min(max(pos_y, 0.0), h - 1.0)
        y0 = math.floor(pos_y)
        fy = pos_y - y0
        y1 = min(y0 + 1, h - 1)
        for dx in range(out_w):
            pos_x = (dx + 0.5) * (w / out_w) - 0.5
            pos_x = min(max(pos_x, 0.0), w - 1.0)
            x0 = math.floor(pos_x)
            fx = pos_x - x0
            x1 = min(x0 + 1, w - 1)
            val = (1.0 - fy) * ((1.0 - fx) * src[y0, x0] + fx * src[y0, x1]) + fy * (
                (1.0 - fx) * src[y1, x0] + fx * src[y1, x1]
            )
            out[dy, dx] = int(math.floor(val + 0.5))
    return out


def test_resize_identity():
    rng = np.random.default_rng(1)
    img = GrayImage.from_array(rng.integers(0, 256, size=(13, 9)).astype(np.uint8))
    assert resize_bilinear(img, 9, 13) == img


@pytest.mark.parametrize("value", [0, 77, 255])
def test_resize_constant(value):
    img = GrayImage(10, 10, np.full(100, value))
    for w, h in [(3, 3), (20, 7), (227, 227)]:
        out = resize_bilinear(img, w, h)
        assert np.all(out.pixels == value)


@pytest.mark.parametrize("src,dst", [((512, 512), (227, 227)), ((64, 48), (32, 32)), ((16, 16), (40, 24))])
def test_resize_matches_scalar_oracle(src, dst):
    rng = np.random.default_rng(src[0] + dst[0])
    img = GrayImage.from_array(rng.integers(0, 256, size=src).astype(np.uint8))
    out = resize_bilinear(img, dst[1], dst[0])
    assert np.array_equal(out.pixels, _resize_oracle(img, dst[1], dst[0]))


def test_resize_range_preserved():
    rng = np.random.default_rng(2)
    img = GrayImage.from_array(rng.integers(0, 256, size=(31, 17)).astype(np.uint8))
    out = resize_bilinear(img, 11, 23)
    assert out.pixels.min() >= 0 and out.pixels.max() <= 255


# ---------------------------------------------------------------- tensors


def test_to_tensor_values():
    assert to_tensor(GrayImage(1, 1, [0])).tolist() == [[[0.0]]]
    assert to_tensor(GrayImage(1, 1, [255])).tolist() == [[[1.0]]]
    t = to_tensor(GrayImage(2, 2, [0, 51, 102, 255]))
    assert t.shape == (1, 2, 2)
    assert t.reshape(-1).tolist() == [0.0, 0.2, 0.4, 1.0]


def test_to_tensor_range():
    rng = np.random.default_rng(3)
    t = to_tensor(GrayImage.from_array(rng.integers(0, 256, size=(5, 7)).astype(np.uint8)))
    assert t.min() >= 0.0 and t.max() <= 1.0


# ---------------------------------------------------------------- manifest


def _entry(path, label="healthy", split="train"):
    return {"path": path, "label": label, "split": split}


def _dumps(entries):
    import json

    return json.dumps(entries).encode()


def test_manifest_minimal():
    m = load_manifest(_dumps([_entry("a.pgm"), _entry("b.pgm", "tumor")]))
    assert len(m.entries) == 2
    assert m.counts()[("healthy", "train")] == 1


def test_manifest_duplicate_path():
    with pytest.raises(DuplicatePathError):
        load_manifest(_dumps([_entry("a.pgm"), _entry("a.pgm", "tumor")]))


def test_manifest_unknown_tokens():
    with pytest.raises(UnknownTokenError):
        load_manifest(_dumps([_entry("a.pgm", "sick")]))
    with pytest.raises(UnknownTokenError):
        load_manifest(_dumps([_entry("a.pgm", "healthy", "validation")]))


def test_manifest_empty_or_partial_train():
    with pytest.raises(EmptyTrainSplitError):
        load_manifest(_dumps([_entry("a.pgm", "healthy", "test")]))
    with pytest.raises(EmptyTrainSplitError):
        load_manifest(_dumps([_entry("a.pgm", "healthy"), _entry("b.pgm", "tumor", "test")]))


def test_manifest_format_errors():
    with pytest.raises(ManifestFormatError):
        load_manifest(b"{}")
    with pytest.raises(ManifestFormatError):
        load_manifest(_dumps([{"path": "a"}]))
    with pytest.raises(ManifestFormatError):
        load_manifest(b"not json")


def test_manifest_full_corpus_totals():
    entries = []
    for i in range(515):
        entries.append(_entry(f"h{i}.pgm", "healthy", "train"))
    for i in range(1151):
        entries.append(_entry(f"t{i}.pgm", "tumor", "train"))
    for i in range(56):
        entries.append(_entry(f"ht{i}.pgm", "healthy", "test"))
    for i in range(170):
        entries.append(_entry(f"tt{i}.pgm", "tumor", "test"))
    m = load_manifest(_dumps(entries))
    counts = m.counts()
    train_total = counts[("healthy", "train")] + counts[("tumor", "train")]
    test_total = counts[("healthy", "test")] + counts[("tumor", "test")]
    assert train_total == 1666
    assert test_total == 226
    assert len(m.split("train")) == 1666
    assert len(m.split("test")) == 226


def test_manifest_round_trip():
    m = DatasetManifest(
        (ManifestEntry("a.pgm", "healthy", "train"), ManifestEntry("b.pgm", "tumor", "train"))
    )
    assert load_manifest(save_manifest(m)) == m


# ---------------------------------------------------------------- synthetic


def test_synthetic_deterministic():
    a = generate_synthetic(123, 3, 32)
    b = generate_synthetic(123, 3, 32)
    assert len(a) == len(b) == 6
    for (img1, lab1), (img2, lab2) in zip(a, b):
        assert lab1 == lab2
        assert img1 == img2


def test_synthetic_counts_and_labels():
    images = generate_synthetic(0, 50, 64)
    assert len(images) == 100
    labels = [lab for _, lab in images]
    assert labels.count("healthy") == 50
    assert labels.count("tumor") == 50


def test_synthetic_tumor_brighter_on_average():
    images = generate_synthetic(42, 50, 32)
    healthy = np.mean([img.pixels.mean() for img, lab in images if lab == "healthy"])
    tumor = np.mean([img.pixels.mean() for img, lab in images if lab == "tumor"])
    assert tumor > healthy


def test_synthetic_argument_validation():
    with pytest.raises(ValueError):
        generate_synthetic(0, 0, 32)
    with pytest.raises(ValueError):
        generate_synthetic(0, 1, 8)
