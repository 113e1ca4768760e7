"""Binary model container.

Layout: magic "BTDM" | format version (u32 LE) | header length (u64 LE) |
UTF-8 JSON header | parameter blob. The blob concatenates every parameter
tensor in layer order (weights then bias per layer) as little-endian
float64; per-tensor shapes and element counts are declared in the header
and verified on load.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from ..nn.network import LayerParams, NetworkSpec, Parameters

MAGIC = b"BTDM"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


class BadMagicError(ModelFormatError):
    pass


class UnknownVersionError(ModelFormatError):
    pass


class HeaderParseError(ModelFormatError):
    pass


class LengthMismatchError(ModelFormatError):
    pass


@dataclass
class ModelBundle:
    network: NetworkSpec
    params: Parameters
    preprocessing: dict          # {"kind": "none"} or {"kind": "cluster", ...}
    head_kind: str               # softmax | rbf | dt
    head_payload: dict | None    # serialized RBF/DT model
    seed: int
    metrics: dict | None         # snapshot from the producing evaluation


def encode_model(bundle: ModelBundle) -> bytes:
    tensors = []
    blobs = []
    for i, name, arr in bundle.params.tensors():
        tensors.append({"layer": i, "name": name, "shape": list(arr.shape), "count": arr.size})
        blobs.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    header = {
        "network": bundle.network.to_json_obj(),
        "preprocessing": bundle.preprocessing,
        "head": {"kind": bundle.head_kind, "payload": bundle.head_payload},
        "seed": bundle.seed,
        "metrics": bundle.metrics,
        "tensors": tensors,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    return (
        MAGIC
        + struct.pack("<I", FORMAT_VERSION)
        + struct.pack("<Q", len(header_bytes))
        + header_bytes
        + b"".join(blobs)
    )


def decode_model(data: bytes) -> ModelBundle:
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    if len(data) < 16:
        raise HeaderParseError("file too short for the fixed header")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise UnknownVersionError(f"unknown format version {version}")
    (header_len,) = struct.unpack_from("<Q", data, 8)
    header_end = 16 + header_len
    if header_end > len(data):
        raise HeaderParseError("declared header length exceeds the file")
    try:
        header = json.loads(data[16:header_end].decode("utf-8"))
        network = NetworkSpec.from_json_obj(header["network"])
        tensors = header["tensors"]
        head = header["head"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise HeaderParseError(f"cannot parse model header: {exc}") from exc

    blob = data[header_end:]
    expected = sum(int(t["count"]) for t in tensors) * 8
    if len(blob) != expected:
        raise LengthMismatchError(f"parameter blob has {len(blob)} bytes, expected {expected}")

    values: list[LayerParams | None] = [None] * len(network.layers)
    offset = 0
    for t in tensors:
        count = int(t["count"])
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).astype(np.float64)
        offset += count * 8
        arr = arr.reshape([int(s) for s in t["shape"]])
        layer = int(t["layer"])
        if values[layer] is None:
            values[layer] = LayerParams(arr, np.zeros(0))
        if t["name"] == "weights":
            values[layer].weights = arr
        else:
            values[layer].bias = arr
    params = Parameters(values)
    return ModelBundle(
        network=network,
        params=params,
        preprocessing=header.get("preprocessing") or {"kind": "none"},
        head_kind=head.get("kind", "softmax"),
        head_payload=head.get("payload"),
        seed=int(header.get("seed", 0)),
        metrics=header.get("metrics"),
    )


def save_model(path, bundle: ModelBundle) -> int:
    """Write the container; returns the byte count."""
    data = encode_model(bundle)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def load_model(path) -> ModelBundle:
    with open(path, "rb") as fh:
        return decode_model(fh.read())
