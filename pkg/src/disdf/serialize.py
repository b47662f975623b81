"""Model persistence: a versioned, checksummed binary format.

Layout: a small text header (magic, format version, payload sha256 and byte
count) followed by the binary payload.  The payload is a length-prefixed JSON
structure block plus every array (weights, tree node arrays, leaf
distributions) as raw little-endian bytes, so a load/save round trip is
bit-exact and predictions are bitwise identical.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct

import numpy as np

from .cascade import CascadeModel, LevelModel
from .config import TrainConfig
from .errors import ModelFormatError
from .forest import ForestModel
from .tree import TreeModel

MAGIC = "DISDF-MODEL"
FORMAT_VERSION = 1

_DTYPES = {"<i4": np.dtype("<i4"), "<f8": np.dtype("<f8")}


def _pack_array(buf: io.BytesIO, arr: np.ndarray) -> None:
    code = arr.dtype.str
    if code not in _DTYPES:
        raise ModelFormatError(f"unsupported array dtype {code}")
    raw = np.ascontiguousarray(arr).tobytes()
    buf.write(struct.pack("<3sB", code.encode(), arr.ndim))
    buf.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
    buf.write(struct.pack("<Q", len(raw)))
    buf.write(raw)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.payload):
            raise ModelFormatError("model payload is truncated")
        out = self.payload[self.offset : self.offset + n]
        self.offset += n
        return out

    def array(self) -> np.ndarray:
        code, ndim = struct.unpack("<3sB", self.take(4))
        dtype = _DTYPES.get(code.decode(errors="replace"))
        if dtype is None:
            raise ModelFormatError(f"unknown array dtype tag {code!r}")
        shape = struct.unpack(f"<{ndim}Q", self.take(8 * ndim))
        (nbytes,) = struct.unpack("<Q", self.take(8))
        raw = self.take(nbytes)
        try:
            return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        except ValueError as exc:
            raise ModelFormatError(f"inconsistent array block: {exc}") from None


def _model_meta(model: CascadeModel) -> dict:
    return {
        "config": model.config.to_dict(),
        "base_dim": model.base_dim,
        "num_classes": model.num_classes,
        "mode": model.mode,
        "level_scores": list(model.level_scores),
        "class_labels": list(model.class_labels) if model.class_labels else None,
        "levels": [
            {
                "input_dim": level.input_dim,
                "forests": [
                    {"kind": f.kind, "n_trees": f.n_trees} for f in level.forests
                ],
            }
            for level in model.levels
        ],
    }


def save_model(model: CascadeModel, path) -> None:
    buf = io.BytesIO()
    meta = json.dumps(_model_meta(model), sort_keys=True).encode()
    buf.write(struct.pack("<Q", len(meta)))
    buf.write(meta)
    for level in model.levels:
        for forest in level.forests:
            _pack_array(buf, forest.weights)
            for tree in forest.trees:
                _pack_array(buf, tree.feature)
                _pack_array(buf, tree.threshold)
                _pack_array(buf, tree.left)
                _pack_array(buf, tree.right)
                _pack_array(buf, tree.dist)
    payload = buf.getvalue()
    digest = hashlib.sha256(payload).hexdigest()
    header = f"{MAGIC} {FORMAT_VERSION}\nsha256 {digest}\nbytes {len(payload)}\n---\n"
    with open(path, "wb") as fh:
        fh.write(header.encode())
        fh.write(payload)


def load_model(path) -> CascadeModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    head, sep, payload = blob.partition(b"---\n")
    if not sep:
        raise ModelFormatError(f"{path}: not a model file (missing header)")
    lines = head.decode(errors="replace").splitlines()
    if len(lines) < 3 or not lines[0].startswith(MAGIC + " "):
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ModelFormatError(f"{path}: malformed version tag") from None
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format version {version} "
            f"(this build reads version {FORMAT_VERSION})"
        )
    try:
        fields = dict(line.split(None, 1) for line in lines[1:3])
        expect_bytes = int(fields["bytes"])
        expect_digest = fields["sha256"]
    except (KeyError, ValueError):
        raise ModelFormatError(f"{path}: malformed header") from None
    if len(payload) != expect_bytes:
        raise ModelFormatError(
            f"{path}: truncated payload ({len(payload)} of {expect_bytes} bytes)"
        )
    digest = hashlib.sha256(payload).hexdigest()
    if digest != expect_digest:
        raise ModelFormatError(f"{path}: checksum mismatch, file is corrupted")

    reader = _Reader(payload)
    (meta_len,) = struct.unpack("<Q", reader.take(8))
    try:
        meta = json.loads(reader.take(meta_len))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: bad metadata block: {exc}") from None

    config = TrainConfig.from_dict(meta["config"])
    num_classes = meta["num_classes"]
    levels = []
    for level_meta in meta["levels"]:
        forests = []
        for forest_meta in level_meta["forests"]:
            weights = reader.array()
            trees = []
            for _ in range(forest_meta["n_trees"]):
                feature = reader.array()
                threshold = reader.array()
                left = reader.array()
                right = reader.array()
                dist = reader.array()
                trees.append(
                    TreeModel(
                        kind=forest_meta["kind"],
                        n_features=level_meta["input_dim"],
                        num_classes=num_classes,
                        feature=feature,
                        threshold=threshold,
                        left=left,
                        right=right,
                        dist=dist,
                    )
                )
            forests.append(
                ForestModel(trees, forest_meta["kind"], weights, num_classes)
            )
        levels.append(LevelModel(forests, input_dim=level_meta["input_dim"]))
    labels = meta.get("class_labels")
    return CascadeModel(
        levels=levels,
        base_dim=meta["base_dim"],
        num_classes=num_classes,
        mode=meta["mode"],
        config=config,
        level_scores=tuple(meta.get("level_scores", ())),
        class_labels=tuple(labels) if labels else None,
    )
