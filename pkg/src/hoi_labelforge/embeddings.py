"""Bit-exact binary container for embedding matrices.

Layout (little-endian throughout):

    offset  size  field
    0       4     magic, ASCII "FAEM"
    4       4     version, u32, currently 1
    8       1     kind, u8: 0 candidate images, 1 long texts, 2 short texts
    9       3     zero padding
    12      4     rows, u32
    16      4     cols, u32
    20      ...   rows*cols float32 values, row-major

Row i of a candidate file corresponds to pair_id i of the crop-spec file it
was generated from; row j of a text file corresponds to hoi_id j.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError, ValidationError

MAGIC = b"FAEM"
EMBEDDING_VERSION = 1

KIND_CANDIDATE = 0
KIND_TEXT_T1 = 1
KIND_TEXT_T2 = 2

KIND_NAMES = {
    KIND_CANDIDATE: "candidate_image",
    KIND_TEXT_T1: "text_t1",
    KIND_TEXT_T2: "text_t2",
}

_HEADER = struct.Struct("<4sIB3xII")


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense float32 feature matrix plus the payload kind it carries."""

    data: np.ndarray
    kind: int

    def __post_init__(self):
        if self.kind not in KIND_NAMES:
            raise ValidationError(f"unknown embedding kind {self.kind}")
        array = np.ascontiguousarray(np.asarray(self.data, dtype=np.float32))
        if array.ndim != 2:
            raise ValidationError(f"embedding matrix must be 2-D, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            bad = int(np.argwhere(~np.isfinite(array))[0][0])
            raise ValidationError(
                f"{self.kind_name} embeddings contain a non-finite value in row {bad}"
            )
        object.__setattr__(self, "data", array)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def kind_name(self) -> str:
        return KIND_NAMES[self.kind]


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    header = _HEADER.pack(
        MAGIC, EMBEDDING_VERSION, matrix.kind, matrix.rows, matrix.cols
    )
    try:
        with open(path, "wb") as handle:
            handle.write(header)
            handle.write(matrix.data.astype("<f4", copy=False).tobytes(order="C"))
    except OSError as exc:
        raise InputError(f"cannot write embeddings {path}: {exc}") from exc


def read_embeddings(path: str | Path, expected_kind: int | None = None) -> EmbeddingMatrix:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read embeddings {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, kind, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != EMBEDDING_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if kind not in KIND_NAMES:
        raise FormatError(f"{path}: unknown kind byte {kind}")
    if expected_kind is not None and kind != expected_kind:
        raise FormatError(
            f"{path}: kind {KIND_NAMES[kind]}, expected {KIND_NAMES[expected_kind]}"
        )
    expected_bytes = _HEADER.size + rows * cols * 4
    if len(blob) != expected_bytes:
        raise FormatError(
            f"{path}: payload is {len(blob) - _HEADER.size} bytes, "
            f"expected {rows}x{cols} float32 = {rows * cols * 4}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(rows, cols)
    return EmbeddingMatrix(data=data.copy(), kind=kind)
