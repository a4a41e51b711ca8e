"""Fused image-text similarity matrices.

Dot products and norms are accumulated in float64 and the results stored as
float32, which keeps the matrices reproducible across platforms at the
tolerances the tests pin down.  Zero-norm embedding rows are hard errors:
they mean the producer wrote a degenerate feature vector, and mapping them
silently to zero similarity would bury that bug.
"""

from __future__ import annotations

import numpy as np

from .embeddings import EmbeddingMatrix
from .errors import AlignmentError, ValidationError


def cosine_similarity(images: EmbeddingMatrix, texts: EmbeddingMatrix) -> np.ndarray:
    """Pairwise cosine similarity, image rows against text rows.

    Returns a float32 matrix of shape (images.rows, texts.rows) with every
    entry in [-1, 1].
    """
    if images.cols != texts.cols:
        raise AlignmentError(
            f"feature dimensions differ: {images.kind_name} has {images.cols}, "
            f"{texts.kind_name} has {texts.cols}"
        )
    left = images.data.astype(np.float64)
    right = texts.data.astype(np.float64)
    left_norms = np.linalg.norm(left, axis=1)
    right_norms = np.linalg.norm(right, axis=1)
    for norms, matrix in ((left_norms, images), (right_norms, texts)):
        if np.any(norms == 0.0):
            row = int(np.argwhere(norms == 0.0)[0][0])
            raise ValidationError(f"zero-norm embedding row {row} in {matrix.kind_name} matrix")
    scores = (left / left_norms[:, None]) @ (right / right_norms[:, None]).T
    return scores.astype(np.float32)


def fuse(sim1: np.ndarray, sim2: np.ndarray) -> np.ndarray:
    """Element-wise sum of two similarity matrices of identical shape."""
    a = np.asarray(sim1, dtype=np.float32)
    b = np.asarray(sim2, dtype=np.float32)
    if a.shape != b.shape:
        raise AlignmentError(f"similarity shapes differ: {a.shape} vs {b.shape}")
    return a + b
