"""Pseudo-label synthesis for human-object interaction detection.

Pipeline: detections -> denoised human-object pairs -> crop specs ->
(externally produced) embeddings -> fused similarities -> knowledge-guided
inference -> labels, plus an evaluation harness and SVG overlay renderer.
"""

__version__ = "0.1.0"

from .boxes import BBox, iou, union_box
from .candidates import CandidatePair, Detection, denoise, enumerate_pairs
from .embeddings import EmbeddingMatrix, read_embeddings, write_embeddings
from .errors import (
    AlignmentError,
    FormatError,
    InputError,
    LabelForgeError,
    ValidationError,
)
from .inference import (
    HoiLabel,
    InferenceConfig,
    action_filter,
    dynamic_threshold,
    icm_amplify,
    infer_labels,
    pkm_mask,
)
from .knowledge import (
    KnowledgeBase,
    allowed_hoi_ids,
    load_knowledge_base,
    lookup_affordance,
    lookup_correlated,
    render_templates,
    save_knowledge_base,
)
from .similarity import cosine_similarity, fuse

__all__ = [
    "__version__",
    "AlignmentError",
    "BBox",
    "CandidatePair",
    "Detection",
    "EmbeddingMatrix",
    "FormatError",
    "HoiLabel",
    "InferenceConfig",
    "InputError",
    "KnowledgeBase",
    "LabelForgeError",
    "ValidationError",
    "action_filter",
    "allowed_hoi_ids",
    "cosine_similarity",
    "denoise",
    "dynamic_threshold",
    "enumerate_pairs",
    "fuse",
    "icm_amplify",
    "infer_labels",
    "iou",
    "load_knowledge_base",
    "lookup_affordance",
    "lookup_correlated",
    "pkm_mask",
    "read_embeddings",
    "render_templates",
    "save_knowledge_base",
    "union_box",
    "write_embeddings",
]
