"""Cross-checking supervised and self-supervised lidar motion labels.

Two labeling streams are derived per scan: fused semantic motion labels
from a supervised model pair, and predictive motion labels from
ego-motion-compensated scene flow. Points where the streams contradict
are clustered and queued for human review; 2D anomaly boxes can be
transferred to 3D point labels to score the contradictions.
"""

from .classes import MotionKind, SemanticClassTable, read_class_table, semantickitti_table
from .cloud import FlowField, PointCloud
from .clustering import NOISE, cluster_members, dbscan
from .discrepancy import FrameDiscrepancyStats, aggregate, classify, extract_clusters
from .errors import (
    ConfigError,
    DegenerateBox,
    EmptyCorpus,
    EmptyFrustum,
    EmptyGroup,
    FrameCountMismatch,
    InvalidCategory,
    InvalidVerdict,
    LengthMismatch,
    MalformedLine,
    MaskLengthMismatch,
    MissingInput,
    MotionCheckError,
    NonFiniteValue,
    NonOrthonormalRotation,
    TruncatedFile,
    UnknownClassId,
    UnknownCluster,
    UnknownFrame,
    UnknownSuperclass,
)
from .evaluate import ConfusionCounts, aggregate_by, confusion, metrics, protocol_mask
from .flowlabel import (
    ClusterSet,
    ClusterStats,
    CompensatedFlow,
    FlowLabelParams,
    FlowLabelResult,
    compensate,
    label_motion,
    normalized_std,
)
from .fusion import fuse, fused_motion
from .geometry import RigidTransform, orthonormalize, relative_motion
from .io import AnomalyBox, AnomalyBoxSet, CalibrationSet, SemanticLabels
from .labels import (
    CATEGORY_NAMES,
    INVALID_CATEGORY,
    SUPERCLASSES,
    ContradictionCluster,
    DiscrepancyCategory,
    FusedLabels,
    LabeledScan,
    MotionLabels,
    SemanticMotionLabel,
    category_from_byte,
)
from .preprocess import PreprocessResult, fov_filter, preprocess, range_filter, remove_ground
from .transfer import frustum_select, recover_labels, refine_frustum, sensitivity_masks

__version__ = "0.1.0"

__all__ = [
    "AnomalyBox",
    "AnomalyBoxSet",
    "CATEGORY_NAMES",
    "CalibrationSet",
    "ClusterSet",
    "ClusterStats",
    "CompensatedFlow",
    "ConfigError",
    "ConfusionCounts",
    "ContradictionCluster",
    "DegenerateBox",
    "DiscrepancyCategory",
    "EmptyCorpus",
    "EmptyFrustum",
    "EmptyGroup",
    "FlowField",
    "FlowLabelParams",
    "FlowLabelResult",
    "FrameCountMismatch",
    "FrameDiscrepancyStats",
    "FusedLabels",
    "INVALID_CATEGORY",
    "InvalidCategory",
    "InvalidVerdict",
    "LabeledScan",
    "LengthMismatch",
    "MalformedLine",
    "MaskLengthMismatch",
    "MissingInput",
    "MotionCheckError",
    "MotionKind",
    "MotionLabels",
    "NonFiniteValue",
    "NonOrthonormalRotation",
    "SemanticMotionLabel",
    "NOISE",
    "PointCloud",
    "PreprocessResult",
    "RigidTransform",
    "SUPERCLASSES",
    "SemanticClassTable",
    "SemanticLabels",
    "TruncatedFile",
    "UnknownClassId",
    "UnknownCluster",
    "UnknownFrame",
    "UnknownSuperclass",
    "aggregate",
    "aggregate_by",
    "category_from_byte",
    "classify",
    "cluster_members",
    "compensate",
    "confusion",
    "dbscan",
    "extract_clusters",
    "fov_filter",
    "frustum_select",
    "fuse",
    "fused_motion",
    "label_motion",
    "metrics",
    "normalized_std",
    "orthonormalize",
    "preprocess",
    "protocol_mask",
    "range_filter",
    "read_class_table",
    "recover_labels",
    "refine_frustum",
    "relative_motion",
    "remove_ground",
    "semantickitti_table",
    "sensitivity_masks",
]
