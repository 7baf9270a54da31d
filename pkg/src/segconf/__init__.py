"""Per-pixel confidence maps for binary segmentation, and their evaluation."""

from .augment import (
    AugmentationSpec,
    Catalog,
    GeometricKind,
    VisualKind,
    VisualTransform,
    apply_geometric,
    apply_spec,
    brightness,
    build_catalog,
    catalog_checksum,
    gaussian_blur,
    invert_geometric,
    linear_contrast,
)
from .confmaps import ConfidenceMap, Method, mc_dropout_map, pre_threshold_map, tta_map
from .evaluate import (
    CalibrationTable,
    Confusion,
    EvalReport,
    SegMetrics,
    ThresholdGrid,
    auc,
    build_report,
    calibration_table,
    confusion,
    iou_a,
    iou_gain_by_range,
    seg_metrics,
)
from .grids import BinaryMask, Image, Sample, ScoreMap
from .raster_io import read_pfm, read_pgm, write_pfm, write_pgm
from .scorers import ExternalScorer, Scorer, ScorerCapabilities, SyntheticScorer
from .synthetic import SyntheticSpec, generate_synthetic_dataset, synthetic_score

__version__ = "0.1.0"
