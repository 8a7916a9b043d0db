"""Synchronization scoring, curation, and evaluation for paired portrait videos.

The toolkit turns facial/pose landmark time series into per-channel
synchronization scores, curates training manifests from scored pairs, and
computes the embedding-based evaluation suite.  See README.md for the file
formats and the ``syncurator`` CLI.
"""

from ._version import __version__
from .channels import (
    Channel,
    ChannelSet,
    ChannelSignal,
    Stage,
    blink_signal,
    extract_channels,
    gaze_signal,
    pose_signals,
    speech_signal,
    unwrap_angles,
)
from .config import RunConfig, resolve_config
from .curation import (
    Composition,
    CurationManifest,
    PairScore,
    ScoringWeights,
    build_manifest,
    channel_correlation,
    combine_score,
    leave_one_out_weights,
    pair_channel_correlations,
    processed_channel_set,
    score_pair,
)
from .dsp import (
    DspConfig,
    interpolate_gaps,
    pearson_zero_lag,
    process,
    savitzky_golay,
    z_normalize,
)
from .errors import (
    AllFramesSkipped,
    CoverageError,
    DegenerateGeometry,
    InsufficientPairs,
    InvalidDrop,
    LengthMismatch,
    MissingTextEmbeddings,
    NoFacesDetected,
    ParseError,
    SchemaError,
    SyncuratorError,
    TooSparse,
    UndefinedDirection,
)
from .evalmetrics import (
    EmbeddingBundle,
    MetricReport,
    aggregate_reports,
    arcface_similarity,
    clip_text_align,
    compute_metrics,
    directional_clip_image,
    directional_clip_text_dual,
    eval_sync,
    load_embedding_bundle,
    write_embedding_bundle,
)
from .landmarks import (
    LandmarkBundle,
    LandmarkFrame,
    LandmarkPoint,
    PairKind,
    PairRecord,
    View,
    detection_coverage,
    load_bundle,
    load_pair,
    parse_bundle,
    serialize_bundle,
    write_bundle,
    write_pair,
)
from .synth import (
    MotionParams,
    RankingFidelity,
    SynthSpec,
    generate_pair,
    ranking_fidelity,
    standard_suite,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
