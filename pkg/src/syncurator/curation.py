"""Pair scoring, ranking, and training-manifest assembly.

Each video pair gets one Pearson correlation per motion channel (components
of multi-component channels are averaged) and a weighted synchronization
score.  Default channel weights are speech 0.40, gaze 0.30, blink 0.15,
pose 0.15.  Pairs whose signals fall below the detection-coverage threshold
are discarded with a reason instead of scored.

Manifests select the training set from scored pairs: the standard
composition keeps the top-ranked edited and identical pairs at a 3:1 ratio
up to the target size (default 512); alternative compositions (id_only,
edit_only, random) support ablation experiments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from ._version import __version__
from .channels import Channel, ChannelSet, extract_channels
from .dsp import DspConfig, pearson_zero_lag, process
from .errors import InsufficientPairs, InvalidDrop, TooSparse
from .jsonio import canonical_json_bytes
from .landmarks import LandmarkBundle, PairKind, PairRecord, detection_coverage

DEFAULT_TARGET_SIZE = 512
DEFAULT_RATIO = (3, 1)


@dataclass(frozen=True)
class ScoringWeights:
    """Non-negative channel weights; used normalized to sum 1."""

    speech: float = 0.40
    gaze: float = 0.30
    blink: float = 0.15
    pose: float = 0.15

    def __post_init__(self):
        values = self.as_dict()
        for name, value in values.items():
            if value < 0:
                raise ValueError(f"weight {name} must be >= 0, got {value}")
        if sum(values.values()) <= 0:
            raise ValueError("at least one weight must be positive")

    def as_dict(self) -> dict[str, float]:
        return {
            "speech": self.speech,
            "gaze": self.gaze,
            "blink": self.blink,
            "pose": self.pose,
        }

    def normalized(self) -> "ScoringWeights":
        total = self.speech + self.gaze + self.blink + self.pose
        return ScoringWeights(
            speech=self.speech / total,
            gaze=self.gaze / total,
            blink=self.blink / total,
            pose=self.pose / total,
        )

    def for_channel(self, channel: Channel) -> float:
        return self.as_dict()[Channel(channel).value]


def leave_one_out_weights(base: ScoringWeights, drop: Channel) -> ScoringWeights:
    """Zero one channel's weight and renormalize the rest to sum 1."""
    drop = Channel(drop)
    values = base.as_dict()
    values[drop.value] = 0.0
    remaining = sum(values.values())
    if remaining <= 0:
        raise InvalidDrop(f"dropping {drop.value} leaves all weights at zero")
    return ScoringWeights(**{name: value / remaining for name, value in values.items()})


@dataclass(frozen=True)
class PairScore:
    """Per-channel correlations and the weighted synchronization score."""

    pair_id: str
    kind: PairKind
    speech_corr: float | None
    gaze_corr: float | None
    blink_corr: float | None
    pose_corr: float | None
    sync_score: float | None
    coverage_face: float
    coverage_pose: float
    discarded: bool = False
    discard_reason: str | None = None

    def correlation(self, channel: Channel) -> float | None:
        return {
            Channel.SPEECH: self.speech_corr,
            Channel.GAZE: self.gaze_corr,
            Channel.BLINK: self.blink_corr,
            Channel.POSE: self.pose_corr,
        }[Channel(channel)]

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "kind": self.kind.value,
            "speech_corr": self.speech_corr,
            "gaze_corr": self.gaze_corr,
            "blink_corr": self.blink_corr,
            "pose_corr": self.pose_corr,
            "sync_score": self.sync_score,
            "coverage_face": self.coverage_face,
            "coverage_pose": self.coverage_pose,
            "discarded": self.discarded,
            "discard_reason": self.discard_reason,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PairScore":
        return cls(
            pair_id=doc["pair_id"],
            kind=PairKind(doc["kind"]),
            speech_corr=doc["speech_corr"],
            gaze_corr=doc["gaze_corr"],
            blink_corr=doc["blink_corr"],
            pose_corr=doc["pose_corr"],
            sync_score=doc["sync_score"],
            coverage_face=doc["coverage_face"],
            coverage_pose=doc["coverage_pose"],
            discarded=doc["discarded"],
            discard_reason=doc.get("discard_reason"),
        )


def processed_channel_set(bundle: LandmarkBundle, cfg: DspConfig = DspConfig()) -> ChannelSet:
    """Extract all channels and run the full conditioning chain on each."""
    raw = extract_channels(bundle)
    try:
        return ChannelSet(
            speech=process(raw.speech, cfg),
            gaze=tuple(process(sig, cfg) for sig in raw.gaze),
            blink=process(raw.blink, cfg),
            pose=tuple(process(sig, cfg) for sig in raw.pose),
        )
    except TooSparse as exc:
        raise TooSparse(f"{bundle.view.value}: {exc}") from exc


def channel_correlation(set_a: ChannelSet, set_b: ChannelSet, channel: Channel) -> float:
    """Zero-lag correlation of one channel; component mean for gaze and pose."""
    components_a = set_a.by_channel(channel)
    components_b = set_b.by_channel(channel)
    corrs = [pearson_zero_lag(a, b) for a, b in zip(components_a, components_b)]
    return float(np.mean(corrs))


def combine_score(weights: ScoringWeights, correlations: Mapping[Channel, float]) -> float:
    """Weighted synchronization score: convex combination of channel correlations."""
    normalized = weights.normalized()
    return sum(
        normalized.for_channel(channel) * correlations[channel] for channel in Channel
    )


def pair_channel_correlations(
    pair: PairRecord, cfg: DspConfig = DspConfig()
) -> dict[Channel, float]:
    """All four channel correlations between the two views of a pair."""
    set_source = processed_channel_set(pair.source, cfg)
    set_edited = processed_channel_set(pair.edited, cfg)
    return {
        channel: channel_correlation(set_source, set_edited, channel) for channel in Channel
    }


def score_pair(
    pair: PairRecord,
    weights: ScoringWeights = ScoringWeights(),
    cfg: DspConfig = DspConfig(),
) -> PairScore:
    """Score one pair; coverage failures discard it with a recorded reason."""
    coverage_face = min(
        detection_coverage(pair.source, "face"), detection_coverage(pair.edited, "face")
    )
    coverage_pose = min(
        detection_coverage(pair.source, "pose"), detection_coverage(pair.edited, "pose")
    )
    try:
        correlations = pair_channel_correlations(pair, cfg)
    except TooSparse as exc:
        return PairScore(
            pair_id=pair.pair_id,
            kind=pair.kind,
            speech_corr=None,
            gaze_corr=None,
            blink_corr=None,
            pose_corr=None,
            sync_score=None,
            coverage_face=coverage_face,
            coverage_pose=coverage_pose,
            discarded=True,
            discard_reason=str(exc),
        )
    return PairScore(
        pair_id=pair.pair_id,
        kind=pair.kind,
        speech_corr=correlations[Channel.SPEECH],
        gaze_corr=correlations[Channel.GAZE],
        blink_corr=correlations[Channel.BLINK],
        pose_corr=correlations[Channel.POSE],
        sync_score=combine_score(weights, correlations),
        coverage_face=coverage_face,
        coverage_pose=coverage_pose,
    )


class Composition(str, Enum):
    FILTERED = "filtered"
    ID_ONLY = "id_only"
    EDIT_ONLY = "edit_only"
    RANDOM = "random"


@dataclass(frozen=True)
class ManifestEntry:
    pair_id: str
    sync_score: float | None
    kind: PairKind


@dataclass(frozen=True)
class CurationManifest:
    """Ordered, reproducible selection of training pairs."""

    accepted: tuple[ManifestEntry, ...]
    target_size: int
    ratio: tuple[int, int]
    composition: Composition
    seed: int


def _rank_key(score: PairScore) -> tuple:
    # Descending score, missing scores last, ties broken by pair_id.
    missing = score.sync_score is None
    return (missing, -(score.sync_score or 0.0), score.pair_id)


def _top(pool: list[PairScore], count: int, kind: PairKind) -> list[PairScore]:
    if len(pool) < count:
        raise InsufficientPairs(
            f"need {count} {kind.value} pairs, only {len(pool)} usable (short {count - len(pool)})"
        )
    return sorted(pool, key=_rank_key)[:count]


def build_manifest(
    scores: Sequence[PairScore],
    kinds: Mapping[str, PairKind],
    target_size: int = DEFAULT_TARGET_SIZE,
    ratio: tuple[int, int] = DEFAULT_RATIO,
    composition: Composition = Composition.FILTERED,
    seed: int = 0,
) -> CurationManifest:
    """Assemble the ranked training manifest for the requested composition.

    filtered: top-ranked edited and identical pairs at the edited:identical
    ratio; id_only / edit_only: top-ranked pairs of that kind; random:
    seeded uniform sample ignoring both score and discard status (matching
    an unfiltered draw from the generated pool).
    """
    if not scores:
        raise InsufficientPairs("no scores provided")
    composition = Composition(composition)
    if target_size <= 0:
        raise ValueError(f"target_size must be positive, got {target_size}")
    edited_share, identical_share = ratio
    if edited_share < 0 or identical_share < 0 or edited_share + identical_share <= 0:
        raise ValueError(f"invalid ratio {ratio}")

    usable = [s for s in scores if not s.discarded]
    edited_pool = [s for s in usable if kinds[s.pair_id] is PairKind.EDITED]
    identical_pool = [s for s in usable if kinds[s.pair_id] is PairKind.IDENTICAL]

    if composition is Composition.FILTERED:
        n_edited = round(target_size * edited_share / (edited_share + identical_share))
        n_identical = target_size - n_edited
        shortfalls = []
        if len(edited_pool) < n_edited:
            shortfalls.append(f"{n_edited - len(edited_pool)} edited_pair")
        if len(identical_pool) < n_identical:
            shortfalls.append(f"{n_identical - len(identical_pool)} identical_pair")
        if shortfalls:
            raise InsufficientPairs("shortfall: " + ", ".join(shortfalls))
        selected = _top(edited_pool, n_edited, PairKind.EDITED) + _top(
            identical_pool, n_identical, PairKind.IDENTICAL
        )
    elif composition is Composition.ID_ONLY:
        selected = _top(identical_pool, target_size, PairKind.IDENTICAL)
    elif composition is Composition.EDIT_ONLY:
        selected = _top(edited_pool, target_size, PairKind.EDITED)
    else:  # random
        pool = sorted(scores, key=lambda s: s.pair_id)
        if len(pool) < target_size:
            raise InsufficientPairs(
                f"need {target_size} pairs, only {len(pool)} available "
                f"(short {target_size - len(pool)})"
            )
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(pool), size=target_size, replace=False)
        selected = [pool[i] for i in picks]

    ordered = sorted(selected, key=_rank_key)
    accepted = tuple(
        ManifestEntry(pair_id=s.pair_id, sync_score=s.sync_score, kind=kinds[s.pair_id])
        for s in ordered
    )
    return CurationManifest(
        accepted=accepted,
        target_size=target_size,
        ratio=(edited_share, identical_share),
        composition=composition,
        seed=seed,
    )


def kinds_from_scores(scores: Sequence[PairScore]) -> dict[str, PairKind]:
    return {score.pair_id: score.kind for score in scores}


def _base_header(weights: ScoringWeights, cfg: DspConfig, extra_config: Mapping | None) -> dict:
    header = {
        "tool": "syncurator",
        "version": __version__,
        "weights": weights.as_dict(),
        "dsp": {
            "sg_window": cfg.sg_window,
            "sg_order": cfg.sg_order,
            "z_epsilon": cfg.z_epsilon,
            "min_valid_fraction": cfg.min_valid_fraction,
        },
    }
    if extra_config:
        header["config"] = dict(extra_config)
    return header


def scores_bytes(
    scores: Sequence[PairScore],
    weights: ScoringWeights,
    cfg: DspConfig,
    extra_config: Mapping | None = None,
    errors: Sequence[Mapping] | None = None,
) -> bytes:
    """Canonical scores file: header plus one row per pair, pair_id order."""
    doc = _base_header(weights, cfg, extra_config)
    if errors:
        doc["errors"] = list(errors)
    doc["scores"] = [s.to_dict() for s in sorted(scores, key=lambda s: s.pair_id)]
    return canonical_json_bytes(doc)


def parse_scores(raw: bytes | str) -> list[PairScore]:
    """Read back a scores file written by :func:`scores_bytes`."""
    doc = json.loads(raw)
    rows = doc["scores"] if isinstance(doc, dict) else doc
    return [PairScore.from_dict(row) for row in rows]


def manifest_bytes(
    manifest: CurationManifest,
    weights: ScoringWeights,
    cfg: DspConfig,
    extra_config: Mapping | None = None,
) -> bytes:
    """Canonical manifest file with full reproducibility header."""
    doc = _base_header(weights, cfg, extra_config)
    doc.update(
        {
            "composition": manifest.composition.value,
            "seed": manifest.seed,
            "target_size": manifest.target_size,
            "ratio": f"{manifest.ratio[0]}:{manifest.ratio[1]}",
            "accepted": [
                {
                    "pair_id": entry.pair_id,
                    "sync_score": entry.sync_score,
                    "kind": entry.kind.value,
                }
                for entry in manifest.accepted
            ],
        }
    )
    return canonical_json_bytes(doc)
