"""Run configuration: file values, flag overrides, and the resolved echo.

Precedence is flags > config file > defaults.  The config file may be TOML
or JSON (chosen by extension); when no --config flag is given the
SYNCURATOR_CONFIG environment variable is consulted.  Every output file
embeds the fully resolved configuration so a run can be reproduced from
its own header.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channels import Channel
from .curation import (
    DEFAULT_RATIO,
    DEFAULT_TARGET_SIZE,
    Composition,
    ScoringWeights,
    leave_one_out_weights,
)
from .dsp import DspConfig
from .errors import ParseError

ENV_CONFIG = "SYNCURATOR_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one command invocation."""

    dsp: DspConfig = field(default_factory=DspConfig)
    weights: ScoringWeights = field(default_factory=ScoringWeights)
    target_size: int = DEFAULT_TARGET_SIZE
    ratio: tuple[int, int] = DEFAULT_RATIO
    composition: Composition = Composition.FILTERED
    seed: int = 0
    jobs: int | None = None
    drop_channel: Channel | None = None

    def effective_weights(self) -> ScoringWeights:
        if self.drop_channel is None:
            return self.weights
        return leave_one_out_weights(self.weights, self.drop_channel)

    def echo(self) -> dict:
        """Resolved configuration dict embedded in every output header."""
        return {
            "dsp": {
                "sg_window": self.dsp.sg_window,
                "sg_order": self.dsp.sg_order,
                "z_epsilon": self.dsp.z_epsilon,
                "min_valid_fraction": self.dsp.min_valid_fraction,
            },
            "weights": self.weights.as_dict(),
            "drop_channel": None if self.drop_channel is None else self.drop_channel.value,
            "target_size": self.target_size,
            "ratio": f"{self.ratio[0]}:{self.ratio[1]}",
            "composition": self.composition.value,
            "seed": self.seed,
            "jobs": self.jobs,
        }


def parse_ratio(text: str) -> tuple[int, int]:
    try:
        left, right = text.split(":")
        ratio = (int(left), int(right))
    except ValueError:
        raise ValueError(f"ratio must look like 'A:B', got {text!r}") from None
    if ratio[0] < 0 or ratio[1] < 0 or sum(ratio) == 0:
        raise ValueError(f"ratio parts must be non-negative and not both zero: {text!r}")
    return ratio


def parse_weights(text: str) -> ScoringWeights:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"weights must be 'speech,gaze,blink,pose', got {text!r}")
    speech, gaze, blink, pose = (float(p) for p in parts)
    return ScoringWeights(speech=speech, gaze=gaze, blink=blink, pose=pose)


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            return json.loads(path.read_text(encoding="utf-8"))
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ParseError(f"{path}: invalid config file: {exc}") from exc


def _file_values(config_path: str | None) -> dict:
    path = config_path or os.environ.get(ENV_CONFIG)
    return load_config_file(path) if path else {}


def resolve_config(flags: Mapping[str, Any], config_path: str | None = None) -> RunConfig:
    """Merge defaults, config-file values, and (non-None) flag overrides."""
    doc = _file_values(config_path)

    def pick(name: str, fallback):
        flag = flags.get(name)
        if flag is not None:
            return flag
        value = doc.get(name)
        return fallback if value is None else value

    dsp_doc = dict(doc.get("dsp", {}))
    dsp = DspConfig(
        sg_window=int(dsp_doc.get("sg_window", DspConfig.sg_window)),
        sg_order=int(dsp_doc.get("sg_order", DspConfig.sg_order)),
        z_epsilon=float(dsp_doc.get("z_epsilon", DspConfig.z_epsilon)),
        min_valid_fraction=float(
            dsp_doc.get("min_valid_fraction", DspConfig.min_valid_fraction)
        ),
    )

    weights = flags.get("weights")
    if weights is None:
        weights_doc = doc.get("weights")
        weights = ScoringWeights(**weights_doc) if weights_doc else ScoringWeights()
    elif isinstance(weights, str):
        weights = parse_weights(weights)

    ratio = pick("ratio", DEFAULT_RATIO)
    if isinstance(ratio, str):
        ratio = parse_ratio(ratio)

    drop = pick("drop_channel", None)
    composition = Composition(pick("composition", Composition.FILTERED))
    jobs = pick("jobs", None)

    return RunConfig(
        dsp=dsp,
        weights=weights,
        target_size=int(pick("target_size", DEFAULT_TARGET_SIZE)),
        ratio=(int(ratio[0]), int(ratio[1])),
        composition=composition,
        seed=int(pick("seed", 0)),
        jobs=None if jobs is None else int(jobs),
        drop_channel=None if drop is None else Channel(drop),
    )
