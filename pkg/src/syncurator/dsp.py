"""Signal conditioning chain and zero-lag correlation.

Raw channel signals pass through three stages before scoring:

1. gap interpolation - interior missing runs filled linearly, leading and
   trailing runs extended with the nearest valid value
2. Savitzky-Golay smoothing - least-squares polynomial fit per window
   (defaults: window 9, order 2); at the boundaries the polynomial fitted
   to the first/last window is evaluated at the sample position, which
   keeps polynomials of degree <= order exactly invariant end to end
3. z-normalization - (x - mean) / (std + epsilon) with population std

Correlation between two processed signals is the plain Pearson coefficient
at zero temporal lag; no lag search is performed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .channels import ChannelSignal, Stage, unwrap_angles
from .errors import LengthMismatch, TooSparse

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class DspConfig:
    """Parameters of the conditioning chain."""

    sg_window: int = 9
    sg_order: int = 2
    z_epsilon: float = 1e-6
    min_valid_fraction: float = 0.5

    def __post_init__(self):
        if self.sg_window < 1 or self.sg_window % 2 == 0:
            raise ValueError(f"sg_window must be odd and positive, got {self.sg_window}")
        if not 0 <= self.sg_order < self.sg_window:
            raise ValueError(
                f"sg_order must satisfy 0 <= order < window, got {self.sg_order}"
            )
        if not self.z_epsilon > 0:
            raise ValueError(f"z_epsilon must be positive, got {self.z_epsilon}")
        if not 0.0 <= self.min_valid_fraction <= 1.0:
            raise ValueError(
                f"min_valid_fraction must be in [0, 1], got {self.min_valid_fraction}"
            )


def _require_stage(signal: ChannelSignal, stage: Stage, op: str) -> None:
    if signal.stage is not stage:
        raise ValueError(f"{op} requires stage={stage.value}, got {signal.stage.value}")


def interpolate_gaps(signal: ChannelSignal, cfg: DspConfig = DspConfig()) -> ChannelSignal:
    """Fill missing samples; raises TooSparse below the coverage threshold."""
    _require_stage(signal, Stage.RAW, "interpolate_gaps")
    values = signal.values
    valid = ~np.isnan(values)
    n_valid = int(np.count_nonzero(valid))
    fraction = n_valid / values.size
    if fraction < cfg.min_valid_fraction or n_valid == 0:
        raise TooSparse(
            f"{signal.channel.value}/{signal.component}: valid fraction "
            f"{fraction:.3f} below minimum {cfg.min_valid_fraction:.3f}"
        )
    if n_valid == values.size:
        filled = values.copy()
    else:
        idx = np.arange(values.size, dtype=np.float64)
        filled = np.interp(idx, idx[valid], values[valid])
    return signal.advanced(filled, Stage.INTERPOLATED)


def _effective_window(n: int, cfg: DspConfig) -> tuple[int, int]:
    window = min(cfg.sg_window, n if n % 2 == 1 else n - 1)
    window = max(window, 1)
    order = min(cfg.sg_order, window - 1)
    return window, order


def savitzky_golay(signal: ChannelSignal, cfg: DspConfig = DspConfig()) -> ChannelSignal:
    """Least-squares polynomial smoothing over a centered sliding window.

    Signals shorter than the window shrink it to the largest odd length
    that fits (window 1 degenerates to the identity).
    """
    _require_stage(signal, Stage.INTERPOLATED, "savitzky_golay")
    values = signal.values
    window, order = _effective_window(values.size, cfg)
    if window == 1:
        smoothed = values.copy()
    else:
        smoothed = savgol_filter(values, window, order, mode="interp")
    return signal.advanced(smoothed, Stage.SMOOTHED)


def z_normalize(signal: ChannelSignal, cfg: DspConfig = DspConfig()) -> ChannelSignal:
    """Center and scale: (x - mean) / (population std + epsilon)."""
    _require_stage(signal, Stage.SMOOTHED, "z_normalize")
    values = signal.values
    normalized = (values - values.mean()) / (values.std() + cfg.z_epsilon)
    return signal.advanced(normalized, Stage.NORMALIZED)


def process(signal: ChannelSignal, cfg: DspConfig = DspConfig()) -> ChannelSignal:
    """Full chain: unwrap (circular only) -> interpolate -> smooth -> normalize."""
    return z_normalize(savitzky_golay(interpolate_gaps(unwrap_angles(signal), cfg), cfg), cfg)


def pearson_zero_lag(a: ChannelSignal, b: ChannelSignal) -> float:
    """Pearson correlation at zero lag between two normalized signals.

    Returns 0.0 when either signal has variance below 1e-12 (a motionless
    channel carries no synchronization evidence).
    """
    _require_stage(a, Stage.NORMALIZED, "pearson_zero_lag")
    _require_stage(b, Stage.NORMALIZED, "pearson_zero_lag")
    if len(a) != len(b):
        raise LengthMismatch(f"signal lengths differ: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("correlation requires at least 2 samples")
    xa = a.values - a.values.mean()
    xb = b.values - b.values.mean()
    var_a = float(np.mean(xa * xa))
    var_b = float(np.mean(xb * xb))
    if var_a < VARIANCE_FLOOR or var_b < VARIANCE_FLOOR:
        return 0.0
    value = float(np.mean(xa * xb) / np.sqrt(var_a * var_b))
    return min(1.0, max(-1.0, value))
