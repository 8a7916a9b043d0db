"""Export and plot per-channel signal traces for a lagged pair.

Reproduces the blink-trace visualization style: the source and edited
views' processed blink signals, whose peaks are offset by the injected
lag.  Writes a long-format CSV next to this script and, when matplotlib
is available, a PNG.
"""

import csv
from pathlib import Path

from syncurator import DspConfig, MotionParams, SynthSpec, extract_channels, generate_pair
from syncurator.dsp import process

OUT_DIR = Path(__file__).parent / "out"
OUT_DIR.mkdir(exist_ok=True)

LAG = 5
spec = SynthSpec(
    n_frames=81, lag_frames=LAG, seed=2,
    motion=MotionParams(blink_period=60.0),  # a single full closure in range
)
pair = generate_pair(spec)
cfg = DspConfig()

rows = []
traces = {}
for bundle in (pair.source, pair.edited):
    for raw in extract_channels(bundle).components():
        conditioned = process(raw, cfg)
        traces[(bundle.view.value, raw.component)] = conditioned.values
        for frame, value in enumerate(conditioned.values):
            rows.append(
                (frame, bundle.view.value, raw.channel.value, raw.component, float(value))
            )

csv_path = OUT_DIR / "traces.csv"
with csv_path.open("w", newline="") as handle:
    writer = csv.writer(handle)
    writer.writerow(["frame", "view", "channel", "component", "value"])
    writer.writerows(rows)
print(f"wrote {len(rows)} rows -> {csv_path}")

source_blink = traces[("source", "ear_neg")]
edited_blink = traces[("edited", "ear_neg")]
print(f"blink peak frames: source={source_blink.argmax()}, edited={edited_blink.argmax()} "
      f"(injected lag {LAG})")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the PNG")
else:
    fig, axes = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    axes[0].plot(source_blink, color="green", label="source")
    axes[0].plot(edited_blink, color="orange", label="edited")
    axes[0].set_title(f"blink signal (negated EAR), lag {LAG} frames")
    axes[0].legend()
    axes[1].plot(traces[("source", "elbow_angle_right")], color="green", label="source")
    axes[1].plot(traces[("edited", "elbow_angle_right")], color="orange", label="edited")
    axes[1].set_title("right elbow angle")
    axes[1].set_xlabel("frame")
    axes[1].legend()
    fig.tight_layout()
    png_path = OUT_DIR / "traces.png"
    fig.savefig(png_path, dpi=120)
    print(f"plot -> {png_path}")
