"""Volume-ladder scaling runs: measure, fit a line, and render the figure.

Each volume in the ladder runs `repetitions` times with the velocity cap
disabled; the mean wall time per volume feeds a least-squares line whose
R-squared is the linear-scaling figure of merit. Results can be written as
a CSV table and a PNG plot side by side.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError, SynthgenError
from .runtime import MB, GenerationPlan


@dataclass
class ScalingResult:
    kind: str
    volume_unit: str  # "bytes" or "edges"
    volumes: list[int]
    times: list[list[float]]
    mean_times: list[float]
    slope: float
    intercept: float
    r_squared: float
    repetitions: int
    partial: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "volume_unit": self.volume_unit,
            "volumes": self.volumes,
            "mean_times": self.mean_times,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "repetitions": self.repetitions,
            "partial": self.partial,
            "error": self.error,
        }


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r_squared


def scaling_experiment(
    template: GenerationPlan,
    volumes: list[int],
    repetitions: int,
    run=None,
) -> ScalingResult:
    """Run the ladder and fit mean time vs volume.

    `run` maps a plan to a ThroughputReport (injectable for testing); any
    run failure stops the ladder and the partial results are labeled so.
    """
    if len(volumes) < 3:
        raise ParameterError(f"need at least 3 volumes, got {len(volumes)}")
    if any(v <= 0 for v in volumes):
        raise ParameterError("volumes must be positive")
    if repetitions < 1:
        raise ParameterError("repetitions must be >= 1")
    if run is None:
        from .harness import run_plan

        run = run_plan
    template = replace(template, rate=None)  # velocity cap disabled
    unit = "edges" if template.kind == "graph" else "bytes"

    done_volumes: list[int] = []
    times: list[list[float]] = []
    error = None
    for volume in volumes:
        if unit == "edges":
            plan = template.with_volume(edges=volume)
        else:
            plan = template.with_volume(size_bytes=volume)
        reps = []
        try:
            for _ in range(repetitions):
                reps.append(run(plan).seconds)
        except (SynthgenError, OSError) as e:
            error = f"volume {volume}: {e}"
            break
        done_volumes.append(volume)
        times.append(reps)

    mean_times = [float(np.mean(t)) for t in times]
    if len(done_volumes) >= 2:
        slope, intercept, r2 = _fit_line(
            np.array(done_volumes, dtype=np.float64), np.array(mean_times)
        )
    else:
        slope = intercept = r2 = float("nan")
    return ScalingResult(
        kind=template.kind,
        volume_unit=unit,
        volumes=done_volumes,
        times=times,
        mean_times=mean_times,
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        repetitions=repetitions,
        partial=error is not None,
        error=error,
    )


def write_scaling_csv(result: ScalingResult, path) -> None:
    """Delimited run table: one row per volume, one column per repetition."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        rep_cols = [f"rep{i + 1}_seconds" for i in range(result.repetitions)]
        writer.writerow([f"volume_{result.volume_unit}"] + rep_cols + ["mean_seconds"])
        for volume, reps, mean in zip(result.volumes, result.times, result.mean_times):
            writer.writerow([volume] + [f"{t:.6f}" for t in reps] + [f"{mean:.6f}"])


def plot_scaling(result: ScalingResult, path) -> None:
    """Render mean time vs volume with the fitted line to a PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if result.volume_unit == "bytes":
        xs = np.array(result.volumes, dtype=np.float64) / MB
        xlabel = "volume (MiB)"
        scale = MB
    else:
        xs = np.array(result.volumes, dtype=np.float64)
        xlabel = "volume (edges)"
        scale = 1.0

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for x, reps in zip(xs, result.times):
        ax.plot([x] * len(reps), reps, "o", color="tab:gray", ms=3, alpha=0.6)
    ax.plot(xs, result.mean_times, "s-", color="tab:blue", label="mean time")
    if np.isfinite(result.slope):
        grid = np.linspace(0, xs.max() * 1.05, 64)
        ax.plot(
            grid,
            result.slope * grid * scale + result.intercept,
            "--",
            color="tab:red",
            label=f"fit (R$^2$ = {result.r_squared:.4f})",
        )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("generation time (s)")
    title = f"{result.kind} generator scaling"
    if result.partial:
        title += " (partial)"
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
