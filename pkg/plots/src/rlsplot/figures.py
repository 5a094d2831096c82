"""Build figures from the simulator's CSV outputs.

Three figure kinds are supported, one per CSV schema:

``learning_curve``
    columns ``algorithm,trial,t,rel_error``; trials are averaged first and
    one mean curve per algorithm is drawn.
``per_node``
    columns ``algorithm,trial,snapshot_t,node,rel_error``; one panel per
    snapshot time, trial-averaged bars over nodes, grouped by algorithm.
``sweep``
    columns ``parameter,value,algorithm,successes,mean_success_time``;
    grouped bars of success counts per parameter value.

:func:`render` writes the image and returns the series pulled back off the
drawn artists (line y-data, bar heights), so callers can verify that what
was plotted is exactly what the CSV implies. No metric is ever recomputed
here; the module is strictly a consumer of the CSV contract.

Figures are built on :class:`matplotlib.figure.Figure` directly (no pyplot,
no global state, no GUI backend), which keeps rendering headless-safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from rlsplot.errors import EmptyInput, MissingColumn

REQUIRED_COLUMNS: dict[str, tuple[str, ...]] = {
    "learning_curve": ("algorithm", "trial", "t", "rel_error"),
    "per_node": ("algorithm", "trial", "snapshot_t", "node", "rel_error"),
    "sweep": ("parameter", "value", "algorithm", "successes", "mean_success_time"),
}
KINDS = frozenset(REQUIRED_COLUMNS)

_PathLike = str | Path


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSV path(s), figure kind, output path, axis options.

    ``source`` may be a single path or a sequence of paths; several files
    are concatenated row-wise (they must each carry the kind's columns).
    ``xlabel``/``ylabel`` default per kind when left ``None``; for sweeps
    the x label defaults to the swept parameter's name from the CSV.
    """

    source: _PathLike | Sequence[_PathLike]
    kind: str
    out: _PathLike
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    logy: bool = False


@dataclass(frozen=True)
class RenderResult:
    """Where the image went, plus the series that were actually drawn.

    ``series`` maps a legend label (``"admm"``, ``"admm@t=200"``, ...) to
    the y-values read back from the matplotlib artists immediately after
    drawing — the ground truth for "what ended up in the figure".
    """

    path: Path
    series: dict[str, np.ndarray]
    figure: Figure


_DEFAULT_LABELS = {
    "learning_curve": ("time step", "relative error"),
    "per_node": ("node", "relative error"),
    "sweep": (None, "successful trials"),  # x label comes from the CSV
}


def _source_paths(spec: FigureSpec) -> tuple[Path, ...]:
    if isinstance(spec.source, (str, Path)):
        return (Path(spec.source),)
    return tuple(Path(p) for p in spec.source)


def _load(spec: FigureSpec) -> pd.DataFrame:
    required = REQUIRED_COLUMNS[spec.kind]
    frames = []
    for path in _source_paths(spec):
        try:
            frame = pd.read_csv(path)
        except pd.errors.EmptyDataError as exc:
            raise EmptyInput(f"{path}: file holds no data") from exc
        if frame.empty:
            raise EmptyInput(f"{path}: no data rows")
        missing = [c for c in required if c not in frame.columns]
        if missing:
            raise MissingColumn(
                f"{path}: missing column(s) {', '.join(missing)} "
                f"(kind {spec.kind!r} needs {', '.join(required)})"
            )
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if len(frames) > 1 else frames[0]


def _fmt(x) -> str:
    """Compact tick/label text: integral floats lose the trailing .0."""
    value = float(x)
    return str(int(value)) if value.is_integer() else f"{value:g}"


def _draw_learning_curve(fig: Figure, df: pd.DataFrame) -> dict[str, np.ndarray]:
    ax = fig.subplots()
    means = df.groupby(["algorithm", "t"], sort=True)["rel_error"].mean()
    series: dict[str, np.ndarray] = {}
    for algorithm in means.index.get_level_values("algorithm").unique():
        curve = means.loc[algorithm].sort_index()
        (line,) = ax.plot(
            curve.index.to_numpy(),
            curve.to_numpy(dtype=float),
            label=str(algorithm),
            linewidth=1.4,
        )
        series[str(algorithm)] = np.asarray(line.get_ydata(), dtype=float)
    ax.margins(x=0)
    ax.legend(frameon=False)
    return series


def _grouped_bars(ax, positions, groups, width_budget=0.8):
    """Draw one bar group per (label, heights) pair; return drawn heights."""
    width = width_budget / max(len(groups), 1)
    drawn: dict[str, np.ndarray] = {}
    for k, (label, heights) in enumerate(groups):
        offset = (k - (len(groups) - 1) / 2) * width
        bars = ax.bar(positions + offset, heights, width=width, label=label)
        drawn[label] = np.array([rect.get_height() for rect in bars], dtype=float)
    return drawn


def _draw_per_node(fig: Figure, df: pd.DataFrame) -> dict[str, np.ndarray]:
    snapshots = sorted(df["snapshot_t"].unique())
    axes = np.atleast_1d(fig.subplots(1, len(snapshots), sharey=True))
    means = df.groupby(["snapshot_t", "algorithm", "node"], sort=True)["rel_error"].mean()
    nodes = sorted(df["node"].unique())
    algorithms = sorted(df["algorithm"].unique())
    positions = np.arange(len(nodes), dtype=float)
    grid = means.reindex(
        pd.MultiIndex.from_product(
            [snapshots, algorithms, nodes], names=["snapshot_t", "algorithm", "node"]
        )
    )
    series: dict[str, np.ndarray] = {}
    for ax, snap in zip(axes, snapshots):
        groups = [
            (str(algorithm), grid.loc[(snap, algorithm)].to_numpy(dtype=float))
            for algorithm in algorithms
        ]
        drawn = _grouped_bars(ax, positions, groups)
        for label, heights in drawn.items():
            series[f"{label}@t={_fmt(snap)}"] = heights
        ax.set_title(f"t = {_fmt(snap)}")
        ax.set_xticks(positions, [str(n) for n in nodes])
    axes[0].legend(frameon=False)
    return series


def _draw_sweep(fig: Figure, df: pd.DataFrame) -> dict[str, np.ndarray]:
    ax = fig.subplots()
    values = sorted(df["value"].unique())
    algorithms = sorted(df["algorithm"].unique())
    counts = df.groupby(["algorithm", "value"], sort=True)["successes"].sum()
    positions = np.arange(len(values), dtype=float)
    groups = [
        (str(algorithm), counts.loc[algorithm].reindex(values).to_numpy(dtype=float))
        for algorithm in algorithms
    ]
    series = _grouped_bars(ax, positions, groups)
    ax.set_xticks(positions, [_fmt(v) for v in values])
    ax.legend(frameon=False)
    return series


_DRAWERS = {
    "learning_curve": _draw_learning_curve,
    "per_node": _draw_per_node,
    "sweep": _draw_sweep,
}


def _figsize(kind: str, df: pd.DataFrame) -> tuple[float, float]:
    if kind == "per_node":
        panels = df["snapshot_t"].nunique()
        return (min(4.0 * panels, 16.0), 4.2)
    return (7.0, 4.2)


def render(spec: FigureSpec) -> RenderResult:
    """Draw the figure described by ``spec`` and write it to ``spec.out``.

    The output format follows the file extension (``.png``, ``.pdf``,
    ``.svg``, ...). Returns the output path, the figure object, and the
    per-label series read back from the drawn artists before the file was
    written.

    Raises ``ValueError`` for an unknown kind, ``EmptyInput`` for a CSV
    with no data rows, and ``MissingColumn`` when a required column is
    absent.
    """
    if spec.kind not in _DRAWERS:
        raise ValueError(f"kind must be one of {sorted(_DRAWERS)}, got {spec.kind!r}")
    df = _load(spec)
    fig = Figure(figsize=_figsize(spec.kind, df), constrained_layout=True)
    series = _DRAWERS[spec.kind](fig, df)

    default_x, default_y = _DEFAULT_LABELS[spec.kind]
    if default_x is None:
        default_x = str(df["parameter"].iloc[0])
    xlabel = spec.xlabel if spec.xlabel is not None else default_x
    ylabel = spec.ylabel if spec.ylabel is not None else default_y
    for ax in fig.axes:
        ax.set_xlabel(xlabel)
        if spec.logy:
            ax.set_yscale("log")
    fig.axes[0].set_ylabel(ylabel)
    if spec.title:
        fig.suptitle(spec.title)

    out = Path(spec.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    return RenderResult(path=out, series=series, figure=fig)
