"""Figure builders.

Two products:

* ``plot_energy`` -- modified-energy decay curves, one per diagnostics CSV,
  overlaid on shared axes.
* ``plot_fields`` -- heatmap panels from CHSF snapshots, columns ordered by
  time; the phase field on a fixed symmetric [-1, 1] scale, the surfactant
  on [0, rho_max], so panels are comparable across time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .chsf import Snapshot, read_chsf  # noqa: E402
from .series import read_series  # noqa: E402

PHI_CMAP = "RdBu_r"
RHO_CMAP = "viridis"


@dataclass(frozen=True)
class PlotJob:
    """A validated rendering request: parsed inputs plus the output path."""

    inputs: tuple
    kind: str  # energy | heatmap | panel
    out: str
    labels: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("energy", "heatmap", "panel"):
            raise ValueError(f"unknown plot kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("no inputs given")
        if self.labels and len(self.labels) != len(self.inputs):
            raise ValueError("labels must match inputs one-to-one")


def plot_energy(csv_paths, out, labels=None, include_original=False, dpi=150):
    """Overlay one modified-energy curve per CSV; returns the output path."""
    paths = list(csv_paths)
    labels = list(labels) if labels else [str(p) for p in paths]
    job = PlotJob(tuple(paths), "energy", str(out), tuple(labels))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path, label in zip(paths, labels):
        data = read_series(path)
        ax.plot(data["time"], data["e_modified"], label=label, lw=1.4)
        if include_original:
            ax.plot(data["time"], data["e_original"], ls="--", lw=0.9,
                    label=f"{label} (unquadratized)")
    ax.set_xlabel("time")
    ax.set_ylabel("free energy")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(job.out, dpi=dpi)
    plt.close(fig)
    return job.out


def _group_by_time(snaps):
    """Sort snapshots into time-ordered columns of {field_name: Snapshot}."""
    columns = {}
    for s in snaps:
        columns.setdefault(s.time, {})[s.field_name] = s
    return [columns[t] for t in sorted(columns)]


def plot_fields(snapshot_paths, out, rho_max=1.0, dpi=150):
    """Render heatmap panels from CHSF files; returns the output path.

    Rows are field kinds (phi on top when both are present), columns are
    snapshot times in increasing order.  All snapshots must share one grid.
    """
    paths = list(snapshot_paths)
    snaps = [read_chsf(p) for p in paths]
    kind = "heatmap" if len(snaps) == 1 else "panel"
    job = PlotJob(tuple(paths), kind, str(out))

    shapes = {(s.nx, s.ny) for s in snaps}
    if len(shapes) != 1:
        raise ValueError(f"snapshots use mismatched grids: {sorted(shapes)}")

    columns = _group_by_time(snaps)
    row_names = [n for n in ("phi", "rho", "u", "v")
                 if any(n in col for col in columns)]
    nrows, ncols = len(row_names), len(columns)
    fig, axes = plt.subplots(nrows, ncols, squeeze=False,
                             figsize=(2.2 * ncols, 2.2 * nrows))
    scales = {"phi": (PHI_CMAP, -1.0, 1.0), "rho": (RHO_CMAP, 0.0, rho_max)}
    for j, col in enumerate(columns):
        for i, name in enumerate(row_names):
            ax = axes[i][j]
            ax.set_xticks([])
            ax.set_yticks([])
            snap = col.get(name)
            if snap is None:
                ax.axis("off")
                continue
            cmap, vmin, vmax = scales.get(name, (RHO_CMAP, None, None))
            ax.imshow(snap.values.T, origin="lower", cmap=cmap,
                      vmin=vmin, vmax=vmax, interpolation="nearest")
            if i == 0:
                ax.set_title(f"t={snap.time:g}", fontsize=9)
            if j == 0:
                ax.set_ylabel(name, fontsize=9)
    fig.tight_layout()
    fig.savefig(job.out, dpi=dpi)
    plt.close(fig)
    return job.out
