"""Check records and report output: JSON, delimited files, and figures.

Every identity/inequality check in the package reduces to a
:class:`CheckReport` serializing as ``{check, max_deviation, tolerance,
pass}`` plus free-form details.  The verification harness aggregates
these with scaling-study verdicts into a JSON report; alongside the
JSON, the report path can emit per-experiment CSV matrices and render
matplotlib figures of the scaling trends.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


@dataclass
class CheckReport:
    """Outcome of one numerical check against its stated tolerance."""

    check: str
    max_deviation: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation <= self.tolerance)

    def to_dict(self) -> dict:
        out = {
            "check": self.check,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.details:
            out["details"] = self.details
        return out


def json_safe(obj: Any) -> Any:
    """Convert dataclasses, numpy scalars/arrays and paths to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return json_safe(obj.to_dict())
        return json_safe(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [json_safe(v) for v in obj.tolist()]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        # JSON has no Infinity/NaN literals; use strings
        return value if math.isfinite(value) else repr(value)
    return obj


def dump_json(obj: Any, path=None) -> str:
    text = json.dumps(json_safe(obj), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def write_matrix_csv(path, row_label: str, rows, col_label: str, cols,
                     values: np.ndarray) -> None:
    """Delimited (resolution x box_size) value matrix."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{row_label}\\{col_label}"] + [repr(float(c)) for c in cols])
        for r, row in zip(rows, np.asarray(values)):
            writer.writerow([repr(float(r))] + [repr(float(v)) for v in row])


def write_cube_values_csv(path, dim: int, entries, force: bool = False) -> None:
    """Per-cube functional values: side, anchor coordinates, value."""
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        anchor_cols = ["anchor"] if dim == 1 else ["anchor0", "anchor1"]
        writer.writerow(["side"] + anchor_cols + ["value"])
        for cube, value in entries:
            writer.writerow([cube.side, *cube.anchor, repr(float(value))])


def render_study_figure(study, path) -> None:
    """Plot log2 sup-values against box size and resolution with fitted slopes."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    values = np.asarray(study.values, dtype=float)
    res = np.asarray(study.resolutions, dtype=float)
    boxes = np.asarray(study.box_sizes, dtype=float)
    safe = np.where(values > 0, values, np.nan)

    fig, (ax_box, ax_res) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    for i, n in enumerate(res):
        ax_box.plot(np.log2(boxes), np.log2(safe[i]), "o-", label=f"N={int(n)}")
    ax_box.set_xlabel("log2(box half-width)")
    ax_box.set_ylabel("log2(sup value)")
    ax_box.set_title(f"box axis, slope={study.slope_box:+.3f}")
    ax_box.legend(fontsize=8)

    for j, r in enumerate(boxes):
        ax_res.plot(np.log2(res), np.log2(safe[:, j]), "s-", label=f"R={r:g}")
    ax_res.set_xlabel("log2(cells)")
    ax_res.set_ylabel("log2(sup value)")
    ax_res.set_title(f"resolution axis, slope={study.slope_res:+.3f}")
    ax_res.legend(fontsize=8)

    fig.suptitle(f"{study.name}: verdict {study.verdict}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_report_outputs(studies, outdir) -> list[Path]:
    """Write one CSV and one PNG per scaling study; returns created paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    created = []
    for study in studies:
        base = outdir / study.name.replace("/", "_")
        csv_path = base.with_suffix(".csv")
        write_matrix_csv(csv_path, "cells", study.resolutions,
                         "box", study.box_sizes, study.values)
        png_path = base.with_suffix(".png")
        render_study_figure(study, png_path)
        created.extend([csv_path, png_path])
    return created
