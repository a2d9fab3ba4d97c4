"""Turn budget-search result CSVs into sample-complexity-versus-epsilon figures.

One image per instance id, one curve per algorithm, epsilon ascending left to
right. Rows whose budget column holds the not-found marker become gaps in
their curve; nothing is recomputed from the experiment side. Styling is fixed
and the PNG writer adds no timestamps, so rerendering the same CSV reproduces
the same bytes.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXPECTED_COLUMNS = (
    "instance_id",
    "algorithm",
    "epsilon",
    "budget_found",
    "total_samples",
    "learning_samples",
    "test_samples",
    "success_rate",
    "balance_ratio",
    "seed_base",
)
NOT_FOUND = "NA"
FIGURE_SIZE = (6.0, 4.0)
DPI = 120


@dataclass(frozen=True)
class PlotSpec:
    input_csv: Path
    output_dir: Path
    log_y: bool = False
    panel_key: str = "instance_id"
    curve_key: str = "algorithm"


@dataclass(frozen=True)
class CurveReport:
    rows: int  # epsilon rows feeding the curve
    drawn: int  # plotted points (rows minus not-found gaps)


def _read_rows(path: Path) -> list[dict[str, str]]:
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            return []
        if header != EXPECTED_COLUMNS:
            missing = [c for c in EXPECTED_COLUMNS if c not in header]
            raise ValueError(
                f"{path}: unexpected result schema; missing columns {missing}, got {list(header)}"
            )
        return [dict(zip(header, rec)) for rec in reader]


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("_") or "panel"


def render(spec: PlotSpec) -> dict[Path, dict[str, CurveReport]]:
    """Write one image per panel; returns per-panel curve reports."""
    rows = _read_rows(spec.input_csv)
    if not rows:
        warnings.warn(f"{spec.input_csv}: no result rows, nothing rendered")
        return {}
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    panels: dict[str, list[dict[str, str]]] = {}
    for row in rows:
        panels.setdefault(row[spec.panel_key], []).append(row)

    written: dict[Path, dict[str, CurveReport]] = {}
    for panel_name in sorted(panels):
        fig, ax = plt.subplots(figsize=FIGURE_SIZE, dpi=DPI)
        reports: dict[str, CurveReport] = {}
        curves: dict[str, list[dict[str, str]]] = {}
        for row in panels[panel_name]:
            curves.setdefault(row[spec.curve_key], []).append(row)
        for algorithm in sorted(curves):
            points = sorted(curves[algorithm], key=lambda r: float(r["epsilon"]))
            xs = np.array([float(r["epsilon"]) for r in points])
            ys = np.array(
                [
                    np.nan if r["budget_found"] == NOT_FOUND else float(r["budget_found"])
                    for r in points
                ]
            )
            ax.plot(xs, ys, marker="o", label=algorithm)  # NaN rows break the line: gaps
            reports[algorithm] = CurveReport(rows=len(points), drawn=int(np.isfinite(ys).sum()))
        ax.set_xlabel("error threshold")
        ax.set_ylabel("samples to target success rate")
        ax.set_title(panel_name)
        if spec.log_y:
            ax.set_yscale("log")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out_path = spec.output_dir / f"{_slug(panel_name)}.png"
        fig.savefig(out_path)
        plt.close(fig)
        written[out_path] = reports
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="render", description=__doc__)
    parser.add_argument("--in", dest="input_csv", required=True, help="result CSV path")
    parser.add_argument("--out", dest="output_dir", required=True, help="figure directory")
    parser.add_argument("--logy", action="store_true", help="log-scale the sample axis")
    args = parser.parse_args(argv)
    spec = PlotSpec(Path(args.input_csv), Path(args.output_dir), log_y=args.logy)
    written = render(spec)
    for path, reports in written.items():
        curves = ", ".join(f"{a}:{r.drawn}/{r.rows}" for a, r in sorted(reports.items()))
        print(f"{path} [{curves}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
