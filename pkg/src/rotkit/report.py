"""Render figures from result files produced by the CLI.

Staircase plots (1-axis sweeps, with the enclosure band), tongue
heatmaps (2-axis sweeps), and residual-history plots (conjugation runs)
are written as PNG files next to the delimited data they came from.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import ValidationError

__all__ = ["render", "render_staircase", "render_tongues", "render_kam_history"]


def _read_rows(path: Path) -> list[dict]:
    rows = []
    with path.open() as fh:
        first = fh.readline()
        if not first.startswith("#"):
            fh.seek(0)
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(row)
    return rows


def render(input_path: str, kind: str = "auto", out_dir: str = ".") -> list[str]:
    """Dispatch on file content; returns the list of figures written."""
    path = Path(input_path)
    if not path.exists():
        raise ValidationError(f"report.input: no such file {input_path}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "auto":
        if path.suffix == ".json":
            kind = "kam"
        else:
            rows = _read_rows(path)
            has2 = any(r.get("x2") not in (None, "") for r in rows)
            kind = "tongues" if has2 else "staircase"
    if kind == "staircase":
        return [render_staircase(path, out)]
    if kind == "tongues":
        return [render_tongues(path, out)]
    if kind == "kam":
        return [render_kam_history(path, out)]
    raise ValidationError(f"report.kind: unknown kind {kind!r}")


def render_staircase(path: Path, out_dir: Path) -> str:
    rows = [r for r in _read_rows(path) if r.get("status") == "ok"]
    if not rows:
        raise ValidationError(f"report.input: no usable rows in {path}")
    x = np.array([float(r["x1"]) for r in rows])
    y = np.array([float(r["value"]) for r in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if rows[0].get("lo") not in (None, ""):
        lo = np.array([float(r["lo"]) for r in rows])
        hi = np.array([float(r["hi"]) for r in rows])
        ax.fill_between(x, lo, hi, alpha=0.3, lw=0, label="enclosure")
    ax.plot(x, y, lw=0.8)
    ax.set_xlabel(rows[0].get("x1_name") or "parameter")
    ax.set_ylabel("rotation number")
    ax.set_title(f"{rows[0].get('label', '')} staircase")
    fig.tight_layout()
    target = out_dir / f"{path.stem}_staircase.png"
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return str(target)


def render_tongues(path: Path, out_dir: Path) -> str:
    rows = _read_rows(path)
    ok = [r for r in rows if r.get("status") == "ok"]
    if not ok:
        raise ValidationError(f"report.input: no usable rows in {path}")
    x1 = sorted({float(r["x1"]) for r in ok})
    x2 = sorted({float(r["x2"]) for r in ok})
    grid = np.full((len(x2), len(x1)), np.nan)
    i1 = {v: i for i, v in enumerate(x1)}
    i2 = {v: i for i, v in enumerate(x2)}
    for r in ok:
        grid[i2[float(r["x2"])], i1[float(r["x1"])]] = float(r["value"])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    pc = ax.pcolormesh(x1, x2, grid, shading="nearest")
    fig.colorbar(pc, ax=ax, label="rotation number")
    ax.set_xlabel(ok[0].get("x1_name") or "axis 1")
    ax.set_ylabel(ok[0].get("x2_name") or "axis 2")
    ax.set_title("locking tongues")
    fig.tight_layout()
    target = out_dir / f"{path.stem}_tongues.png"
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return str(target)


def render_kam_history(path: Path, out_dir: Path) -> str:
    record = json.loads(Path(path).read_text())
    hist = record.get("residual_history", [])
    if not hist:
        raise ValidationError(f"report.input: no residual history in {path}")
    stages = [h["stage"] for h in hist]
    residuals = [max(h["residual"], 1e-300) for h in hist]
    means = [max(h["mean_abs"], 1e-300) for h in hist]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(stages, residuals, "o-", label="residual majorant")
    ax.semilogy(stages, means, "s--", label="|mean|")
    ax.axhline(record.get("defect", math.nan), color="k", lw=0.6, ls=":",
               label="final defect")
    ax.set_xlabel("stage")
    ax.set_ylabel("size")
    ax.set_title(f"conjugation run ({record.get('status', '?')})")
    ax.legend()
    fig.tight_layout()
    target = out_dir / f"{Path(path).stem}_history.png"
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return str(target)
