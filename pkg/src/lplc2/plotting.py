"""Response figure rendered next to the delimited outputs."""
from __future__ import annotations

from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_responses(series: Dict[int, List[tuple]], path, title: str = "") -> Path:
    """One line per attention field: response against frame index."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 3.5), dpi=100)
    for af_id, rows in sorted(series.items()):
        frames = [r[0] for r in rows]
        values = [r[1] for r in rows]
        ax.plot(frames, values, lw=1.2, label=f"AF {af_id}")
    ax.set_xlabel("frame")
    ax.set_ylabel("response")
    if title:
        ax.set_title(title)
    if len(series) <= 12:
        ax.legend(loc="upper right", fontsize=8, frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    # fixed metadata keeps the file byte-stable across runs
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path
