"""Figure rendering for CLI runs.

Charts are a convenience layer over the delimited output: the same
result rows, drawn with their error bars so a verdict can be eyeballed.
Everything goes through the Agg backend; nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["render_results", "render_points"]


def render_results(payload: dict, path: str) -> None:
    """Error-bar chart of the result rows, one marker per named value."""
    rows = payload.get("results", [])
    if not rows:
        raise ValueError("payload has no result rows to draw")
    names = [row["name"] for row in rows]
    values = np.array([row["value"] for row in rows], dtype=float)
    errors = np.array([row.get("stderr", 0.0) for row in rows], dtype=float)
    width = max(6.0, 0.55 * len(rows) + 2.0)
    fig, ax = plt.subplots(figsize=(width, 4.2))
    x = np.arange(len(rows))
    ax.errorbar(x, values, yerr=3.0 * errors, fmt="o", capsize=3,
                markersize=4)
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("value (3 sigma bars)")
    title = payload.get("command", "results")
    verdict = payload.get("verdict")
    if verdict is not None:
        title = f"{title}: {verdict} (margin {payload.get('margin', 0):.2f})"
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_points(points: np.ndarray, path: str) -> None:
    """Scatter of the first two coordinates (histogram when 1-d)."""
    points = np.asarray(points, dtype=float)
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    if points.ndim == 1 or points.shape[1] == 1:
        ax.hist(points.ravel(), bins=80, density=True)
        ax.set_xlabel("x1")
    else:
        n_shown = min(len(points), 20_000)
        ax.plot(points[:n_shown, 0], points[:n_shown, 1], ".", markersize=1,
                alpha=0.4)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_aspect("equal")
    ax.set_title(f"{len(points)} draws")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
