"""Figure rendering for pipeline and evaluation outputs.

Every delimited output the CLI produces can be accompanied by a rendered
figure next to it; these helpers do the drawing.  The Agg backend is forced
so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_metric_curves(
    series: dict[str, list[tuple[int, float]]],
    ylabel: str,
    path: str | Path,
    title: str | None = None,
) -> Path:
    """Plot one or more (K, value) series as marked line curves."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label in sorted(series):
        points = sorted(series[label])
        ks = [k for k, _ in points]
        vs = [v for _, v in points]
        ax.plot(ks, vs, marker="o", label=label)
    ax.set_xlabel("K")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_topic_score_bars(
    per_topic: dict[int, list],
    path: str | Path,
    top: int = 10,
) -> Path:
    """Horizontal bars of the top scored phrases, one panel per topic.

    Accepts the ranked ScoredKeyphrase lists straight from the ranker;
    filtered rows are skipped since their score is definitionally zero.
    """
    topics = sorted(per_topic)
    fig, axes = plt.subplots(
        len(topics), 1,
        figsize=(7.0, 0.45 * top * len(topics) + 1.0),
        squeeze=False,
    )
    for ax, topic in zip(axes[:, 0], topics):
        rows = [s for s in per_topic[topic] if not s.filtered][:top]
        labels = [s.surface for s in rows][::-1]
        scores = [s.score for s in rows][::-1]
        ax.barh(range(len(rows)), scores, color="#4878a8")
        ax.set_yticks(range(len(rows)))
        ax.set_yticklabels(labels, fontsize=8)
        ax.set_title(f"topic {topic}", fontsize=10)
        ax.set_xlabel("score")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
