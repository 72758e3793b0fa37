"""Rendering of chain statistics as markdown, CSV or JSON, plus figures."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .chain import STATS_COLUMNS, TIMING_COLUMNS, ChainManifest, stats_table

__all__ = ["FORMATS", "TIMING_MARKER", "render_stats", "render_report", "write_figures"]

FORMATS = ("markdown", "csv", "json")
TIMING_MARKER = "# timings (machine-dependent)"

_PIECE_COLUMNS = ("pieces", "endgames", "valid", "term_pct", "capt_pct", "quiet_pct")


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def _markdown(rows, columns) -> str:
    out = ["| " + " | ".join(columns) + " |", "|" + "|".join("---" for _ in columns) + "|"]
    for r in rows:
        out.append("| " + " | ".join(_cell(r[c]) for c in columns) + " |")
    return "\n".join(out) + "\n"


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: r[c] for c in columns})
    return buf.getvalue()


def _section(title, rows, columns, fmt) -> str:
    if fmt == "markdown":
        return f"## {title}\n\n" + _markdown(rows, columns)
    return f"# {title}\n" + _csv(rows, columns)


def render_stats(manifest: ChainManifest, fmt: str = "markdown", timings: bool = True) -> str:
    """Per-endgame table and per-piece-count capture fractions.

    Everything before :data:`TIMING_MARKER` depends only on the tables;
    the timing section after it does not.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
    st = stats_table(manifest)
    if fmt == "json":
        fixed = {"endgames": st["endgames"], "by_piece_count": st["by_piece_count"]}
        text = json.dumps(fixed, indent=2, sort_keys=True) + "\n"
        if timings:
            text += TIMING_MARKER + "\n" + json.dumps(st["timings"], indent=2, sort_keys=True) + "\n"
        return text
    parts = [
        _section("endgames", st["endgames"], STATS_COLUMNS, fmt),
        _section("capture fraction by piece count", st["by_piece_count"], _PIECE_COLUMNS, fmt),
    ]
    if timings:
        parts.append(TIMING_MARKER + "\n" + (
            _markdown(st["timings"], TIMING_COLUMNS) if fmt == "markdown"
            else _csv(st["timings"], TIMING_COLUMNS)))
    return "\n".join(parts)


def render_report(manifest: ChainManifest, fmt: str = "markdown", figure_paths=()) -> str:
    text = render_stats(manifest, fmt)
    if figure_paths and fmt != "json":
        lead = "## figures\n\n" if fmt == "markdown" else "# figures\n"
        text += "\n" + lead + "".join(f"{p}\n" for p in figure_paths)
    return text


def write_figures(manifest: ChainManifest, out_dir) -> list:
    """Category-fraction and timing charts as PNG files in ``out_dir``."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    st = stats_table(manifest)
    rows = [r for r in st["endgames"] if r["valid"]]
    names = [r["endgame"] for r in rows]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(names) + 1.5), 3.2))
    x = range(len(names))
    bottom = [0.0] * len(names)
    for key, label, color in (("term_pct", "terminal", "#444444"),
                              ("capt_pct", "capture", "#d1495b"),
                              ("quiet_pct", "quiet", "#8fb8de")):
        vals = [r[key] for r in rows]
        ax.bar(x, vals, bottom=bottom, label=label, color=color, width=0.7)
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("% of valid positions")
    ax.set_ylim(0, 100)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    p = out_dir / "category_fractions.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    timing = [t for t in st["timings"] if t["endgame"] in names]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(names) + 1.5), 3.2))
    w = 0.27
    for off, key, label in ((-w, "t_gen", "generation"),
                            (0.0, "t_verify_decomposed", "decomposed verify"),
                            (w, "t_verify_full", "full verify")):
        ax.bar([i + off for i in x], [max(t[key], 1e-3) for t in timing], width=w, label=label)
    ax.set_yscale("log")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("wall time (s)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = out_dir / "timings.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)
    return paths
