"""Minimal deterministic SVG charts for the report bundle.

Hand-rolled rather than delegated to a plotting library so that identical
inputs produce byte-identical files (no timestamps, no session ids), which
the reproducibility contract requires.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["scatter_svg", "bar_svg"]

_W, _H = 640, 480
_MARGIN = 60


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def scatter_svg(
    points: list[tuple[float, float, bool]],
    title: str,
    xlabel: str,
    ylabel: str,
    lo: float = 0.0,
    hi: float = 100.0,
) -> str:
    """Scatter plot on a fixed square range; flagged points drawn amber.

    Flagged points mark ensembles whose dementia-class F1 is zero.
    """
    span = hi - lo
    inner_w = _W - 2 * _MARGIN
    inner_h = _H - 2 * _MARGIN

    def sx(v: float) -> float:
        return _MARGIN + (v - lo) / span * inner_w

    def sy(v: float) -> float:
        return _H - _MARGIN - (v - lo) / span * inner_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{title}</text>',
    ]
    for tick in range(int(lo), int(hi) + 1, 20):
        x, y = sx(tick), sy(tick)
        parts.append(
            f'<line x1="{x:.1f}" y1="{_H - _MARGIN}" x2="{x:.1f}" y2="{_MARGIN}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{_MARGIN}" y1="{y:.1f}" x2="{_W - _MARGIN}" y2="{y:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{_H - _MARGIN + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tick}</text>'
        )
        parts.append(
            f'<text x="{_MARGIN - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick}</text>'
        )
    parts.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{inner_w}" height="{inner_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    # Draw unflagged points first so the flagged (zero dementia F1) ones sit on top.
    for flagged_pass in (False, True):
        color = "#d4a017" if flagged_pass else "#4477aa"
        for x, y, flagged in points:
            if flagged == flagged_pass:
                parts.append(
                    f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}" '
                    f'fill-opacity="0.75"/>'
                )
    parts.append(
        f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_H / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 18 {_H / 2:.1f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_svg(labels: list[str], values: list[float], title: str, ylabel: str) -> str:
    """Bar chart with a fixed [0, 1] range, one bar per system."""
    inner_w = _W - 2 * _MARGIN
    inner_h = _H - 2 * _MARGIN
    n = max(len(labels), 1)
    slot = inner_w / n
    bar_w = slot * 0.7

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{title}</text>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = _H - _MARGIN - tick * inner_h
        parts.append(
            f'<line x1="{_MARGIN}" y1="{y:.1f}" x2="{_W - _MARGIN}" y2="{y:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(tick)}</text>'
        )
    for i, (label, value) in enumerate(zip(labels, values)):
        x = _MARGIN + i * slot + (slot - bar_w) / 2
        h = max(0.0, min(value, 1.0)) * inner_h
        y = _H - _MARGIN - h
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" height="{h:.2f}" fill="#4477aa"/>'
        )
        cx = x + bar_w / 2
        parts.append(
            f'<text x="{cx:.2f}" y="{_H - _MARGIN + 12}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" '
            f'transform="rotate(-40 {cx:.2f} {_H - _MARGIN + 12})">{label}</text>'
        )
    parts.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{inner_w}" height="{inner_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="18" y="{_H / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 18 {_H / 2:.1f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: Path | str, content: str) -> None:
    Path(path).write_text(content, encoding="utf-8")
