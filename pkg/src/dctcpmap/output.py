"""Deterministic CSV and a small dependency-free SVG plotter."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape


def fmt(value) -> str:
    """Fixed text form: 17 significant digits for reals, plain ints, 1/0 for flags."""
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    # newline="" keeps LF on every platform
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))


WIDTH, HEIGHT = 640, 480
MARGIN = 60


class _Frame:
    def __init__(self, xs: Sequence[float], ys: Sequence[float], square: bool = False):
        x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
        y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
        if square:
            x0 = y0 = min(x0, y0)
            x1 = y1 = max(x1, y1)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1

    def px(self, x: float) -> float:
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def py(self, y: float) -> float:
        return HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)


def _n(v: float) -> str:
    return f"{v:.2f}"


def render_svg(
    *,
    title: str,
    xlabel: str,
    ylabel: str,
    points: Sequence[tuple[float, float]] = (),
    polyline: Sequence[tuple[float, float]] = (),
    segments: Sequence[tuple[tuple[float, float], tuple[float, float]]] = (),
    diagonal: bool = False,
) -> str:
    xs = [p[0] for p in points] + [p[0] for p in polyline]
    ys = [p[1] for p in points] + [p[1] for p in polyline]
    for a, b in segments:
        xs += [a[0], b[0]]
        ys += [a[1], b[1]]
    fr = _Frame(xs, ys, square=diagonal)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
        f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]
    for label, x, anchor in ((fr.x0, MARGIN, "start"), (fr.x1, WIDTH - MARGIN, "end")):
        out.append(f'<text x="{x}" y="{HEIGHT - MARGIN + 15}" text-anchor="{anchor}" '
                   f'font-family="sans-serif" font-size="10">{label:.6g}</text>')
    for label, y in ((fr.y0, HEIGHT - MARGIN), (fr.y1, MARGIN + 10)):
        out.append(f'<text x="{MARGIN - 4}" y="{y}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="10">{label:.6g}</text>')
    if diagonal:
        out.append(f'<line x1="{_n(fr.px(fr.x0))}" y1="{_n(fr.py(fr.x0))}" '
                   f'x2="{_n(fr.px(fr.x1))}" y2="{_n(fr.py(fr.x1))}" stroke="gray" '
                   f'stroke-dasharray="4 3"/>')
    if polyline:
        pts = " ".join(f"{_n(fr.px(x))},{_n(fr.py(y))}" for x, y in polyline)
        out.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1"/>')
    for (xa, ya), (xb, yb) in segments:
        out.append(f'<line x1="{_n(fr.px(xa))}" y1="{_n(fr.py(ya))}" x2="{_n(fr.px(xb))}" '
                   f'y2="{_n(fr.py(yb))}" stroke="firebrick" stroke-width="0.8"/>')
    for x, y in points:
        out.append(f'<circle cx="{_n(fr.px(x))}" cy="{_n(fr.py(y))}" r="0.8" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str | Path, **kwargs) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_svg(**kwargs))
