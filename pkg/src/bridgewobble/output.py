"""CSV/JSON writers and dependency-free SVG rendering."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
REGION_COLORS = {
    "D1": "#cfe8cf",
    "D2": "#cfdff2",
    "D3": "#f6d5d5",
    "C1": "#555555",
    "C2": "#222222",
    "I": "#e8e8e8",
    "II": "#cfe8cf",
    "III": "#cfdff2",
    "IV": "#f6d5d5",
    "V": "#f3e3c3",
    "VI": "#e0d3ef",
}


def fmt(value) -> str:
    """Round-trip formatting: 17 significant digits for floats."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path: Path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def dumps(data) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=True)


# --- SVG ------------------------------------------------------------------------------


class _Frame:
    def __init__(self, xlim, ylim, width=640, height=480, margin=60):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0
        self.w, self.h, self.m = width, height, margin

    def px(self, x):
        return self.m + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2 * self.m)

    def py(self, y):
        return self.h - self.m - (y - self.y0) / (self.y1 - self.y0) * (self.h - 2 * self.m)


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str) -> list[str]:
    out = [
        f'<rect x="{fr.m}" y="{fr.m}" width="{fr.w - 2 * fr.m}" height="{fr.h - 2 * fr.m}" '
        'fill="none" stroke="black"/>',
        f'<text x="{fr.w / 2}" y="{fr.m / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{fr.w / 2}" y="{fr.h - 15}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{fr.h / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {fr.h / 2})">{escape(ylabel)}</text>',
    ]
    for v in np.linspace(fr.x0, fr.x1, 5):
        out.append(f'<text x="{fr.px(v):.2f}" y="{fr.h - fr.m + 15}" text-anchor="middle" font-size="10">{v:.3g}</text>')
    for v in np.linspace(fr.y0, fr.y1, 5):
        out.append(f'<text x="{fr.m - 5}" y="{fr.py(v) + 3:.2f}" text-anchor="end" font-size="10">{v:.3g}</text>')
    return out


def _wrap(fr: _Frame, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.w}" height="{fr.h}" '
        f'viewBox="0 0 {fr.w} {fr.h}" font-family="sans-serif">'
    )
    return "\n".join([head, f'<rect width="{fr.w}" height="{fr.h}" fill="white"/>', *body, "</svg>"]) + "\n"


def svg_lines(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    markers: Optional[Sequence[tuple[float, float]]] = None,
    xlim=None,
    ylim=None,
) -> str:
    """Polylines for ``(label, x, y)`` series; NaNs split a line."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.array([0.0, 1.0])
    ys = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.array([0.0, 1.0])
    ok = np.isfinite(xs) & np.isfinite(ys)
    xlim = xlim or (float(np.min(xs[ok])), float(np.max(xs[ok])))
    ylim = ylim or (float(np.min(ys[ok])), float(np.max(ys[ok])))
    fr = _Frame(xlim, ylim)
    body = _axes(fr, title, xlabel, ylabel)
    for n, (label, x, y) in enumerate(series):
        color = PALETTE[n % len(PALETTE)]
        seg: list[str] = []
        for xv, yv in zip(x, y):
            inside = math.isfinite(xv) and math.isfinite(yv) and ylim[0] <= yv <= ylim[1]
            if inside:
                seg.append(f"{fr.px(xv):.2f},{fr.py(yv):.2f}")
            elif seg:
                body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{" ".join(seg)}"/>')
                seg = []
        if seg:
            body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{" ".join(seg)}"/>')
        body.append(
            f'<text x="{fr.w - fr.m + 5}" y="{fr.m + 12 * (n + 1)}" font-size="9" fill="{color}">{escape(label)}</text>'
        )
    for mx, my in markers or ():
        body.append(f'<circle cx="{fr.px(mx):.2f}" cy="{fr.py(my):.2f}" r="3" fill="black"/>')
    return _wrap(fr, body)


def svg_region_map(
    xs: Sequence[float],
    ys: Sequence[float],
    labels: Sequence[Sequence[str]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    curves: Sequence[tuple[str, Sequence[float], Sequence[float]]] = (),
) -> str:
    """Shaded cells ``labels[i][j]`` at ``(xs[j], ys[i])`` with optional boundary curves."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    dx = (xs[-1] - xs[0]) / max(len(xs) - 1, 1)
    dy = (ys[-1] - ys[0]) / max(len(ys) - 1, 1)
    fr = _Frame((xs[0] - dx / 2, xs[-1] + dx / 2), (ys[0] - dy / 2, ys[-1] + dy / 2))
    body = []
    cw = abs(fr.px(xs[0] + dx) - fr.px(xs[0])) + 0.5
    ch = abs(fr.py(ys[0] + dy) - fr.py(ys[0])) + 0.5
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            color = REGION_COLORS.get(labels[i][j], "#ffffff")
            body.append(
                f'<rect x="{fr.px(x - dx / 2):.2f}" y="{fr.py(y + dy / 2):.2f}" '
                f'width="{cw:.2f}" height="{ch:.2f}" fill="{color}" stroke="none"/>'
            )
    for n, (label, cx, cy) in enumerate(curves):
        pts = " ".join(
            f"{fr.px(a):.2f},{fr.py(b):.2f}"
            for a, b in zip(cx, cy)
            if math.isfinite(a) and math.isfinite(b) and fr.y0 <= b <= fr.y1 and fr.x0 <= a <= fr.x1
        )
        if pts:
            body.append(f'<polyline fill="none" stroke="black" stroke-width="1.5" points="{pts}"/>')
            body.append(f'<text x="{fr.w - fr.m + 5}" y="{fr.m + 12 * (n + 1)}" font-size="9">{escape(label)}</text>')
    present = sorted({lab for row in labels for lab in row})
    for n, lab in enumerate(present):
        y = fr.h - fr.m - 12 * n
        body.append(f'<rect x="{fr.w - fr.m + 5}" y="{y - 8}" width="8" height="8" fill="{REGION_COLORS.get(lab, "#fff")}"/>')
        body.append(f'<text x="{fr.w - fr.m + 16}" y="{y}" font-size="9">{escape(lab)}</text>')
    body.extend(_axes(fr, title, xlabel, ylabel))
    return _wrap(fr, body)


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
