# Copyright 2022 InstaDeep Ltd. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Static SVG charts: scatter plots of fronts and polylines of hypervolume traces."""
from typing import List, NamedTuple, Sequence, Tuple
from xml.sax.saxutils import escape

PANEL_SIZE = (720, 480)
MARGIN = (70, 30, 40, 60)  # left, right, top, bottom
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


class Series(NamedTuple):
    label: str
    xs: Sequence[float]
    ys: Sequence[float]


def _bounds(series: Sequence[Series]) -> Tuple[float, float, float, float]:
    xs = [x for s in series for x in s.xs] or [0.0, 1.0]
    ys = [y for s in series for y in s.ys] or [0.0, 1.0]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 <= x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    return x0, x1, y0, y1


def render_chart(
    series: Sequence[Series],
    title: str,
    x_label: str,
    y_label: str,
    lines: bool = False,
) -> str:
    """SVG text for one panel. Points are drawn as dots, or joined when `lines` is set."""
    width, height = PANEL_SIZE
    left, right, top, bottom = MARGIN
    x0, x1, y0, y1 = _bounds(series)

    def px(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def py(y: float) -> float:
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    out: List[str] = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="16">'
        f"{escape(title)}</text>",
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" '
        'stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" font-size="13">'
        f"{escape(x_label)}</text>",
        f'<text x="18" y="{height / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {height / 2:.1f})">{escape(y_label)}</text>',
    ]
    for tick in range(5):
        xv = x0 + (x1 - x0) * tick / 4
        yv = y0 + (y1 - y0) * tick / 4
        out.append(
            f'<text x="{px(xv):.1f}" y="{height - bottom + 16}" text-anchor="middle" '
            f'font-size="11">{xv:.3g}</text>'
        )
        out.append(
            f'<text x="{left - 6}" y="{py(yv) + 4:.1f}" text-anchor="end" '
            f'font-size="11">{yv:.3g}</text>'
        )

    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        points = [(px(x), py(y)) for x, y in zip(s.xs, s.ys)]
        if lines and points:
            coords = " ".join(f"{x:.1f},{y:.1f}" for x, y in points)
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                'stroke-width="1.5"/>'
            )
        else:
            out.extend(
                f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="{color}"/>' for x, y in points
            )
        legend_y = top + 14 * (k + 1)
        out.append(
            f'<rect x="{width - right - 150}" y="{legend_y - 9}" width="10" height="10" '
            f'fill="{color}"/>'
        )
        out.append(
            f'<text x="{width - right - 135}" y="{legend_y}" font-size="11">'
            f"{escape(s.label)}</text>"
        )
    out.append("</svg>")
    return "\n".join(out)


def write_chart(
    path: str,
    series: Sequence[Series],
    title: str,
    x_label: str,
    y_label: str,
    lines: bool = False,
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(render_chart(series, title, x_label, y_label, lines))
