"""Minimal SVG line and step plots for inspecting traces."""

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 300
MARGIN = (60, 20, 30, 40)     # left, right, top, bottom
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
          "#e377c2", "#7f7f7f"]


def _range(values, log):
    vals = [v for v in values if math.isfinite(v) and (v > 0 or not log)]
    if not vals:
        return (0.0, 1.0)
    lo, hi = min(vals), max(vals)
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


class _Frame:
    def __init__(self, xs, ys, log):
        self.log = log
        self.x0, self.x1 = _range(xs, False)
        self.y0, self.y1 = _range(ys, log)
        left, right, top, bottom = MARGIN
        self.px0, self.px1 = left, WIDTH - right
        self.py0, self.py1 = HEIGHT - bottom, top

    def x(self, v):
        return self.px0 + (v - self.x0) / (self.x1 - self.x0) * (self.px1 - self.px0)

    def y(self, v):
        if self.log:
            v = math.log10(v)
        return self.py0 + (v - self.y0) / (self.y1 - self.y0) * (self.py1 - self.py0)

    def axes(self, title, ylabel):
        out = [f'<rect x="{self.px0}" y="{self.py1}" width="{self.px1 - self.px0}" '
               f'height="{self.py0 - self.py1}" fill="none" stroke="#444"/>',
               f'<text x="{WIDTH / 2}" y="16" text-anchor="middle" font-size="13">'
               f'{escape(title)}</text>',
               f'<text x="{WIDTH / 2}" y="{HEIGHT - 6}" text-anchor="middle" '
               f'font-size="11">t [s]</text>']
        for v in (self.x0, self.x1):
            out.append(f'<text x="{self.x(v):.1f}" y="{self.py0 + 14}" text-anchor="middle" '
                       f'font-size="10">{v:.3g}</text>')
        for v in (self.y0, self.y1):
            label = f"1e{v:.1f}" if self.log else f"{v:.3g}"
            py = self.py0 + (v - self.y0) / (self.y1 - self.y0) * (self.py1 - self.py0)
            out.append(f'<text x="{self.px0 - 4}" y="{py + 4:.1f}" text-anchor="end" '
                       f'font-size="10">{label}</text>')
        out.append(f'<text x="12" y="{HEIGHT / 2}" font-size="11" '
                   f'transform="rotate(-90 12 {HEIGHT / 2})" text-anchor="middle">'
                   f'{escape(ylabel)}</text>')
        return out


def _document(body):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n' + "\n".join(body) + "\n</svg>\n")


def _legend(labels):
    out = []
    for i, label in enumerate(labels):
        y = MARGIN[2] + 12 + 14 * i
        c = COLORS[i % len(COLORS)]
        out.append(f'<line x1="{WIDTH - 130}" y1="{y - 4}" x2="{WIDTH - 112}" y2="{y - 4}" '
                   f'stroke="{c}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - 108}" y="{y}" font-size="10">{escape(label)}</text>')
    return out


def _polyline(frame, xs, ys, color, step):
    pts = []
    prev = None
    for x, y in zip(xs, ys):
        if not math.isfinite(y) or (frame.log and y <= 0):
            prev = None
            continue
        if step and prev is not None:
            pts.append(f"{frame.x(x):.2f},{frame.y(prev):.2f}")
        pts.append(f"{frame.x(x):.2f},{frame.y(y):.2f}")
        prev = y
    if not pts:
        return ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
            f'points="{" ".join(pts)}"/>')


def line_plot(xs, series, title, ylabel="", log=False, step=False, bands=()):
    """SVG text for ``series = [(label, ys), ...]`` over a shared x axis.

    ``bands`` are (start, end) x intervals shaded in the background.
    """
    xs = list(xs)
    frame = _Frame(xs, [v for _, ys in series for v in ys], log)
    body = []
    for a, b in bands:
        a, b = max(a, frame.x0), min(b, frame.x1)
        if b > a:
            body.append(f'<rect x="{frame.x(a):.2f}" y="{frame.py1}" '
                        f'width="{frame.x(b) - frame.x(a):.2f}" height="{frame.py0 - frame.py1}" '
                        f'fill="#f4c7c3" fill-opacity="0.6"/>')
    body += frame.axes(title, ylabel)
    for i, (_, ys) in enumerate(series):
        body.append(_polyline(frame, xs, list(ys), COLORS[i % len(COLORS)], step))
    body += _legend([label for label, _ in series])
    return _document(body)
