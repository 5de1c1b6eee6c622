"""Static SVG line charts of MAE per round.

Output depends only on the input series, so identical reports give
byte-identical charts.
"""

from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=70, right=190, top=30, bottom=60)


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / n
    return [lo + k * step for k in range(n + 1)]


def line_chart(series, title="MAE per elicitation round", xlabel="iteration", ylabel="MAE"):
    """SVG text for ``{name: [(x, y), ...]}``, one polyline per name."""
    points = [p for pts in series.values() for p in pts]
    if not points:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad = (y1 - y0) * 0.05 or 0.05
    y0, y1 = y0 - pad, y1 + pad
    plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
    plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (0.5 if x1 == x0 else (x - x0) / (x1 - x0)) * plot_w

    def sy(y):
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    left, bottom = MARGIN["left"], MARGIN["top"] + plot_h
    out.append(f'<g class="axes" stroke="black" fill="none">'
               f'<line x1="{left}" y1="{MARGIN["top"]}" x2="{left}" y2="{bottom}"/>'
               f'<line x1="{left}" y1="{bottom}" x2="{left + plot_w}" y2="{bottom}"/></g>')

    xticks = sorted(set(xs))
    if len(xticks) > 13:
        stride = -(-len(xticks) // 12)
        xticks = xticks[::stride]
    for x in xticks:
        out.append(f'<line x1="{sx(x):.2f}" y1="{bottom}" x2="{sx(x):.2f}" y2="{bottom + 5}" stroke="black"/>'
                   f'<text x="{sx(x):.2f}" y="{bottom + 18}" text-anchor="middle">{x:g}</text>')
    for y in _ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{sy(y):.2f}" x2="{left}" y2="{sy(y):.2f}" stroke="black"/>'
                   f'<text x="{left - 8}" y="{sy(y) + 4:.2f}" text-anchor="end">{y:.3f}</text>')
    out.append(f'<text class="xlabel" x="{left + plot_w / 2:.1f}" y="{HEIGHT - 18}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text class="ylabel" x="18" y="{MARGIN["top"] + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN["top"] + plot_h / 2:.1f})">{escape(ylabel)}</text>')

    for n, (name, pts) in enumerate(series.items()):
        color = PALETTE[n % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in sorted(pts))
        out.append(f'<polyline data-series="{escape(name)}" fill="none" stroke="{color}" '
                   f'stroke-width="2" points="{coords}"/>')
        ly = MARGIN["top"] + 10 + 20 * n
        lx = WIDTH - MARGIN["right"] + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
                   f'<text x="{lx + 30}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
