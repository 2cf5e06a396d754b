"""Deterministic SVG renderers for the figure data.

Static line charts and cell-per-value heatmaps, built by plain string
formatting with fixed precision so identical inputs produce identical bytes.
"""

import numpy as np

_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x + 0.0:.2f}"


def _header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def line_chart(series, title: str = "", x_label: str = "", y_label: str = "",
               width: int = 640, height: int = 420,
               y_min: float | None = None, y_max: float | None = None) -> str:
    """Render labeled (xs, ys) series as polylines with simple axes.

    series: iterable of (label, xs, ys).
    """
    series = [(label, np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
              for label, xs, ys in series]
    pad_l, pad_r, pad_t, pad_b = 60, 20, 34, 46
    plot_w, plot_h = width - pad_l - pad_r, height - pad_t - pad_b

    xs_all = np.concatenate([xs for _, xs, _ in series]) if series else np.array([0.0, 1.0])
    ys_all = np.concatenate([ys for _, _, ys in series]) if series else np.array([0.0, 1.0])
    ys_all = ys_all[np.isfinite(ys_all)]
    if ys_all.size == 0:
        ys_all = np.array([0.0, 1.0])
    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    y_lo = float(ys_all.min()) if y_min is None else y_min
    y_hi = float(ys_all.max()) if y_max is None else y_max
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return pad_l + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return pad_t + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h

    out = _header(width, height)
    if title:
        out.append(f'<text x="{width // 2}" y="20" font-size="14" '
                   f'text-anchor="middle" font-family="sans-serif">{title}</text>')
    out.append(f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" '
               f'y2="{pad_t + plot_h}" stroke="black"/>')
    out.append(f'<line x1="{pad_l}" y1="{pad_t + plot_h}" '
               f'x2="{pad_l + plot_w}" y2="{pad_t + plot_h}" stroke="black"/>')
    for tx in _ticks(x_lo, x_hi):
        out.append(f'<text x="{_fmt(px(tx))}" y="{pad_t + plot_h + 16}" font-size="10" '
                   f'text-anchor="middle" font-family="sans-serif">{tx:.3g}</text>')
    for ty in _ticks(y_lo, y_hi):
        out.append(f'<text x="{pad_l - 6}" y="{_fmt(py(ty) + 3)}" font-size="10" '
                   f'text-anchor="end" font-family="sans-serif">{ty:.3g}</text>')
    if x_label:
        out.append(f'<text x="{width // 2}" y="{height - 8}" font-size="12" '
                   f'text-anchor="middle" font-family="sans-serif">{x_label}</text>')
    if y_label:
        out.append(f'<text x="14" y="{height // 2}" font-size="12" text-anchor="middle" '
                   f'font-family="sans-serif" transform="rotate(-90 14 {height // 2})">'
                   f'{y_label}</text>')

    for i, (label, xs, ys) in enumerate(series):
        color = _SERIES_COLORS[i % len(_SERIES_COLORS)]
        keep = np.isfinite(ys)
        points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}"
                          for x, y in zip(xs[keep], ys[keep]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{points}"/>')
        ly = pad_t + 14 + 14 * i
        out.append(f'<line x1="{pad_l + plot_w - 110}" y1="{ly - 4}" '
                   f'x2="{pad_l + plot_w - 86}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        out.append(f'<text x="{pad_l + plot_w - 80}" y="{ly}" font-size="10" '
                   f'font-family="sans-serif">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _sequential_color(t: float) -> str:
    # white -> deep blue
    r = int(round(255 + t * (8 - 255)))
    g = int(round(255 + t * (48 - 255)))
    b = int(round(255 + t * (107 - 255)))
    return f"#{r:02x}{g:02x}{b:02x}"


def _diverging_color(t: float) -> str:
    # blue -> white -> red over t in [0, 1], center 0.5
    if t < 0.5:
        s = t / 0.5
        r = int(round(33 + s * (255 - 33)))
        g = int(round(102 + s * (255 - 102)))
        b = int(round(172 + s * (255 - 172)))
    else:
        s = (t - 0.5) / 0.5
        r = int(round(255 + s * (178 - 255)))
        g = int(round(255 + s * (24 - 255)))
        b = int(round(255 + s * (43 - 255)))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(matrix, title: str = "", x_label: str = "", y_label: str = "",
            diverging: bool = False, width: int = 640, height: int = 480) -> str:
    """Render a matrix as one rect per cell; rows are drawn top to bottom."""
    m = np.asarray(matrix, dtype=float)
    rows, cols = m.shape
    pad_l, pad_r, pad_t, pad_b = 60, 20, 34, 46
    plot_w, plot_h = width - pad_l - pad_r, height - pad_t - pad_b
    cw, ch = plot_w / cols, plot_h / rows

    if diverging:
        v = float(np.abs(m).max()) or 1.0
        lo, hi = -v, v
        colorize = _diverging_color
    else:
        lo, hi = float(m.min()), float(m.max())
        if hi == lo:
            hi = lo + 1.0
        colorize = _sequential_color

    out = _header(width, height)
    if title:
        out.append(f'<text x="{width // 2}" y="20" font-size="14" '
                   f'text-anchor="middle" font-family="sans-serif">{title}</text>')
    for i in range(rows):
        for j in range(cols):
            t = (m[i, j] - lo) / (hi - lo)
            t = min(1.0, max(0.0, t))
            out.append(f'<rect x="{_fmt(pad_l + j * cw)}" y="{_fmt(pad_t + i * ch)}" '
                       f'width="{_fmt(cw)}" height="{_fmt(ch)}" '
                       f'fill="{colorize(t)}"/>')
    if x_label:
        out.append(f'<text x="{width // 2}" y="{height - 8}" font-size="12" '
                   f'text-anchor="middle" font-family="sans-serif">{x_label}</text>')
    if y_label:
        out.append(f'<text x="14" y="{height // 2}" font-size="12" text-anchor="middle" '
                   f'font-family="sans-serif" transform="rotate(-90 14 {height // 2})">'
                   f'{y_label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
