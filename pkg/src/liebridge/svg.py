"""Minimal SVG waterfall plot of a density flow (no plotting dependency)."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 720, 520
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 30, 50


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def waterfall_svg(angles, times, densities, rho0, rho1, xlabel: str, title: str = "") -> str:
    """Stack ``densities[k]`` vertically by time; overlay the two endpoint densities.

    ``angles`` must be increasing.  Returns the SVG document as text.
    """
    angles = np.asarray(angles, dtype=np.float64)
    densities = np.asarray(densities, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    n_t = densities.shape[0]

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    ymax = float(max(densities.max(), np.max(rho0), np.max(rho1)))
    offset = 0.6 * plot_h / max(n_t - 1, 1)
    amp = 0.4 * plot_h / ymax

    x0, x1 = angles[0], angles[-1]

    def px(a):
        return MARGIN_L + (a - x0) / (x1 - x0) * plot_w

    def py(k, v):
        return MARGIN_T + plot_h - k * offset - v * amp

    def polyline(k, values, style):
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(k, v))}" for a, v in zip(angles, values))
        return f'<polyline fill="none" {style} points="{pts}"/>'

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>')
    base = MARGIN_T + plot_h
    out.append(f'<line x1="{MARGIN_L}" y1="{base}" x2="{MARGIN_L + plot_w}" y2="{base}" stroke="black"/>')
    for a in np.linspace(x0, x1, 5):
        out.append(f'<line x1="{_fmt(px(a))}" y1="{base}" x2="{_fmt(px(a))}" y2="{base + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(px(a))}" y="{base + 18}" text-anchor="middle">{a:.2f}</text>')
    out.append(f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')

    for k in range(n_t):
        shade = int(200 - 160 * k / max(n_t - 1, 1))
        out.append(polyline(k, densities[k], f'stroke="rgb({shade},{shade},{255 - shade // 2})" stroke-width="1"'))
        if k in (0, n_t - 1) or k % 5 == 0:
            out.append(f'<text x="{MARGIN_L + plot_w + 6}" y="{_fmt(py(k, 0))}">t = {times[k]:.2f}</text>')
    out.append(polyline(0, rho0, 'stroke="green" stroke-width="2"'))
    out.append(polyline(n_t - 1, rho1, 'stroke="red" stroke-width="2" stroke-dasharray="6,4"'))

    lx, ly = MARGIN_L + plot_w + 10, MARGIN_T + 20
    out += [
        f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="green" stroke-width="2"/>',
        f'<text x="{lx + 30}" y="{ly + 4}">rho_0</text>',
        f'<line x1="{lx}" y1="{ly + 18}" x2="{lx + 25}" y2="{ly + 18}" stroke="red" stroke-width="2" stroke-dasharray="6,4"/>',
        f'<text x="{lx + 30}" y="{ly + 22}">rho_1</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"
