"""SVG heatmaps of RSMs and RDMs.

Output is plain SVG 1.1 text built from fixed-precision numbers, so the
same matrix and options always give byte-identical documents.
"""

import colorsys
from xml.sax.saxutils import escape

import numpy as np

from .pipeline import Rdm, Rsm

# viridis sampled at 0, .25, .5, .75, 1
VIRIDIS = ((0x44, 0x01, 0x54), (0x3B, 0x52, 0x8B), (0x21, 0x91, 0x8C), (0x5E, 0xC9, 0x62), (0xFD, 0xE7, 0x25))

CELL = 36
SWATCH = 14
GAP = 4
LEGEND_STEPS = 32


def colormap(t, anchors=VIRIDIS):
    """Hex color for ``t`` in [0, 1], linear between anchor colors."""
    t = min(max(float(t), 0.0), 1.0)
    pos = t * (len(anchors) - 1)
    i = min(int(pos), len(anchors) - 2)
    f = pos - i
    rgb = [round(a + (b - a) * f) for a, b in zip(anchors[i], anchors[i + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def hsv_hex(hue_deg, sat=1.0, val=1.0):
    r, g, b = colorsys.hsv_to_rgb((hue_deg % 360.0) / 360.0, sat, val)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


def _num(x):
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_heatmap(matrix, stimuli=None, title=None, vmin=None, vmax=None):
    """Render an :class:`Rsm` or :class:`Rdm` as an SVG document string.

    Parameters
    ----------
    matrix : Rsm or Rdm
    stimuli : StimulusSet, optional
        Supplies hue/saturation/value for the color swatches along both
        axes. Without it the swatches are grey.
    title : str, optional
        Defaults to "RSM" or "RDM".
    vmin, vmax : float, optional
        Color scale limits; default to [-1, 1] for an RSM and [0, 2] for
        an RDM.

    Every matrix entry is drawn as one ``<rect class="cell">``.
    """
    is_rdm = isinstance(matrix, Rdm)
    if not isinstance(matrix, (Rsm, Rdm)):
        raise TypeError("render_heatmap expects an Rsm or Rdm")
    if vmin is None:
        vmin = 0.0 if is_rdm else -1.0
    if vmax is None:
        vmax = 2.0 if is_rdm else 1.0
    if title is None:
        title = "RDM" if is_rdm else "RSM"
    values = np.asarray(matrix.values)
    n = matrix.n
    ids = matrix.stimulus_ids

    swatch_colors = ["#bbbbbb"] * n
    if stimuli is not None:
        by_id = {s.id: s for s in stimuli.stimuli}
        for i, sid in enumerate(ids):
            s = by_id.get(sid)
            if s is not None:
                swatch_colors[i] = hsv_hex(s.hue_deg, s.sat, s.val)

    left = 20 + SWATCH + GAP
    top = 40 + SWATCH + GAP
    grid = n * CELL
    legend_x = left + grid + 24
    legend_h = grid
    width = legend_x + 16 + 56
    height = top + grid + 20

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{escape(title)}</title>',
        f'<text class="title" x="{_num(width / 2)}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{escape(title)}</text>',
        '<g class="cells">',
    ]
    span = vmax - vmin
    for i in range(n):
        for j in range(n):
            v = float(values[i, j])
            t = (v - vmin) / span if span > 0 else 0.5
            out.append(
                f'<rect class="cell" x="{left + j * CELL}" y="{top + i * CELL}" width="{CELL}" '
                f'height="{CELL}" fill="{colormap(t)}"><title>{escape(ids[i])} / {escape(ids[j])}: '
                f'{v:.3f}</title></rect>'
            )
    out.append("</g>")

    out.append('<g class="swatches">')
    for k, (sid, color) in enumerate(zip(ids, swatch_colors)):
        c = left + k * CELL + (CELL - SWATCH) // 2
        label = escape(sid)
        out.append(
            f'<rect class="swatch" x="{c}" y="{top - GAP - SWATCH}" width="{SWATCH}" height="{SWATCH}" '
            f'fill="{color}"><title>{label}</title></rect>'
        )
        r = top + k * CELL + (CELL - SWATCH) // 2
        out.append(
            f'<rect class="swatch" x="{left - GAP - SWATCH}" y="{r}" width="{SWATCH}" height="{SWATCH}" '
            f'fill="{color}"><title>{label}</title></rect>'
        )
    out.append("</g>")

    out.append('<g class="legend">')
    step_h = legend_h / LEGEND_STEPS
    for s in range(LEGEND_STEPS):
        t = 1.0 - (s + 0.5) / LEGEND_STEPS
        out.append(
            f'<rect class="legend-step" x="{legend_x}" y="{_num(top + s * step_h)}" width="16" '
            f'height="{_num(step_h + 0.01)}" fill="{colormap(t)}"/>'
        )
    for frac, v in ((0.0, vmax), (0.5, (vmin + vmax) / 2), (1.0, vmin)):
        out.append(
            f'<text class="legend-label" x="{legend_x + 20}" y="{_num(top + frac * legend_h + 4)}" '
            f'font-family="sans-serif" font-size="10">{v:.2f}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
