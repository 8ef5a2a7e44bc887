"""Standalone SVG figures: confusion heatmap and truth/predicted scatter panels."""

from __future__ import annotations

from html import escape

import numpy as np

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _svg(width, height, body):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def _text(x, y, s, size=12, anchor="middle", fill="black", extra=""):
    return (f'<text x="{x:.1f}" y="{y:.1f}" font-size="{size}" text-anchor="{anchor}" '
            f'fill="{fill}"{extra}>{escape(str(s))}</text>')


def _blue(frac):
    # white -> dark blue
    r = int(round(247 - frac * (247 - 8)))
    g = int(round(251 - frac * (251 - 48)))
    b = int(round(255 - frac * (255 - 107)))
    return f"#{r:02x}{g:02x}{b:02x}"


def confusion_svg(confusion, class_names, title="Confusion matrix") -> str:
    cm = np.asarray(confusion, dtype=int)
    c = cm.shape[0]
    cell = 70
    left, top = 130, 60
    width = left + c * cell + 30
    height = top + c * cell + 70
    peak = max(int(cm.max()), 1)
    body = [_text(width / 2, 28, title, 16)]
    for t in range(c):
        for p in range(c):
            frac = cm[t, p] / peak
            x, y = left + p * cell, top + t * cell
            body.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                        f'fill="{_blue(frac)}" stroke="#888"/>')
            body.append(_text(x + cell / 2, y + cell / 2 + 5, cm[t, p], 14,
                              fill="white" if frac > 0.5 else "black"))
    for i, name in enumerate(class_names):
        body.append(_text(left - 8, top + i * cell + cell / 2 + 4, name, 11, "end"))
        body.append(_text(left + i * cell + cell / 2, top + c * cell + 18, name, 11))
    body.append(_text(left + c * cell / 2, height - 14, "predicted class", 12))
    body.append(_text(18, top + c * cell / 2, "true class", 12,
                      extra=f' transform="rotate(-90 18 {top + c * cell / 2:.1f})"'))
    return _svg(width, height, body)


def _panel(x0, y0, size, xs, ys, groups, names, title, ranges, axis_names):
    (xmin, xmax), (ymin, ymax) = ranges
    sx = lambda v: x0 + 10 + (v - xmin) / (xmax - xmin or 1) * (size - 20)
    sy = lambda v: y0 + size - 10 - (v - ymin) / (ymax - ymin or 1) * (size - 20)
    body = [
        f'<rect x="{x0}" y="{y0}" width="{size}" height="{size}" fill="none" stroke="black"/>',
        _text(x0 + size / 2, y0 - 10, title, 14),
        _text(x0 + size / 2, y0 + size + 28, axis_names[0], 12),
        _text(x0 - 30, y0 + size / 2, axis_names[1], 12,
              extra=f' transform="rotate(-90 {x0 - 30} {y0 + size / 2:.1f})"'),
        _text(x0, y0 + size + 14, f"{xmin:.2g}", 10, "start"),
        _text(x0 + size, y0 + size + 14, f"{xmax:.2g}", 10, "end"),
        _text(x0 - 4, y0 + size, f"{ymin:.2g}", 10, "end"),
        _text(x0 - 4, y0 + 10, f"{ymax:.2g}", 10, "end"),
    ]
    for x, y, g in zip(xs, ys, groups):
        body.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3.5" '
                    f'fill="{PALETTE[int(g) % len(PALETTE)]}" fill-opacity="0.8"/>')
    for i, name in enumerate(names):
        ly = y0 + 16 + 16 * i
        body.append(f'<circle cx="{x0 + size - 90}" cy="{ly - 4}" r="4" '
                    f'fill="{PALETTE[i % len(PALETTE)]}"/>')
        body.append(_text(x0 + size - 82, ly, name, 11, "start"))
    return body


def scatter_svg(features, truth, predicted, pair, feature_names, class_names,
                predicted_names=None, title="Ground truth and predicted labels") -> str:
    """Two side-by-side panels over the feature columns ``pair``."""
    feats = np.asarray(features, dtype=float)
    i, j = pair
    xs, ys = feats[:, i], feats[:, j]
    ranges = ((float(xs.min()), float(xs.max())), (float(ys.min()), float(ys.max())))
    size, gap, left, top = 340, 90, 70, 60
    width = left + 2 * size + gap + 20
    height = top + size + 50
    predicted_names = predicted_names or class_names
    axes = (feature_names[i], feature_names[j])
    body = [_text(width / 2, 24, title, 16)]
    body += _panel(left, top, size, xs, ys, truth, class_names, "ground truth", ranges, axes)
    body += _panel(left + size + gap, top, size, xs, ys, predicted, predicted_names,
                   "predicted", ranges, axes)
    return _svg(width, height, body)


def confusion_tsv(confusion, class_names) -> str:
    lines = ["true\\predicted\t" + "\t".join(class_names)]
    for name, row in zip(class_names, confusion):
        lines.append(name + "\t" + "\t".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def scatter_tsv(features, truth, predicted, pair, feature_names) -> str:
    i, j = pair
    lines = [f"{feature_names[i]}\t{feature_names[j]}\ttruth\tpredicted"]
    for row, t, p in zip(features, truth, predicted):
        lines.append(f"{row[i]!r}\t{row[j]!r}\t{int(t)}\t{int(p)}")
    return "\n".join(lines) + "\n"
