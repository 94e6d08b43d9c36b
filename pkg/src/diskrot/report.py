"""Report bundles: atomic JSON/CSV emission and minimal SVG line charts.

Charts are a pure function of the CSV series, so regenerating one from
its data file reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np


def _atomic_write(path, data, mode="w"):
    """Write via a sibling temp file and rename, so readers never see a
    partial artifact."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(obj):
    # numpy scalars and arrays leak into report dicts from the verifiers
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(path, obj):
    _atomic_write(
        path, json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n"
    )


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    _atomic_write(path, buf.getvalue())


def read_csv(path):
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, rows


def svg_line_chart(xs, ys, title="", width=640, height=400, target=None):
    """A minimal polyline chart; deterministic text output."""
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    pad = 50
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if target is not None:
        y0, y1 = min(y0, target), max(y1, target)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    # a little headroom so the polyline is not glued to the frame
    yr = y1 - y0
    y0, y1 = y0 - 0.05 * yr, y1 + 0.05 * yr

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{title}</text>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
        f'height="{height - 2 * pad}" fill="none" stroke="black"/>',
        f'<text x="{pad}" y="{height - pad + 16}" font-family="monospace" '
        f'font-size="11">{x0:.6g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="end" '
        f'font-family="monospace" font-size="11">{x1:.6g}</text>',
        f'<text x="{pad - 4}" y="{sy(ys[0]):.0f}" text-anchor="end" '
        f'font-family="monospace" font-size="11">{ys[0]:.6g}</text>',
    ]
    if target is not None:
        parts.append(
            f'<line x1="{pad}" y1="{sy(target):.2f}" x2="{width - pad}" '
            f'y2="{sy(target):.2f}" stroke="gray" stroke-dasharray="4 3"/>'
        )
    parts.append(f'<polyline points="{pts}" fill="none" stroke="blue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_chart(path, xs, ys, title="", target=None):
    _atomic_write(path, svg_line_chart(xs, ys, title=title, target=target))


class ReportBundle:
    """Collects a JSON report, CSV series, and charts for one command."""

    def __init__(self, out_dir, name, config=None, seed=None):
        self.out_dir = out_dir
        self.name = name
        self.report = {"command": name, "config": config, "seed": seed}
        self.series = {}

    def add(self, **fields):
        self.report.update(fields)

    def add_series(self, key, header, rows, chart=None):
        self.series[key] = (header, rows, chart)

    def add_convergence(self, key, report):
        self.report[key] = report.to_dict()
        rows = list(zip(report.n_values, report.partial_averages))
        self.add_series(
            key,
            ["n", "partial_average"],
            rows,
            chart={"title": key, "target": report.target},
        )

    def write(self):
        paths = {}
        for key, (header, rows, chart) in self.series.items():
            csv_path = os.path.join(self.out_dir, f"{self.name}-{key}.csv")
            write_csv(csv_path, header, rows)
            paths[key] = csv_path
            if chart is not None:
                svg_path = os.path.join(self.out_dir, f"{self.name}-{key}.svg")
                xs = [r[0] for r in rows]
                ys = [r[1] for r in rows]
                write_chart(
                    svg_path, xs, ys, title=chart.get("title", key),
                    target=chart.get("target"),
                )
                paths[key + ".svg"] = svg_path
        self.report["artifacts"] = paths
        json_path = os.path.join(self.out_dir, f"{self.name}.json")
        write_json(json_path, self.report)
        return json_path
