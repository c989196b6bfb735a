"""Schedule dumps (CSV and SVG) and side-by-side comparison of run logs."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Dict, List, Sequence, Tuple
from xml.sax.saxutils import escape

from .errors import SchemaError
from .scheduler import CurriculumConfig, schedule_table
from .trainer import LOG_COLUMNS, read_log

DUMP_COLUMNS = ("epoch", "w_encode", "w_decode", "w_steg")
SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c")


def schedule_dump(config: CurriculumConfig, epochs: int) -> List[Tuple[int, float, float, float]]:
    """Curriculum weights for epochs 0..epochs-1."""
    return schedule_table(config, range(epochs))


def schedule_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DUMP_COLUMNS)
    for r in rows:
        w.writerow([str(v) for v in r])
    return buf.getvalue()


def schedule_svg(rows, width: int = 640, height: int = 360, title: str = "Loss weight schedule") -> str:
    """Plain SVG 1.1 line chart with one polyline per loss weight."""
    margin_l, margin_r, margin_t, margin_b = 56, 120, 32, 44
    pw, ph = width - margin_l - margin_r, height - margin_t - margin_b
    epochs = [r[0] for r in rows]
    values = [v for r in rows for v in r[1:]]
    x_max = max(max(epochs), 1)
    y_max = max(max(values), 1e-9) * 1.05

    def xy(e, v):
        return margin_l + pw * e / x_max, margin_t + ph * (1.0 - v / y_max)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{margin_l}" y1="{margin_t + ph}" x2="{margin_l + pw}" y2="{margin_t + ph}" stroke="black"/>',
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + ph}" stroke="black"/>',
        f'<text x="{margin_l + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">epoch</text>',
        f'<text x="14" y="{margin_t + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {margin_t + ph / 2:.1f})">weight</text>',
    ]
    for k in range(5):
        v = y_max * k / 4
        _, y = xy(0, v)
        out.append(f'<text x="{margin_l - 6}" y="{y + 4:.1f}" text-anchor="end" font-size="10">{v:.2f}</text>')
        e = x_max * k / 4
        x, _ = xy(e, 0)
        out.append(f'<text x="{x:.1f}" y="{margin_t + ph + 16}" text-anchor="middle" font-size="10">{e:.0f}</text>')
    for i, (name, color) in enumerate(zip(DUMP_COLUMNS[1:], SERIES_COLORS)):
        pts = " ".join("%.2f,%.2f" % xy(r[0], r[1 + i]) for r in rows)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = margin_t + 16 + 18 * i
        out.append(f'<text x="{margin_l + pw + 12}" y="{ly}" font-size="12" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- comparing runs -----------------------------------------------------------

METRIC_COLUMNS = ("val_ssim", "val_msssim", "val_psnr", "val_rmse", "val_bitacc", "val_stegscore")
COMPARE_COLUMNS = ("run", "which") + LOG_COLUMNS + tuple(f"d_{c}" for c in METRIC_COLUMNS)


def check_schema(path, header: Sequence[str]) -> None:
    if tuple(header) != LOG_COLUMNS:
        missing = [c for c in LOG_COLUMNS if c not in header]
        extra = [c for c in header if c not in LOG_COLUMNS]
        detail = []
        if missing:
            detail.append(f"missing columns: {', '.join(missing)}")
        if extra:
            detail.append(f"unexpected columns: {', '.join(extra)}")
        if not detail:
            detail.append("columns out of order")
        raise SchemaError(f"{path}: log schema mismatch; " + "; ".join(detail))


def _best(rows):
    return max(rows, key=lambda r: (r["val_bitacc"], r["val_psnr"]))


def compare_runs(paths: Sequence) -> List[Dict[str, object]]:
    """Final- and best-epoch metrics per run with deltas against the first run."""
    if not paths:
        raise ValueError("compare_runs needs at least one log")
    runs = []
    for p in paths:
        with open(p, newline="") as f:
            header = next(csv.reader(f), [])
        check_schema(p, header)
        rows = read_log(p)
        if not rows:
            raise SchemaError(f"{p}: log has no rows")
        runs.append((str(p), rows[-1], _best(rows)))
    base_final, base_best = runs[0][1], runs[0][2]
    table = []
    for name, final, best in runs:
        for which, row, ref in (("final", final, base_final), ("best", best, base_best)):
            entry = {"run": name, "which": which}
            for c in LOG_COLUMNS:
                entry[c] = row[c]
            for c in METRIC_COLUMNS:
                entry[f"d_{c}"] = row[c] - ref[c]
            table.append(entry)
    return table


def compare_csv(table) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COMPARE_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in table:
        w.writerow(row)
    return buf.getvalue()


def compare_text(table) -> str:
    heads = ("run", "which", "epoch", "ssim", "msssim", "psnr", "rmse", "bitacc", "steg", "d_bitacc", "d_psnr")
    lines = []
    body = []
    for r in table:
        body.append((
            Path(str(r["run"])).parent.name or str(r["run"]), r["which"], str(r["epoch"]),
            f"{r['val_ssim']:.4f}", f"{r['val_msssim']:.4f}", f"{r['val_psnr']:.2f}", f"{r['val_rmse']:.4f}",
            f"{r['val_bitacc']:.4f}", f"{r['val_stegscore']:.3f}",
            f"{r['d_val_bitacc']:+.4f}", f"{r['d_val_psnr']:+.2f}",
        ))
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(heads)]
    lines.append("  ".join(h.ljust(w) for h, w in zip(heads, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join(v.ljust(w) for v, w in zip(b, widths)))
    return "\n".join(lines) + "\n"
