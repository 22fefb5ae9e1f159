"""CSV / JSON / SVG writers. All output is deterministic for a given input."""
from __future__ import annotations

import csv
import hashlib
import json
import re

import numpy as np

STABLE = ("definite+", "definite-")


def canonical_json(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=1)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return str(obj)


def config_hash(doc):
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(canonical_json(obj) + "\n")


def branch_header(n2, k, n_eigs):
    return (["arclength"] + [f"z{i}" for i in range(n2)] + [f"xi{i}" for i in range(k)]
            + [f"mu{i}" for i in range(k)] + [f"eig{i}" for i in range(n_eigs)]
            + ["isotropy", "stability"])


def write_branch_csv(path, points):
    if not points:
        raise ValueError("no points to write")
    n2, k = points[0].z.size, points[0].xi.size
    m = max(len(p.eigs) for p in points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(branch_header(n2, k, m))
        for p in points:
            eigs = [repr(float(x)) for x in p.eigs] + [""] * (m - len(p.eigs))
            w.writerow([repr(float(p.arclength))] + [repr(float(x)) for x in p.z]
                       + [repr(float(x)) for x in p.xi] + [repr(float(x)) for x in p.mu]
                       + eigs + [p.isotropy, p.stability])


def point_record(p, drift=None):
    rec = {"arclength": p.arclength, "z": p.z, "xi": p.xi, "mu": p.mu, "eigs": p.eigs,
           "isotropy": p.isotropy, "stability": p.stability, "residual": p.residual}
    if drift is not None:
        rec["drift"] = drift
    return rec


_MON = re.compile(r"^(z|xi|mu|abs)\[(\d+)\]$")


def monitor(expr):
    """Scalar monitor on a BranchPoint: z[i], xi[i], mu[i], abs[j] or arclength."""
    expr = expr.strip()
    if expr == "arclength":
        return lambda p: float(p.arclength)
    m = _MON.match(expr)
    if not m:
        raise ValueError(f"bad monitor expression {expr!r}")
    kind, i = m.group(1), int(m.group(2))
    if kind == "abs":
        return lambda p: float(np.hypot(p.z[2 * i], p.z[2 * i + 1]))
    return lambda p: float(getattr(p, kind)[i])


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
           "#17becf")


def _fmt(x):
    return f"{x:.3f}"


def write_svg(path, branches, x_expr, y_expr, width=640, height=420, margin=60):
    """Bifurcation diagram: one polyline per branch segment, solid where
    both end points are formally stable and dashed otherwise; colour by
    isotropy label."""
    fx, fy = monitor(x_expr), monitor(y_expr)
    series = [[(fx(p), fy(p), p) for p in br.points] for br in branches]
    xs = [x for s in series for x, _, _ in s]
    ys = [y for s in series for _, y, _ in s]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    sx = lambda x: margin + (x - x0) / (x1 - x0) * (width - 2 * margin)
    sy = lambda y: height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)
    labels = []
    for s in series:
        for _, _, p in s:
            if p.isotropy not in labels:
                labels.append(p.isotropy)
    colour = {lab: PALETTE[i % len(PALETTE)] for i, lab in enumerate(labels)}
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
           f'y2="{height - margin}" stroke="black"/>',
           f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
           f'stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" '
           f'font-size="13">{x_expr}</text>',
           f'<text x="15" y="{height / 2:.1f}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 15 {height / 2:.1f})">{y_expr}</text>']
    for val, anchor in ((x0, "start"), (x1, "end")):
        out.append(f'<text x="{sx(val):.2f}" y="{height - margin + 16}" text-anchor="{anchor}" '
                   f'font-size="11">{val:.4g}</text>')
    for val in (y0, y1):
        out.append(f'<text x="{margin - 6}" y="{sy(val) + 4:.2f}" text-anchor="end" '
                   f'font-size="11">{val:.4g}</text>')
    for s in series:
        for (xa, ya, pa), (xb, yb, pb) in zip(s[:-1], s[1:]):
            stable = pa.stability in STABLE and pb.stability in STABLE
            dash = "" if stable else ' stroke-dasharray="6,4"'
            lab = pb.isotropy if len(s) > 1 and pb is not s[0][2] else pa.isotropy
            out.append(f'<line x1="{_fmt(sx(xa))}" y1="{_fmt(sy(ya))}" x2="{_fmt(sx(xb))}" '
                       f'y2="{_fmt(sy(yb))}" stroke="{colour[lab]}" stroke-width="2"{dash}/>')
    for i, lab in enumerate(labels):
        y = margin + 16 * i
        out.append(f'<line x1="{width - margin - 70}" y1="{y}" x2="{width - margin - 50}" '
                   f'y2="{y}" stroke="{colour[lab]}" stroke-width="2"/>')
        out.append(f'<text x="{width - margin - 45}" y="{y + 4}" font-size="11">{lab}</text>')
    out.append(f'<text x="{margin}" y="{margin - 20}" font-size="11">solid: formally stable; '
               'dashed: not certified</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
