"""Static vector figures and overlay records for clinician review.

All documents are plain SVG built by string assembly with fixed-precision
coordinates, so identical inputs produce byte-identical files (raster
backends and plotting libraries do not guarantee that).  Every figure
carries a machine-readable sidecar describing exactly what was plotted
(series kinds and point counts); acceptance checks compare sidecars
against the document instead of pixel content.

Four figure families:

* band plot -- one joint's normative mean with the +/- k*SD envelope,
  optionally overlaid with an analyzed cycle's normal/abnormal samples
* multi-joint -- the band plot repeated as a 10-panel grid
* heatmap -- joints x cycle-percent severity, darker = larger deviation
* frame overlays -- per-frame skeleton + joint status records meant to be
  drawn over video frames by downstream tooling
"""

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cycles import NormalizedCycle
from .detect import (STATUS_UNKNOWN, DetectionConfig, FrameStatus)
from .errors import ValidationError
from .kinematics import JOINT_NAMES
from .normative import NormativeModel
from .pose_io import PoseSequence

# Drawn between keypoints that are both present in a frame.
SKELETON_EDGES: Tuple[Tuple[str, str], ...] = (
    ("left_shoulder", "right_shoulder"),
    ("left_hip", "right_hip"),
    ("left_shoulder", "left_hip"),
    ("right_shoulder", "right_hip"),
    ("left_shoulder", "left_elbow"), ("left_elbow", "left_wrist"),
    ("right_shoulder", "right_elbow"), ("right_elbow", "right_wrist"),
    ("left_hip", "left_knee"), ("left_knee", "left_ankle"),
    ("left_ankle", "left_heel"), ("left_heel", "left_hallux"),
    ("right_hip", "right_knee"), ("right_knee", "right_ankle"),
    ("right_ankle", "right_heel"), ("right_heel", "right_hallux"),
)

_STYLE = (
    "polyline.mean{fill:none;stroke:#1f4e8c;stroke-width:1.5}"
    "polygon.band{fill:#9ec3e6;fill-opacity:0.45;stroke:none}"
    "circle.normal{fill:#1f4e8c}"
    "circle.abnormal{fill:#c0392b}"
    "line.axis{stroke:#444;stroke-width:1}"
    "line.tick{stroke:#444;stroke-width:1}"
    "text{font-family:sans-serif;fill:#222}"
)


@dataclass
class FigureDoc:
    """A rendered SVG document plus its machine-readable sidecar."""

    svg: str
    sidecar: dict


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def _scales(values_min: float, values_max: float,
            x0: float, x1: float, y0: float, y1: float, grid_points: int):
    """Map (percent, degrees) to pixel coordinates; y axis points up."""
    lo = float(np.floor(values_min)) - 5.0
    hi = float(np.ceil(values_max)) + 5.0
    if hi <= lo:
        hi = lo + 1.0

    def sx(g: float) -> float:
        return x0 + (x1 - x0) * g / (grid_points - 1)

    def sy(v: float) -> float:
        return y1 - (y1 - y0) * (v - lo) / (hi - lo)

    return sx, sy, lo, hi


def _band_elements(mean: np.ndarray, std: np.ndarray, k: float,
                   sx, sy) -> Tuple[str, str]:
    """(band polygon, mean polyline) SVG fragments."""
    n = len(mean)
    upper = [(sx(g), sy(mean[g] + k * std[g])) for g in range(n)]
    lower = [(sx(g), sy(mean[g] - k * std[g])) for g in range(n - 1, -1, -1)]
    band_pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in upper + lower)
    mean_pts = " ".join(f"{_fmt(sx(g))},{_fmt(sy(mean[g]))}" for g in range(n))
    return (f'<polygon class="band" points="{band_pts}"/>',
            f'<polyline class="mean" points="{mean_pts}"/>')


def _overlay_elements(angles: np.ndarray, flags: np.ndarray,
                      sx, sy) -> Tuple[List[str], int, int]:
    parts = []
    n_normal = 0
    n_abnormal = 0
    for g in range(len(angles)):
        cls = "abnormal" if flags[g] else "normal"
        if flags[g]:
            n_abnormal += 1
        else:
            n_normal += 1
        parts.append(f'<circle class="{cls}" cx="{_fmt(sx(g))}" '
                     f'cy="{_fmt(sy(angles[g]))}" r="2"/>')
    return parts, n_normal, n_abnormal


def _axes(x0, x1, y0, y1, lo, hi, sx, sy, with_labels: bool = True) -> List[str]:
    parts = [
        f'<line class="axis" x1="{_fmt(x0)}" y1="{_fmt(y1)}" '
        f'x2="{_fmt(x1)}" y2="{_fmt(y1)}"/>',
        f'<line class="axis" x1="{_fmt(x0)}" y1="{_fmt(y0)}" '
        f'x2="{_fmt(x0)}" y2="{_fmt(y1)}"/>',
    ]
    if not with_labels:
        return parts
    for pct in (0, 25, 50, 75, 100):
        x = x0 + (x1 - x0) * pct / 100.0
        parts.append(f'<line class="tick" x1="{_fmt(x)}" y1="{_fmt(y1)}" '
                     f'x2="{_fmt(x)}" y2="{_fmt(y1 + 4)}"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{_fmt(y1 + 16)}" '
                     f'font-size="10" text-anchor="middle">{pct}</text>')
    for i in range(5):
        v = lo + (hi - lo) * i / 4.0
        y = sy(v)
        parts.append(f'<line class="tick" x1="{_fmt(x0 - 4)}" y1="{_fmt(y)}" '
                     f'x2="{_fmt(x0)}" y2="{_fmt(y)}"/>')
        parts.append(f'<text x="{_fmt(x0 - 7)}" y="{_fmt(y + 3)}" '
                     f'font-size="10" text-anchor="end">{v:.0f}</text>')
    return parts


def _document(width: float, height: float, body: List[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
            f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">'
            f'<style>{_STYLE}</style>')
    return head + "".join(body) + "</svg>\n"


def render_band_plot(model: NormativeModel, joint: str,
                     overlay: Optional[Tuple[NormalizedCycle, np.ndarray]] = None,
                     cfg: Optional[DetectionConfig] = None) -> FigureDoc:
    """Normative band for one joint, optionally with an analyzed cycle.

    The band spans mean +/- k*SD over cycle percent.  With an overlay the
    cycle's grid samples are drawn as dots, abnormal ones in the alert
    style.
    """
    cfg = cfg or DetectionConfig()
    if joint not in model.joints:
        raise ValidationError(f"joint {joint!r} absent from model")
    jn = model.joints[joint]
    n = model.grid_points

    values = [jn.mean + cfg.k * jn.std, jn.mean - cfg.k * jn.std]
    if overlay is not None:
        cycle, flags = overlay
        if len(flags) != n or cycle.grid_points != n:
            raise ValidationError("overlay grid size does not match model")
        values.append(cycle.angles[joint])
    vmin = min(float(np.min(v)) for v in values)
    vmax = max(float(np.max(v)) for v in values)

    x0, x1, y0, y1 = 50.0, 620.0, 30.0, 360.0
    sx, sy, lo, hi = _scales(vmin, vmax, x0, x1, y0, y1, n)

    body = [f'<text x="{_fmt(x0)}" y="18" font-size="13">{joint} '
            f'(mean and {cfg.k:g} SD band, degrees vs cycle percent)</text>']
    band, mean_line = _band_elements(jn.mean, jn.std, cfg.k, sx, sy)
    body.append(band)
    body.append(mean_line)
    series = [{"kind": "mean", "points": n}, {"kind": "band", "points": 2 * n}]
    if overlay is not None:
        cycle, flags = overlay
        dots, n_normal, n_abnormal = _overlay_elements(cycle.angles[joint],
                                                       flags, sx, sy)
        body.extend(dots)
        series.append({"kind": "normal", "points": n_normal})
        series.append({"kind": "abnormal", "points": n_abnormal})
    body.extend(_axes(x0, x1, y0, y1, lo, hi, sx, sy))

    sidecar = {
        "figure_kind": "band",
        "joint": joint,
        "grid_points": n,
        "k": cfg.k,
        "series": series,
    }
    return FigureDoc(svg=_document(640, 400, body), sidecar=sidecar)


def render_multi_joint(flags_by_joint: Dict[str, np.ndarray],
                       cycle: NormalizedCycle,
                       model: NormativeModel,
                       cfg: Optional[DetectionConfig] = None,
                       joint_order: Sequence[str] = JOINT_NAMES) -> FigureDoc:
    """All joints of one analyzed cycle as a panel grid.

    Each renderable panel repeats the band-plot styling; joints invalid in
    the cycle (or absent from model/flags) become "insufficient data"
    placeholders so the layout stays fixed.
    """
    cfg = cfg or DetectionConfig()
    n = model.grid_points
    if cycle.grid_points != n:
        raise ValidationError("cycle grid size does not match model")
    panel_w, panel_h = 380.0, 170.0
    pad = 16.0
    cols = 2
    rows = (len(joint_order) + cols - 1) // cols
    width = cols * panel_w + (cols + 1) * pad
    height = rows * panel_h + (rows + 1) * pad

    body = []
    panels = []
    for i, joint in enumerate(joint_order):
        col, row = i % cols, i // cols
        ox = pad + col * (panel_w + pad)
        oy = pad + row * (panel_h + pad)
        renderable = (joint in model.joints
                      and cycle.valid.get(joint, False)
                      and joint in flags_by_joint)
        body.append(f'<rect x="{_fmt(ox)}" y="{_fmt(oy)}" '
                    f'width="{_fmt(panel_w)}" height="{_fmt(panel_h)}" '
                    f'fill="none" stroke="#999"/>')
        body.append(f'<text x="{_fmt(ox + 6)}" y="{_fmt(oy + 14)}" '
                    f'font-size="11">{joint}</text>')
        if not renderable:
            body.append(f'<text x="{_fmt(ox + panel_w / 2)}" '
                        f'y="{_fmt(oy + panel_h / 2)}" font-size="11" '
                        f'text-anchor="middle" fill="#888">insufficient data</text>')
            panels.append({"joint": joint, "rendered": False})
            continue
        jn = model.joints[joint]
        angles = cycle.angles[joint]
        flags = flags_by_joint[joint]
        vmin = min(float(np.min(jn.mean - cfg.k * jn.std)), float(np.min(angles)))
        vmax = max(float(np.max(jn.mean + cfg.k * jn.std)), float(np.max(angles)))
        x0, x1 = ox + 10.0, ox + panel_w - 10.0
        y0, y1 = oy + 20.0, oy + panel_h - 10.0
        sx, sy, lo, hi = _scales(vmin, vmax, x0, x1, y0, y1, n)
        band, mean_line = _band_elements(jn.mean, jn.std, cfg.k, sx, sy)
        body.append(band)
        body.append(mean_line)
        dots, n_normal, n_abnormal = _overlay_elements(angles, flags, sx, sy)
        body.extend(dots)
        body.extend(_axes(x0, x1, y0, y1, lo, hi, sx, sy, with_labels=False))
        panels.append({"joint": joint, "rendered": True,
                       "normal": n_normal, "abnormal": n_abnormal})

    sidecar = {
        "figure_kind": "multi_joint",
        "grid_points": n,
        "k": cfg.k,
        "panels": panels,
    }
    return FigureDoc(svg=_document(width, height, body), sidecar=sidecar)


def render_heatmap(severity: np.ndarray,
                   joint_names: Sequence[str] = JOINT_NAMES) -> FigureDoc:
    """Severity matrix as a grayscale heatmap, darker = larger deviation.

    Severity 0 maps to white and 1 to black.  All-NaN rows (joints with
    no data) render as blank rows and are listed in the sidecar.
    """
    severity = np.asarray(severity, dtype=float)
    if severity.ndim != 2 or severity.size == 0:
        raise ValidationError("severity matrix must be 2-D and non-empty")
    n_rows, n_cols = severity.shape
    if len(joint_names) != n_rows:
        raise ValidationError(
            f"{n_rows} matrix rows but {len(joint_names)} joint names")

    cell_w, cell_h = 8.0, 24.0
    left, top = 110.0, 20.0
    width = left + n_cols * cell_w + 20.0
    height = top + n_rows * cell_h + 40.0

    body = []
    blank_rows = []
    for r in range(n_rows):
        y = top + r * cell_h
        body.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(y + cell_h / 2 + 4)}" '
                    f'font-size="11" text-anchor="end">{joint_names[r]}</text>')
        row_blank = bool(np.all(np.isnan(severity[r])))
        if row_blank:
            blank_rows.append(joint_names[r])
        for c in range(n_cols):
            v = severity[r, c]
            if np.isnan(v):
                fill = "#f5f5f5"
            else:
                shade = int(round(255.0 * (1.0 - min(max(v, 0.0), 1.0))))
                fill = f"rgb({shade},{shade},{shade})"
            body.append(f'<rect class="cell" x="{_fmt(left + c * cell_w)}" '
                        f'y="{_fmt(y)}" width="{_fmt(cell_w)}" '
                        f'height="{_fmt(cell_h)}" fill="{fill}"/>')
    for pct in (0, 25, 50, 75, 100):
        x = left + pct / 100.0 * (n_cols - 1) * cell_w + cell_w / 2.0
        body.append(f'<text x="{_fmt(x)}" y="{_fmt(top + n_rows * cell_h + 16)}" '
                    f'font-size="10" text-anchor="middle">{pct}</text>')

    finite = severity[np.isfinite(severity)]
    sidecar = {
        "figure_kind": "heatmap",
        "rows": n_rows,
        "cols": n_cols,
        "joints": list(joint_names),
        "blank_rows": blank_rows,
        "max_severity": float(finite.max()) if finite.size else None,
    }
    return FigureDoc(svg=_document(width, height, body), sidecar=sidecar)


def annotate_frames(seq: PoseSequence,
                    statuses: List[FrameStatus],
                    joint_order: Sequence[str] = JOINT_NAMES) -> List[dict]:
    """Per-frame overlay records for drawing skeletons over video.

    Each record carries the frame's keypoint pixel positions, the
    skeleton edges whose endpoints are both present, and the per-joint
    status key (normal/abnormal/unknown).  Frames without a status entry
    report every joint unknown.
    """
    by_frame = {s.frame_index: s for s in statuses}
    records = []
    for frame in seq.frames:
        status = by_frame.get(frame.frame_index)
        joint_status = (dict(status.status) if status is not None
                        else {j: STATUS_UNKNOWN for j in joint_order})
        keypoints = {
            name: [kp.point.x, kp.point.y, kp.visibility]
            for name, kp in sorted(frame.keypoints.items())
        }
        edges = [[a, b] for a, b in SKELETON_EDGES
                 if a in frame.keypoints and b in frame.keypoints]
        records.append({
            "frame": frame.frame_index,
            "time_s": frame.time_s,
            "keypoints": keypoints,
            "edges": edges,
            "joint_status": joint_status,
        })
    return records


def write_figure(doc: FigureDoc, svg_path) -> None:
    """Write the SVG plus its sidecar (``<svg_path>.json``)."""
    with open(svg_path, "wb") as fh:
        fh.write(doc.svg.encode())
    sidecar_path = str(svg_path) + ".json"
    with open(sidecar_path, "wb") as fh:
        fh.write((json.dumps(doc.sidecar, sort_keys=True, indent=1) + "\n").encode())
