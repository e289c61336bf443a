"""Read, validate and persist the package's external data formats.

Four file families are handled here:

* keypoint sequences -- line-delimited JSON, one frame per line, so long
  videos can be streamed with bounded memory
* cycle annotations -- one JSON document per video
* normalized-cycle cohorts -- ``gaitnorm-cycles/1``
* normative models -- ``gaitnorm/1``
* deviation reports -- one JSON document per analyzed cycle

Parsing is pure and deterministic: the same bytes always produce the same
structures, and parsed values are never mutated afterwards, so they are
safe to share across threads.  Serializers emit floats at full precision
(``repr`` round-trip) with sorted keys, so ``load(save(x))`` reproduces
``x`` exactly and equal inputs produce byte-identical files.
"""

import json
import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .errors import ValidationError

logger = logging.getLogger(__name__)

# The closed set of landmark names accepted in keypoint files: eight
# bilateral landmark kinds.  "hallux" maps to the pose model's foot-index
# landmark (tip of the big toe).
KEYPOINT_NAMES: Tuple[str, ...] = (
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_hallux", "right_hallux",
)
_KEYPOINT_SET = frozenset(KEYPOINT_NAMES)

CYCLE_LABELS: Tuple[str, ...] = ("typical", "atypical")

NORM_MODEL_SCHEMA = "gaitnorm/1"
CYCLES_SCHEMA = "gaitnorm-cycles/1"
ANGLES_SCHEMA = "gaitnorm-angles/1"


class Point2D(NamedTuple):
    """Pixel position in image coordinates (origin top-left, y down)."""

    x: float
    y: float


class Keypoint(NamedTuple):
    """One detected landmark: position plus visibility in [0, 1]."""

    point: Point2D
    visibility: float


@dataclass(frozen=True)
class KeypointFrame:
    """Landmarks detected in a single video frame.

    Missing landmarks are absent from ``keypoints`` rather than stored as
    zero coordinates: (0, 0) is a valid pixel.
    """

    frame_index: int
    keypoints: Dict[str, Keypoint]
    time_s: Optional[float] = None


@dataclass(frozen=True)
class PoseSequence:
    """Keypoint frames for one video, sorted by strictly increasing index."""

    video_id: str
    frames: Tuple[KeypointFrame, ...]
    fps: Optional[float] = None

    def frame_indices(self) -> List[int]:
        return [f.frame_index for f in self.frames]


@dataclass(frozen=True)
class CycleAnnotation:
    """One gait cycle: left initial heel strike to the next one.

    ``start_frame`` and ``end_frame`` are both heel-strike frames, so
    adjacent cycles share their boundary frame.
    """

    start_frame: int
    end_frame: int
    label: str

    def __post_init__(self):
        if self.end_frame <= self.start_frame:
            raise ValidationError(
                f"cycle end_frame must exceed start_frame "
                f"(got [{self.start_frame}, {self.end_frame}])")
        if self.start_frame < 0:
            raise ValidationError("cycle start_frame must be non-negative")
        if self.label not in CYCLE_LABELS:
            raise ValidationError(
                f"unknown cycle label {self.label!r}; expected one of {CYCLE_LABELS}")


def _require_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{what} must be a number, got {value!r}")
    v = float(value)
    if not np.isfinite(v):
        raise ValidationError(f"{what} must be finite, got {value!r}")
    return v


def _require_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{what} must be an integer, got {value!r}")
    return value


def parse_pose_sequence(data: bytes, strict: bool = False, *,
                        video_id: str = "",
                        fps: Optional[float] = None) -> PoseSequence:
    """Parse a line-delimited keypoint file into a ``PoseSequence``.

    Each non-blank line is one JSON object::

        {"frame": 17, "time_s": 0.567,
         "keypoints": {"left_knee": [412.0, 615.5, 0.97], ...}}

    ``frame`` is required and non-negative, ``time_s`` is optional, and
    every keypoint entry is ``[x, y, visibility]`` with finite pixel
    coordinates and visibility in [0, 1].  Unknown landmark names are an
    error in ``strict`` mode and are skipped with a warning otherwise.
    Frames arriving out of order are sorted (with a warning); duplicate
    frame indices are rejected.

    The line format carries no video identity or frame rate, so callers
    supply ``video_id`` and ``fps``.
    """
    frames: List[KeypointFrame] = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {lineno}: malformed record: {exc}") from exc
        if not isinstance(record, dict):
            raise ValidationError(f"line {lineno}: malformed record: not a JSON object")
        try:
            frames.append(_parse_frame(record, strict))
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc

    if len(frames) < 2:
        raise ValidationError(
            f"a pose sequence needs at least 2 frames, got {len(frames)}")

    indices = [f.frame_index for f in frames]
    if len(set(indices)) != len(indices):
        dupes = sorted({i for i in indices if indices.count(i) > 1})
        raise ValidationError(f"duplicate frame index: {dupes[0]}")
    if indices != sorted(indices):
        logger.warning("pose sequence %r: frames arrived out of order; sorted "
                       "by frame index", video_id)
        frames.sort(key=lambda f: f.frame_index)

    return PoseSequence(video_id=video_id, frames=tuple(frames), fps=fps)


def _parse_frame(record: dict, strict: bool) -> KeypointFrame:
    if "frame" not in record:
        raise ValidationError("malformed record: missing 'frame'")
    frame_index = _require_int(record["frame"], "'frame'")
    if frame_index < 0:
        raise ValidationError(f"'frame' must be non-negative, got {frame_index}")

    time_s = None
    if record.get("time_s") is not None:
        time_s = _require_number(record["time_s"], "'time_s'")

    raw_kps = record.get("keypoints")
    if not isinstance(raw_kps, dict):
        raise ValidationError("malformed record: 'keypoints' must be an object")

    keypoints: Dict[str, Keypoint] = {}
    for name, entry in raw_kps.items():
        if name not in _KEYPOINT_SET:
            if strict:
                raise ValidationError(f"unknown keypoint name {name!r}")
            logger.warning("frame %d: skipping unknown keypoint name %r",
                           frame_index, name)
            continue
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise ValidationError(
                f"keypoint {name!r} must be [x, y, visibility], got {entry!r}")
        x = _require_number(entry[0], f"keypoint {name!r} x")
        y = _require_number(entry[1], f"keypoint {name!r} y")
        vis = _require_number(entry[2], f"keypoint {name!r} visibility")
        if not 0.0 <= vis <= 1.0:
            raise ValidationError(
                f"visibility out of range for {name!r}: {vis} (must be in [0, 1])")
        keypoints[name] = Keypoint(Point2D(x, y), vis)

    return KeypointFrame(frame_index=frame_index, keypoints=keypoints,
                         time_s=time_s)


def serialize_pose_sequence(seq: PoseSequence) -> bytes:
    """Inverse of ``parse_pose_sequence`` (minus video_id/fps, which the
    line format does not carry)."""
    lines = []
    for f in seq.frames:
        record = {"frame": f.frame_index}
        if f.time_s is not None:
            record["time_s"] = f.time_s
        record["keypoints"] = {
            name: [kp.point.x, kp.point.y, kp.visibility]
            for name, kp in sorted(f.keypoints.items())
        }
        lines.append(json.dumps(record, sort_keys=True))
    return ("\n".join(lines) + "\n").encode()


def parse_annotation_document(data: bytes) -> Tuple[str, List[CycleAnnotation]]:
    """Parse a cycle annotation file, returning (video_id, cycles).

    Expected document::

        {"video_id": "walk01",
         "cycles": [{"start_frame": 10, "end_frame": 40, "label": "typical"}]}

    Cycles may touch at a shared boundary frame (the heel strike that ends
    one cycle starts the next) but must not otherwise overlap.
    """
    try:
        doc = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed annotation document: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("cycles"), list):
        raise ValidationError("annotation document must contain a 'cycles' list")
    video_id = doc.get("video_id", "")
    if not isinstance(video_id, str):
        raise ValidationError("'video_id' must be a string")

    cycles: List[CycleAnnotation] = []
    for i, entry in enumerate(doc["cycles"]):
        if not isinstance(entry, dict):
            raise ValidationError(f"cycle {i}: must be an object")
        start = _require_int(entry.get("start_frame"), f"cycle {i} start_frame")
        end = _require_int(entry.get("end_frame"), f"cycle {i} end_frame")
        label = entry.get("label")
        if not isinstance(label, str):
            raise ValidationError(f"cycle {i}: 'label' must be a string")
        cycles.append(CycleAnnotation(start_frame=start, end_frame=end, label=label))

    ordered = sorted(cycles, key=lambda c: (c.start_frame, c.end_frame))
    for prev, nxt in zip(ordered, ordered[1:]):
        if nxt.start_frame < prev.end_frame:
            raise ValidationError(
                f"cycles [{prev.start_frame}, {prev.end_frame}] and "
                f"[{nxt.start_frame}, {nxt.end_frame}] overlap beyond a "
                f"shared boundary frame")
    return video_id, cycles


def parse_cycle_annotations(data: bytes) -> List[CycleAnnotation]:
    """Parse a cycle annotation file into validated annotations."""
    return parse_annotation_document(data)[1]


def serialize_annotations(video_id: str, cycles: List[CycleAnnotation]) -> bytes:
    doc = {
        "video_id": video_id,
        "cycles": [
            {"start_frame": c.start_frame, "end_frame": c.end_frame,
             "label": c.label}
            for c in cycles
        ],
    }
    return (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode()


def _dump(doc: dict) -> bytes:
    # Canonical bytes: sorted keys, repr-precision floats, trailing newline.
    return (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode()


def _float_list(values, what: str, n: int) -> List[float]:
    if not isinstance(values, list) or len(values) != n:
        raise ValidationError(f"{what}: expected an array of length {n}")
    out = []
    for v in values:
        out.append(_require_number(v, what))
    return out


def save_norm_model(model) -> bytes:
    """Serialize a ``NormativeModel`` to the ``gaitnorm/1`` JSON schema.

    Floats keep full precision so ``load_norm_model`` reproduces the model
    exactly, field for field.
    """
    joints = {}
    for name, jn in model.joints.items():
        joints[name] = {
            "mean": [float(v) for v in jn.mean],
            "std": [float(v) for v in jn.std],
            "n_cycles": int(jn.n_cycles),
        }
    doc = {
        "schema": NORM_MODEL_SCHEMA,
        "grid_points": int(model.grid_points),
        "std_kind": model.std_kind,
        "joints": joints,
        "provenance": list(model.provenance),
    }
    return _dump(doc)


def load_norm_model(data: bytes):
    """Parse and validate a ``gaitnorm/1`` normative model file."""
    from .normative import JointNormals, NormativeModel  # deferred: avoids import cycle

    try:
        doc = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("model file must be a JSON object")
    if doc.get("schema") != NORM_MODEL_SCHEMA:
        raise ValidationError(
            f"schema mismatch: expected {NORM_MODEL_SCHEMA!r}, "
            f"got {doc.get('schema')!r}")
    grid_points = _require_int(doc.get("grid_points"), "'grid_points'")
    if grid_points < 2:
        raise ValidationError(f"'grid_points' must be >= 2, got {grid_points}")
    std_kind = doc.get("std_kind")
    if std_kind not in ("sample", "population"):
        raise ValidationError(f"unknown std_kind {std_kind!r}")
    raw_joints = doc.get("joints")
    if not isinstance(raw_joints, dict):
        raise ValidationError("'joints' must be an object")

    joints = {}
    for name, entry in raw_joints.items():
        mean = _float_list(entry.get("mean"), f"joint {name!r} mean", grid_points)
        std = _float_list(entry.get("std"), f"joint {name!r} std", grid_points)
        n_cycles = _require_int(entry.get("n_cycles"), f"joint {name!r} n_cycles")
        if n_cycles < 1:
            raise ValidationError(f"joint {name!r}: n_cycles must be >= 1")
        if any(v < 0.0 for v in std):
            raise ValidationError(f"joint {name!r}: std values must be >= 0")
        if any(not 0.0 <= v <= 180.0 for v in mean):
            raise ValidationError(f"joint {name!r}: mean values must be in [0, 180]")
        joints[name] = JointNormals(mean=np.array(mean), std=np.array(std),
                                    n_cycles=n_cycles)

    provenance = doc.get("provenance", [])
    if not isinstance(provenance, list) or not all(isinstance(p, str) for p in provenance):
        raise ValidationError("'provenance' must be a list of strings")
    return NormativeModel(grid_points=grid_points, std_kind=std_kind,
                          joints=joints, provenance=list(provenance))


def save_cycles(cycles) -> bytes:
    """Serialize normalized cycles to the ``gaitnorm-cycles/1`` schema."""
    if not cycles:
        raise ValidationError("no cycles to save")
    grid_points = cycles[0].grid_points
    entries = []
    for c in cycles:
        if c.grid_points != grid_points:
            raise ValidationError("cannot mix grid sizes in one cycles file")
        joints = {}
        for name in c.angles:
            valid = bool(c.valid.get(name, False))
            joints[name] = {
                "valid": valid,
                "angle": [float(v) for v in c.angles[name]] if valid else None,
            }
        entries.append({
            "cycle_id": c.cycle_id,
            "label": c.label,
            "joints": joints,
        })
    doc = {"schema": CYCLES_SCHEMA, "grid_points": int(grid_points),
           "cycles": entries}
    return _dump(doc)


def load_cycles(data: bytes):
    """Parse a ``gaitnorm-cycles/1`` cohort file."""
    from .cycles import NormalizedCycle  # deferred: avoids import cycle

    try:
        doc = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed cycles file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != CYCLES_SCHEMA:
        raise ValidationError(
            f"schema mismatch: expected {CYCLES_SCHEMA!r}, got "
            f"{doc.get('schema') if isinstance(doc, dict) else None!r}")
    grid_points = _require_int(doc.get("grid_points"), "'grid_points'")
    raw = doc.get("cycles")
    if not isinstance(raw, list):
        raise ValidationError("'cycles' must be a list")

    out = []
    for i, entry in enumerate(raw):
        label = entry.get("label")
        if label not in CYCLE_LABELS:
            raise ValidationError(f"cycle {i}: unknown label {label!r}")
        cycle_id = entry.get("cycle_id")
        if cycle_id is not None and not isinstance(cycle_id, str):
            raise ValidationError(f"cycle {i}: cycle_id must be a string or null")
        joints = entry.get("joints")
        if not isinstance(joints, dict):
            raise ValidationError(f"cycle {i}: 'joints' must be an object")
        angles = {}
        valid = {}
        for name, jentry in joints.items():
            is_valid = bool(jentry.get("valid"))
            if is_valid:
                vals = _float_list(jentry.get("angle"),
                                   f"cycle {i} joint {name!r} angle", grid_points)
                if any(not 0.0 <= v <= 180.0 for v in vals):
                    raise ValidationError(
                        f"cycle {i} joint {name!r}: angles must be in [0, 180]")
                angles[name] = np.array(vals)
            else:
                angles[name] = np.full(grid_points, np.nan)
            valid[name] = is_valid
        out.append(NormalizedCycle(label=label, grid_points=grid_points,
                                   angles=angles, valid=valid, cycle_id=cycle_id))
    return out


def save_report(report) -> bytes:
    """Serialize a ``DeviationReport`` for one analyzed cycle."""
    joints = {}
    for name in report.z:
        joints[name] = {
            "z": [float(v) for v in report.z[name]],
            "flag": [bool(v) for v in report.flag[name]],
            "severity": [float(v) for v in report.severity[name]],
            "flagged_fraction": float(report.flagged_fraction[name]),
        }
    cycle_meta = {"cycle_id": report.cycle_id, "label": report.label}
    if report.annotation is not None:
        cycle_meta["start_frame"] = report.annotation.start_frame
        cycle_meta["end_frame"] = report.annotation.end_frame
    doc = {
        "video_id": report.video_id,
        "cycle": cycle_meta,
        "grid_points": int(report.grid_points),
        "config": {
            "k": report.config.k,
            "sigma_floor_deg": report.config.sigma_floor_deg,
            "severity_clip": report.config.severity_clip,
        },
        "joints": joints,
        "unknown_joints": list(report.unknown_joints),
    }
    return _dump(doc)


def load_report(data: bytes):
    """Parse a deviation report file."""
    from .detect import DetectionConfig, DeviationReport  # deferred: avoids import cycle

    try:
        doc = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed report file: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("joints"), dict):
        raise ValidationError("report file must contain a 'joints' object")
    grid_points = _require_int(doc.get("grid_points"), "'grid_points'")
    cfg_doc = doc.get("config", {})
    config = DetectionConfig(
        k=float(cfg_doc.get("k", 1.0)),
        sigma_floor_deg=float(cfg_doc.get("sigma_floor_deg", 0.5)),
        severity_clip=float(cfg_doc.get("severity_clip", 3.0)),
    )
    z = {}
    flag = {}
    severity = {}
    flagged_fraction = {}
    for name, entry in doc["joints"].items():
        z[name] = np.array(_float_list(entry.get("z"), f"joint {name!r} z",
                                       grid_points))
        flags = entry.get("flag")
        if not isinstance(flags, list) or len(flags) != grid_points:
            raise ValidationError(f"joint {name!r} flag: expected an array of "
                                  f"length {grid_points}")
        flag[name] = np.array([bool(v) for v in flags])
        severity[name] = np.array(_float_list(entry.get("severity"),
                                              f"joint {name!r} severity",
                                              grid_points))
        flagged_fraction[name] = float(entry.get("flagged_fraction", 0.0))

    cycle_meta = doc.get("cycle", {})
    annotation = None
    if "start_frame" in cycle_meta and "end_frame" in cycle_meta:
        annotation = CycleAnnotation(
            start_frame=cycle_meta["start_frame"],
            end_frame=cycle_meta["end_frame"],
            label=cycle_meta.get("label", "typical"),
        )
    return DeviationReport(
        video_id=doc.get("video_id", ""),
        cycle_id=cycle_meta.get("cycle_id"),
        label=cycle_meta.get("label", "typical"),
        annotation=annotation,
        grid_points=grid_points,
        config=config,
        z=z,
        flag=flag,
        severity=severity,
        flagged_fraction=flagged_fraction,
        unknown_joints=list(doc.get("unknown_joints", [])),
    )


def save_angle_series(series_by_joint: dict, *, video_id: str = "",
                      min_visibility: float = 0.5) -> bytes:
    """Serialize per-joint angle series (the ``angles`` CLI output)."""
    joints = {}
    for name, series in series_by_joint.items():
        joints[name] = [
            [s.frame_index,
             None if s.angle_deg is None else float(s.angle_deg),
             s.missing_reason]
            for s in series.samples
        ]
    doc = {"schema": ANGLES_SCHEMA, "video_id": video_id,
           "min_visibility": min_visibility, "joints": joints}
    return _dump(doc)


def load_angle_series(data: bytes) -> dict:
    """Parse an angle-series file back into per-joint ``AngleSeries``."""
    from .kinematics import AngleSample, AngleSeries  # deferred: avoids import cycle

    try:
        doc = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed angles file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != ANGLES_SCHEMA:
        raise ValidationError(f"schema mismatch: expected {ANGLES_SCHEMA!r}")
    out = {}
    for name, rows in doc.get("joints", {}).items():
        samples = []
        for row in rows:
            frame, angle, reason = row
            samples.append(AngleSample(
                frame_index=int(frame),
                angle_deg=None if angle is None else float(angle),
                missing_reason=reason))
        out[name] = AngleSeries(joint=name, samples=samples)
    return out
