"""Clinical joint angles computed per frame from 2D keypoints.

The measure is the unsigned included angle at an axis keypoint between the
rays toward a proximal and a distal keypoint, always in [0, 180] degrees.
It is computed directly in image coordinates from a single lateral view,
with no perspective correction, which mirrors how the angle would be read
off the video by hand.

Ten angles make up the standard set: shoulder, elbow, hip, knee and ankle,
each side.  ``JOINT_NAMES`` fixes their canonical order (proximal to
distal, left before right) used for matrix rows and figure panels.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import DegenerateGeometryError, ValidationError
from .pose_io import PoseSequence

# Canonical joint order for matrices and figures.
JOINT_NAMES: Tuple[str, ...] = (
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
)

MISSING_LOW_VISIBILITY = "low_visibility"
MISSING_ABSENT_KEYPOINT = "absent_keypoint"
MISSING_DEGENERATE = "degenerate_geometry"

DEFAULT_MIN_VISIBILITY = 0.5


@dataclass(frozen=True)
class JointDefinition:
    """Keypoint triple defining one joint angle.

    ``axis`` is the vertex; the angle opens between the rays toward
    ``proximal`` and ``distal``.
    """

    name: str
    proximal: str
    axis: str
    distal: str

    def __post_init__(self):
        if len({self.proximal, self.axis, self.distal}) != 3:
            raise ValidationError(
                f"joint {self.name!r}: proximal/axis/distal keypoints must "
                f"be distinct")


@dataclass(frozen=True)
class AngleSample:
    """Angle at one frame, or a missing marker with its reason."""

    frame_index: int
    angle_deg: Optional[float]
    missing_reason: Optional[str] = None

    @property
    def missing(self) -> bool:
        return self.angle_deg is None


@dataclass
class AngleSeries:
    """Per-frame angle samples for one joint, strictly increasing frames."""

    joint: str
    samples: List[AngleSample]


def joint_angle(a, b, c) -> float:
    """Included angle at vertex ``b`` between rays b->a and b->c, in degrees.

    Computed as the absolute difference of the two ray headings
    (``atan2``), converted to degrees; results beyond 180 are folded back
    by subtracting from 360 so the value always lands in [0, 180].

    ``a``, ``b``, ``c`` are (x, y) pairs.  Raises
    ``DegenerateGeometryError`` when ``a`` or ``c`` coincides with ``b``.
    """
    ax, ay = a
    bx, by = b
    cx, cy = c
    if (ax == bx and ay == by) or (cx == bx and cy == by):
        raise DegenerateGeometryError(
            "joint angle undefined: vertex coincides with an endpoint")
    radians = math.atan2(cy - by, cx - bx) - math.atan2(ay - by, ax - bx)
    angle = abs(math.degrees(radians))
    if angle > 180.0:
        angle = 360.0 - angle
    return angle


def standard_joint_set() -> List[JointDefinition]:
    """The ten standard joint definitions, in canonical order.

    Shoulder opens hip-shoulder-elbow, elbow opens shoulder-elbow-wrist,
    hip opens shoulder-hip-knee, knee opens hip-knee-ankle, and ankle
    opens knee-ankle-hallux; each for the left and right side.
    """
    triples = {
        "shoulder": ("hip", "shoulder", "elbow"),
        "elbow": ("shoulder", "elbow", "wrist"),
        "hip": ("shoulder", "hip", "knee"),
        "knee": ("hip", "knee", "ankle"),
        "ankle": ("knee", "ankle", "hallux"),
    }
    out = []
    for kind in ("shoulder", "elbow", "hip", "knee", "ankle"):
        proximal, axis, distal = triples[kind]
        for side in ("left", "right"):
            out.append(JointDefinition(
                name=f"{side}_{kind}",
                proximal=f"{side}_{proximal}",
                axis=f"{side}_{axis}",
                distal=f"{side}_{distal}"))
    # Reorder to canonical (left/right within each kind already adjacent).
    by_name = {j.name: j for j in out}
    return [by_name[n] for n in JOINT_NAMES]


def angle_series(seq: PoseSequence, joint: JointDefinition,
                 min_visibility: float = DEFAULT_MIN_VISIBILITY) -> AngleSeries:
    """Compute one angle sample per frame of ``seq`` for ``joint``.

    Failures never abort the series: a frame lacking any of the three
    keypoints yields a missing sample with reason ``absent_keypoint``, one
    where any visibility falls below ``min_visibility`` yields
    ``low_visibility``, and coincident keypoints yield
    ``degenerate_geometry``.
    """
    if not 0.0 <= min_visibility <= 1.0:
        raise ValidationError(
            f"min_visibility must be in [0, 1], got {min_visibility}")
    samples: List[AngleSample] = []
    names = (joint.proximal, joint.axis, joint.distal)
    for frame in seq.frames:
        kps = [frame.keypoints.get(n) for n in names]
        if any(kp is None for kp in kps):
            samples.append(AngleSample(frame.frame_index, None,
                                       MISSING_ABSENT_KEYPOINT))
            continue
        if any(kp.visibility < min_visibility for kp in kps):
            samples.append(AngleSample(frame.frame_index, None,
                                       MISSING_LOW_VISIBILITY))
            continue
        try:
            angle = joint_angle(kps[0].point, kps[1].point, kps[2].point)
        except DegenerateGeometryError:
            samples.append(AngleSample(frame.frame_index, None,
                                       MISSING_DEGENERATE))
            continue
        samples.append(AngleSample(frame.frame_index, angle))
    return AngleSeries(joint=joint.name, samples=samples)


def angle_series_set(seq: PoseSequence,
                     min_visibility: float = DEFAULT_MIN_VISIBILITY,
                     joints: Optional[List[JointDefinition]] = None,
                     ) -> Dict[str, AngleSeries]:
    """Angle series for every joint of the standard set (or ``joints``)."""
    if joints is None:
        joints = standard_joint_set()
    return {j.name: angle_series(seq, j, min_visibility) for j in joints}
