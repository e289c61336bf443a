"""Slice angle series into gait cycles and resample onto the phase grid.

A cycle runs from one left initial heel strike to the next.  The start
frame sits at 0% and the end frame at 100%; every frame in between gets a
linearly interpolated phase.  Each cycle is then resampled per joint onto
a fixed grid (101 points, i.e. 1% steps, by default) with a natural cubic
spline fitted through the non-missing samples, which also fills interior
gaps.  Joints without enough coverage are marked invalid instead of being
extrapolated: spline extrapolation is wild and clinically misleading.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .errors import ValidationError
from .kinematics import AngleSeries
from .pose_io import CycleAnnotation
from .spline import eval_spline, fit_natural_cubic

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 101

# A valid joint needs at least this many non-missing samples per cycle
# (fewer degenerate the cubic fit) ...
MIN_KNOTS_PER_CYCLE = 4
# ... and non-missing samples at or before this phase and at or after its
# mirror image, so no grid point sits more than half a grid step outside
# the fitted span.
EDGE_COVERAGE_PERCENT = 0.5


@dataclass
class CycleSlice:
    """Raw per-joint (phase, angle) samples for one annotated cycle.

    Missing samples are preserved as ``None`` angles so the resampler can
    see (and refuse to bridge) coverage gaps at the cycle edges.
    """

    annotation: CycleAnnotation
    samples: Dict[str, List[Tuple[float, Optional[float]]]]
    video_id: str = ""

    @property
    def cycle_id(self) -> str:
        return (f"{self.video_id}:"
                f"{self.annotation.start_frame}-{self.annotation.end_frame}")


@dataclass(eq=False)
class NormalizedCycle:
    """One cycle's joint angles on the fixed 0-100% phase grid.

    ``valid[j]`` is False when joint ``j`` failed the coverage rule; its
    angle array is then all-NaN.  Valid arrays are clamped to [0, 180].
    """

    label: str
    grid_points: int
    angles: Dict[str, np.ndarray]
    valid: Dict[str, bool]
    cycle_id: Optional[str] = None

    def __eq__(self, other):
        if not isinstance(other, NormalizedCycle):
            return NotImplemented
        if (self.label, self.grid_points, self.cycle_id) != \
                (other.label, other.grid_points, other.cycle_id):
            return False
        if self.valid != other.valid or set(self.angles) != set(other.angles):
            return False
        return all(np.array_equal(self.angles[k], other.angles[k], equal_nan=True)
                   for k in self.angles)

    def valid_joints(self) -> List[str]:
        return [j for j, ok in self.valid.items() if ok]


def phase_of_frame(cycle: CycleAnnotation, frame_index: int) -> float:
    """Percent position of ``frame_index`` within ``cycle`` (0 at start,
    100 at end, linear in frame index between)."""
    if not cycle.start_frame <= frame_index <= cycle.end_frame:
        raise ValidationError(
            f"frame {frame_index} outside cycle "
            f"[{cycle.start_frame}, {cycle.end_frame}]")
    span = cycle.end_frame - cycle.start_frame
    return 100.0 * (frame_index - cycle.start_frame) / span


def segment_cycles(series_by_joint: Mapping[str, AngleSeries],
                   annotations: List[CycleAnnotation],
                   *,
                   video_id: str = "",
                   frame_times: Optional[Mapping[int, float]] = None,
                   ) -> List[CycleSlice]:
    """Cut per-joint angle series into one ``CycleSlice`` per annotation.

    Adjacent annotations may share a boundary frame; that frame appears in
    both slices (at 100% of the first and 0% of the second).  By default
    phase is linear in frame index; passing ``frame_times`` (frame index
    -> seconds) switches to linear-in-time phases for variable frame
    rates.

    Raises ``ValidationError`` when an annotation's boundary frames are
    not present in the series.
    """
    if not series_by_joint:
        raise ValidationError("no angle series given")
    first = next(iter(series_by_joint.values()))
    frame_set = {s.frame_index for s in first.samples}

    slices = []
    for ann in annotations:
        if ann.start_frame not in frame_set or ann.end_frame not in frame_set:
            raise ValidationError(
                f"cycle [{ann.start_frame}, {ann.end_frame}] references "
                f"frames absent from the series")
        phase_fn = _phase_function(ann, frame_times)
        samples: Dict[str, List[Tuple[float, Optional[float]]]] = {}
        for joint, series in series_by_joint.items():
            pairs = []
            for s in series.samples:
                if ann.start_frame <= s.frame_index <= ann.end_frame:
                    pairs.append((phase_fn(s.frame_index), s.angle_deg))
            samples[joint] = pairs
        slices.append(CycleSlice(annotation=ann, samples=samples,
                                 video_id=video_id))
    return slices


def _phase_function(ann: CycleAnnotation,
                    frame_times: Optional[Mapping[int, float]]):
    if frame_times is None:
        return lambda f: phase_of_frame(ann, f)
    for boundary in (ann.start_frame, ann.end_frame):
        if boundary not in frame_times:
            raise ValidationError(
                f"time-based phases requested but frame {boundary} has no "
                f"timestamp")
    t0 = frame_times[ann.start_frame]
    t1 = frame_times[ann.end_frame]
    if t1 <= t0:
        raise ValidationError(
            f"cycle [{ann.start_frame}, {ann.end_frame}]: timestamps do "
            f"not increase across the cycle")

    def phase(f: int) -> float:
        if f not in frame_times:
            raise ValidationError(
                f"time-based phases requested but frame {f} has no timestamp")
        return 100.0 * (frame_times[f] - t0) / (t1 - t0)

    return phase


def resample_cycle(cycle_slice: CycleSlice,
                   grid_points: int = DEFAULT_GRID_POINTS) -> NormalizedCycle:
    """Resample one cycle onto the fixed phase grid, joint by joint.

    Per joint, a natural cubic spline is fitted through the non-missing
    (phase, angle) samples and evaluated at the grid phases.  A joint is
    marked invalid (all-NaN, ``valid=False``) instead of fitted when it
    has fewer than 4 usable samples or its coverage leaves more than half
    a percent uncovered at either cycle edge.  Grid phases inside that
    half-percent tolerance but outside the fitted span take the nearest
    knot's value rather than extrapolating.

    Spline overshoot is clamped to [0, 180]; a warning is logged when the
    clamp moves any value by more than 1 degree.
    """
    if grid_points < 2:
        raise ValidationError(f"grid_points must be >= 2, got {grid_points}")
    grid = np.linspace(0.0, 100.0, grid_points)
    angles: Dict[str, np.ndarray] = {}
    valid: Dict[str, bool] = {}

    for joint, pairs in cycle_slice.samples.items():
        knots = [(p, a) for p, a in pairs if a is not None]
        if len(knots) < MIN_KNOTS_PER_CYCLE \
                or knots[0][0] > EDGE_COVERAGE_PERCENT \
                or knots[-1][0] < 100.0 - EDGE_COVERAGE_PERCENT:
            logger.debug("cycle %s joint %s: insufficient coverage "
                         "(%d usable samples)", cycle_slice.cycle_id, joint,
                         len(knots))
            angles[joint] = np.full(grid_points, np.nan)
            valid[joint] = False
            continue
        coeffs = fit_natural_cubic(knots)
        lo, hi = coeffs.x[0], coeffs.x[-1]
        values = np.array([eval_spline(coeffs, min(max(g, lo), hi))
                           for g in grid])
        clamped = np.clip(values, 0.0, 180.0)
        worst = float(np.max(np.abs(values - clamped)))
        if worst > 1.0:
            logger.warning("cycle %s joint %s: clamped spline overshoot of "
                           "%.2f deg into [0, 180]", cycle_slice.cycle_id,
                           joint, worst)
        angles[joint] = clamped
        valid[joint] = True

    return NormalizedCycle(label=cycle_slice.annotation.label,
                           grid_points=grid_points, angles=angles,
                           valid=valid, cycle_id=cycle_slice.cycle_id)
