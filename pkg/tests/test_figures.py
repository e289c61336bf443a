import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from gaitnorm import (DetectionConfig, ValidationError, annotate_frames,
                      build_normative_model, build_report, frame_statuses,
                      generate_cohort, generate_cycle, render_band_plot,
                      render_heatmap, render_multi_joint, severity_matrix,
                      write_figure, z_scores)
from gaitnorm.detect import STATUS_NORMAL, STATUS_UNKNOWN
from gaitnorm.kinematics import JOINT_NAMES
from gaitnorm.synth import demo_profiles, generate_pose_sequence
from gaitnorm.pose_io import CycleAnnotation


@pytest.fixture(scope="module")
def model():
    return build_normative_model(generate_cohort(demo_profiles(), 40, seed=90),
                                 101)


@pytest.fixture(scope="module")
def cycle():
    return generate_cycle(demo_profiles(), 101, seed=990)


def _svg_root(doc):
    return ET.fromstring(doc.svg)


def _count(doc, tag, cls=None):
    ns = "{http://www.w3.org/2000/svg}"
    nodes = _svg_root(doc).iter(f"{ns}{tag}")
    if cls is None:
        return sum(1 for _ in nodes)
    return sum(1 for n in nodes if n.get("class") == cls)


class TestBandPlot:
    def test_model_only(self, model):
        doc = render_band_plot(model, "left_knee")
        kinds = {s["kind"]: s["points"] for s in doc.sidecar["series"]}
        assert kinds == {"mean": 101, "band": 202}
        assert _count(doc, "polyline", "mean") == 1
        assert _count(doc, "polygon", "band") == 1
        assert _count(doc, "circle") == 0

    def test_overlay_counts_match_svg(self, model, cycle):
        cfg = DetectionConfig()
        z = z_scores(cycle, model, cfg)
        flags = np.abs(z["left_knee"]) > cfg.k
        doc = render_band_plot(model, "left_knee", overlay=(cycle, flags))
        kinds = {s["kind"]: s["points"] for s in doc.sidecar["series"]}
        assert kinds["normal"] + kinds["abnormal"] == 101
        assert kinds["abnormal"] == int(flags.sum())
        assert _count(doc, "circle", "normal") == kinds["normal"]
        assert _count(doc, "circle", "abnormal") == kinds["abnormal"]

    def test_zero_flags_zero_abnormal_points(self, model, cycle):
        flags = np.zeros(101, dtype=bool)
        doc = render_band_plot(model, "left_knee", overlay=(cycle, flags))
        kinds = {s["kind"]: s["points"] for s in doc.sidecar["series"]}
        assert kinds["abnormal"] == 0
        assert _count(doc, "circle", "abnormal") == 0

    def test_ten_flags(self, model, cycle):
        flags = np.zeros(101, dtype=bool)
        flags[10:20] = True
        doc = render_band_plot(model, "left_knee", overlay=(cycle, flags))
        kinds = {s["kind"]: s["points"] for s in doc.sidecar["series"]}
        assert kinds["abnormal"] == 10

    def test_absent_joint_rejected(self, model):
        with pytest.raises(ValidationError, match="absent"):
            render_band_plot(model, "left_eyebrow")

    def test_deterministic(self, model, cycle):
        flags = np.zeros(101, dtype=bool)
        a = render_band_plot(model, "left_knee", overlay=(cycle, flags))
        b = render_band_plot(model, "left_knee", overlay=(cycle, flags))
        assert a.svg == b.svg and a.sidecar == b.sidecar


class TestMultiJoint:
    def test_all_joints_rendered(self, model, cycle):
        flags = {j: np.zeros(101, dtype=bool) for j in JOINT_NAMES}
        doc = render_multi_joint(flags, cycle, model)
        panels = doc.sidecar["panels"]
        assert len(panels) == 10
        assert all(p["rendered"] for p in panels)
        assert sum(p["abnormal"] for p in panels) == 0

    def test_invalid_joints_get_placeholders(self, model, cycle):
        flags = {j: np.zeros(101, dtype=bool) for j in JOINT_NAMES}
        broken = generate_cycle(demo_profiles(), 101, seed=991)
        for j in ("left_hip", "right_hip", "left_ankle"):
            broken.valid[j] = False
        doc = render_multi_joint(flags, broken, model)
        rendered = [p for p in doc.sidecar["panels"] if p["rendered"]]
        placeholders = [p for p in doc.sidecar["panels"] if not p["rendered"]]
        assert len(rendered) == 7 and len(placeholders) == 3
        assert doc.svg.count("insufficient data") == 3

    def test_panel_order_is_canonical(self, model, cycle):
        flags = {j: np.zeros(101, dtype=bool) for j in JOINT_NAMES}
        doc = render_multi_joint(flags, cycle, model)
        assert [p["joint"] for p in doc.sidecar["panels"]] == list(JOINT_NAMES)


class TestHeatmap:
    def test_zero_matrix_uniformly_light(self):
        doc = render_heatmap(np.zeros((10, 101)))
        assert doc.sidecar["max_severity"] == 0.0
        root_cells = _count(doc, "rect", "cell")
        assert root_cells == 10 * 101
        assert doc.svg.count("rgb(255,255,255)") == 10 * 101

    def test_single_saturated_cell(self):
        matrix = np.zeros((10, 101))
        matrix[3, 40] = 1.0
        doc = render_heatmap(matrix)
        assert doc.svg.count("rgb(0,0,0)") == 1
        assert doc.sidecar["max_severity"] == 1.0

    def test_shape_in_sidecar(self):
        doc = render_heatmap(np.zeros((10, 101)))
        assert doc.sidecar["rows"] == 10
        assert doc.sidecar["cols"] == 101
        assert doc.sidecar["joints"] == list(JOINT_NAMES)

    def test_nan_rows_reported_blank(self):
        matrix = np.zeros((10, 101))
        matrix[2, :] = np.nan
        doc = render_heatmap(matrix)
        assert doc.sidecar["blank_rows"] == [JOINT_NAMES[2]]

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            render_heatmap(np.zeros((0, 0)))

    def test_darkness_monotone_in_severity(self):
        matrix = np.zeros((10, 101))
        matrix[0, 0] = 0.25
        matrix[0, 1] = 0.75
        doc = render_heatmap(matrix)
        # darker cell = smaller rgb value
        assert "rgb(191,191,191)" in doc.svg  # 0.25
        assert "rgb(64,64,64)" in doc.svg     # 0.75


class TestAnnotateFrames:
    def test_statuses_applied(self, model):
        seq, anns = generate_pose_sequence(n_cycles=2, frames_per_cycle=20,
                                           seed=17, atypical_last=False)
        flags = {j: np.zeros(101, dtype=bool) for j in JOINT_NAMES}
        statuses = frame_statuses([(anns[0], flags)], seq.frame_indices(), 101)
        records = annotate_frames(seq, statuses)
        assert len(records) == len(seq.frames)
        first = records[0]
        assert first["joint_status"]["left_knee"] == STATUS_NORMAL
        # frames after the first cycle have no flags -> unknown
        assert records[-1]["joint_status"]["left_knee"] == STATUS_UNKNOWN
        assert set(first["keypoints"]) >= {"left_knee", "right_hallux"}
        assert ["left_hip", "left_knee"] in first["edges"]

    def test_missing_status_means_unknown(self):
        seq, _ = generate_pose_sequence(n_cycles=1, frames_per_cycle=10,
                                        seed=18)
        records = annotate_frames(seq, [])
        assert all(v == STATUS_UNKNOWN
                   for v in records[0]["joint_status"].values())


class TestWriteFigure:
    def test_files_written(self, tmp_path, model):
        doc = render_band_plot(model, "left_knee")
        path = tmp_path / "band.svg"
        write_figure(doc, path)
        assert path.read_text().startswith("<svg")
        sidecar = json.loads((tmp_path / "band.svg.json").read_text())
        assert sidecar == doc.sidecar


class TestEndToEndFigures:
    def test_report_to_figures(self, model, cycle):
        report = build_report(cycle, model, video_id="demo",
                              annotation=CycleAnnotation(0, 30, "typical"))
        heat = render_heatmap(severity_matrix(report.z))
        assert heat.sidecar["rows"] == 10
        multi = render_multi_joint(report.flag, cycle, model)
        assert sum(p["rendered"] for p in multi.sidecar["panels"]) == 10
