import json

import numpy as np
import pytest

from gazefuse.calibration import (
    CalibrationTargets,
    PolyCalibration,
    VelocityCalibration,
    apply_calibration,
    display_delay,
    extract_saccade_displacements,
    fit_poly,
    fit_velocity_map,
    load_calibration,
    poly_features,
    save_calibration,
)
from gazefuse.errors import DegenerateCalibrationError, DimensionError, InputError
from gazefuse.traces import ChannelTrace, VelocityTrace
from synth import DT, step_path

GRID12 = np.array([(x, y) for y in (-3.0, 0.0, 3.0) for x in (-6.0, -2.0, 2.0, 6.0)])


class TestPoly:
    def test_exact_quadratic(self):
        rng = np.random.default_rng(0)
        raw = rng.uniform(-5, 5, (9, 2))
        cx, cy = rng.normal(size=6), rng.normal(size=6)
        F = poly_features(raw)
        pc = fit_poly(raw, np.column_stack([F @ cx, F @ cy]))
        assert pc.rms_residual <= 1e-9

    def test_identity(self):
        raw = GRID12 * 1.7 + 0.3
        pc = fit_poly(raw, raw)
        np.testing.assert_allclose(pc.coef_x, [0, 1, 0, 0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(pc.coef_y, [0, 0, 1, 0, 0, 0], atol=1e-12)

    def test_twelve_point_distortion(self):
        cx = np.array([0.5, 0.1, 0.01, 0.002, -0.003, 0.001])
        cy = np.array([-0.2, 0.005, 0.08, -0.001, 0.0005, 0.002])
        raw = GRID12 * 10.0
        F = poly_features(raw)
        pc = fit_poly(raw, np.column_stack([F @ cx, F @ cy]))
        np.testing.assert_allclose(pc.coef_x, cx, atol=1e-6)
        np.testing.assert_allclose(pc.coef_y, cy, atol=1e-6)
        np.testing.assert_allclose(pc(raw), np.column_stack([F @ cx, F @ cy]), atol=1e-9)

    def test_degenerate(self):
        with pytest.raises(DegenerateCalibrationError):
            fit_poly(GRID12[:5], GRID12[:5])
        line = np.column_stack([np.arange(8.0), np.arange(8.0)])
        with pytest.raises(DegenerateCalibrationError):
            fit_poly(line, line)
        with pytest.raises(DimensionError):
            fit_poly(GRID12, GRID12[:-1])

    def test_coefficient_count(self):
        with pytest.raises(DimensionError):
            PolyCalibration(np.zeros(5), np.zeros(6))


class TestVelocityMap:
    def test_identity(self):
        d = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
        np.testing.assert_allclose(fit_velocity_map(d, d).M, np.eye(2), atol=1e-14)

    def test_half_scale(self):
        t = np.array([[4.0, 0.0], [0.0, -3.0]])
        np.testing.assert_allclose(fit_velocity_map(0.5 * t, t).M, 2 * np.eye(2), atol=1e-14)

    def test_round_trip_eleven_transitions(self):
        rng = np.random.default_rng(1)
        M = np.array([[0.1, 0.01], [-0.02, 0.08]])
        raw = rng.normal(size=(11, 2)) * 40
        vc = fit_velocity_map(raw, raw @ M.T)
        np.testing.assert_allclose(vc.M, M, atol=1e-6)
        assert vc.condition == pytest.approx(np.linalg.cond(M))

    def test_equivariant(self):
        rng = np.random.default_rng(2)
        raw, tgt = rng.normal(size=(6, 2)), rng.normal(size=(6, 2))
        np.testing.assert_allclose(fit_velocity_map(3 * raw, tgt).M, fit_velocity_map(raw, tgt).M / 3, atol=1e-12)

    def test_rank_deficient(self):
        with pytest.raises(DegenerateCalibrationError):
            fit_velocity_map([[1.0, 2.0], [2.0, 4.0]], [[1.0, 0.0], [2.0, 0.0]])

    def test_scaling_map_scales_velocity(self):
        v = np.random.default_rng(3).normal(size=(10, 2))
        M = np.array([[1.0, 0.2], [0.1, 0.9]])
        np.testing.assert_allclose(VelocityCalibration(2.5 * M)(v), 2.5 * VelocityCalibration(M)(v))


@pytest.mark.parametrize("xy, expected", [((0, 0), -2.35), ((1, 0), 19.05), ((0, 1), 1.91)])
def test_display_delay(xy, expected):
    assert display_delay(*xy) == pytest.approx(expected, abs=1e-12)
    if xy == (0, 0):
        assert display_delay(0, 0) == -2.35


def test_display_delay_affine():
    rng = np.random.default_rng(4)
    for x, y in rng.uniform(-500, 500, (20, 2)):
        assert display_delay(x + 1, y) - display_delay(x, y) == pytest.approx(21.4, abs=1e-9)


def test_apply_identity_and_round_trip():
    rng = np.random.default_rng(5)
    P = ChannelTrace(rng.normal(size=(30, 2)), DT)
    i = VelocityTrace(rng.normal(size=(29, 2)), DT)
    p2, i2 = apply_calibration(P, i, PolyCalibration.identity(), VelocityCalibration.identity())
    np.testing.assert_array_equal(p2.xy, P.xy)
    np.testing.assert_array_equal(i2.v, i.v)

    gain, offset = np.array([10.0, 12.0]), np.array([2.0, -1.0])
    deg = rng.uniform(-6, 6, (12, 2))
    pc = fit_poly(deg * gain + offset, deg)
    vc = fit_velocity_map(np.diff(deg, axis=0) * gain, np.diff(deg, axis=0))
    P = ChannelTrace(deg * gain + offset, DT)
    i = VelocityTrace(np.diff(deg, axis=0) * gain, DT)
    p3, i3 = apply_calibration(P, i, pc, vc)
    np.testing.assert_allclose(p3.xy, deg, atol=1e-6)
    np.testing.assert_allclose(i3.v, np.diff(deg, axis=0), atol=1e-6)


def test_saccade_displacements_recover_steps():
    onsets = np.arange(5) * 1.0
    pos = np.array([[0, 0], [5, 0], [5, 4], [-3, 4], [-3, -2]], dtype=float)
    g = step_path(onsets, pos, 5.0) * 7.0
    v = VelocityTrace(np.diff(g, axis=0), DT)
    raw, tgt = extract_saccade_displacements(v, CalibrationTargets(onsets, pos))
    np.testing.assert_allclose(tgt, np.diff(pos, axis=0))
    np.testing.assert_allclose(raw, 7.0 * np.diff(pos, axis=0), atol=1e-9)
    np.testing.assert_allclose(fit_velocity_map(raw, tgt).M, np.eye(2) / 7.0, atol=1e-9)


def test_targets_must_increase():
    with pytest.raises(InputError):
        CalibrationTargets([0.0, 0.0], [[0, 0], [1, 1]])


def test_save_load(tmp_path):
    pc = fit_poly(GRID12 * 3, GRID12)
    vc = VelocityCalibration(np.array([[0.1, 0.0], [0.0, 0.2]]), 0.01)
    path = tmp_path / "cal.json"
    save_calibration(path, pc, vc)
    doc = json.loads(path.read_text())
    assert set(doc) == {"poly", "velocity", "residuals"}
    pc2, vc2 = load_calibration(path)
    np.testing.assert_array_equal(pc2.coef_x, pc.coef_x)
    np.testing.assert_array_equal(vc2.M, vc.M)
    (tmp_path / "bad.json").write_text("{\"poly\": 3}")
    with pytest.raises(InputError):
        load_calibration(tmp_path / "bad.json")
    with pytest.raises(InputError):
        load_calibration(tmp_path / "missing.json")
