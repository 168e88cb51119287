"""Geometry construction, derived tensors, and image-theorem paths."""

import math

import numpy as np
import pytest

import irslink as il
from irslink.geometry import SPEED_OF_LIGHT, GeometryError

from conftest import make_scenario


def scalar_distance(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def test_paper_placement_center_distances():
    scen = make_scenario(rows=64, cols=64, bs_antennas=16, ue_antennas=8)
    assert np.linalg.norm(scen.bs.center - scen.irs.plane_origin) == pytest.approx(8.0, abs=1e-12)
    assert np.linalg.norm(scen.ue.center - scen.irs.plane_origin) == pytest.approx(15.0, abs=1e-12)
    assert scen.num_elements == 64 * 64


def test_single_element_on_normal():
    scen = make_scenario(rows=1, cols=1, bs_antennas=1, ue_antennas=1,
                         bs_distance=1.0, ue_distance=1.0,
                         bs_angle_deg=0.0, ue_angle_deg=0.0)
    assert scen.path_lengths()[0, 0, 0] == pytest.approx(2.0, abs=1e-12)
    assert scen.bs_cos_angle[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert scen.ue_cos_angle[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_grid_spacing_and_delay_oracle():
    # Brute-force recomputation of every distance from raw coordinates.
    scen = make_scenario(rows=2, cols=2, spacing=5e-4)
    pos = scen.irs_positions
    assert abs(scalar_distance(pos[0], pos[1]) - 5e-4) < 1e-15
    assert abs(scalar_distance(pos[0], pos[2]) - 5e-4) < 1e-15
    delays = scen.path_delays()
    for i in range(scen.num_bs_antennas):
        for j in range(scen.num_ue_antennas):
            for ell in range(scen.num_elements):
                d = (scalar_distance(scen.bs_positions[i], pos[ell])
                     + scalar_distance(scen.ue_positions[j], pos[ell]))
                assert delays[i, j, ell] == pytest.approx(d / SPEED_OF_LIGHT, rel=1e-14)


def test_delay_distance_consistency_and_triangle():
    scen = make_scenario(rows=3, cols=3)
    d = scen.path_lengths()
    tau = scen.path_delays()
    assert np.max(np.abs(SPEED_OF_LIGHT * tau - d)) <= 8 * np.finfo(float).eps * d.max()
    direct = np.linalg.norm(scen.bs_positions[:, None, :] - scen.ue_positions[None, :, :],
                            axis=2)
    assert np.all(d >= direct[:, :, None] * (1 - 1e-12))


def test_swapping_arrays_transposes_hop_tensors():
    scen = make_scenario()
    swapped = il.build_scenario(scen.ue, scen.bs, scen.irs)
    np.testing.assert_array_equal(swapped.bs_distances, scen.ue_distances)
    np.testing.assert_array_equal(swapped.ue_distances, scen.bs_distances)


def test_image_path_textbook_mirror():
    bs = il.ArraySpec(num_elements=1, spacing=1e-3, center=np.array([0.0, 1.0, 0.0]),
                      orientation=np.array([0.0, -1.0, 0.0]))
    ue = il.ArraySpec(num_elements=1, spacing=1e-3, center=np.array([2.0, 1.0, 0.0]),
                      orientation=np.array([0.0, -1.0, 0.0]))
    irs = il.IrsSpec.square(1, 1e-3, plane_origin=(1.0, 0.0, 0.0))
    wall = il.ReflectorSpec(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]),
                            reflection_coefficient=1.0, reflector_id=0)
    scen = il.build_scenario(bs, ue, irs, [wall])
    paths = il.image_paths(scen, 0)
    assert paths.lengths[0, 0] == pytest.approx(math.sqrt(8.0), rel=1e-12)
    assert paths.delays[0, 0] == pytest.approx(math.sqrt(8.0) / SPEED_OF_LIGHT, rel=1e-12)


def test_image_path_against_fermat_search():
    # Independent oracle: brute minimization of the reflected path length over
    # reflection points on the wall plane.
    from scipy.optimize import minimize

    scen = make_scenario(rows=1, cols=1, bs_antennas=1, ue_antennas=1,
                         wall=0.3 + 0.0j)
    paths = scen.image_paths[0]
    bs = scen.bs_positions[0]
    ue = scen.ue_positions[0]

    def total_len(xz):
        r = np.array([xz[0], 0.0, xz[1]])
        return np.linalg.norm(bs - r) + np.linalg.norm(r - ue)

    best = minimize(total_len, x0=np.zeros(2), method="Nelder-Mead",
                    options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    assert paths.lengths[0, 0] == pytest.approx(best.fun, rel=1e-9)


def test_image_path_degenerate_on_plane():
    bs = il.ArraySpec(num_elements=1, spacing=1e-3, center=np.array([0.0, 1.0, 0.0]),
                      orientation=np.array([0.0, -1.0, 0.0]))
    ue = il.ArraySpec(num_elements=1, spacing=1e-3, center=np.array([2.0, 1e-15, 0.0]),
                      orientation=np.array([0.0, -1.0, 0.0]))
    irs = il.IrsSpec.square(1, 1e-3, plane_origin=(1.0, -1e-6, 0.0))
    wall = il.ReflectorSpec(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]),
                            reflection_coefficient=1.0, reflector_id=0)
    with pytest.raises(GeometryError):
        il.build_scenario(bs, ue, irs, [wall])


def test_node_behind_plane_rejected():
    with pytest.raises(GeometryError):
        make_scenario(ue_angle_deg=120.0)  # cos < 0 puts the UE behind the wall


def test_spec_validation():
    with pytest.raises(GeometryError):
        il.ArraySpec(num_elements=4, spacing=0.0, center=np.zeros(3),
                     orientation=np.array([0.0, 1.0, 0.0]))
    with pytest.raises(GeometryError):
        il.ArraySpec(num_elements=4, spacing=1e-3, center=np.zeros(3),
                     orientation=np.array([0.0, 2.0, 0.0]))
    with pytest.raises(GeometryError):
        il.ReflectorSpec(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]),
                         reflection_coefficient=1.5)
    with pytest.raises(GeometryError):
        il.IrsSpec(rows=0, cols=4, element_spacing=1e-3,
                   plane_origin=np.zeros(3), plane_normal=np.array([0.0, 1.0, 0.0]))


def test_row_major_element_order():
    scen = make_scenario(rows=2, cols=3)
    pos = scen.irs_positions
    # consecutive elements within a row step along the horizontal axis
    step_col = pos[1] - pos[0]
    step_row = pos[3] - pos[0]
    assert abs(step_col[0]) == pytest.approx(5e-4, abs=1e-15)
    assert step_col[1] == step_col[2] == 0.0
    assert abs(step_row[2]) == pytest.approx(5e-4, abs=1e-15)


def test_scenario_json_roundtrip(tmp_path):
    scen = make_scenario(wall=0.5 * np.exp(1j * np.pi), bs_gain_model="sectored_3gpp")
    path = tmp_path / "scenario.json"
    il.save_scenario(scen, path)
    loaded = il.load_scenario(path)
    np.testing.assert_allclose(loaded.bs_distances, scen.bs_distances, rtol=1e-15)
    np.testing.assert_allclose(loaded.ue_distances, scen.ue_distances, rtol=1e-15)
    assert loaded.bs.element_gain_model == "sectored_3gpp"
    assert len(loaded.reflectors) == 1
    assert loaded.reflectors[0].reflection_coefficient == pytest.approx(
        scen.reflectors[0].reflection_coefficient, rel=1e-12)


def test_steering_angle_matches_layout_angles():
    scen = make_scenario(bs_angle_deg=45.0, ue_angle_deg=30.0)
    beta = il.steering_angle(scen.bs, scen.irs.plane_origin)
    assert math.degrees(beta) == pytest.approx(45.0, abs=1e-9)


def test_sectored_gain_peak_and_floor():
    from irslink.geometry import sectored_gain_dbi

    peak = sectored_gain_dbi(np.array(1.0), np.array(0.0), np.array(0.0), 8.0)
    assert peak == pytest.approx(8.0)
    floor = sectored_gain_dbi(np.array(-1.0), np.array(0.0), np.array(0.0), 8.0)
    assert floor == pytest.approx(8.0 - 30.0)
