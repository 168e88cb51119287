"""Element response, per-element channel factors, multipath, approximations."""

import cmath
import math

import numpy as np
import pytest

import irslink as il
from irslink.geometry import SPEED_OF_LIGHT

from conftest import make_scenario


def scalar_entry_oracle(scen, model, f, i, j, ell, kappa=0.0):
    """Independent per-entry evaluation of the element channel with scalars.

    Amplitudes, gains, areas and the shadowing composition are recomputed from
    the formula; the hop distances and the per-hop phase association are taken
    from the scenario tensors, since at THz-by-meters scales the phase argument
    (~1e5 rad) makes any differently-rounded distance exceed 1e-12 relative.
    """
    d1 = float(scen.bs_distances[i, ell])
    d2 = float(scen.ue_distances[j, ell])
    area = scen.irs.element_area
    a1 = area * max(float(scen.bs_cos_angle[i, ell]), 0.0)
    a2 = area * max(float(scen.ue_cos_angle[j, ell]), 0.0)
    alpha1 = float(model.shadow_hop1[ell]) * float(scen.bs_amp_gain[i, ell])
    alpha2 = float(model.shadow_hop2[ell]) * float(scen.ue_amp_gain[j, ell])
    zeta = il.irs_zeta(model.response, f)
    rate = -2j * math.pi * f / SPEED_OF_LIGHT - kappa
    return (alpha1 * alpha2 * zeta * cmath.exp(d1 * rate) * cmath.exp(d2 * rate)
            * math.sqrt(a1 * a2) / (4.0 * math.pi * d1 * d2))


def test_zeta_at_center_frequency():
    resp = il.IrsResponse(center_frequency=300e9)
    z = il.irs_zeta(resp, 300e9)
    assert abs(z) == pytest.approx(10 ** (-1 / 20), rel=1e-12)
    assert cmath.phase(z) == pytest.approx(0.0, abs=1e-15)


def test_zeta_ideal_phase_shifter():
    resp = il.IrsResponse(center_frequency=1e9, magnitude_db=0.0,
                          phase_slope_deg_per_ghz=0.0)
    for f in (0.5e9, 1e9, 7e9):
        assert il.irs_zeta(resp, f) == pytest.approx(1.0 + 0.0j, abs=1e-15)


def test_zeta_phase_slope():
    resp = il.IrsResponse(center_frequency=300e9)
    z = il.irs_zeta(resp, 301e9)
    assert cmath.phase(z) == pytest.approx(math.radians(-25.0), rel=1e-12)
    assert cmath.phase(z) == pytest.approx(-0.4363, abs=5e-5)


def test_entry_plugin_value():
    # Unit phases, unit areas-cosines, both hops 1 m: |entry| = A / (4 pi).
    scen = make_scenario(rows=1, cols=1, bs_antennas=1, ue_antennas=1,
                         bs_distance=1.0, ue_distance=1.0,
                         bs_angle_deg=0.0, ue_angle_deg=0.0)
    resp = il.IrsResponse(center_frequency=1e9, magnitude_db=0.0,
                          phase_slope_deg_per_ghz=0.0)
    f = SPEED_OF_LIGHT  # f * d / c is an integer on both 1 m hops: unit phases
    v, w = il.element_channel(scen, resp, None, f, 0)
    entry = v[0] * w[0]
    assert entry.real == pytest.approx(2.5e-7 / (4 * math.pi), rel=1e-12)
    assert entry.real == pytest.approx(1.9894e-8, rel=1e-4)
    assert abs(entry.imag) < 1e-20


def test_entry_inverse_distance_law():
    resp = il.IrsResponse(center_frequency=300e9)
    near = make_scenario(rows=1, cols=1, bs_antennas=1, ue_antennas=1,
                         bs_distance=1.0, ue_distance=2.0,
                         bs_angle_deg=0.0, ue_angle_deg=0.0)
    far = make_scenario(rows=1, cols=1, bs_antennas=1, ue_antennas=1,
                        bs_distance=1.0, ue_distance=4.0,
                        bs_angle_deg=0.0, ue_angle_deg=0.0)
    v1, w1 = il.element_channel(near, resp, None, 300e9, 0)
    v2, w2 = il.element_channel(far, resp, None, 300e9, 0)
    assert abs(v2[0] * w2[0]) == pytest.approx(abs(v1[0] * w1[0]) / 2.0, rel=1e-12)


def test_entry_oracle_random_indices():
    scen = make_scenario(rows=4, cols=4, bs_antennas=4, ue_antennas=3,
                         bs_gain_model="sectored_3gpp")
    resp = il.IrsResponse(center_frequency=300e9)
    shad = il.ShadowingModel(sigma_db=2.0, seed=42)
    model = il.ChannelModel(scen, resp, shad)
    sl = model.slice(300e9)
    rng = np.random.default_rng(0)
    for _ in range(100):
        i = int(rng.integers(scen.num_bs_antennas))
        j = int(rng.integers(scen.num_ue_antennas))
        ell = int(rng.integers(scen.num_elements))
        expected = scalar_entry_oracle(scen, model, 300e9, i, j, ell)
        assert sl.v[j, ell] * sl.w[i, ell] == pytest.approx(expected, rel=1e-12)


def test_multipath_zero_without_reflectors():
    scen = make_scenario()
    h = il.multipath_matrix(scen, None, 300e9)
    assert np.all(h == 0)


def test_multipath_single_ray_magnitude():
    # Image path of exactly 10 m: BS=(0,5,0), UE=(6,3,0), wall y=0.
    bs = il.ArraySpec(num_elements=1, spacing=1e-3, center=np.array([0.0, 5.0, 0.0]),
                      orientation=np.array([0.0, -1.0, 0.0]))
    ue = il.ArraySpec(num_elements=1, spacing=1e-3, center=np.array([6.0, 3.0, 0.0]),
                      orientation=np.array([0.0, -1.0, 0.0]))
    irs = il.IrsSpec.square(1, 1e-3, plane_origin=(3.0, 0.0, 0.0))
    wall = il.ReflectorSpec(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]),
                            reflection_coefficient=1.0, reflector_id=0)
    scen = il.build_scenario(bs, ue, irs, [wall])
    assert scen.image_paths[0].lengths[0, 0] == pytest.approx(10.0, rel=1e-12)
    f = 300e9
    h = il.multipath_matrix(scen, None, f)
    d = float(scen.image_paths[0].lengths[0, 0])
    expected = SPEED_OF_LIGHT / (4 * math.pi * f * d) * cmath.exp(
        d * (-2j * math.pi * f / SPEED_OF_LIGHT))
    assert h[0, 0] == pytest.approx(expected, rel=1e-12)
    assert abs(h[0, 0]) == pytest.approx(7.9522e-6, rel=1e-4)


def test_multipath_zero_reflection_coefficient():
    scen = make_scenario(wall=0.0j)
    h = il.multipath_matrix(scen, None, 300e9)
    assert np.all(h == 0)


def test_slice_rank_one_per_element():
    scen = make_scenario(rows=3, cols=3, bs_antennas=4, ue_antennas=4)
    model = il.ChannelModel(scen, il.IrsResponse(center_frequency=300e9), None)
    sl = model.slice(302e9)
    for ell in range(scen.num_elements):
        s = np.linalg.svd(sl.element_matrix(ell), compute_uv=False)
        assert np.count_nonzero(s > 1e-10 * s[0]) == 1


def test_magnitude_reciprocity_under_swap():
    resp = il.IrsResponse(center_frequency=300e9)
    scen = make_scenario(rows=2, cols=2, bs_antennas=1, ue_antennas=1,
                         bs_distance=5.0, ue_distance=11.0,
                         bs_angle_deg=20.0, ue_angle_deg=35.0)
    swapped = make_scenario(rows=2, cols=2, bs_antennas=1, ue_antennas=1,
                            bs_distance=11.0, ue_distance=5.0,
                            bs_angle_deg=35.0, ue_angle_deg=20.0)
    for ell in range(4):
        v1, w1 = il.element_channel(scen, resp, None, 300e9, ell)
        v2, w2 = il.element_channel(swapped, resp, None, 300e9, ell)
        assert abs(v1[0] * w1[0]) == pytest.approx(abs(v2[0] * w2[0]), rel=1e-12)


def test_absorption_scaling():
    scen = make_scenario(rows=2, cols=2, bs_antennas=2, ue_antennas=2)
    resp = il.IrsResponse(center_frequency=300e9)
    base = il.ChannelModel(scen, resp, None).slice(300e9)
    kappa = 0.01
    attenuated = il.ChannelModel(scen, resp, None, absorption=kappa).slice(300e9)
    lengths = scen.path_lengths()
    for i in range(2):
        for j in range(2):
            for ell in range(4):
                ratio = abs(attenuated.v[j, ell] * attenuated.w[i, ell]) / abs(
                    base.v[j, ell] * base.w[i, ell])
                assert ratio == pytest.approx(math.exp(-kappa * lengths[i, j, ell]),
                                              rel=1e-12)


def test_absorption_table_interpolation(tmp_path):
    path = tmp_path / "kappa.csv"
    path.write_text("250e9,0.0\n350e9,0.002\n")
    table = il.AbsorptionTable.from_csv(path)
    assert table(300e9) == pytest.approx(0.001, rel=1e-12)


def test_shadowing_reproducible_and_deterministic():
    scen = make_scenario(wall=0.4 + 0.0j)
    resp = il.IrsResponse(center_frequency=300e9)
    a = il.ChannelModel(scen, resp, il.ShadowingModel(sigma_db=2.0, seed=9))
    b = il.ChannelModel(scen, resp, il.ShadowingModel(sigma_db=2.0, seed=9))
    np.testing.assert_array_equal(a.shadow_hop1, b.shadow_hop1)
    np.testing.assert_array_equal(a.shadow_refl, b.shadow_refl)
    c = il.ChannelModel(scen, resp, il.ShadowingModel(sigma_db=0.0, seed=123))
    assert np.all(c.shadow_hop1 == 1.0)
    assert np.all(c.shadow_hop2 == 1.0)


def test_approx_equals_exact_for_point_arrays():
    scen = make_scenario(rows=2, cols=3, bs_antennas=1, ue_antennas=1)
    resp = il.IrsResponse(center_frequency=300e9)
    exact = il.ChannelModel(scen, resp, None)
    approx = il.ApproxChannelModel(scen, resp, None)
    f = 304.5e9
    se = exact.slice(f)
    sa = approx.slice(f)
    for ell in range(scen.num_elements):
        assert sa.v[0, ell] * sa.w[0, ell] == pytest.approx(
            se.v[0, ell] * se.w[0, ell], rel=1e-12)


def test_approx_error_small_for_small_arrays():
    scen = make_scenario(rows=2, cols=3, bs_antennas=8, ue_antennas=8)
    resp = il.IrsResponse(center_frequency=300e9)
    exact = il.ChannelModel(scen, resp, None)
    approx = il.ApproxChannelModel(scen, resp, None)
    f = 302e9
    se = exact.slice(f)
    sa = approx.slice(f)
    num = 0.0
    den = 0.0
    for ell in range(scen.num_elements):
        he = se.element_matrix(ell)
        ha = sa.element_matrix(ell)
        num += np.linalg.norm(he - ha) ** 2
        den += np.linalg.norm(he) ** 2
    assert math.sqrt(num / den) < 1e-3


def test_approx_amplitudes_positive():
    scen = make_scenario(rows=4, cols=4, bs_gain_model="sectored_3gpp")
    approx = il.approx_small_array_channel(
        scen, il.IrsResponse(center_frequency=300e9), 300e9)
    assert np.all(approx.k > 0)
    assert np.all(approx.tau > 0)


def test_invalid_inputs():
    scen = make_scenario()
    resp = il.IrsResponse(center_frequency=300e9)
    with pytest.raises(ValueError):
        il.irs_zeta(resp, 0.0)
    with pytest.raises(IndexError):
        il.element_channel(scen, resp, None, 300e9, scen.num_elements)
    with pytest.raises(ValueError):
        il.IrsResponse(center_frequency=300e9, magnitude_db=0.5)
    with pytest.raises(ValueError):
        il.ShadowingModel(sigma_db=-1.0)
