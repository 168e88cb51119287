"""Shared builders for the test scenarios and spectra."""

from __future__ import annotations

import math

import numpy as np
import pytest

import irslink as il
from irslink.spectrum import FrequencyGrid, PsdBundle


def make_scenario(rows=2, cols=3, *, bs_antennas=3, ue_antennas=2, spacing=5e-4,
                  bs_distance=8.0, ue_distance=15.0, bs_angle_deg=45.0,
                  ue_angle_deg=30.0, wall=None, bs_gain_model="isotropic"):
    return il.two_hop_layout(
        bs_antennas=bs_antennas, ue_antennas=ue_antennas, array_spacing=spacing,
        irs_rows=rows, irs_cols=cols, irs_spacing=spacing,
        bs_distance=bs_distance, ue_distance=ue_distance,
        bs_angle=math.radians(bs_angle_deg), ue_angle=math.radians(ue_angle_deg),
        bs_gain_model=bs_gain_model, wall_reflection=wall)


def make_bundle(scenario, *, center=300e9, bandwidth=4e9, subband_width=1e9,
                nodes_per_subband=4, subbands=None, total_power=0.3,
                loading="equal", seed=0, beamforming="central", direction=None):
    grid = FrequencyGrid(center=center, bandwidth=bandwidth,
                         subband_width=subband_width,
                         nodes_per_subband=nodes_per_subband)
    if subbands is None:
        subbands = range(grid.num_subbands)
    if direction is None:
        direction = il.steering_angle(scenario.bs, scenario.irs.plane_origin)
    beam = il.make_beam(grid, direction, subbands, total_power,
                        loading=loading, seed=seed, beamforming=beamforming)
    spec = il.SpectrumSpec(grid=grid, beams=(beam,))
    return il.build_psd(spec, scenario.num_bs_antennas, scenario.bs.spacing)


def single_node_bundle(frequency, g, vectors):
    """Degenerate one-node quadrature with unit weight (monochromatic input)."""
    g = np.atleast_1d(np.asarray(g, float))
    vectors = np.asarray(vectors, complex)
    if vectors.ndim == 1:
        vectors = vectors[None, :]
    grid = FrequencyGrid(center=frequency, bandwidth=1e9, subband_width=1e9,
                         nodes_per_subband=1)
    return PsdBundle(grid=grid, frequencies=np.array([frequency]),
                     weights=np.array([1.0]), subband_index=np.array([0]),
                     g=g[:, None], vectors=vectors[:, None, :])


@pytest.fixture
def small_multipath_setup():
    scen = make_scenario(wall=0.5 * np.exp(1j * np.pi))
    resp = il.IrsResponse(center_frequency=300e9)
    shad = il.ShadowingModel(sigma_db=2.0, seed=7)
    model = il.ChannelModel(scen, resp, shad)
    bundle = make_bundle(scen, subbands=[0, 3], loading="random", seed=3,
                         beamforming="adapted")
    return scen, model, bundle
