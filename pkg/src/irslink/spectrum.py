"""Transmit power spectral density G(f) = sum_k g_k(f) v_k(f) v_k^H(f).

A frequency grid covers the band with S equal sub-bands and a midpoint
quadrature rule inside each; per-beam scalar densities g_k are piecewise
constant over sub-bands and the beamformers are frequency-flat ("central")
or retuned per sub-band ("adapted").  Powers in watts, frequencies in Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import SPEED_OF_LIGHT

BF_CENTRAL = "central"
BF_ADAPTED = "adapted"
LOADING_EQUAL = "equal"
LOADING_RANDOM = "random"
MODE_FLAT = "single_carrier_flat"
MODE_SUB_BANDS = "sub_bands"


class ConfigError(ValueError):
    """Inconsistent spectrum or experiment configuration."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform sub-band tiling of the band with midpoint quadrature nodes."""

    center: float
    bandwidth: float
    subband_width: float
    nodes_per_subband: int = 8

    def __post_init__(self):
        if not (self.center > 0 and self.bandwidth > 0 and self.subband_width > 0):
            raise ConfigError("grid frequencies and widths must be > 0")
        if self.nodes_per_subband < 1:
            raise ConfigError("nodes_per_subband must be >= 1")
        ratio = self.bandwidth / self.subband_width
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError("bandwidth must be a positive integer multiple of the sub-band width")

    @property
    def num_subbands(self) -> int:
        return int(round(self.bandwidth / self.subband_width))

    @property
    def subband_centers(self) -> np.ndarray:
        s = np.arange(1, self.num_subbands + 1)
        return self.center + self.subband_width * (s - (self.num_subbands + 1) / 2.0)

    @property
    def num_nodes(self) -> int:
        return self.num_subbands * self.nodes_per_subband

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Quadrature nodes, weights and owning sub-band index (0-based)."""
        n = self.nodes_per_subband
        offs = self.subband_width * ((np.arange(n) + 0.5) / n - 0.5)
        freqs = (self.subband_centers[:, None] + offs[None, :]).reshape(-1)
        weights = np.full(freqs.shape, self.subband_width / n)
        owner = np.repeat(np.arange(self.num_subbands), n)
        return freqs, weights, owner

    def subband_of(self, frequency: float) -> int:
        centers = self.subband_centers
        idx = int(np.argmin(np.abs(centers - frequency)))
        if abs(frequency - centers[idx]) > self.subband_width / 2 + 1e-6:
            raise ConfigError(f"frequency {frequency:g} Hz lies outside every sub-band")
        return idx


@dataclass(frozen=True)
class BeamSpec:
    """One transmit beam: steering direction plus resolved per-sub-band powers."""

    direction: float                  # radians
    subband_powers: np.ndarray        # (S,) watts, zero off allocation
    beamforming: str = BF_CENTRAL
    loading: str = LOADING_EQUAL

    def __post_init__(self):
        p = np.asarray(self.subband_powers, float)
        object.__setattr__(self, "subband_powers", p)
        if p.ndim != 1 or p.size < 1:
            raise ConfigError("subband_powers must be a 1-D vector")
        if np.any(p < 0):
            raise ConfigError("sub-band powers must be >= 0")
        if not np.any(p > 0):
            raise ConfigError("a beam must carry power in at least one sub-band")
        if self.beamforming not in (BF_CENTRAL, BF_ADAPTED):
            raise ConfigError(f"unknown beamforming mode {self.beamforming!r}")

    @property
    def total_power(self) -> float:
        return float(np.sum(self.subband_powers))

    @property
    def allocated(self) -> np.ndarray:
        return np.nonzero(self.subband_powers > 0)[0]


@dataclass(frozen=True)
class SpectrumSpec:
    grid: FrequencyGrid
    beams: tuple
    mode: str = MODE_SUB_BANDS

    def __post_init__(self):
        if self.mode not in (MODE_FLAT, MODE_SUB_BANDS):
            raise ConfigError(f"unknown spectrum mode {self.mode!r}")
        if len(self.beams) < 1:
            raise ConfigError("a spectrum needs at least one beam")
        for b in self.beams:
            if b.subband_powers.size != self.grid.num_subbands:
                raise ConfigError("beam sub-band powers inconsistent with grid sub-band count")

    @property
    def total_power(self) -> float:
        return float(sum(b.total_power for b in self.beams))


def random_allocation(num_subbands: int, n_alloc: int, seed: int) -> tuple:
    """Pick `n_alloc` of `num_subbands` slots, 0-based sorted indices.

    The lowest and highest slots are always occupied (the allocation spans the
    whole bandwidth) and the remaining ones are drawn uniformly from the
    interior; with a single allocated slot the position is uniform.
    """
    if n_alloc < 1:
        raise ConfigError("n_alloc must be >= 1")
    if n_alloc > num_subbands:
        raise ConfigError(f"cannot allocate {n_alloc} of {num_subbands} sub-bands")
    if n_alloc == num_subbands:
        return tuple(range(num_subbands))
    rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, 0xA110C)))
    if n_alloc == 1:
        return (int(rng.integers(0, num_subbands)),)
    inner = rng.choice(np.arange(1, num_subbands - 1), size=n_alloc - 2, replace=False)
    return tuple(sorted([0, num_subbands - 1] + [int(i) for i in inner]))


def make_beam(grid: FrequencyGrid, direction: float, subbands, total_power: float,
              loading: str = LOADING_EQUAL, seed: int = 0,
              beamforming: str = BF_CENTRAL) -> BeamSpec:
    """Resolve a power loading over the allocated `subbands` (0-based indices)."""
    idx = np.asarray(sorted(set(int(s) for s in subbands)), int)
    if idx.size < 1:
        raise ConfigError("at least one sub-band must be allocated")
    if idx.min() < 0 or idx.max() >= grid.num_subbands:
        raise ConfigError("allocated sub-band index out of range")
    powers = np.zeros(grid.num_subbands)
    if loading == LOADING_EQUAL:
        powers[idx] = total_power / idx.size
    elif loading == LOADING_RANDOM:
        rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, 0x10AD)))
        draws = rng.uniform(size=idx.size)
        powers[idx] = total_power * draws / np.sum(draws)
    else:
        raise ConfigError(f"unknown loading {loading!r}")
    return BeamSpec(direction=direction, subband_powers=powers,
                    beamforming=beamforming, loading=loading)


def flat_spectrum(grid: FrequencyGrid, direction: float, total_power: float,
                  beamforming: str = BF_CENTRAL) -> SpectrumSpec:
    """Single-carrier UWB spectrum: g(f) = P / B_w over the whole band."""
    beam = make_beam(grid, direction, range(grid.num_subbands), total_power,
                     loading=LOADING_EQUAL, beamforming=beamforming)
    return SpectrumSpec(grid=grid, beams=(beam,), mode=MODE_FLAT)


def beamformer(beam: BeamSpec, frequency: float, num_antennas: int,
               spacing: float, grid: FrequencyGrid) -> np.ndarray:
    """Unit-norm ULA steering vector for one beam at `frequency`.

    Central mode designs the phases at the band center for every f; adapted
    mode uses the center of the sub-band containing f.
    """
    if beam.beamforming == BF_CENTRAL:
        f_design = grid.center
    else:
        f_design = float(grid.subband_centers[grid.subband_of(frequency)])
    m = np.arange(num_antennas)
    phase = 2.0 * math.pi * m * (spacing / SPEED_OF_LIGHT) * f_design * math.sin(beam.direction)
    return np.exp(1j * phase) / math.sqrt(num_antennas)


@dataclass(frozen=True)
class PsdBundle:
    """G(f) sampled on the grid: per-node scalar densities and beam vectors."""

    grid: FrequencyGrid
    frequencies: np.ndarray   # (F,)
    weights: np.ndarray       # (F,) quadrature weights, sum = bandwidth
    subband_index: np.ndarray  # (F,)
    g: np.ndarray             # (K, F) W/Hz
    vectors: np.ndarray       # (K, F, M1) unit-norm beamformers

    @property
    def num_beams(self) -> int:
        return self.g.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.frequencies.size

    def psd_matrix(self, node: int) -> np.ndarray:
        vecs = self.vectors[:, node, :]
        return (vecs.T * self.g[:, node]) @ vecs.conj()

    def total_power(self) -> float:
        return float(np.sum(np.sum(self.g, axis=0) * self.weights))


def build_psd(spec: SpectrumSpec, num_antennas: int, spacing: float) -> PsdBundle:
    """Sample every beam's density and steering vector on the grid nodes."""
    freqs, weights, owner = spec.grid.nodes()
    K = len(spec.beams)
    g = np.zeros((K, freqs.size))
    vectors = np.zeros((K, freqs.size, num_antennas), dtype=complex)
    bar_b = spec.grid.subband_width
    for k, beam in enumerate(spec.beams):
        g[k] = beam.subband_powers[owner] / bar_b
        for n, f in enumerate(freqs):
            vectors[k, n] = beamformer(beam, float(f), num_antennas, spacing, spec.grid)
    return PsdBundle(grid=spec.grid, frequencies=freqs, weights=weights,
                     subband_index=owner, g=g, vectors=vectors)
