"""Per-frequency evaluation of the two-hop IRS channel and the multipath matrix.

Each IRS element contributes a rank-1 matrix H_l(f) = outer(v_l, w_l): v_l
holds the UE-side amplitude, phase and the element frequency response, w_l the
BS-side factors.  The channel matrix convention is rows = UE antennas,
columns = BS antennas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import SPEED_OF_LIGHT, GeometryError, Scenario

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class IrsResponse:
    """Non-controllable element frequency response: flat magnitude, linear phase."""

    center_frequency: float
    magnitude_db: float = -1.0
    phase_slope_deg_per_ghz: float = -25.0

    def __post_init__(self):
        if self.magnitude_db > 0.0:
            raise ValueError("IRS response magnitude must be <= 0 dB")
        if not self.center_frequency > 0.0:
            raise ValueError("center frequency must be > 0")


def irs_zeta(response: IrsResponse, frequency: float) -> complex:
    """Element transfer function common to all elements at `frequency`."""
    if not frequency > 0.0:
        raise ValueError("frequency must be > 0")
    amp = 10.0 ** (response.magnitude_db / 20.0)
    phase = math.radians(response.phase_slope_deg_per_ghz) * (
        (frequency - response.center_frequency) / 1e9)
    return amp * complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True)
class ShadowingModel:
    """Lognormal large-scale fading, one independent draw per path.

    `sigma_db` is the standard deviation of the underlying normal in dB;
    sigma_db = 0 yields amplitude 1 exactly.  Draws are keyed on (seed,
    path family) so they never depend on evaluation order.
    """

    sigma_db: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_db < 0.0:
            raise ValueError("sigma_db must be >= 0")

    def _draw(self, family: int, count: int) -> np.ndarray:
        rng = np.random.default_rng(
            np.random.SeedSequence((self.seed & 0xFFFFFFFFFFFFFFFF, family)))
        x = rng.standard_normal(count)
        return 10.0 ** (self.sigma_db * x / 20.0)

    def hop_draws(self, num_elements: int) -> tuple[np.ndarray, np.ndarray]:
        return self._draw(1, num_elements), self._draw(2, num_elements)

    def reflector_draws(self, num_reflectors: int) -> np.ndarray:
        return self._draw(3, num_reflectors)


@dataclass(frozen=True)
class ChannelSlice:
    """Factored channel at one frequency.

    H_l(f) = outer(v[:, l], w[:, l]) and the full matrix for a configuration
    gamma is (v * gamma) @ w.T + multipath.
    """

    frequency: float
    v: np.ndarray           # (M_ue, L) UE-side factors
    w: np.ndarray           # (M_bs, L) BS-side factors
    multipath: np.ndarray   # (M_ue, M_bs)
    kappa: float = 0.0      # molecular absorption, 1/m

    def element_matrix(self, ell: int) -> np.ndarray:
        return np.outer(self.v[:, ell], self.w[:, ell])

    def total(self, gamma: np.ndarray) -> np.ndarray:
        return (self.v * gamma[None, :]) @ self.w.T + self.multipath


class AbsorptionTable:
    """Tabulated molecular absorption kappa(f), linearly interpolated."""

    def __init__(self, frequencies: np.ndarray, kappa: np.ndarray):
        f = np.asarray(frequencies, float)
        k = np.asarray(kappa, float)
        if f.ndim != 1 or f.shape != k.shape or f.size < 1:
            raise ValueError("absorption table needs matching 1-D frequency/kappa columns")
        order = np.argsort(f)
        self.frequencies = f[order]
        self.kappa = k[order]

    def __call__(self, frequency: float) -> float:
        return float(np.interp(frequency, self.frequencies, self.kappa))

    @classmethod
    def from_csv(cls, path) -> "AbsorptionTable":
        data = np.loadtxt(Path(path), delimiter=",", ndmin=2)
        return cls(data[:, 0], data[:, 1])


def _kappa_value(absorption, frequency: float) -> float:
    if absorption is None:
        return 0.0
    if callable(absorption):
        return float(absorption(frequency))
    return float(absorption)


class ChannelModel:
    """Frequency-sliced channel for one scenario.

    Stateless after construction: `slice(f)` may be called concurrently.  The
    shadowing draws (when a model is given) happen once here, so evaluation
    order never changes them.
    """

    def __init__(self, scenario: Scenario, response: IrsResponse,
                 shadowing: ShadowingModel | None = None, absorption=None):
        self.scenario = scenario
        self.response = response
        self.absorption = absorption
        L = scenario.num_elements
        if shadowing is not None:
            self.shadow_hop1, self.shadow_hop2 = shadowing.hop_draws(L)
            self.shadow_refl = shadowing.reflector_draws(len(scenario.reflectors))
        else:
            self.shadow_hop1 = np.ones(L)
            self.shadow_hop2 = np.ones(L)
            self.shadow_refl = np.ones(len(scenario.reflectors))

        if np.any(scenario.bs_distances <= 0) or np.any(scenario.ue_distances <= 0):
            raise GeometryError("nonpositive hop distance")
        area = scenario.irs.element_area
        # Elements illuminated from behind contribute zero effective area.
        eff_bs = area * np.maximum(scenario.bs_cos_angle, 0.0)
        eff_ue = area * np.maximum(scenario.ue_cos_angle, 0.0)
        # BS side carries alpha1 * sqrt(A1) / d1; the UE side also takes 1/(4 pi).
        self._w_amp = (self.shadow_hop1[None, :] * scenario.bs_amp_gain
                       * np.sqrt(eff_bs) / scenario.bs_distances)
        self._v_amp = (self.shadow_hop2[None, :] * scenario.ue_amp_gain
                       * np.sqrt(eff_ue) / (FOUR_PI * scenario.ue_distances))

    @property
    def num_elements(self) -> int:
        return self.scenario.num_elements

    def slice(self, frequency: float) -> ChannelSlice:
        if not frequency > 0.0:
            raise ValueError("frequency must be > 0")
        kappa = _kappa_value(self.absorption, frequency)
        sc = self.scenario
        zeta = irs_zeta(self.response, frequency)
        rate = -2j * math.pi * frequency / SPEED_OF_LIGHT - kappa
        w = self._w_amp * np.exp(sc.bs_distances * rate)
        v = self._v_amp * zeta * np.exp(sc.ue_distances * rate)
        return ChannelSlice(frequency=frequency, v=v, w=w,
                            multipath=self._multipath(frequency, kappa), kappa=kappa)

    def _multipath(self, frequency: float, kappa: float) -> np.ndarray:
        sc = self.scenario
        out = np.zeros((sc.num_ue_antennas, sc.num_bs_antennas), dtype=complex)
        for idx, refl in enumerate(sc.reflectors):
            paths = sc.image_paths[idx]
            rho = refl.rho(frequency)
            if rho == 0:
                continue
            d = paths.lengths
            amp = (rho * self.shadow_refl[idx] * paths.bs_amp_gain * paths.ue_amp_gain
                   * SPEED_OF_LIGHT / (FOUR_PI * frequency * d))
            out += (amp * np.exp(d * (-2j * math.pi * frequency / SPEED_OF_LIGHT - kappa))).T
        return out

    def element_factors(self, frequency: float, ell: int) -> tuple[np.ndarray, np.ndarray]:
        s = self.slice(frequency)
        return s.v[:, ell].copy(), s.w[:, ell].copy()


def element_channel(scenario: Scenario, response: IrsResponse,
                    shadowing: ShadowingModel | None, frequency: float, ell: int,
                    absorption=None) -> tuple[np.ndarray, np.ndarray]:
    """Rank-1 factors (v_l, w_l) of the element-l channel at `frequency`."""
    if not 0 <= ell < scenario.num_elements:
        raise IndexError(f"element index {ell} out of range")
    model = ChannelModel(scenario, response, shadowing, absorption)
    return model.element_factors(frequency, ell)


def multipath_matrix(scenario: Scenario, shadowing: ShadowingModel | None,
                     frequency: float, absorption=None) -> np.ndarray:
    """Sum of the single-bounce reflected-ray matrices, shape (M_ue, M_bs)."""
    if not frequency > 0.0:
        raise ValueError("frequency must be > 0")
    response = IrsResponse(center_frequency=frequency, magnitude_db=0.0,
                           phase_slope_deg_per_ghz=0.0)
    model = ChannelModel(scenario, response, shadowing, absorption)
    return model._multipath(frequency, _kappa_value(absorption, frequency))


@dataclass(frozen=True)
class SmallArrayApprox:
    """Separable small-array channel: H_l(f) = k[l] * a_matrix(f) * exp(-2j pi f tau[l]).

    `c_bs`/`c_ue` are the per-antenna excess delays relative to the array
    center toward the IRS center; a_matrix collects them with the element
    response.
    """

    k: np.ndarray         # (L,) positive amplitudes
    tau: np.ndarray       # (L,) center-to-center delays, seconds
    hop_bs: np.ndarray    # (L,) BS-center to element distances, meters
    hop_ue: np.ndarray    # (L,) element to UE-center distances, meters
    c_bs: np.ndarray      # (M_bs,) seconds
    c_ue: np.ndarray      # (M_ue,) seconds
    a_matrix: np.ndarray  # (M_ue, M_bs)
    frequency: float


def approx_small_array_channel(scenario: Scenario, response: IrsResponse,
                               frequency: float,
                               shadowing: ShadowingModel | None = None) -> SmallArrayApprox:
    """Small-array decomposition of the element channels at one frequency.

    Valid when both arrays are small relative to the hop distances (caller's
    responsibility).  Molecular absorption is neglected here.
    """
    model = ChannelModel(scenario, response, shadowing)
    sc = scenario
    to_bs, to_ue = sc.center_hop_lengths()
    tau = (to_bs + to_ue) / SPEED_OF_LIGHT
    center = sc.irs.plane_origin
    u_bs = sc.bs.center - center
    u_ue = sc.ue.center - center
    cos_bs = float(u_bs @ sc.irs.plane_normal / np.linalg.norm(u_bs))
    cos_ue = float(u_ue @ sc.irs.plane_normal / np.linalg.norm(u_ue))
    area = sc.irs.element_area
    g_bs = float(sc.bs.amplitude_gain((-u_bs / np.linalg.norm(u_bs))[None, :])[0])
    g_ue = float(sc.ue.amplitude_gain((-u_ue / np.linalg.norm(u_ue))[None, :])[0])
    eff = area * max(cos_bs, 0.0) * area * max(cos_ue, 0.0)
    k = (model.shadow_hop1 * model.shadow_hop2 * g_bs * g_ue
         * math.sqrt(eff) / (FOUR_PI * to_bs * to_ue))

    c_bs = (np.linalg.norm(sc.bs_positions - center[None, :], axis=1)
            - np.linalg.norm(u_bs)) / SPEED_OF_LIGHT
    c_ue = (np.linalg.norm(sc.ue_positions - center[None, :], axis=1)
            - np.linalg.norm(u_ue)) / SPEED_OF_LIGHT
    zeta = irs_zeta(response, frequency)
    a_matrix = zeta * np.exp(-2j * math.pi * frequency
                             * (c_ue[:, None] + c_bs[None, :]))
    return SmallArrayApprox(k=k, tau=tau, hop_bs=to_bs, hop_ue=to_ue,
                            c_bs=c_bs, c_ue=c_ue, a_matrix=a_matrix,
                            frequency=frequency)


class ApproxChannelModel:
    """ChannelModel-compatible wrapper that evaluates the small-array channel.

    Produces rank-1 slices with v_l = k[l] zeta exp(-2j pi f tau[l]) * u and a
    shared BS-side vector, so the coupling and rate machinery applies
    unchanged.  No multipath.
    """

    def __init__(self, scenario: Scenario, response: IrsResponse,
                 shadowing: ShadowingModel | None = None):
        self.scenario = scenario
        self.response = response
        self._base = approx_small_array_channel(scenario, response,
                                                response.center_frequency, shadowing)

    @property
    def num_elements(self) -> int:
        return self.scenario.num_elements

    @property
    def base(self) -> SmallArrayApprox:
        return self._base

    def slice(self, frequency: float) -> ChannelSlice:
        base = self._base
        zeta = irs_zeta(self.response, frequency)
        u = np.exp(-2j * math.pi * frequency * base.c_ue)
        b = np.exp(-2j * math.pi * frequency * base.c_bs)
        # Per-hop phase accumulation keeps the point-array limit bit-aligned
        # with the exact per-element channel.
        rate = -2j * math.pi * frequency / SPEED_OF_LIGHT
        per_elem = base.k * np.exp(base.hop_bs * rate) * np.exp(base.hop_ue * rate)
        v = zeta * u[:, None] * per_elem[None, :]
        w = np.repeat(b[:, None], self.scenario.num_elements, axis=1)
        return ChannelSlice(frequency=frequency, v=v, w=w,
                            multipath=np.zeros((self.scenario.num_ue_antennas,
                                                self.scenario.num_bs_antennas),
                                               dtype=complex))
