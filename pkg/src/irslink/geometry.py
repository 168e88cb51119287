"""Spatial layout of the BS array, UE array, IRS element grid and wall reflectors.

Everything internal is SI (meters, radians, Hz).  Coordinates are right-handed
3D; the canonical layout puts the IRS plane on x-z with normal +y, and the 2D
scenarios of interest live in the z=0 plane.  Angles of the BS and UE seen from
the IRS are measured from the plane normal, each one toward its own side, so
that equal angles describe the specular (mirror) arrangement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s

_Z_AXIS = np.array([0.0, 0.0, 1.0])
_X_AXIS = np.array([1.0, 0.0, 0.0])

GAIN_ISOTROPIC = "isotropic"
GAIN_SECTORED_3GPP = "sectored_3gpp"


class GeometryError(ValueError):
    """Inconsistent or degenerate geometric configuration."""


def _as_vec3(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise GeometryError(f"{name} must be a 3-vector, got shape {a.shape}")
    return a


def _check_unit(v: np.ndarray, name: str) -> np.ndarray:
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-12:
        raise GeometryError(f"{name} must have unit norm (got {n!r})")
    return v


def _in_plane_axis(normal: np.ndarray) -> np.ndarray:
    """Unit vector perpendicular to `normal`, lying in the x-y plane if possible."""
    a = np.cross(_Z_AXIS, normal)
    n = np.linalg.norm(a)
    if n < 1e-12:
        return _X_AXIS.copy()
    return a / n


def sectored_gain_dbi(cos_broadside: np.ndarray, sin_side: np.ndarray,
                      cos_zenith: np.ndarray, max_gain_dbi: float) -> np.ndarray:
    """Single-element sectored pattern (TR 38.901 style) in dBi.

    `cos_broadside`/`sin_side` give the azimuth of the ray in the element frame,
    `cos_zenith` its direction cosine along the element's vertical axis.
    65 deg half-power beamwidths and a 30 dB floor in both cuts.
    """
    az_deg = np.degrees(np.arctan2(sin_side, cos_broadside))
    zen_deg = np.degrees(np.arccos(np.clip(cos_zenith, -1.0, 1.0)))
    a_v = -np.minimum(12.0 * ((zen_deg - 90.0) / 65.0) ** 2, 30.0)
    a_h = -np.minimum(12.0 * (az_deg / 65.0) ** 2, 30.0)
    return max_gain_dbi - np.minimum(-(a_v + a_h), 30.0)


@dataclass(frozen=True)
class ArraySpec:
    """Uniform linear antenna array.

    `orientation` is the broadside normal; the element axis is the in-plane
    direction perpendicular to it.  Gains follow `element_gain_model`,
    either "isotropic" (0 dBi) or "sectored_3gpp" with `max_gain_dbi` peak.
    """

    num_elements: int
    spacing: float
    center: np.ndarray
    orientation: np.ndarray
    element_gain_model: str = GAIN_ISOTROPIC
    max_gain_dbi: float = 8.0

    def __post_init__(self):
        if self.num_elements < 1:
            raise GeometryError("num_elements must be a positive integer")
        if not self.spacing > 0:
            raise GeometryError("array spacing must be > 0")
        object.__setattr__(self, "center", _as_vec3(self.center, "center"))
        object.__setattr__(self, "orientation",
                           _check_unit(_as_vec3(self.orientation, "orientation"), "orientation"))
        if self.element_gain_model not in (GAIN_ISOTROPIC, GAIN_SECTORED_3GPP):
            raise GeometryError(f"unknown element_gain_model {self.element_gain_model!r}")

    @property
    def axis(self) -> np.ndarray:
        return _in_plane_axis(self.orientation)

    def positions(self) -> np.ndarray:
        m = np.arange(self.num_elements) - (self.num_elements - 1) / 2.0
        return self.center[None, :] + m[:, None] * self.spacing * self.axis[None, :]

    def amplitude_gain(self, directions: np.ndarray) -> np.ndarray:
        """Element amplitude gain toward unit `directions` of shape (..., 3)."""
        if self.element_gain_model == GAIN_ISOTROPIC:
            return np.ones(directions.shape[:-1])
        up = _Z_AXIS if abs(self.orientation @ _Z_AXIS) < 1.0 - 1e-12 else _X_AXIS
        side = np.cross(up, self.orientation)
        side /= np.linalg.norm(side)
        dbi = sectored_gain_dbi(directions @ self.orientation, directions @ side,
                                directions @ up, self.max_gain_dbi)
        return 10.0 ** (dbi / 20.0)


@dataclass(frozen=True)
class IrsSpec:
    """Regular gapless grid of reflective elements centered at `plane_origin`.

    Elements are indexed row-major, rows along the plane's vertical axis.
    """

    rows: int
    cols: int
    element_spacing: float
    plane_origin: np.ndarray
    plane_normal: np.ndarray
    element_area: float = 0.0  # 0 means spacing**2 (gapless)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise GeometryError("IRS grid must have rows >= 1 and cols >= 1")
        if not self.element_spacing > 0:
            raise GeometryError("IRS element spacing must be > 0")
        object.__setattr__(self, "plane_origin", _as_vec3(self.plane_origin, "plane_origin"))
        object.__setattr__(self, "plane_normal",
                           _check_unit(_as_vec3(self.plane_normal, "plane_normal"), "plane_normal"))
        if self.element_area == 0.0:
            object.__setattr__(self, "element_area", self.element_spacing ** 2)
        if not self.element_area > 0:
            raise GeometryError("element_area must be > 0")

    @classmethod
    def square(cls, side_count: int, element_spacing: float,
               plane_origin=(0.0, 0.0, 0.0), plane_normal=(0.0, 1.0, 0.0)) -> "IrsSpec":
        return cls(rows=side_count, cols=side_count, element_spacing=element_spacing,
                   plane_origin=np.asarray(plane_origin, float),
                   plane_normal=np.asarray(plane_normal, float))

    @property
    def num_elements(self) -> int:
        return self.rows * self.cols

    def positions(self) -> np.ndarray:
        u = _in_plane_axis(self.plane_normal)          # horizontal in-plane axis
        v = np.cross(self.plane_normal, u)             # vertical in-plane axis
        c = np.arange(self.cols) - (self.cols - 1) / 2.0
        r = np.arange(self.rows) - (self.rows - 1) / 2.0
        offs = (r[:, None, None] * v[None, None, :] + c[None, :, None] * u[None, None, :])
        return (self.plane_origin[None, None, :] + self.element_spacing * offs).reshape(-1, 3)


@dataclass(frozen=True)
class ReflectorSpec:
    """Infinite specular reflector plane: a point, a unit normal, a coefficient.

    `reflection_coefficient` is either a complex constant or a callable of
    frequency returning a complex value with magnitude <= 1.
    """

    point: np.ndarray
    normal: np.ndarray
    reflection_coefficient: object = 1.0 + 0.0j
    reflector_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "point", _as_vec3(self.point, "reflector point"))
        object.__setattr__(self, "normal",
                           _check_unit(_as_vec3(self.normal, "reflector normal"), "reflector normal"))
        if not callable(self.reflection_coefficient):
            rho = complex(self.reflection_coefficient)
            if abs(rho) > 1.0 + 1e-12:
                raise GeometryError("reflection coefficient magnitude must be <= 1")
            object.__setattr__(self, "reflection_coefficient", rho)

    def rho(self, frequency: float) -> complex:
        if callable(self.reflection_coefficient):
            val = complex(self.reflection_coefficient(frequency))
            if abs(val) > 1.0 + 1e-12:
                raise GeometryError("reflection coefficient magnitude must be <= 1")
            return val
        return self.reflection_coefficient

    def mirror(self, points: np.ndarray) -> np.ndarray:
        d = (points - self.point[None, :]) @ self.normal
        return points - 2.0 * d[:, None] * self.normal[None, :]

    def signed_distance(self, point: np.ndarray) -> float:
        return float((point - self.point) @ self.normal)


@dataclass(frozen=True)
class ImagePaths:
    """Image-theorem path lengths and delays through one reflector.

    Axis 0 indexes the BS antenna, axis 1 the UE antenna.  Gains are the
    element amplitude gains toward the mirrored node.
    """

    reflector_id: int
    lengths: np.ndarray        # (M_bs, M_ue) meters
    delays: np.ndarray         # (M_bs, M_ue) seconds
    bs_amp_gain: np.ndarray    # (M_bs, M_ue)
    ue_amp_gain: np.ndarray    # (M_bs, M_ue)


@dataclass(frozen=True)
class Scenario:
    """Full geometric description plus the derived distance/angle tensors.

    `bs_distances[i, l]` is the BS-antenna-i to element-l distance and
    `ue_distances[j, l]` the element-l to UE-antenna-j distance;
    `bs_cos_angle`/`ue_cos_angle` hold the cosines of the arrival/departure
    angles w.r.t. the IRS plane normal, and `bs_amp_gain`/`ue_amp_gain` the
    antenna element amplitude gains toward each IRS element.  Value
    semantics; safe to share read-only across workers.
    """

    bs: ArraySpec
    ue: ArraySpec
    irs: IrsSpec
    reflectors: tuple = ()
    bs_positions: np.ndarray = field(default=None, repr=False)
    ue_positions: np.ndarray = field(default=None, repr=False)
    irs_positions: np.ndarray = field(default=None, repr=False)
    bs_distances: np.ndarray = field(default=None, repr=False)
    ue_distances: np.ndarray = field(default=None, repr=False)
    bs_cos_angle: np.ndarray = field(default=None, repr=False)
    ue_cos_angle: np.ndarray = field(default=None, repr=False)
    bs_amp_gain: np.ndarray = field(default=None, repr=False)
    ue_amp_gain: np.ndarray = field(default=None, repr=False)
    image_paths: tuple = ()

    @property
    def num_elements(self) -> int:
        return self.irs.num_elements

    @property
    def num_bs_antennas(self) -> int:
        return self.bs.num_elements

    @property
    def num_ue_antennas(self) -> int:
        return self.ue.num_elements

    def path_lengths(self) -> np.ndarray:
        """Total BS-element-UE distance, shape (M_bs, M_ue, L)."""
        return self.bs_distances[:, None, :] + self.ue_distances[None, :, :]

    def path_delays(self) -> np.ndarray:
        return self.path_lengths() / SPEED_OF_LIGHT

    def center_hop_lengths(self) -> tuple[np.ndarray, np.ndarray]:
        """Array-center to element distances for both hops, each (L,)."""
        to_bs = np.linalg.norm(self.irs_positions - self.bs.center[None, :], axis=1)
        to_ue = np.linalg.norm(self.irs_positions - self.ue.center[None, :], axis=1)
        return to_bs, to_ue

    def center_delays(self) -> np.ndarray:
        """Center-to-center travel time through each element, (L,)."""
        to_bs, to_ue = self.center_hop_lengths()
        return (to_bs + to_ue) / SPEED_OF_LIGHT


def _hop_tensors(array: ArraySpec, elements: np.ndarray, normal: np.ndarray):
    """Distances, normal-angle cosines and gains from one array to all elements."""
    pos = array.positions()
    diff = pos[:, None, :] - elements[None, :, :]      # (M, L, 3): element -> antenna
    dist = np.linalg.norm(diff, axis=2)
    if np.any(dist <= 0.0):
        raise GeometryError("zero distance between an antenna and an IRS element")
    udir = diff / dist[:, :, None]
    cos_angle = udir @ normal
    amp = array.amplitude_gain(-udir)                   # antenna -> element direction
    return pos, dist, cos_angle, amp


def build_scenario(bs: ArraySpec, ue: ArraySpec, irs: IrsSpec,
                   reflectors=()) -> Scenario:
    """Assemble a scenario and populate every derived tensor.

    Raises GeometryError when the BS or UE array center sits behind the IRS
    plane or when any node pair is degenerate (zero distance).
    """
    elements = irs.positions()
    for name, arr in (("BS", bs), ("UE", ue)):
        side = (arr.center - irs.plane_origin) @ irs.plane_normal
        if side <= 0.0:
            raise GeometryError(f"{name} array center is behind the IRS plane")

    bs_pos, bs_dist, bs_cos, bs_gain = _hop_tensors(bs, elements, irs.plane_normal)
    ue_pos, ue_dist, ue_cos, ue_gain = _hop_tensors(ue, elements, irs.plane_normal)

    scenario = Scenario(bs=bs, ue=ue, irs=irs, reflectors=tuple(reflectors),
                        bs_positions=bs_pos, ue_positions=ue_pos, irs_positions=elements,
                        bs_distances=bs_dist, ue_distances=ue_dist,
                        bs_cos_angle=bs_cos, ue_cos_angle=ue_cos,
                        bs_amp_gain=bs_gain, ue_amp_gain=ue_gain)
    images = tuple(image_paths(scenario, r.reflector_id) for r in scenario.reflectors)
    object.__setattr__(scenario, "image_paths", images)
    return scenario


def image_paths(scenario: Scenario, reflector_id: int) -> ImagePaths:
    """Single-bounce path lengths/delays via the image of the UE array.

    Requires BS and UE strictly on the same side of the reflector plane.
    """
    refl = None
    for r in scenario.reflectors:
        if r.reflector_id == reflector_id:
            refl = r
            break
    if refl is None:
        raise GeometryError(f"no reflector with id {reflector_id}")

    s_bs = refl.signed_distance(scenario.bs.center)
    s_ue = refl.signed_distance(scenario.ue.center)
    if abs(s_bs) < 1e-12 or abs(s_ue) < 1e-12:
        raise GeometryError("array center lies on the reflector plane")
    if s_bs * s_ue < 0.0:
        raise GeometryError("BS and UE must be on the same side of the reflector")

    bs_pos = scenario.bs_positions
    ue_pos = scenario.ue_positions
    ue_mirror = refl.mirror(ue_pos)
    bs_mirror = refl.mirror(bs_pos)

    diff = ue_mirror[None, :, :] - bs_pos[:, None, :]   # (M_bs, M_ue, 3): BS -> mirrored UE
    lengths = np.linalg.norm(diff, axis=2)
    if np.any(lengths <= 0.0):
        raise GeometryError("degenerate image path of zero length")
    u_from_bs = diff / lengths[:, :, None]
    g_bs = scenario.bs.amplitude_gain(u_from_bs)

    diff_ue = bs_mirror[None, :, :] - ue_pos[:, None, :]  # (M_ue, M_bs, 3): UE -> mirrored BS
    len_ue = np.linalg.norm(diff_ue, axis=2)
    u_from_ue = diff_ue / len_ue[:, :, None]
    g_ue = scenario.ue.amplitude_gain(u_from_ue).T       # back to (M_bs, M_ue)

    return ImagePaths(reflector_id=reflector_id, lengths=lengths,
                      delays=lengths / SPEED_OF_LIGHT, bs_amp_gain=g_bs, ue_amp_gain=g_ue)


def steering_angle(array: ArraySpec, target: np.ndarray) -> float:
    """Beam direction of `target` from the array center, radians.

    Defined so that the frequency-flat beamformer with this angle combines the
    exact per-antenna propagation phases coherently at the design frequency.
    """
    u = np.asarray(target, float) - array.center
    n = np.linalg.norm(u)
    if n == 0.0:
        raise GeometryError("steering target coincides with the array center")
    s = -float(array.axis @ (u / n))
    return math.asin(max(-1.0, min(1.0, s)))


def two_hop_layout(*, bs_antennas: int, ue_antennas: int, array_spacing: float,
                   irs_rows: int, irs_cols: int, irs_spacing: float,
                   bs_distance: float, ue_distance: float,
                   bs_angle: float, ue_angle: float,
                   bs_gain_model: str = GAIN_ISOTROPIC, bs_max_gain_dbi: float = 8.0,
                   ue_gain_model: str = GAIN_ISOTROPIC,
                   wall_reflection: complex | None = None) -> Scenario:
    """Canonical BS-IRS-UE layout in the z=0 plane.

    The IRS is centered at the origin on the x-z plane with normal +y.  The BS
    center sits at `bs_distance` under `bs_angle` from the normal toward +x,
    the UE at `ue_distance` under `ue_angle` toward -x, so equal angles give
    the specular (mirror) arrangement; negative angles flip the side.  Both
    arrays are parallel to the IRS plane (broadside facing it).  When
    `wall_reflection` is given, the wall carrying the IRS also acts as a
    specular reflector with that coefficient.
    """
    irs = IrsSpec(rows=irs_rows, cols=irs_cols, element_spacing=irs_spacing,
                  plane_origin=np.zeros(3), plane_normal=np.array([0.0, 1.0, 0.0]))
    bs_center = np.array([bs_distance * math.sin(bs_angle),
                          bs_distance * math.cos(bs_angle), 0.0])
    ue_center = np.array([-ue_distance * math.sin(ue_angle),
                          ue_distance * math.cos(ue_angle), 0.0])
    facing = np.array([0.0, -1.0, 0.0])
    bs = ArraySpec(num_elements=bs_antennas, spacing=array_spacing, center=bs_center,
                   orientation=facing, element_gain_model=bs_gain_model,
                   max_gain_dbi=bs_max_gain_dbi)
    ue = ArraySpec(num_elements=ue_antennas, spacing=array_spacing, center=ue_center,
                   orientation=facing, element_gain_model=ue_gain_model)
    reflectors = ()
    if wall_reflection is not None:
        reflectors = (ReflectorSpec(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]),
                                    reflection_coefficient=wall_reflection, reflector_id=0),)
    return build_scenario(bs, ue, irs, reflectors)


# ---------------------------------------------------------------------------
# JSON serialization (meters at the interface; vectors are dimensionless)

def _array_to_dict(a: ArraySpec) -> dict:
    return {"num_elements": a.num_elements, "spacing_m": a.spacing,
            "center_m": list(a.center), "orientation": list(a.orientation),
            "element_gain_model": a.element_gain_model, "max_gain_dbi": a.max_gain_dbi}


def _array_from_dict(d: dict) -> ArraySpec:
    return ArraySpec(num_elements=int(d["num_elements"]), spacing=float(d["spacing_m"]),
                     center=np.asarray(d["center_m"], float),
                     orientation=np.asarray(d["orientation"], float),
                     element_gain_model=d.get("element_gain_model", GAIN_ISOTROPIC),
                     max_gain_dbi=float(d.get("max_gain_dbi", 8.0)))


def scenario_to_dict(s: Scenario) -> dict:
    refl = []
    for r in s.reflectors:
        if callable(r.reflection_coefficient):
            raise ValueError("callable reflection coefficients are not serializable")
        rho = r.reflection_coefficient
        refl.append({"point_m": list(r.point), "normal": list(r.normal),
                     "reflection_magnitude": abs(rho),
                     "reflection_phase_deg": math.degrees(np.angle(rho)),
                     "id": r.reflector_id})
    return {
        "bs": _array_to_dict(s.bs),
        "ue": _array_to_dict(s.ue),
        "irs": {"rows": s.irs.rows, "cols": s.irs.cols,
                "element_spacing_m": s.irs.element_spacing,
                "element_area_m2": s.irs.element_area,
                "plane_origin_m": list(s.irs.plane_origin),
                "plane_normal": list(s.irs.plane_normal)},
        "reflectors": refl,
    }


def scenario_from_dict(d: dict) -> Scenario:
    irs_d = d["irs"]
    irs = IrsSpec(rows=int(irs_d["rows"]), cols=int(irs_d["cols"]),
                  element_spacing=float(irs_d["element_spacing_m"]),
                  plane_origin=np.asarray(irs_d["plane_origin_m"], float),
                  plane_normal=np.asarray(irs_d["plane_normal"], float),
                  element_area=float(irs_d.get("element_area_m2", 0.0)))
    reflectors = []
    for r in d.get("reflectors", []):
        rho = r["reflection_magnitude"] * np.exp(1j * math.radians(r["reflection_phase_deg"]))
        reflectors.append(ReflectorSpec(point=np.asarray(r["point_m"], float),
                                        normal=np.asarray(r["normal"], float),
                                        reflection_coefficient=complex(rho),
                                        reflector_id=int(r["id"])))
    return build_scenario(_array_from_dict(d["bs"]), _array_from_dict(d["ue"]),
                          irs, reflectors)


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2, sort_keys=True))


def load_scenario(path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))
