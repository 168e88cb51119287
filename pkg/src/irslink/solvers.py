"""Phase-configuration strategies for the unimodular received-power problem.

Narrowband profiles built from the per-element delays, phase extraction from
the dominant eigenvector of T, a monotone phase-projection ascent, an
exhaustive quantized oracle for small surfaces, and the delay-spread
optimality condition of the narrowband profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import Coupling, PhaseConfig, quadratic_objective, received_power
from .geometry import SPEED_OF_LIGHT, Scenario

ORACLE_MAX_CONFIGS = 10_000_000


class SolverError(RuntimeError):
    """A solver could not run on the given inputs."""


@dataclass(frozen=True)
class NbDelays:
    """Center-to-center travel time through each IRS element, seconds."""

    tau: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tau, float)
        object.__setattr__(self, "tau", t)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("tau must be a 1-D vector")
        if np.any(t <= 0):
            raise ValueError("delays must be > 0")

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "NbDelays":
        return cls(tau=scenario.center_delays())

    @property
    def delay_spread(self) -> float:
        return float(np.max(self.tau) - np.min(self.tau))


@dataclass(frozen=True)
class SolverReport:
    """Outcome of a power-maximizing solver against the relaxed bound."""

    config: PhaseConfig
    achieved_power: float        # watts
    iterations: int
    relaxed_bound: float         # L lambda_max + w + 2 sum|q|, watts
    gap_ratio: float

    def __post_init__(self):
        if self.achieved_power > self.relaxed_bound * (1.0 + 1e-9) + 1e-300:
            raise SolverError("achieved power exceeds the relaxed bound")


def nb_config(delays: NbDelays, frequency: float) -> PhaseConfig:
    """Narrowband profile gamma_l = exp(2j pi f tau_l)."""
    if not frequency > 0:
        raise ValueError("frequency must be > 0")
    return PhaseConfig(gamma=np.exp(2j * math.pi * frequency * delays.tau),
                       solver_tag=f"NB({frequency:.6g})")


def nb_max_power(subband_powers: np.ndarray, delays: NbDelays,
                 subband_centers: np.ndarray) -> PhaseConfig:
    """Narrowband profile at the center of the strongest sub-band.

    Ties break toward the lowest sub-band index.
    """
    m = np.asarray(subband_powers, float)
    f = np.asarray(subband_centers, float)
    if m.shape != f.shape or m.ndim != 1 or m.size < 1:
        raise ValueError("sub-band powers and centers must be matching 1-D vectors")
    if np.any(m < 0):
        raise ValueError("sub-band powers must be >= 0")
    if not np.any(m > 0):
        raise SolverError("no power in any sub-band")
    s_star = int(np.argmax(m))
    return nb_config(delays, float(f[s_star])).retag("NB Max-power")


def subband_received_powers(scenario, response, bundle, shadowing=None) -> np.ndarray:
    """Per-sub-band received-power weights Tr{A(f) G(f) A(f)^H} df.

    Uses the small-array matrix A(f); the per-element amplitudes and delays do
    not enter, so these weights rank the sub-bands exactly as the separable
    channel does.
    """
    from .channel import approx_small_array_channel, irs_zeta

    base = approx_small_array_channel(scenario, response,
                                      response.center_frequency, shadowing)
    out = np.zeros(bundle.grid.num_subbands)
    for node in range(bundle.num_nodes):
        f = float(bundle.frequencies[node])
        a = irs_zeta(response, f) * np.exp(
            -2j * math.pi * f * (base.c_ue[:, None] + base.c_bs[None, :]))
        acc = 0.0
        for k in range(bundle.num_beams):
            g = bundle.g[k, node]
            if g == 0.0:
                continue
            y = a @ bundle.vectors[k, node]
            acc += g * float(np.vdot(y, y).real)
        out[bundle.subband_index[node]] += acc * float(bundle.weights[node])
    return out


def nb_optimum(coupling: Coupling, delays: NbDelays,
               candidate_frequencies: np.ndarray) -> PhaseConfig:
    """Narrowband profile maximizing the full coupling objective over candidates."""
    cands = np.atleast_1d(np.asarray(candidate_frequencies, float))
    if cands.size < 1:
        raise ValueError("candidate frequency set must be nonempty")
    best_idx = 0
    best_val = -math.inf
    best = None
    for i, f in enumerate(cands):
        cfg = nb_config(delays, float(f))
        val = quadratic_objective(coupling, cfg.gamma)
        if val > best_val:
            best_idx, best_val, best = i, val, cfg
    return best.retag(f"NB Optimum({cands[best_idx]:.6g})")


def power_iteration(matrix: np.ndarray, tol: float = 1e-9, max_iter: int | None = None,
                    restarts: int = 3) -> tuple[float, np.ndarray, float, int]:
    """Dominant eigenpair of a Hermitian PSD matrix.

    Deterministic all-ones start, seeded random restarts on stagnation.
    Returns (rayleigh quotient, unit eigenvector, residual norm, iterations);
    the residual bounds the distance to the dominant eigenvalue from above
    once the iteration has locked on.
    """
    n = matrix.shape[0]
    if max_iter is None:
        max_iter = max(10 * n, 100)
    total = 0
    best = None
    for attempt in range(restarts):
        if attempt == 0:
            u = np.ones(n, dtype=complex) / math.sqrt(n)
        else:
            rng = np.random.default_rng(np.random.SeedSequence((0xE16E, attempt)))
            u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            u /= np.linalg.norm(u)
        lam = 0.0
        res = math.inf
        converged = False
        for _ in range(max_iter):
            total += 1
            y = matrix @ u
            norm_y = np.linalg.norm(y)
            if norm_y == 0.0:
                lam, res, converged = 0.0, 0.0, True
                break
            lam = float(np.vdot(u, y).real)
            res = float(np.linalg.norm(y - lam * u))
            if res <= tol * max(lam, 1e-300):
                converged = True
                break
            u = y / norm_y
        if not converged:
            y = matrix @ u
            lam = float(np.vdot(u, y).real)
            res = float(np.linalg.norm(y - lam * u))
        if best is None or (lam - res) > (best[0] - best[2]):
            best = (lam, u.copy(), res, total)
        if converged:
            break
    lam, u, res, _ = best
    return lam, u, res, total


def dominant_eigenvalue_bound(coupling: Coupling, tol: float = 1e-9) -> float:
    """Upper estimate of lambda_max(T) from the converged power iteration."""
    lam, _, res, _ = power_iteration(coupling.t, tol=tol)
    return lam + res


def relaxed_power_bound(coupling: Coupling, lam_max_ub: float | None = None) -> float:
    """L lambda_max + w + 2 sum_l |q_l|: the closed-form received-power bound."""
    if lam_max_ub is None:
        lam_max_ub = dominant_eigenvalue_bound(coupling)
    return (coupling.num_elements * lam_max_ub + coupling.w
            + 2.0 * float(np.sum(np.abs(coupling.q))))


def max_eig_phase(coupling: Coupling, tol: float = 1e-9) -> PhaseConfig:
    """Entrywise phases of the dominant eigenvector of T.

    Exact-zero eigenvector entries map to phase 0.
    """
    if coupling.trace <= 0.0 or not np.any(coupling.t):
        raise SolverError("T is zero; the max-eig heuristic is undefined")
    _, u, _, _ = power_iteration(coupling.t, tol=tol)
    return PhaseConfig(gamma=np.exp(1j * np.angle(u)), solver_tag="Max-eig phase")


def _shift_for_ascent(coupling: Coupling, lam_max_ub: float) -> float:
    """sigma = |lambda_min(T)| + trace(T)/L keeps the surrogate matrix PSD."""
    shifted = lam_max_ub * np.eye(coupling.num_elements) - coupling.t
    mu, _, res, _ = power_iteration(shifted, tol=1e-6, max_iter=5 * coupling.num_elements)
    lam_min_est = lam_max_ub - (mu + res)
    return abs(lam_min_est) + coupling.trace / coupling.num_elements


def ucqp_ascent(coupling: Coupling, init: PhaseConfig | None = None,
                max_iter: int = 500, tol: float = 1e-10,
                restarts: int = 16, seed: int = 0,
                history: list | None = None) -> SolverReport:
    """Monotone phase-projection ascent on the unimodular quadratic objective.

    Iterates gamma <- exp(j arg((T + sigma I) gamma + q)); the diagonal shift
    makes every sweep non-decreasing.  The best iterate over all restarts is
    returned (first restart starts from `init` when provided).  When given,
    `history` collects the per-sweep objective values.
    """
    lam, _, res, _ = power_iteration(coupling.t)
    lam_ub = lam + res
    sigma = _shift_for_ascent(coupling, lam_ub)
    L = coupling.num_elements

    best_gamma = None
    best_val = -math.inf
    total_iters = 0
    for r in range(restarts):
        if r == 0 and init is not None:
            gamma = init.gamma.copy()
        else:
            rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, 0x0C9, r)))
            gamma = np.exp(2j * math.pi * rng.uniform(size=L))
        val = quadratic_objective(coupling, gamma)
        if history is not None:
            history.append(val)
        for _ in range(max_iter):
            total_iters += 1
            z = coupling.t @ gamma + sigma * gamma + coupling.q
            cand = np.exp(1j * np.angle(z))
            cand_val = quadratic_objective(coupling, cand)
            if history is not None:
                history.append(cand_val)
            improved = cand_val - val
            if cand_val > val:
                gamma, val = cand, cand_val
            if improved <= tol * max(abs(val), 1e-300):
                break
        if val > best_val:
            best_val = val
            best_gamma = gamma
    config = PhaseConfig(gamma=best_gamma, solver_tag="UCQP ascent")
    achieved = best_val + coupling.w
    bound = relaxed_power_bound(coupling, lam_ub)
    gap = achieved / bound if bound > 0 else 1.0
    return SolverReport(config=config, achieved_power=achieved, iterations=total_iters,
                        relaxed_bound=bound, gap_ratio=min(max(gap, 0.0), 1.0))


def brute_force_oracle(coupling: Coupling, phase_levels: int,
                       max_configs: int = ORACLE_MAX_CONFIGS) -> PhaseConfig:
    """Exact maximum over the quantized grid {exp(2j pi k / Q)}^L.

    With q = 0 the global-phase symmetry pins the first element to phase 0,
    shrinking the search to Q^(L-1) points.  The guard applies to the
    effective enumeration count.  Lowest enumeration index wins ties.
    """
    if phase_levels < 1:
        raise ValueError("phase_levels must be >= 1")
    L = coupling.num_elements
    pin_first = not np.any(coupling.q)
    free = L - 1 if pin_first else L
    n_configs = phase_levels ** free
    if n_configs > max_configs:
        raise SolverError(
            f"oracle search space {phase_levels}^{free} = {n_configs} exceeds {max_configs}")

    phases = np.exp(2j * math.pi * np.arange(phase_levels) / phase_levels)
    block = 8192
    best_val = -math.inf
    best_idx = -1
    for start in range(0, n_configs, block):
        idx = np.arange(start, min(start + block, n_configs), dtype=np.int64)
        digits = np.empty((idx.size, free), dtype=np.int64)
        rem = idx.copy()
        for pos in range(free):
            digits[:, pos] = rem % phase_levels
            rem //= phase_levels
        gammas = phases[digits]
        if pin_first:
            gammas = np.concatenate([np.ones((idx.size, 1), complex), gammas], axis=1)
        tmp = gammas.conj() @ coupling.t
        vals = np.einsum("ij,ij->i", tmp, gammas).real
        if not pin_first:
            vals = vals + 2.0 * (gammas @ coupling.q.conj()).real
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val = float(vals[j])
            best_idx = int(idx[j])
    rem = best_idx
    digits = []
    for _ in range(free):
        digits.append(rem % phase_levels)
        rem //= phase_levels
    gamma = phases[np.asarray(digits, int)]
    if pin_first:
        gamma = np.concatenate([[1.0 + 0j], gamma])
    return PhaseConfig(gamma=gamma, solver_tag=f"Oracle(Q={phase_levels})")


@dataclass(frozen=True)
class NbConditionReport:
    satisfied: bool
    threshold: float     # Hz; bandwidth below this keeps the NB profile optimal
    delay_spread: float  # seconds


def nb_condition_check(delays: NbDelays, bandwidth: float) -> NbConditionReport:
    """Delay-spread optimality condition B_w <= 1 / (2 T_DS)."""
    if bandwidth < 0:
        raise ValueError("bandwidth must be >= 0")
    t_ds = delays.delay_spread
    threshold = math.inf if t_ds == 0.0 else 1.0 / (2.0 * t_ds)
    return NbConditionReport(satisfied=bandwidth <= threshold,
                             threshold=threshold, delay_spread=t_ds)


def linear_nb_threshold(num_elements: int, spacing: float,
                        phi_bs: float, phi_ue: float) -> float:
    """Closed-form bandwidth threshold for a linear surface, Hz.

    Angles are signed (positive toward each node's own side); equal angles
    describe the mirror arrangement with an infinite threshold.
    """
    if num_elements < 2:
        return math.inf
    denom = 2.0 * (num_elements - 1) * spacing * abs(math.sin(phi_bs) - math.sin(phi_ue))
    if denom == 0.0:
        return math.inf
    return SPEED_OF_LIGHT / denom


def worst_case_fractional_bandwidth(num_elements: int) -> float:
    """B_w/f_0 threshold at half-wavelength spacing under the worst geometry."""
    if num_elements < 2:
        return math.inf
    return 1.0 / (2.0 * (num_elements - 1))
