"""Achievable rate, per-frequency rank bounds and the closed-form upper bound.

The rate is the quadrature sum of log2-det spectral efficiencies; the bound
chain replaces the rate by bandwidth coefficients B_m times the log of the
relaxed maximum received power.  Rates in bits/s, bandwidths in Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import Coupling, PhaseConfig, _gamma_vector
from .solvers import relaxed_power_bound
from .spectrum import PsdBundle

UB_CLOSED_FORM = "ub3_closed_form"
UB_RANK1 = "ub_rank1"

_RANK_RTOL = 1e-10
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class RateReport:
    """Rate of one configuration plus its per-node spectral efficiencies."""

    rate: float                  # bits/s
    per_node_se: np.ndarray      # (F,) bits/s/Hz
    noise_density: float         # W/Hz
    config_tag: str = ""

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("rate must be >= 0")


@dataclass(frozen=True)
class BoundReport:
    """Bandwidth coefficients, per-node rank bounds and the rate upper bound."""

    b_m: np.ndarray          # (M2,) Hz, non-increasing
    r_q: np.ndarray          # (F,) per-node rank bound
    ub: float                # bits/s
    variant: str = UB_CLOSED_FORM

    def __post_init__(self):
        b = np.asarray(self.b_m, float)
        if np.any(np.diff(b) > 1e-9):
            raise ValueError("B_m must be non-increasing in m")


def _num_rank(matrix: np.ndarray) -> int:
    if matrix.size == 0 or not np.any(matrix):
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    return int(np.count_nonzero(s > _RANK_RTOL * s[0]))


def _node_gram(slice_, vectors: np.ndarray, g_node: np.ndarray,
               gamma: np.ndarray) -> np.ndarray:
    """Columns sqrt(g_k) H(f, gamma) v_k, shape (M2, K)."""
    cols = []
    for k in range(vectors.shape[0]):
        s_k = slice_.w.T @ vectors[k]                     # (L,)
        y = slice_.v @ (gamma * s_k) + slice_.multipath @ vectors[k]
        cols.append(math.sqrt(g_node[k]) * y)
    return np.stack(cols, axis=1)


def evaluate_rates(model, bundle: PsdBundle, configs, noise_density: float) -> list:
    """Rates of several configurations in one pass over the grid."""
    if not noise_density > 0:
        raise ValueError("noise density must be > 0")
    gammas = [_gamma_vector(c) for c in configs]
    tags = [c.solver_tag if isinstance(c, PhaseConfig) else "" for c in configs]
    se = np.zeros((len(gammas), bundle.num_nodes))
    for node in range(bundle.num_nodes):
        sl = model.slice(float(bundle.frequencies[node]))
        if not (np.all(np.isfinite(sl.v)) and np.all(np.isfinite(sl.w))
                and np.all(np.isfinite(sl.multipath))):
            raise ValueError("non-finite channel entries")
        vecs = bundle.vectors[:, node, :]
        g_node = bundle.g[:, node]
        for ci, gamma in enumerate(gammas):
            b = _node_gram(sl, vecs, g_node, gamma)
            gram = np.eye(b.shape[1]) + (b.conj().T @ b) / noise_density
            gram = 0.5 * (gram + gram.conj().T)
            chol = np.linalg.cholesky(gram)
            se[ci, node] = 2.0 * float(np.sum(np.log(np.diag(chol).real))) / _LN2
    weights = np.asarray(bundle.weights, float)
    return [RateReport(rate=float(np.sum(se[ci] * weights)), per_node_se=se[ci],
                       noise_density=noise_density, config_tag=tags[ci])
            for ci in range(len(gammas))]


def achievable_rate(model, bundle: PsdBundle, config, noise_density: float) -> RateReport:
    """R = integral of log2|I + H G H^H / N0| over the band, bits/s."""
    return evaluate_rates(model, bundle, [config], noise_density)[0]


def rank_bound_node(slice_, vectors: np.ndarray, g_node: np.ndarray) -> int:
    """Configuration-independent rank bound of Q(f, theta) at one node."""
    n_ue = slice_.v.shape[0]
    L = slice_.v.shape[1]
    active = np.nonzero(g_node > 0)[0]
    rank_g = _num_rank(vectors[active].T) if active.size else 0
    rank_v = _num_rank(slice_.v)
    rank_w = _num_rank(slice_.w)
    rank_mp = _num_rank(slice_.multipath)
    return int(min(n_ue, rank_g, min(L, rank_v, rank_w) + rank_mp))


def psd_rank_node(vectors: np.ndarray, g_node: np.ndarray) -> int:
    active = np.nonzero(g_node > 0)[0]
    return _num_rank(vectors[active].T) if active.size else 0


@dataclass(frozen=True)
class BoundInputs:
    """Per-node rank bounds and their bandwidth coefficients."""

    b_m: np.ndarray       # (M2,) Hz
    r_q: np.ndarray       # (F,) int
    psd_rank: np.ndarray  # (F,) int, rank of G(f) per node


def bound_inputs(model, bundle: PsdBundle, ue_antennas: int) -> BoundInputs:
    """Evaluate r_Q(f) on every node and integrate the B_m coefficients."""
    r_q = np.zeros(bundle.num_nodes, dtype=int)
    g_rank = np.zeros(bundle.num_nodes, dtype=int)
    for node in range(bundle.num_nodes):
        sl = model.slice(float(bundle.frequencies[node]))
        vecs = bundle.vectors[:, node, :]
        g_node = bundle.g[:, node]
        r_q[node] = rank_bound_node(sl, vecs, g_node)
        g_rank[node] = psd_rank_node(vecs, g_node)
    weights = np.asarray(bundle.weights, float)
    m = np.arange(1, ue_antennas + 1)
    b_m = np.array([float(np.sum(weights[r_q >= mm])) for mm in m])
    return BoundInputs(b_m=b_m, r_q=r_q, psd_rank=g_rank)


def upper_bound(coupling: Coupling, inputs: BoundInputs, noise_density: float,
                variant: str = UB_CLOSED_FORM,
                lam_max_ub: float | None = None) -> BoundReport:
    """Closed-form rate upper bound from the relaxed maximum received power."""
    if not noise_density > 0:
        raise ValueError("noise density must be > 0")
    p_hat = relaxed_power_bound(coupling, lam_max_ub)
    b_m = np.asarray(inputs.b_m, float)
    if variant == UB_RANK1:
        if np.any(inputs.psd_rank > 1):
            raise ValueError("ub_rank1 requires a rank-1 PSD matrix on every node")
        b1 = float(b_m[0]) if b_m.size else 0.0
        ub = b1 * math.log2(1.0 + p_hat / (noise_density * b1)) if b1 > 0 else 0.0
    elif variant == UB_CLOSED_FORM:
        total_b = float(np.sum(b_m))
        if total_b > 0:
            per = math.log2(1.0 + p_hat / (noise_density * total_b))
            ub = total_b * per
        else:
            ub = 0.0
    else:
        raise ValueError(f"unknown bound variant {variant!r}")
    return BoundReport(b_m=b_m, r_q=inputs.r_q, ub=float(ub), variant=variant)
