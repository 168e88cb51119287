"""Received-power quadratic form: P_rx(gamma) = gamma^H T gamma + w + 2 Re{q^H gamma}.

T is assembled as a sum of Gram matrices (one per grid node and beam), so it
is Hermitian PSD by construction and oriented so that the quadratic form with
the physical configuration vector gamma_l = exp(j theta_l) reproduces the
trace integral of the received power exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectrum import PsdBundle

DEFAULT_MEM_CAP_GB = 1.0
_SIDECAR_MAGIC = b"IRSCPL01"


class ContractViolation(ValueError):
    """A caller broke a documented interface contract."""


class MemoryLimitError(RuntimeError):
    """The dense coupling matrix would exceed the configured memory cap."""


@dataclass(frozen=True)
class PhaseConfig:
    """Unit-modulus IRS configuration with solver provenance."""

    gamma: np.ndarray
    solver_tag: str = ""

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=complex)
        object.__setattr__(self, "gamma", g)
        if g.ndim != 1 or g.size < 1:
            raise ContractViolation("gamma must be a 1-D complex vector")
        if np.max(np.abs(np.abs(g) - 1.0)) > 1e-12:
            raise ContractViolation("gamma entries must be unit modulus (within 1e-12)")

    @property
    def thetas(self) -> np.ndarray:
        return np.angle(self.gamma)

    def retag(self, tag: str) -> "PhaseConfig":
        return PhaseConfig(gamma=self.gamma, solver_tag=tag)


@dataclass(frozen=True)
class Coupling:
    """Hermitian quadratic-form data of the received power, all in watts."""

    t: np.ndarray   # (L, L) Hermitian PSD
    q: np.ndarray   # (L,)
    w: float
    bs_antennas: int
    ue_antennas: int
    num_beams: int

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex)
        q = np.asarray(self.q, dtype=complex)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", q)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ContractViolation("T must be square")
        if q.shape != (t.shape[0],):
            raise ContractViolation("q length inconsistent with T")
        scale = max(float(np.trace(t).real), 1e-300)
        if np.max(np.abs(t - t.conj().T)) > 1e-12 * scale:
            raise ContractViolation("T must be Hermitian")
        if self.w < 0:
            raise ContractViolation("w must be >= 0")

    @property
    def num_elements(self) -> int:
        return self.t.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.t).real)


def memory_guard(num_elements: int, mem_cap_gb: float) -> None:
    """Refuse dense L x L storage beyond the configured cap."""
    need = 16.0 * num_elements * num_elements
    if need > mem_cap_gb * 2.0 ** 30:
        raise MemoryLimitError(
            f"dense coupling matrix for L={num_elements} needs "
            f"{need / 2.0 ** 30:.2f} GiB > cap {mem_cap_gb:.2f} GiB")


def _pairwise_sum(terms: list):
    """Deterministic pairwise tree reduction of a list of arrays/scalars."""
    items = list(terms)
    if not items:
        return 0.0
    while len(items) > 1:
        nxt = []
        for i in range(0, len(items) - 1, 2):
            nxt.append(items[i] + items[i + 1])
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def assemble_coupling(model, bundle: PsdBundle,
                      mem_cap_gb: float = DEFAULT_MEM_CAP_GB) -> Coupling:
    """Accumulate T, q and w over all grid nodes and beams.

    Per node and beam the contribution is a Gram update T += c X^H X with
    X = V diag(w_l^T v_k), which is algebraically identical to the per-entry
    trace definition.  Nodes are processed in a fixed order; q and w use a
    pairwise tree reduction, T accumulates in place to bound memory.
    """
    L = model.num_elements
    memory_guard(L, mem_cap_gb)
    t = np.zeros((L, L), dtype=complex)
    q_terms = []
    w_terms = []
    n_bs = n_ue = 0
    for node in range(bundle.num_nodes):
        sl = model.slice(float(bundle.frequencies[node]))
        n_ue, n_bs = sl.multipath.shape
        vecs = bundle.vectors[:, node, :]                 # (K, M1)
        coeff = bundle.g[:, node] * bundle.weights[node]  # (K,)
        s = sl.w.T @ vecs.T                               # (L, K): w_l^T v_k
        has_mp = np.any(sl.multipath)
        q_node = np.zeros(L, dtype=complex)
        w_node = 0.0
        for k in range(vecs.shape[0]):
            c = coeff[k]
            if c == 0.0:
                continue
            x = np.sqrt(c) * (sl.v * s[:, k][None, :])    # (M2, L)
            t += x.conj().T @ x
            if has_mp:
                b = np.sqrt(c) * (sl.multipath @ vecs[k])  # (M2,)
                q_node += x.conj().T @ b
                w_node += float(np.vdot(b, b).real)
        q_terms.append(q_node)
        w_terms.append(w_node)
    t = 0.5 * (t + t.conj().T)
    d = np.einsum("ii->i", t)
    d[:] = d.real  # zero tiny imaginary residue on the diagonal
    q = _pairwise_sum(q_terms) if q_terms else np.zeros(L, dtype=complex)
    w = float(_pairwise_sum(w_terms)) if w_terms else 0.0
    return Coupling(t=t, q=np.asarray(q, complex), w=max(w, 0.0),
                    bs_antennas=n_bs, ue_antennas=n_ue, num_beams=bundle.num_beams)


def _gamma_vector(gamma) -> np.ndarray:
    if isinstance(gamma, PhaseConfig):
        return gamma.gamma
    g = np.asarray(gamma, dtype=complex)
    if g.ndim != 1:
        raise ContractViolation("gamma must be a 1-D vector")
    if np.max(np.abs(np.abs(g) - 1.0)) > 1e-9:
        raise ContractViolation("gamma entries must be unit modulus")
    return g


def quadratic_objective(coupling: Coupling, gamma: np.ndarray) -> float:
    """gamma^H T gamma + 2 Re{q^H gamma}; the configuration-dependent power."""
    g = np.asarray(gamma, dtype=complex)
    return float((np.vdot(g, coupling.t @ g) + 2.0 * np.vdot(coupling.q, g)).real)


def received_power(coupling: Coupling, gamma) -> float:
    """Total received power for a unit-modulus configuration, watts."""
    g = _gamma_vector(gamma)
    if g.size != coupling.num_elements:
        raise ContractViolation("gamma length inconsistent with the coupling")
    p = quadratic_objective(coupling, g) + coupling.w
    tol = 1e-10 * (coupling.trace + coupling.w + 1e-300)
    if p < -tol:
        raise ArithmeticError(f"received power {p!r} below the PSD tolerance")
    return max(p, 0.0)


def direct_received_power(model, bundle: PsdBundle, gamma) -> float:
    """Definitional route: quadrature of Tr{H(f) G(f) H(f)^H} with the dense H.

    Independent oracle for `received_power`; kept free of the factored
    quadratic-form algebra.
    """
    g = _gamma_vector(gamma)
    terms = []
    for node in range(bundle.num_nodes):
        sl = model.slice(float(bundle.frequencies[node]))
        h = sl.total(g)
        acc = 0.0
        for k in range(bundle.num_beams):
            y = h @ bundle.vectors[k, node]
            acc += bundle.g[k, node] * float(np.vdot(y, y).real)
        terms.append(acc * float(bundle.weights[node]))
    return float(_pairwise_sum(terms))


def save_coupling(coupling: Coupling, path) -> None:
    """Binary sidecar: magic, int64 L/M1/M2/K, float64 w, q, then the
    row-major upper triangle of T (complex128, little-endian)."""
    L = coupling.num_elements
    iu = np.triu_indices(L)
    with open(path, "wb") as fh:
        fh.write(_SIDECAR_MAGIC)
        fh.write(struct.pack("<qqqq", L, coupling.bs_antennas, coupling.ue_antennas,
                             coupling.num_beams))
        fh.write(struct.pack("<d", coupling.w))
        fh.write(np.ascontiguousarray(coupling.q, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(coupling.t[iu], dtype="<c16").tobytes())


def load_coupling(path) -> Coupling:
    raw = Path(path).read_bytes()
    if raw[:8] != _SIDECAR_MAGIC:
        raise ValueError("not a coupling sidecar file")
    off = 8
    L, n_bs, n_ue, k = struct.unpack_from("<qqqq", raw, off)
    off += 32
    (w,) = struct.unpack_from("<d", raw, off)
    off += 8
    q = np.frombuffer(raw, dtype="<c16", count=L, offset=off).astype(complex)
    off += 16 * L
    n_up = L * (L + 1) // 2
    upper = np.frombuffer(raw, dtype="<c16", count=n_up, offset=off).astype(complex)
    t = np.zeros((L, L), dtype=complex)
    iu = np.triu_indices(L)
    t[iu] = upper
    il = np.tril_indices(L, -1)
    t[il] = t.conj().T[il]
    return Coupling(t=t, q=q, w=float(w), bs_antennas=int(n_bs), ue_antennas=int(n_ue),
                    num_beams=int(k))
