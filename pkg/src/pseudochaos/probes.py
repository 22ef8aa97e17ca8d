"""Probes of quantum chaos: OTOCs, entanglement, operator entanglement, and
stabilizer entropy, plus the Haar-averaged reference values they are compared
against.

Conventions: qubit 0 is the most significant bit of the computational basis
index, entropies are in bits (base-2 logs), and a Pauli operator is encoded by
an (x_mask, z_mask) pair with matrix i^{|x & z|} X^x Z^z, which is Hermitian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accel import pauli_expectation_table
from .rng import SeededRng

STAB_ENTROPY_MAX_QUBITS = 8
LOE_MAX_QUBITS = 7


# ---------------------------------------------------------------------------
# Pauli labels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PauliLabel:
    """n-qubit Pauli encoded by X and Z bit masks (bit i acts on index bit i)."""

    x_mask: int
    z_mask: int
    n_qubits: int

    def __post_init__(self) -> None:
        top = 1 << self.n_qubits
        if not (0 <= self.x_mask < top and 0 <= self.z_mask < top):
            raise ValueError("masks must fit in n_qubits bits")

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def commutes_with(self, other: "PauliLabel") -> bool:
        sym = bin(self.x_mask & other.z_mask).count("1") + bin(
            self.z_mask & other.x_mask
        ).count("1")
        return sym % 2 == 0


def pauli_matrix(label: PauliLabel) -> np.ndarray:
    """Dense Hermitian matrix of the Pauli label."""
    d = 1 << label.n_qubits
    idx = np.arange(d)
    phase = 1j ** (bin(label.x_mask & label.z_mask).count("1") % 4)
    signs = 1.0 - 2.0 * (_popcount_vec(label.z_mask & idx) % 2)
    mat = np.zeros((d, d), dtype=np.complex128)
    mat[idx ^ label.x_mask, idx] = phase * signs
    return mat


def apply_pauli(psi: np.ndarray, label: PauliLabel) -> np.ndarray:
    """P |psi> without building the matrix."""
    d = 1 << label.n_qubits
    idx = np.arange(d)
    phase = 1j ** (bin(label.x_mask & label.z_mask).count("1") % 4)
    signs = 1.0 - 2.0 * (_popcount_vec(label.z_mask & idx) % 2)
    out = np.empty_like(psi)
    out[idx ^ label.x_mask] = phase * signs * psi
    return out


def _popcount_vec(vals: np.ndarray) -> np.ndarray:
    counts = np.zeros_like(vals)
    v = vals.copy()
    while v.any():
        counts += v & 1
        v >>= 1
    return counts


# ---------------------------------------------------------------------------
# Bipartite purities and entropies
# ---------------------------------------------------------------------------


def _cut_matrix(psi: np.ndarray, cut, n: int) -> np.ndarray:
    """Reshape a state over n qubits into a (d_A, d_B) matrix for the cut."""
    cut = sorted(set(int(q) for q in cut))
    if any(q < 0 or q >= n for q in cut):
        raise ValueError("cut references qubits outside the register")
    rest = [q for q in range(n) if q not in cut]
    arr = np.asarray(psi).reshape([2] * n).transpose(cut + rest)
    return arr.reshape(1 << len(cut), 1 << len(rest))


def subsystem_purity(psi: np.ndarray, cut) -> float:
    """tr(rho_A^2) for the reduced state on the cut qubits."""
    n = int(np.asarray(psi).shape[0]).bit_length() - 1
    if len(set(cut)) in (0, n):
        raise ValueError("cut must be a nonempty proper subset of the qubits")
    g = _cut_matrix(psi, cut, n)
    s = g @ g.conj().T if g.shape[0] <= g.shape[1] else g.conj().T @ g
    return float(np.vdot(s, s).real)


def renyi2_entanglement(psi: np.ndarray, cut) -> float:
    """2-Renyi entanglement entropy -log2 tr(rho_A^2), in bits."""
    return -math.log2(subsystem_purity(psi, cut))


def stabilizer_purity(psi: np.ndarray) -> float:
    """d^{-1} sum_P <psi|P|psi>^4 over all 4^n Paulis (exact enumeration)."""
    d = np.asarray(psi).shape[0]
    n = int(d).bit_length() - 1
    if n > STAB_ENTROPY_MAX_QUBITS:
        raise ValueError("Pauli enumeration capped at 8 qubits")
    table = pauli_expectation_table(psi)
    return float((table**4).sum() / d)


def stabilizer_entropy(psi: np.ndarray, alpha: float = 2.0) -> float:
    """Stabilizer Renyi entropy of order alpha >= 2, in bits.

    (1/(1-alpha)) log2 of the normalized 2 alpha-power sum of the Pauli
    expectation spectrum; zero exactly on stabilizer states.
    """
    if alpha < 2:
        raise ValueError("order must be at least 2")
    d = np.asarray(psi).shape[0]
    n = int(d).bit_length() - 1
    if n > STAB_ENTROPY_MAX_QUBITS:
        raise ValueError("Pauli enumeration capped at 8 qubits")
    table = pauli_expectation_table(psi)
    powersum = float((np.abs(table) ** (2.0 * alpha)).sum() / d)
    return math.log2(powersum) / (1.0 - alpha)


def operator_purity(u_t: np.ndarray, o1: PauliLabel, cut) -> float:
    """Purity of the Heisenberg-evolved operator's Choi state across the
    doubled cut (A u A') | (B u B')."""
    if o1.is_identity:
        raise ValueError("operator entanglement is undefined for the identity")
    n = o1.n_qubits
    if n > LOE_MAX_QUBITS:
        raise ValueError("Choi doubling capped at 7 system qubits")
    d = 1 << n
    if u_t.shape != (d, d):
        raise ValueError("unitary dimension does not match the Pauli label")
    op_t = u_t @ pauli_matrix(o1) @ u_t.conj().T
    choi = op_t.reshape(-1)
    choi = choi / np.linalg.norm(choi)
    doubled_cut = sorted(set(cut)) + [n + q for q in sorted(set(cut))]
    return subsystem_purity(choi, doubled_cut)


def local_operator_entanglement(u_t: np.ndarray, o1: PauliLabel, cut) -> float:
    """2-Renyi entanglement of the Choi vector of O1(t), in bits."""
    return -math.log2(operator_purity(u_t, o1, cut))


# ---------------------------------------------------------------------------
# Out-of-time-ordered correlators
# ---------------------------------------------------------------------------


def otoc4_exact(u_t: np.ndarray, p1: PauliLabel, p2: PauliLabel) -> float:
    """(1/d) Re tr[P1(t) P2 P1(t) P2] with P1(t) = U_t P1 U_t^dag."""
    if p1.is_identity or p2.is_identity:
        raise ValueError("OTOC requires non-identity Paulis")
    d = u_t.shape[0]
    p1t = u_t @ pauli_matrix(p1) @ u_t.conj().T
    m2 = pauli_matrix(p2)
    w = p1t @ m2 @ p1t @ m2
    return float(np.trace(w).real / d)


@dataclass(frozen=True)
class SampledEstimate:
    mean: float
    std_error: float
    shots: int


def otoc4_sampled(
    u_t: np.ndarray,
    p1: PauliLabel,
    p2: PauliLabel,
    shots: int,
    rng: SeededRng,
) -> SampledEstimate:
    """Monte-Carlo OTOC estimate via the random-bitstring overlap protocol.

    Each shot prepares a uniformly random basis state |x>, applies the chain
    P1(t) P2 P1(t) P2, and records the real part of the overlap with |x>; the
    shot mean estimates the OTOC with standard error ~ shots^{-1/2}.
    """
    if shots < 1:
        raise ValueError("need at least one shot")
    d = u_t.shape[0]
    p1t = u_t @ pauli_matrix(p1) @ u_t.conj().T
    m2 = pauli_matrix(p2)
    diag = np.einsum("ij,jk,kl,li->i", p1t, m2, p1t, m2).real
    gen = rng.generator()
    xs = gen.integers(0, d, size=shots)
    vals = diag[xs]
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(shots)) if shots > 1 else float("inf")
    return SampledEstimate(mean=mean, std_error=se, shots=shots)


# ---------------------------------------------------------------------------
# Haar-averaged reference values (leading + subleading in 1/d)
# ---------------------------------------------------------------------------

HAAR_QUANTITIES = ("purity", "stab_purity", "op_purity", "otoc4")


@dataclass(frozen=True)
class HaarPrediction:
    quantity: str
    leading: float
    subleading: float

    @property
    def total(self) -> float:
        return self.leading + self.subleading


def haar_reference(
    quantity: str,
    z: complex,
    z2: complex,
    d: int,
    d_a: int | None = None,
    d_b: int | None = None,
) -> HaarPrediction:
    """Haar-eigenbasis ensemble average of a probe at fixed spectrum.

    ``z`` and ``z2`` are the exact form factors Z(L t) and Z(2 L t) of the
    fixed spectrum.  The operator-purity row assumes a half cut (d_a == d_b);
    the OTOC row assumes commuting non-identity Paulis.
    """
    z = complex(z)
    z2 = complex(z2)
    if abs(z) > 1 + 1e-9 or abs(z2) > 1 + 1e-9:
        raise ValueError("form factors must have modulus at most 1")
    az2 = abs(z) ** 2
    az4 = az2 * az2
    az8 = az4 * az4
    cross = (z * z * z2.conjugate()).real
    if quantity == "purity":
        if d_a is None or d_b is None:
            raise ValueError("purity needs both subsystem dimensions")
        return HaarPrediction("purity", az4, (1.0 / d_a + 1.0 / d_b) * (1.0 - az4))
    if quantity == "stab_purity":
        return HaarPrediction("stab_purity", az8, (12.0 * az4 * cross - 16.0 * az8 + 4.0) / d)
    if quantity == "op_purity":
        if d_a is not None and d_b is not None and d_a != d_b:
            raise ValueError("operator purity reference assumes a half cut")
        sub = (
            2.0 * (z**4 * (z2.conjugate() ** 2)).real
            + 2.0 * az4 * abs(z2) ** 2
            - 2.0 * az8
            - 4.0 * az4 * cross
            + 2.0
        ) / d
        return HaarPrediction("op_purity", az8, sub)
    if quantity == "otoc4":
        return HaarPrediction("otoc4", az4, 0.0)
    raise ValueError(f"unknown quantity {quantity!r}")
