"""Statevector simulation of controlled spoofed-spectrum time evolution.

Time evolution by a degenerate spoofed spectrum is a diagonal phase in the
eigenbasis: basis state x belongs to energy class ``x >> (n - n_tilde)`` and
acquires phase ``exp(-2 pi i entries[class] / 2^m)``, where the fixed-point
integer table realizes ``t * lambda_class`` to m bits.  Two simulators are
provided:

* an implicit one (:func:`apply_pseudo_evolution`) that multiplies the phases
  directly and scales to production sizes and exponentially large t;
* an explicit one (:func:`simulate_explicit_kickback`) that carries the m
  ancilla qubits through the full phase-kickback circuit (Fourier transform,
  modular subtraction, inverse transform) for small registers, verifying that
  the ancillas return to |1...1>.

Register layout is [control?][system][ancilla] with qubit 0 the most
significant index bit; the control, when present, gates only whether the
evolution is applied - the time is a classical parameter, never coherent.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .accel import apply_class_phases
from .ensembles import Spectrum
from .randcore import KWiseFamily, kwise_eval, semicircle_inv_cdf

NORM_TOL = 1e-10
EXPLICIT_MAX_SYSTEM = 3
EXPLICIT_MAX_ANCILLA = 8


# ---------------------------------------------------------------------------
# State helpers
# ---------------------------------------------------------------------------


def basis_state(n_qubits: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=np.complex128)
    psi[index] = 1.0
    return psi


def check_normalized(psi: np.ndarray) -> None:
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValueError(f"state norm^2 = {norm2!r} is not 1 within {NORM_TOL}")


def n_qubits_of(psi: np.ndarray) -> int:
    d = np.asarray(psi).shape[0]
    n = int(d).bit_length() - 1
    if (1 << n) != d:
        raise ValueError("state length must be a power of two")
    return n


# ---------------------------------------------------------------------------
# Quantum Fourier transform on a register subset
# ---------------------------------------------------------------------------


def qft(psi: np.ndarray, qubits, inverse: bool = False) -> np.ndarray:
    """Exact dense DFT on the listed qubits (MSB of the register first).

    Convention: QFT |j> = M^{-1/2} sum_z exp(2 pi i j z / M) |z>.
    """
    n = n_qubits_of(psi)
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits) or any(q < 0 or q >= n for q in qubits):
        raise ValueError("register must be a set of qubits inside the state")
    m = len(qubits)
    big_m = 1 << m
    omega = np.exp((-2j if inverse else 2j) * np.pi / big_m)
    grid = np.arange(big_m)
    f = omega ** np.outer(grid, grid) / np.sqrt(big_m)
    rest = [q for q in range(n) if q not in qubits]
    arr = np.asarray(psi, dtype=np.complex128).reshape([2] * n)
    arr = arr.transpose(rest + qubits).reshape(-1, big_m)
    arr = arr @ f.T
    inv_perm = np.argsort(rest + qubits)
    return arr.reshape([2] * n).transpose(inv_perm).reshape(-1)


# ---------------------------------------------------------------------------
# Fixed-point phase tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseTable:
    """Fixed-point integer phases realizing e^{-i lambda_c t} per energy class.

    ``entries[c] = round((t / 2 pi) * 2^m * lambda_c) mod 2^m``; the phase
    error per application is at most 2 pi / 2^m plus the rounding half-step.
    """

    m: int
    t: float
    entries: np.ndarray
    class_energies: np.ndarray

    @property
    def big_m(self) -> int:
        return 1 << self.m

    @property
    def dtilde(self) -> int:
        return self.entries.shape[0]

    @property
    def class_bits(self) -> int:
        return int(self.dtilde).bit_length() - 1

    def class_of(self, x: int, n_system: int) -> int:
        """Energy class of basis index x: its leading class_bits bits."""
        return x >> (n_system - self.class_bits)

    def phase_factors(self) -> np.ndarray:
        """exp(-2 pi i entries / 2^m), one factor per class."""
        return np.exp(-2j * np.pi * self.entries.astype(np.float64) / self.big_m)


def phase_table_from_energies(t: float, m: int, energies) -> PhaseTable:
    """Fixed-point table for explicitly given class energies."""
    if not (1 <= m <= 63):
        raise ValueError("phase bits must lie in 1..63")
    energies = np.asarray(energies, dtype=np.float64)
    dtilde = energies.shape[0]
    if dtilde & (dtilde - 1):
        raise ValueError("number of classes must be a power of two")
    big_m = 1 << m
    # reduce t*lambda/(2 pi) mod 1 before scaling so float rounding stays at
    # the fractional digit level even for exponentially large t
    theta = (t * energies / (2.0 * np.pi)) % 1.0
    entries = np.round(theta * big_m).astype(np.uint64) % np.uint64(big_m)
    return PhaseTable(m=m, t=float(t), entries=entries, class_energies=energies)


def build_phase_table(t: float, m: int, family: KWiseFamily, dtilde: int) -> PhaseTable:
    """Table for the k-wise spoofed spectrum: lambda_c from the family output.

    The family output is normalized by 2^m before the inverse cdf, so the
    class energies are semicircle quantiles on a 2^{-m} grid.
    """
    if family.out_bits != m:
        raise ValueError("family output bits must match the phase bit count")
    scale = float(1 << m)
    energies = np.array(
        [semicircle_inv_cdf(kwise_eval(family, c) / scale) for c in range(dtilde)]
    )
    return phase_table_from_energies(t, m, energies)


def spectrum_from_table(table: PhaseTable, n_system: int) -> Spectrum:
    """The degenerate spectrum a phase table realizes on an n-qubit system."""
    d = 1 << n_system
    reps = d // table.dtilde
    assignment = np.repeat(table.class_energies, reps)
    return Spectrum.from_assignment(
        assignment, f"degenerate({table.dtilde})", class_energies=table.class_energies
    )


# ---------------------------------------------------------------------------
# Implicit simulator: diagonal phases in the supplied eigenbasis
# ---------------------------------------------------------------------------


def apply_pseudo_evolution(
    psi: np.ndarray,
    table: PhaseTable,
    basis: np.ndarray,
    control: bool = False,
) -> np.ndarray:
    """Apply V diag(e^{-2 pi i entries[class]/2^m}) V^dag to the system register.

    With ``control=True`` the state carries one extra leading qubit and the
    evolution acts only on the control-1 branch; ancilla kickback nets out and
    is simulated implicitly.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    check_normalized(psi)
    d = basis.shape[0]
    n_system = int(d).bit_length() - 1
    if table.class_bits > n_system:
        raise ValueError("more energy classes than system basis states")
    expected = 2 * d if control else d
    if psi.shape[0] != expected:
        raise ValueError("state dimension does not match basis/control layout")

    def evolve_block(block: np.ndarray) -> np.ndarray:
        y = basis.conj().T @ block
        y = np.ascontiguousarray(y)
        apply_class_phases(y, table.phase_factors(), n_system - table.class_bits)
        return basis @ y

    if not control:
        return evolve_block(psi)
    out = psi.reshape(2, d).copy()
    out[1] = evolve_block(out[1])
    return out.reshape(-1)


# ---------------------------------------------------------------------------
# Explicit simulator: full phase-kickback circuit with ancillas
# ---------------------------------------------------------------------------

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


def _kron_power(mat: np.ndarray, m: int) -> np.ndarray:
    return reduce(np.kron, [mat] * m)


def phase_kickback(
    psi_system: np.ndarray,
    m: int,
    f_values: np.ndarray,
    control: int | None = None,
) -> np.ndarray:
    """Full-register kickback circuit applying |x> -> e^{2 pi i f(x)/2^m} |x>.

    Ancillas start and end in |1>^m.  With a control value the register gains
    a leading control qubit prepared in |control>, and the phase is applied
    only on the control-1 branch (the control-0 branch sees the (HX)/(XH)
    sandwich, which the modular subtraction leaves invariant).
    """
    psi_system = np.asarray(psi_system, dtype=np.complex128)
    n = n_qubits_of(psi_system)
    if n > EXPLICIT_MAX_SYSTEM or m > EXPLICIT_MAX_ANCILLA:
        raise ValueError("explicit simulator capped at 3 system / 8 ancilla qubits")
    check_normalized(psi_system)
    d = 1 << n
    big_m = 1 << m
    f_values = np.asarray(f_values, dtype=np.int64) % big_m
    if f_values.shape != (d,):
        raise ValueError("need one phase-function value per system basis state")

    anc0 = np.zeros(big_m, dtype=np.complex128)
    anc0[big_m - 1] = 1.0  # |1>^m
    state = np.einsum("x,z->xz", psi_system, anc0)

    grid = np.arange(big_m)
    # prep kernel: |1>^m = M-1 maps to sum_z omega^z |z> because -(M-1) = 1 mod M
    prep = np.exp(-2j * np.pi * np.outer(grid, grid) / big_m) / np.sqrt(big_m)
    unprep = prep.conj().T
    hx = _kron_power(_H @ _X, m)
    xh = hx.conj().T

    def apply_anc(block: np.ndarray, op: np.ndarray) -> np.ndarray:
        return block @ op.T

    def subtract(block: np.ndarray) -> np.ndarray:
        out = np.empty_like(block)
        for x in range(d):
            out[x] = np.roll(block[x], -int(f_values[x]))
        return out

    if control is None:
        state = apply_anc(state, prep)
        state = subtract(state)
        state = apply_anc(state, unprep)
        return state.reshape(-1)

    if control not in (0, 1):
        raise ValueError("control value must be 0 or 1")
    branches = np.zeros((2, d, big_m), dtype=np.complex128)
    branches[control] = state
    branches[0] = apply_anc(branches[0], hx)
    branches[1] = apply_anc(branches[1], prep)
    branches[0] = subtract(branches[0])
    branches[1] = subtract(branches[1])
    branches[0] = apply_anc(branches[0], xh)
    branches[1] = apply_anc(branches[1], unprep)
    return branches.reshape(-1)


def simulate_explicit_kickback(
    psi_system: np.ndarray,
    table: PhaseTable,
    control: int | None = None,
) -> np.ndarray:
    """Explicit-ancilla simulation of the controlled spectral phase pass.

    Matches :func:`apply_pseudo_evolution` with the identity eigenbasis: the
    applied phase is e^{-2 pi i entries[class(x)]/2^m}, realized by
    subtracting the negated table entries in the Fourier frame.
    """
    n = n_qubits_of(np.asarray(psi_system))
    big_m = table.big_m
    xs = np.arange(1 << n)
    classes = xs >> (n - table.class_bits)
    f_values = (big_m - table.entries.astype(np.int64)[classes]) % big_m
    return phase_kickback(psi_system, table.m, f_values, control=control)


def ancilla_marginal_weight(state: np.ndarray, n_system: int, m: int, control: bool) -> float:
    """Probability weight on the |1>^m ancilla configuration."""
    big_m = 1 << m
    lead = 2 if control else 1
    arr = state.reshape(lead * (1 << n_system), big_m)
    return float((np.abs(arr[:, big_m - 1]) ** 2).sum())


def system_marginal(state: np.ndarray, n_system: int, m: int, control: int | None) -> np.ndarray:
    """System-register amplitudes conditioned on ancillas |1>^m (and the
    control branch that was prepared)."""
    big_m = 1 << m
    if control is None:
        arr = state.reshape(1 << n_system, big_m)
        return arr[:, big_m - 1].copy()
    arr = state.reshape(2, 1 << n_system, big_m)
    return arr[control, :, big_m - 1].copy()


# ---------------------------------------------------------------------------
# Fast-forwarding cost model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimCostReport:
    """Phase-bit and gate-count requirements to reach time t at phase error eps."""

    t: float
    epsilon: float
    m: int
    elementary_ops: int


def _ceil_log2(x: float) -> int:
    return int(math.ceil(math.log2(x) - 1e-12))


def fastforward_cost(t: float, epsilon: float) -> SimCostReport:
    """Required phase bits m = ceil(log2 t) + ceil(log2(2 pi / eps)) and the
    O(m^2) elementary-operation estimate of one evolution application.

    m grows by exactly one per doubling of t, so simulation cost is
    polylogarithmic in the evolution time.
    """
    if t < 1.0:
        raise ValueError("time must be at least 1")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("phase error must lie in (0, 1)")
    m = _ceil_log2(t) + _ceil_log2(2.0 * np.pi / epsilon)
    ops = 2 * m * m + 3 * m  # Fourier pair + modular subtractor
    return SimCostReport(t=float(t), epsilon=float(epsilon), m=m, elementary_ops=ops)


# ---------------------------------------------------------------------------
# Binary state dump (little-endian): magic "PCSV", u32 n_total, then
# interleaved (re, im) float64 amplitudes in computational-basis order
# ---------------------------------------------------------------------------

STATE_MAGIC = b"PCSV"


def write_state_dump(path, psi: np.ndarray) -> None:
    psi = np.asarray(psi, dtype=np.complex128)
    n = n_qubits_of(psi)
    interleaved = np.empty((psi.shape[0], 2), dtype="<f8")
    interleaved[:, 0] = psi.real
    interleaved[:, 1] = psi.imag
    with open(path, "wb") as fh:
        fh.write(STATE_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(interleaved.tobytes())


def read_state_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != STATE_MAGIC:
            raise ValueError("not a state dump file")
        (n,) = struct.unpack("<I", fh.read(4))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != 2 << n:
        raise ValueError("truncated state dump")
    flat = raw.reshape(-1, 2)
    return (flat[:, 0] + 1j * flat[:, 1]).astype(np.complex128)
