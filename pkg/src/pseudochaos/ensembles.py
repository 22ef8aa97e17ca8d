"""Hamiltonian ensembles: GUE, spoofed spectra, Haar bases, and propagators.

The central construction is H = U diag(L) U^dag with the eigenbasis U and the
spectrum L drawn independently.  Four ensemble kinds are supported:

* ``gue``       - dense GUE matrices (Haar eigenvectors, correlated spectrum);
* ``pseudo``    - Haar basis with a spoofed spectrum: iid semicircle draws,
                  optionally degenerate (d_tilde distinct values, each repeated
                  d/d_tilde times) and optionally only k-wise independent;
* ``diag-gue``  - computational-basis diagonal with GUE eigenvalue statistics;
* ``diag-iid``  - computational-basis diagonal with (degenerate) iid spectrum.

Degenerate spectra assign energies to basis states in contiguous blocks: basis
index x belongs to class ``x >> (n - n_tilde)`` (its leading n_tilde bits), so
there are exactly d_tilde distinct energies with multiplicity d/d_tilde each.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import EigendecompositionError
from .randcore import KWiseFamily, kwise_eval, sample_semicircle, semicircle_inv_cdf
from .rng import SeededRng

DEFAULT_KWISE_BITS = 48

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-8


# ---------------------------------------------------------------------------
# Specs and spectra
# ---------------------------------------------------------------------------

ENSEMBLE_KINDS = ("gue", "pseudo", "diag-gue", "diag-iid")


@dataclass(frozen=True)
class EnsembleSpec:
    """Declarative description of a Hamiltonian ensemble.

    ``dtilde`` is the number of distinct eigenvalues for the spoofed kinds
    (defaults to d, i.e. no degeneracy); ``kwise`` switches the spoofed
    spectrum from fully iid to a k-wise independent family of that order.
    """

    n_qubits: int
    kind: str = "gue"
    dtilde: int | None = None
    kwise: int | None = None
    basis_mode: str = ""

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind in ("pseudo", "diag-iid"):
            dt = self.d if self.dtilde is None else self.dtilde
            if dt < 1 or self.d % dt != 0 or (dt & (dt - 1)) != 0:
                raise ValueError("dtilde must be a power of two dividing d")
            object.__setattr__(self, "dtilde", dt)
        elif self.dtilde is not None:
            raise ValueError(f"dtilde is meaningless for kind {self.kind!r}")
        if self.kwise is not None:
            if self.kind != "pseudo":
                raise ValueError("k-wise spectra only apply to the pseudo kind")
            if self.kwise < 1:
                raise ValueError("kwise order must be positive")
        if not self.basis_mode:
            mode = "haar" if self.kind in ("gue", "pseudo") else "identity"
            object.__setattr__(self, "basis_mode", mode)
        if self.basis_mode not in ("haar", "identity"):
            raise ValueError(f"unknown basis mode {self.basis_mode!r}")

    @property
    def d(self) -> int:
        return 1 << self.n_qubits


@dataclass(frozen=True)
class Spectrum:
    """A sampled spectrum: sorted eigenvalues plus their basis assignment.

    ``values`` is sorted ascending; ``assignment[x]`` is the energy attached
    to computational basis state x (the pre-sort layout, which degenerate
    ensembles and the Gibbs sampler key on).  ``class_energies`` holds the
    d_tilde distinct energies in class order when the spectrum is degenerate.
    """

    values: np.ndarray
    assignment: np.ndarray
    provenance: str
    class_energies: np.ndarray | None = field(default=None)

    @classmethod
    def from_assignment(
        cls,
        assignment: np.ndarray,
        provenance: str,
        class_energies: np.ndarray | None = None,
    ) -> "Spectrum":
        assignment = np.asarray(assignment, dtype=np.float64)
        return cls(
            values=np.sort(assignment),
            assignment=assignment,
            provenance=provenance,
            class_energies=class_energies,
        )

    @property
    def d(self) -> int:
        return self.values.shape[0]

    def n_distinct(self) -> int:
        return np.unique(self.values).shape[0]


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_gue(d: int, rng: SeededRng | np.random.Generator) -> np.ndarray:
    """GUE draw: diagonal entries N(0, 1/d), off-diagonal re/im N(0, 1/(2d)).

    This normalization keeps the spectrum at O(1) scale (semicircle on
    [-2, 2]) rather than growing with d.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    sigma_off = np.sqrt(1.0 / (2.0 * d))
    re = gen.normal(0.0, sigma_off, size=(d, d))
    im = gen.normal(0.0, sigma_off, size=(d, d))
    upper = np.triu(re + 1j * im, k=1)
    diag = gen.normal(0.0, np.sqrt(1.0 / d), size=d)
    return upper + upper.conj().T + np.diag(diag).astype(np.complex128)


def sample_haar_unitary(d: int, rng: SeededRng | np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The R-diagonal phase correction makes the distribution exactly Haar
    rather than merely column-orthonormal.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    z = (gen.normal(size=(d, d)) + 1j * gen.normal(size=(d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))


def sample_spectrum(spec: EnsembleSpec, rng: SeededRng | np.random.Generator) -> Spectrum:
    """Draw a spectrum according to the ensemble spec.

    GUE kinds diagonalize a fresh GUE matrix; spoofed kinds draw d_tilde
    semicircle values (iid or through a fresh k-wise family) and repeat each
    d/d_tilde times in contiguous blocks before sorting.
    """
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    d = spec.d
    if spec.kind in ("gue", "diag-gue"):
        vals = np.linalg.eigvalsh(sample_gue(d, gen))
        return Spectrum.from_assignment(vals, "gue")

    dt = spec.dtilde
    reps = d // dt
    if spec.kwise is None:
        distinct = np.asarray(sample_semicircle(gen, size=dt), dtype=np.float64)
        provenance = "iid" if dt == d else f"degenerate({dt})"
    else:
        family = KWiseFamily.random(spec.kwise, DEFAULT_KWISE_BITS, gen)
        scale = float(1 << family.out_bits)
        distinct = np.array(
            [semicircle_inv_cdf(kwise_eval(family, c) / scale) for c in range(dt)],
            dtype=np.float64,
        )
        provenance = f"kwise({dt},{spec.kwise})"
    assignment = np.repeat(distinct, reps)
    return Spectrum.from_assignment(assignment, provenance, class_energies=distinct)


def sample_basis(spec: EnsembleSpec, rng: SeededRng | np.random.Generator) -> np.ndarray:
    """Eigenbasis draw: Haar unitary or the identity, per the spec."""
    if spec.basis_mode == "identity":
        return np.eye(spec.d, dtype=np.complex128)
    return sample_haar_unitary(spec.d, rng)


def sample_hamiltonian(
    spec: EnsembleSpec, rng: SeededRng | np.random.Generator
) -> tuple[np.ndarray, Spectrum, np.ndarray]:
    """Draw (H, spectrum, basis) for the ensemble.

    For the dense GUE kind, H is the raw Gaussian draw and the basis is its
    eigenvector matrix, so H = V diag(L) V^dag holds exactly up to the solver
    residual.
    """
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    if spec.kind == "gue":
        h = sample_gue(spec.d, gen)
        res = eig_hermitian(h, provenance="gue")
        return h, res.spectrum, res.basis
    spectrum = sample_spectrum(spec, gen)
    basis = sample_basis(spec, gen)
    return assemble_hamiltonian(basis, spectrum), spectrum, basis


# ---------------------------------------------------------------------------
# Assembly, decomposition, propagation
# ---------------------------------------------------------------------------


def assemble_hamiltonian(basis: np.ndarray, spectrum: Spectrum | np.ndarray) -> np.ndarray:
    """U diag(L) U^dag, re-Hermitized by averaging with its adjoint.

    Uses the basis-order assignment, so basis column x carries energy
    ``assignment[x]``.
    """
    energies = spectrum.assignment if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    basis = np.asarray(basis, dtype=np.complex128)
    if basis.shape[0] != basis.shape[1] or basis.shape[0] != energies.shape[0]:
        raise ValueError("basis and spectrum dimensions do not match")
    h = (basis * energies) @ basis.conj().T
    return 0.5 * (h + h.conj().T)


@dataclass(frozen=True)
class EigResult:
    """Eigendecomposition output with its verified reconstruction residual."""

    spectrum: Spectrum
    basis: np.ndarray
    residual: float


def eig_hermitian(h: np.ndarray, provenance: str = "eig") -> EigResult:
    """Dense Hermitian eigendecomposition with residual verification.

    The reconstruction residual max|H - V diag(L) V^dag| is computed on every
    call; failure to converge or a residual above tolerance raises
    EigendecompositionError rather than returning silently wrong output.
    """
    h = np.asarray(h, dtype=np.complex128)
    scale = max(1.0, float(np.abs(h).max()))
    if np.abs(h - h.conj().T).max() > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    try:
        values, basis = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(f"eigensolver failed to converge: {exc}") from exc
    residual = float(np.abs((basis * values) @ basis.conj().T - h).max())
    if residual > EIG_RESIDUAL_TOL * scale:
        raise EigendecompositionError(
            f"eigendecomposition residual {residual:.3e} exceeds tolerance"
        )
    spectrum = Spectrum.from_assignment(values, provenance)
    return EigResult(spectrum=spectrum, basis=basis, residual=residual)


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary e^{-iHt} through the eigendecomposition of H."""
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    res = eig_hermitian(h)
    phases = np.exp(-1j * res.spectrum.values * t)
    return (res.basis * phases) @ res.basis.conj().T


# ---------------------------------------------------------------------------
# Binary matrix dump (little-endian): magic "PCHM", u32 d, u8 kind, then
# row-major interleaved (re, im) float64 entries
# ---------------------------------------------------------------------------

MATRIX_MAGIC = b"PCHM"


def write_matrix_dump(path, matrix: np.ndarray, kind: int = 0) -> None:
    matrix = np.asarray(matrix, dtype=np.complex128)
    d = matrix.shape[0]
    if matrix.shape != (d, d):
        raise ValueError("matrix must be square")
    if not (0 <= kind <= 255):
        raise ValueError("kind must fit in one byte")
    interleaved = np.empty((d, d, 2), dtype="<f8")
    interleaved[..., 0] = matrix.real
    interleaved[..., 1] = matrix.imag
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<IB", d, kind))
        fh.write(interleaved.tobytes())


def read_matrix_dump(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MATRIX_MAGIC:
            raise ValueError("not a matrix dump file")
        d, kind = struct.unpack("<IB", fh.read(5))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != 2 * d * d:
        raise ValueError("truncated matrix dump")
    flat = raw.reshape(d, d, 2)
    return (flat[..., 0] + 1j * flat[..., 1]).astype(np.complex128), kind
