"""Hot numeric kernels: numba-jitted with pure-numpy fallbacks.

The inner loops that dominate runtime live here in two variants each: a
``numba.njit`` version and a pure-numpy version.  Selection happens once at
import time:

* if the environment variable ``PC_NO_NUMBA`` is set to ``1``/``true``, or
  numba is not importable, the numpy fallbacks are used;
* otherwise the jitted kernels are used.

Both variants of every kernel compute identical results (same reduction
order), so switching the flag never changes numeric output, only speed.
``benchmarks/bench_kernels.py`` times the two paths side by side.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("PC_NO_NUMBA", "").strip().lower()
_DISABLED = _FLAG in {"1", "true", "yes", "on"}

if not _DISABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None
else:
    numba = None

NUMBA_ENABLED = numba is not None


def popcount_table(n_bits: int) -> np.ndarray:
    """Bit-count lookup table for integers in [0, 2**n_bits)."""
    vals = np.arange(1 << n_bits, dtype=np.int64)
    counts = np.zeros(1 << n_bits, dtype=np.int64)
    while vals.any():
        counts += vals & 1
        vals >>= 1
    return counts


# ---------------------------------------------------------------------------
# Walsh-Hadamard transform and Pauli expectation tables
#
# For a pure state psi the expectation of the Pauli with bit masks (x, z) is
#     <P(x,z)> = Re[ i^{popcount(x & z)} * sum_j (-1)^{popcount(z & j)}
#                                          conj(psi[j ^ x]) psi[j] ]
# and for fixed x the map z -> signed sum is exactly a Walsh-Hadamard
# transform of c_j = conj(psi[j ^ x]) psi[j].  One WHT per x yields the whole
# 4^n table in O(8^n * n / 2^n) work instead of the naive O(8^n).
# ---------------------------------------------------------------------------


def _wht_inplace_numpy(a: np.ndarray) -> None:
    d = a.shape[0]
    h = 1
    while h < d:
        blocks = a.reshape(-1, 2 * h)
        u = blocks[:, :h].copy()
        v = blocks[:, h:]
        blocks[:, :h] = u + v
        blocks[:, h:] = u - v
        h *= 2


def _pauli_table_numpy(psi: np.ndarray, popcnt: np.ndarray) -> np.ndarray:
    d = psi.shape[0]
    table = np.empty((d, d), dtype=np.float64)
    conj = psi.conj()
    idx = np.arange(d)
    for x in range(d):
        c = conj[idx ^ x] * psi
        _wht_inplace_numpy(c)
        w = popcnt[idx & x] & 3
        val = c.real.copy()
        val[w == 1] = -c.imag[w == 1]
        val[w == 2] = -c.real[w == 2]
        val[w == 3] = c.imag[w == 3]
        table[x] = val
    return table


if NUMBA_ENABLED:

    @numba.njit(cache=True)
    def _pauli_table_numba(psi, popcnt):  # pragma: no cover - exercised via dispatch
        d = psi.shape[0]
        table = np.empty((d, d), dtype=np.float64)
        c = np.empty(d, dtype=np.complex128)
        for x in range(d):
            for j in range(d):
                c[j] = np.conj(psi[j ^ x]) * psi[j]
            h = 1
            while h < d:
                for i in range(0, d, 2 * h):
                    for j in range(i, i + h):
                        u = c[j]
                        v = c[j + h]
                        c[j] = u + v
                        c[j + h] = u - v
                h *= 2
            for z in range(d):
                w = popcnt[z & x] & 3
                if w == 0:
                    table[x, z] = c[z].real
                elif w == 1:
                    table[x, z] = -c[z].imag
                elif w == 2:
                    table[x, z] = -c[z].real
                else:
                    table[x, z] = c[z].imag
        return table


def pauli_expectation_table(psi: np.ndarray) -> np.ndarray:
    """All 4^n Pauli expectations of a pure n-qubit state.

    Returns a (2^n, 2^n) real array indexed ``[x_mask, z_mask]``.
    """
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    d = psi.shape[0]
    n = int(d).bit_length() - 1
    if (1 << n) != d:
        raise ValueError("state length must be a power of two")
    popcnt = popcount_table(max(n, 1))
    if NUMBA_ENABLED:
        return _pauli_table_numba(psi, popcnt)
    return _pauli_table_numpy(psi, popcnt)


# ---------------------------------------------------------------------------
# Diagonal phase application keyed by the leading bits of the basis index
# ---------------------------------------------------------------------------


def _apply_class_phases_numpy(amps: np.ndarray, factors: np.ndarray, shift: int) -> None:
    d = amps.shape[-1]
    amps *= factors[np.arange(d) >> shift]


if NUMBA_ENABLED:

    @numba.njit(cache=True)
    def _apply_class_phases_numba(amps, factors, shift):  # pragma: no cover
        rows = amps.reshape(-1, amps.shape[-1])
        for r in range(rows.shape[0]):
            for x in range(rows.shape[1]):
                rows[r, x] = rows[r, x] * factors[x >> shift]


def apply_class_phases(amps: np.ndarray, factors: np.ndarray, shift: int) -> None:
    """In-place multiply amplitude ``x`` by ``factors[x >> shift]`` along the last axis."""
    if NUMBA_ENABLED:
        _apply_class_phases_numba(amps, factors, shift)
    else:
        _apply_class_phases_numpy(amps, factors, shift)


# ---------------------------------------------------------------------------
# Rejection-sampling acceptance scan
# ---------------------------------------------------------------------------


def _first_acceptance_numpy(ratios: np.ndarray, alphas: np.ndarray) -> int:
    ok = ratios >= alphas
    if not ok.any():
        return -1
    return int(ok.argmax())


if NUMBA_ENABLED:

    @numba.njit(cache=True)
    def _first_acceptance_numba(ratios, alphas):  # pragma: no cover
        for i in range(ratios.shape[0]):
            if ratios[i] >= alphas[i]:
                return i
        return -1


def first_acceptance(ratios: np.ndarray, alphas: np.ndarray) -> int:
    """Index of the first attempt with ``ratios[i] >= alphas[i]``, or -1."""
    if NUMBA_ENABLED:
        return int(_first_acceptance_numba(ratios, alphas))
    return _first_acceptance_numpy(ratios, alphas)


def implementations() -> dict:
    """Both kernel variants, for benchmarking; numba entries are None if unavailable."""
    return {
        "pauli_table": {
            "numpy": _pauli_table_numpy,
            "numba": _pauli_table_numba if NUMBA_ENABLED else None,
        },
        "apply_class_phases": {
            "numpy": _apply_class_phases_numpy,
            "numba": _apply_class_phases_numba if NUMBA_ENABLED else None,
        },
        "first_acceptance": {
            "numpy": _first_acceptance_numpy,
            "numba": _first_acceptance_numba if NUMBA_ENABLED else None,
        },
    }
