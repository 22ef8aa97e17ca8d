"""Core randomness and special-function machinery.

Provides the Wigner semicircle distribution (pdf, cdf, inverse cdf, sampling),
polynomial k-wise-independent function families over a prime field, and the
Bessel functions I1 and J1 evaluated by adaptive quadrature of their integral
representations.

The k-wise family is the desk-scale stand-in for a pseudorandom function: over
uniformly random coefficients, any k distinct inputs produce jointly uniform
outputs over the field, which is all the k-query statements here need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureError
from .rng import SeededRng

SUPPORT_LOW = -2.0
SUPPORT_HIGH = 2.0

_INV_CDF_TOL = 1e-12
_BESSEL_MAX_ARG = 1.0e4
# exp overflows float64 just past 709; I1(x) ~ e^x/sqrt(2 pi x) hits inf there
_I1_OVERFLOW_ARG = 705.0


# ---------------------------------------------------------------------------
# Wigner semicircle distribution on [-2, 2]
# ---------------------------------------------------------------------------


def semicircle_pdf(lam):
    """Semicircle density sqrt(4 - lam^2) / (2 pi), zero outside [-2, 2]."""
    lam = np.asarray(lam, dtype=np.float64)
    inside = np.abs(lam) <= SUPPORT_HIGH
    out = np.zeros_like(lam)
    out[inside] = np.sqrt(4.0 - lam[inside] ** 2) / (2.0 * np.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(x):
    """Cumulative distribution of the semicircle law, clamped to [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    xc = np.clip(x, SUPPORT_LOW, SUPPORT_HIGH)
    val = (xc * np.sqrt(4.0 - xc**2) + 4.0 * np.arcsin(xc / 2.0)) / (4.0 * np.pi) + 0.5
    val = np.clip(val, 0.0, 1.0)
    return val if val.ndim else float(val)


def semicircle_inv_cdf(u):
    """Inverse semicircle cdf by bisection (tolerance 1e-12), monotone in u.

    Raises ValueError for probabilities outside [0, 1].
    """
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(u_arr < 0.0) or np.any(u_arr > 1.0) or np.any(np.isnan(u_arr)):
        raise ValueError("probability must lie in [0, 1]")
    lo = np.full_like(u_arr, SUPPORT_LOW)
    hi = np.full_like(u_arr, SUPPORT_HIGH)
    # 54 halvings of width 4 land below the 1e-12 tolerance
    for _ in range(54):
        mid = 0.5 * (lo + hi)
        below = semicircle_cdf(mid) <= u_arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out = np.where(u_arr <= 0.0, SUPPORT_LOW, out)
    out = np.where(u_arr >= 1.0, SUPPORT_HIGH, out)
    return out if out.ndim else float(out)


def sample_semicircle(rng: SeededRng | np.random.Generator, size=None):
    """Draw semicircle-distributed eigenvalues via inverse-cdf sampling."""
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    return semicircle_inv_cdf(gen.random(size))


# ---------------------------------------------------------------------------
# k-wise independent function families: degree-(k-1) polynomials over F_q,
# truncated to m output bits
# ---------------------------------------------------------------------------

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    cand = max(n, 2)
    while not is_prime(cand):
        cand += 1
    return cand


@dataclass(frozen=True)
class KWiseFamily:
    """A member of the degree-(k-1) polynomial family over F_q.

    ``eval`` maps x to (sum_j coeffs[j] x^j mod q) mod 2^m.  With coefficients
    drawn uniformly from F_q the outputs at any k distinct points are jointly
    uniform over the field; the mod-2^m truncation is uniform up to a bias of
    at most 2^m/q, so choose q well above 2^m when that bias matters.
    """

    degree: int
    modulus: int
    coeffs: tuple
    out_bits: int

    def __post_init__(self) -> None:
        if self.degree < 1 or len(self.coeffs) != self.degree:
            raise ValueError("need exactly `degree` coefficients")
        if self.out_bits < 1:
            raise ValueError("out_bits must be positive")
        if self.modulus < (1 << self.out_bits):
            raise ValueError("modulus must be at least 2^out_bits")
        if not is_prime(self.modulus):
            raise ValueError("modulus must be prime")
        if any(not (0 <= c < self.modulus) for c in self.coeffs):
            raise ValueError("coefficients must be residues mod q")

    @classmethod
    def random(
        cls,
        degree: int,
        out_bits: int,
        rng: SeededRng | np.random.Generator,
        modulus: int | None = None,
    ) -> "KWiseFamily":
        """Fresh family with uniformly random coefficients mod q."""
        if modulus is None:
            modulus = next_prime(1 << out_bits)
        gen = rng.generator() if isinstance(rng, SeededRng) else rng
        # rejection-free uniform residues: draw 128-bit ints, reduce mod q;
        # bias 2^-64-level is irrelevant at these moduli
        words = gen.integers(0, 1 << 62, size=(degree, 3))
        coeffs = tuple(
            int((int(w[0]) + (int(w[1]) << 62) + (int(w[2]) << 124)) % modulus)
            for w in words
        )
        return cls(degree=degree, modulus=modulus, coeffs=coeffs, out_bits=out_bits)


def kwise_eval(family: KWiseFamily, x: int) -> int:
    """Evaluate the family member at x; result lies in [0, 2^m)."""
    if not (0 <= x < family.modulus):
        raise ValueError("input exceeds the field modulus")
    acc = 0
    for c in reversed(family.coeffs):
        acc = (acc * x + c) % family.modulus
    return acc & ((1 << family.out_bits) - 1)


# ---------------------------------------------------------------------------
# Bessel functions from their integral representations
#   I1(x) = (1/pi) int_0^pi exp(x cos t) cos t dt
#   J1(x) = (1/pi) int_0^pi cos(t - x sin t) dt
# ---------------------------------------------------------------------------


def _i1_positive(x: float) -> float:
    # factor out e^x so the integrand stays in [0, 1]
    val, err = quad(
        lambda t: np.exp(x * (np.cos(t) - 1.0)) * np.cos(t) / np.pi,
        0.0,
        np.pi,
        epsabs=1e-14,
        epsrel=1e-11,
        limit=400,
    )
    if err > max(1e-9 * abs(val), 1e-12):
        raise QuadratureError("I1 quadrature did not converge", val, err)
    return math.exp(x) * val


def _j1(x: float) -> float:
    half = max(1, min(20000, int(abs(x)) + 50))
    val, err = quad(
        lambda t: np.cos(t - x * np.sin(t)) / np.pi,
        0.0,
        np.pi,
        epsabs=1e-13,
        epsrel=1e-11,
        limit=2 * half,
    )
    if err > max(1e-9 * abs(val), 1e-11):
        raise QuadratureError("J1 quadrature did not converge", val, err)
    return val


def bessel(kind: str, x: float) -> float:
    """I1 or J1 at x by quadrature; relative error <= 1e-8 for |x| <= 1e4.

    Both functions are odd, so negative arguments reduce to |x|.  I1 grows
    like e^x and leaves float64 range past x ~ 705, which is rejected.
    """
    if abs(x) > _BESSEL_MAX_ARG:
        raise ValueError("argument outside the supported range |x| <= 1e4")
    sign = -1.0 if x < 0 else 1.0
    ax = abs(float(x))
    if kind == "I1":
        if ax > _I1_OVERFLOW_ARG:
            raise ValueError("I1 overflows float64 for |x| > 705")
        return sign * _i1_positive(ax)
    if kind == "J1":
        return sign * _j1(ax)
    raise ValueError(f"unknown Bessel kind {kind!r}")


def bessel_i1(x: float) -> float:
    return bessel("I1", x)


def bessel_j1(x: float) -> float:
    return bessel("J1", x)


def j1_first_root() -> float:
    """First positive zero of J1 (~3.8317), located by bisection."""
    lo, hi = 3.0, 4.5
    flo = bessel_j1(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fmid = bessel_j1(mid)
        if (flo > 0) == (fmid > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)
