"""Spectral statistics: level spacings, marginal densities, spoofing distance,
the spectral form factor, and phase-wrap convergence to uniform.

The two-point marginal uses the determinant form

    p2(a, b) = c_d * (A(a) A(b) - sinc(d (a - b))^2),
    A(x) = sqrt(4 - x^2) / 2,   c_d = d / (pi^2 (d - 1)),

whose sinc kernel makes near-diagonal integrands oscillate at frequency d.
The total-variation integral against the product-of-semicircles spoof is
therefore computed on a grid segmented at the sinc zeros, with a trig
substitution soaking up the square-root edge of the semicircle factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .ensembles import EnsembleSpec, Spectrum, sample_spectrum
from .errors import QuadratureError
from .parallel import indexed_map
from .randcore import sample_semicircle, semicircle_cdf, semicircle_pdf
from .rng import SeededRng

SINC_COINCIDENT_EPS = 1e-12
QUAD_TOL_1D = 1e-6
QUAD_TOL_2D = 1e-4
BULK_FRACTION_DEFAULT = 0.8


# ---------------------------------------------------------------------------
# Level spacings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapSample:
    """Normalized nearest-neighbour spacings of one spectrum."""

    gaps: np.ndarray
    normalization: str


def level_spacings(
    spectrum: Spectrum | np.ndarray,
    normalization: str = "times_d",
    bulk_fraction: float | None = None,
) -> GapSample:
    """Consecutive spacings of the sorted spectrum.

    ``times_d`` rescales by the full dimension d (s_hat = d * s); ``mean_gap``
    rescales by the sample mean gap.  ``bulk_fraction`` restricts to the gaps
    between order statistics in the central fraction of the spectrum, which
    suppresses edge effects in ensemble comparisons.
    """
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.sort(np.asarray(spectrum))
    d = values.shape[0]
    if d < 2:
        raise ValueError("need at least two levels")
    if bulk_fraction is not None:
        if not (0.0 < bulk_fraction <= 1.0):
            raise ValueError("bulk fraction must lie in (0, 1]")
        drop = int(round(d * (1.0 - bulk_fraction) / 2.0))
        values = values[drop : d - drop]
    gaps = np.diff(values)
    if normalization == "times_d":
        gaps = gaps * d
    elif normalization == "mean_gap":
        mean = gaps.mean()
        if mean <= 0:
            raise ValueError("mean gap is zero; cannot normalize")
        gaps = gaps / mean
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return GapSample(gaps=gaps, normalization=normalization)


def iid_gap_pdf(s: float, d: int) -> float:
    """Nearest-neighbour gap density for d iid semicircle levels.

    P(s) = d * int p(x) p(x+s) (1 + F(x) - F(x+s))^{d-2} dx over the support
    overlap.  At s = 0 this is d * 8/(3 pi^2); the density is monotonically
    decreasing in s (no level repulsion).
    """
    if s < 0:
        raise ValueError("gap must be nonnegative")
    if s >= 4.0:
        return 0.0

    def integrand(lam):
        return (
            d
            * semicircle_pdf(lam)
            * semicircle_pdf(lam + s)
            * (1.0 + semicircle_cdf(lam) - semicircle_cdf(lam + s)) ** (d - 2)
        )

    val, err = quad(integrand, -2.0, 2.0 - s, epsabs=QUAD_TOL_1D / 10, epsrel=1e-9, limit=200)
    if err > QUAD_TOL_1D * max(1.0, abs(val)):
        raise QuadratureError("gap pdf quadrature did not converge", val, err)
    return float(val)


def iid_gap_pdf_shat(s_hat: float, d: int) -> float:
    """Same density expressed in the rescaled gap s_hat = d * s."""
    return iid_gap_pdf(s_hat / d, d) / d


# ---------------------------------------------------------------------------
# Marginal eigenvalue densities and the spoofing distance
# ---------------------------------------------------------------------------


def _sinc_kernel(delta: np.ndarray, d: int) -> np.ndarray:
    """sin(d x)/(d x) with the coincident-point limit 1."""
    delta = np.asarray(delta, dtype=np.float64)
    scaled = d * delta
    small = np.abs(delta) < SINC_COINCIDENT_EPS
    safe = np.where(small, 1.0, scaled)
    return np.where(small, 1.0, np.sin(safe) / safe)


def marginal_density(k: int, lams, d: int) -> float:
    """k-point marginal eigenvalue density (k in {1, 2}) at the given points.

    Evaluates ((d-k)!/d!) (d/pi)^k det(A + B) with diagonal A_ii =
    sqrt(4 - lam_i^2)/2 and off-diagonal sinc kernel B.  k = 1 reduces to the
    semicircle density; k = 2 vanishes on the diagonal (level repulsion).
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=np.float64))
    if k not in (1, 2) or lams.shape[0] != k:
        raise ValueError("k must be 1 or 2 with matching number of points")
    if np.any(np.abs(lams) > 2.0):
        raise ValueError("points must lie in [-2, 2]")
    a = np.sqrt(np.maximum(4.0 - lams**2, 0.0)) / 2.0
    if k == 1:
        return float(a[0] / np.pi)
    b = _sinc_kernel(np.array(lams[0] - lams[1]), d)
    c_d = d / (np.pi**2 * (d - 1))
    return float(c_d * (a[0] * a[1] - b * b))


def marginal2_grid(lam1: np.ndarray, lam2: np.ndarray, d: int) -> np.ndarray:
    """Vectorized two-point marginal on broadcastable coordinate arrays."""
    lam1 = np.asarray(lam1, dtype=np.float64)
    lam2 = np.asarray(lam2, dtype=np.float64)
    a1 = np.sqrt(np.maximum(4.0 - lam1**2, 0.0)) / 2.0
    a2 = np.sqrt(np.maximum(4.0 - lam2**2, 0.0)) / 2.0
    b = _sinc_kernel(lam1 - lam2, d)
    return d / (np.pi**2 * (d - 1)) * (a1 * a2 - b * b)


def _marginal2_minus_product(lam1, lam2, d: int) -> np.ndarray:
    # p2 - semicircle x semicircle, simplified analytically for stability
    a1 = np.sqrt(np.maximum(4.0 - np.asarray(lam1) ** 2, 0.0)) / 2.0
    a2 = np.sqrt(np.maximum(4.0 - np.asarray(lam2) ** 2, 0.0)) / 2.0
    b = _sinc_kernel(np.asarray(lam1) - np.asarray(lam2), d)
    return (a1 * a2 - d * b * b) / (np.pi**2 * (d - 1))


@dataclass(frozen=True)
class TvResult:
    """Total-variation distance with its achieved quadrature error estimate."""

    value: float
    error_estimate: float
    d: int


def _tv_inner_abs_integral(lam1: float, d: int, gl_nodes, gl_weights) -> float:
    """int |p2 - product| d lam2, segmented at the sinc-kernel zeros."""
    step = math.pi / d
    j_lo = math.ceil((lam1 - 2.0) / step)
    j_hi = math.floor((lam1 + 2.0) / step)
    inner = lam1 - step * np.arange(j_hi, j_lo - 1, -1)
    inner = inner[(inner > -2.0 + 1e-15) & (inner < 2.0 - 1e-15)]
    edges = np.concatenate(([-2.0], inner, [2.0]))
    lo = edges[:-1]
    hi = edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * gl_nodes[None, :]
    vals = np.abs(_marginal2_minus_product(lam1, nodes, d))
    return float(np.sum(vals @ gl_weights * half))


def tv_distance_marginal2(d: int, tol: float = QUAD_TOL_2D) -> TvResult:
    """TV distance between the two-point marginal and the product spoof.

    Integrates 0.5 * |p2 - p1 x p1| over [-2, 2]^2.  The outer variable uses
    the substitution lam = 2 sin(phi) to remove the square-root edge; the
    inner integral is piecewise Gauss-Legendre between sinc zeros.  Refines
    until two successive levels agree within ``tol`` and reports the achieved
    estimate; raises QuadratureError if refinement stalls.
    """
    if d < 4:
        raise ValueError("dimension must be at least 4")

    def evaluate(n_outer: int, q_inner: int) -> float:
        gl_x, gl_w = np.polynomial.legendre.leggauss(q_inner)
        out_x, out_w = np.polynomial.legendre.leggauss(10)
        edges = np.linspace(-np.pi / 2, np.pi / 2, n_outer + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            mid = 0.5 * (hi + lo)
            for xi, wi in zip(out_x, out_w):
                phi = mid + half * xi
                lam1 = 2.0 * math.sin(phi)
                jac = 2.0 * math.cos(phi)
                total += wi * half * jac * _tv_inner_abs_integral(lam1, d, gl_x, gl_w)
        return 0.5 * total

    prev = evaluate(16, 8)
    for n_outer, q_inner in ((32, 10), (64, 14), (128, 18)):
        cur = evaluate(n_outer, q_inner)
        err = abs(cur - prev)
        if err <= tol:
            return TvResult(value=cur, error_estimate=err, d=d)
        prev = cur
    raise QuadratureError("TV quadrature did not converge", prev, err)


# ---------------------------------------------------------------------------
# Spectral form factor and its moments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FormFactorSeries:
    times: np.ndarray
    z_values: np.ndarray


def spectral_form_factor(spectrum: Spectrum | np.ndarray, t: float) -> complex:
    """Z(L t) = tr(e^{-i L t}) / d for the given spectrum."""
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    return complex(np.exp(-1j * values * t).mean())


def form_factor_series(spectrum: Spectrum | np.ndarray, times) -> FormFactorSeries:
    """Z(L t) over a grid of times."""
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    times = np.asarray(times, dtype=np.float64)
    z = np.exp(-1j * np.outer(times, values)).mean(axis=1)
    return FormFactorSeries(times=times, z_values=z)


@dataclass(frozen=True)
class MomentEstimate:
    """Monte-Carlo estimate of E|Z(L t)|^{2k} with its standard error."""

    mean: float
    std_error: float
    n_samples: int
    k: int
    t: float


def sff_moments(
    spec: EnsembleSpec,
    k: int,
    t: float,
    n_samples: int,
    rng: SeededRng,
    threads: int = 1,
) -> MomentEstimate:
    """Mean of |Z(L t)|^{2k} over fresh spectrum draws.

    Sample i always uses sub-stream i of ``rng`` and the reduction is done by
    numpy's pairwise sum over the index-ordered array, so the result does not
    depend on the number of worker threads.
    """
    if k < 1 or k > 4:
        raise ValueError("moment order must lie in 1..4")
    if n_samples < 100:
        raise ValueError("need at least 100 samples")

    def one(i: int) -> float:
        spectrum = sample_spectrum(spec, rng.substream(i))
        return abs(spectral_form_factor(spectrum, t)) ** (2 * k)

    vals = np.array(indexed_map(one, n_samples, threads))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples))
    return MomentEstimate(mean=mean, std_error=se, n_samples=n_samples, k=k, t=t)


def phase_wrap_distance(t: float, n_samples: int, rng: SeededRng) -> float:
    """KS distance between {lam * t mod 2 pi} and the uniform distribution.

    As t grows the wrapped semicircle phases flatten toward uniform; at small
    t all mass sits near zero and the distance approaches 1.
    """
    if t <= 0:
        raise ValueError("time must be positive")
    gen = rng.generator()
    lam = np.asarray(sample_semicircle(gen, size=n_samples))
    u = np.sort((lam * t) % (2.0 * np.pi)) / (2.0 * np.pi)
    grid_hi = np.arange(1, n_samples + 1) / n_samples
    grid_lo = np.arange(0, n_samples) / n_samples
    return float(max(np.max(grid_hi - u), np.max(u - grid_lo)))
