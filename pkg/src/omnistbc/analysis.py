"""Coding gain, the pairwise-error upper bound, and curve diagnostics.

Coding gain (diversity product) is the minimum over distinct codeword
pairs of det((X - X')(X - X')^H)^(1/T).  Determinants come from the
eigenvalues of the Hermitian difference Gram, which is stable for the
4 x 4 designs, and pair enumeration is capped so constellation growth
cannot silently blow up a test run.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BerPoint",
    "PAIR_CAP",
    "coding_gain",
    "qostbc_gain_closed_form",
    "ciod_gain_closed_form",
    "ostbc_gain_closed_form",
    "pep_upper_bound",
    "fit_diversity_order",
    "omni_flatness",
]

PAIR_CAP = 1 << 20
_RANK_TOL = 1e-12
MIN_FIT_ERRORS = 100


@dataclass
class BerPoint:
    """One Monte Carlo BER measurement plus the context needed for CSV."""

    snr_db: float
    ber: float
    trials: int
    bit_errors: int
    config_digest: str = ""
    code: str = ""
    rate_bps: float = 0.0
    n_antennas: int = 0
    theta0_deg: float = 0.0
    seed: int = 0
    aborted: int = 0
    bits_sent: int = 0


def _pair_gram_dets(mats):
    """det(Delta Delta^H) for every ordered distinct pair, via eigenvalues."""
    mats = np.asarray(mats, dtype=complex)
    n_codes = mats.shape[0]
    if n_codes < 2:
        raise ValueError("need at least two codewords")
    n_pairs = n_codes * (n_codes - 1)
    if n_pairs > PAIR_CAP:
        raise ValueError(
            f"{n_pairs} codeword pairs exceed the enumeration cap {PAIR_CAP}"
        )
    dets = []
    for i in range(n_codes):
        diff = np.delete(mats, i, axis=0) - mats[i]
        gram = np.einsum("knt,kmt->knm", diff, diff.conj())
        eig = np.linalg.eigvalsh(gram)
        dets.append(np.prod(np.clip(eig, 0.0, None), axis=1))
    return np.concatenate(dets)


def coding_gain(codebook):
    """Minimum diversity product over the codebook; 0 flags a rank drop."""
    mats = np.asarray([getattr(c, "matrix", c) for c in codebook], dtype=complex)
    t_len = mats.shape[2]
    dets = _pair_gram_dets(mats)
    worst = float(dets.min())
    if worst < _RANK_TOL:
        return 0.0
    return worst ** (1.0 / t_len)


def qostbc_gain_closed_form(order):
    """4 sin^2(pi/L) for L <= 6, 8 sin^3(pi/L) above."""
    order = int(order)
    if order < 2:
        raise ValueError("PSK order must be at least 2")
    s = math.sin(math.pi / order)
    return 4.0 * s * s if order <= 6 else 8.0 * s**3


def ciod_gain_closed_form(scale):
    """16 d^2 cos(theta) sin(theta) at theta = arctan(2)/2, i.e. 16 d^2/sqrt(5)."""
    if scale <= 0:
        raise ValueError("constellation scale must be positive")
    return 16.0 * scale * scale / math.sqrt(5.0)


def ostbc_gain_closed_form(rate):
    """Minimum squared constellation distance of the orthogonal design.

    The Gram identity makes the coding gain equal the smallest squared
    distance across the three symbol constellations, which the bit split
    equalizes at (2d)^2 of the 2^(2R-1)-ary PAM set.
    """
    from .codes import ostbc_constellations
    from .constellations import min_sq_distance

    pam, _ = ostbc_constellations(rate)
    return min_sq_distance(pam)


def pep_upper_bound(codebook, n_ports, sigma_n2, n_users=1):
    """Union-style bound K (4 sigma^2)^N sum over pairs of prod 1/lambda_n.

    The lambda_n are the eigenvalues of (1/N) (X - X')(X - X')^H, the
    large-array limit of the effective difference covariance.  Every pair
    must be full rank, otherwise the offending pair is reported.
    """
    if sigma_n2 <= 0:
        raise ValueError("noise variance must be positive")
    mats = np.asarray([getattr(c, "matrix", c) for c in codebook], dtype=complex)
    n_codes = mats.shape[0]
    if n_codes < 2:
        raise ValueError("need at least two codewords")
    if n_codes * (n_codes - 1) > PAIR_CAP:
        raise ValueError(
            f"{n_codes * (n_codes - 1)} codeword pairs exceed the cap {PAIR_CAP}"
        )
    total = 0.0
    for i in range(n_codes):
        diff = np.delete(mats, i, axis=0) - mats[i]
        gram = np.einsum("knt,kmt->knm", diff, diff.conj()) / n_ports
        eig = np.linalg.eigvalsh(gram)
        bad = np.nonzero(eig[:, 0] <= _RANK_TOL * np.maximum(eig[:, -1], 1.0))[0]
        if bad.size:
            j = bad[0] + (bad[0] >= i)
            raise ValueError(f"codeword pair ({i}, {j}) is rank deficient")
        total += float(np.sum(np.prod(1.0 / eig, axis=1)))
    return n_users * (4.0 * sigma_n2) ** n_ports * total


def fit_diversity_order(points, window):
    """Least-squares slope of log10(ber) against -snr_db/10 inside ``window``.

    Points with fewer than 100 accumulated bit errors are dropped to bound
    the estimator variance.
    """
    lo, hi = window
    usable = [
        p
        for p in points
        if lo <= p.snr_db <= hi and p.ber > 0 and p.bit_errors >= MIN_FIT_ERRORS
    ]
    if len(usable) < 2:
        raise ValueError("need at least two usable BER points inside the window")
    x = np.array([-p.snr_db / 10.0 for p in usable])
    y = np.log10([p.ber for p in usable])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def omni_flatness(points):
    """max(ber)/min(ber) over an angle grid of (theta0, ber) pairs."""
    bers = np.array([b for _, b in points], dtype=float)
    if bers.size == 0:
        raise ValueError("empty angle grid")
    if np.any(bers <= 0):
        raise ValueError("zero BER in the grid: not enough trials to compare angles")
    return float(bers.max() / bers.min())
