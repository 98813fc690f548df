"""Channel-independent precoders W = diag(c) (1_{M/N} kron V).

The ZC sequence c fixes the per-antenna phases, V is a small unitary
matrix chosen per code so that every column of V X has constant amplitude.
Total transmit power is normalized: trace(W W^H) = 1 and W^H W = I_N / N.
"""

import numpy as np

from .sequences import is_constant_amplitude, zc_generate

__all__ = [
    "Precoder",
    "hadamard2",
    "preset_V",
    "build_precoder",
    "precoder_for_code",
    "prbs_phase_vector",
    "transmit",
    "check_requirements",
    "avg_receive_power",
]

UNITARY_TOL = 1e-10


def hadamard2():
    """The 2 x 2 unitary Hadamard matrix."""
    return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def preset_V(kind, n_ports=None):
    """Per-code unitary V.

    The identity suffices when the raw codeword already has equal-magnitude
    entries (AC, QOSTBC, Toeplitz family); the orthogonal and
    coordinate-interleaved designs have zero entries and need Hadamard
    mixing to spread symbols over all ports.
    """
    h2 = hadamard2()
    if kind == "single":
        return np.array([[1.0]], dtype=complex)
    if kind == "ac":
        return np.eye(2, dtype=complex)
    if kind == "ostbc":
        return np.kron(np.eye(2, dtype=complex), h2)
    if kind == "qostbc":
        return np.eye(4, dtype=complex)
    if kind == "ciod":
        return np.kron(h2, h2)
    if kind in ("nze_tc", "nze_oac"):
        if n_ports is None:
            raise ValueError(f"{kind} preset needs the port count")
        return np.eye(int(n_ports), dtype=complex)
    raise ValueError(f"unknown code kind {kind!r}")


class Precoder:
    """M x N precoding matrix with its generating pieces."""

    def __init__(self, n_antennas, n_ports, gamma, v_matrix, w_matrix, phase_vector):
        self.n_antennas = n_antennas
        self.n_ports = n_ports
        self.gamma = gamma
        self.v_matrix = v_matrix
        self.w_matrix = w_matrix
        self.phase_vector = phase_vector
        self.w_matrix.flags.writeable = False

    def __repr__(self):
        return (
            f"Precoder(M={self.n_antennas}, N={self.n_ports}, gamma={self.gamma})"
        )


def build_precoder(n_antennas, n_ports, gamma, v_matrix, phase_vector=None):
    """Assemble W = diag(c) (1_{M/N} kron V).

    ``phase_vector`` overrides the ZC sequence (used for the non-omni
    pseudo-random baseline); it must still have 1/sqrt(M) magnitudes.
    """
    m_len = int(n_antennas)
    n_len = int(n_ports)
    v_matrix = np.asarray(v_matrix, dtype=complex)
    if v_matrix.shape != (n_len, n_len):
        raise ValueError(f"V must be {n_len} x {n_len}, got {v_matrix.shape}")
    if m_len % (n_len * n_len) != 0:
        raise ValueError(
            f"antenna count {m_len} is not a multiple of N^2 = {n_len * n_len}"
        )
    gram = v_matrix.conj().T @ v_matrix
    if np.max(np.abs(gram - np.eye(n_len))) > UNITARY_TOL:
        raise ValueError("V is not unitary")
    if phase_vector is None:
        phase_vector = zc_generate(m_len, gamma).values
    else:
        phase_vector = np.asarray(phase_vector, dtype=complex)
        if phase_vector.size != m_len:
            raise ValueError("phase vector length must equal the antenna count")
    w = phase_vector[:, None] * np.tile(v_matrix, (m_len // n_len, 1))
    return Precoder(m_len, n_len, int(gamma), v_matrix, w, phase_vector)


def precoder_for_code(kind, n_antennas, gamma=1, n_ports=None, phase_vector=None):
    """Precoder with the preset V for ``kind``."""
    v = preset_V(kind, n_ports)
    return build_precoder(n_antennas, v.shape[0], gamma, v, phase_vector)


def prbs_phase_vector(n_antennas, seed):
    """Pseudo-random +-1/sqrt(M) vector replacing the ZC sequence.

    Keeps the per-antenna power constraint but breaks omnidirectionality
    with high probability; this is the non-omni baseline.
    """
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, int(n_antennas)) * 2 - 1
    return signs.astype(complex) / np.sqrt(n_antennas)


def transmit(precoder, codeword):
    """Antenna-domain signal W X (M x T)."""
    matrix = codeword.matrix if hasattr(codeword, "matrix") else np.asarray(codeword)
    if matrix.shape[0] != precoder.n_ports:
        raise ValueError(
            f"codeword has {matrix.shape[0]} ports, precoder expects {precoder.n_ports}"
        )
    return precoder.w_matrix @ matrix


def check_requirements(signal, tol=1e-9):
    """(omni, per_antenna) flags for an antenna-domain M x T signal.

    omni: every column of F_M S is constant-amplitude (equal power in all
    DFT-grid spatial directions).  per_antenna: every column of S itself is
    constant-amplitude (equal power on every antenna).
    """
    signal = np.atleast_2d(np.asarray(signal, dtype=complex))
    spatial = np.fft.fft(signal, axis=0) / np.sqrt(signal.shape[0])
    omni = all(is_constant_amplitude(spatial[:, t], tol) for t in range(signal.shape[1]))
    per_antenna = all(
        is_constant_amplitude(signal[:, t], tol) for t in range(signal.shape[1])
    )
    return omni, per_antenna


def avg_receive_power(precoder, x_t, lambda_diag):
    """Fast-fading-averaged receive power x^H W^H F^H diag(lambda) F W x.

    Constant over all trace-M diagonal loadings exactly when the transmit
    vector W x has constant-amplitude DFT.
    """
    lam = np.asarray(lambda_diag, dtype=float)
    if np.any(lam < 0):
        raise ValueError("diagonal loading must be nonnegative")
    if abs(lam.sum() - precoder.n_antennas) > 1e-6 * precoder.n_antennas:
        raise ValueError("diagonal loading must have trace M")
    x_t = np.asarray(x_t, dtype=complex)
    a = np.fft.fft(precoder.w_matrix @ x_t) / np.sqrt(precoder.n_antennas)
    return float(np.sum(lam * np.abs(a) ** 2))
