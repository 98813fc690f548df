"""Invariant suite backing the ``validate`` CLI subcommand.

Each check returns (name, passed, detail).  The suite covers the sequence
algebra, the replication lift, the two power constraints for every code
kind, decoder round-trips, coding-gain closed forms, the pairwise-error
bound scaling, and codeword energy normalization.
"""

import itertools
import math

import numpy as np

from . import analysis, codes, precoding, sequences
from .constellations import make_psk

__all__ = ["run_all_checks", "CHECKS"]


def _payloads(nbits):
    for word in range(2**nbits):
        yield np.array([(word >> (nbits - 1 - k)) & 1 for k in range(nbits)])


def check_zc_family():
    for m_len in (3, 4, 8, 9, 16, 64, 128):
        for gamma in range(1, m_len):
            if math.gcd(gamma, m_len) != 1:
                continue
            seq = sequences.zc_generate(m_len, gamma)
            if not sequences.is_cazac(seq.values, 1e-9):
                return False, f"zc({m_len},{gamma}) is not CAZAC"
            for shift in range(1, m_len):
                if abs(sequences.periodic_autocorr(seq.values, shift)) > 1e-10:
                    return False, f"zc({m_len},{gamma}) autocorrelation at {shift}"
    return True, "ZC family CAZAC + zero autocorrelation"


def check_lift_equivalence():
    qpsk = make_psk(4).points
    for n_len in (2, 4):
        for mult in (1, 2, 4):
            m_len = mult * n_len * n_len
            c = sequences.zc_generate(m_len, 1)
            for combo in itertools.product(range(4), repeat=n_len):
                x = qpsk[list(combo)]
                if not sequences.is_cazac(sequences.lift(c, x)):
                    return False, f"constant-amplitude lift not CAZAC at M={m_len}"
                bad = x.copy()
                bad[0] *= 2.0
                if sequences.is_cazac(sequences.lift(c, bad)):
                    return False, f"unequal-amplitude lift CAZAC at M={m_len}"
    return True, "lift is CAZAC iff the input is constant-amplitude"


def _requirement_cases():
    psk2 = make_psk(2)

    def single(bits):
        return codes.Codeword("single", np.array([[psk2.encode(bits)]]))

    def ac(bits):
        return codes.encode_ac(psk2.encode(bits[:1]), psk2.encode(bits[1:]))

    def nze(encoder, n_sym):
        def build(bits):
            idx = [psk2.index_of_bits(bits[i : i + 1]) for i in range(n_sym)]
            return encoder(psk2.points[idx], n_sym, 8)

        return build

    yield "single", 4, 1, None, single
    yield "ac", 4, 2, None, ac
    yield "ostbc", 16, 4, None, lambda b: codes.encode_ostbc(b, 1)
    yield "qostbc", 16, 4, None, lambda b: codes.encode_qostbc(b, 1)
    yield "ciod", 16, 4, None, lambda b: codes.encode_ciod(b, 1)
    yield "nze_tc", 64, 8, 8, nze(codes.encode_nze_tc, 8)
    yield "nze_oac", 64, 8, 8, nze(codes.encode_nze_oac, 8)


def check_requirements_all_kinds():
    for kind, m_len, nbits, n_ports, build in _requirement_cases():
        prec = precoding.precoder_for_code(kind, m_len, n_ports=n_ports)
        for bits in _payloads(nbits):
            signal = precoding.transmit(prec, build(bits))
            omni, per_antenna = precoding.check_requirements(signal, 1e-9)
            if not (omni and per_antenna):
                return False, f"{kind} payload {bits.tolist()} at M={m_len}"
    return True, "both power requirements hold for every kind, exhaustively"


def check_prbs_fails_omni():
    phase = precoding.prbs_phase_vector(64, (1, 0x50524253))
    prec = precoding.precoder_for_code("single", 64, phase_vector=phase)
    signal = precoding.transmit(prec, codes.Codeword("single", np.eye(1, dtype=complex)))
    omni, per_antenna = precoding.check_requirements(signal, 1e-9)
    if omni:
        return False, "pseudo-random phases unexpectedly omnidirectional"
    if not per_antenna:
        return False, "pseudo-random phases broke the per-antenna constraint"
    return True, "pseudo-random baseline fails the omni check only"


def check_precoder_structure():
    for kind, m_len, n_ports in (
        ("single", 4, None),
        ("ac", 16, None),
        ("ostbc", 16, None),
        ("qostbc", 16, None),
        ("ciod", 16, None),
        ("nze_tc", 64, 8),
    ):
        prec = precoding.precoder_for_code(kind, m_len, n_ports=n_ports)
        w = prec.w_matrix
        if abs(np.trace(w @ w.conj().T) - 1.0) > 1e-10:
            return False, f"{kind}: trace(W W^H) != 1"
        gram = w.conj().T @ w
        if np.abs(gram - np.eye(prec.n_ports) / prec.n_ports).max() > 1e-10:
            return False, f"{kind}: W^H W != I/N"
    return True, "precoder power normalization and column orthogonality"


def check_decoder_roundtrips():
    from .receivers import RxObservation, ml_decode_ciod, ml_decode_ostbc, ml_decode_qostbc

    rng = np.random.default_rng(2024)
    cases = [
        ("ostbc", lambda b: codes.encode_ostbc(b, 1), lambda o: ml_decode_ostbc(o, 1)),
        ("qostbc", lambda b: codes.encode_qostbc(b, 1), lambda o: ml_decode_qostbc(o, 1)),
        ("ciod", lambda b: codes.encode_ciod(b, 1), lambda o: ml_decode_ciod(o, 1)),
    ]
    for kind, enc, dec in cases:
        for bits in _payloads(4):
            cw = enc(bits)
            for _ in range(10):
                g = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / 2.0
                obs = RxObservation(y=g @ cw.matrix, g=g)
                if not np.array_equal(dec(obs)[0], bits):
                    return False, f"{kind} noiseless round-trip failed"
    return True, "noiseless ML round-trips, exhaustive payloads"


def check_coding_gains():
    books = {
        "qostbc": [codes.encode_qostbc(b, 1).matrix for b in _payloads(4)],
        "ciod": [codes.encode_ciod(b, 1).matrix for b in _payloads(4)],
        "ostbc2": [codes.encode_ostbc(b, 2).matrix for b in _payloads(8)],
    }
    expected = {
        "qostbc": analysis.qostbc_gain_closed_form(2),
        "ciod": analysis.ciod_gain_closed_form(1.0 / math.sqrt(2.0)),
        "ostbc2": analysis.ostbc_gain_closed_form(2),
    }
    for key, book in books.items():
        gain = analysis.coding_gain(book)
        if abs(gain - expected[key]) > 1e-9:
            return False, f"{key}: enumerated {gain} vs closed form {expected[key]}"
    return True, "enumerated coding gains match the closed forms"


def check_pep_scaling():
    psk2 = make_psk(2)
    book = [
        codes.encode_ac(psk2.points[i], psk2.points[j]).matrix
        for i in range(2)
        for j in range(2)
    ]
    b1 = analysis.pep_upper_bound(book, 2, 0.1, 1)
    b2 = analysis.pep_upper_bound(book, 2, 0.01, 1)
    if abs(b2 / b1 - 1e-2) > 1e-11:
        return False, "decade scaling is not 10^-N"
    if abs(analysis.pep_upper_bound(book, 2, 0.1, 3) - 3 * b1) > 1e-12:
        return False, "bound is not linear in the user count"
    return True, "pairwise-error bound scales as K (4 sigma^2)^N"


def check_energy_normalization():
    from .config import SimConfig
    from .engine import _CodeRuntime

    rng = np.random.default_rng(99)
    cases = [
        SimConfig(code="ac", rate=2),
        SimConfig(code="ostbc", rate=1),
        SimConfig(code="qostbc", rate=1),
        SimConfig(code="ciod", rate=1),
        SimConfig(code="nze_tc", rate=1, nze_l=8, nze_n=4),
        SimConfig(code="nze_oac", rate=1, nze_l=8, nze_n=4),
    ]
    for cfg in cases:
        runtime = _CodeRuntime(cfg)
        bits = rng.integers(0, 2, (10_000, runtime.nbits))
        x = runtime.encode_batch(bits)
        gram = np.einsum("bnt,bmt->nm", x, x.conj()) / len(bits)
        err = np.abs(gram - runtime.n_slots * np.eye(runtime.n_ports)).max()
        if err > 0.02 * runtime.n_slots:
            return False, f"{cfg.code}: E[X X^H] off by {err:.3g}"
    return True, "mean codeword Gram is T times identity within 2%"


CHECKS = [
    ("zc_family", check_zc_family),
    ("lift_equivalence", check_lift_equivalence),
    ("precoder_structure", check_precoder_structure),
    ("requirements_all_kinds", check_requirements_all_kinds),
    ("prbs_non_omni", check_prbs_fails_omni),
    ("decoder_roundtrips", check_decoder_roundtrips),
    ("coding_gains", check_coding_gains),
    ("pep_scaling", check_pep_scaling),
    ("energy_normalization", check_energy_normalization),
]


def run_all_checks():
    """Run every check; yields (name, passed, detail)."""
    for name, fn in CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        yield name, passed, detail
