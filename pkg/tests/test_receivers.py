import numpy as np
import pytest

from helpers import codebook, exhaustive_ml, payloads, random_effective_channel

from omnistbc import codes
from omnistbc.constellations import make_psk
from omnistbc.receivers import (
    AcDecoder,
    CiodDecoder,
    NzeZfDecoder,
    OstbcDecoder,
    QostbcDecoder,
    RankDeficientError,
    RxObservation,
    UndecodableError,
    add_awgn,
    ml_decode_ac,
    ml_decode_ciod,
    ml_decode_ostbc,
    ml_decode_qostbc,
    ml_decode_single,
    zf_decode_nze,
)


def observe(matrix, g, sigma_n2=0.0, rng=None):
    y = g @ matrix
    if sigma_n2 > 0:
        y = add_awgn(y, sigma_n2, rng)
    return RxObservation(y=y, g=g, sigma_n2=sigma_n2)


def test_add_awgn_zero_variance_is_identity():
    clean = np.array([1 + 2j, -3j])
    np.testing.assert_array_equal(add_awgn(clean, 0.0, np.random.default_rng(0)), clean)


def test_add_awgn_variance_split():
    rng = np.random.default_rng(1)
    clean = np.zeros(100_000, dtype=complex)
    noisy = add_awgn(clean, 0.5, rng)
    assert np.mean(np.abs(noisy) ** 2) == pytest.approx(0.5, rel=0.03)
    assert np.var(noisy.real) == pytest.approx(0.25, rel=0.05)
    assert np.var(noisy.imag) == pytest.approx(0.25, rel=0.05)
    with pytest.raises(ValueError):
        add_awgn(clean, -1.0, rng)


def test_single_decoder_roundtrip():
    psk = make_psk(4)
    rng = np.random.default_rng(2)
    for bits in payloads(2):
        x = psk.encode(bits)
        for _ in range(20):
            g = random_effective_channel(rng, 1)
            obs = RxObservation(y=np.array([g[0] * x]), g=g)
            out_bits, xhat = ml_decode_single(obs, psk)
            assert np.array_equal(out_bits, bits)
            assert xhat == pytest.approx(x)


def test_ac_matched_filter_identity_channel():
    psk = make_psk(4)
    cw = codes.encode_ac(psk.points[1], psk.points[3])
    obs = observe(cw.matrix, np.array([1.0 + 0j, 0.0]))
    bits, x1, x2 = ml_decode_ac(obs, psk)
    assert x1 == pytest.approx(psk.points[1])
    assert x2 == pytest.approx(psk.points[3])


def test_ac_noiseless_roundtrip_all_payloads():
    psk = make_psk(4)
    rng = np.random.default_rng(3)
    for bits in payloads(4):
        cw = codes.encode_ac(psk.encode(bits[:2]), psk.encode(bits[2:]))
        for _ in range(50):
            g = random_effective_channel(rng, 2)
            out = ml_decode_ac(observe(cw.matrix, g), psk)
            assert np.array_equal(out[0], bits)


def test_ac_matches_exhaustive_on_noise():
    psk = make_psk(4)
    book = codebook("ac", 2)
    rng = np.random.default_rng(4)
    decoder = AcDecoder(psk)
    for _ in range(1000):
        bits, matrix = book[rng.integers(len(book))]
        g = random_effective_channel(rng, 2)
        obs = observe(matrix, g, 0.5, rng)
        fast = decoder.decode(obs)[0]
        np.testing.assert_array_equal(fast, exhaustive_ml(obs.y, g, book))


def test_zero_channel_raises():
    psk = make_psk(2)
    obs = RxObservation(y=np.zeros(2), g=np.zeros(2))
    with pytest.raises(UndecodableError):
        ml_decode_ac(obs, psk)


@pytest.mark.parametrize(
    "kind,rate,decode",
    [
        ("ostbc", 1, lambda o: ml_decode_ostbc(o, 1)),
        ("ostbc", 2, lambda o: ml_decode_ostbc(o, 2)),
        ("qostbc", 1, lambda o: ml_decode_qostbc(o, 1)),
        ("qostbc", 2, lambda o: ml_decode_qostbc(o, 2)),
        ("ciod", 1, lambda o: ml_decode_ciod(o, 1)),
        ("ciod", 2, lambda o: ml_decode_ciod(o, 2)),
    ],
)
def test_noiseless_roundtrip(kind, rate, decode):
    rng = np.random.default_rng(5)
    n_channels = 50 if rate == 1 else 5
    for bits, matrix in codebook(kind, rate):
        for _ in range(n_channels):
            g = random_effective_channel(rng, 4)
            out = decode(observe(matrix, g))
            assert np.array_equal(out[0], bits)


@pytest.mark.parametrize("kind,decoder_cls", [("ostbc", OstbcDecoder), ("qostbc", QostbcDecoder), ("ciod", CiodDecoder)])
def test_reduced_search_matches_exhaustive(kind, decoder_cls):
    """Fast ML equals brute force over the whole codebook on noisy data."""
    book = codebook(kind, 1)
    decoder = decoder_cls(1)
    rng = np.random.default_rng(6)
    for _ in range(1000):
        bits, matrix = book[rng.integers(len(book))]
        g = random_effective_channel(rng, 4)
        obs = observe(matrix, g, 10 ** (-0.5), rng)
        fast = decoder.decode(obs)[0]
        np.testing.assert_array_equal(fast, exhaustive_ml(obs.y, g, book))


def test_ostbc_candidate_budget():
    assert OstbcDecoder(1).cand_x1.size == 2 ** (4 * 1 - 2)
    assert OstbcDecoder(2).cand_x1.size == 2 ** (4 * 2 - 2)  # 64 pairs + 4 phases


def test_qostbc_ciod_candidate_budget():
    assert QostbcDecoder(1).cand_a.size * 2 == 2 ** (2 * 1 + 1)
    assert CiodDecoder(1).qam.order * 2 == 2 ** (2 * 1 + 1)


def test_ml_phase_rotation_invariance():
    """A common phase on (y, g) leaves every ML decision unchanged."""
    rng = np.random.default_rng(7)
    book = codebook("qostbc", 1)
    decoder = QostbcDecoder(1)
    for _ in range(50):
        bits, matrix = book[rng.integers(len(book))]
        g = random_effective_channel(rng, 4)
        obs = observe(matrix, g, 0.3, rng)
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        rotated = RxObservation(y=obs.y * phase, g=obs.g * phase, sigma_n2=obs.sigma_n2)
        np.testing.assert_array_equal(decoder.decode(obs)[0], decoder.decode(rotated)[0])


def test_deterministic_tie_break():
    psk = make_psk(2)
    # zero observation with a unit channel: +1 and -1 are equidistant from 0
    obs = RxObservation(y=np.zeros(1), g=np.array([1.0 + 0j]))
    bits, xhat = ml_decode_single(obs, psk)
    assert xhat == pytest.approx(psk.points[0])  # lowest index wins


@pytest.mark.parametrize("kind,l_sym,n_ports", [("nze_tc", 4, 2), ("nze_tc", 12, 4), ("nze_oac", 4, 3), ("nze_oac", 12, 4)])
def test_zf_noiseless_roundtrip(kind, l_sym, n_ports):
    psk = make_psk(4)
    make = codes.nze_tc_tables if kind == "nze_tc" else codes.nze_oac_tables
    tables = make(l_sym, n_ports)
    decoder = NzeZfDecoder(tables, psk)
    rng = np.random.default_rng(8)
    for _ in range(50):
        bits = rng.integers(0, 2, l_sym * 2)
        idx = [psk.index_of_bits(bits[2 * i : 2 * i + 2]) for i in range(l_sym)]
        matrix = tables.build(psk.points[idx])
        g = random_effective_channel(rng, n_ports)
        out_bits, _ = decoder.decode(observe(matrix, g))
        assert np.array_equal(out_bits, bits)


@pytest.mark.parametrize("kind,l_sym,n_ports", [("nze_tc", 4, 2), ("nze_oac", 4, 3)])
def test_zf_noiseless_exhaustive_payloads(kind, l_sym, n_ports):
    """All QPSK payloads recover exactly over 50 random channels each."""
    psk = make_psk(4)
    make = codes.nze_tc_tables if kind == "nze_tc" else codes.nze_oac_tables
    tables = make(l_sym, n_ports)
    decoder = NzeZfDecoder(tables, psk)
    idx = np.indices((4,) * l_sym).reshape(l_sym, -1).T  # 256 payloads
    symbols = psk.points[idx]
    matrices = tables.build(symbols)
    expected = decoder.bits_table[idx].reshape(len(idx), -1)
    rng = np.random.default_rng(10)
    for _ in range(50):
        g = random_effective_channel(rng, n_ports)
        y = np.einsum("n,bnt->bt", g, matrices)
        bits, _, aborted = decoder.decode_batch(y, np.broadcast_to(g, (len(idx), n_ports)))
        assert not aborted.any()
        np.testing.assert_array_equal(bits, expected)


def test_zf_scale_invariance():
    psk = make_psk(4)
    tables = codes.nze_tc_tables(4, 2)
    rng = np.random.default_rng(9)
    bits = rng.integers(0, 2, 8)
    idx = [psk.index_of_bits(bits[2 * i : 2 * i + 2]) for i in range(4)]
    matrix = tables.build(psk.points[idx])
    g = random_effective_channel(rng, 2)
    obs = observe(matrix, g, 0.4, rng)
    for scale in (2.0, -0.3 + 1.7j):
        scaled = RxObservation(y=obs.y * scale, g=obs.g * scale, sigma_n2=obs.sigma_n2)
        np.testing.assert_array_equal(
            zf_decode_nze(obs, (tables, psk))[0], zf_decode_nze(scaled, (tables, psk))[0]
        )


def test_zf_rank_deficient_raises():
    psk = make_psk(4)
    tables = codes.nze_tc_tables(4, 2)
    # the expanded system loses rank only on the measure-zero draw g = 0
    with pytest.raises(RankDeficientError):
        zf_decode_nze(RxObservation(y=np.ones(5), g=np.zeros(2)), (tables, psk))
