"""Shared test utilities: payload enumeration and the exhaustive ML oracle.

The oracle evaluates || y - g X ||^2 over a full codebook and is the single
reference every reduced-complexity decoder is checked against.
"""

import numpy as np

from omnistbc import codes
from omnistbc.constellations import make_psk


def payloads(nbits):
    """All bit vectors of length nbits, in ascending word order."""
    for word in range(2**nbits):
        yield np.array([(word >> (nbits - 1 - k)) & 1 for k in range(nbits)])


def codebook(kind, rate):
    """[(bits, matrix)] in payload order for one enumerable code kind."""
    if kind == "ac":
        psk = make_psk(2**rate)
        out = []
        for bits in payloads(2 * rate):
            x1 = psk.encode(bits[:rate])
            x2 = psk.encode(bits[rate:])
            out.append((bits, codes.ac_matrix(x1, x2)))
        return out
    encode = {
        "ostbc": codes.encode_ostbc,
        "qostbc": codes.encode_qostbc,
        "ciod": codes.encode_ciod,
    }[kind]
    return [(bits, encode(bits, rate).matrix) for bits in payloads(4 * rate)]


def exhaustive_ml(y, g, book):
    """Bits of the codeword minimizing || y - g X ||^2 (first-wins ties)."""
    mats = np.stack([m for _, m in book])
    pred = np.einsum("n,knt->kt", g, mats)
    metrics = np.sum(np.abs(y[None, :] - pred) ** 2, axis=1)
    return book[int(np.argmin(metrics))][0]


def random_effective_channel(rng, n_ports):
    """One draw of the asymptotic effective channel, row convention."""
    z = rng.standard_normal(2 * n_ports)
    return (z[:n_ports] + 1j * z[n_ports:]) / np.sqrt(2.0 * n_ports)
