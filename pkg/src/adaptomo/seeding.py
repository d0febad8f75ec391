"""Deterministic random streams derived from a master seed."""

import numpy as np


def make_rng(master_seed, *keys):
    """Independent ``Generator`` for the stream addressed by ``keys``.

    Streams are addressed by spawn keys rather than drawn sequentially, so a
    replica's randomness does not depend on which worker ran it or in which
    order.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(seq)
