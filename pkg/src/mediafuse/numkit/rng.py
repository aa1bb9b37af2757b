"""Seed plumbing.

All randomness is drawn from ``numpy.random.Generator`` (PCG64).  Child
streams are derived by hashing the parent seed with a name, so adding a new
consumer never shifts the stream of an existing one.
"""

import hashlib

import numpy as np


def derive_seed(seed, *names):
    key = ":".join([str(int(seed))] + [str(n) for n in names])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed, *names):
    if names:
        seed = derive_seed(seed, *names)
    return np.random.Generator(np.random.PCG64(int(seed)))
