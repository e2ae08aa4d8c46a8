"""Seeded substreams and inverse-transform Gaussian draws.

Every stochastic operation in the package derives its randomness from an
integer master seed through ``substream(seed, op_tag, index)``.  The index is
a trial or chunk number, so results depend only on (seed, schedule) and never
on how work is spread across threads.  Gaussian variates are produced by
applying the inverse normal CDF to the uniform stream; the uniform sequence
is the reproducibility contract, the normal transform is documented but not
bit-standardized across platforms.
"""

import numpy as np
from scipy.special import ndtri

# Operation tags keep substreams of different operations disjoint even when
# they share a master seed and index.
OP_SAMPLE = 1
OP_PICKANDS = 2
OP_MC_SUP = 3
OP_LEMMA43 = 4
OP_HORIZON = 5

# Smallest uniform fed to the inverse CDF; rng.random() can return exactly 0.
_U_FLOOR = 2.0 ** -53


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream identified by (seed, key...)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.PCG64(ss))


def normals(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal draws via inverse transform of the uniform stream."""
    u = rng.random(shape)
    if np.ndim(u) == 0:
        u = max(u, _U_FLOOR)
    else:
        np.maximum(u, _U_FLOOR, out=u)
    return ndtri(u)


def chunk_sizes(n: int, chunk: int) -> list[int]:
    """Fixed chunk schedule for n items; independent of worker count."""
    if n <= 0:
        return []
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])
