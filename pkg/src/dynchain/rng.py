"""Deterministic random-stream derivation.

Every sampling operation in the package is a pure function of its inputs
and a 64-bit seed.  Nested procedures (ensemble members, CV folds,
per-label conditioning) derive child seeds from the parent seed plus a
string/int path, so reordering or parallelising the work never changes
any result.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *path) -> int:
    """Derive a child seed from ``seed`` and a hashable path.

    Path elements may be ints or strings.  The derivation is a SHA-256
    digest, so it is stable across platforms, Python versions and numpy
    versions.
    """
    h = hashlib.sha256()
    h.update(str(int(seed) & _MASK64).encode())
    for part in path:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "little")


def make_rng(seed: int, *path) -> np.random.Generator:
    """A PCG64 generator seeded by ``derive_seed(seed, *path)``."""
    return np.random.default_rng(derive_seed(seed, *path))
