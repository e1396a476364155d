"""Deterministic seed derivation.

All randomness in the package flows from one master seed. Components that
need independent streams derive a child seed from (master, purpose string),
so results never depend on scheduling or call order.
"""

import hashlib

import numpy as np


def derive_seed(master: int, purpose: str) -> int:
    """Derive a child seed from a master seed and a purpose label.

    Stable across platforms and Python versions (sha256, not hash()).
    """
    digest = hashlib.sha256(f"{master}:{purpose}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(master: int, purpose: str) -> np.random.Generator:
    """Generator seeded by ``derive_seed(master, purpose)``."""
    return np.random.default_rng(derive_seed(master, purpose))
