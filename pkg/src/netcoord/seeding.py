"""Deterministic seed derivation shared by every stochastic component."""

import hashlib

SEED_BITS = 63


def derive_seed(*parts) -> int:
    """Hash an arbitrary tuple of ints/strings into a stable non-negative seed.

    Unlike ``hash()``, the result does not depend on PYTHONHASHSEED or the
    platform, so derived seeds are reproducible everywhere.
    """
    payload = "\x1f".join(f"{type(p).__name__}:{p}" for p in parts).encode()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big") >> (64 - SEED_BITS)
