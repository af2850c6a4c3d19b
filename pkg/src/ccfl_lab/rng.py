from __future__ import annotations

import hashlib

import numpy as np

TOPOLOGY = "topology"
FADING = "fading"
TRAFFIC = "traffic"
DATA = "data"


def _purpose_key(purpose: str) -> int:
    digest = hashlib.sha256(purpose.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def purpose_sequence(seed: int, purpose: str) -> np.random.SeedSequence:
    # Keyed by name (not spawn order) so adding a purpose never shifts another stream.
    if seed < 0:
        raise ValueError("seed must be >= 0.")
    return np.random.SeedSequence([int(seed), _purpose_key(purpose)])


def spawn_streams(seed: int, *purposes: str) -> dict[str, np.random.Generator]:
    return {p: np.random.default_rng(purpose_sequence(seed, p)) for p in purposes}


def chunk_seeds(seed: int, purpose: str, n_chunks: int) -> list[np.random.SeedSequence]:
    if n_chunks < 1:
        raise ValueError("n_chunks must be >= 1.")
    return purpose_sequence(seed, purpose).spawn(n_chunks)
