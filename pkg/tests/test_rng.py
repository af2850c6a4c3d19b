from __future__ import annotations

import numpy as np
import pytest

from ccfl_lab.rng import FADING, TOPOLOGY, TRAFFIC, chunk_seeds, purpose_sequence, spawn_streams


def test_same_seed_same_stream() -> None:
    a = spawn_streams(7, TOPOLOGY)[TOPOLOGY].random(5)
    b = spawn_streams(7, TOPOLOGY)[TOPOLOGY].random(5)
    assert np.array_equal(a, b)


def test_purposes_are_independent_of_each_other() -> None:
    alone = spawn_streams(7, FADING)[FADING].random(5)
    together = spawn_streams(7, TOPOLOGY, FADING, TRAFFIC)[FADING].random(5)
    assert np.array_equal(alone, together)
    streams = spawn_streams(7, TOPOLOGY, FADING)
    assert not np.array_equal(streams[TOPOLOGY].random(5), streams[FADING].random(5))


def test_seeds_differ() -> None:
    assert not np.array_equal(
        spawn_streams(1, FADING)[FADING].random(5),
        spawn_streams(2, FADING)[FADING].random(5),
    )


def test_negative_seed_rejected() -> None:
    with pytest.raises(ValueError):
        purpose_sequence(-1, FADING)


def test_chunk_seeds() -> None:
    seqs = chunk_seeds(3, FADING, 4)
    assert len(seqs) == 4
    draws = [np.random.default_rng(s).random() for s in seqs]
    assert len(set(draws)) == 4
    again = [np.random.default_rng(s).random() for s in chunk_seeds(3, FADING, 4)]
    assert draws == again
    with pytest.raises(ValueError):
        chunk_seeds(3, FADING, 0)
