from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from ccfl_lab.latency import Allocation, local_iterations
from ccfl_lab.rng import DATA, TRAFFIC, spawn_streams
from ccfl_lab.scenario import Scenario
from ccfl_lab.settings import settings

logger = logging.getLogger(__name__)

_FEATURES = 2


class FedAvgTrace(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    rounds: int = Field(ge=0)
    local_steps: int = Field(ge=0)
    global_loss_per_round: list[float]
    global_accuracy_per_round: list[float]
    transmissions_per_round: list[int]
    reached_target: bool

    @property
    def flagged(self) -> bool:
        """True when training stopped at max_rounds without reaching the target."""
        return not self.reached_target


@dataclass(frozen=True, slots=True)
class _Shard:
    x: np.ndarray
    y: np.ndarray


def _blobs(rng: np.random.Generator, n: int, separation: float) -> _Shard:
    y = (rng.random(n) < 0.5).astype(float)
    centre = np.full(_FEATURES, separation / math.sqrt(_FEATURES))
    signs = np.where(y > 0, 1.0, -1.0)[:, None]
    x = signs * centre[None, :] + rng.standard_normal((n, _FEATURES))
    return _Shard(x=x, y=y)


def _logistic_loss(w: np.ndarray, shard: _Shard) -> float:
    z = shard.x @ w[:-1] + w[-1]
    return float(np.mean(np.logaddexp(0.0, z) - shard.y * z))


def _accuracy(w: np.ndarray, shard: _Shard) -> float:
    z = shard.x @ w[:-1] + w[-1]
    return float(np.mean((z >= 0.0) == (shard.y > 0)))


def _local_train(w: np.ndarray, shard: _Shard, steps: int, lr: float) -> np.ndarray:
    w = w.copy()
    n = shard.y.shape[0]
    for _ in range(steps):
        err = expit(shard.x @ w[:-1] + w[-1]) - shard.y
        grad = np.append(shard.x.T @ err, err.sum()) / n
        w -= lr * grad
    return w


def run_fedavg_demo(
    s: Scenario,
    alloc: Allocation,
    target_accuracy: float,
    max_rounds: int,
    seed: int,
    *,
    separation: float = 3.0,
    lr: float | None = None,
    test_samples: int = 2000,
) -> FedAvgTrace:
    """Toy FedAvg over the scenario's devices with probabilistic (covert) uploads.

    Each device runs ceil(local_iterations(eta)) gradient steps on a logistic model
    and uploads with probability ``s.tx_probability``; silent devices are simply
    absent from that round's sample-weighted average.
    """
    if not (0.0 <= target_accuracy <= 1.0):
        raise ValueError("target_accuracy must be in [0, 1].")
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0.")
    lr = settings.fedavg_lr if lr is None else lr
    steps = math.ceil(local_iterations(alloc.local_accuracy, s.local_iter_coeff))

    streams = spawn_streams(seed, DATA, TRAFFIC)
    shards = [_blobs(streams[DATA], d.samples, separation) for d in s.devices]
    test = _blobs(streams[DATA], test_samples, separation)
    pooled = _Shard(x=np.vstack([sh.x for sh in shards]), y=np.concatenate([sh.y for sh in shards]))
    weights = np.array([d.samples for d in s.devices], dtype=float)

    w = np.zeros(_FEATURES + 1)
    losses: list[float] = []
    accuracies: list[float] = []
    transmissions: list[int] = []
    reached = False

    for rnd in range(1, max_rounds + 1):
        sends = streams[TRAFFIC].random(len(shards)) < s.tx_probability
        received = [_local_train(w, shards[i], steps, lr) for i in np.flatnonzero(sends)]
        if received:
            wts = weights[sends]
            w = np.average(np.vstack(received), axis=0, weights=wts)

        losses.append(_logistic_loss(w, pooled))
        accuracies.append(_accuracy(w, test))
        transmissions.append(int(sends.sum()))
        logger.debug("fedavg round %d: loss=%.6f acc=%.4f tx=%d", rnd, losses[-1], accuracies[-1], transmissions[-1])
        if accuracies[-1] >= target_accuracy:
            reached = True
            break

    if not reached:
        logger.warning("fedavg demo did not reach accuracy %.3f within %d rounds", target_accuracy, max_rounds)
    return FedAvgTrace(
        rounds=len(losses),
        local_steps=steps,
        global_loss_per_round=losses,
        global_accuracy_per_round=accuracies,
        transmissions_per_round=transmissions,
        reached_target=reached,
    )
