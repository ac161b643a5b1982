"""Dual replay buffers and the episode-indexed minibatch split.

The exploration buffer keeps a uniform-over-history sample of everything
seen (reservoir retention); the exploitation buffer is a FIFO holding only
transitions from goal-reaching episodes. Minibatches shift from the first
to the second as training progresses.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    """One processed episode step.

    ret is the accumulated discounted return from this step to the end of
    the episode; terminal_state is the episode's last state; horizon is the
    number of steps from here to the terminal state (the discount exponent
    on the bootstrap term). bootstrap is 0 iff the episode reached the goal.
    """

    state: np.ndarray
    goal: np.ndarray
    action: np.ndarray
    ret: float
    terminal_state: np.ndarray
    bootstrap: int
    horizon: int


class ReservoirBuffer:
    """Bounded buffer with classic reservoir retention.

    After overflow every transition ever inserted has the same chance of
    still being present.
    """

    def __init__(self, capacity=1_000_000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.storage = []
        self.seen_count = 0

    def insert(self, transition, rng):
        self.seen_count += 1
        if len(self.storage) < self.capacity:
            self.storage.append(transition)
        elif rng.random() < self.capacity / self.seen_count:
            self.storage[rng.integers(self.capacity)] = transition

    def __len__(self):
        return len(self.storage)


class FifoBuffer:
    """Bounded FIFO for successful-episode transitions only."""

    def __init__(self, capacity=50_000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.storage = deque(maxlen=capacity)

    def insert(self, transition):
        if transition.bootstrap != 0:
            raise ValueError("FIFO buffer only stores successful-episode transitions")
        self.storage.append(transition)

    def __len__(self):
        return len(self.storage)


def sampling_split(episode_index, total_episodes, num_batches):
    """Split num_batches between the two buffers at the given episode.

    tau_e = i/E (clamped to [0,1]); at least one batch always comes from
    the reservoir buffer.
    """
    if total_episodes == 0:
        raise ValueError("total_episodes must be nonzero")
    if num_batches < 1:
        raise ValueError("need at least one minibatch")
    tau_e = min(max(episode_index / total_episodes, 0.0), 1.0)
    n_beta = max(int(np.floor((1.0 - tau_e) * num_batches)), 1)
    return n_beta, num_batches - n_beta


def draw_minibatches(d_beta, d_e, split, batch_size, rng):
    """Sample the split's minibatches, uniformly with replacement.

    Returns a list of lists of Transitions, reservoir batches first. While
    the exploitation buffer is empty all batches come from the reservoir.
    """
    n_beta, n_e = split
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    if len(d_e) == 0:
        n_beta, n_e = n_beta + n_e, 0
    if n_beta > 0 and len(d_beta) == 0:
        raise ValueError("cannot sample: both buffers empty" if len(d_e) == 0
                         else "cannot sample from empty reservoir buffer")
    batches = []
    for _ in range(n_beta):
        idx = rng.integers(len(d_beta.storage), size=batch_size)
        batches.append([d_beta.storage[i] for i in idx])
    for _ in range(n_e):
        idx = rng.integers(len(d_e.storage), size=batch_size)
        batches.append([d_e.storage[i] for i in idx])
    return batches
