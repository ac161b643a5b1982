"""SimHash state discretization, visit counts, and the bucketed model buffer.

States are mapped to sign codes phi(s) = sign(A f(s)) in {-1,+1}^k. Codes
key both the global visit-count table and the transition buckets the tree
search uses as an approximate model.
"""

from collections import namedtuple

import numpy as np

# One raw environment step; the model buffer stores these per bucket.
StepTransition = namedtuple("StepTransition", ["state", "action", "reward", "next_state"])


class SimHasher:
    """sign(A f(s) + b) with A a k x D standard-normal projection, fixed per run.

    preprocess defaults to identity; sign(0) is taken as +1. Without offsets
    (b = 0) every hyperplane passes through the origin, so for low-dimensional
    states living in one orthant the code only resolves direction, not
    position. with_offsets=True draws b ~ N(0,1), putting the hyperplanes in
    general position; combine with a preprocess that centers the state (e.g.
    mapping env bounds onto [-1,1]) so the cuts actually cross the state space.
    """

    def __init__(self, state_dim, k, rng, preprocess=None, with_offsets=False):
        if k < 1:
            raise ValueError("granularity k must be positive")
        self.k = k
        self.state_dim = state_dim
        self.preprocess = preprocess if preprocess is not None else (lambda s: s)
        self.projection = rng.standard_normal((k, state_dim))
        self.offsets = rng.standard_normal(k) if with_offsets else np.zeros(k)

    def hash(self, state):
        """Return the code as a hashable tuple of +/-1 ints."""
        v = np.asarray(self.preprocess(state), dtype=np.float64)
        if v.shape != (self.state_dim,):
            raise ValueError(f"preprocessed state must have length {self.state_dim}")
        signs = np.where(self.projection @ v + self.offsets >= 0.0, 1, -1)
        return tuple(signs.tolist())


class CountTable:
    """Visit counts n(phi(s)); absent codes read as 0."""

    def __init__(self):
        self._counts = {}

    def record_visit(self, code):
        self._counts[code] = self._counts.get(code, 0) + 1

    def count(self, code):
        return self._counts.get(code, 0)

    def total(self):
        return sum(self._counts.values())

    def __len__(self):
        return len(self._counts)

    def dump_csv(self, path):
        """Debug dump: one row per code, bits then count."""
        with open(path, "w") as f:
            for code in sorted(self._counts):
                bits = " ".join(str(b) for b in code)
                f.write(f"{bits},{self._counts[code]}\n")


class ModelBuffer:
    """Hash-bucketed store of observed transitions (the search's model).

    Each bucket keeps at most bucket_capacity transitions; inserting into a
    full bucket replaces a uniformly random existing entry.
    """

    def __init__(self, hasher, bucket_capacity=32):
        if bucket_capacity < 1:
            raise ValueError("bucket_capacity must be positive")
        self.hasher = hasher
        self.bucket_capacity = bucket_capacity
        self._buckets = {}

    def insert(self, transition, code, rng):
        if self.hasher.hash(transition.state) != code:
            raise ValueError("bucket code does not match the transition's start state")
        bucket = self._buckets.setdefault(code, [])
        if len(bucket) < self.bucket_capacity:
            bucket.append(transition)
        else:
            bucket[rng.integers(self.bucket_capacity)] = transition

    def sample(self, code, rng):
        """Uniform draw from the bucket, or None when it is empty."""
        bucket = self._buckets.get(code)
        if not bucket:
            return None
        return bucket[rng.integers(len(bucket))]

    def bucket_size(self, code):
        return len(self._buckets.get(code, ()))

    def __len__(self):
        return sum(len(b) for b in self._buckets.values())
