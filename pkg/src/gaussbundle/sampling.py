"""Reproducible standard-Gaussian sampling on counter-based Philox streams."""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class GaussianSampler:
    """Draws i.i.d. N(0, I_dim) points from the Philox stream keyed by (seed, stream).

    Two samplers with equal (seed, stream) produce bit-identical draws; the
    stream counter advances with every call.
    """

    def __init__(self, dim: int, seed: int = 0, stream: int = 0):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = int(seed)
        self.stream = int(stream)
        bitgen = np.random.Philox(key=np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64))
        self.rng = np.random.Generator(bitgen)

    def sample(self, count: int) -> np.ndarray:
        if count < 1:
            raise ValueError("count must be >= 1")
        return self.rng.standard_normal((count, self.dim))

    def sphere(self, count: int, dim: int = 3) -> np.ndarray:
        """Uniform points on the unit sphere S^{dim-1}."""
        z = self.rng.standard_normal((count, dim))
        return z / np.linalg.norm(z, axis=1, keepdims=True)

    def spawn(self, stream: int) -> "GaussianSampler":
        return GaussianSampler(self.dim, self.seed, stream)

    def __repr__(self):
        return f"GaussianSampler(dim={self.dim}, seed={self.seed}, stream={self.stream})"


def sample(sampler: GaussianSampler, count: int) -> np.ndarray:
    return sampler.sample(count)
