"""Discrete Grünwald-Letnikov differintegrals with short memory.

A negative order integrates, a positive order differentiates. The
operator keeps a zero-initialised history (the signal is taken as 0 before
the first sample) truncated to ``memory_len`` samples.
"""
from __future__ import annotations

import math

import numpy as np

DEFAULT_MEMORY_LEN = 2000


def gl_weights(order: float, n: int) -> np.ndarray:
    r"""Return ``w_0 .. w_n`` with ``w_j = (-1)^j binom(order, j)``.

    Uses the recursion ``w_j = w_{j-1} (1 - (order + 1) / j)``, which is
    exact for integer orders (the sequence terminates with zeros).
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if not math.isfinite(order):
        raise ValueError(f"order must be finite, got {order!r}")
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(1, n + 1):
        w[j] = w[j - 1] * (1.0 - (order + 1.0) / j)
    return w


class GlOperator:
    """Streaming GL operator of fixed order and step.

    Each call to :meth:`apply` pushes one sample and returns
    ``h**(-order) * sum_j w_j f(t - j h)`` over the retained history.
    """

    def __init__(self, order: float, h: float, memory_len: int = DEFAULT_MEMORY_LEN):
        if h <= 0:
            raise ValueError(f"step h must be > 0, got {h!r}")
        if memory_len < 1:
            raise ValueError(f"memory_len must be >= 1, got {memory_len!r}")
        self.order = float(order)
        self.h = float(h)
        self.memory_len = int(memory_len)
        self.weights = gl_weights(self.order, self.memory_len - 1)
        self.scale = self.h ** (-self.order)
        # weights stored oldest-first so they line up with the buffer window
        self._w_rev = self.weights[::-1].copy()
        # doubled ring buffer: the last memory_len samples are always the
        # contiguous slice _buf[_pos + 1 : _pos + 1 + memory_len]
        self._buf = np.zeros(2 * self.memory_len)
        self._pos = self.memory_len - 1
        self.count = 0

    def reset(self) -> None:
        self._buf[:] = 0.0
        self._pos = self.memory_len - 1
        self.count = 0

    @property
    def history(self) -> np.ndarray:
        """Retained samples, newest first (length <= memory_len)."""
        m = self.memory_len
        window = self._buf[self._pos + 1 : self._pos + 1 + m]
        return window[::-1][: min(self.count, m)].copy()

    def apply(self, sample: float) -> float:
        m = self.memory_len
        self._pos = (self._pos + 1) % m
        self._buf[self._pos] = sample
        self._buf[self._pos + m] = sample
        self.count += 1
        if self.order == 0.0:
            return float(sample)
        window = self._buf[self._pos + 1 : self._pos + 1 + m]
        return self.scale * float(np.dot(self._w_rev, window))

    @property
    def nbytes(self) -> int:
        return self._buf.nbytes + self.weights.nbytes + self._w_rev.nbytes


def gl_apply(op: GlOperator, new_sample: float) -> float:
    return op.apply(new_sample)
