"""The short-memory Gruenwald-Letnikov operator on signals with known answers."""
import math

import numpy as np

from pmsm_smc.fractional import GlOperator, gl_apply, gl_weights

h = 1e-3
print("weights of order 0.8:", np.round(gl_weights(0.8, 5), 6))

# Half-derivative of t is 2*sqrt(t/pi); applying it twice gives the first derivative.
t = h * np.arange(2000)
half = GlOperator(0.5, h, memory_len=2000)
once = np.array([gl_apply(half, v) for v in t])
half_again = GlOperator(0.5, h, memory_len=2000)
twice = np.array([gl_apply(half_again, v) for v in once])
print(f"D^0.5 t at t=1.999: {once[-1]:.5f} (exact {2 * math.sqrt(t[-1] / math.pi):.5f})")
print(f"D^0.5 D^0.5 t:      {twice[-1]:.5f} (exact 1)")

# Truncating the memory makes the integral of a constant forget its past.
for m in (50, 500, 2000):
    op = GlOperator(-1.0, h, memory_len=m)
    total = [gl_apply(op, 1.0) for _ in range(2000)][-1]
    print(f"integral of 1 over 2 s with memory {m:>4}: {total:.3f}")
