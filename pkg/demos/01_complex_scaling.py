"""
Complex scaling of a one-dimensional Schrodinger operator
=========================================================

Rotating x -> e^{i beta} x swings the continuum of -d^2/dx^2 + V onto a ray
at angle -2 beta; eigenvalues stay put. That is the whole classification
trick: diagonalise at two angles and keep what did not move.
"""
import math

import numpy as np

from dilatlt import Grid1D, classify, discrete_spectrum, eigenvalues, sech_squared, zero

grid = Grid1D(16, 256)

# the free operator: every eigenvalue sits on the ray
for beta in (math.pi / 8, math.pi / 4):
    w = eigenvalues(zero(), 1j * beta, grid)
    angles = np.angle(w[np.abs(w) > 1e-8])
    print(f"beta = {beta:.4f}: arg of eigenvalues in [{angles.min():+.6f}, {angles.max():+.6f}], "
          f"expected {-2 * beta:+.6f}")

# a complex well: c sech^2 x has eigenvalues -(lam - n)^2 with lam(lam + 1) = -c
c = -6 + 0.5j
spec = sech_squared(c)
lam = (-1 + np.sqrt(1 - 4 * c + 0j)) / 2
print("\nclosed form:", [complex(-(lam - n) ** 2) for n in range(math.ceil(lam.real))])

cs = classify(spec, grid, 0.3j, 0.5j)
print("classification at theta = 0.3i / 0.5i:", cs.counts())
for e in cs.discrete():
    print(f"  {e.value:.10f}   drift {e.theta_drift:.1e}   gate change {e.gate_change:.1e}")

# the eigenvalue hugging the threshold needs a longer box and a steeper angle
ds = discrete_spectrum(spec, Grid1D(128, 1024), betas=(0.5, 0.7))
print("\nwith L = 128, N = 1024:")
for e in ds.eigenvalues:
    print(f"  {e.value:.10f}   ({e.half})")
print("gate passed:", ds.gate_passed)
