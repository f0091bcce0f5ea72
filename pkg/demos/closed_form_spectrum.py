"""
Spectrum of the unperturbed star
================================

Three zero-potential edges with Neumann roots and no jump. The
characteristic function is -3k sin(k pi) cos^2(k pi), so the square roots
of the eigenvalues are 0, the integers, and the half-integers twice.
"""

import numpy as np

from starspectra import StarProblem
from starspectra.spectrum import counting_windows, enumerate_eigenvalues

problem = StarProblem.simple()
spec = enumerate_eigenvalues(problem, 5.0)

# each entry carries its multiplicity and its class labels
for e in spec.entries:
    print(f"sqrt(lam) = {e.sqrt_lambda:8.5f}  mult {e.multiplicity}  {e.labels}")

# the counting windows pin 3n zeros below k = n - 1/4 and 3n + 1 below k = n + 1/4
for w in counting_windows(spec):
    print(f"n={w.n:2d} bound k={w.k_bound:5.2f} expected {w.expected_count:3d} found {w.found:3d}")

# a constant potential on edge 2 splits every double zero
from starspectra import PotentialSpec
split = StarProblem.simple(q=(PotentialSpec.zero(), PotentialSpec.constant(1.0), PotentialSpec.zero()))
k = np.sqrt(enumerate_eigenvalues(split, 5.0, strict=False).expanded())
print("perturbed sqrt(lam):", np.round(k, 4))
