"""
Rebuilding omega from its zeros
===============================

An entire function of order 1/2 is fixed by its zeros up to a constant.
With the first N eigenvalues, a model tail for the rest and one
normalization value we rebuild omega and compare with the forward solve.
"""

import numpy as np

from starspectra import StarProblem
from starspectra.charfn import hadamard_normalization, hadamard_rebuild, omega
from starspectra.spectrum import enumerate_eigenvalues

problem = StarProblem.simple(a=2.0, d=1.0)
spec = enumerate_eigenvalues(problem, 20.3)
c = hadamard_normalization(spec, float(omega(problem, -1.0)))

k = np.linspace(0.5, 8.0, 16)
rebuilt = hadamard_rebuild(spec, c, k * k)
direct = omega(problem, k * k)
for kk, r, d in zip(k, rebuilt, direct):
    print(f"k={kk:5.2f}  rebuilt {r: .6e}  forward {d: .6e}")
print("sup relative error:", np.max(np.abs(rebuilt - direct)) / np.max(np.abs(direct)))
