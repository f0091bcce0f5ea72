"""
Detecting the jump slope b
==========================

With no amplitude jump (a = 1) the b term hides in a weaker moment of the
difference of two characteristic functions. Ones that differ only in b
give an estimate of b - b~; a potential change on (0, pi/2) alone does not.
"""

from starspectra import EdgeSpec, StarProblem
from starspectra.recovery import bump, detect_b, forward_trace

with_b = forward_trace(StarProblem.simple(b=1.0, d=1.0), T=300.0)
without = forward_trace(StarProblem.simple(b=0.0, d=1.0), T=300.0)
for T in (50.0, 100.0, 300.0):
    print(f"T={T:5.0f}  b - b~ estimate {detect_b(with_b, without, 1.0, T=T):.4f}")

base = StarProblem.simple(b=0.5, d=1.0)
bumped = base.replace_edge(0, EdgeSpec(bump(0.2, 1.4, 1.0), 0.0))
est = detect_b(forward_trace(bumped, T=300.0), forward_trace(base, T=300.0), 1.0, T=300.0)
print(f"potential change only: estimate {est:.4f}")
