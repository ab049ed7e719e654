"""Base profiles, the no-reversal condition, and flux bookkeeping.

The channel flows F(y) = 3A y^2 + B y + C are admissible when
(A,B,C) != 0, A <= 0 and |B| <= 3A + C, which rules out flow reversal:
F >= 0 on [-1,1] and F > 0 inside.  The flux through any section is
exactly 2(A + C).
"""

import numpy as np

from cpflow import (
    Profile,
    base_pressure_gradient,
    check_admissibility,
    couette,
    eval_profile,
    poiseuille_for_flux,
)

print(__doc__)

cases = {
    "poiseuille (flux 4)": poiseuille_for_flux(4.0),
    "couette": couette(1.0),
    "skewed admissible": Profile(-0.5, 0.3, 2.0),
    "reversal (counterexample family)": Profile(-1924.074, 0.0, 4248.35),
}

for name, p in cases.items():
    rep = check_admissibility(p)
    F0 = eval_profile(p, 0.0)[0]
    print(f"\n{name}: A={p.A:.4g} B={p.B:.4g} C={p.C:.4g}")
    print(f"  admissible        : {rep.satisfies_abc}")
    print(f"  flow reversal     : {rep.reversal}")
    print(f"  flux 2(A+C)       : {rep.flux:.6g}")
    print(f"  centerline speed  : {F0:.6g}")
    print(f"  pressure gradient : {base_pressure_gradient(p):.6g}  (= 6A)")

p = poiseuille_for_flux(4.0)
ys = np.linspace(-1, 1, 9)
print("\npoiseuille profile sampled:")
for y in ys:
    print(f"  F({y:+.2f}) = {p.F(y):8.5f}")
