"""Closed-form success bounds and the resolution they demand.

For random trigonometric polynomials of degree N the probability that
the grid homology is correct is at least 1 - c(N)/M^2 with c(N) in
closed form.  This script tabulates the minimal M guaranteeing 95%
confidence and shows the growth laws M ~ N^(3/2) in 1D and M ~ N^2
in 2D.
"""

import math

import numpy as np

from nodalcheck.bounds import (bound_1d_periodic, bound_2d_periodic,
                               closed_form_scaling, min_M)
from nodalcheck.fields import spectral_moments, trig_coeffs

print(f"{'N':>4}  {'scaling 1D':>12}  {'min M (1D)':>10}  "
      f"{'scaling 2D':>14}  {'min M (2D)':>10}")
rows = []
for N in (3, 5, 10, 20, 40, 80):
    m1 = spectral_moments(trig_coeffs(1, N))
    m2 = spectral_moments(trig_coeffs(2, N))
    M1 = min_M(lambda M: bound_1d_periodic(m1, M), 0.95)
    M2 = min_M(lambda M: bound_2d_periodic(m2, M), 0.95)
    rows.append((N, M1, M2))
    print(f"{N:>4}  {closed_form_scaling(1, N):>12.2f}  {M1:>10}  "
          f"{closed_form_scaling(2, N):>14.1f}  {M2:>10}")

Ns = np.array([r[0] for r in rows], float)
s1 = np.polyfit(np.log(Ns), np.log([r[1] for r in rows]), 1)[0]
s2 = np.polyfit(np.log(Ns), np.log([r[2] for r in rows]), 1)[0]
print(f"\nfitted growth exponents: 1D {s1:.3f} (theory 3/2), "
      f"2D {s2:.3f} (theory 2)")
print(f"asymptotic scaling constants: 1D {4 * math.sqrt(3) / 45:.5f} N^3, "
      f"2D {529 / 225:.5f} N^4")
