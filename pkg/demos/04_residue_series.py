"""Closed-form kernels from residues.

With the canonical parameters the resolvent kernel K, whose transform is
w_hat/(1 - w_hat), has poles on the diagonals of the complex plane.  Summing
residues gives a series of damped cosines.  The first term dominates, so the
zeros of K sit near those of cos(pi/12 + A) with A = alpha x.  This script
compares the series with brute-force quadrature and prints the first zero
brackets with their certified error bounds.  It ends with a single Gaussian
kernel, which has no inhibition and therefore no oscillation at all.
"""

import numpy as np

from neurofield.analytic import (
    K_quadrature_eval,
    K_series_eval,
    b_heaviside_eval,
    b_quadrature_eval,
    gaussian_negative_control,
    locate_zeros,
    poles_and_residues,
)

print("first poles and residues")
for family, k, ell, z, res in poles_and_residues(1, labels=True)[:6]:
    print(f"  {family}{k},{ell}  z = {z.real:+.4f}{z.imag:+.4f}i   residue {res.real:+.4f}{res.imag:+.4f}i")

xs = np.array([0.1, 0.5, 1.0, 2.0, 4.0])
print("\n   x      K series            K quadrature         b series            b quadrature")
for x, ks, bs in zip(xs, K_series_eval(xs), b_heaviside_eval(xs)):
    print(f"  {x:3.1f}  {ks:+.12e}  {K_quadrature_eval(x):+.12e}  {bs:+.12e}  {b_quadrature_eval(x):+.12e}")

for kind in ("K", "b"):
    table = locate_zeros(kind, 6)
    print(f"\nzeros of {table.kind}")
    for r in table.rows:
        print(f"  k={r.k}  ({r.bracket_lo:.4f}, {r.bracket_hi:.4f})  zero {r.zero:.6f}  "
              f"ref {r.reference:.6f}  |err| {r.error:.1e} <= {r.bound:.1e}")

g = gaussian_negative_control()
print(f"\nsign changes on (0.1, 10): difference of Gaussians {g.dog_sign_changes}, "
      f"single Gaussian {g.gaussian_sign_changes}")
