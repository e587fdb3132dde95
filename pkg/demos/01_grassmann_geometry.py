"""A tour of the Grassmann geometry toolkit.

Points on Gr(n, p) are orthonormal n-by-p representatives; tangent vectors
are horizontal matrices. This script walks through the exponential map, its
inverse, the QR retraction, and principal-angle distances, checking each
identity numerically as it goes.
"""

import numpy as np

from grasseig import grassmann as gr

rng = np.random.default_rng(0)

print("== points and tangents ==")
X = gr.random_point(40, 4, seed=1)
print(f"X in Gr(40, 4), orthonormality defect {np.linalg.norm(X.rep.T @ X.rep - np.eye(4)):.2e}")

G = gr.project_tangent(X, rng.standard_normal((40, 4)))
G = G.scaled(0.8 / G.spectral_norm)
print(f"random tangent: |G|_F = {G.norm:.4f}, |G|_2 = {G.spectral_norm:.4f}, "
      f"horizontality |X^T G| = {np.linalg.norm(X.rep.T @ G.mat):.2e}")

print("\n== exponential map and logarithm ==")
Y = gr.exp(X, G)
back = gr.log(X, Y)
print(f"walked to Y = exp(X, G); log(X, Y) recovers G to {np.linalg.norm(back.mat - G.mat):.2e}")
print(f"distance(X, Y) = {gr.distance(X, Y):.6f}  vs  |G|_F = {G.norm:.6f}")

print("\n== unit-speed geodesics ==")
U = G.scaled(1.0 / G.norm)
for t in (0.25, 0.7, 1.4):
    d = gr.distance(X, gr.exp(X, U.scaled(t)))
    print(f"  t = {t:4.2f}: distance along the geodesic = {d:.12f}")

print("\n== QR retraction: first-order agreement ==")
for t in (1e-1, 1e-2, 1e-3):
    gap = gr.distance(gr.retract_qr(X, G.scaled(t)), gr.exp(X, G.scaled(t)))
    print(f"  t = {t:.0e}: dist(retraction, geodesic) = {gap:.3e}  (~ t^2)")

print("\n== principal angles ==")
Z = gr.perturb_within(X, 0.3, seed=2)
theta = gr.principal_angles(X, Z)
print(f"angles to a perturbed subspace: {np.array2string(theta, precision=4)}")
print(f"|theta|_2 = {np.linalg.norm(theta):.6f} (the perturbation radius was 0.3)")

tiny = gr.perturb_within(X, 1e-9, seed=3)
print(f"a 1e-9 perturbation is resolved to {gr.distance(X, tiny):.3e} "
      "(small angles come from sines, not cosines)")

print("\n== curvature comparison gaps (always nonnegative) ==")
a = gr.perturb_within(X, 0.3, seed=4)
b = gr.perturb_within(X, 0.25, seed=5)
print(f"nonneg-curvature contraction slack: {gr.nonneg_curvature_gap(a, b, X):.3e}")
c = gr.perturb_within(a, 0.15, seed=6)
d = gr.perturb_within(a, 0.12, seed=7)
print(f"bounded-curvature comparison slack: {gr.bounded_curvature_gap(a, b, c, d, K=2.0):.3e}")
