#!/usr/bin/env python3
"""Inner transfer functions and the conservative closure of a lossy system.

Two constructions around unitarity.  First: a quasi-selfadjoint system
whose transfer function is inner is, in the right orthonormal basis, a
diagonal of scalar Blaschke factors plus a constant unitary block; the
canonical form recovers the Blaschke points from the raw block matrix.
Second: any passive quasi-selfadjoint system embeds in a conservative one
on a larger input/output space whose transfer function is unitary on the
whole circle, with the original function sitting in the top-left corner.
"""

import numpy as np

import pqsys
from pqsys.realize import blaschke

rng = np.random.default_rng(11)

# --- build an inner system with prescribed Blaschke points ---------------
points = [-0.5, 0.15, 0.7]
s, n = len(points), 5
A = np.diag(np.array(points, dtype=complex))
Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
K, Wp = Q[:, :s], Q[:, s:]
Xu, _ = np.linalg.qr(rng.standard_normal((n - s, n - s))
                     + 1j * rng.standard_normal((n - s, n - s)))
DA = np.diag(np.sqrt(1.0 - np.array(points) ** 2).astype(complex))
D = -K @ A @ K.conj().T + Wp @ Xu @ Wp.conj().T
T = np.block([[D, K @ DA], [DA @ K.conj().T, A]])
tau = pqsys.PartitionedContraction(T, n, n, s)

rep = pqsys.inner_test(tau)
print("inner:", rep.inner, " max circle defect:", f"{rep.max_defect:.2e}")

can = pqsys.inner_canonical_form(tau)
print("planted Blaschke points:   ", sorted(points))
print("recovered from the system: ", [round(a, 12) for a in sorted(can.points)])

lam = 0.3 - 0.55j
model = np.zeros((n, n), dtype=complex)
for i, a in enumerate(can.points):
    model[i, i] = blaschke(a, lam)
model[s:, s:] = can.unitary_block
rec = can.basis @ model @ can.basis.conj().T
print("diagonal model error at a sample point:",
      f"{pqsys.operator_norm(rec - pqsys.theta_eval(tau, lam)):.2e}")

# the boundary values at +-1 satisfy the projector identities that
# characterize inner members of the class
theta1, theta_m1 = pqsys.boundary_values(pqsys.parametrize(tau))
P = (theta1 - theta_m1) / 2
print("P^2 - P:", f"{pqsys.operator_norm(P @ P - P):.2e}",
      " (P is the orthogonal projector onto the Blaschke directions)")

# --- dilate a lossy system to a conservative one --------------------------
print("\nconservative dilation of a generic lossy system:")
Tpq = pqsys.PartitionedContraction(
    pqsys.assemble(pqsys.parametrize(tau)).T, n, n, s)  # reuse dims
atoms = ((-0.3, 0.2 * np.eye(2)), (0.4, 0.25 * np.eye(2)))
f = pqsys.SqsFunctionData(np.diag([0.1, -0.05]).astype(complex), atoms)
lossy = pqsys.realize_from_data(f)
print("original: ", lossy.out_dim, "channels,", lossy.state_dim, "states,",
      "conservative =", pqsys.classify(lossy).conservative)

dil = pqsys.biinner_dilation(lossy)
big = dil.system
print("dilated:  ", big.out_dim, "channels,", big.state_dim, "states,",
      "conservative =", pqsys.classify(big).conservative)

xi = np.exp(0.6j)
V = dil.big_theta(xi)
print("transfer value on the circle is unitary to",
      f"{pqsys.operator_norm(V.conj().T @ V - np.eye(V.shape[1])):.2e}")
m = lossy.out_dim
lam = 0.45
corner = dil.big_theta(lam)[:m, :m]
print("top-left corner matches the original transfer to",
      f"{pqsys.operator_norm(corner - pqsys.theta_eval(lossy, lam)):.2e}")
