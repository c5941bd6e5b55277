#!/usr/bin/env python3
"""The resolvent compression and when two realizations are the same system.

Q(z) compresses (T - zI)^{-1} to the input/output channel.  It inverts
the transfer function through Q(z) = (Theta(1/z) - zI)^{-1}, opens with
-I/z + F/z^2 at infinity, and its difference-quotient kernels are
positive exactly for functions that arise this way -- so the kernels
separate genuine resolvent compressions from impostors.  Minimality makes
the state space canonical: two minimal realizations of one transfer
function differ by a unique unitary change of state basis, which the
similarity solver reconstructs from Krylov data.
"""

import numpy as np

import pqsys

rng = np.random.default_rng(23)

# a scalar function given by four atoms, realized two different ways; the
# constant term gets an imaginary part (a dissipative corner) so the
# mixed F-term in the kernels is active and can catch impostors
atoms = ((-0.55, np.array([[0.18]])), (-0.1, np.array([[0.22]])),
         (0.3, np.array([[0.2]])), (0.6, np.array([[0.15]])))
center = -sum(t * s for t, s in atoms)
radius = 1.0 - sum(s for _, s in atoms)
theta0 = center + radius * np.array([[0.3 + 0.35j]])
f = pqsys.SqsFunctionData(theta0, atoms)

diag_sys = pqsys.realize_from_data(f)           # diagonal main operator
jac_sys = pqsys.jacobi_realize(f).system()      # tridiagonal main operator
print("diagonal realization:   A =", np.round(np.diag(diag_sys.A).real, 3))
print("tridiagonal realization: a =", np.round(pqsys.jacobi_realize(f).a, 4))

# same transfer function, same resolvent compression
z = 2.4 - 0.7j
q1 = complex(pqsys.q_eval(diag_sys, z)[0, 0])
q2 = complex(pqsys.q_eval(jac_sys, z)[0, 0])
print(f"\nQ({z}) from both realizations: {q1:.10f} vs {q2:.10f}")

r1, r2 = pqsys.q_theta_roundtrip(diag_sys, z)
print("inversion identity residuals:", f"{r1:.2e}", f"{r2:.2e}")

F = pqsys.q_asymptotic_F(diag_sys)
print("fitted second asymptotic coefficient F =",
      f"{complex(F[0, 0]):.6f}", " (-Theta(0) =", f"{-complex(theta0[0,0]):.6f})")

# the kernel test: the genuine Q passes, a 10%-inflated impostor fails
grid = [2.0 + 0.5j, -1.9 + 0.8j, 1.4 - 1.2j, 3.0 + 0.1j]
good = pqsys.q_class_kernel_check(diag_sys, -diag_sys.D, grid)
bad = pqsys.q_class_kernel_check(lambda w: 1.1 * pqsys.q_eval(diag_sys, w),
                                 -diag_sys.D, grid)
print("\nkernel minimum eigenvalues")
print("  genuine Q:   ", f"{good.s2_min_eig:+.2e}", f"{good.s3_min_eig:+.2e}")
print("  inflated Q:  ", f"{bad.s2_min_eig:+.2e}", f"{bad.s3_min_eig:+.2e}")

# the unitary intertwining the two realizations, recovered from scratch
res = pqsys.unitary_similarity(diag_sys, jac_sys)
U = res.U
print("\nunitary similarity residuals:",
      {k: f"{v:.2e}" for k, v in res.residuals.items()})
print("U maps the diagonal model onto the tridiagonal one:",
      f"{pqsys.operator_norm(U @ diag_sys.A @ U.conj().T - jac_sys.A):.2e}")

# two different functions: the solver refuses instead of inventing a U
other = pqsys.SqsFunctionData(theta0 * 0.5, atoms)
try:
    pqsys.unitary_similarity(diag_sys, pqsys.realize_from_data(other))
except pqsys.TransferMismatch as exc:
    print("\nmismatched functions:", exc)
