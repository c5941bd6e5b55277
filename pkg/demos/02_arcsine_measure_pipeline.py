#!/usr/bin/env python3
"""From a measure on (-1, 1) to a system, and back to three decimals.

The transfer functions of passive quasi-selfadjoint systems are exactly
the functions Theta(0) + W(lambda) where W integrates the kernel
lambda (1 - t^2)/(1 - t lambda) against a positive operator measure with
mass at most I, and Theta(0) sits in an explicit operator ball.  The
arcsine weight gives a closed form for everything, which makes it a good
end-to-end check: discretize, test membership, realize, tridiagonalize.
"""

import numpy as np

import pqsys

# 200-node quadrature of the arcsine weight, constant term d = 0.25
data, tau = pqsys.chebyshev_example(0.25, 200)
print("atoms:", len(data.atoms), " total mass:",
      f"{sum(s[0, 0].real for _, s in data.atoms):.6f}")

# the discretization reproduces the closed form far past plotting accuracy
for lam in (0.6, 0.5, 1.0, -1.0):
    w_disc = complex(pqsys.w_from_data(data, lam)[0, 0])
    w_exact = pqsys.chebyshev_w_closed(lam)
    print(f"W({lam:+.1f}) = {w_disc.real:+.12f}   "
          f"closed form {w_exact.real:+.12f}   gap {abs(w_disc - w_exact):.2e}")

# membership of the constant term in the operator ball is sharp: the
# boundary value d = 1/2 is accepted, anything past it is rejected
for d in (0.5, 0.51):
    probe = pqsys.SqsFunctionData(np.array([[d + 0j]]), data.atoms)
    rep = pqsys.sqs_membership(probe)
    verdict = "member" if rep.member else f"rejected ({rep.reasons[0]})"
    print(f"d = {d}: {verdict}")

# the minimal realization is diagonal over the quadrature nodes
print("\nrealized state dimension:", tau.state_dim)
lam = 0.37 + 0.21j
gap = abs(complex(pqsys.theta_eval(tau, lam)[0, 0])
          - complex(pqsys.theta_from_data(data, lam)[0, 0]))
print(f"transfer agreement at {lam}: {gap:.2e}")

# tridiagonalizing the same function exposes the recurrence coefficients
# of the weight: for the arcsine family a_k = 1/2 and b_k = 0 exactly
jr = pqsys.jacobi_realize(data, max_len=12)
print("\ntridiagonal coefficients (first 12):")
print("  a:", np.round(jr.a, 10))
print("  b:", np.round(jr.b, 10))

# the resolvent compression of the realized system matches the closed
# form of the continued fraction on the exterior domain
z = 2.0
q = complex(pqsys.q_eval(tau, z)[0, 0])
theta_at = pqsys.chebyshev_theta_closed(0.25, 1.0 / z)
print(f"\nQ({z}) * (Theta(1/{z}) - {z}) = {q * (theta_at - z):+.12f}  (should be 1)")
