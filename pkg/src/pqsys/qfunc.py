"""Resolvent compressions of quasi-selfadjoint contractions.

Q(z) is the I/O-corner compression of (T - zI)^{-1}.  This module
evaluates it, checks the algebraic inversion tying it to the transfer
function, fits the second asymptotic coefficient, and runs the grid
kernel tests that characterize which functions arise this way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import sysmodel, transfer
from .errors import DegenerateGrid, NotPqs, SingularResolvent
from .opcore import DEFAULT_TOL, Tolerances, as_matrix, operator_norm
from .sysmodel import PartitionedContraction


@dataclass(frozen=True)
class QSample:
    z: complex
    value: np.ndarray


def q_eval(tau: PartitionedContraction, z: complex, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Corner block of (T - zI)^{-1} on the I/O coordinates."""
    flags = sysmodel.classify(tau, tol)
    if not flags.pqs:
        raise NotPqs("resolvent compressions are defined for pqs systems")
    n = tau.out_dim
    total = n + tau.state_dim
    E = np.eye(total, dtype=complex)[:, :n]
    X = transfer._resolve(tau.T - complex(z) * np.eye(total), E)
    return X[:n, :]


def q_sampler(source) -> Callable[[complex], np.ndarray]:
    if isinstance(source, PartitionedContraction):
        return lambda z: q_eval(source, z)
    if callable(source):
        return source
    raise TypeError(f"cannot sample a resolvent compression from {type(source)!r}")


def q_theta_roundtrip(tau: PartitionedContraction, z: complex, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """Residuals of the two inversion directions

        Q(z) (Theta(1/z) - zI) = I    and    Theta(1/z) = zI + Q(z)^{-1}.
    """
    z = complex(z)
    if abs(z) < 1e-12:
        raise SingularResolvent("the inversion needs z != 0")
    n = tau.out_dim
    Q = q_eval(tau, z, tol)
    th = transfer.theta_eval(tau, 1.0 / z, tol)
    r1 = operator_norm(Q @ (th - z * np.eye(n)) - np.eye(n))
    try:
        Qinv = np.linalg.inv(Q)
    except np.linalg.LinAlgError as exc:
        raise SingularResolvent(str(exc)) from None
    r2 = operator_norm(th - z * np.eye(n) - Qinv)
    return r1, r2


def q_asymptotic_F(q, radius: float = 100.0, count: int = 8) -> np.ndarray:
    """Second coefficient of the expansion Q(z) = -I/z + F/z^2 + o(1/z^2),
    fitted as the average of z^2 (Q(z) + I/z) over a ring of samples.
    Averaging over a full ring of roots of unity cancels the lower-order
    tail to O(radius^-count)."""
    sample = q_sampler(q)
    acc = None
    for k in range(count):
        z = radius * np.exp(2j * np.pi * k / count)
        val = as_matrix(sample(z))
        n = val.shape[0]
        term = z * z * (val + np.eye(n) / z)
        acc = term if acc is None else acc + term
    return acc / count


class KernelReport(NamedTuple):
    s2_min_eig: float
    s3_min_eig: float
    s4_witness: bool
    s4_point: complex | None


_S4_PROBES = (2.0 + 0.9j, -1.8 + 1.2j, 1.6 - 1.1j, -2.4 - 0.8j, 3.0 + 2.0j)


def q_class_kernel_check(q, F, z_points: Sequence[complex], tol: Tolerances = DEFAULT_TOL) -> KernelReport:
    """Grid test of the structural kernel conditions.

    Assembles the two block Gram matrices

        K2(z, xi) = [Q(z) - Q(xi)* - Q(xi)*(F - F*)Q(z)] / (z - conj(xi))
        K3(z, xi) = [(1-z^2)Q(z) - (1-conj(xi)^2)Q(xi)*
                     - (1-z conj(xi))Q(xi)*(F - F*)Q(z)
                     - (z - conj(xi))I] / (z - conj(xi))

    over the given points and returns their smallest eigenvalues; genuine
    resolvent compressions give nonnegative values up to roundoff.
    Diagonal entries at real points are confluent and use a central
    difference in the first argument.  Also searches a fixed probe set
    for a point where K2(z0, z0) differs from Q(z0)*Q(z0), the witness
    that the underlying operator has genuine state content."""
    sample = q_sampler(q)
    F = as_matrix(F)
    pts = [complex(z) for z in z_points]
    p = len(pts)
    if p == 0:
        raise DegenerateGrid("empty grid")
    for i in range(p):
        if abs(pts[i]) <= 1.0:
            raise DegenerateGrid(f"grid point {pts[i]} is not outside the closed unit disk")
        for j in range(i + 1, p):
            if abs(pts[i] - pts[j]) <= 1e-12:
                raise DegenerateGrid(f"repeated grid point {pts[i]}")
            if abs(pts[i] - np.conj(pts[j])) <= 1e-12:
                raise DegenerateGrid(f"conjugate-coincident pair at {pts[i]}")

    vals = [as_matrix(sample(z)) for z in pts]
    n = vals[0].shape[0]
    dF = F - F.conj().T
    h = 1e-6

    # row index carries the conjugated argument, column the holomorphic
    # one; only this orientation assembles the factored Gram form
    def k2_entry(i: int, j: int) -> np.ndarray:
        qi = vals[i].conj().T
        if i == j and abs(pts[i].imag) <= 1e-9:
            def num(w):
                qw = as_matrix(sample(w))
                return qw - qi - qi @ dF @ qw
            return (num(pts[i] + h) - num(pts[i] - h)) / (2 * h)
        return (vals[j] - qi - qi @ dF @ vals[j]) / (pts[j] - np.conj(pts[i]))

    def k3_entry(i: int, j: int) -> np.ndarray:
        zi = np.conj(pts[i])
        qi = vals[i].conj().T
        if i == j and abs(pts[i].imag) <= 1e-9:
            def num(w):
                qw = as_matrix(sample(w))
                return ((1 - w * w) * qw - (1 - zi * zi) * qi
                        - (1 - w * zi) * qi @ dF @ qw - (w - zi) * np.eye(n))
            return (num(pts[i] + h) - num(pts[i] - h)) / (2 * h)
        num = ((1 - pts[j] ** 2) * vals[j] - (1 - zi * zi) * qi
               - (1 - pts[j] * zi) * qi @ dF @ vals[j] - (pts[j] - zi) * np.eye(n))
        return num / (pts[j] - zi)

    G2 = np.zeros((n * p, n * p), dtype=complex)
    G3 = np.zeros((n * p, n * p), dtype=complex)
    for i in range(p):
        for j in range(p):
            G2[i * n:(i + 1) * n, j * n:(j + 1) * n] = k2_entry(i, j)
            G3[i * n:(i + 1) * n, j * n:(j + 1) * n] = k3_entry(i, j)
    s2 = float(np.linalg.eigvalsh((G2 + G2.conj().T) / 2).min())
    s3 = float(np.linalg.eigvalsh((G3 + G3.conj().T) / 2).min())

    witness = False
    where = None
    for z0 in _S4_PROBES:
        qv = as_matrix(sample(z0))
        qs = qv.conj().T
        k = (qv - qs - qs @ dF @ qv) / (z0 - np.conj(z0))
        gap = operator_norm(k - qs @ qv)
        if gap > 100 * tol.psd_tol * max(1.0, operator_norm(qv) ** 2):
            witness = True
            where = complex(z0)
            break
    return KernelReport(s2, s3, witness, where)
