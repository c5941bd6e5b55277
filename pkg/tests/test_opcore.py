"""Operator primitives: defects, subspaces, rank decisions, strong limits."""

import numpy as np
import pytest

import pqsys
from pqsys import opcore
from pqsys.errors import NotAContraction, NotPSD, NonSquare

from helpers import (
    rand_complex,
    rand_contraction,
    rand_hermitian_contraction,
    rand_unitary,
)


def test_operator_norm_matches_svd():
    rng = np.random.default_rng(0)
    M = rand_complex(rng, 3, 4)
    assert abs(opcore.operator_norm(M) - np.linalg.svd(M, compute_uv=False)[0]) < 1e-12


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(1)
    G = rand_complex(rng, 4, 4)
    M = G @ G.conj().T
    R = opcore.psd_sqrt(M)
    assert np.linalg.norm(R @ R - M) < 1e-10
    assert np.linalg.norm(R - R.conj().T) < 1e-12


def test_psd_sqrt_clamps_round_off_but_rejects_indefinite():
    # eigenvalue at -1e-12 is treated as zero
    M = np.diag([1.0, -1e-12]).astype(complex)
    R = opcore.psd_sqrt(M)
    assert abs(R[1, 1]) < 1e-5
    with pytest.raises(NotPSD):
        opcore.psd_sqrt(np.diag([1.0, -0.5]).astype(complex))


def test_defect_operator_unitary_is_zero():
    rng = np.random.default_rng(2)
    U = rand_unitary(rng, 3)
    assert np.linalg.norm(opcore.defect_operator(U)) < 1e-10


def test_defect_operator_rejects_expansion():
    with pytest.raises(NotAContraction):
        opcore.defect_operator(np.array([[1.5]], dtype=complex))


def test_defect_intertwining():
    # A DA = DA* A, the fundamental exchange relation
    rng = np.random.default_rng(3)
    A = rand_contraction(rng, 4, 4, smax=0.95)
    dd = opcore.defect_data(A)
    assert np.linalg.norm(A @ dd.DA - dd.DAs @ A) < 1e-9


def test_defect_data_selfadjoint_shares_basis():
    # for A = A* both defects coincide and the bases are identical objects
    rng = np.random.default_rng(4)
    A = rand_hermitian_contraction(rng, 4)
    dd = opcore.defect_data(A)
    assert dd.DA is dd.DAs or np.array_equal(dd.DA, dd.DAs)
    assert np.array_equal(dd.E_A, dd.E_As)


def test_defect_basis_spans_range():
    rng = np.random.default_rng(5)
    A = rand_contraction(rng, 4, 4, smax=0.9)
    E = opcore.defect_basis(A)
    DA = opcore.defect_operator(A)
    # projector onto basis reproduces DA
    P = E.projector()
    assert np.linalg.norm(P @ DA - DA) < 1e-9


def test_range_and_kernel_are_complements():
    rng = np.random.default_rng(6)
    M = rand_complex(rng, 5, 3) @ rand_complex(rng, 3, 5)  # rank 3
    ran = opcore.range_basis(M)
    ker = opcore.kernel_basis(M.conj().T)
    assert ran.dim == 3
    assert ker.dim == 2
    assert np.linalg.norm(ran.basis.conj().T @ ker.basis) < 1e-10


def test_subspace_intersection():
    e = np.eye(4, dtype=complex)
    U = e[:, :2]
    V = e[:, 1:3]
    W = opcore.subspace_intersection(U, V)
    assert W.dim == 1
    assert abs(abs(W.basis[1, 0]) - 1.0) < 1e-10


def test_krylov_span_saturates():
    A = np.diag([0.1, 0.2, 0.3]).astype(complex)
    b = np.array([[1.0], [1.0], [0.0]], dtype=complex)
    S = opcore.krylov_span(A, b, 3)
    assert S.dim == 2
    # e3 never appears
    assert np.linalg.norm(S.basis[2, :]) < 1e-12


def test_pinv_least_squares():
    rng = np.random.default_rng(7)
    M = rand_complex(rng, 4, 2)
    P = opcore.pinv(M)
    assert np.linalg.norm(M @ P @ M - M) < 1e-10


def test_contraction_predicates():
    assert opcore.is_contraction(np.array([[1.0]], dtype=complex))
    assert not opcore.is_contraction(np.array([[1.1]], dtype=complex))
    assert opcore.is_strict_contraction(np.array([[0.9]], dtype=complex))
    assert not opcore.is_strict_contraction(np.array([[1.0]], dtype=complex))


def test_selfadjoint_and_normal_predicates():
    rng = np.random.default_rng(8)
    H = rand_hermitian_contraction(rng, 3)
    U = rand_unitary(rng, 3)
    assert opcore.is_selfadjoint(H)
    assert opcore.is_normal(0.5 * U)
    N = rand_complex(rng, 3, 3)
    assert not opcore.is_selfadjoint(N)


def test_strong_limit_strict_contraction_vanishes():
    rng = np.random.default_rng(9)
    A = rand_hermitian_contraction(rng, 4, bound=0.8)
    lim = opcore.strong_limit_SA(A)
    assert lim.converged
    assert np.linalg.norm(lim.value) < 1e-8


def test_strong_limit_with_unitary_part():
    # A*^n A^n converges to the projection onto the unimodular eigenspace
    A = np.diag([1.0, 0.5, -0.3]).astype(complex)
    lim = opcore.strong_limit_SA(A)
    assert lim.converged
    P = np.diag([1.0, 0.0, 0.0]).astype(complex)
    assert np.linalg.norm(lim.value - P) < 1e-6


def test_cnu_unitary_split():
    A = np.zeros((3, 3), dtype=complex)
    A[0, 0] = 1.0          # unitary direction
    A[1:, 1:] = np.array([[0.3, 0.1], [0.1, -0.2]])
    uni, cnu = opcore.cnu_unitary_split(A)
    assert uni.dim == 1
    assert cnu.dim == 2
    assert abs(abs(uni.basis[0, 0]) - 1.0) < 1e-10


def test_as_matrix_rejects_junk():
    with pytest.raises(Exception):
        opcore.as_matrix("nope")


def test_nonsquare_krylov_rejected():
    with pytest.raises(NonSquare):
        opcore.krylov_span(np.zeros((2, 3), dtype=complex), np.zeros((2, 1), dtype=complex), 2)


def test_tolerances_frozen_and_replaceable():
    import dataclasses
    t = pqsys.DEFAULT_TOL
    t2 = dataclasses.replace(t, eq_tol=1e-6)
    assert t2.eq_tol == 1e-6 and t.eq_tol != 1e-6
    with pytest.raises(dataclasses.FrozenInstanceError):
        t.eq_tol = 1.0
