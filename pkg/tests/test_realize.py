"""Realizations: atomic data, inner canonical form, dilation, tridiagonal."""

import numpy as np
import pytest

import pqsys
from pqsys.errors import (
    InvalidD,
    NotInner,
    NotInSqs,
    NotMinimal,
    NotScalar,
    TransferMismatch,
)
from pqsys.realize import blaschke

import oracles
from helpers import (
    circle_points,
    rand_atoms,
    rand_complex,
    rand_contraction,
    rand_pqs_T,
    rand_unitary,
)


def make_system(T, in_dim, out_dim, state_dim):
    return pqsys.PartitionedContraction(np.asarray(T, dtype=complex), in_dim, out_dim, state_dim)


def member_data(rng, m=3, n=2):
    atoms = rand_atoms(rng, m, n)
    center = -sum(t * s for t, s in atoms)
    total = sum(s for _, s in atoms)
    Rh = pqsys.psd_sqrt(np.eye(n) - total)
    X = rand_contraction(rng, n, n, smax=0.9)
    theta0 = center + Rh @ X @ Rh
    return pqsys.SqsFunctionData(theta0, tuple(atoms))


def inner_pqs_system(rng, points, n):
    """Conservative pqs system whose transfer function is unitarily
    diagonal: Blaschke factors at the given points plus a unitary block."""
    s = len(points)
    pts = np.array(points, dtype=float)
    A = np.diag(pts.astype(complex))
    Q, _ = np.linalg.qr(rand_complex(rng, n, n))
    K = Q[:, :s]
    Wp = Q[:, s:]
    Xu = rand_unitary(rng, n - s) if n > s else np.zeros((0, 0), dtype=complex)
    DA = np.diag(np.sqrt(1.0 - pts ** 2).astype(complex))
    D = -K @ A @ K.conj().T + Wp @ Xu @ Wp.conj().T
    T = np.block([[D, K @ DA], [DA @ K.conj().T, A]])
    return make_system(T, n, n, s)


# ---------------------------------------------------------------------------
# atomic data <-> system
# ---------------------------------------------------------------------------

def test_realize_from_data_is_pqs_minimal_and_matches():
    rng = np.random.default_rng(0)
    for _ in range(5):
        f = member_data(rng)
        tau = pqsys.realize_from_data(f)
        flags = pqsys.classify(tau)
        assert flags.pqs
        assert pqsys.is_minimal(tau)
        for lam in (0.3, -0.45j, 0.2 - 0.5j):
            gap = np.linalg.norm(pqsys.theta_eval(tau, lam) - pqsys.theta_from_data(f, lam))
            assert gap < 1e-9


def test_realize_from_data_rejects_non_member():
    rng = np.random.default_rng(1)
    atoms = rand_atoms(rng, 2, 2)
    f = pqsys.SqsFunctionData(2.0 * np.eye(2), tuple(atoms))
    with pytest.raises(NotInSqs):
        pqsys.realize_from_data(f)


def test_spectral_measure_roundtrip():
    rng = np.random.default_rng(2)
    f = member_data(rng, m=3, n=2)
    tau = pqsys.realize_from_data(f)
    g = pqsys.spectral_measure(tau)
    assert np.linalg.norm(g.theta0 - f.theta0) < 1e-10
    assert len(g.atoms) == len(f.atoms)
    ts_f = sorted(t for t, _ in f.atoms)
    ts_g = sorted(t for t, _ in g.atoms)
    assert max(abs(a - b) for a, b in zip(ts_f, ts_g)) < 1e-9
    for (ta, sa), (tb, sb) in zip(sorted(f.atoms), sorted(g.atoms)):
        assert np.linalg.norm(sa - sb) < 1e-8


def test_spectral_measure_skips_unit_eigenvalues():
    # a decoupled eigenvalue at 1 carries no transfer content
    f = pqsys.SqsFunctionData(np.array([[0.1 + 0j]]), ((0.3, np.array([[0.5]])),))
    tau = pqsys.realize_from_data(f)
    T = np.zeros((tau.T.shape[0] + 1,) * 2, dtype=complex)
    T[:tau.T.shape[0], :tau.T.shape[0]] = tau.T
    T[-1, -1] = 1.0
    padded = make_system(T, 1, 1, tau.state_dim + 1)
    g = pqsys.spectral_measure(padded)
    assert len(g.atoms) == 1
    assert abs(g.atoms[0][0] - 0.3) < 1e-12


# ---------------------------------------------------------------------------
# inner canonical form
# ---------------------------------------------------------------------------

def test_blaschke_values():
    assert abs(blaschke(0.0, 0.5) - 0.5) < 1e-15
    assert abs(blaschke(0.3, 1.0) - 1.0) < 1e-15
    assert abs(blaschke(0.3, -1.0) + 1.0) < 1e-15
    assert abs(abs(blaschke(0.4, np.exp(0.7j))) - 1.0) < 1e-12


def test_inner_canonical_form_recovers_points():
    rng = np.random.default_rng(3)
    points = [-0.6, 0.1, 0.45]
    tau = inner_pqs_system(rng, points, n=5)
    can = pqsys.inner_canonical_form(tau)
    assert sorted(np.round(can.points, 8)) == sorted(np.round(points, 8))
    m = can.unitary_block.shape[0]
    assert np.linalg.norm(can.unitary_block.conj().T @ can.unitary_block - np.eye(m)) < 1e-9
    n = can.basis.shape[0]
    assert np.linalg.norm(can.basis.conj().T @ can.basis - np.eye(n)) < 1e-9
    # the diagonal model reproduces the transfer function
    lam = 0.3 + 0.4j
    diag = np.diag([blaschke(a, lam) for a in can.points] + [0] * m).astype(complex)
    diag[len(can.points):, len(can.points):] = can.unitary_block * np.ones(1)
    rec = can.basis @ diag @ can.basis.conj().T
    assert np.linalg.norm(rec - pqsys.theta_eval(tau, lam)) < 1e-9


def test_inner_canonical_form_rejects_non_inner():
    rng = np.random.default_rng(4)
    f = member_data(rng, m=2, n=2)
    tau = pqsys.realize_from_data(f)
    with pytest.raises(NotInner):
        pqsys.inner_canonical_form(tau)


def test_inner_canonical_form_rejects_non_minimal():
    rng = np.random.default_rng(5)
    tau = inner_pqs_system(rng, [0.2, -0.4], n=3)
    T = np.zeros((tau.T.shape[0] + 1,) * 2, dtype=complex)
    T[:tau.T.shape[0], :tau.T.shape[0]] = tau.T
    T[-1, -1] = 0.5
    padded = make_system(T, 3, 3, tau.state_dim + 1)
    with pytest.raises(NotMinimal):
        pqsys.inner_canonical_form(padded)


# ---------------------------------------------------------------------------
# bi-inner dilation
# ---------------------------------------------------------------------------

def test_dilation_is_unitary_and_extends():
    rng = np.random.default_rng(6)
    for _ in range(3):
        tau = make_system(rand_pqs_T(rng, 2, 3), 2, 2, 3)
        dil = pqsys.biinner_dilation(tau)
        big = dil.system
        U = big.T
        assert np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) < 1e-9
        flags = pqsys.classify(big)
        assert flags.conservative and flags.pqs
        # top-left corner of the dilated transfer is the original
        lam = 0.35 - 0.2j
        full = dil.big_theta(lam)
        n = tau.out_dim
        assert np.linalg.norm(full[:n, :n] - pqsys.theta_eval(tau, lam)) < 1e-9


def test_dilation_block_formulas_match_partition():
    rng = np.random.default_rng(7)
    tau = make_system(rand_pqs_T(rng, 2, 3), 2, 2, 3)
    dil = pqsys.biinner_dilation(tau)
    n = dil.out_dim
    dk, dks = dil.dk_dim, dil.dks_dim
    lam = -0.3 + 0.45j
    full = dil.big_theta(lam)
    assert np.linalg.norm(full[:n, :n] - dil.theta(lam)) < 1e-10
    assert np.linalg.norm(full[:n, n:] - dil.theta12(lam)) < 1e-10
    assert np.linalg.norm(full[n:, :n] - dil.theta21(lam)) < 1e-10
    assert np.linalg.norm(full[n:, n:] - dil.theta22(lam)) < 1e-10
    assert full.shape == (n + dk + dks, n + dk + dks)


def test_dilation_transfer_unitary_on_circle():
    rng = np.random.default_rng(8)
    tau = make_system(rand_pqs_T(rng, 1, 2), 1, 1, 2)
    dil = pqsys.biinner_dilation(tau)
    for xi in circle_points(16):
        val = dil.big_theta(xi)
        assert np.linalg.norm(val.conj().T @ val - np.eye(val.shape[1])) < 1e-7


# ---------------------------------------------------------------------------
# tridiagonal realizations
# ---------------------------------------------------------------------------

def test_jacobi_matrix_structure():
    jr = pqsys.JacobiRealization(0.2 + 0.1j, (0.5, 0.4), (0.1, -0.2), False)
    T = jr.matrix()
    expect = np.array([
        [0.2 + 0.1j, 0.5, 0.0],
        [0.5, 0.1, 0.4],
        [0.0, 0.4, -0.2],
    ])
    assert np.linalg.norm(T - expect) < 1e-15
    assert jr.system().state_dim == 2


def test_jacobi_rejects_nonpositive_offdiagonal():
    with pytest.raises(pqsys.PqsysError):
        pqsys.JacobiRealization(0.0, (0.5, -0.1), (0.0, 0.0), False)


def test_jacobi_realize_chebyshev_coefficients():
    data, tau = pqsys.chebyshev_example(0.25, 120)
    jr = pqsys.jacobi_realize(data, max_len=40)
    assert jr.truncated
    assert abs(jr.a[0] - 0.5) < 1e-9
    for k in range(1, 40):
        assert abs(jr.a[k] - 0.5) < 1e-6
        assert abs(jr.b[k]) < 1e-6


def test_jacobi_realize_matches_moment_oracle():
    rng = np.random.default_rng(9)
    atoms = rand_atoms(rng, 5, 1)
    d = 0.05
    f = pqsys.SqsFunctionData(np.array([[d + 0j]]), tuple(atoms))
    jr = pqsys.jacobi_realize(f)
    A = np.diag([t for t, _ in atoms]).astype(complex)
    Bv = np.array([np.sqrt((1 - t * t) * s[0, 0]) for t, s in atoms], dtype=complex)
    moments = oracles.moments_of_pair(A, Bv, 12)
    a_ref, b_ref = oracles.jacobi_from_moments(np.real(moments), 4)
    for k in range(5):
        assert abs(jr.a[k] - a_ref[k]) < 1e-7
        assert abs(jr.b[k] - b_ref[k]) < 1e-7


def test_jacobi_realize_breakdown_on_rational():
    # two atoms: the expansion terminates at length two, untruncated
    f = pqsys.SqsFunctionData(
        np.array([[0.0 + 0j]]),
        ((0.4, np.array([[0.3]])), (-0.2, np.array([[0.25]]))),
    )
    jr = pqsys.jacobi_realize(f)
    assert not jr.truncated
    assert jr.length == 2
    # continued fraction of the coefficients reproduces the resolvent form
    z = 3.0 + 0.5j
    lhs = oracles.jacobi_cf_eval(jr.d, jr.a, jr.b, z)
    tau = pqsys.realize_from_data(f)
    q = pqsys.q_eval(tau, z)
    assert abs(lhs - complex(q[0, 0])) < 1e-10


def test_jacobi_realize_rejects_matrix_data():
    rng = np.random.default_rng(10)
    f = member_data(rng, m=2, n=2)
    with pytest.raises(NotScalar):
        pqsys.jacobi_realize(f)


def test_jacobi_realize_rejects_dissipative_corner():
    f = pqsys.SqsFunctionData(np.array([[-0.2j]]), ((0.3, np.array([[0.4]])),))
    with pytest.raises(InvalidD):
        pqsys.jacobi_realize(f)


# ---------------------------------------------------------------------------
# arcsine-weight example
# ---------------------------------------------------------------------------

def test_chebyshev_closed_forms():
    assert abs(pqsys.chebyshev_w_closed(0.6) - oracles.CHEB_W_AT_06) < 1e-12
    assert abs(pqsys.chebyshev_w_closed(1.0) - oracles.CHEB_W_AT_1) < 1e-12
    assert abs(pqsys.chebyshev_w_closed(-1.0) - oracles.CHEB_W_AT_M1) < 1e-12
    assert abs(-2.0 * pqsys.chebyshev_w_closed(0.5) - oracles.SQRT3_MINUS_2) < 1e-12
    assert abs(pqsys.chebyshev_q_identity(2.0) - oracles.cheb_q_identity_rhs(2.0)) < 1e-12
    # the two closed forms agree through the substitution z = 1/lambda
    for lam in (0.3, 0.45 + 0.2j):
        lhs = pqsys.chebyshev_q_identity(1.0 / lam)
        assert abs(lhs + 2.0 * pqsys.chebyshev_w_closed(lam)) < 1e-10


def test_chebyshev_example_discretization():
    data, tau = pqsys.chebyshev_example(0.25, 60)
    assert len(data.atoms) == 60
    mass = sum(s[0, 0] for _, s in data.atoms)
    assert abs(mass - 0.5) < 1e-12
    assert abs(complex(data.theta0[0, 0]) - 0.25) < 1e-15
    # quadrature converges geometrically; 60 nodes is already exact to 1e-9
    w_disc = complex(pqsys.w_from_data(data, 0.6)[0, 0])
    assert abs(w_disc - oracles.CHEB_W_AT_06) < 1e-9
    flags = pqsys.classify(tau)
    assert flags.pqs
    assert pqsys.sqs_membership(data).member


def test_chebyshev_example_rejects_large_corner():
    with pytest.raises(InvalidD):
        pqsys.chebyshev_example(0.51, 20)


def test_chebyshev_moments():
    data, _ = pqsys.chebyshev_example(0.0, 200)
    # even power moments of the arcsine weight over the node measure
    ts = np.array([t for t, _ in data.atoms])
    ws = np.array([float(np.real(s[0, 0])) for _, s in data.atoms])
    for k, ref in enumerate(oracles.CHEB_SIGMA_MOMENTS_EVEN):
        assert abs(float(np.sum(ws * ts ** (2 * k))) - ref) < 1e-12


# ---------------------------------------------------------------------------
# unitary similarity of minimal realizations
# ---------------------------------------------------------------------------

def test_unitary_similarity_recovers_conjugation():
    rng = np.random.default_rng(11)
    for _ in range(3):
        tau1 = pqsys.realize_from_data(member_data(rng, m=3, n=2))
        U = rand_unitary(rng, tau1.state_dim)
        T2 = oracles.conjugate_system(tau1.T, 2, 2, U)
        tau2 = make_system(T2, 2, 2, tau1.state_dim)
        res = pqsys.unitary_similarity(tau1, tau2)
        assert all(v < 1e-8 for v in res.residuals.values()), res.residuals
        # intertwining: U A1 = A2 U and U B1 = B2
        assert np.linalg.norm(res.U @ tau1.A - tau2.A @ res.U) < 1e-8
        assert np.linalg.norm(res.U @ tau1.B - tau2.B) < 1e-8


def test_unitary_similarity_accepts_explicit_S():
    rng = np.random.default_rng(12)
    tau1 = pqsys.realize_from_data(member_data(rng, m=2, n=2))
    U = rand_unitary(rng, tau1.state_dim)
    tau2 = make_system(oracles.conjugate_system(tau1.T, 2, 2, U), 2, 2, tau1.state_dim)
    res = pqsys.unitary_similarity(tau1, tau2, S=np.eye(2))
    assert res.residuals["unitarity"] < 1e-8


def test_unitary_similarity_rejects_mismatched_transfer():
    rng = np.random.default_rng(13)
    tau1 = pqsys.realize_from_data(member_data(rng, m=2, n=2))
    tau2 = pqsys.realize_from_data(member_data(rng, m=2, n=2))
    with pytest.raises(TransferMismatch):
        pqsys.unitary_similarity(tau1, tau2)


def test_unitary_similarity_diag_vs_jacobi():
    rng = np.random.default_rng(14)
    f = member_data(rng, m=6, n=1)
    if complex(f.theta0[0, 0]).imag < 0:
        # center and radius are real here, so conjugation stays in the ball
        f = pqsys.SqsFunctionData(f.theta0.conj(), f.atoms)
    diag_sys = pqsys.realize_from_data(f)
    jac_sys = pqsys.jacobi_realize(f).system()
    res = pqsys.unitary_similarity(diag_sys, jac_sys)
    U = res.U
    assert np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) < 1e-7
