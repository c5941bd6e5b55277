"""Constructive realizations.

Minimal passive quasi-selfadjoint systems from atomic measure data, the
spectral read-out inverse to it, the Blaschke-diagonal canonical form of
bi-inner transfer functions, the explicit conservative dilation, Jacobi
(tridiagonal) realizations of scalar functions with the Chebyshev weight
worked example, and unitary similarity between minimal realizations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import opcore, sysmodel, transfer
from .errors import (
    DimensionMismatch,
    InvalidD,
    MomentMismatch,
    NonPositiveWeight,
    NotInner,
    NotInSqs,
    NotMinimal,
    NotPqs,
    NotScalar,
    PqsysError,
    TransferMismatch,
)
from .opcore import DEFAULT_TOL, Tolerances, as_matrix, operator_norm
from .param import ContractionParams, parametrize
from .sysmodel import PartitionedContraction
from .transfer import SqsFunctionData, theta_eval, theta_from_data


def _merge_atoms(f: SqsFunctionData, tol: Tolerances):
    """Group atoms at coinciding locations and drop negligible weights."""
    groups: list[list] = []
    for t, sigma in sorted(f.atoms, key=lambda a: a[0]):
        if groups and abs(t - groups[-1][0]) <= 1e-12:
            groups[-1][1] = groups[-1][1] + sigma
        else:
            groups.append([t, sigma.copy()])
    kept = []
    for t, sigma in groups:
        if operator_norm(sigma) > tol.rank_tol:
            kept.append((t, sigma))
    return kept


def realize_from_data(f: SqsFunctionData, tol: Tolerances = DEFAULT_TOL) -> PartitionedContraction:
    """Minimal passive quasi-selfadjoint system whose transfer function is
    theta0 + W(lambda) for the given atomic data.

    The state space is assembled atom by atom: each weight is factored as
    Sigma_k = L_k L_k* through its eigendecomposition with small
    eigenvalues truncated, the main operator is t_k times the identity on
    each factor range, and the channel operator stacks the factors."""
    report = transfer.sqs_membership(f, tol)
    if not report.member:
        raise NotInSqs("; ".join(report.reasons) or "data fails the membership conditions")
    n = f.dim
    blocks = []
    factors = []
    for t, sigma in _merge_atoms(f, tol):
        w, V = np.linalg.eigh((sigma + sigma.conj().T) / 2)
        keep = w > tol.rank_tol * max(w.max(), 1e-300)
        r = int(np.count_nonzero(keep))
        if r == 0:
            continue
        L = V[:, keep] * np.sqrt(w[keep])
        blocks.append((t, r))
        factors.append(L)
    s = sum(r for _, r in blocks)
    diag = np.concatenate([np.full(r, t) for t, r in blocks]) if s else np.zeros(0)
    A = np.diag(diag.astype(complex))
    K_amb = np.hstack(factors) if factors else np.zeros((n, 0), dtype=complex)
    DA = np.diag(np.sqrt(1.0 - diag ** 2).astype(complex))
    B = DA @ K_amb.conj().T
    C = B.conj().T
    T = np.block([[f.theta0, C], [B, A]]) if s else f.theta0.copy()
    tau = PartitionedContraction(T, n, n, s)
    if operator_norm(T) > 1.0 + 10 * tol.psd_tol:
        raise PqsysError("assembled realization is not a contraction")
    tau = sysmodel.minimal_pqs_reduction(tau, tol)
    for j in range(20):
        lam = 0.5 * np.exp(2j * np.pi * (j + 0.3) / 20)
        gap = operator_norm(theta_eval(tau, lam, tol) - theta_from_data(f, lam))
        if gap > 10 * tol.eq_tol * max(1.0, operator_norm(f.theta0)):
            raise PqsysError(f"realized transfer deviates from the data by {gap:.3e}")
    return tau


def spectral_measure(tau: PartitionedContraction, tol: Tolerances = DEFAULT_TOL) -> SqsFunctionData:
    """Read the atomic representation back off a pqs system.

    Eigenvalues of the selfadjoint main operator are clustered, and each
    cluster t with spectral projector P contributes the weight
    C P C* / (1 - t^2).  Clusters at +-1 carry no transfer content and
    are skipped."""
    flags = sysmodel.classify(tau, tol)
    if not flags.pqs:
        raise NotPqs("spectral read-out needs a passive quasi-selfadjoint system")
    vals, vecs = np.linalg.eigh((tau.A + tau.A.conj().T) / 2)
    atoms = []
    i = 0
    s = tau.state_dim
    while i < s:
        j = i + 1
        while j < s and vals[j] - vals[j - 1] <= 1e-8:
            j += 1
        t = float(np.mean(vals[i:j]))
        if 1.0 - t * t > 1e-12:
            CV = tau.C @ vecs[:, i:j]
            sigma = (CV @ CV.conj().T) / (1.0 - t * t)
            if operator_norm(sigma) > tol.rank_tol:
                atoms.append((t, sigma))
        i = j
    f = SqsFunctionData(tau.D, tuple(atoms))
    for k in range(8):
        lam = 0.5 * np.exp(2j * np.pi * (k + 0.45) / 8)
        gap = operator_norm(theta_eval(tau, lam, tol) - theta_from_data(f, lam))
        if gap > 10 * tol.eq_tol * max(1.0, operator_norm(tau.D)):
            raise PqsysError(f"spectral read-out mismatch {gap:.3e}")
    return f


# ---------------------------------------------------------------------------
# inner canonical form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalInner:
    """Blaschke-diagonal form of a bi-inner transfer function.

    In the returned orthonormal basis of the output space, Theta(lambda)
    is diag((lambda - a_1)/(1 - lambda a_1), ..., X) with the points a_k
    the eigenvalues of the main operator and X a constant unitary block."""

    points: tuple
    unitary_block: np.ndarray
    basis: np.ndarray


def blaschke(a: float, lam: complex) -> complex:
    return (lam - a) / (1.0 - lam * a)


def inner_canonical_form(tau: PartitionedContraction, tol: Tolerances = DEFAULT_TOL) -> CanonicalInner:
    flags = sysmodel.classify(tau, tol)
    if not flags.pqs:
        raise NotPqs("canonical form applies to passive quasi-selfadjoint systems")
    if not sysmodel.is_minimal(tau, tol):
        raise NotMinimal("canonical form needs a minimal system")
    rep = transfer.inner_test(tau, tol=tol)
    if not rep.inner:
        raise NotInner(f"transfer function is not inner (defect {rep.max_defect:.3e})")
    p = parametrize(tau, tol)
    s = tau.state_dim
    if p.E_DA.shape[1] != s:
        raise NotInner("defect space of the main operator does not fill the state space")
    if operator_norm(p.K.conj().T @ p.K - np.eye(s)) > 10 * tol.eq_tol:
        raise NotInner("channel operator is not isometric")
    vals, vecs = np.linalg.eigh((tau.A + tau.A.conj().T) / 2)
    W = p.K @ (p.E_DA.conj().T @ vecs)
    if operator_norm(W.conj().T @ W - np.eye(s)) > 10 * tol.eq_tol:
        raise NotInner("eigenvector images are not orthonormal in the output space")
    W_perp = opcore.kernel_basis(W.conj().T, tol).basis
    X = W_perp.conj().T @ tau.D @ W_perp
    m = X.shape[0]
    if operator_norm(X.conj().T @ X - np.eye(m)) > 10 * tol.eq_tol:
        raise NotInner("constant block is not unitary")
    basis = np.hstack([W, W_perp])
    points = tuple(float(a) for a in vals)
    for k in range(8):
        lam = 0.6 * np.exp(2j * np.pi * (k + 0.37) / 8)
        diag = np.diag([blaschke(a, lam) for a in points])
        rec = basis @ _blockdiag(diag, X) @ basis.conj().T
        gap = operator_norm(rec - theta_eval(tau, lam, tol))
        if gap > 10 * tol.eq_tol:
            raise PqsysError(f"canonical reconstruction off by {gap:.3e}")
    return CanonicalInner(points, X, basis)


def _blockdiag(top, bottom) -> np.ndarray:
    a = as_matrix(top) if np.size(top) else np.zeros((0, 0), dtype=complex)
    b = as_matrix(bottom) if np.size(bottom) else np.zeros((0, 0), dtype=complex)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=complex)
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


# ---------------------------------------------------------------------------
# conservative dilation
# ---------------------------------------------------------------------------

def _dil_theta(p: ContractionParams, lam: complex) -> np.ndarray:
    phi = transfer._phi_direct(p, lam)
    return p.K @ phi @ p.K.conj().T + p.DKs @ p.X_ambient @ p.DKs


def _dil_theta12(p: ContractionParams, E: np.ndarray, lam: complex) -> np.ndarray:
    phi = transfer._phi_direct(p, lam)
    kk = p.E_DKs.conj().T @ p.K @ E
    left = p.K @ phi @ p.DK @ E - p.DKs @ p.E_DKs @ p.X @ kk
    right = p.DKs @ p.E_DKs @ p.DXs
    return np.hstack([left, right])


def _dil_theta21(p: ContractionParams, E: np.ndarray, lam: complex) -> np.ndarray:
    phi = transfer._phi_direct(p, lam)
    xd = p.E_DKs @ p.X @ p.E_DKs.conj().T @ p.DKs
    top = E.conj().T @ (p.DK @ phi @ p.K.conj().T - p.K.conj().T @ xd)
    bottom = -p.DX @ p.E_DKs.conj().T @ p.DKs
    return np.vstack([top, bottom])


def _dil_theta22(p: ContractionParams, E: np.ndarray, lam: complex) -> np.ndarray:
    phi = transfer._phi_direct(p, lam)
    kk = p.E_DKs.conj().T @ p.K
    b11 = E.conj().T @ (p.K.conj().T @ p.E_DKs @ p.X @ kk + p.DK @ phi @ p.DK) @ E
    b12 = -E.conj().T @ p.K.conj().T @ p.E_DKs @ p.DXs
    b21 = p.DX @ kk @ E
    b22 = p.X.conj().T
    return np.block([[b11, b12], [b21, b22]])


@dataclass(frozen=True)
class DilationBlocks:
    """Conservative quasi-selfadjoint enlargement of a pqs system.

    The enlarged I/O space stacks the original output space with the
    defect spaces of the channel operator and its adjoint.  The block
    evaluators reproduce the four corners of the enlarged transfer
    function; the top-left corner is the original Theta."""

    system: PartitionedContraction
    out_dim: int
    dk_dim: int
    dks_dim: int
    params: ContractionParams
    E_DK: np.ndarray

    def theta(self, lam: complex) -> np.ndarray:
        return _dil_theta(self.params, lam)

    def theta12(self, lam: complex) -> np.ndarray:
        return _dil_theta12(self.params, self.E_DK, lam)

    def theta21(self, lam: complex) -> np.ndarray:
        return _dil_theta21(self.params, self.E_DK, lam)

    def theta22(self, lam: complex) -> np.ndarray:
        return _dil_theta22(self.params, self.E_DK, lam)

    def big_theta(self, lam: complex) -> np.ndarray:
        return np.block([
            [self.theta(lam), self.theta12(lam)],
            [self.theta21(lam), self.theta22(lam)],
        ])


def biinner_dilation(tau: PartitionedContraction, tol: Tolerances = DEFAULT_TOL) -> DilationBlocks:
    """Embed a minimal pqs system into a conservative one on the enlarged
    I/O space, with explicit formulas for all four transfer blocks."""
    flags = sysmodel.classify(tau, tol)
    if not flags.pqs:
        raise NotPqs("dilation applies to passive quasi-selfadjoint systems")
    p = parametrize(tau, tol)
    E_DK = opcore.range_basis(p.DK, tol).basis
    s = tau.state_dim
    n = tau.out_dim
    dk = E_DK.shape[1]
    dks = p.E_DKs.shape[1]

    bigD = np.block([
        [_dil_theta(p, 0.0), _dil_theta12(p, E_DK, 0.0)],
        [_dil_theta21(p, E_DK, 0.0), _dil_theta22(p, E_DK, 0.0)],
    ])
    B_big = np.hstack([
        p.DA @ p.E_DA @ p.K.conj().T,
        p.DA @ p.E_DA @ p.DK @ E_DK,
        np.zeros((s, dks), dtype=complex),
    ])
    v = n + dk + dks
    T = np.block([[bigD, B_big.conj().T], [B_big, p.A]])
    system = PartitionedContraction(T, v, v, s)

    resid = operator_norm(T.conj().T @ T - np.eye(v + s))
    if resid > tol.eq_tol:
        raise PqsysError(f"enlarged block operator is not unitary: defect {resid:.3e}")
    big_flags = sysmodel.classify(system, tol)
    if not (big_flags.conservative and big_flags.pqs):
        raise PqsysError("enlarged system is not conservative quasi-selfadjoint")
    if not sysmodel.is_minimal(system, tol):
        raise NotMinimal("enlarged system is not minimal")
    gap = operator_norm(bigD[:n, :n] - tau.D)
    if gap > 10 * tol.eq_tol:
        raise PqsysError(f"dilation corner deviates from the source by {gap:.3e}")
    return DilationBlocks(system, n, dk, dks, p, E_DK)


# ---------------------------------------------------------------------------
# Jacobi realization of scalar functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobiRealization:
    """Scalar realization by a tridiagonal matrix with a complex corner.

    The block operator is [[d, a_0 e_0*], [a_0 e_0, J]] with J the real
    symmetric tridiagonal matrix with diagonal b and off-diagonal a[1:].
    truncated marks an expansion cut at max_len rather than at breakdown."""

    d: complex
    a: tuple
    b: tuple
    truncated: bool

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if len(a) != len(b):
            raise DimensionMismatch("coefficient lists must have equal length")
        if any(x <= 0 for x in a):
            raise PqsysError("off-diagonal coefficients must be positive")
        object.__setattr__(self, "d", complex(self.d))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> int:
        return len(self.a)

    def matrix(self) -> np.ndarray:
        L = self.length
        T = np.zeros((L + 1, L + 1), dtype=complex)
        T[0, 0] = self.d
        if L:
            T[0, 1] = T[1, 0] = self.a[0]
            for k in range(L):
                T[k + 1, k + 1] = self.b[k]
            for k in range(1, L):
                T[k, k + 1] = T[k + 1, k] = self.a[k]
        return T

    def system(self) -> PartitionedContraction:
        return PartitionedContraction(self.matrix(), 1, 1, self.length)


def _lanczos(A: np.ndarray, start: np.ndarray, max_len: int, tol: Tolerances):
    """Hermitian Lanczos with twofold full reorthogonalization."""
    alphas = []
    betas = []
    V = np.zeros((A.shape[0], 0), dtype=complex)
    v = start / np.linalg.norm(start)
    for _ in range(max_len):
        V = np.hstack([V, v.reshape(-1, 1)])
        w = A @ v
        alphas.append(float(np.real(np.vdot(v, w))))
        for _ in range(2):
            w = w - V @ (V.conj().T @ w)
        beta = float(np.linalg.norm(w))
        if beta <= tol.rank_tol:
            return alphas, betas, False
        betas.append(beta)
        v = w / beta
    return alphas, betas[:-1], True


def _moment_recurrence(moments, count: int, floor: float = 1e-10):
    """Recurrence coefficients of the measure behind a power-moment
    sequence, by the classical sigma-table algorithm in extended
    precision.  Returns (alphas, betas) with betas[0] the total mass.

    The table pivots are the leading Hankel determinant ratios and decay
    fast for clustered measures; once the relative pivot drops below
    `floor`, deeper coefficients are no longer determined by the moments
    at working precision, so the expansion stops there rather than
    returning noise."""
    m = np.asarray(moments, dtype=np.longdouble)
    L = len(m) // 2
    count = min(count, L)
    if count == 0 or m[0] <= 0:
        if m.size and m[0] < -1e-12:
            raise NonPositiveWeight(f"zeroth moment {float(m[0]):.3e} is negative")
        return [], []
    sig_prev = np.zeros(2 * count, dtype=np.longdouble)
    sig_cur = m[:2 * count].copy()
    alphas = [float(m[1] / m[0])]
    betas = [float(m[0])]
    mass = abs(np.longdouble(m[0]))
    for k in range(1, count):
        sig_next = np.zeros(2 * count, dtype=np.longdouble)
        hi = 2 * count - k
        for l in range(k, hi):
            sig_next[l] = (sig_cur[l + 1] - alphas[k - 1] * sig_cur[l]
                           - (betas[k - 1] if k >= 2 else 0.0) * sig_prev[l])
        pivot = sig_next[k]
        prev_pivot = sig_cur[k - 1]
        if pivot < -1e-6 * mass:
            raise NonPositiveWeight(f"moment table pivot {float(pivot):.3e} at step {k}")
        if pivot <= floor * mass or prev_pivot <= 0:
            break
        alphas.append(float(sig_next[k + 1] / pivot - sig_cur[k] / prev_pivot))
        betas.append(float(pivot / prev_pivot))
        sig_prev, sig_cur = sig_cur, sig_next
    return alphas, betas


def jacobi_realize(source, max_len: int | None = None, tol: Tolerances = DEFAULT_TOL) -> JacobiRealization:
    """Tridiagonal realization of a scalar transfer function.

    Accepts a scalar pqs system or scalar atomic data.  Runs Lanczos on
    the main operator started at the input channel vector; a_0 is the
    channel norm.  Breakdown before max_len means the function is
    rational and the expansion is complete.  The leading coefficients are
    cross-checked against an independent moment-recurrence computation."""
    if isinstance(source, SqsFunctionData):
        if source.dim != 1:
            raise NotScalar("atomic data must be scalar")
        d = complex(source.theta0[0, 0])
        pairs = [(t, float(np.real(sig[0, 0]))) for t, sig in source.atoms]
        pairs = [(t, s) for t, s in pairs if s > tol.rank_tol]
        A = np.diag(np.array([t for t, _ in pairs], dtype=complex))
        Bv = np.array([np.sqrt((1.0 - t * t) * s) for t, s in pairs], dtype=complex)
        grid_check = lambda lam: complex(theta_from_data(source, lam)[0, 0])
    elif isinstance(source, PartitionedContraction):
        if source.in_dim != 1 or source.out_dim != 1:
            raise NotScalar("system must have one-dimensional input and output")
        flags = sysmodel.classify(source, tol)
        if not flags.pqs:
            raise NotPqs("tridiagonal realization applies to pqs systems")
        d = complex(source.D[0, 0])
        A = source.A
        Bv = source.B[:, 0]
        grid_check = lambda lam: complex(theta_eval(source, lam, tol)[0, 0])
    else:
        raise TypeError(f"cannot realize {type(source)!r}")
    if d.imag < -tol.eq_tol:
        raise InvalidD("corner value must have nonnegative imaginary part")

    a0 = float(np.linalg.norm(Bv))
    if a0 <= tol.rank_tol:
        return JacobiRealization(d, (), (), False)
    if max_len is None:
        max_len = A.shape[0]
    max_len = min(max_len, A.shape[0])
    alphas, betas, truncated = _lanczos(A, Bv, max_len, tol)
    a = (a0, *betas)
    b = tuple(alphas)

    # moments in extended precision: the sigma-table amplifies moment
    # error by the inverse relative pivot, so double precision would cap
    # the checkable depth well short of 12
    count = min(12, len(b))
    Al = A.astype(np.clongdouble)
    Bl = Bv.astype(np.clongdouble)
    moments = []
    vec = Bl.copy()
    for _ in range(2 * count):
        moments.append(np.real(np.sum(np.conj(Bl) * vec)))
        vec = Al @ vec
    m_alphas, m_betas = _moment_recurrence(moments, count)
    for k in range(min(len(m_betas), len(a))):
        if abs(np.sqrt(m_betas[k]) - a[k]) > 1e-7 or abs(m_alphas[k] - b[k]) > 1e-7:
            raise PqsysError(
                f"moment recurrence disagrees with the iterative expansion at step {k}")

    jr = JacobiRealization(d, a, b, truncated)
    if not truncated:
        sys0 = jr.system()
        for j in range(10):
            lam = 0.5 * np.exp(2j * np.pi * (j + 0.21) / 10)
            gap = abs(complex(theta_eval(sys0, lam, tol)[0, 0]) - grid_check(lam))
            if gap > 10 * tol.eq_tol * max(1.0, abs(d)):
                raise PqsysError(f"tridiagonal transfer deviates by {gap:.3e}")
    return jr


# ---------------------------------------------------------------------------
# Chebyshev weight example
# ---------------------------------------------------------------------------

def chebyshev_w_closed(lam: complex) -> complex:
    """(1 - sqrt(1 - lambda^2)) / (2 lambda), regular at 0."""
    lam = complex(lam)
    if abs(lam) < 1e-5:
        return lam / 4.0 + lam ** 3 / 16.0
    return (1.0 - np.sqrt(1.0 - lam * lam)) / (2.0 * lam)


def chebyshev_theta_closed(d: complex, lam: complex) -> complex:
    return complex(d) + chebyshev_w_closed(lam)


def chebyshev_q_identity(z: complex) -> complex:
    """sqrt(z^2 - 1) - z on the branch decaying at infinity; equals
    -2 W(1/z) for the closed-form W."""
    z = complex(z)
    return z * np.sqrt(1.0 - 1.0 / (z * z)) - z


def chebyshev_example(d: complex, n_nodes: int, tol: Tolerances = DEFAULT_TOL):
    """Discretization of the function d + (1 - sqrt(1 - lambda^2))/(2 lambda).

    Its representing measure has density 1/(2 pi sqrt(1 - t^2)) on
    (-1, 1); the matching Gauss quadrature puts equal weights 1/(2n) at
    the Chebyshev nodes cos((2j-1) pi / (2n)).  This discretization keeps
    the total mass at exactly 1/2 and W(+-1) at exactly +-1/2, so the
    membership boundary |d| = 1/2 is preserved.  Returns the atomic data
    and the assembled diagonal pqs system."""
    d = complex(d)
    if abs(d) > 0.5 + 1e-12:
        raise InvalidD(f"|d| = {abs(d):.6f} exceeds 1/2")
    if n_nodes < 2:
        raise PqsysError("need at least 2 quadrature nodes")
    j = np.arange(1, n_nodes + 1)
    nodes = np.cos((2 * j - 1) * np.pi / (2 * n_nodes))
    sigma = 1.0 / (2 * n_nodes)
    data = SqsFunctionData(
        np.array([[d]], dtype=complex),
        tuple((float(t), np.array([[sigma]], dtype=complex)) for t in nodes),
    )
    A = np.diag(nodes.astype(complex))
    Bv = np.sqrt((1.0 - nodes ** 2) * sigma).astype(complex)
    T = np.zeros((n_nodes + 1, n_nodes + 1), dtype=complex)
    T[0, 0] = d
    T[0, 1:] = Bv
    T[1:, 0] = Bv
    T[1:, 1:] = A
    tau = PartitionedContraction(T, 1, 1, n_nodes)
    if operator_norm(T) > 1.0 + 10 * tol.psd_tol:
        raise PqsysError("discretized system is not a contraction")
    return data, tau


# ---------------------------------------------------------------------------
# unitary similarity
# ---------------------------------------------------------------------------

class SimilarityResult(NamedTuple):
    U: np.ndarray
    residuals: dict


def unitary_similarity(tau1: PartitionedContraction, tau2: PartitionedContraction,
                       S=None, tol: Tolerances = DEFAULT_TOL) -> SimilarityResult:
    """State-space unitary intertwining two minimal realizations of the
    same transfer function, assuming each output operator is S times the
    adjoint of the input operator.

    Verifies transfer agreement on a disk grid and the mixed power-moment
    identities, builds the Krylov matrices of both systems, and projects
    their quotient onto the unitary group by polar decomposition."""
    if tau1.in_dim != tau2.in_dim or tau1.out_dim != tau2.out_dim:
        raise DimensionMismatch("systems must share input and output spaces")
    if not sysmodel.is_minimal(tau1, tol):
        raise NotMinimal("first system is not minimal")
    if not sysmodel.is_minimal(tau2, tol):
        raise NotMinimal("second system is not minimal")
    if S is None:
        if tau1.in_dim != tau1.out_dim:
            raise DimensionMismatch("default S needs matching input and output dimensions")
        S = np.eye(tau1.out_dim, dtype=complex)
    else:
        S = as_matrix(S)
    for k, tau in enumerate((tau1, tau2), start=1):
        gap = operator_norm(tau.C - S @ tau.B.conj().T)
        if gap > tol.eq_tol * max(1.0, operator_norm(tau.T)):
            raise PqsysError(f"system {k} does not satisfy C = S B* (gap {gap:.3e})")

    s1, s2 = tau1.state_dim, tau2.state_dim
    n_pts = 2 * (s1 + s2) + 1
    scale = max(1.0, operator_norm(tau1.T), operator_norm(tau2.T))
    for j in range(n_pts):
        lam = (0.3 + 0.15 * (j % 2)) * np.exp(2j * np.pi * (j + 0.17) / n_pts)
        gap = operator_norm(theta_eval(tau1, lam, tol) - theta_eval(tau2, lam, tol))
        if gap > tol.eq_tol * scale:
            raise TransferMismatch(f"transfer functions differ by {gap:.3e} at {lam:.4f}")
    if s1 != s2:
        raise TransferMismatch("minimal realizations have different state dimensions")

    p = s1
    for nn in range(p + 1):
        An1 = np.linalg.matrix_power(tau1.A, nn)
        An2 = np.linalg.matrix_power(tau2.A, nn)
        for mm in range(p + 1):
            M1 = tau1.B.conj().T @ An1.conj().T @ np.linalg.matrix_power(tau1.A, mm) @ tau1.B
            M2 = tau2.B.conj().T @ An2.conj().T @ np.linalg.matrix_power(tau2.A, mm) @ tau2.B
            if operator_norm(M1 - M2) > tol.eq_tol * scale:
                raise MomentMismatch("mixed power moments differ", n=nn, m=mm)

    def krylov(tau):
        cols = [tau.B]
        for _ in range(p):
            cols.append(tau.A @ cols[-1])
        return np.hstack(cols)

    V1 = krylov(tau1)
    V2 = krylov(tau2)
    raw = V2 @ opcore.pinv(V1, tol)
    u, _, vh = np.linalg.svd(raw)
    U = u @ vh
    residuals = {
        "unitarity": max(operator_norm(U.conj().T @ U - np.eye(p)),
                         operator_norm(U @ U.conj().T - np.eye(p))),
        "main": operator_norm(U @ tau1.A - tau2.A @ U),
        "input": operator_norm(U @ tau1.B - tau2.B),
        "output": operator_norm(tau1.C - tau2.C @ U),
    }
    worst = max(residuals.values())
    if worst > 10 * tol.eq_tol * scale:
        raise PqsysError(f"intertwining residual {worst:.3e} exceeds tolerance")
    return SimilarityResult(U, residuals)
