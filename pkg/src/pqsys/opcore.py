"""Dense complex linear-algebra kernel.

Defect operators, PSD square roots, pseudoinverses, range/kernel bases,
Krylov spans, operator predicates, and the splitting of a contraction into
its unitary and completely nonunitary parts.

Matrices are plain numpy arrays with complex entries.  Subspaces are
carried as explicit orthonormal column bases (`SubspaceBasis`) so that
"the restriction of an operator to a subspace" is an ordinary matrix in
that basis.  All rank decisions are relative: a singular value sigma
counts as zero when sigma <= rank_tol * sigma_max.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonSquare, NotAContraction, NotHermitian, NotPSD


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across the library.

    rank_tol : singular-value cutoff, relative to the largest
    eq_tol   : residual norm accepted for identity checks
    psd_tol  : magnitude of negative eigenvalues tolerated (then clamped)
    grid_tol : looser bound for boundary/grid checks
    """

    rank_tol: float = 1e-10
    eq_tol: float = 1e-9
    psd_tol: float = 1e-9
    grid_tol: float = 1e-7

    def __post_init__(self):
        for name in ("rank_tol", "eq_tol", "psd_tol", "grid_tol"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


DEFAULT_TOL = Tolerances()


def as_matrix(obj) -> np.ndarray:
    """Coerce to a 2-d complex ndarray and reject non-finite entries."""
    M = np.asarray(obj, dtype=complex)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={M.ndim}")
    if M.size and not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def operator_norm(M) -> float:
    M = as_matrix(M)
    if 0 in M.shape:
        return 0.0
    return float(np.linalg.norm(M, 2))


def herm_part(M) -> np.ndarray:
    M = as_matrix(M)
    return (M + M.conj().T) / 2.0


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal column basis of a subspace of C^ambient_dim."""

    ambient_dim: int
    basis: np.ndarray  # shape (ambient_dim, dim), basis* basis = I

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "SubspaceBasis":
        return kernel_basis(self.basis.conj().T)

    @staticmethod
    def full(n: int) -> "SubspaceBasis":
        return SubspaceBasis(n, np.eye(n, dtype=complex))

    @staticmethod
    def zero(n: int) -> "SubspaceBasis":
        return SubspaceBasis(n, np.zeros((n, 0), dtype=complex))


# ---------------------------------------------------------------------------
# elementary factorizations
# ---------------------------------------------------------------------------

def pinv(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    M = as_matrix(M)
    if 0 in M.shape:
        return np.zeros((M.shape[1], M.shape[0]), dtype=complex)
    return np.linalg.pinv(M, rcond=tol.rank_tol)


def psd_sqrt(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues below psd_tol are clamped to 0."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise NonSquare(f"psd_sqrt needs a square matrix, got {M.shape}")
    if M.shape[0] == 0:
        return M.copy()
    scale = max(operator_norm(M), 1.0)
    if operator_norm(M - M.conj().T) > tol.eq_tol * scale:
        raise NotHermitian("psd_sqrt: matrix is not Hermitian")
    w, U = np.linalg.eigh(herm_part(M))
    if w[0] < -tol.psd_tol * scale:
        raise NotPSD(f"psd_sqrt: eigenvalue {w[0]:.3e} below -psd_tol")
    w = np.where(w < tol.psd_tol, 0.0, w)
    return (U * np.sqrt(w)) @ U.conj().T


def range_basis(M, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the column space."""
    M = as_matrix(M)
    if 0 in M.shape:
        return SubspaceBasis.zero(M.shape[0])
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > tol.rank_tol * s[0])) if s[0] > 0 else 0
    return SubspaceBasis(M.shape[0], U[:, :rank])


def kernel_basis(M, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the null space."""
    M = as_matrix(M)
    if M.shape[1] == 0:
        return SubspaceBasis.zero(0)
    if M.shape[0] == 0:
        return SubspaceBasis.full(M.shape[1])
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] == 0:
        rank = 0
    else:
        rank = int(np.sum(s > tol.rank_tol * s[0]))
    return SubspaceBasis(M.shape[1], Vh[rank:].conj().T)


def subspace_intersection(U, V, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Intersection of two subspaces given by orthonormal bases.

    A vector lies in both subspaces iff it is annihilated by both
    complementary projections, so the intersection is the kernel of the
    stacked matrix [I - P_U; I - P_V].
    """
    BU = U.basis if isinstance(U, SubspaceBasis) else as_matrix(U)
    BV = V.basis if isinstance(V, SubspaceBasis) else as_matrix(V)
    n = BU.shape[0]
    if BV.shape[0] != n:
        raise ValueError("ambient dimensions differ")
    PU = BU @ BU.conj().T
    PV = BV @ BV.conj().T
    eye = np.eye(n, dtype=complex)
    stacked = np.vstack([eye - PU, eye - PV])
    # the stack of two complement projections has unit-scale top singular
    # values whenever the intersection is proper, so the relative cutoff in
    # kernel_basis is the right rank rule here as well
    return kernel_basis(stacked, tol)


def krylov_span(A, B, max_deg: int, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of span{A^n B e_j : n = 0..max_deg, all j}.

    Terminates early once adding another power stops increasing the
    dimension; for a Krylov sequence the dimension is then saturated for
    every higher power as well.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise NonSquare("krylov_span needs a square A")
    if B.shape[0] != n:
        raise ValueError("B has wrong ambient dimension")
    block = B
    collected = B
    current = range_basis(collected, tol)
    for _ in range(max_deg):
        block = A @ block
        collected = np.hstack([collected, block])
        nxt = range_basis(collected, tol)
        if nxt.dim == current.dim:
            return current
        current = nxt
    return current


# ---------------------------------------------------------------------------
# contraction predicates and defect operators
# ---------------------------------------------------------------------------

def is_contraction(A, tol: Tolerances = DEFAULT_TOL) -> bool:
    return operator_norm(A) <= 1.0 + tol.rank_tol


def _require_contraction(A, tol: Tolerances):
    nrm = operator_norm(A)
    if nrm > 1.0 + tol.rank_tol:
        raise NotAContraction(f"operator norm {nrm:.12f} exceeds 1")


def defect_operator(A, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """D_A = (I - A*A)^{1/2} on the domain space of A (size = cols)."""
    A = as_matrix(A)
    _require_contraction(A, tol)
    G = np.eye(A.shape[1], dtype=complex) - A.conj().T @ A
    return psd_sqrt(G, tol)


def defect_basis(A, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the defect space ran D_A."""
    return range_basis(defect_operator(A, tol), tol)


class DefectData(NamedTuple):
    """Defect operators of A and A* with orthonormal range bases.

    For normal A the two defect operators coincide; in that case the very
    same matrix and basis are reused on both sides, so that operators
    between the two defect spaces are expressed in one coherent basis.
    """

    DA: np.ndarray       # (I - A*A)^{1/2} on the domain
    DAs: np.ndarray      # (I - AA*)^{1/2} on the codomain
    E_A: np.ndarray      # columns: orthonormal basis of ran D_A
    E_As: np.ndarray     # columns: orthonormal basis of ran D_{A*}


def defect_data(A, tol: Tolerances = DEFAULT_TOL) -> DefectData:
    A = as_matrix(A)
    DA = defect_operator(A, tol)
    DAs = defect_operator(A.conj().T, tol)
    if DA.shape == DAs.shape and operator_norm(DA - DAs) <= tol.eq_tol:
        DAs = DA
        E = range_basis(DA, tol).basis
        return DefectData(DA, DA, E, E)
    return DefectData(DA, DAs, range_basis(DA, tol).basis, range_basis(DAs, tol).basis)


def is_strict_contraction(A, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff no nonzero vector has its norm preserved by A,
    i.e. ker(I - A*A) = {0} to working precision."""
    A = as_matrix(A)
    _require_contraction(A, tol)
    if A.shape[1] == 0:
        return True
    G = herm_part(np.eye(A.shape[1], dtype=complex) - A.conj().T @ A)
    w = np.linalg.eigvalsh(G)
    w = np.maximum(w, 0.0)
    # sigma_min(D_A) > rank_tol * sigma_max(D_A), stated on the squares
    return bool(w[0] > (tol.rank_tol ** 2) * w[-1] and w[-1] > 0)


def is_selfadjoint(A, tol: Tolerances = DEFAULT_TOL) -> bool:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise NonSquare("selfadjointness needs a square matrix")
    return operator_norm(A - A.conj().T) <= tol.eq_tol * max(operator_norm(A), 1e-300)


def is_normal(A, tol: Tolerances = DEFAULT_TOL) -> bool:
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise NonSquare("normality needs a square matrix")
    comm = A.conj().T @ A - A @ A.conj().T
    return operator_norm(comm) <= tol.eq_tol * max(operator_norm(A) ** 2, 1e-300)


class StrongLimit(NamedTuple):
    value: np.ndarray
    converged: bool
    power: int


def strong_limit_SA(A, max_power: int = 500, tol: Tolerances = DEFAULT_TOL) -> StrongLimit:
    """Limit of A^{*n} A^n, approximated by the first power at which two
    successive iterates agree to eq_tol.  Non-convergence within
    max_power is reported through the flag, not an error."""
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise NonSquare("strong_limit_SA needs a square matrix")
    _require_contraction(A, tol)
    P = np.eye(A.shape[0], dtype=complex)
    for n in range(1, max_power + 1):
        P_next = A.conj().T @ P @ A
        if operator_norm(P_next - P) <= tol.eq_tol:
            return StrongLimit(P_next, True, n)
        P = P_next
    return StrongLimit(P, False, max_power)


def cnu_unitary_split(A, tol: Tolerances = DEFAULT_TOL) -> tuple[SubspaceBasis, SubspaceBasis]:
    """Split C^n into the largest subspace on which A acts unitarily and
    its orthogonal complement.

    The unitary part consists of the vectors with ||A^n f|| = ||A^{*n} f||
    = ||f|| for n up to the dimension; at finite dimension the kernel
    chain of the power defects stabilizes within dim steps.  Returns
    (unitary_part, cnu_part).
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise NonSquare("cnu_unitary_split needs a square matrix")
    _require_contraction(A, tol)
    n = A.shape[0]
    if n == 0:
        return SubspaceBasis.zero(0), SubspaceBasis.zero(0)
    eye = np.eye(n, dtype=complex)
    current = SubspaceBasis.full(n)
    An = eye
    for _ in range(n):
        An = An @ A
        for G in (eye - An.conj().T @ An, eye - An @ An.conj().T):
            ker = kernel_basis(herm_part(G), tol)
            current = subspace_intersection(current, ker, tol)
        if current.dim == 0:
            break
    return current, current.complement()
