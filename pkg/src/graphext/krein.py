"""Finite-dimensional indefinite inner product spaces.

A form is a nondegenerate Hermitian matrix H with [x, y] = y^* H x.  An
operator L between two such spaces has Krein adjoint L# = H_dom^{-1} L^* H_cod.
The same module hosts the subspace utilities used to analyse boundary trace
spaces (null spaces, form complements, restricted eigenvalues).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg


class KreinError(ValueError):
    """Malformed form or operator."""


HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class IndefiniteForm:
    H: np.ndarray

    def __post_init__(self):
        H = np.array(self.H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
            raise KreinError(f"form matrix must be square, got shape {H.shape}")
        scale = max(1.0, np.linalg.norm(H, 2))
        if np.abs(H - H.conj().T).max() > HERMITIAN_TOL * scale:
            raise KreinError("form matrix is not Hermitian")
        sv = np.linalg.svd(H, compute_uv=False)
        if sv[-1] <= DEGENERACY_TOL * sv[0]:
            raise KreinError("degenerate form: matrix is singular")
        H = (H + H.conj().T) / 2
        H.flags.writeable = False
        object.__setattr__(self, "H", H)

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def inner(self, x, y) -> complex:
        return np.vdot(y, self.H @ x)

    def inertia(self) -> tuple[int, int]:
        w = np.linalg.eigvalsh(self.H)
        return int((w > 0).sum()), int((w < 0).sum())

    def __neg__(self) -> "IndefiniteForm":
        return IndefiniteForm(-self.H)


@dataclass(frozen=True, eq=False)
class FramedOperator:
    """Matrix L mapping (C^n, domain_form) into (C^m, codomain_form)."""

    L: np.ndarray
    domain_form: IndefiniteForm
    codomain_form: IndefiniteForm

    def __post_init__(self):
        L = np.array(self.L, dtype=complex)
        if L.ndim != 2 or L.shape != (self.codomain_form.dim, self.domain_form.dim):
            raise KreinError(
                f"operator shape {L.shape} does not match forms "
                f"({self.codomain_form.dim}, {self.domain_form.dim})")
        L.flags.writeable = False
        object.__setattr__(self, "L", L)


@dataclass(frozen=True)
class KreinTest:
    """Outcome of a Krein test: ``value`` is a residual for unitarity and the
    largest eigenvalue of the defect form for contractions."""

    holds: bool
    value: float

    def __bool__(self):
        return self.holds


def krein_adjoint(op: FramedOperator) -> FramedOperator:
    Ls = np.linalg.solve(op.domain_form.H, op.L.conj().T @ op.codomain_form.H)
    return FramedOperator(Ls, op.codomain_form, op.domain_form)


def is_krein_unitary(op: FramedOperator, tol: float = 1e-10) -> KreinTest:
    """L^* H_cod L = H_dom with L invertible.  The residual is relative in the
    Frobenius norm."""
    L = op.L
    if L.shape[0] != L.shape[1]:
        raise KreinError("a Krein unitary must be square")
    Hd = op.domain_form.H
    res = np.linalg.norm(L.conj().T @ op.codomain_form.H @ L - Hd) / np.linalg.norm(Hd)
    invertible = np.linalg.matrix_rank(L) == L.shape[0]
    return KreinTest(bool(invertible and res <= tol), float(res))


def defect_form(op: FramedOperator) -> np.ndarray:
    """[Lx, Lx]_cod - [x, x]_dom as a Hermitian matrix."""
    D = op.L.conj().T @ op.codomain_form.H @ op.L - op.domain_form.H
    return (D + D.conj().T) / 2


def is_krein_contraction(op: FramedOperator, tol: float = 1e-10,
                         subspace: np.ndarray | None = None) -> KreinTest:
    """[Lx, Lx] <= [x, x] for all x, or for x in the span of ``subspace``.
    The tolerance is scaled by 1 + ||H_dom||."""
    D = defect_form(op)
    lam = restricted_max_eig(D, subspace)
    thresh = tol * (1 + np.linalg.norm(op.domain_form.H, 2))
    return KreinTest(bool(lam <= thresh), float(lam))


def restricted_max_eig(D: np.ndarray, subspace: np.ndarray | None = None) -> float:
    """Largest eigenvalue of the Hermitian form D on a subspace (whole space if
    None, -inf on the zero subspace)."""
    if subspace is not None:
        S = orth(subspace)
        if S.shape[1] == 0:
            return float("-inf")
        D = S.conj().T @ D @ S
    D = (D + D.conj().T) / 2
    return float(np.linalg.eigvalsh(D)[-1])


def restricted_min_eig(D: np.ndarray, subspace: np.ndarray | None = None) -> float:
    return -restricted_max_eig(-D, subspace)


# -- subspaces --------------------------------------------------------------

def orth(A: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    return linalg.orth(A, rcond=rtol)


def null_basis(C: np.ndarray, n: int | None = None, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of {x : C x = 0}."""
    C = np.asarray(C, dtype=complex)
    if C.shape[0] == 0:
        return np.eye(n if n is not None else C.shape[1], dtype=complex)
    return linalg.null_space(C, rcond=rtol)


def row_basis(C: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal rows spanning the row space of C."""
    C = np.asarray(C, dtype=complex)
    if C.shape[0] == 0:
        return C
    return orth(C.conj().T, rtol).conj().T


def form_complement(X: np.ndarray, G: np.ndarray) -> np.ndarray:
    """{v : v^* G x = 0 for all x in span X}, the G-orthogonal complement."""
    return null_basis(X.conj().T @ G.conj().T, n=G.shape[0])


def graph_basis(L: np.ndarray) -> np.ndarray:
    L = np.asarray(L, dtype=complex)
    return np.vstack([np.eye(L.shape[1]), L])


def is_w_self_orthogonal(X: np.ndarray, H_plus, H_minus, tol: float = 1e-10) -> bool:
    """Whether span X equals its own complement for
    w((x,y),(u,v)) = [x,u]_+ - [y,v]_-."""
    Hp = getattr(H_plus, "H", H_plus)
    Hm = getattr(H_minus, "H", H_minus)
    W = linalg.block_diag(Hp, -Hm)
    X = orth(X)
    if X.shape[0] != W.shape[0]:
        raise KreinError("subspace dimension does not match the forms")
    scale = np.linalg.norm(W, 2)
    isotropic = np.abs(X.conj().T @ W @ X).max(initial=0.0) <= tol * scale
    comp = form_complement(X, W)
    return bool(isotropic and comp.shape[1] == X.shape[1])


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Spectral norm distance between the orthogonal projectors."""
    Pa = orth(A)
    Pb = orth(B)
    return float(np.linalg.norm(Pa @ Pa.conj().T - Pb @ Pb.conj().T, 2))
