"""Report types shared by the Airy and Schrodinger extension modules, plus the
frame-independent analysis of a domain's boundary trace space."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .krein import form_complement, null_basis, restricted_max_eig


class Verdict(str, enum.Enum):
    SKEW_SELF_ADJOINT = "skew_self_adjoint"
    SELF_ADJOINT = "self_adjoint"
    CONTRACTION_GENERATOR = "contraction_generator"
    NEITHER = "neither"


@dataclass
class ClassificationReport:
    operator: str
    frame: str
    verdict: Verdict
    residual: float
    certificates: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "frame": self.frame,
            "label": self.label,
            "verdict": self.verdict.value,
            "residual": float(self.residual),
            "certificates": {k: _plain(v) for k, v in sorted(self.certificates.items())},
            "tolerances": dict(self.tolerances),
        }


@dataclass
class Membership:
    member: bool
    residual: float

    def __bool__(self):
        return bool(self.member)


@dataclass
class DeficiencyReport:
    operator: str
    d_minus: int
    d_plus: int
    edges: list = field(default_factory=list)

    @property
    def indices(self) -> tuple[int, int]:
        return self.d_minus, self.d_plus

    def to_dict(self) -> dict:
        return {"operator": self.operator, "d_minus": self.d_minus,
                "d_plus": self.d_plus, "edges": [_plain(e) for e in self.edges]}


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def trace_space_analysis(C: np.ndarray, G: np.ndarray, energy_sign: float | None = None,
                         tol: float = 1e-10) -> dict:
    """Domain trace space X = ker C against the boundary form G.

    Returns the dimension of X, the dimension a maximal isotropic space would
    have, the isotropy residual and whether X equals its G-complement.  With
    ``energy_sign`` s (d/dt ||u||^2 = s [U, U]_G along the flow) it also
    returns the largest growth rates on X and on the complement, which is the
    Lumer-Phillips test for the operator and for its adjoint."""
    n = G.shape[0]
    X = null_basis(C, n=n)
    comp = form_complement(X, G)
    scale = np.linalg.norm(G, 2)
    iso = float(np.abs(X.conj().T @ G @ X).max(initial=0.0) / scale)
    out = {
        "trace_dim": int(X.shape[1]),
        "required_dim": n // 2,
        "complement_dim": int(comp.shape[1]),
        "isotropy_residual": iso,
        "maximal": bool(iso <= tol and X.shape[1] == comp.shape[1]),
    }
    if energy_sign is not None:
        E = energy_sign * (G + G.conj().T) / 2
        grow = restricted_max_eig(E, X) / scale
        agrow = restricted_max_eig(-E, comp) / scale
        out["growth_rate_max"] = grow
        out["adjoint_growth_rate_max"] = agrow
        # maximal dissipative subspaces have this dimension for nondegenerate G
        out["max_dissipative_dim"] = int((np.linalg.eigvalsh(E) < 0).sum())
        out["lumer_phillips"] = bool(grow <= tol and agrow <= tol)
    return out, X, comp
