"""Self-adjoint extensions of H0 = -d^2/dx^2 on looping-edge and T-shaped
graphs.

Traces are (f, f') per point in canonical order.  Integration by parts gives

    [H0* U, V] - [U, H0* V] = (G U | V),   G = diag(P0, -P0, P0, ..., P0),

with P0 = [[0, 1], [-1, 0]].  In the replicated frame the input is
(dphi(-L), dpsi_j) with form P+ = diag(P0, ..., P0) and the output is the
(N+1)-fold copy of dphi(v) with form P- = P+ / (N+1).  These forms are
skew-Hermitian; i P+- are the Hermitian forms handed to the Krein routines,
which leaves orthogonality and adjoints unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .graph import MetricGraphSpec, OperatorOrder, Topology, TraceVector
from .krein import FramedOperator, IndefiniteForm, is_krein_unitary, null_basis, orth
from .verdicts import ClassificationReport, DeficiencyReport, Membership, Verdict, trace_space_analysis

ORDER = OperatorOrder.SCHRODINGER2
P0 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def schrodinger_gram(graph: MetricGraphSpec) -> np.ndarray:
    blocks = [P0, -P0] + [P0] * graph.N
    return linalg.block_diag(*blocks)


def q_matrix(graph: MetricGraphSpec) -> np.ndarray:
    """Sign matrix turning derivatives into inward derivatives."""
    return np.diag(graph.point_signs())


def _as_trace(U) -> np.ndarray:
    return U.values if isinstance(U, TraceVector) else np.asarray(U, dtype=complex)


def boundary_form_schrodinger(U, V, graph: MetricGraphSpec, crosscheck: bool = False) -> complex:
    """(G U | V); with ``crosscheck`` also through (Q U'|V) - (Q U|V')."""
    u, v = _as_trace(U), _as_trace(V)
    val = np.vdot(v, schrodinger_gram(graph) @ u)
    if crosscheck:
        alt = boundary_form_q(u, v, graph)
        scale = 1 + np.abs(u).max() * np.abs(v).max()
        if abs(alt - val) > 1e-12 * scale:
            raise AssertionError(f"boundary form identities disagree: {val} vs {alt}")
    return complex(val)


def boundary_form_q(U, V, graph: MetricGraphSpec) -> complex:
    u = _as_trace(U).reshape(-1, 2)
    v = _as_trace(V).reshape(-1, 2)
    Q = q_matrix(graph)
    return complex(np.vdot(v[:, 0], Q @ u[:, 1]) - np.vdot(v[:, 1], Q @ u[:, 0]))


def _selector(graph: MetricGraphSpec, points, comps=(0, 1)) -> np.ndarray:
    n = 2 * graph.n_points
    rows = []
    for p in points:
        for k in comps:
            r = np.zeros(n)
            r[2 * p + k] = 1.0
            rows.append(r)
    return np.array(rows).reshape(-1, n)


@dataclass(frozen=True, eq=False)
class SchrodingerFrame:
    graph: MetricGraphSpec
    P_plus: np.ndarray
    P_minus: np.ndarray
    Q: np.ndarray
    input_selector: np.ndarray
    output_selector: np.ndarray

    @property
    def plus_form(self) -> IndefiniteForm:
        return IndefiniteForm(1j * self.P_plus)

    @property
    def minus_form(self) -> IndefiniteForm:
        return IndefiniteForm(1j * self.P_minus)


def build_schrodinger_frame(graph: MetricGraphSpec) -> SchrodingerFrame:
    N = graph.N
    Pp = linalg.block_diag(*[P0] * (N + 1))
    sel_in = _selector(graph, [0] + list(range(2, N + 2)))
    sel_out = np.vstack([_selector(graph, [1])] * (N + 1))
    return SchrodingerFrame(graph, Pp, Pp / (N + 1), q_matrix(graph), sel_in, sel_out)


@dataclass(frozen=True, eq=False)
class SchrodingerMatrixCoupling:
    """Domain {U : L (dphi(-L), dpsi_j) = replicated dphi(v)}."""

    frame: SchrodingerFrame
    L: np.ndarray
    label: str = ""
    tags: frozenset = frozenset()

    def __post_init__(self):
        L = np.array(self.L, dtype=complex)
        n = 2 * (self.frame.graph.N + 1)
        if L.shape != (n, n):
            raise ValueError(f"coupling matrix has shape {L.shape}, expected {(n, n)}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def graph(self):
        return self.frame.graph


@dataclass(frozen=True, eq=False)
class SubspaceCoupling:
    """Domain {U : values in Y, inward derivatives Q U' in Y-perp}."""

    frame: SchrodingerFrame
    Y: np.ndarray
    label: str = ""
    tags: frozenset = frozenset()

    def __post_init__(self):
        n = self.frame.graph.n_points
        Y = np.array(self.Y, dtype=complex)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.shape[0] != n:
            raise ValueError(f"Y must consist of vectors of length {n}")
        object.__setattr__(self, "Y", orth(Y))
        object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def graph(self):
        return self.frame.graph


@dataclass(frozen=True, eq=False)
class ConstraintCoupling:
    """Domain given directly by linear conditions C U = 0 on the trace."""

    frame: SchrodingerFrame
    C: np.ndarray
    label: str = ""
    tags: frozenset = frozenset()

    def __post_init__(self):
        C = np.atleast_2d(np.array(self.C, dtype=complex))
        if C.shape[1] != 2 * self.frame.graph.n_points:
            raise ValueError("constraint rows do not match the trace length")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def graph(self):
        return self.frame.graph


def constraint_matrix(spec) -> np.ndarray:
    fr = spec.frame
    if isinstance(spec, SchrodingerMatrixCoupling):
        return spec.L @ fr.input_selector - fr.output_selector
    if isinstance(spec, ConstraintCoupling):
        return spec.C
    g = fr.graph
    n = g.n_points
    vals = _selector(g, range(n), comps=(0,))
    ders = _selector(g, range(n), comps=(1,))
    Yperp = null_basis(spec.Y.conj().T, n=n)
    return np.vstack([Yperp.conj().T @ vals, spec.Y.conj().T @ fr.Q @ ders])


def domain_basis(spec) -> np.ndarray:
    return null_basis(constraint_matrix(spec), n=2 * spec.graph.n_points)


def domain_membership_schrodinger(spec, U, tol: float = 1e-9) -> Membership:
    u = _as_trace(U)
    res = float(np.abs(constraint_matrix(spec) @ u).max())
    return Membership(res <= tol * (1 + np.abs(u).max()), res)


def classify_schrodinger(spec, tol_unitary: float = 1e-10, tol_psd: float = 1e-10) -> ClassificationReport:
    """Matrix couplings: self-adjoint iff L is (J+, J-)-unitary.  Subspace
    couplings are always self-adjoint.  Constraint couplings: self-adjoint
    iff the trace space is Lagrangian.  The Lagrangian test is reported as a
    certificate for every kind."""
    fr = spec.frame
    G = 1j * schrodinger_gram(fr.graph)
    ts, _, _ = trace_space_analysis(constraint_matrix(spec), G, tol=tol_unitary)
    ts["required_dim"] = fr.graph.n_points
    certs = dict(ts)
    tols = {"unitary": tol_unitary, "psd": tol_psd}
    if isinstance(spec, SchrodingerMatrixCoupling):
        op = FramedOperator(spec.L, fr.plus_form, fr.minus_form)
        u = is_krein_unitary(op, tol_unitary)
        gram = spec.L.conj().T @ fr.P_minus @ spec.L - fr.P_plus
        certs["unitary_residual"] = u.value
        certs["gram_residual"] = float(np.abs(gram).max())
        verdict = Verdict.SELF_ADJOINT if u else Verdict.NEITHER
        return ClassificationReport("schrodinger", "replicated", verdict, u.value, certs, tols, spec.label)
    frame = "subspace" if isinstance(spec, SubspaceCoupling) else "constraints"
    if isinstance(spec, SubspaceCoupling):
        verdict = Verdict.SELF_ADJOINT
    else:
        verdict = Verdict.SELF_ADJOINT if ts["maximal"] else Verdict.NEITHER
    return ClassificationReport("schrodinger", frame, verdict, ts["isotropy_residual"], certs, tols, spec.label)


def schrodinger_deficiency(graph: MetricGraphSpec) -> DeficiencyReport:
    """Solutions of -u'' = +-i u are e^{rx} with r^2 = -+i.  Both exponentials
    are square integrable on the finite edge; on a half-line only the one
    with Re r < 0."""
    edges = []
    r_minus = np.sqrt(-1j + 0j) * np.array([1, -1])   # r^2 = -i
    r_plus = np.sqrt(1j + 0j) * np.array([1, -1])     # r^2 = +i
    edges.append({"edge": 0, "kind": "finite", "d_minus": 2, "d_plus": 2,
                  "exponents_minus": [complex(r) for r in r_minus],
                  "exponents_plus": [complex(r) for r in r_plus]})
    for j in range(1, graph.N + 1):
        edges.append({"edge": j, "kind": "half_line",
                      "d_minus": int((r_minus.real < 0).sum()), "d_plus": int((r_plus.real < 0).sum()),
                      "exponents_minus": [complex(r) for r in r_minus if r.real < 0],
                      "exponents_plus": [complex(r) for r in r_plus if r.real < 0]})
    dm = sum(e["d_minus"] for e in edges)
    dp = sum(e["d_plus"] for e in edges)
    return DeficiencyReport("schrodinger", dm, dp, edges)


# -- catalogued families -------------------------------------------------------

def _sym(m, n: int) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (n, n) or not np.allclose(m, m.T):
        raise ValueError(f"expected a symmetric {n}x{n} parameter matrix")
    return m


def l_n_matrix(m) -> np.ndarray:
    """Block matrix with A_ii = [[1, 0], [m_ii, N+1]] and A_ij = [[0, 0], [m_ij, 0]]."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    m = _sym(m, n)
    L = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            L[2 * i + 1, 2 * j] = m[i, j]
        L[2 * i, 2 * i] = 1.0
        L[2 * i + 1, 2 * i + 1] = n
    return L


def tshape_matrix(m) -> np.ndarray:
    """Block matrix with A_ii = [[N+1, m_ii], [0, 1]] and A_ij = [[0, m_ij], [0, 0]]:
    the value/derivative mirror of l_n_matrix."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    m = _sym(m, n)
    L = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            L[2 * i, 2 * j + 1] = m[i, j]
        L[2 * i, 2 * i] = n
        L[2 * i + 1, 2 * i + 1] = 1.0
    return L


def sym_from_upper(vals, n: int) -> np.ndarray:
    """Symmetric matrix from its upper triangle listed row by row."""
    m = np.zeros((n, n))
    m[np.triu_indices(n)] = vals
    return m + np.triu(m, 1).T


def aggregate_z(m) -> float:
    m = np.asarray(m, dtype=float)
    return float(m.sum() / m.shape[0])


def delta_prime_matrix(m1, m2, m3, m4) -> np.ndarray:
    if m1 == 0:
        raise ValueError("m1 must be nonzero")
    return np.array([
        [m1, m2, 0, 0],
        [0, 2 / m1, 0, m3],
        [-m1 * m3, -m2 * m3, 2, m4],
        [0, 0, 0, 1],
    ], dtype=float)


def matrix_coupling(graph: MetricGraphSpec, L, label: str = "") -> SchrodingerMatrixCoupling:
    return SchrodingerMatrixCoupling(build_schrodinger_frame(graph), L, label=label)


def subspace_coupling(graph: MetricGraphSpec, Y, label: str = "") -> SubspaceCoupling:
    return SubspaceCoupling(build_schrodinger_frame(graph), Y, label=label)


def dzn_constraints(graph: MetricGraphSpec, Z: float) -> np.ndarray:
    """Continuity of all values at the vertex and
    phi'(v) - phi'(-L) = sum psi_j' + Z psi_1."""
    n = graph.n_points
    rows = []
    for p in range(1, n):
        r = np.zeros(2 * n)
        r[0] = 1.0
        r[2 * p] = -1.0
        rows.append(r)
    r = np.zeros(2 * n)
    r[3] = 1.0
    r[1] = -1.0
    for p in range(2, n):
        r[2 * p + 1] = -1.0
    r[4] = -Z
    rows.append(r)
    return np.array(rows)


def dzn_coupling(graph: MetricGraphSpec, Z: float) -> ConstraintCoupling:
    return ConstraintCoupling(build_schrodinger_frame(graph), dzn_constraints(graph, Z),
                              label=f"D_Z(Z={Z}, N={graph.N})")


@dataclass
class DznComparison:
    Z: float
    rank_coupling: int
    rank_dzn: int
    rank_joint: int

    @property
    def implies(self) -> bool:
        """Every trace of the coupling satisfies the D_{Z,N} conditions."""
        return self.rank_joint == self.rank_coupling

    @property
    def equivalent(self) -> bool:
        return self.rank_coupling == self.rank_dzn == self.rank_joint


def dzn_equivalence(N: int, m, L: float = 1.0) -> DznComparison:
    """Compare the constraint set of the L_N coupling with the D_{Z,N} one for
    Z = sum(m) / (N+1) by ranks."""
    g = MetricGraphSpec.looping_edge(N, L)
    Z = aggregate_z(m)
    C1 = constraint_matrix(matrix_coupling(g, l_n_matrix(m)))
    C2 = dzn_constraints(g, Z)
    rk = lambda A: int(np.linalg.matrix_rank(A, tol=1e-10 * max(1, np.abs(A).max())))
    return DznComparison(Z, rk(C1), rk(C2), rk(np.vstack([C1, C2])))


def continuity_subspace(graph: MetricGraphSpec) -> np.ndarray:
    return dzn_constraints(graph, 0.0)[:-1]


def continuity_family_check(spec) -> dict:
    """For a coupling whose traces are continuous at the vertex, test whether
    its trace space is exactly some D_{Z,N}.  Z is fitted from one trace."""
    g = spec.graph
    C = constraint_matrix(spec)
    X = null_basis(C, n=2 * g.n_points)
    cont = continuity_subspace(g)
    enforces = bool(np.abs(cont @ X).max(initial=0.0) < 1e-10)
    out = {"enforces_continuity": enforces, "equals_dzn": False, "Z": None}
    if not enforces or X.shape[1] == 0:
        return out
    # flux mismatch phi'(v) - phi'(-L) - sum psi' against the common value
    flux = dzn_constraints(g, 0.0)[-1] @ X
    vals = X[0]
    if np.abs(vals).max() < 1e-12:
        return out
    k = int(np.argmax(np.abs(vals)))
    Z = (flux[k] / vals[k]).real
    Xd = null_basis(dzn_constraints(g, Z), n=2 * g.n_points)
    contained = np.abs(dzn_constraints(g, Z) @ X).max() < 1e-9
    out["Z"] = float(Z)
    out["contained_in_dzn"] = bool(contained)
    out["trace_dim"] = int(X.shape[1])
    out["dzn_dim"] = int(Xd.shape[1])
    out["equals_dzn"] = bool(contained and X.shape[1] == Xd.shape[1])
    return out


def example_factories() -> dict:
    """Named constructors for the catalogued Schrodinger couplings."""
    return {
        "l_n": lambda m, L=1.0: matrix_coupling(
            MetricGraphSpec.looping_edge(np.asarray(m).shape[0] - 1, L), l_n_matrix(m),
            label=f"L_N(N={np.asarray(m).shape[0] - 1})"),
        "delta_prime": lambda m1, m2, m3, m4, L=1.0: matrix_coupling(
            MetricGraphSpec.tadpole(L), delta_prime_matrix(m1, m2, m3, m4),
            label=f"delta_prime(m={(m1, m2, m3, m4)})"),
        "delta_prime_t": lambda m4, L=1.0: matrix_coupling(
            MetricGraphSpec.t_shaped(1, L), delta_prime_matrix(1, 0, 1, m4),
            label=f"delta_prime_t(m4={m4})"),
        "tshape": lambda m, L=1.0: matrix_coupling(
            MetricGraphSpec.t_shaped(np.asarray(m).shape[0] - 1, L), tshape_matrix(m),
            label=f"tshape(N={np.asarray(m).shape[0] - 1})"),
        "subspace": lambda Y, N=1, L=1.0: subspace_coupling(
            MetricGraphSpec.looping_edge(N, L) if N > 1 else MetricGraphSpec.tadpole(L), Y,
            label=f"H_Y(Y={np.asarray(Y).tolist()})"),
        "dzn": lambda Z, N=1, L=1.0: dzn_coupling(
            MetricGraphSpec.looping_edge(N, L) if N > 1 else MetricGraphSpec.tadpole(L), Z),
    }
