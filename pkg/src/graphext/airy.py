"""Extensions of the Airy operator A0 = alpha d^3/dx^3 + beta d/dx on a
looping-edge graph.

Boundary traces are ordered (f, f', f'') per point.  With
B(alpha, beta) = [[beta, 0, alpha], [0, -alpha, 0], [alpha, 0, 0]] the
integration by parts identity reads

    [A0* U, V] + [U, A0* V] = (G U | V),   G = diag(B_0, -B_0, B_1, ..., B_N),

where (x | y) = sum x_i conj(y_i) and A0* = -A0.  Extensions are specified
through one of three reference frames that split the trace into an input and
an output part, each carrying an indefinite form.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .graph import GraphError, MetricGraphSpec, OperatorOrder, Topology, TraceVector
from .krein import (FramedOperator, IndefiniteForm, is_krein_contraction, is_krein_unitary,
                    krein_adjoint, null_basis, orth, restricted_max_eig)
from .verdicts import ClassificationReport, DeficiencyReport, Membership, Verdict, trace_space_analysis

ORDER = OperatorOrder.AIRY3


class FrameError(ValueError):
    """The requested frame does not apply to the graph."""


class FrameKind(str, enum.Enum):
    EVEN_PAIRED = "even_paired"
    REPLICATED = "replicated"
    DERIVATIVE_SPLIT = "derivative_split"


def airy_block(alpha: float, beta: float) -> np.ndarray:
    return np.array([[beta, 0.0, alpha], [0.0, -alpha, 0.0], [alpha, 0.0, 0.0]])


def airy_gram(graph: MetricGraphSpec) -> np.ndarray:
    """Matrix G of the boundary form in canonical trace order."""
    graph.require_airy()
    a, b = graph.alphas, graph.betas
    blocks = [airy_block(a[0], b[0]), -airy_block(a[0], b[0])]
    blocks += [airy_block(a[j], b[j]) for j in range(1, graph.N + 1)]
    return linalg.block_diag(*blocks)


def split_diagonals(graph: MetricGraphSpec) -> tuple[np.ndarray, np.ndarray]:
    """D_alpha, D_beta: per-point coefficients with the loop's right end
    carrying the opposite sign."""
    s = graph.point_signs()
    idx = graph.point_edges()
    return np.diag(s * graph.alphas[idx]), np.diag(s * graph.betas[idx])


def _as_trace(U) -> np.ndarray:
    return U.values if isinstance(U, TraceVector) else np.asarray(U, dtype=complex)


def boundary_form_airy(U, V, graph: MetricGraphSpec, crosscheck: bool = False) -> complex:
    """(G U | V).  With ``crosscheck`` the value is recomputed through the
    derivative-split identity and a mismatch raises."""
    u, v = _as_trace(U), _as_trace(V)
    val = np.vdot(v, airy_gram(graph) @ u)
    if crosscheck:
        alt = boundary_form_split(u, v, graph)
        scale = 1 + np.abs(u).max() * np.abs(v).max() * np.abs(airy_gram(graph)).max()
        if abs(alt - val) > 1e-12 * scale:
            raise AssertionError(f"boundary form identities disagree: {val} vs {alt}")
    return complex(val)


def boundary_form_split(U, V, graph: MetricGraphSpec) -> complex:
    """(D_b U|V) + (D_a U''|V) + (D_a U|V'') - (D_a U'|V')."""
    u = _as_trace(U).reshape(-1, 3)
    v = _as_trace(V).reshape(-1, 3)
    Da, Db = split_diagonals(graph)
    ip = lambda x, y: np.vdot(y, x)
    return complex(ip(Db @ u[:, 0], v[:, 0]) + ip(Da @ u[:, 2], v[:, 0])
                   + ip(Da @ u[:, 0], v[:, 2]) - ip(Da @ u[:, 1], v[:, 1]))


# -- frames ----------------------------------------------------------------

def _block_selector(graph: MetricGraphSpec, points, comps=(0, 1, 2)) -> np.ndarray:
    n = 3 * graph.n_points
    rows = []
    for p in points:
        for k in comps:
            r = np.zeros(n)
            r[3 * p + k] = 1.0
            rows.append(r)
    return np.array(rows)


@dataclass(frozen=True, eq=False)
class AiryFrame:
    """Input/output split of the trace with the forms on each side.  The
    selectors are matrices acting on the canonical trace."""

    kind: FrameKind
    graph: MetricGraphSpec
    plus_form: IndefiniteForm
    minus_form: IndefiniteForm
    input_selector: np.ndarray
    output_selector: np.ndarray

    @property
    def n_in(self) -> int:
        return self.input_selector.shape[0]

    @property
    def n_out(self) -> int:
        return self.output_selector.shape[0]

    def replication(self) -> np.ndarray | None:
        """Basis of the replicated output subspace, or None if the output is
        a free vector."""
        if self.kind is FrameKind.EVEN_PAIRED:
            return None
        b = self.n_out // (self.graph.N + 1)
        return np.vstack([np.eye(b)] * (self.graph.N + 1))


def even_paired_applicable(graph: MetricGraphSpec) -> tuple[bool, str]:
    N = graph.N
    if N % 2:
        return False, "the even-paired frame needs an even number of half-lines"
    a = graph.alphas
    odd_pos = sum(a[j] > 0 for j in range(1, N + 1, 2))
    even_neg = sum(a[j] < 0 for j in range(2, N + 1, 2))
    if odd_pos != even_neg:
        return False, ("the even-paired forms have different inertia: the number of odd "
                       "half-lines with alpha > 0 must equal the even ones with alpha < 0")
    return True, ""


def build_frame(graph: MetricGraphSpec, kind) -> AiryFrame:
    kind = FrameKind(kind)
    graph.require_airy()
    a, b = graph.alphas, graph.betas
    N = graph.N
    B = [airy_block(a[j], b[j]) for j in range(N + 1)]
    if kind is FrameKind.EVEN_PAIRED:
        ok, why = even_paired_applicable(graph)
        if not ok:
            raise FrameError(f"frame inapplicable: {why}")
        odd = list(range(1, N + 1, 2))
        even = list(range(2, N + 1, 2))
        Bp = linalg.block_diag(B[0], *[B[j] for j in odd])
        Bm = linalg.block_diag(B[0], *[-B[j] for j in even])
        sel_in = _block_selector(graph, [0] + [j + 1 for j in odd])
        sel_out = _block_selector(graph, [1] + [j + 1 for j in even])
    elif kind is FrameKind.REPLICATED:
        Bp = linalg.block_diag(*B)
        Bm = linalg.block_diag(*[B[0]] * (N + 1)) / (N + 1)
        sel_in = _block_selector(graph, [0] + list(range(2, N + 2)))
        sel_out = np.vstack([_block_selector(graph, [1])] * (N + 1))
    else:
        Bp = np.diag(a)
        Bm = a[0] * np.eye(N + 1) / (N + 1)
        sel_in = _block_selector(graph, [0] + list(range(2, N + 2)), comps=(1,))
        sel_out = np.vstack([_block_selector(graph, [1], comps=(1,))] * (N + 1))
    return AiryFrame(kind, graph, IndefiniteForm(Bp), IndefiniteForm(Bm), sel_in, sel_out)


# -- extension specifications ----------------------------------------------

@dataclass(frozen=True, eq=False)
class MatrixCoupling:
    """Domain {U : L (input of U) = output of U} in an even-paired or
    replicated frame.

    ``generator_sign`` s fixes the dynamics u_t = s A0 u: the even-paired
    extensions restrict A0* (s = -1), the replicated ones act as -A0* (s = +1).
    """

    frame: AiryFrame
    L: np.ndarray
    label: str = ""
    tags: frozenset = frozenset()
    generator_sign: int = None

    def __post_init__(self):
        if self.frame.kind is FrameKind.DERIVATIVE_SPLIT:
            raise FrameError("frame inapplicable: use MixedCoupling for the derivative-split frame")
        L = np.array(self.L, dtype=complex)
        if L.shape != (self.frame.n_out, self.frame.n_in):
            raise FrameError(f"coupling matrix has shape {L.shape}, "
                             f"expected {(self.frame.n_out, self.frame.n_in)}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "tags", frozenset(self.tags))
        if self.generator_sign is None:
            s = -1 if self.frame.kind is FrameKind.EVEN_PAIRED else 1
            object.__setattr__(self, "generator_sign", s)

    @property
    def graph(self) -> MetricGraphSpec:
        return self.frame.graph

    def framed_operator(self) -> FramedOperator:
        return FramedOperator(self.L, self.frame.plus_form, self.frame.minus_form)


@dataclass(frozen=True, eq=False)
class MixedCoupling:
    """Derivative-split extension: values in Y, D_a U'' + D_b U / 2 in the
    orthogonal complement of Y, and L (phi'(-L), psi_j') = replicated phi'(L).
    Acts as -A0* (u_t = A0 u)."""

    frame: AiryFrame
    Y: np.ndarray
    L: np.ndarray
    label: str = ""
    tags: frozenset = frozenset()
    generator_sign: int = 1

    def __post_init__(self):
        if self.frame.kind is not FrameKind.DERIVATIVE_SPLIT:
            raise FrameError("frame inapplicable: mixed couplings live in the derivative-split frame")
        n = self.frame.graph.n_points
        Y = np.array(self.Y, dtype=complex)
        if Y.ndim == 1:
            Y = Y[:, None]
        if Y.shape[0] != n:
            raise FrameError(f"Y must consist of vectors of length {n}")
        L = np.array(self.L, dtype=complex)
        if L.shape != (self.frame.n_out, self.frame.n_in):
            raise FrameError(f"coupling matrix has shape {L.shape}, expected {(n - 1, n - 1)}")
        object.__setattr__(self, "Y", orth(Y))
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def graph(self) -> MetricGraphSpec:
        return self.frame.graph

    def framed_operator(self) -> FramedOperator:
        return FramedOperator(self.L, self.frame.plus_form, self.frame.minus_form)


def constraint_matrix(spec) -> np.ndarray:
    """Rows c with c . U = 0 exactly on the domain traces."""
    fr = spec.frame
    if isinstance(spec, MatrixCoupling):
        return spec.L @ fr.input_selector - fr.output_selector
    g = fr.graph
    n = g.n_points
    Da, Db = split_diagonals(g)
    sel = [_block_selector(g, range(n), comps=(k,)) for k in range(3)]
    Yperp = null_basis(spec.Y.conj().T, n=n)
    rows = [Yperp.conj().T @ sel[0],
            spec.Y.conj().T @ (Da @ sel[2] + 0.5 * Db @ sel[0]),
            spec.L @ fr.input_selector - fr.output_selector]
    return np.vstack(rows)


def domain_membership_airy(spec, U, tol: float = 1e-9) -> Membership:
    u = _as_trace(U)
    res = float(np.abs(constraint_matrix(spec) @ u).max())
    return Membership(res <= tol * (1 + np.abs(u).max()), res)


def domain_basis(spec) -> np.ndarray:
    """Orthonormal basis of the domain trace space."""
    return null_basis(constraint_matrix(spec), n=3 * spec.graph.n_points)


# -- classification ----------------------------------------------------------

def _replicated_inputs(L: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Inputs whose image is replicated: {x : L x in span R}."""
    P = np.eye(L.shape[0]) - R @ np.linalg.pinv(R)
    return null_basis(P @ L, n=L.shape[1])


def classify_airy(spec, tol_unitary: float = 1e-10, tol_psd: float = 1e-10) -> ClassificationReport:
    """Frame-based verdict plus certificates.

    * even-paired: skew-self-adjoint iff L is Krein unitary;
    * replicated: contraction generator iff L is a contraction on the inputs
      it maps to replicated vectors and L# is one on replicated vectors;
    * derivative-split: the same pair of tests, taken for the forms with the
      sign that matches the energy identity 2 Re[AU, U] = [x,x]_+ - [Lx,Lx]_-.

    The certificates always include the trace-space Lumer-Phillips rates,
    which do not depend on the frame."""
    fr = spec.frame
    op = spec.framed_operator()
    certs: dict = {}
    G = airy_gram(fr.graph)
    ts, _, _ = trace_space_analysis(constraint_matrix(spec), G,
                                    energy_sign=-spec.generator_sign, tol=tol_unitary)
    certs.update(ts)
    tols = {"unitary": tol_unitary, "psd": tol_psd}
    if fr.kind is FrameKind.EVEN_PAIRED:
        u = is_krein_unitary(op, tol_unitary)
        certs["unitary_residual"] = u.value
        verdict = Verdict.SKEW_SELF_ADJOINT if u else Verdict.NEITHER
        return ClassificationReport("airy", fr.kind.value, verdict, u.value, certs, tols, spec.label)

    R = fr.replication()
    if fr.kind is FrameKind.DERIVATIVE_SPLIT:
        # literal reading of the contraction conditions, kept for comparison
        certs["unsigned_forward_max_eig"] = is_krein_contraction(op, tol_psd).value
        certs["unsigned_adjoint_max_eig"] = is_krein_contraction(krein_adjoint(op), tol_psd).value
        op = FramedOperator(op.L, -op.domain_form, -op.codomain_form)
    S = _replicated_inputs(op.L, R)
    fwd = is_krein_contraction(op, tol_psd, subspace=S)
    adj = is_krein_contraction(krein_adjoint(op), tol_psd, subspace=R)
    certs["forward_max_eig"] = fwd.value
    certs["adjoint_max_eig"] = adj.value
    certs["full_space_forward_max_eig"] = is_krein_contraction(op, tol_psd).value
    certs["admissible_input_dim"] = int(S.shape[1])
    verdict = Verdict.CONTRACTION_GENERATOR if (fwd and adj) else Verdict.NEITHER
    residual = max(fwd.value, adj.value)
    return ClassificationReport("airy", fr.kind.value, verdict, residual, certs, tols, spec.label)


# -- deficiency indices ------------------------------------------------------

BOUNDARY_CASE_TOL = 1e-10


def _stable_roots(alpha: float, beta: float, sign: float):
    r = np.roots([alpha, 0.0, beta, sign])
    if np.any(np.abs(r.real) < BOUNDARY_CASE_TOL):
        raise GraphError(f"boundary-case coefficients: root on the imaginary axis "
                         f"for alpha={alpha}, beta={beta}")
    return r, int((r.real < 0).sum())


def airy_deficiency(graph: MetricGraphSpec) -> DeficiencyReport:
    """Deficiency indices of i A0.  Solutions of alpha u''' + beta u' = +-u on a
    half-line are e^{rx} with r a root of alpha r^3 + beta r -+ 1; only roots
    with negative real part give L^2 functions.  The finite edge contributes
    three solutions for each sign."""
    graph.require_airy()
    edges = [{"edge": 0, "kind": "finite", "d_minus": 3, "d_plus": 3}]
    dm = dp = 3
    for j in range(1, graph.N + 1):
        a, b = graph.coefficients[j]
        rm, km = _stable_roots(a, b, -1.0)
        rp, kp = _stable_roots(a, b, 1.0)
        dm += km
        dp += kp
        edges.append({"edge": j, "kind": "half_line", "d_minus": km, "d_plus": kp,
                      "roots_minus": [complex(z) for z in rm],
                      "roots_plus": [complex(z) for z in rp]})
    return DeficiencyReport("airy", dm, dp, edges)


# -- catalogued matrices -------------------------------------------------------

def delta_z_block(z: float) -> np.ndarray:
    return np.array([[1.0, 0.0, 0.0], [z, 1.0, 0.0], [z**2 / 2, z, 1.0]])


def looping_pattern(N: int, alpha: float = 1.0, beta: float = 1.0, L: float = 1.0) -> MetricGraphSpec:
    """Looping edge whose odd half-lines copy the loop coefficients and whose
    even half-lines carry their negatives."""
    coeffs = [(alpha, beta)] + [((alpha, beta) if j % 2 else (-alpha, -beta)) for j in range(1, N + 1)]
    return MetricGraphSpec.looping_edge(N, L, coeffs)


def delta_z_coupling(z: float, k: int = 1, alpha: float = 1.0, beta: float = 1.0,
                     L: float = 1.0) -> MatrixCoupling:
    """Block diagonal delta_z coupling on 2k half-lines."""
    g = looping_pattern(2 * k, alpha, beta, L)
    M = linalg.block_diag(*[delta_z_block(z)] * (k + 1))
    return MatrixCoupling(build_frame(g, FrameKind.EVEN_PAIRED), M, label=f"delta_z(z={z}, k={k})")


def pair_coupling(z: float, m: float, alpha: float = 1.0, beta: float = 1.0, L: float = 1.0) -> MatrixCoupling:
    """Two delta_z blocks on two half-lines whose second-derivative rows are
    coupled through m."""
    M = linalg.block_diag(delta_z_block(z), delta_z_block(z))
    M[2, 3] = m
    M[5, 0] = -m
    g = looping_pattern(2, alpha, beta, L)
    return MatrixCoupling(build_frame(g, FrameKind.EVEN_PAIRED), M, label=f"pair(z={z}, m={m})")


def _two_line_coupling(M: np.ndarray, label: str, alpha: float, beta: float, L: float) -> MatrixCoupling:
    g = looping_pattern(2, alpha, beta, L)
    return MatrixCoupling(build_frame(g, FrameKind.EVEN_PAIRED), M, label=label)


def swap2_coupling(m1: float, m2: float, alpha: float = 1.0, beta: float = 1.0,
                   L: float = 1.0) -> MatrixCoupling:
    """Loop-preserving coupling exchanging first derivatives, two parameters."""
    M = np.array([
        [1, 0, 0, 0, 0, 0],
        [0, 0, 0, m1, 1, 0],
        [0, 0, 1, m2, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [-m2, 0, 0, m1**2 / 2, m1, 1],
    ], dtype=float)
    return _two_line_coupling(M, f"swap2(m1={m1}, m2={m2})", alpha, beta, L)


def swap4_coupling(m1, m2, m3, m4, alpha: float = 1.0, beta: float = 1.0, L: float = 1.0) -> MatrixCoupling:
    """Loop-preserving coupling with four parameters."""
    M = np.array([
        [1, 0, 0, 0, 0, 0],
        [m1, 0, 0, m2, 1, 0],
        [(m1**2 + 1) / 2, 1, 1, m3, m1, 0],
        [0, 0, 0, 1, 0, 0],
        [1, 1, 0, m4, 0, 0],
        [m4 - m3 + m1 * m2, m4, 0, (m2**2 + m4**2) / 2, m2, 1],
    ], dtype=float)
    return _two_line_coupling(M, f"swap4(m={(m1, m2, m3, m4)})", alpha, beta, L)


def tadpole_contraction_matrix(m1, m2, m3, m4) -> np.ndarray:
    s = m2 + m3
    return np.array([
        [1, 0, 0, 0, 0, 0],
        [s / 2, 1, 0, 1, 0, 0],
        [m1, s, 2, m2, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [s / 2, 1, 0, 1, 0, 0],
        [m3, 2, 0, m4, 0, 2],
    ], dtype=float)


def tadpole_hypothesis(m, alpha0: float) -> bool:
    """Parameter region claimed to give contraction semigroups."""
    m1, m2, m3, m4 = m
    return alpha0 < 0 and m4 <= 1.5 and 4 * m1 - (m2**2 + m3**2) <= 2


def tadpole_margin(m) -> float:
    """For alpha = beta = -1 both replicated contraction tests reduce to this
    scalar being <= 0 (derived symbolically; see scripts/tadpole_region_scan.py)."""
    m1, m2, m3, m4 = m
    return 2 - m1 - m4 + (m2 + m3) ** 2 / 4


def tadpole_coupling(m, alpha: float = -1.0, beta: float = -1.0, L: float = 1.0) -> MatrixCoupling:
    g = MetricGraphSpec.tadpole(L, [(alpha, beta), (alpha, beta)])
    tags = set()
    if not tadpole_hypothesis(m, alpha):
        tags.add("expected non-contraction")
    return MatrixCoupling(build_frame(g, FrameKind.REPLICATED), tadpole_contraction_matrix(*m),
                          label=f"tadpole_contraction(m={tuple(m)})", tags=frozenset(tags))


def mixed_matrix(m1: float, m2: float, m3: float) -> np.ndarray:
    if m3 == 0:
        raise FrameError("the 2x2 family needs m3 != 0")
    return np.array([[m1, m2], [m3, -m1 * m2 / m3]], dtype=float)


def mixed_family_condition(m1: float, m2: float, m3: float) -> bool:
    """Conditions under which the 2x2 family above passes both contraction
    tests in the tadpole derivative-split frame (m3 != 0)."""
    return (m3**2 + m1**2 <= 2 and m2**2 * (m1**2 + 1) <= 2
            and m1 * (m3**2 - m2**2) == 0 and m1**2 + m2**2 <= 1
            and m1**2 * m2**2 / m3**2 + m3**2 <= 2)


def mixed_coupling(Y, L, graph: MetricGraphSpec | None = None, label: str = "") -> MixedCoupling:
    if graph is None:
        graph = MetricGraphSpec.tadpole(1.0, [(-1.0, -1.0), (-1.0, -1.0)])
    return MixedCoupling(build_frame(graph, FrameKind.DERIVATIVE_SPLIT), Y, L, label=label)


def yz_coupling(z: float, graph: MetricGraphSpec | None = None) -> MixedCoupling:
    """Y = span{(1, 1, z)} with L = [[1, 1], [1, -1]] on a tadpole."""
    return mixed_coupling(np.array([1.0, 1.0, z]), mixed_matrix(1, 1, 1), graph,
                          label=f"Y_z(z={z})")


def example_factories() -> dict:
    """Named constructors for the catalogued Airy couplings."""
    return {
        "delta_z": delta_z_coupling,
        "pair": pair_coupling,
        "swap2": swap2_coupling,
        "swap4": swap4_coupling,
        "tadpole_contraction": tadpole_coupling,
        "y_z": yz_coupling,
        "mixed_2x2": lambda m1, m2, m3, Y=(1.0, 1.0, 1.0): mixed_coupling(
            np.array(Y, dtype=float), mixed_matrix(m1, m2, m3), label=f"mixed(m={m1, m2, m3})"),
    }
