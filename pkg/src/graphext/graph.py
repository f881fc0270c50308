"""Metric graphs with one finite edge and N attached half-lines.

Three topologies share the same trace layout:

* ``looping_edge``: a loop parametrised by [-L, L] whose endpoints are glued at
  the vertex x = L, where N half-lines [L, inf) start.
* ``tadpole``: the looping edge with a single half-line.
* ``t_shaped``: a finite edge [-L, 0] with a free end at -L and N half-lines
  [0, inf) attached at 0.

Boundary traces are ordered as (phi(-L), phi(v), psi_1(v), ..., psi_N(v)) where
v is the vertex (L or 0).  Each point carries (f, f') for second order
operators and (f, f', f'') for third order ones.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    """Invalid graph data or an unusable sampling grid."""


class Topology(str, enum.Enum):
    LOOPING_EDGE = "looping_edge"
    TADPOLE = "tadpole"
    T_SHAPED = "t_shaped"


class OperatorOrder(enum.Enum):
    SCHRODINGER2 = 2
    AIRY3 = 3

    @property
    def block(self) -> int:
        return self.value


@dataclass(frozen=True)
class MetricGraphSpec:
    """Topology, loop half-length ``L``, number of half-lines ``N`` and the
    per-edge (alpha_e, beta_e) pairs, edge 0 being the finite edge."""

    topology: Topology
    L: float
    N: int
    coefficients: tuple = None

    def __post_init__(self):
        topo = Topology(self.topology)
        object.__setattr__(self, "topology", topo)
        L = float(self.L)
        if not np.isfinite(L) or L <= 0:
            raise GraphError(f"edge length must be positive, got {self.L!r}")
        object.__setattr__(self, "L", L)
        N = int(self.N)
        if N != self.N or N < 1:
            raise GraphError(f"N must be a positive integer, got {self.N!r}")
        if topo is Topology.TADPOLE and N != 1:
            raise GraphError("a tadpole has exactly one half-line")
        object.__setattr__(self, "N", N)
        coeffs = self.coefficients
        if coeffs is None:
            coeffs = [(1.0, 1.0)] * (N + 1)
        coeffs = tuple((float(a), float(b)) for a, b in coeffs)
        if len(coeffs) != N + 1:
            raise GraphError(f"expected {N + 1} (alpha, beta) pairs, got {len(coeffs)}")
        if not all(np.isfinite(c) for pair in coeffs for c in pair):
            raise GraphError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def looping_edge(cls, N, L=1.0, coefficients=None):
        return cls(Topology.LOOPING_EDGE, L, N, coefficients)

    @classmethod
    def tadpole(cls, L=1.0, coefficients=None):
        return cls(Topology.TADPOLE, L, 1, coefficients)

    @classmethod
    def t_shaped(cls, N, L=1.0, coefficients=None):
        return cls(Topology.T_SHAPED, L, N, coefficients)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.coefficients])

    @property
    def betas(self) -> np.ndarray:
        return np.array([b for _, b in self.coefficients])

    @property
    def n_points(self) -> int:
        """Number of boundary points: two loop ends plus the half-line starts."""
        return self.N + 2

    @property
    def vertex(self) -> float:
        return 0.0 if self.topology is Topology.T_SHAPED else self.L

    @property
    def edge0(self) -> tuple[float, float]:
        return (-self.L, self.vertex)

    def point_edges(self) -> list[int]:
        """Edge index owning each boundary point."""
        return [0, 0] + list(range(1, self.N + 1))

    def point_signs(self) -> np.ndarray:
        """+1 where the edge leaves the point (left ends), -1 at the loop's
        right end.  Boundary forms pick up this sign per point."""
        s = np.ones(self.n_points)
        s[1] = -1.0
        return s

    def require_airy(self):
        if np.any(self.alphas == 0.0):
            raise GraphError("degenerate Airy edge: every alpha_e must be nonzero")

    def to_dict(self) -> dict:
        return {
            "topology": self.topology.value,
            "L": self.L,
            "N": self.N,
            "coefficients": [list(c) for c in self.coefficients],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricGraphSpec":
        try:
            return cls(data["topology"], data["L"], data["N"], data.get("coefficients"))
        except KeyError as exc:
            raise GraphError(f"graph description is missing {exc.args[0]!r}") from None
        except TypeError as exc:
            raise GraphError(f"malformed graph description: {exc}") from None


def load_graph(path) -> MetricGraphSpec:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if "graph" in data:
        data = data["graph"]
    return MetricGraphSpec.from_dict(data)


@dataclass(frozen=True, eq=False)
class TraceVector:
    """Boundary data in canonical order, one block of length ``order.block``
    per boundary point."""

    order: OperatorOrder
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).ravel()
        if v.size % self.order.block:
            raise GraphError("trace length is not a multiple of the block size")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_blocks(cls, order: OperatorOrder, blocks) -> "TraceVector":
        return cls(order, np.asarray(blocks, dtype=complex).ravel())

    def blocks(self) -> np.ndarray:
        """Array of shape (n_points, block)."""
        return self.values.reshape(-1, self.order.block)

    def derivative(self, k: int) -> np.ndarray:
        """The k-th derivative across all boundary points."""
        return self.blocks()[:, k]


def trace_length(graph: MetricGraphSpec, order: OperatorOrder) -> int:
    return graph.n_points * order.block


def trace_index(graph: MetricGraphSpec, order: OperatorOrder, point: int, k: int) -> int:
    return point * order.block + k


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a uniform grid of spacing ``h``; half-lines are truncated at
    distance ``R`` from the vertex.  ``derivatives`` optionally holds exact
    derivative samples keyed by order, in the same layout."""

    graph: MetricGraphSpec
    loop_samples: np.ndarray
    halfline_samples: tuple
    h: float
    R: float
    derivatives: dict = field(default=None)

    def loop_grid(self) -> np.ndarray:
        a, _ = self.graph.edge0
        return a + self.h * np.arange(len(self.loop_samples))

    def halfline_grid(self) -> np.ndarray:
        return self.graph.vertex + self.h * np.arange(len(self.halfline_samples[0]))

    def derivative(self, k: int) -> "GridFunction":
        if k == 0:
            return self
        if not self.derivatives or k not in self.derivatives:
            raise GraphError(f"no exact derivative of order {k} stored")
        loop, half = self.derivatives[k]
        return GridFunction(self.graph, loop, tuple(half), self.h, self.R)


def grid_points(graph: MetricGraphSpec, h: float, R: float | None = None):
    """Loop and half-line grids.  The spacing must divide both lengths."""
    R = 8.0 * graph.L if R is None else float(R)
    a, b = graph.edge0
    n0 = (b - a) / h
    nh = R / h
    if abs(n0 - round(n0)) > 1e-8 * n0 or abs(nh - round(nh)) > 1e-8 * nh:
        raise GraphError(f"grid spacing {h} does not divide the edge lengths")
    x0 = np.linspace(a, b, int(round(n0)) + 1)
    xh = np.linspace(graph.vertex, graph.vertex + R, int(round(nh)) + 1)
    return x0, xh, R


# 4th order one-sided stencils at a left endpoint (standard coefficients).
_D1 = np.array([-25 / 12, 4.0, -3.0, 4 / 3, -1 / 4])
_D2 = np.array([15 / 4, -77 / 6, 107 / 6, -13.0, 61 / 12, -5 / 6])
_MIN_POINTS = 7


def _left_jet(f: np.ndarray, h: float, nder: int) -> list:
    out = [f[0]]
    if nder >= 1:
        out.append(_D1 @ f[:5] / h)
    if nder >= 2:
        out.append(_D2 @ f[:6] / h**2)
    return out


def trace_of(f: GridFunction, order: OperatorOrder) -> TraceVector:
    """Boundary trace from samples, using 4th order one-sided differences.
    Second derivatives are needed for Airy traces only."""
    nder = order.block - 1
    edges = [f.loop_samples, *f.halfline_samples]
    if any(len(e) < _MIN_POINTS for e in edges):
        raise GraphError(f"insufficient stencil: every edge needs at least {_MIN_POINTS} samples")
    loop = np.asarray(f.loop_samples)
    blocks = [_left_jet(loop, f.h, nder)]
    right = _left_jet(loop[::-1], f.h, nder)
    # reversing the samples flips the sign of odd derivatives
    blocks.append([(-1) ** k * v for k, v in enumerate(right)])
    for psi in f.halfline_samples:
        blocks.append(_left_jet(np.asarray(psi), f.h, nder))
    return TraceVector.from_blocks(order, blocks)


# -- smooth cutoffs -------------------------------------------------------
# Jets are lists [g, g', g'', g'''] of arrays.

def _jet_mul(a, b):
    return [
        a[0] * b[0],
        a[1] * b[0] + a[0] * b[1],
        a[2] * b[0] + 2 * a[1] * b[1] + a[0] * b[2],
        a[3] * b[0] + 3 * a[2] * b[1] + 3 * a[1] * b[2] + a[0] * b[3],
    ]


def _jet_recip(a):
    g0, g1, g2, g3 = a
    return [
        1 / g0,
        -g1 / g0**2,
        (2 * g1**2 - g0 * g2) / g0**3,
        (-6 * g1**3 + 6 * g0 * g1 * g2 - g0**2 * g3) / g0**4,
    ]


def _exp_inv_jet(t):
    """Jet of t -> exp(-1/t) for t > 0, extended by zero."""
    pos = t > 0
    ts = np.where(pos, t, 1.0)
    e = np.where(pos, np.exp(-1 / ts), 0.0)
    return [
        e,
        e / ts**2,
        e * (ts**-4 - 2 * ts**-3),
        e * (ts**-6 - 6 * ts**-5 + 6 * ts**-4),
    ]


def smooth_step_jet(t: np.ndarray):
    """C-infinity step rising from 0 at t <= 0 to 1 at t >= 1, with its first
    three derivatives."""
    t = np.asarray(t, dtype=float)
    a = _exp_inv_jet(t)
    b = _exp_inv_jet(1 - t)
    b = [b[0], -b[1], b[2], -b[3]]
    s = [a[k] + b[k] for k in range(4)]
    return _jet_mul(a, _jet_recip(s))


def cutoff_jet(x: np.ndarray, p: float, radius: float):
    """Flat-top cutoff around ``p``: 1 within radius/2, 0 beyond radius."""
    d = x - p
    sgn = np.where(d >= 0, 1.0, -1.0)
    t = 2 * np.abs(d) / radius - 1
    s = smooth_step_jet(t)
    scale = 2 / radius
    return [1 - s[0]] + [-(sgn * scale) ** k * s[k] for k in (1, 2, 3)]


def _taylor_jet(x: np.ndarray, p: float, coeffs) -> list:
    d = x - p
    c = list(coeffs) + [0.0] * (4 - len(coeffs))
    c = [complex(v) for v in c]
    # P = sum c_k d^k / k!
    p0 = c[0] + c[1] * d + c[2] * d**2 / 2 + c[3] * d**3 / 6
    p1 = c[1] + c[2] * d + c[3] * d**2 / 2
    p2 = c[2] + c[3] * d
    p3 = c[3] + 0 * d
    return [p0, p1, p2, p3]


def synthesize_with_trace(graph: MetricGraphSpec, target: TraceVector,
                          h: float | None = None, R: float | None = None) -> GridFunction:
    """Build a smooth compactly supported function with prescribed boundary
    trace.  Near each boundary point it equals the Taylor polynomial of the
    target; a flat-top cutoff of radius L/2 localises it."""
    h = graph.L / 256 if h is None else float(h)
    x0, xh, R = grid_points(graph, h, R)
    blocks = target.blocks()
    if blocks.shape[0] != graph.n_points:
        raise GraphError("trace does not match the graph")
    radius = graph.L / 2
    if R < radius:
        raise GraphError("half-lines are truncated inside the cutoff support")

    def local(x, point):
        chi = cutoff_jet(x, x_pt[point], radius)
        return _jet_mul(_taylor_jet(x, x_pt[point], blocks[point]), chi)

    a, v = graph.edge0
    x_pt = [a, v] + [v] * graph.N
    loop = [l0 + l1 for l0, l1 in zip(local(x0, 0), local(x0, 1))]
    half = [local(xh, 2 + j) for j in range(graph.N)]
    derivs = {k: (loop[k], tuple(hj[k] for hj in half)) for k in range(4)}
    return GridFunction(graph, loop[0], tuple(hj[0] for hj in half), h, R, derivs)


def sample(graph: MetricGraphSpec, loop_fn, halfline_fns, h: float | None = None,
           R: float | None = None) -> GridFunction:
    """Sample callables on the standard grid."""
    h = graph.L / 256 if h is None else float(h)
    x0, xh, R = grid_points(graph, h, R)
    if callable(halfline_fns):
        halfline_fns = [halfline_fns] * graph.N
    return GridFunction(graph, np.asarray(loop_fn(x0), dtype=complex),
                        tuple(np.asarray(f(xh), dtype=complex) for f in halfline_fns), h, R)
