"""Independent references used by the tests: quadrature of the Green
identities on synthesized functions, and direct constructions of Krein
unitaries."""
import numpy as np
from scipy import integrate, linalg

from graphext.graph import OperatorOrder, TraceVector, synthesize_with_trace


def random_trace(rng, graph, order):
    n = graph.n_points * order.block
    return TraceVector(order, (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / 2)


def _edges(f, k):
    g = f.derivative(k)
    return [(f.loop_grid(), g.loop_samples)] + [(f.halfline_grid(), s) for s in g.halfline_samples]


def airy_green_quadrature(graph, fu, fv):
    """sum_e int (A u) conj(v) + u conj(A v) dx with A = alpha d^3 + beta d."""
    total = 0.0
    for e, (a, b) in enumerate(graph.coefficients):
        parts = []
        for f in (fu, fv):
            parts.append([_edges(f, k)[e][1] for k in range(4)])
        x = _edges(fu, 0)[e][0]
        (u, u1, _, u3), (v, v1, _, v3) = parts
        integrand = (a * u3 + b * u1) * v.conj() + u * (a * v3 + b * v1).conj()
        total += integrate.simpson(integrand, x=x)
    return total


def schrodinger_green_quadrature(graph, fu, fv):
    """sum_e int (-u'') conj(v) - u conj(-v'') dx."""
    total = 0.0
    for e in range(graph.N + 1):
        x = _edges(fu, 0)[e][0]
        u, u2 = _edges(fu, 0)[e][1], _edges(fu, 2)[e][1]
        v, v2 = _edges(fv, 0)[e][1], _edges(fv, 2)[e][1]
        total += integrate.simpson(-u2 * v.conj() + u * v2.conj(), x=x)
    return total


def synthesized_pair(rng, graph, order, h=None):
    tu, tv = random_trace(rng, graph, order), random_trace(rng, graph, order)
    return tu, tv, synthesize_with_trace(graph, tu, h=h), synthesize_with_trace(graph, tv, h=h)


def krein_unitary(rng, H, scale=1.0, change_basis=False):
    """exp(H^{-1} K) with K skew-Hermitian preserves [., .]_H.  With
    ``change_basis`` the result is composed with a random T, which makes it
    unitary from H to T^{-*} H T^{-1}.  Returns (L, H_cod)."""
    n = H.shape[0]
    K = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    K = scale * (K - K.conj().T) / 2
    U = linalg.expm(np.linalg.solve(H, K))
    if not change_basis:
        return U, H
    T = np.eye(n) + 0.3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
    Ti = np.linalg.inv(T)
    H_cod = Ti.conj().T @ H @ Ti
    return T @ U, (H_cod + H_cod.conj().T) / 2


def random_signature(rng, n):
    p = int(rng.integers(0, n + 1))
    d = np.r_[np.ones(p), -np.ones(n - p)] * rng.uniform(0.5, 2.0, n)
    Q = linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]
    return Q @ np.diag(d) @ Q.conj().T
