import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphext import schrodinger as sc
from graphext.graph import MetricGraphSpec
from graphext.verdicts import Verdict

seeds = st.integers(0, 2**32 - 1)


def _sym(rng, n):
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


@settings(max_examples=30)
@given(seed=seeds, N=st.integers(1, 4))
def test_boundary_form_is_skew_and_matches_q_form(seed, N):
    rng = np.random.default_rng(seed)
    g = MetricGraphSpec.looping_edge(N)
    n = 2 * g.n_points
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    f = sc.boundary_form_schrodinger(u, v, g, crosscheck=True)
    assert abs(f + np.conj(sc.boundary_form_schrodinger(v, u, g))) < 1e-12 * (1 + abs(f))
    assert abs(f - sc.boundary_form_q(u, v, g)) < 1e-12 * (1 + abs(f))


@settings(max_examples=30, deadline=None)
@given(seed=seeds, N=st.integers(1, 5))
def test_l_n_gram_identity(seed, N):
    rng = np.random.default_rng(seed)
    g = MetricGraphSpec.looping_edge(N)
    fr = sc.build_schrodinger_frame(g)
    L = sc.l_n_matrix(_sym(rng, N + 1))
    assert np.abs(L.T @ fr.P_minus @ L - fr.P_plus).max() < 1e-12
    rep = sc.classify_schrodinger(sc.matrix_coupling(g, L))
    assert rep.verdict is Verdict.SELF_ADJOINT
    # the replicated frame only reaches a two-dimensional trace space
    assert rep.certificates["trace_dim"] == 2 and not rep.certificates["maximal"]


@settings(max_examples=20, deadline=None)
@given(seed=seeds, N=st.integers(1, 4))
def test_l_n_implies_but_does_not_equal_dzn(seed, N):
    m = _sym(np.random.default_rng(seed), N + 1)
    cmp = sc.dzn_equivalence(N, m)
    assert cmp.Z == pytest.approx(m.sum() / (N + 1))
    assert cmp.implies and not cmp.equivalent
    assert (cmp.rank_coupling, cmp.rank_dzn) == (2 * (N + 1), N + 2)


@pytest.mark.parametrize("Z, N", [(0.0, 1), (2.0, 1), (-1.5, 3)])
def test_dzn_is_lagrangian(Z, N):
    g = MetricGraphSpec.looping_edge(N)
    spec = sc.dzn_coupling(g, Z)
    rep = sc.classify_schrodinger(spec)
    assert rep.verdict is Verdict.SELF_ADJOINT and rep.certificates["maximal"]
    chk = sc.continuity_family_check(spec)
    assert chk["equals_dzn"] and chk["Z"] == pytest.approx(Z)


def test_continuity_family_check_on_l_n():
    m = np.array([[1.0, 0.5], [0.5, -2.0]])
    chk = sc.continuity_family_check(sc.matrix_coupling(MetricGraphSpec.tadpole(), sc.l_n_matrix(m)))
    assert chk["enforces_continuity"] and chk["contained_in_dzn"] and not chk["equals_dzn"]


@pytest.mark.parametrize("Y", [[1, 1, 0], [1, 0, -1], [[1, 0], [0, 1], [1, 1]]])
def test_subspace_couplings_are_self_adjoint(Y):
    spec = sc.subspace_coupling(MetricGraphSpec.tadpole(), np.array(Y, dtype=float))
    rep = sc.classify_schrodinger(spec)
    assert rep.verdict is Verdict.SELF_ADJOINT and rep.certificates["maximal"]


def test_subspace_domain_reads_as_stated():
    # Y0 = span(1, 1, 0): phi(-L) = phi(L), psi(L) = 0 and phi'(-L) = phi'(L)
    spec = sc.subspace_coupling(MetricGraphSpec.tadpole(), [1, 1, 0])
    good = np.array([2.0, 0.7, 2.0, 0.7, 0.0, 5.0])
    bad = good.copy()
    bad[3] = -0.7
    assert sc.domain_membership_schrodinger(spec, good)
    assert not sc.domain_membership_schrodinger(spec, bad)


def test_non_lagrangian_constraints_are_neither():
    g = MetricGraphSpec.tadpole()
    spec = sc.ConstraintCoupling(sc.build_schrodinger_frame(g), sc.continuity_subspace(g))
    assert sc.classify_schrodinger(spec).verdict is Verdict.NEITHER


def test_delta_prime_families():
    for m in [(1, 0, -1, 0.5), (2, 1, 0.5, 1)]:
        L = sc.delta_prime_matrix(*m)
        rep = sc.classify_schrodinger(sc.matrix_coupling(MetricGraphSpec.tadpole(), L))
        assert rep.verdict is Verdict.SELF_ADJOINT
    tp = sc.example_factories()["delta_prime_t"](m4=0.3)
    assert sc.classify_schrodinger(tp).verdict is Verdict.SELF_ADJOINT


@pytest.mark.parametrize("N", [1, 2, 3])
def test_t_shaped_aggregate(N):
    rng = np.random.default_rng(N)
    m = _sym(rng, N + 1)
    spec = sc.matrix_coupling(MetricGraphSpec.t_shaped(N), sc.tshape_matrix(m))
    assert sc.classify_schrodinger(spec).verdict is Verdict.SELF_ADJOINT
    # every trace obeys phi(0-) - phi(-L) = sum psi_j + (sum m / (N+1)) psi'
    X = sc.domain_basis(spec)
    Z = sc.aggregate_z(m)
    vals, ders = X[0::2], X[1::2]
    lhs = vals[1] - vals[0]
    rhs = vals[2:].sum(axis=0) + Z * ders[2]
    assert np.abs(lhs - rhs).max() < 1e-10


@pytest.mark.parametrize("N", range(1, 6))
def test_deficiency(N):
    rep = sc.schrodinger_deficiency(MetricGraphSpec.looping_edge(N))
    assert rep.indices == (N + 2, N + 2)
