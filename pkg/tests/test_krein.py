import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphext.krein import (FramedOperator, IndefiniteForm, KreinError, defect_form, form_complement,
                            graph_basis, is_krein_contraction, is_krein_unitary, is_w_self_orthogonal,
                            krein_adjoint, null_basis, row_basis, subspace_distance)

from oracles import krein_unitary, random_signature

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 8)


def test_form_validation():
    with pytest.raises(KreinError, match="Hermitian"):
        IndefiniteForm(np.array([[0, 1], [0, 0]]))
    with pytest.raises(KreinError, match="degenerate"):
        IndefiniteForm(np.diag([1.0, 0.0]))
    with pytest.raises(KreinError, match="square"):
        IndefiniteForm(np.ones((2, 3)))
    assert IndefiniteForm(np.diag([1.0, -1.0, 2.0])).inertia() == (2, 1)


def test_operator_shape_checked():
    f2, f3 = IndefiniteForm(np.eye(2)), IndefiniteForm(np.eye(3))
    with pytest.raises(KreinError, match="does not match"):
        FramedOperator(np.eye(2), f2, f3)
    with pytest.raises(KreinError, match="square"):
        is_krein_unitary(FramedOperator(np.ones((3, 2)), f2, f3))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=dims, m=dims)
def test_adjoint_is_involution_and_adjoint(seed, n, m):
    rng = np.random.default_rng(seed)
    Hd, Hc = random_signature(rng, n), random_signature(rng, m)
    op = FramedOperator(rng.standard_normal((m, n)), IndefiniteForm(Hd), IndefiniteForm(Hc))
    adj = krein_adjoint(op)
    np.testing.assert_allclose(krein_adjoint(adj).L, op.L, atol=1e-9)
    x, y = rng.standard_normal(n), rng.standard_normal(m)
    lhs = op.codomain_form.inner(op.L @ x, y)
    rhs = op.domain_form.inner(x, adj.L @ y)
    assert abs(lhs - rhs) < 1e-9 * (1 + abs(lhs))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=dims, basis=st.booleans())
def test_unitary_iff_self_orthogonal(seed, n, basis):
    rng = np.random.default_rng(seed)
    H = random_signature(rng, n)
    L, Hc = krein_unitary(rng, H, scale=0.5 / np.sqrt(n), change_basis=basis)
    op = FramedOperator(L, IndefiniteForm(H), IndefiniteForm(Hc))
    assert is_krein_unitary(op)
    assert is_w_self_orthogonal(graph_basis(L), H, Hc)
    # Krein unitaries satisfy L# = L^{-1}
    np.testing.assert_allclose(krein_adjoint(op).L @ L, np.eye(n), atol=1e-9)
    bent = L.copy()
    bent[0, 0] += 0.5
    opb = FramedOperator(bent, op.domain_form, op.codomain_form)
    assert bool(is_krein_unitary(opb)) == is_w_self_orthogonal(graph_basis(bent), H, Hc)


@given(c=st.floats(-2, 2), seed=seeds)
def test_contraction_on_definite_space(c, seed):
    rng = np.random.default_rng(seed)
    Q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    f = IndefiniteForm(np.eye(3))
    test = is_krein_contraction(FramedOperator(c * Q, f, f))
    assert bool(test) == (abs(c) <= 1 + 1e-12) or abs(abs(c) - 1) < 1e-9
    assert test.value == pytest.approx(c**2 - 1, abs=1e-9)


def test_contraction_on_subspace_and_defect():
    H = np.diag([1.0, -1.0])
    f = IndefiniteForm(H)
    L = np.diag([2.0, 1.0])
    op = FramedOperator(L, f, f)
    np.testing.assert_allclose(defect_form(op), np.diag([3.0, 0.0]))
    assert not is_krein_contraction(op)
    assert is_krein_contraction(op, subspace=np.array([[0.0], [1.0]]))
    assert is_krein_contraction(op, subspace=np.zeros((2, 0))).value == -np.inf


def test_subspace_helpers():
    C = np.array([[1.0, 1.0, 0.0]])
    X = null_basis(C)
    assert X.shape == (3, 2) and np.abs(C @ X).max() < 1e-14
    assert row_basis(np.vstack([C, 2 * C])).shape == (1, 3)
    G = np.diag([1.0, -1.0])
    comp = form_complement(np.array([[1.0], [1.0]]), G)
    assert subspace_distance(comp, np.array([[1.0], [1.0]])) < 1e-12
