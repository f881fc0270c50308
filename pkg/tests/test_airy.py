import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from graphext import airy
from graphext.airy import FrameError, FrameKind
from graphext.graph import GraphError, MetricGraphSpec, OperatorOrder, TraceVector
from graphext.verdicts import Verdict

seeds = st.integers(0, 2**32 - 1)
par = st.floats(-3, 3)


def _trace(rng, g):
    n = 3 * g.n_points
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


@settings(max_examples=30)
@given(seed=seeds, N=st.integers(1, 4))
def test_boundary_form_is_hermitian_and_split_agrees(seed, N):
    rng = np.random.default_rng(seed)
    g = MetricGraphSpec.looping_edge(N, 1.0, [(rng.choice([-1, 1]) * rng.uniform(0.5, 2), rng.normal())
                                              for _ in range(N + 1)])
    u, v = _trace(rng, g), _trace(rng, g)
    f = airy.boundary_form_airy(u, v, g, crosscheck=True)
    assert abs(f - np.conj(airy.boundary_form_airy(v, u, g))) < 1e-12 * (1 + abs(f))
    assert abs(f - airy.boundary_form_split(u, v, g)) < 1e-12 * (1 + abs(f))
    tv = TraceVector(OperatorOrder.AIRY3, u)
    assert airy.boundary_form_airy(tv, tv, g).imag == pytest.approx(0, abs=1e-12)


def test_even_paired_applicability():
    assert airy.even_paired_applicable(airy.looping_pattern(2))[0]
    assert not airy.even_paired_applicable(MetricGraphSpec.tadpole())[0]
    same = MetricGraphSpec.looping_edge(2, 1.0, [(1, 1), (1, 1), (1, 1)])
    assert not airy.even_paired_applicable(same)[0]
    with pytest.raises(FrameError):
        airy.build_frame(MetricGraphSpec.tadpole(), FrameKind.EVEN_PAIRED)


def test_frames_default_generator_signs():
    assert airy.delta_z_coupling(1.0).generator_sign == -1
    assert airy.tadpole_coupling((0, 0, 0, 0)).generator_sign == 1
    assert airy.yz_coupling(1.0).generator_sign == 1


def test_coupling_shape_checked():
    fr = airy.build_frame(airy.looping_pattern(2), FrameKind.EVEN_PAIRED)
    with pytest.raises(FrameError, match="shape"):
        airy.MatrixCoupling(fr, np.eye(4))
    with pytest.raises(FrameError):
        airy.MatrixCoupling(airy.build_frame(MetricGraphSpec.tadpole(), FrameKind.DERIVATIVE_SPLIT), np.eye(2))
    with pytest.raises(FrameError, match="m3"):
        airy.mixed_matrix(1, 1, 0)


@given(z=st.floats(-10, 10), k=st.integers(1, 3))
def test_delta_z_is_skew_self_adjoint(z, k):
    rep = airy.classify_airy(airy.delta_z_coupling(z, k))
    assert rep.verdict is Verdict.SKEW_SELF_ADJOINT
    assert rep.certificates["maximal"]


@given(z=par, m=par)
def test_pair_and_swaps_are_unitary(z, m):
    for spec in (airy.pair_coupling(z, m), airy.swap2_coupling(z, m), airy.swap4_coupling(z, m, m - z, 0.5)):
        assert airy.classify_airy(spec).verdict is Verdict.SKEW_SELF_ADJOINT


def test_perturbed_delta_z_is_neither():
    spec = airy.delta_z_coupling(1.0)
    L = spec.L.copy()
    L[1, 0] += 0.3
    rep = airy.classify_airy(airy.MatrixCoupling(spec.frame, L))
    assert rep.verdict is Verdict.NEITHER and rep.residual > 1e-3


def test_domain_membership():
    spec = airy.delta_z_coupling(0.5)
    X = airy.domain_basis(spec)
    rng = np.random.default_rng(1)
    u = X @ rng.standard_normal(X.shape[1])
    assert airy.domain_membership_airy(spec, u)
    assert not airy.domain_membership_airy(spec, u + 1e-3 * rng.standard_normal(u.size))


@settings(max_examples=40, deadline=None)
@given(m=st.tuples(par, par, par, par))
def test_tadpole_contraction_follows_margin(m):
    # both replicated tests reduce to 2 - m1 - m4 + (m2 + m3)^2 / 4 <= 0
    c = airy.tadpole_margin(m)
    assume(abs(c) > 1e-6)
    rep = airy.classify_airy(airy.tadpole_coupling(m))
    assert (rep.verdict is Verdict.CONTRACTION_GENERATOR) == (c < 0)


def test_tadpole_hypothesis_tag():
    assert "expected non-contraction" in airy.tadpole_coupling((0, 0, 0, 2)).tags
    assert not airy.tadpole_coupling((0, 0, -2, 0)).tags


def test_mixed_family_highlighted_example():
    # the highlighted L = [[1, 1], [1, -1]] violates m1^2 + m2^2 <= 1 yet contracts
    assert not airy.mixed_family_condition(1, 1, 1)
    rep = airy.classify_airy(airy.mixed_coupling([1, 1, 1], airy.mixed_matrix(1, 1, 1)))
    assert rep.verdict is Verdict.CONTRACTION_GENERATOR
    assert "unsigned_forward_max_eig" in rep.certificates


@settings(max_examples=60, deadline=None)
@given(m1=st.sampled_from([0.0, 0.3, -0.7]), m2=st.floats(-1.5, 1.5), m3=st.floats(-1.5, 1.5))
def test_mixed_family_condition_is_sufficient(m1, m2, m3):
    assume(abs(m3) > 1e-3)
    if airy.mixed_family_condition(m1, m2, m3):
        rep = airy.classify_airy(airy.mixed_coupling([1, 1, 1], airy.mixed_matrix(m1, m2, m3)))
        assert rep.verdict is Verdict.CONTRACTION_GENERATOR


def test_y_z_lumer_phillips_on_positive_tadpole():
    g = MetricGraphSpec.tadpole(1.0, [(1, 1), (1, 1)])
    rep = airy.classify_airy(airy.yz_coupling(1.0, g))
    assert rep.verdict is Verdict.CONTRACTION_GENERATOR
    assert rep.certificates["lumer_phillips"]


@pytest.mark.parametrize("a, b, expected", [(1, 1, (2, 1)), (1, -1, (2, 1)), (-1, 1, (1, 2)),
                                            (-1, -1, (1, 2))])
def test_half_line_deficiency(a, b, expected):
    rep = airy.airy_deficiency(MetricGraphSpec.tadpole(1.0, [(1, 1), (a, b)]))
    assert (rep.edges[1]["d_minus"], rep.edges[1]["d_plus"]) == expected
    assert rep.indices == (3 + expected[0], 3 + expected[1])


def test_deficiency_rejects_zero_alpha():
    with pytest.raises(GraphError):
        airy.airy_deficiency(MetricGraphSpec.tadpole(1.0, [(1, 1), (0, 1)]))
