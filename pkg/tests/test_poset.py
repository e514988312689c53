import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from igbss import BOTTOM, Layer, build_sample_space, mixing, received, source
from igbss.poset import n_mixing_states
from oracles import Oracle
from conftest import small_space_params


def test_2221_counts_and_layers(space2221):
    assert len(space2221) == 13
    counts = np.bincount(space2221.layers)
    assert counts.tolist() == [1, 4, 4, 4]


def test_2221_removed_pairs(space2221):
    for n, m in itertools.product(range(2), range(2)):
        assert not space2221.leq(source(n, m), received(n, m))
        assert space2221.leq(source(n, m), received(1 - n, m))


def test_single_source_space():
    sp = build_sample_space(2, 1, 1, 1)
    names = [str(s) for s in sp.states]
    assert names == ["bot", "a(0,0)", "a(1,0)", "z(0,0)", "x(0,0)", "x(1,0)"]
    assert sp.upset(source(0, 0)) == {source(0, 0), received(1, 0)}


def test_second_order_count():
    sp = build_sample_space(2, 3, 2, 2)
    assert n_mixing_states(2, 3, 2) == 12
    assert len(sp) == 1 + 12 + 6 + 4 == 23
    assert sum(1 for s in sp.states if s.layer is Layer.MIXING) == 12


def test_leq_examples(space2221):
    assert space2221.leq(mixing(0, 0), received(1, 1))
    assert space2221.leq(BOTTOM, source(1, 0))
    assert not space2221.leq(source(0, 0), received(0, 0))


def test_upset_downset_examples(space2221):
    assert space2221.upset(received(0, 0)) == {received(0, 0)}
    assert space2221.upset(mixing(0, 0)) == {mixing(0, 0), source(0, 0), source(0, 1),
                                             received(1, 0), received(1, 1)}
    assert space2221.downset(source(0, 0)) == {BOTTOM, mixing(0, 0), mixing(1, 0), source(0, 0)}


def test_enumeration_order(space2221):
    names = [str(s) for s in space2221.states]
    assert names == ["bot", "a(0,0)", "a(0,1)", "a(1,0)", "a(1,1)",
                     "z(0,0)", "z(0,1)", "z(1,0)", "z(1,1)",
                     "x(0,0)", "x(0,1)", "x(1,0)", "x(1,1)"]


def test_higher_order_enumeration():
    sp = build_sample_space(2, 3, 1, 3)
    mix_names = [str(s) for s in sp.states if s.layer is Layer.MIXING]
    assert mix_names[:6] == ["a(0,0)", "a(0,1)", "a(0,2)", "a(1,0)", "a(1,1)", "a(1,2)"]
    assert mix_names[6:9] == ["a(0,0,1)", "a(0,0,2)", "a(0,1,2)"]
    assert mix_names[-1] == "a(1,0,1,2)"


@pytest.mark.parametrize("L,N,M,k", small_space_params())
def test_relation_matches_closed_form_oracle(L, N, M, k):
    sp = build_sample_space(L, N, M, k)
    o = Oracle(L, N, M, k)
    assert [str(s) for s in sp.states] == o.names
    np.testing.assert_array_equal(sp.model_matrix(), o.F)


@pytest.mark.parametrize("L,N,M,k", small_space_params())
def test_partial_order_axioms(L, N, M, k):
    sp = build_sample_space(L, N, M, k)
    R = sp.reach.toarray().astype(bool)
    assert R.diagonal().all()
    assert not (R & R.T & ~np.eye(len(sp), dtype=bool)).any()
    # transitivity: R composed with R stays inside R
    assert not ((R.astype(int) @ R.astype(int) > 0) & ~R).any()
    assert R[0].all()
    for layer in Layer:
        idx = np.flatnonzero(sp.layers == layer)
        sub = R[np.ix_(idx, idx)]
        assert (sub == np.eye(len(idx), dtype=bool)).all()


@pytest.mark.parametrize("L,N,M,k", small_space_params())
def test_sources_never_isolated(L, N, M, k):
    sp = build_sample_space(L, N, M, k)
    for n, m in itertools.product(range(N), range(M)):
        assert any(s.layer is Layer.RECEIVED for s in sp.upset(source(n, m)))


@pytest.mark.parametrize("L,N,M,k", small_space_params())
def test_model_matrix_nonsingular(L, N, M, k):
    F = build_sample_space(L, N, M, k).model_matrix()
    _, _, U = scipy.linalg.lu(F)
    assert np.abs(np.diag(U)).min() > 1e-10


@settings(max_examples=40, deadline=None)
@given(L=st.integers(2, 3), N=st.integers(1, 3), M=st.integers(1, 4), data=st.data())
def test_leq_upset_downset_consistent(L, N, M, data):
    k = data.draw(st.integers(1, N))
    sp = build_sample_space(L, N, M, k)
    s = data.draw(st.sampled_from(sp.states))
    w = data.draw(st.sampled_from(sp.states))
    assert sp.leq(s, w) == (w in sp.upset(s)) == (s in sp.downset(w))
    assert len(sp) == 1 + n_mixing_states(L, N, k) + N * M + L * M


def test_incidence_rows_are_parameter_rows(space2221):
    R = space2221.reach.toarray()
    np.testing.assert_array_equal(space2221.incidence.toarray(), R[space2221.param_index])


def test_dump_edges(space2221):
    text = space2221.dump_edges()
    assert "bot -> a(0,0)\n" in text
    assert "z(0,0) -> x(1,0)\n" in text
    assert "z(0,0) -> x(0,0)" not in text


@pytest.mark.parametrize("args", [(1, 2, 2, 1), (2, 0, 2, 1), (2, 2, 0, 1), (2, 2, 2, 3), (2, 2, 2, 0),
                                  (2.5, 2, 2, 1)])
def test_invalid_spaces(args):
    with pytest.raises(ValueError):
        build_sample_space(*args)


def test_foreign_state(space2221):
    with pytest.raises(ValueError):
        space2221.leq(source(5, 0), received(0, 0))
