import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import linalg

from circle_pattern import CellComplex, CurvatureState, WeightedEdge, jacobian, potential, total_curvature
from circle_pattern.curvature import bigon_areas, curvature_from_k
from circle_pattern.generators import random_complex, random_start, random_stratum_k

from conftest import complexes
from oracles import BEACH_INTERIOR_L, BEACH_STRATUM_L, FIXTURES, naive_total_curvature


@st.composite
def states(draw, pinned=False, max_faces=6):
    c = draw(complexes(max_faces=max_faces))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    if pinned and c.num_faces > 1:
        size = draw(st.integers(1, c.num_faces - 1))
        support = sorted(rng.choice(c.num_faces, size=size, replace=False).tolist())
        k = random_stratum_k(rng, c.num_faces, support)
    else:
        k = random_start(rng, c.num_faces, spread=2.0)
    return CurvatureState(c, k)


def test_beach_ball_interior(ball):
    L = total_curvature(CurvatureState(ball, [1.0, 1.0]))
    assert L == pytest.approx([BEACH_INTERIOR_L] * 2, abs=1e-14)
    assert L[0] == pytest.approx(2 * FIXTURES["quarter_quarter_third"][1]["L1"], abs=1e-14)


def test_beach_ball_stratum(ball):
    L = total_curvature(CurvatureState(ball, [1.0, 0.0]))
    assert L[0] == pytest.approx(BEACH_STRATUM_L, abs=1e-14)
    assert L[1] == 0.0


def test_all_pinned(ball):
    assert list(total_curvature(CurvatureState(ball, [0.0, 0.0]))) == [0.0, 0.0]
    with pytest.raises(ValueError, match="pinned"):
        jacobian(CurvatureState(ball, [0.0, 0.0]))


def test_state_validation(ball):
    for bad in ([1.0], [1.0, -1.0], [np.inf, 1.0], [np.nan, 1.0]):
        with pytest.raises(ValueError):
            CurvatureState(ball, bad)


def test_state_views(ball):
    s = CurvatureState.from_radii(ball, [math.pi / 4, math.pi / 2])
    assert s.k[1] == 0.0 and s.k[0] == pytest.approx(1.0)
    assert s.pinned == {1} and s.active == (0,)
    assert s.K[1] == -np.inf
    assert s.r[1] == math.pi / 2
    assert CurvatureState.from_log(ball, [0.0, 0.0]).k.tolist() == [1.0, 1.0]
    with pytest.raises(ValueError):
        CurvatureState.from_radii(ball, [0.0, 1.0])


def test_self_adjacent_edge_counts_both_sides():
    c = CellComplex(2, (WeightedEdge(0, 0, 0, 0.8), WeightedEdge(1, 0, 1, 0.6)))
    k = np.array([0.7, 1.3])
    L = total_curvature(CurvatureState(c, k))
    assert L == pytest.approx(naive_total_curvature(c, np.arctan2(1.0, k)), abs=1e-13)


def test_jacobian_beach_ball(ball):
    M = jacobian(CurvatureState(ball, [1.0, 1.0]))
    assert M.shape == (2, 2)
    assert np.all(np.linalg.eigvalsh(M) > 0)
    assert M[0, 1] < 0 and M[1, 0] < 0
    assert abs(M[0, 0]) > abs(M[1, 0])


def test_jacobian_matches_fd_of_total_curvature(ball):
    k = np.array([0.8, 1.7])
    M = jacobian(CurvatureState(ball, k))
    h = 1e-5
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        Lp = total_curvature(CurvatureState(ball, k * np.exp(e)))
        Lm = total_curvature(CurvatureState(ball, k * np.exp(-e)))
        assert M[:, j] == pytest.approx((Lp - Lm) / (2 * h), abs=1e-7)


def test_jacobian_zero_for_non_neighbours():
    c = CellComplex(3, (WeightedEdge(0, 0, 1, 0.5), WeightedEdge(1, 1, 2, 0.7),
                        WeightedEdge(2, 1, 1, 0.3)))
    M = jacobian(CurvatureState(c, [1.0, 0.6, 2.0]))
    assert M[0, 2] == 0.0 and M[2, 0] == 0.0


def test_jacobian_single_active_face(ball):
    M = jacobian(CurvatureState(ball, [1.0, 0.0]))
    assert M.shape == (1, 1) and M[0, 0] > 0


def test_potential_examples(ball):
    s = CurvatureState(ball, [1.0, 1.0])
    assert potential(s, s) == 0.0
    t = CurvatureState.from_log(ball, [0.1, 0.1])
    assert potential(s, t) > 0
    with pytest.raises(ValueError, match="pinned"):
        potential(s, CurvatureState(ball, [1.0, 0.0]))


@given(states())
def test_matches_naive_sum(state):
    L = total_curvature(state)
    ref = naive_total_curvature(state.complex, state.r)
    assert L == pytest.approx(ref, abs=1e-12)


@given(states(pinned=True))
def test_pinned_faces_carry_zero(state):
    L = total_curvature(state)
    assert np.all(L >= 0)
    assert set(np.flatnonzero(L == 0).tolist()) == state.pinned


@given(states())
def test_global_edge_budget(state):
    c = state.complex
    L = total_curvature(state)
    areas = bigon_areas(c, state.k)
    assert np.all(areas > 0)
    assert math.fsum(L) == pytest.approx(math.fsum(2 * c.weights - areas), abs=1e-12)
    assert math.fsum(L) < 2 * math.fsum(c.weights)


def _image_ok(c, L, support):
    for size in range(1, len(support) + 1):
        for sub in itertools.combinations(support, size):
            s = set(sub)
            rhs = 2 * math.fsum(e.weight for e in c.edges if e.face_a in s or e.face_b in s)
            if not math.fsum(L[f] for f in sub) < rhs:
                return False
    return True


@given(states(max_faces=12))
def test_feasibility_image(state):
    L = total_curvature(state)
    assert _image_ok(state.complex, L, list(range(state.complex.num_faces)))


@given(states(pinned=True))
def test_reduced_image(state):
    L = total_curvature(state)
    assert _image_ok(state.complex, L, list(state.active))


def _check_structure(M):
    off = M - np.diag(np.diag(M))
    assert np.all(np.diag(M) > 0)
    assert np.all(off <= 0)
    assert np.all(np.diag(M) > np.sum(np.abs(off), axis=0))
    linalg.cho_factor(M)


@given(states())
def test_jacobian_structure(state):
    _check_structure(jacobian(state))


@given(states(pinned=True))
def test_reduced_jacobian_structure(state):
    M = jacobian(state)
    assert M.shape == (len(state.active),) * 2
    _check_structure(M)


@given(states())
def test_jacobian_symmetric_before_symmetrisation(state):
    # raw FD columns against FD of total curvature itself
    c, k = state.complex, state.k
    n = c.num_faces
    h = 1e-6
    raw = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        raw[:, j] = (curvature_from_k(c, k * np.exp(e)) - curvature_from_k(c, k * np.exp(-e))) / (2 * h)
    assert np.max(np.abs(raw - raw.T)) < 1e-6
    assert np.max(np.abs(raw - jacobian(state))) < 1e-6


@given(states(), st.integers(0, 2**32 - 1))
def test_potential_gradient(state, seed):
    # central differences of the potential give L
    c = state.complex
    K = state.K
    h = 1e-3
    i = int(np.random.default_rng(seed).integers(c.num_faces))
    e = np.zeros(c.num_faces)
    e[i] = h
    lo = CurvatureState.from_log(c, K - e)
    hi = CurvatureState.from_log(c, K + e)
    g = potential(lo, hi) / (2 * h)
    assert g == pytest.approx(total_curvature(state)[i], abs=1e-6)


@given(states(), st.integers(0, 2**32 - 1))
def test_closedness(state, seed):
    rng = np.random.default_rng(seed)
    c = state.complex
    a = state
    b = CurvatureState(c, random_start(rng, c.num_faces, spread=2.0))
    m = CurvatureState(c, random_start(rng, c.num_faces, spread=2.0))
    direct = potential(a, b)
    assert abs(direct - (potential(a, m) + potential(m, b))) < 2e-9
    assert potential(b, a) == pytest.approx(-direct, abs=1e-10)


def test_curvature_is_deterministic():
    rng = np.random.default_rng(5)
    c = random_complex(rng)
    k = random_start(rng, c.num_faces)
    assert curvature_from_k(c, k).tobytes() == curvature_from_k(c, k.copy()).tobytes()
