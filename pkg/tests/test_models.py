import itertools
import math

import numpy as np
import pytest

from oracles import gauss_circle_count
from semifinite.errors import PreconditionError
from semifinite.limiting import dixmier_trace
from semifinite.models import (
    ToeplitzModel,
    WeightedMatrixAlgebra,
    band_matrix,
    circle_dirac,
    doubling,
    even_from_odd,
    foliated_family,
    lattice_norm_counts,
    lattice_points,
    multiplication_matrix,
    sign_commutator_rank,
    sphere_volume,
    torus_model,
    torus_spin_model,
    unit_ball_volume,
)
from semifinite.trig import TrigPoly


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_lattice_norm_counts_match_enumeration(p):
    radius = {1: 30, 2: 12, 3: 6, 4: 4}[p]
    n, counts = lattice_norm_counts(p, radius)
    brute = {}
    for k in itertools.product(range(-radius, radius + 1), repeat=p):
        s = sum(x * x for x in k)
        if s <= radius * radius:
            brute[s] = brute.get(s, 0) + 1
    assert dict(zip(n.tolist(), counts.tolist())) == brute


def test_ball_and_sphere_volumes():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert sphere_volume(2) == pytest.approx(2 * math.pi)
    assert sphere_volume(3) == pytest.approx(4 * math.pi)


def test_circle_model():
    m = circle_dirac(5)
    assert m.eigenvalues.tolist() == list(range(-5, 6))
    assert m.kernel_weight == 1
    assert m.sign().tolist() == [-1] * 5 + [1] * 6
    big = circle_dirac(200)
    assert len(big.operator_spectrum("drop")) == 200
    assert big.operator_spectrum("regularize").values.min() == 1.0
    with pytest.raises(PreconditionError):
        m.operator_spectrum("ignore")


def test_torus_models_carry_multiplicities():
    lap = torus_model(2, "laplacian", 30)
    assert lap.weights.sum() == gauss_circle_count(30)
    dirac = torus_model(2, "dirac", 30)
    assert dirac.weights.sum() == 2 * gauss_circle_count(30)
    assert dirac.even and set(np.unique(dirac.grading)) == {-1, 1}
    assert dirac.tail.c == pytest.approx(2 * math.pi) and dirac.tail.d == 2
    with pytest.raises(PreconditionError):
        torus_model(5, "laplacian", 3)


def test_foliated_trace_is_linear_in_the_transverse_mass(torus_laplacian):
    leaf_spec = torus_laplacian.resolvent_spectrum()
    one = foliated_family(torus_laplacian, [0.2, 0.3, 0.5]).spectrum(lambda m: m.resolvent_spectrum())
    assert np.array_equal(one.weights, leaf_spec.weights)
    fam = foliated_family(torus_laplacian, [0.5, 0.75, 1.25])
    scaled = fam.spectrum(lambda m: m.resolvent_spectrum())
    np.testing.assert_array_equal(scaled.weights, leaf_spec.weights * 2.5)
    assert fam.trace([1.0, 2.0, 4.0]) == pytest.approx(0.5 + 1.5 + 5.0)
    with pytest.raises(PreconditionError):
        foliated_family(torus_laplacian, [1.0, -1.0])


def test_mixed_leaves_merge_by_direct_sum():
    a, b = circle_dirac(1000), circle_dirac(1000)
    fam = foliated_family(a, [1.0])
    mixed = type(fam)(((0.5, a), (1.5, b)))
    spec = mixed.spectrum(lambda m: m.resolvent_spectrum())
    assert spec.total_weight == pytest.approx(2.0 * 2001)
    assert spec.tail.c == pytest.approx(2.0 * 2.0)


def test_weighted_matrix_algebra():
    alg = WeightedMatrixAlgebra(4, 0.25)
    rng = np.random.default_rng(0)
    x = alg.random(rng, rank=2)
    assert np.linalg.matrix_rank(x) == 2
    spec = alg.spectrum(x)
    # zero singular values keep their weight: the algebra has total trace n c
    assert spec.total_weight == pytest.approx(1.0)
    assert spec.total_mass == pytest.approx(0.25 * np.linalg.svd(x, compute_uv=False).sum())
    u = alg.random_unitary(rng)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
    assert alg.trace_norm(u) == pytest.approx(1.0)


def test_doubling_structure():
    dbl = doubling(circle_dirac(4))
    F = dbl.F
    np.testing.assert_allclose(F @ F, np.eye(F.shape[0]))
    np.testing.assert_allclose(F, F.T)
    assert dbl.dim_kernel == 1 and dbl.dim_h == 9
    rng = np.random.default_rng(1)
    a = rng.standard_normal((9, 9))
    assert dbl.defect_check(a) < 1e-12


def test_even_from_odd_grading():
    F = np.diag(np.sign(np.arange(-3, 4) + 0.5))
    model = even_from_odd(F)
    np.testing.assert_allclose(model.F @ model.gamma, -model.gamma @ model.F)
    with pytest.raises(PreconditionError):
        type(model)(np.eye(2) * 2, np.diag([1.0, -1.0]))


def test_lattice_points_and_multiplication():
    pts = lattice_points(2, 2)
    assert len(pts) == gauss_circle_count(2)
    assert tuple(pts[0]) == (0, 0)
    a = TrigPoly({(1, 0): 2.0, (0, -1): 1j}, 2)
    M = multiplication_matrix(a, pts).toarray()
    idx = {tuple(k): i for i, k in enumerate(pts.tolist())}
    assert M[idx[(1, 0)], idx[(0, 0)]] == 2.0
    assert M[idx[(0, -1)], idx[(0, 0)]] == 1j
    assert M[idx[(2, 0)], idx[(1, 0)]] == 2.0


def test_torus_spin_model_is_odd_and_involutive():
    m = torus_spin_model(6)
    F, g = m.F.toarray(), m.gamma.toarray()
    np.testing.assert_allclose(F @ F, np.eye(m.dim), atol=1e-12)
    np.testing.assert_allclose(F @ g, -g @ F, atol=1e-12)
    D = m.D.toarray()
    np.testing.assert_allclose(D, D.conj().T)
    ev = np.sort(np.abs(np.linalg.eigvalsh(D)))
    norms = np.sort(np.repeat(np.hypot(m.points[:, 0], m.points[:, 1]), 2))
    np.testing.assert_allclose(ev, norms, atol=1e-12)


def test_band_matrix_entries():
    u = TrigPoly({(1,): 2.0, (-2,): 3.0}, 1)
    B = band_matrix(u, np.arange(0, 5), np.arange(0, 5))
    expected = np.zeros((5, 5))
    for j in range(5):
        for k in range(5):
            expected[j, k] = {1: 2.0, -2: 3.0}.get(j - k, 0.0)
    np.testing.assert_array_equal(B, expected)
    assert B.dtype == float


def test_toeplitz_model_truncations():
    model = ToeplitzModel(TrigPoly({(1,): 1.0}, 1), cutoff=8)
    tall = model.tall()
    assert tall.shape == (10, 9)
    assert np.linalg.matrix_rank(tall) == 9
    T, S = model.square(8)
    np.testing.assert_array_equal(S, T.T)
    with pytest.raises(PreconditionError):
        ToeplitzModel(TrigPoly({(0,): 1.0, (1,): 1.0}, 1)).inverse_symbol


@pytest.mark.parametrize("m", [-3, -1, 1, 2])
def test_sign_commutator_rank_of_a_shift(m):
    assert sign_commutator_rank(TrigPoly({(m,): 1.0}, 1)) == abs(m)


def test_harmonic_profile_through_the_model_layer():
    from semifinite.models import synthetic_spectrum

    assert dixmier_trace(synthetic_spectrum(1.0, t_max=1e6)).value == pytest.approx(1.0, abs=1e-3)
