import numpy as np
import pytest
from scipy.stats import unitary_group

from oracles import toeplitz_index_of_monomial, winding_number
from semifinite.errors import IllConditionedError, PreconditionError
from semifinite.index_chern import (
    FredholmPair,
    calderon_index,
    even_cochain,
    even_pairing,
    graded_index,
    hochschild_coboundary,
    hypertrace_check,
    index_along_path,
    intertwiner_trace_check,
    kernel_dimension,
    minimal_even_pairing,
    monomial_trace,
    odd_cochain,
    odd_pairing,
    odd_pairing_ratio,
    tau_index,
)
from semifinite.models import ToeplitzModel, lattice_points, torus_spin_model
from semifinite.trig import TrigPoly

MONOMIALS = [-3, -2, -1, 1, 2, 3]


def z(m, coefficient=1.0):
    return TrigPoly({(m,): coefficient}, 1)


@pytest.mark.parametrize("m", MONOMIALS + [0])
@pytest.mark.parametrize("c", [1.0, 1 / 3])
def test_every_index_route_agrees_on_monomials(m, c):
    expected = c * toeplitz_index_of_monomial(m)
    model = ToeplitzModel(z(m), cutoff=64, c=c)
    assert tau_index(model) == pytest.approx(expected, abs=1e-12)
    pair = FredholmPair.from_toeplitz(model)
    for n in (1, 2):
        assert calderon_index(pair, n) == pytest.approx(expected, abs=1e-8)
    for k in (0, 1):
        assert odd_pairing(z(m), k, c).index == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("method", ["truncated", "doubled"])
@pytest.mark.parametrize("m", [-2, 1, 3])
def test_matrix_routes_of_the_odd_pairing(method, m):
    for k in (0, 1):
        assert odd_pairing(z(m), k, method=method).index == pytest.approx(-m, abs=1e-8)


@pytest.mark.parametrize(
    "coeffs",
    [
        {0: 2.0, 1: 1.0},
        {1: 2.0, 2: 1.0},
        {2: 1.0, -1: 0.3},
        {-1: 1.0, 0: 0.25, 1: 0.1j},
    ],
)
def test_non_monomial_symbols(coeffs):
    u = TrigPoly({(m,): c for m, c in coeffs.items()}, 1)
    expected = -winding_number(coeffs)
    assert tau_index(ToeplitzModel(u, 64)) == pytest.approx(expected)
    pair = FredholmPair.from_toeplitz(ToeplitzModel(u, 64))
    assert calderon_index(pair, 1) == pytest.approx(expected, abs=1e-8)
    assert odd_pairing(u, 1).index == pytest.approx(expected, abs=1e-8)


def test_matrix_valued_symbol_adds_the_diagonal_indices():
    u = TrigPoly({(1,): np.diag([1.0, 0.0]), (-2,): np.diag([0.0, 1.0])}, 1)
    assert tau_index(ToeplitzModel(u, 48)) == pytest.approx(-1 + 2)
    assert odd_pairing(u, 0).index == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("m", [-2, 1, 3])
def test_consecutive_odd_degrees_differ_by_minus_four(m):
    assert odd_pairing_ratio(z(m), 0) == pytest.approx(-4.0)
    assert odd_pairing_ratio(z(m), 1) == pytest.approx(-4.0)


def test_monomial_trace_closed_form():
    # Tr(z^-m [F, z^m]) counts the modes moved across zero, with sign
    for m in range(-4, 5):
        assert monomial_trace([-m, m]) == 2 * m
    assert monomial_trace([1, 1]) == 0


def test_odd_cochain_arity_and_degree():
    phi = odd_cochain(0)
    assert phi(z(-1), z(1)) == pytest.approx(-1.0)
    with pytest.raises(PreconditionError):
        phi(z(1))
    with pytest.raises(PreconditionError):
        odd_pairing(z(1), 0, p=2.0, method="truncated", cutoff=1)


def test_calderon_refuses_low_powers():
    pair = FredholmPair.from_toeplitz(ToeplitzModel(z(1), 32), p=2.0)
    with pytest.raises(PreconditionError):
        calderon_index(pair, 1)
    assert calderon_index(pair, 2) == pytest.approx(-1.0, abs=1e-8)


def test_calderon_on_finite_matrices():
    rng = np.random.default_rng(4)
    T = rng.standard_normal((6, 6))
    S = np.linalg.inv(T)
    assert calderon_index(FredholmPair.from_matrices(T, S), 1) == pytest.approx(0.0, abs=1e-9)


def test_kernel_dimension_gap():
    assert kernel_dimension(np.diag([1.0, 0.5, 0.0])).dimension == 1
    with pytest.raises(IllConditionedError):
        kernel_dimension(np.diag([1.0, 2e-8, 5e-9]))


def test_non_invertible_symbol_is_refused():
    with pytest.raises(PreconditionError):
        odd_pairing(TrigPoly({(0,): 1.0, (1,): 1.0}, 1), 0)


def test_index_is_constant_along_a_homotopy():
    path = [TrigPoly({(1,): 1.0, (0,): t}, 1) for t in np.linspace(0, 0.9, 5)]
    assert index_along_path(path, cutoff=96) == pytest.approx([-1.0] * 5, abs=1e-8)


# -- even pairings on a finite graded model -------------------------------------------


def graded_setup(rank_plus, rank_minus, n=6, seed=0):
    rng = np.random.default_rng(seed)
    U = unitary_group.rvs(n, random_state=rng)
    zero = np.zeros((n, n))
    F = np.block([[zero, U.conj().T], [U, zero]])
    gamma = np.diag(np.r_[np.ones(n), -np.ones(n)])

    def projection(rank):
        q, _ = np.linalg.qr(rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank)))
        return q @ q.conj().T

    e = np.block([[projection(rank_plus), zero], [zero, projection(rank_minus)]])
    return e, F, gamma


@pytest.mark.parametrize("ranks", [(3, 1), (2, 2), (1, 4)])
@pytest.mark.parametrize("c", [1.0, 0.25])
def test_even_pairings_compute_the_graded_index(ranks, c):
    e, F, gamma = graded_setup(*ranks)
    expected = c * (ranks[0] - ranks[1])
    assert graded_index(e, F, gamma, c) == pytest.approx(expected)
    for k in (1, 2, 3):
        assert even_pairing(e, F, gamma, k, c) == pytest.approx(expected, abs=1e-9)
    assert minimal_even_pairing(e, F, gamma, 0, c) == pytest.approx(expected, abs=1e-9)


def test_even_pairing_preconditions():
    e, F, gamma = graded_setup(2, 1)
    with pytest.raises(PreconditionError):
        even_pairing(e, F, gamma, 1, p=2.0)
    with pytest.raises(PreconditionError):
        even_pairing(e + 0.1, F, gamma, 2)
    with pytest.raises(PreconditionError):
        minimal_even_pairing(e, F, gamma, 1)


def test_even_pairing_lifts_to_matrix_projections():
    # F and gamma are lifted as F (x) 1_N, so e (x) q pairs to rank(q) times the index
    e, F, gamma = graded_setup(3, 1)
    assert even_pairing(np.kron(e, np.diag([1.0, 0.0])), F, gamma, 1) == pytest.approx(2.0, abs=1e-9)
    assert even_pairing(np.kron(e, np.eye(2)), F, gamma, 1) == pytest.approx(4.0, abs=1e-9)
    assert graded_index(np.kron(e, np.eye(3)), F, gamma) == pytest.approx(6.0)


# -- cocycle identities ------------------------------------------------------------------


def _random_poly(rng):
    modes = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
    return TrigPoly({m: complex(*rng.standard_normal(2)) for m in modes}, 2)


def test_even_cochain_is_a_hochschild_cocycle_up_to_truncation():
    rng = np.random.default_rng(2)
    args = [_random_poly(rng) for _ in range(6)]
    rel = []
    for radius in (10, 20):
        # degree 4 is the first one above the dimension, where the traces converge
        phi = even_cochain(torus_spin_model(radius), 2)
        total, scale = hochschild_coboundary(phi, args, with_scale=True)
        rel.append(abs(total) / scale)
    assert rel[1] < rel[0]
    assert rel[1] < 1e-5


def test_odd_cochain_coboundary_vanishes_exactly():
    args = [z(1, 2.0) + z(0), z(-1), z(2) + z(-1, 0.5), z(-2), z(1)]
    phi = odd_cochain(1)
    assert abs(hochschild_coboundary(phi, args[:4] + [z(0)])) < 1e-10
    assert abs(hochschild_coboundary(odd_cochain(0), args[:3])) < 1e-10


def test_trace_is_invariant_under_intertwiners():
    rng = np.random.default_rng(7)
    for c in (1.0, 0.4):
        a, b = intertwiner_trace_check(rng, 8, 3, c)
        assert a == pytest.approx(b, rel=1e-9)


def test_hypertrace_on_the_torus():
    radius = 400
    pts = lattice_points(2, radius)
    T = (-1.0) ** (pts[:, 0] + pts[:, 1])
    A = TrigPoly({(0, 0): 1.0, (1, 0): 0.5, (-1, 0): 0.5, (0, 1): 0.25j}, 2)
    res = hypertrace_check(T, A, radius)
    assert res.passed
    scalar = hypertrace_check(2.0, A, radius)
    assert scalar.left.value == pytest.approx(2 * np.pi, rel=5e-3)


def test_hypertrace_with_a_non_diagonal_multiplier():
    from scipy import sparse

    from semifinite.models import multiplication_matrix

    radius = 400
    pts = lattice_points(2, radius)
    signs = sparse.diags((-1.0) ** (pts[:, 0] + pts[:, 1]))
    B = TrigPoly({(0, 0): 1.0, (0, 1): 0.5, (1, -1): 0.3}, 2)
    T = signs @ multiplication_matrix(B, pts) + 1.5 * sparse.identity(len(pts))
    A = TrigPoly({(0, 0): 1.0, (1, 0): 0.5, (-1, 0): 0.5}, 2)
    res = hypertrace_check(T, A, radius)
    assert res.passed, res.to_dict()
    # only the identity part survives: 1.5 * mean(A) * pi
    assert res.left.value == pytest.approx(1.5 * np.pi, abs=res.left.error_band + 1e-3)
