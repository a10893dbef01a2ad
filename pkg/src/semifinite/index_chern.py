"""Real-valued Fredholm indices, Calderon traces and Chern character pairings."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import IllConditionedError, IndeterminateError, PreconditionError
from .limiting import LimitEstimate, LimitProcessConfig, log_grid, omega_limit
from .models.matrix import Doubling, TorusSpinModel, doubling, lattice_points, multiplication_matrix
from .models.toeplitz import ToeplitzModel, band_matrix
from .trig import TrigPoly

KERNEL_THRESHOLD = 1e-8
GAP_RATIO = 1e3


# -- kernel dimensions ------------------------------------------------------------------


@dataclass(frozen=True)
class KernelReport:
    dimension: int
    threshold: float
    largest_below: float
    smallest_above: float
    gap_ratio: float


def kernel_dimension(matrix, *, rel_threshold: float = KERNEL_THRESHOLD, gap: float = GAP_RATIO) -> KernelReport:
    """Dimension of the null space of ``matrix`` (columns are the domain).

    Singular values below ``rel_threshold * ||matrix||`` count as zero; the
    call fails unless the spectrum has a gap of ``gap`` across the threshold.
    """
    matrix = np.asarray(matrix)
    rows, cols = matrix.shape
    if cols == 0:
        return KernelReport(0, 0.0, 0.0, math.inf, math.inf)
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size < cols:
        s = np.concatenate((s, np.zeros(cols - s.size)))
    top = float(s.max()) if s.size else 0.0
    if top == 0.0:
        return KernelReport(cols, 0.0, 0.0, math.inf, math.inf)
    thr = rel_threshold * top
    below, above = s[s < thr], s[s >= thr]
    small = float(above.min())
    big_below = float(below.max()) if below.size else 0.0
    ratio = small / big_below if big_below > 0 else (small / thr if below.size == 0 else math.inf)
    report = KernelReport(int(below.size), thr, big_below, small, ratio)
    if ratio <= gap:
        raise IllConditionedError(
            f"singular values cluster at the kernel threshold (gap ratio {ratio:.3g} <= {gap:g})",
            report.__dict__,
        )
    return report


def tau_index(T, c: Optional[float] = None, *, check_doubling: bool = True) -> float:
    """``c * (dim ker T - dim ker T*)``.

    ``T`` is a :class:`ToeplitzModel` (kernels counted on tall truncations at
    cutoffs ``M`` and ``2M``, which must agree) or a matrix.
    """
    if isinstance(T, ToeplitzModel):
        scale = T.c if c is None else float(c)
        dims = []
        cutoffs = (T.cutoff, 2 * T.cutoff) if check_doubling else (T.cutoff,)
        for m in cutoffs:
            k = kernel_dimension(T.tall(m)).dimension
            k_star = kernel_dimension(T.tall(m, adjoint=True)).dimension
            dims.append((k, k_star))
        if len(set(dims)) != 1:
            raise IndeterminateError("kernel dimensions change under cutoff doubling", {"dims": dims})
        k, k_star = dims[0]
        return scale * (k - k_star)
    matrix = np.asarray(T)
    scale = 1.0 if c is None else float(c)
    return scale * (kernel_dimension(matrix).dimension - kernel_dimension(matrix.conj().T).dimension)


# -- Calderon formula ----------------------------------------------------------------------


def schatten_norm(x, p: float) -> float:
    s = np.linalg.svd(np.asarray(x), compute_uv=False)
    if math.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s ** p) ** (1.0 / p))


@dataclass
class FredholmPair:
    """``(T, S)`` with remainders ``A = 1 - S T`` and ``B = 1 - T S``, trace ``c * Tr``.

    Attributes:
        A, B: remainder matrices (already restricted to the working block).
        p: declared summability exponent of the remainders.
        c: trace scale.
        stability: remainder norms at the working cutoff and at its double.
    """

    A: np.ndarray
    B: np.ndarray
    p: float = 1.0
    c: float = 1.0
    stability: dict = field(default_factory=dict)

    @classmethod
    def from_matrices(cls, T, S, p: float = 1.0, c: float = 1.0) -> "FredholmPair":
        T, S = np.asarray(T), np.asarray(S)
        if T.shape[0] != T.shape[1] or S.shape != T.shape[::-1]:
            raise PreconditionError("T and S must be square and of matching shape")
        n = T.shape[0]
        return cls(np.eye(n) - S @ T, np.eye(n) - T @ S, p, c)

    @classmethod
    def from_toeplitz(cls, model: ToeplitzModel, p: float = 1.0, *, tol: float = 1e-8,
                      check_doubling: bool = True) -> "FredholmPair":
        """Remainders on modes ``0..M`` from square truncations wide enough to be exact there."""
        A, B = _toeplitz_remainders(model, model.cutoff)
        stab = {"cutoff": model.cutoff, "norm_A": schatten_norm(A, p), "norm_B": schatten_norm(B, p)}
        if check_doubling:
            A2, B2 = _toeplitz_remainders(model, 2 * model.cutoff)
            stab.update(norm_A_doubled=schatten_norm(A2, p), norm_B_doubled=schatten_norm(B2, p))
            drift = max(abs(stab["norm_A"] - stab["norm_A_doubled"]), abs(stab["norm_B"] - stab["norm_B_doubled"]))
            stab["drift"] = drift
            if drift > tol * max(1.0, stab["norm_A"], stab["norm_B"]):
                raise PreconditionError(f"remainders are not cutoff-stable (drift {drift:.3g}); summability not established")
        return cls(A, B, p, model.c, stab)


def _toeplitz_remainders(model: ToeplitzModel, m: int):
    big = m + model.bandwidth + model.parametrix_bandwidth()
    T, S = model.square(big, fmt="csr")
    n = (m + 1) * model.size
    eye = np.eye(n)
    A = eye - (S @ T)[:n, :n].toarray()
    B = eye - (T @ S)[:n, :n].toarray()
    return A, B


def calderon_index(pair: FredholmPair, n: int) -> float:
    """``c * (Tr A^n - Tr B^n)``; refused for ``n < p``."""
    if int(n) != n or n < 1:
        raise PreconditionError("power must be a positive integer")
    if n < pair.p:
        raise PreconditionError(f"power {n} is below the summability exponent {pair.p:g}")
    An = np.linalg.matrix_power(pair.A, int(n))
    Bn = np.linalg.matrix_power(pair.B, int(n))
    value = pair.c * (np.trace(An) - np.trace(Bn))
    if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
        raise IndeterminateError("Calderon trace has a non-negligible imaginary part", {"value": [value.real, value.imag]})
    return float(value.real)


# -- odd pairing on the circle ------------------------------------------------------------


def _sign(n):
    return 1 if n >= 0 else -1


def monomial_trace(modes: Sequence[int]) -> int:
    """``Tr(e^{i m0 x}[F, e^{i m1 x}] ... [F, e^{i mn x}])`` on ``L^2(S^1)``, ``F = +1`` on modes ``>= 0``.

    Exact integer; zero unless the modes sum to zero.
    """
    modes = [int(m) for m in modes]
    if sum(modes) != 0:
        return 0
    reach = sum(abs(m) for m in modes) + 1
    total = 0
    for start in range(-reach, reach + 1):
        level = start
        prod = 1
        for m in reversed(modes[1:]):
            prod *= _sign(level + m) - _sign(level)
            if prod == 0:
                break
            level += m
        total += prod
    return total


def _contract(args: Sequence[TrigPoly], scalar_fn: Callable[[Sequence[int]], complex]) -> complex:
    """``sum over Fourier modes of scalar_fn(modes) * Tr(C0 C1 ... Cn)`` (tensor contraction with ``Tr``)."""
    supports = [list(a.coeffs.items()) for a in args]
    matrix = args[0].matrix_size is not None
    total = 0j
    # prune to mode tuples summing to zero
    remaining = [0] * (len(supports) + 1)
    for i in range(len(supports) - 1, -1, -1):
        ms = [k[0] for k, _ in supports[i]]
        remaining[i] = remaining[i + 1] + max(abs(min(ms)), abs(max(ms)))

    def walk(i, acc_modes, acc_coef, running):
        nonlocal total
        if abs(running) > remaining[i]:
            return
        if i == len(supports):
            if running == 0:
                val = scalar_fn(acc_modes)
                if val:
                    coef = np.trace(acc_coef) if matrix else acc_coef
                    total += val * coef
            return
        for (m,), c in supports[i]:
            nxt = c if acc_coef is None else (acc_coef @ c if matrix else acc_coef * c)
            walk(i + 1, acc_modes + [m], nxt, running + m)

    walk(0, [], None, 0)
    return total


def odd_cochain(k: int, c: float = 1.0) -> Callable:
    """``phi_{2k+1}(a0, ..., a_{2k+1}) = -(1/2^{2k+1}) c Tr(a0 [F,a1] ... [F,a_{2k+1}])`` on the circle.

    Evaluated exactly by contracting Fourier monomials (matrix coefficients
    are contracted with ``Tr``).
    """
    if k < 0:
        raise PreconditionError("degree k must be >= 0")
    norm = -c / 2.0 ** (2 * k + 1)

    def phi(*args):
        if len(args) != 2 * k + 2:
            raise PreconditionError(f"phi_{2 * k + 1} takes {2 * k + 2} arguments")
        return norm * _contract(args, monomial_trace)

    return phi


def _odd_arguments(u: TrigPoly, k: int):
    uinv = u.inverse()
    return [uinv, u] * (k + 1), uinv


@dataclass
class OddPairing:
    """Odd pairing of an invertible symbol with the circle's sign operator.

    ``raw`` is the literal cochain value ``phi_{2k+1}(u^-1, u, ..., u^-1, u)``.
    ``index`` multiplies it by ``(-1)^k`` so that every degree computes the
    same index.
    """

    k: int
    raw: float
    index: float
    trace: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {"k": self.k, "raw": self.raw, "index": self.index, "trace": self.trace, "method": self.method,
                "diagnostics": self.diagnostics}


def _check_odd_degree(k: int, p: float, finite_rank: bool):
    if k < 0 or int(k) != k:
        raise PreconditionError("degree k must be a non-negative integer")
    if 2 * k + 1 < p and not finite_rank:
        raise PreconditionError(f"degree 2k+1 = {2 * k + 1} is below the summability exponent {p:g}")


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-8 * max(1.0, abs(value.real)):
        raise IndeterminateError(f"{what} has a non-negligible imaginary part", {"value": [value.real, value.imag]})
    return float(value.real)


def odd_pairing(u: TrigPoly, k: int, c: float = 1.0, *, p: float = 1.0, method: str = "exact",
                cutoff: Optional[int] = None) -> OddPairing:
    """Pairing of ``u`` with ``phi_{2k+1}``.

    ``method="exact"`` contracts Fourier monomials with closed-form traces;
    ``"truncated"`` multiplies matrices on modes ``[-K, K]``; ``"doubled"``
    uses the enlarged space with ``F = F1 + V``, the algebra acting as
    ``a (+) 0`` and ``u`` entering through the unitization as ``u (+) 1``.
    """
    if u.p != 1:
        raise PreconditionError("odd pairing is implemented on the circle")
    if u.min_modulus() <= 1e-10 * max(1.0, max(np.abs(np.asarray(v)).max() for v in u.coeffs.values())):
        raise PreconditionError("u is not invertible on the circle")
    _check_odd_degree(k, p, finite_rank=True)
    args, uinv = _odd_arguments(u, k)
    norm = -1.0 / 2.0 ** (2 * k + 1)
    if method == "exact":
        trace = _contract(args, monomial_trace)
        diag = {}
    elif method in ("truncated", "doubled"):
        reach = sum(max(abs(m) for (m,) in a.coeffs) for a in args)
        K = int(cutoff) if cutoff is not None else 2 * reach + 8
        if K <= reach:
            raise PreconditionError(f"cutoff {K} too small for total bandwidth {reach}")
        modes = np.arange(-K, K + 1)
        size = u.matrix_size or 1
        F = np.repeat(np.where(modes >= 0, 1.0, -1.0), size)
        mats = [band_matrix(a, modes, modes) for a in args]
        diag = {"cutoff": K}
        if method == "doubled":
            dbl = doubling(np.repeat(modes.astype(float), size))
            F = dbl.F
            # the adjoined unit of the unitization acts as the identity on the extra copy
            unit = np.diag(np.r_[np.zeros(dbl.dim_h), np.ones(dbl.dim_kernel)])
            mats = [dbl.embed(m) + unit for m in mats]
            diag["kernel_dimension"] = dbl.dim_kernel
            F_mat = F
        else:
            F_mat = np.diag(F)
        prod = mats[0]
        for a in mats[1:]:
            prod = prod @ (F_mat @ a - a @ F_mat)
        trace = np.trace(prod)
    else:
        raise PreconditionError("method must be 'exact', 'truncated' or 'doubled'")
    raw = _real(c * norm * trace, "odd pairing")
    return OddPairing(k, raw, (-1) ** k * raw, _real(c * trace, "trace"), method, diag)


def odd_pairing_ratio(u: TrigPoly, k: int, c: float = 1.0) -> float:
    """Ratio of unnormalized traces ``Tr_{k+1} / Tr_k`` between consecutive degrees."""
    a = odd_pairing(u, k, c)
    b = odd_pairing(u, k + 1, c)
    if a.trace == 0:
        return math.nan
    return b.trace / a.trace


# -- even pairing --------------------------------------------------------------------------


def _lift(F, N):
    return np.kron(np.asarray(F), np.eye(N))


def _check_projection(e, tol=1e-10):
    e = np.asarray(e)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        raise PreconditionError("projection must be a square matrix")
    err = max(np.abs(e @ e - e).max(initial=0), np.abs(e - e.conj().T).max(initial=0))
    if err > tol:
        raise PreconditionError(f"e is not a self-adjoint projection (defect {err:.3g})")
    return e


def _dense(x):
    return x.toarray() if hasattr(x, "toarray") else np.asarray(x)


def _even_setup(e, F, gamma):
    e = _check_projection(_dense(e))
    F, gamma = _dense(F), _dense(gamma)
    n = F.shape[0]
    if gamma.shape != F.shape or e.shape[0] % n:
        raise PreconditionError("projection size must be a multiple of the model size")
    N = e.shape[0] // n
    return e, _lift(F, N), _lift(gamma, N)


def even_pairing(e, F, gamma, k: int, c: float = 1.0, *, p: float = 0.0) -> float:
    """``(-1)^k c Tr(gamma e [F,e]^{2k})`` with ``F, gamma`` lifted by ``1_N``; refused for ``k <= p/2``."""
    if k <= p / 2:
        raise PreconditionError(f"degree k = {k} must exceed p/2 = {p / 2:g}")
    e, FN, gN = _even_setup(e, F, gamma)
    comm = FN @ e - e @ FN
    value = (-1) ** k * c * np.trace(gN @ e @ np.linalg.matrix_power(comm, 2 * k))
    return _real(value, "even pairing")


def minimal_even_pairing(e, F, gamma, p: int, c: float = 1.0) -> float:
    """Minimal-degree evaluator ``((-1)^{p/2} / 2) c Tr(gamma F [F,e]^{p+1})``."""
    if p % 2 or p < 0:
        raise PreconditionError("minimal even cocycle needs an even p >= 0")
    e, FN, gN = _even_setup(e, F, gamma)
    comm = FN @ e - e @ FN
    value = (-1) ** (p // 2) / 2.0 * c * np.trace(gN @ FN @ np.linalg.matrix_power(comm, p + 1))
    return _real(value, "minimal even pairing")


def graded_index(e, F, gamma, c: float = 1.0) -> float:
    """Index of ``e_- F e_+ : e_+ H -> e_- H`` by kernel counting."""
    e, FN, gN = _even_setup(e, F, gamma)
    bases = []
    for sign in (1.0, -1.0):
        part = e @ (np.eye(e.shape[0]) + sign * gN) / 2.0
        part = (part + part.conj().T) / 2.0
        w, v = np.linalg.eigh(part)
        bases.append(v[:, w > 0.5])
    Qp, Qm = bases
    X = Qm.conj().T @ FN @ Qp
    return c * (kernel_dimension(X).dimension - kernel_dimension(X.conj().T).dimension)


# -- cocycle input ----------------------------------------------------------------------


@dataclass
class CocycleInput:
    """Data for one pairing: a projection (even) or an invertible symbol (odd)."""

    kind: str
    k: int
    F: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    e: Optional[np.ndarray] = None
    u: Optional[TrigPoly] = None
    c: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        if self.kind == "even":
            if self.e is None or self.F is None or self.gamma is None:
                raise PreconditionError("even pairing needs e, F and gamma")
            _check_projection(self.e)
        elif self.kind == "odd":
            if self.u is None:
                raise PreconditionError("odd pairing needs a symbol u")
        else:
            raise PreconditionError("kind must be 'even' or 'odd'")

    def evaluate(self) -> float:
        if self.kind == "even":
            return even_pairing(self.e, self.F, self.gamma, self.k, self.c, p=self.p)
        return odd_pairing(self.u, self.k, self.c, p=self.p).index


# -- hypertrace --------------------------------------------------------------------------


@dataclass
class HypertraceResult:
    left: LimitEstimate
    right: LimitEstimate
    residual: float
    band: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.band

    def to_dict(self):
        return {"AT": self.left.to_dict(), "TA": self.right.to_dict(), "residual": self.residual, "band": self.band}


def hypertrace_check(T, A: TrigPoly, radius: int = 400, config: Optional[LimitProcessConfig] = None) -> HypertraceResult:
    """Compare the generalized limits of ``Tr(X E_{1/t}(R) R)/log(1+t)`` for ``X = AT`` and ``X = TA``.

    ``R = (1+Delta)^-1`` on the scalar lattice ``|k| <= radius`` of ``T^2``.
    ``T`` is a diagonal (array or scalar) or a sparse/dense matrix on that
    lattice; ``A`` multiplies by a trigonometric polynomial.
    """
    from scipy import sparse

    config = config or LimitProcessConfig()
    if A.p != 2:
        raise PreconditionError("hypertrace check runs on the 2-torus")
    points = lattice_points(2, radius)
    n = points.shape[0]
    Am = multiplication_matrix(A, points)
    if np.isscalar(T):
        Tm = sparse.identity(n, format="csr", dtype=complex) * T
    elif np.ndim(T) == 1:
        if len(T) != n:
            raise PreconditionError("diagonal T must have one entry per lattice point")
        Tm = sparse.diags(np.asarray(T, dtype=complex), format="csr")
    else:
        Tm = sparse.csr_matrix(T)
    eig = 1.0 + np.sum(points * points, axis=1)
    r = 1.0 / eig
    grid = log_grid(eig.max(), 1.0, config.points_per_decade)
    # points are sorted by norm: E_{1/t}(R) keeps the prefix with 1 + |k|^2 < t
    count = np.searchsorted(eig, grid, side="left")
    results = []
    for X in (Am @ Tm, Tm @ Am):
        diag = np.asarray(X.diagonal())
        partial = np.concatenate(([0.0], np.cumsum(diag * r)))
        vals = partial[count]
        if np.abs(vals.imag).max(initial=0) > 1e-9 * max(1.0, np.abs(vals.real).max(initial=0)):
            est_im = omega_limit(grid, vals.imag / np.log1p(grid), config)
            if abs(est_im.value) > est_im.error_band + config.tol:
                raise IndeterminateError("imaginary part of the truncated trace does not vanish", est_im.to_dict())
        results.append(omega_limit(grid, vals.real / np.log1p(grid), config))
    left, right = results
    return HypertraceResult(left, right, abs(left.value - right.value), left.error_band + right.error_band)


# -- cocycle and trace identities -----------------------------------------------------------


def even_cochain(model: TorusSpinModel, k: int, c: float = 1.0) -> Callable:
    """``phi_{2k}(a0..a_{2k}) = (-1)^k c Tr(gamma a0 [F,a1]...[F,a_{2k}])`` on a truncated torus spin model."""
    F, gamma = model.F, model.gamma

    def phi(*args):
        if len(args) != 2 * k + 1:
            raise PreconditionError(f"phi_{2 * k} takes {2 * k + 1} arguments")
        mats = [model.multiplication(a) for a in args]
        prod = gamma @ mats[0]
        for m in mats[1:]:
            prod = prod @ (F @ m - m @ F)
        return (-1) ** k * c * complex(prod.diagonal().sum())

    return phi


def hochschild_coboundary(phi: Callable, args: Sequence[TrigPoly], *, with_scale: bool = False):
    """``(b phi)(a0, ..., a_{n+1})`` for a cochain of ``n + 1`` arguments.

    With ``with_scale=True`` also returns the sum of the absolute values of
    the individual terms, the yardstick for how much cancellation happened.
    """
    args = list(args)
    n = len(args) - 2
    terms = []
    for j in range(n + 1):
        merged = args[:j] + [args[j] * args[j + 1]] + args[j + 2:]
        terms.append((-1) ** j * phi(*merged))
    terms.append((-1) ** (n + 1) * phi(*([args[-1] * args[0]] + args[1:-1])))
    total = complex(sum(terms))
    if with_scale:
        return total, float(sum(abs(t) for t in terms))
    return total


def intertwiner_trace_check(rng: np.random.Generator, n: int, rank: int, c: float = 1.0):
    """Random projections ``e, f`` of equal rank, an injective ``V: eH -> fH`` and ``B = V A V^-1``.

    Returns ``(tau(A), tau(B))`` with ``tau = c Tr``.
    """
    if not 1 <= rank <= n:
        raise PreconditionError("rank must be in [1, n]")

    def random_projection():
        q, _ = np.linalg.qr(rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank)))
        return q

    qe, qf = random_projection(), random_projection()
    W = rng.standard_normal((rank, rank)) + 1j * rng.standard_normal((rank, rank))
    V = qf @ W @ qe.conj().T
    A_small = rng.standard_normal((rank, rank)) + 1j * rng.standard_normal((rank, rank))
    A = qe @ A_small @ qe.conj().T
    V_pinv = np.linalg.pinv(V)
    B = V @ A @ V_pinv
    if np.abs(V @ A - B @ V).max() > 1e-8 * max(1.0, np.abs(A).max()):
        raise IndeterminateError("intertwining relation VA = BV failed numerically", {})
    return c * np.trace(A), c * np.trace(B)


def index_along_path(symbols: Sequence[TrigPoly], cutoff: int = 128, n: int = 1, c: float = 1.0) -> List[float]:
    """Calderon index of each symbol on a path (homotopy invariance spot-check)."""
    out = []
    for u in symbols:
        model = ToeplitzModel(u, cutoff, c)
        out.append(calderon_index(FredholmPair.from_toeplitz(model, check_doubling=False), n))
    return out
