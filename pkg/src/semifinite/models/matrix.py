"""Finite matrix models: weighted-trace algebras, the doubling construction, lattice operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from ..errors import PreconditionError
from ..spectral_core import WeightedSpectrum, mu, sigma
from ..trig import TrigPoly
from .diagonal import DiagonalModel


@dataclass(frozen=True)
class WeightedMatrixAlgebra:
    """``n x n`` complex matrices with the trace ``tau = c * Tr``."""

    n: int
    c: float = 1.0

    def __post_init__(self):
        if self.n < 1 or not self.c > 0:
            raise PreconditionError("need n >= 1 and c > 0")

    def tau(self, x) -> complex:
        return self.c * np.trace(x)

    def spectrum(self, x) -> WeightedSpectrum:
        """Singular values of ``x``, each with weight ``c``."""
        s = np.linalg.svd(np.asarray(x), compute_uv=False)
        return WeightedSpectrum(s, np.full(s.size, self.c))

    def mu(self, x, t):
        return mu(self.spectrum(x), t)

    def sigma(self, x, t):
        return sigma(self.spectrum(x), t)

    def trace_norm(self, x) -> float:
        return self.c * float(np.sum(np.linalg.svd(x, compute_uv=False)))

    @staticmethod
    def op_norm(x) -> float:
        return float(np.linalg.norm(x, 2))

    # -- random elements -------------------------------------------------------------

    def random(self, rng: np.random.Generator, rank: Optional[int] = None):
        x = rng.standard_normal((self.n, self.n)) + 1j * rng.standard_normal((self.n, self.n))
        if rank is not None and rank < self.n:
            u, s, vh = np.linalg.svd(x)
            s[rank:] = 0
            x = (u * s) @ vh
        return x

    def random_positive(self, rng: np.random.Generator):
        x = self.random(rng)
        return x @ x.conj().T

    def random_unitary(self, rng: np.random.Generator):
        q, r = np.linalg.qr(self.random(rng))
        return q * (np.diag(r) / np.abs(np.diag(r)))


@dataclass(frozen=True)
class Doubling:
    """Enlarged space ``H (+) Ker D`` with the symmetry ``F = F1 + V``.

    ``F1`` is the phase of ``D`` (zero on the kernel) padded by zeros and
    ``V`` swaps the kernel with its extra copy.  The algebra acts as
    ``a (+) 0``.
    """

    F: np.ndarray
    F1: np.ndarray
    V: np.ndarray
    kernel_projection: np.ndarray
    dim_h: int
    dim_kernel: int

    def embed(self, a):
        """Matrix of ``a (+) 0`` on the enlarged space."""
        a = np.asarray(a)
        if a.shape != (self.dim_h, self.dim_h):
            raise PreconditionError("operator must act on the original space")
        out = np.zeros((self.dim_h + self.dim_kernel,) * 2, dtype=np.result_type(a, float))
        out[: self.dim_h, : self.dim_h] = a
        return out

    def defect_check(self, a) -> float:
        """Largest gap between the singular values of ``aV`` and ``a p_D``."""
        av = self.embed(a) @ self.V
        ap = a @ self.kernel_projection
        s1 = np.sort(np.linalg.svd(av, compute_uv=False))[::-1]
        s2 = np.sort(np.linalg.svd(ap, compute_uv=False))[::-1]
        k = min(s1.size, s2.size)
        return float(max(np.max(np.abs(s1[:k] - s2[:k])), np.max(s1[k:], initial=0), np.max(s2[k:], initial=0)))


def doubling(model) -> Doubling:
    """Doubling of a diagonal self-adjoint model (a :class:`DiagonalModel` or an eigenvalue array)."""
    eig = np.asarray(model.eigenvalues if isinstance(model, DiagonalModel) else model, dtype=float)
    n = eig.size
    kernel = np.nonzero(eig == 0)[0]
    k = kernel.size
    F1 = np.zeros((n + k, n + k))
    F1[np.arange(n), np.arange(n)] = np.sign(eig)
    V = np.zeros((n + k, n + k))
    V[kernel, n + np.arange(k)] = 1.0
    V[n + np.arange(k), kernel] = 1.0
    p_d = np.zeros((n, n))
    p_d[kernel, kernel] = 1.0
    return Doubling(F1 + V, F1, V, p_d, n, k)


# -- trigonometric multiplication operators on lattices ------------------------------------


def lattice_points(p: int, radius: float) -> np.ndarray:
    """All ``k in Z^p`` with ``|k| <= radius``, ordered by norm then lexicographically."""
    r = int(np.floor(radius))
    axes = [np.arange(-r, r + 1)] * p
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p)
    norms = np.sum(grid * grid, axis=1)
    grid = grid[norms <= radius * radius]
    norms = norms[norms <= radius * radius]
    order = np.lexsort(tuple(grid[:, j] for j in reversed(range(p))) + (norms,))
    return grid[order]


def multiplication_matrix(a: TrigPoly, points: np.ndarray, fmt: str = "csr"):
    """Sparse matrix of multiplication by scalar ``a`` on ``span{e_k : k in points}``.

    Entry ``(k, l)`` is the Fourier coefficient ``a_{k-l}``; images leaving
    the truncation are dropped.
    """
    if a.matrix_size is not None:
        raise PreconditionError("scalar symbol expected")
    points = np.asarray(points)
    if points.ndim == 1:
        points = points[:, None]
    index = {tuple(k): i for i, k in enumerate(points.tolist())}
    rows, cols, vals = [], [], []
    for m, coef in a.coeffs.items():
        shifted = points + np.asarray(m)
        for j, target in enumerate(map(tuple, shifted.tolist())):
            i = index.get(target)
            if i is not None:
                rows.append(i)
                cols.append(j)
                vals.append(coef)
    n = points.shape[0]
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex).asformat(fmt)


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class TorusSpinModel:
    """Truncated spinor Dirac operator on ``T^2`` in the Fourier basis.

    Basis index ``2*j + s`` for lattice point ``j`` and spinor component
    ``s``.  ``D = -i(sigma_x d_1 + sigma_y d_2)`` has symbol
    ``k_1 sigma_x + k_2 sigma_y``; the phase ``F`` uses ``sigma_x`` on the
    zero mode so that ``F^2 = 1`` and ``F`` anticommutes with ``gamma``.
    ``D``, ``F`` and ``gamma`` are sparse CSR matrices.
    """

    points: np.ndarray
    D: sparse.csr_matrix
    F: sparse.csr_matrix
    gamma: sparse.csr_matrix

    @property
    def dim(self):
        return self.D.shape[0]

    def multiplication(self, a: TrigPoly, dense: bool = False):
        """Matrix of ``a (x) 1_spinor`` (sparse unless ``dense``)."""
        out = sparse.kron(multiplication_matrix(a, self.points), sparse.identity(2), format="csr")
        return out.toarray() if dense else out


def torus_spin_model(radius: float) -> TorusSpinModel:
    points = lattice_points(2, radius)
    n = points.shape[0]
    k1 = points[:, 0].astype(float)
    k2 = points[:, 1].astype(float)
    blocks_D = k1[:, None, None] * PAULI[0] + k2[:, None, None] * PAULI[1]
    norm = np.hypot(k1, k2)
    safe = np.where(norm > 0, norm, 1.0)
    blocks_F = blocks_D / safe[:, None, None]
    blocks_F[norm == 0] = PAULI[0]
    D = sparse.block_diag(list(blocks_D), format="csr")
    F = sparse.block_diag(list(blocks_F), format="csr")
    gamma = sparse.kron(sparse.identity(n), sparse.csr_matrix(PAULI[2]), format="csr")
    return TorusSpinModel(points, D, F, gamma)


@dataclass(frozen=True)
class GradedModel:
    """Even finite model ``(H_+ (+) H_-, gamma, F)`` with ``F`` odd and ``F^2 = 1``."""

    F: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        if not np.allclose(self.F @ self.F, np.eye(self.F.shape[0]), atol=1e-12):
            raise PreconditionError("F must square to 1")
        if not np.allclose(self.F @ self.gamma, -self.gamma @ self.F, atol=1e-12):
            raise PreconditionError("F must anticommute with the grading")


def even_from_odd(F_odd: np.ndarray) -> GradedModel:
    """Even model ``F (x) sigma_x`` with grading ``1 (x) sigma_z`` built from an odd symmetry."""
    F_odd = np.asarray(F_odd)
    n = F_odd.shape[0]
    F = np.block([[np.zeros((n, n)), F_odd], [F_odd, np.zeros((n, n))]])
    gamma = np.diag(np.concatenate((np.ones(n), -np.ones(n))))
    return GradedModel(F, gamma)
