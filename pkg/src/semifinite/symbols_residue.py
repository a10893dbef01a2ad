"""Principal symbols on torus leaves, cosphere quadrature and residue densities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import roots_jacobi

from .errors import PreconditionError
from .limiting import LimitEstimate, LimitProcessConfig, truncated_trace_formulas
from .models.diagonal import torus_model
from .models.matrix import PAULI
from .trig import TrigPoly

TWO_PI = 2.0 * math.pi


def sphere_volume(p: int) -> float:
    return 2.0 * math.pi ** (p / 2) / gamma_fn(p / 2)


# -- cosphere quadrature ------------------------------------------------------------------


@dataclass(frozen=True)
class CosphereQuadrature:
    """Nodes and weights on the unit sphere ``S^{p-1}`` in ``R^p``.

    Attributes:
        p: ambient dimension.
        nodes: array ``(n, p)`` of unit vectors.
        weights: positive weights summing to the sphere volume.
        degree: polynomials of this total degree in ``xi`` are integrated exactly.
    """

    p: int
    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    @classmethod
    def build(cls, p: int, n: int = 32) -> "CosphereQuadrature":
        """Trapezoid rule on ``S^1``; product Gauss-Jacobi recursion for ``p >= 3``."""
        if p < 1:
            raise PreconditionError("dimension must be >= 1")
        if p == 1:
            return cls(1, np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]), 10 ** 9)
        if p == 2:
            theta = TWO_PI * np.arange(n) / n
            nodes = np.stack((np.cos(theta), np.sin(theta)), axis=1)
            return cls(2, nodes, np.full(n, TWO_PI / n), n - 1)
        lower = cls.build(p - 1, n)
        alpha = (p - 3) / 2.0
        s, ws = roots_jacobi(n, alpha, alpha)
        radius = np.sqrt(1.0 - s * s)
        nodes = np.concatenate(
            [np.column_stack((r * lower.nodes, np.full(lower.nodes.shape[0], si))) for si, r in zip(s, radius)]
        )
        weights = np.concatenate([w * lower.weights for w in ws])
        return cls(p, nodes, weights, min(2 * n - 1, lower.degree))

    def integrate(self, values) -> complex:
        """``sum_j w_j values[j]`` over the leading axis."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def rotated(self, rotation) -> "CosphereQuadrature":
        rotation = np.asarray(rotation, dtype=float)
        if rotation.shape != (self.p, self.p) or not np.allclose(rotation @ rotation.T, np.eye(self.p), atol=1e-12):
            raise PreconditionError("rotation must be an orthogonal p x p matrix")
        return CosphereQuadrature(self.p, self.nodes @ rotation.T, self.weights, self.degree)


# -- symbols -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalSymbol:
    """Principal symbol of order ``order`` on a ``p``-torus chart, given on ``|xi| = 1``.

    ``func(x, xi)`` receives broadcastable arrays of shape ``(..., p)`` and
    returns an array of shape ``(...)`` (scalar symbol) or ``(..., N, N)``.
    """

    order: int
    p: int
    func: Callable = field(repr=False)
    matrix_size: Optional[int] = None
    description: str = ""

    def __call__(self, x, xi):
        return self.func(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))

    def trace_values(self, x, xi):
        vals = np.asarray(self(x, xi))
        if self.matrix_size is None:
            return vals
        return np.trace(vals, axis1=-2, axis2=-1)

    @classmethod
    def from_trig(cls, order: int, a: TrigPoly, xi_monomials=None, description: str = ""):
        """Symbol ``a(x) * q(xi)`` with ``q`` a polynomial restricted to the cosphere.

        ``xi_monomials`` is a list of ``(exponent tuple, coefficient)``; the
        default ``q = 1`` is ``|xi|^order`` itself.
        """
        p = a.p
        terms = [((0,) * p, 1.0)] if not xi_monomials else [(tuple(int(e) for e in k), complex(c)) for k, c in xi_monomials]
        for k, _ in terms:
            if len(k) != p:
                raise PreconditionError("xi exponent length must match the chart dimension")

        def func(x, xi):
            ax = a(x)
            q = sum(c * np.prod(np.power(xi, np.asarray(k)), axis=-1) for k, c in terms)
            if a.matrix_size is None:
                return ax * q
            return ax * np.asarray(q)[..., None, None]

        return cls(order, p, func, a.matrix_size, description or f"trig symbol of order {order}")

    @classmethod
    def from_dict(cls, data):
        """``{"order": -2, "p": 2, "coeffs": [[[m1, m2], value or matrix], ...], "xi_monomials": [...]}``."""
        if not isinstance(data, dict) or "order" not in data or "coeffs" not in data:
            raise PreconditionError("symbol descriptor needs 'order' and 'coeffs'")
        a = TrigPoly.from_dict({"coeffs": data["coeffs"]}, p=data.get("p"))
        return cls.from_trig(int(data["order"]), a, data.get("xi_monomials"))


def local_residue(symbol: ClassicalSymbol, point, quadrature: Optional[CosphereQuadrature] = None):
    """Residue density ``(2 pi)^-p int_{|xi|=1} tr sigma(x, xi) |d xi|`` at ``point``."""
    p = symbol.p
    if symbol.order != -p:
        raise PreconditionError(f"residue density needs order -{p}, got {symbol.order}")
    quad = quadrature or CosphereQuadrature.build(p)
    if quad.p != p:
        raise PreconditionError("quadrature dimension mismatch")
    x = np.broadcast_to(np.asarray(point, dtype=float), (quad.nodes.shape[0], p))
    vals = symbol.trace_values(x, quad.nodes)
    out = complex(quad.integrate(vals)) / TWO_PI ** p
    return out.real if abs(out.imag) <= 1e-14 * max(1.0, abs(out.real)) else out


def chart_grid(p: int, n: int) -> tuple:
    """Equispaced tensor grid on ``[0, 2 pi)^p`` with its uniform weight."""
    axes = [TWO_PI * np.arange(n) / n] * p
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p)
    return grid, (TWO_PI / n) ** p


def chart_residue(symbol: ClassicalSymbol, grid: int = 32, quadrature: Optional[CosphereQuadrature] = None):
    """``int_{T^p} res_x(P) dx``."""
    p = symbol.p
    if symbol.order != -p:
        raise PreconditionError(f"residue density needs order -{p}, got {symbol.order}")
    quad = quadrature or CosphereQuadrature.build(p)
    points, cell = chart_grid(p, grid)
    xs = points[:, None, :]
    xi = quad.nodes[None, :, :]
    vals = symbol.trace_values(np.broadcast_to(xs, (points.shape[0], quad.nodes.shape[0], p)),
                               np.broadcast_to(xi, (points.shape[0], quad.nodes.shape[0], p)))
    total = complex(np.sum(vals @ quad.weights)) * cell / TWO_PI ** p
    return total.real if abs(total.imag) <= 1e-14 * max(1.0, abs(total.real)) else total


def foliated_residue(symbols: Union[ClassicalSymbol, Sequence[ClassicalSymbol]], weights: Sequence[float],
                     grid: int = 32, quadrature: Optional[CosphereQuadrature] = None):
    """``(1/p) sum_j Lambda_j int_{leaf} res(P_j)``.

    A single symbol is used on every leaf (the product foliation).
    """
    weights = [float(w) for w in weights]
    if not weights or any(not (w > 0) for w in weights):
        raise PreconditionError("transverse weights must be a non-empty list of positive numbers")
    if isinstance(symbols, ClassicalSymbol):
        p = symbols.p
        return math.fsum(weights) * chart_residue(symbols, grid, quadrature) / p
    symbols = list(symbols)
    if len(symbols) != len(weights):
        raise PreconditionError("one symbol per transverse weight is required")
    p = symbols[0].p
    if any(s.p != p for s in symbols):
        raise PreconditionError("all leaves must share the dimension")
    parts = [w * chart_residue(s, grid, quadrature) for w, s in zip(weights, symbols)]
    return sum(parts) / p


def laplacian_resolvent_symbol(p: int, f: Optional[TrigPoly] = None) -> ClassicalSymbol:
    """Principal symbol of ``f (1+Delta)^(-p/2)``: ``f(x)`` on the cosphere."""
    f = f or TrigPoly.constant(1.0, p)
    if f.p != p:
        raise PreconditionError("multiplier dimension mismatch")
    return ClassicalSymbol.from_trig(-p, f, description="f (1+Delta)^(-p/2)")


# -- trace/residue cross-check -----------------------------------------------------------


@dataclass
class ConnesTraceCheck:
    by_singular_value: LimitEstimate
    by_threshold: LimitEstimate
    residue_side: float
    classical_integral: complex
    normalization: float

    @property
    def eigen_side(self) -> float:
        return self.by_singular_value.value

    def agree(self, rel: float = 0.02) -> bool:
        scale = max(abs(self.residue_side), 1.0)
        band = max(self.by_singular_value.error_band, self.by_threshold.error_band)
        return all(abs(e.value - self.residue_side) <= rel * scale + band
                   for e in (self.by_singular_value, self.by_threshold))

    def to_dict(self):
        return {
            "eigen_side": [self.by_singular_value.to_dict(), self.by_threshold.to_dict()],
            "residue_side": self.residue_side,
            "classical_integral": [self.classical_integral.real, self.classical_integral.imag],
            "normalization": self.normalization,
        }


def connes_trace_check(f: TrigPoly, p: int, cutoff: int, config: Optional[LimitProcessConfig] = None,
                       grid: int = 32) -> ConnesTraceCheck:
    """Eigen side ``tau_omega(E(f) (1+Delta)^(-p/2))`` against ``(1/p) int res(f (1+Delta)^(-p/2))``.

    ``E(f)`` is the diagonal of multiplication by ``f`` in the Fourier basis,
    the constant ``mean(f)``.  ``normalization`` is ``p (2 pi)^p / vol(S^{p-1})``,
    which turns the eigen side into ``int f dx``.
    """
    if f.matrix_size is not None:
        raise PreconditionError("scalar multiplier expected")
    mean = complex(f.mean())
    if abs(mean.imag) > 1e-14:
        raise PreconditionError("the diagonal part must be real for the Dixmier-trace side")
    A = torus_model(p, "laplacian", cutoff).operator_spectrum().power(-p / 2.0)
    est1, est2 = truncated_trace_formulas(mean.real, A, config)
    residue = foliated_residue(laplacian_resolvent_symbol(p, f), [1.0], grid)
    integral = mean * TWO_PI ** p
    return ConnesTraceCheck(est1, est2, float(np.real(residue)), integral, p * TWO_PI ** p / sphere_volume(p))


# -- local Hochschild formula ------------------------------------------------------------


def clifford_generators(p: int):
    """Self-adjoint generators ``gamma^1..gamma^p`` of rank ``2^(p/2)`` and the chirality.

    For ``p = 2`` these are ``sigma_x, sigma_y`` with chirality ``sigma_z``.
    """
    if p % 2:
        raise PreconditionError("Clifford grading requires even p")
    sx, sy, sz = PAULI
    eye = np.eye(2, dtype=complex)
    gens = []
    for j in range(p // 2):
        left = [sz] * j
        right = [eye] * (p // 2 - j - 1)
        gens.append(reduce(np.kron, left + [sx] + right, np.eye(1, dtype=complex)))
        gens.append(reduce(np.kron, left + [sy] + right, np.eye(1, dtype=complex)))
    chir = (-1j) ** (p // 2) * reduce(np.matmul, gens)
    return gens, chir


@dataclass(frozen=True)
class HochschildValue:
    """Raw chart-and-cosphere integral and the normalization ``(1/p)(2 pi)^-p``."""

    raw: complex
    normalization: float
    p: int

    @property
    def value(self) -> complex:
        return self.raw * self.normalization


def hochschild_pairing(a: Sequence[TrigPoly], grid: Optional[int] = None,
                       quadrature: Optional[CosphereQuadrature] = None) -> HochschildValue:
    """Symbol-level value of ``int_omega gamma a0 [D,a1] ... [D,ap] |D|^-p`` on ``T^p``.

    With ``D = -i gamma^j d_j`` the commutator ``[D, a]`` is ``-i c(da)``, so
    the principal symbol on the cosphere is ``gamma a0 prod(-i c(da_k))``.
    """
    a = list(a)
    if not a:
        raise PreconditionError("need at least a0")
    p = a[0].p
    if p % 2:
        raise PreconditionError("the local Hochschild formula is evaluated for even p only")
    if len(a) != p + 1:
        raise PreconditionError(f"need p + 1 = {p + 1} trigonometric polynomials")
    if any(x.p != p or x.matrix_size is not None for x in a):
        raise PreconditionError("all arguments must be scalar trig polynomials on T^p")
    gens, chir = clifford_generators(p)
    quad = quadrature or CosphereQuadrature.build(p)
    if grid is None:
        total = sum(max((abs(k[j]) for k in x.coeffs), default=0) for x in a for j in range(p))
        grid = 2 * total + 2
    points, cell = chart_grid(p, grid)
    dim = gens[0].shape[0]
    prod = np.broadcast_to(chir, (points.shape[0], dim, dim)) * a[0](points)[:, None, None]
    for x in a[1:]:
        cda = sum(np.asarray(x.derivative(j)(points))[:, None, None] * gens[j] for j in range(p))
        prod = prod @ (-1j * cda)
    chart = np.trace(prod, axis1=1, axis2=2)
    # |xi|^-p is 1 on the cosphere; the integrand has no other xi dependence
    sphere = complex(quad.integrate(np.ones(quad.nodes.shape[0]) / np.linalg.norm(quad.nodes, axis=1) ** p))
    raw = complex(np.sum(chart)) * cell * sphere
    return HochschildValue(raw, 1.0 / (p * TWO_PI ** p), p)
