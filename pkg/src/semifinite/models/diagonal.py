"""Diagonal model operators: circle and torus spectra, foliated families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import signal
from scipy.special import gamma as gamma_fn

from ..errors import PreconditionError
from ..spectral_core import TailModel, WeightedSpectrum


def unit_ball_volume(p: int) -> float:
    return math.pi ** (p / 2) / gamma_fn(p / 2 + 1)


def sphere_volume(p: int) -> float:
    """Volume of the unit sphere ``S^{p-1}`` in ``R^p``."""
    return 2 * math.pi ** (p / 2) / gamma_fn(p / 2)


def lattice_norm_counts(p: int, radius: int) -> Tuple[np.ndarray, np.ndarray]:
    """Counts ``r_p(n) = #{k in Z^p : |k|^2 = n}`` for ``0 <= n <= radius^2``.

    Computed as the ``p``-fold convolution of the indicator of squares; only
    nonzero counts are returned, as ``(n, r_p(n))``.
    """
    if p < 1:
        raise PreconditionError("lattice dimension must be >= 1")
    if p == 1:
        k = np.arange(0, int(radius) + 1, dtype=np.int64)
        return k * k, np.where(k == 0, 1, 2).astype(np.int64)
    top = int(radius) ** 2
    squares = np.zeros(top + 1)
    k = np.arange(0, int(radius) + 1)
    squares[k * k] = 2.0
    squares[0] = 1.0
    counts = squares.copy()
    for _ in range(p - 1):
        counts = signal.fftconvolve(counts, squares)[: top + 1]
        counts = np.rint(counts)
    counts = np.rint(counts).astype(np.int64)
    if counts.min() < 0:
        raise AssertionError("negative lattice count from convolution round-off")
    n = np.nonzero(counts)[0]
    return n, counts[n]


@dataclass(frozen=True)
class DiagonalModel:
    """An operator diagonal in a known basis.

    Each point carries an eigenvalue of the model operator, a trace weight and,
    for even models, a grading sign.  For torus models points are grouped by
    lattice norm, so ``weights`` hold multiplicities.

    Attributes:
        kind: ``"circle-dirac"``, ``"torus-laplacian"`` or ``"torus-dirac"``.
        p: dimension of the underlying torus.
        cutoff: mode cutoff ``N`` or lattice radius ``R``.
        eigenvalues: eigenvalue of the model operator at each point; signed
            for the circle Dirac operator, ``1+|k|^2`` or ``|k|`` on tori.
        weights: trace weight of each point.
        grading: ``+1``/``-1`` per point when the model is even, else ``None``.
        tail: counting model of ``|eigenvalue|`` (side ``infinity``).
        description: human-readable index-set description.
    """

    kind: str
    p: int
    cutoff: float
    eigenvalues: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    grading: Optional[np.ndarray] = field(default=None, repr=False)
    tail: Optional[TailModel] = None
    description: str = ""

    def __post_init__(self):
        if self.weights.shape != self.eigenvalues.shape or np.any(self.weights <= 0):
            raise PreconditionError("weights must be positive and align with eigenvalues")
        if self.grading is not None and self.grading.shape != self.eigenvalues.shape:
            raise PreconditionError("grading must align with eigenvalues")

    @property
    def even(self) -> bool:
        return self.grading is not None

    @property
    def kernel_weight(self) -> float:
        return float(self.weights[self.eigenvalues == 0].sum())

    def operator_spectrum(self, kernel: str = "regularize") -> WeightedSpectrum:
        """Spectrum of ``|D|`` (Dirac kinds) or of ``1+Delta`` (Laplacian).

        ``kernel="regularize"`` replaces ``|D|`` by ``(D^2+1)^{1/2}`` (the
        default for non-invertible ``D``); ``"drop"`` restricts to the
        orthogonal complement of the kernel; ``"keep"`` leaves zero atoms.
        """
        vals = np.abs(self.eigenvalues)
        weights = self.weights
        if self.kind.endswith("dirac"):
            if kernel == "regularize":
                vals = np.sqrt(vals * vals + 1.0)
            elif kernel == "drop":
                keep = vals > 0
                vals, weights = vals[keep], weights[keep]
            elif kernel != "keep":
                raise PreconditionError("kernel must be 'regularize', 'drop' or 'keep'")
        tail = self.tail if (kernel != "keep" or self.kernel_weight == 0) else None
        note = f"{self.kind} p={self.p} cutoff={self.cutoff:g} kernel={kernel}"
        return WeightedSpectrum(vals, weights, tail, note)

    def resolvent_spectrum(self, power: float = 1.0, kernel: str = "regularize") -> WeightedSpectrum:
        """Spectrum of ``operator^{-power}`` (compact side)."""
        return self.operator_spectrum(kernel).power(-power)

    def sign(self) -> np.ndarray:
        """Phase of ``D`` with the Hardy convention ``F = +1`` on the kernel."""
        return np.where(self.eigenvalues >= 0, 1.0, -1.0)

    def metadata(self):
        return {"kind": self.kind, "p": self.p, "cutoff": self.cutoff, "description": self.description}


def circle_dirac(cutoff: int) -> DiagonalModel:
    """``D = -i d/dtheta`` on the circle, modes ``n`` in ``[-N, N]``."""
    n_max = int(cutoff)
    if n_max < 1:
        raise PreconditionError("circle cutoff must be >= 1")
    modes = np.arange(-n_max, n_max + 1, dtype=float)
    return DiagonalModel(
        kind="circle-dirac",
        p=1,
        cutoff=n_max,
        eigenvalues=modes,
        weights=np.ones_like(modes),
        tail=TailModel(2.0, 1.0, "infinity"),
        description=f"Fourier modes n in [-{n_max}, {n_max}], eigenvalue n",
    )


def torus_model(p: int, kind: str, cutoff: int) -> DiagonalModel:
    """Laplacian (``1+|k|^2``) or Dirac (``|k|``) on ``T^p``, lattice ``|k| <= R``.

    Dirac spectra carry the spinor multiplicity ``2^{floor(p/2)}``; for even
    ``p`` each norm shell is split evenly between the two chiralities.
    """
    if p not in (1, 2, 3, 4):
        raise PreconditionError("torus dimension must be 1, 2, 3 or 4")
    if kind not in ("laplacian", "dirac"):
        raise PreconditionError("kind must be 'laplacian' or 'dirac'")
    radius = int(cutoff)
    if radius < 1:
        raise PreconditionError("lattice radius must be >= 1")
    n, counts = lattice_norm_counts(p, radius)
    ball = unit_ball_volume(p)
    desc = f"lattice points k in Z^{p}, |k| <= {radius}"
    if kind == "laplacian":
        return DiagonalModel(
            kind="torus-laplacian",
            p=p,
            cutoff=radius,
            eigenvalues=1.0 + n.astype(float),
            weights=counts.astype(float),
            tail=TailModel(ball, p / 2.0, "infinity"),
            description=desc + ", eigenvalue 1+|k|^2",
        )
    mult = 2 ** (p // 2)
    vals = np.sqrt(n.astype(float))
    weights = counts.astype(float) * mult
    grading = None
    if p % 2 == 0:
        vals = np.concatenate((vals, vals))
        weights = np.concatenate((weights, weights)) / 2.0
        grading = np.concatenate((np.ones(n.size), -np.ones(n.size)))
    return DiagonalModel(
        kind="torus-dirac",
        p=p,
        cutoff=radius,
        eigenvalues=vals,
        weights=weights,
        grading=grading,
        tail=TailModel(mult * ball, float(p), "infinity"),
        description=desc + f", eigenvalue |k|, spinor rank {mult}",
    )


def synthetic_spectrum(exponent: float = 1.0, t_max: float = 1e8, per_decade: int = 256) -> WeightedSpectrum:
    """Atomized ``mu_t = (1+t)^{-exponent}`` with its exact tail ``N(lam) = lam^{1/exponent}``."""
    if exponent <= 0:
        raise PreconditionError("exponent must be positive")
    if exponent == 1:
        prim = np.log1p
    else:
        prim = lambda t: ((1 + t) ** (1 - exponent) - 1) / (1 - exponent)  # noqa: E731
    return WeightedSpectrum.from_mu_profile(
        lambda t: (1 + t) ** (-exponent),
        t_max,
        antiderivative=prim,
        per_decade=per_decade,
        tail=TailModel(1.0, 1.0 / exponent, "zero"),
    )


@dataclass(frozen=True)
class FoliatedFamily:
    """Leaves with transverse weights; ``tau_Lambda(X) = sum_j Lambda_j Tr(X_j)``."""

    leaves: Tuple[Tuple[float, DiagonalModel], ...]

    @property
    def mass(self) -> float:
        return math.fsum(w for w, _ in self.leaves)

    def trace(self, leaf_traces: Sequence[float]) -> float:
        """``tau_Lambda`` of a decomposable operator given its leafwise traces."""
        if len(leaf_traces) != len(self.leaves):
            raise PreconditionError("one trace per leaf is required")
        return math.fsum(w * t for (w, _), t in zip(self.leaves, leaf_traces))

    def spectrum(self, leaf_spectrum) -> WeightedSpectrum:
        """``tau_Lambda``-spectrum of ``1 (x) T`` where ``leaf_spectrum(model)`` gives ``T`` per leaf.

        When every leaf is the same model the weights are multiplied by the
        total mass in one step, which makes the rescaling law exact.
        """
        first = self.leaves[0][1]
        if all(model is first for _, model in self.leaves):
            return leaf_spectrum(first).scale_weights(self.mass)
        merged = None
        for weight, model in self.leaves:
            part = leaf_spectrum(model).scale_weights(weight)
            merged = part if merged is None else merged.direct_sum(part)
        return merged


def foliated_family(leaf: DiagonalModel, weights: Sequence[float]) -> FoliatedFamily:
    """Product foliation with one leaf model and a discretized transverse measure."""
    weights = [float(w) for w in weights]
    if not weights:
        raise PreconditionError("transverse measure has no weights")
    if any(not (w > 0) or not math.isfinite(w) for w in weights):
        raise PreconditionError("transverse weights must be positive and finite")
    return FoliatedFamily(tuple((w, leaf) for w in weights))
