"""Verifiable operator models: circle and torus spectra, foliations, matrices, Toeplitz operators."""

from .diagonal import (
    DiagonalModel,
    FoliatedFamily,
    circle_dirac,
    foliated_family,
    lattice_norm_counts,
    sphere_volume,
    synthetic_spectrum,
    torus_model,
    unit_ball_volume,
)
from .matrix import (
    Doubling,
    GradedModel,
    TorusSpinModel,
    WeightedMatrixAlgebra,
    doubling,
    even_from_odd,
    lattice_points,
    multiplication_matrix,
    torus_spin_model,
)
from .toeplitz import ToeplitzModel, band_matrix, sign_commutator_rank, toeplitz

__all__ = [
    "DiagonalModel",
    "Doubling",
    "FoliatedFamily",
    "GradedModel",
    "ToeplitzModel",
    "TorusSpinModel",
    "WeightedMatrixAlgebra",
    "band_matrix",
    "circle_dirac",
    "doubling",
    "even_from_odd",
    "foliated_family",
    "lattice_norm_counts",
    "lattice_points",
    "multiplication_matrix",
    "sign_commutator_rank",
    "sphere_volume",
    "synthetic_spectrum",
    "toeplitz",
    "torus_model",
    "torus_spin_model",
    "unit_ball_volume",
]
