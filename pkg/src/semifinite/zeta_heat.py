"""Counting functions, zeta functions, residues and heat-type regularizations.

Inputs here are spectra of a positive operator with discrete spectrum (the
unbounded member ``T``), tail side ``"infinity"``.  Everything is tied back
to the Dixmier trace of ``T^{-d}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .errors import IndeterminateError, PreconditionError, TailUncertainError
from .limiting import LimitEstimate, LimitProcessConfig, dixmier_trace, log_grid, omega_limit, signed_dixmier_trace
from .spectral_core import TAIL_REACH, WeightedSpectrum

Multiplier = Union[float, Callable[[np.ndarray], np.ndarray]]


def _require_discrete(spectrum: WeightedSpectrum):
    if spectrum.is_empty:
        raise PreconditionError("empty spectrum has no counting function")
    if spectrum.values.min() <= 0:
        raise PreconditionError(
            "counting functions need spectrum in [eps, inf); regularize a kernel with (D^2+1)^(1/2)"
        )
    if spectrum.tail is not None and spectrum.tail.side != "infinity":
        raise PreconditionError("expected the unbounded operator (tail side 'infinity'); invert the spectrum first")


# -- counting ------------------------------------------------------------------------


def counting(spectrum: WeightedSpectrum, lam, *, with_bound: bool = False):
    """``N(lam)``: total weight of atoms with value ``<= lam``.

    Exact on the enumerated range.  Past the largest atom the tail model is
    used while its predicted count stays within ``TAIL_REACH`` times the
    enumerated weight; otherwise :class:`TailUncertainError` is raised.
    """
    _require_discrete(spectrum)
    lam_arr = np.asarray(lam, dtype=float)
    out = np.asarray(spectrum.counting(lam_arr), dtype=float)
    bound = np.zeros_like(out)
    top = float(spectrum.values[0])
    beyond = lam_arr > top
    if np.any(beyond):
        tail = spectrum.tail
        total = spectrum.total_weight
        if tail is None:
            raise TailUncertainError(
                f"lambda beyond the enumerated range (max {top:g}) and no tail declared", (total, math.inf)
            )
        extra = tail.count(lam_arr[beyond]) - tail.count(top)
        if np.any(total + extra > TAIL_REACH * total):
            raise TailUncertainError(
                f"lambda beyond the tail reach of the enumeration (max {top:g})", (total, math.inf)
            )
        out = np.array(out, dtype=float)
        out[beyond] = total + extra
        bound[beyond] = max(spectrum.tail_mismatch, 1e-12) * tail.count(lam_arr[beyond])
    if out.ndim == 0:
        out, bound = float(out), float(bound)
    return (out, bound) if with_bound else out


class CountingFunction:
    """Callable ``lam -> N(lam)`` bound to one spectrum."""

    def __init__(self, spectrum: WeightedSpectrum):
        _require_discrete(spectrum)
        self.spectrum = spectrum

    def __call__(self, lam):
        return counting(self.spectrum, lam)

    @property
    def enumerated_range(self):
        return float(self.spectrum.values[-1]), float(self.spectrum.values[0])


@dataclass(frozen=True)
class DimensionEstimate:
    """Least-squares growth exponent of ``log N`` against ``log lam``."""

    d: float
    residual: float
    prefactor: float
    decades: float


def spectral_dimension(spectrum: WeightedSpectrum, *, decades: float = 2.0, min_decades: float = 3.0,
                       max_residual: float = 0.02, per_decade: int = 32) -> DimensionEstimate:
    """Growth exponent of the counting function over the top ``decades``.

    The enumeration must span ``min_decades``.  ``residual`` is the largest
    deviation of ``log N`` from the fitted line; growth that is not a power
    law within ``max_residual`` is indeterminate.
    """
    _require_discrete(spectrum)
    lo, hi = float(spectrum.values[-1]), float(spectrum.values[0])
    if hi / lo < 10 ** max(min_decades, decades) * (1 - 1e-12):
        raise PreconditionError(f"need at least {max(min_decades, decades):g} decades of enumerated growth")
    lam = np.logspace(math.log10(hi) - decades, math.log10(hi), int(decades * per_decade) + 1)
    n = spectrum.counting(lam)
    if np.any(n <= 0):
        raise IndeterminateError("counting function vanishes inside the fit window", {"lambda": lam.tolist()})
    x, y = np.log(lam), np.log(n)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    if resid > max_residual:
        raise IndeterminateError(
            f"counting function is not a power law (log residual {resid:.3g})",
            {"slope": float(slope), "residual": resid},
        )
    return DimensionEstimate(float(slope), resid, float(math.exp(intercept)), decades)


# -- zeta functions ----------------------------------------------------------------------


def convergence_boundary(spectrum: WeightedSpectrum) -> float:
    """Real abscissa ``-d`` left of which the zeta sum converges (``inf`` without tail)."""
    _require_discrete(spectrum)
    return -spectrum.tail.d if spectrum.tail is not None else math.inf


def zeta(spectrum: WeightedSpectrum, z, *, margin: float = 0.0, with_bound: bool = False):
    """``zeta(z) = int lam^z dN(lam)``: atom sum plus the integrated tail.

    The tail contributes ``int_{lam_max}^inf lam^z d(c lam^d)``.  Points with
    ``Re z >= -d - margin`` are refused.
    """
    _require_discrete(spectrum)
    z = complex(z)
    tail = spectrum.tail
    if tail is not None and z.real >= -tail.d - margin:
        raise PreconditionError(f"zeta diverges for Re z >= {-tail.d:g} (requested {z.real:g}, margin {margin:g})")
    logs = np.log(spectrum.values)
    head = complex(np.sum(spectrum.weights * np.exp(z * logs)))
    tail_term = 0j
    bound = 0.0
    if tail is not None:
        top = float(spectrum.values[0])
        s = z + tail.d
        tail_term = -tail.c * tail.d * top ** s / s
        bound = max(spectrum.tail_mismatch, 1e-12) * abs(tail_term) + float(spectrum.weights[0]) * top ** z.real
    value = head + tail_term
    if z.imag == 0:
        value = value.real
    return (value, bound) if with_bound else value


@dataclass
class ZetaProfile:
    """Spectral dimension, zeta residue and the induced Dixmier trace."""

    d: float
    residual: float
    A: float
    A_band: float
    trace: float
    trace_band: float
    boundary: float
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "d": self.d,
            "residual": self.residual,
            "A": self.A,
            "A_band": self.A_band,
            "trace": self.trace,
            "trace_band": self.trace_band,
            "boundary": self.boundary,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
        }


def _neville(h, g):
    """Neville table for the polynomial interpolant of ``g(h)`` evaluated at ``h = 0``."""
    n = len(h)
    table = [list(map(float, g))]
    for k in range(1, n):
        prev = table[-1]
        row = []
        for i in range(n - k):
            row.append((h[i + k] * prev[i] - h[i] * prev[i + 1]) / (h[i + k] - h[i]))
        table.append(row)
    return table


def residue_to_dixmier(spectrum: WeightedSpectrum, *, levels: int = 5, margin: float = 0.5,
                       tol: float = 1e-3, d: Optional[float] = None) -> ZetaProfile:
    """Residue ``A = lim (x+d) zeta(x)`` as ``x`` increases to ``-d``, and ``-A/d``.

    The approach path is ``x_j = -d - margin * 2^-j``; the samples are
    extrapolated to the boundary with a Neville table.  The band is the
    change between the last two extrapolation orders plus the propagated tail
    uncertainty.
    """
    _require_discrete(spectrum)
    if levels < 3:
        raise PreconditionError("residue extrapolation needs at least 3 levels")
    residual = 0.0
    if d is None:
        if spectrum.tail is not None:
            d = spectrum.tail.d
        else:
            est = spectral_dimension(spectrum)
            d, residual = est.d, est.residual
    if not (0 < d < math.inf):
        raise PreconditionError("spectral dimension must be positive and finite")
    h = margin * 2.0 ** -np.arange(levels)
    g, bounds, shares = [], [], []
    for hj in h:
        x = -d - hj
        val, bnd = zeta(spectrum, x, with_bound=True)
        g.append(-hj * val)
        bounds.append(hj * bnd)
        if spectrum.tail is not None:
            top = float(spectrum.values[0])
            tail_term = -spectrum.tail.c * spectrum.tail.d * top ** (x + d) / (x + d)
            shares.append(float(tail_term / val))
    table = _neville(list(h), g)
    A = table[-1][0]
    A_prev = table[-2][0]
    band = abs(A - A_prev) + max(bounds)
    if not math.isfinite(A) or band > abs(A):
        raise IndeterminateError(
            "residue extrapolation is unstable",
            {"samples": g, "levels": levels, "band": band},
        )
    trace = -A / d
    diag = {
        "path": "x_j = -d - margin * 2^-j",
        "x": (-d - h).tolist(),
        "samples": [float(v) for v in g],
        "extrapolation_orders": [row[0] for row in table],
        "tail_share": shares,
        "margin": margin,
    }
    return ZetaProfile(
        d=float(d),
        residual=residual,
        A=float(A),
        A_band=float(band),
        trace=float(trace),
        trace_band=float(band / d),
        boundary=-float(d),
        converged=band <= tol * abs(A),
        diagnostics=diag,
    )


def weyl_ratio(spectrum: WeightedSpectrum, config: Optional[LimitProcessConfig] = None, *,
               d: Optional[float] = None) -> LimitEstimate:
    """Generalized limit of ``N(lam) / lam^d`` over the enumerated range."""
    config = config or LimitProcessConfig()
    _require_discrete(spectrum)
    if d is None:
        d = spectrum.tail.d if spectrum.tail is not None else spectral_dimension(spectrum).d
    top = float(spectrum.values[0])
    lam = log_grid(top, 1.0, config.points_per_decade)
    f = spectrum.counting(lam) / lam ** d
    est = omega_limit(lam, f, config)
    est.diagnostics["d"] = float(d)
    return est


# -- regularized integrals -----------------------------------------------------------


def _multiplier_values(T_diag: Multiplier, values: np.ndarray) -> np.ndarray:
    if callable(T_diag):
        out = np.asarray(T_diag(values), dtype=float)
        if out.shape != values.shape:
            raise PreconditionError("multiplier callable must return one entry per atom")
    else:
        out = np.full(values.shape, float(T_diag))
    if not np.all(np.isfinite(out)):
        raise PreconditionError("multiplier must be bounded")
    return out


def C_p(f: Callable, p: float) -> float:
    """``p * int_0^inf f(t) t^(p-1) dt`` by adaptive quadrature.

    Refuses ``f`` whose product with ``t^p`` does not decay.
    """
    if p <= 0:
        raise PreconditionError("p must be positive")
    probe = np.logspace(3, 6, 7)
    decay = np.abs(np.asarray([f(t) for t in probe], dtype=float)) * probe ** p
    if decay[-1] > 1e-6 or not np.all(np.isfinite(decay)):
        raise PreconditionError("f is not integrable against t^(p-1) on (0, inf)")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            pieces = [integrate.quad(lambda t: f(t) * t ** (p - 1), a, b, limit=400)
                      for a, b in ((0, 1), (1, 10), (10, np.inf))]
        except integrate.IntegrationWarning as exc:
            raise PreconditionError(f"quadrature of f * t^(p-1) failed: {exc}") from exc
    return p * math.fsum(v for v, _ in pieces)


def _support_cut(f: Callable, p: float, frac: float = 1e-7) -> float:
    """Smallest ``x`` on a geometric ladder with ``int_x^inf |f| t^(p-1) <= frac * int_0^inf``."""
    total = integrate.quad(lambda t: abs(f(t)) * t ** (p - 1), 0, np.inf, limit=400)[0]
    if total == 0:
        return 1.0
    for x in np.geomspace(0.5, 1e3, 120):
        rest = integrate.quad(lambda t: abs(f(t)) * t ** (p - 1), x, np.inf, limit=400)[0]
        if rest <= frac * total:
            return float(x)
    raise PreconditionError("f decays too slowly for the enumerated spectrum")


def smooth_indicator(width: float = 0.2) -> Callable:
    """``C^inf`` step: 1 on ``[0, 1-width]``, 0 past ``1+width``, point-symmetric about 1."""
    if not 0 < width < 1:
        raise PreconditionError("width must be in (0, 1)")

    def bump(s):
        return np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)

    def f(x):
        s = (np.asarray(x, dtype=float) - (1 - width)) / (2 * width)
        s = np.clip(s, 0.0, 1.0)
        a, b = bump(1 - s), bump(s)
        out = a / (a + b)
        return out if np.ndim(x) else float(out)

    return f


def gaussian(x):
    return np.exp(-np.square(x))


def _sorted_ascending(spectrum):
    return spectrum.values[::-1], spectrum.weights[::-1]


def _tau_profile(D_spectrum, T_diag, f, p, config, *, extra_power=0.0, normalize=None):
    _require_discrete(D_spectrum)
    vals, weights = _sorted_ascending(D_spectrum)
    tw = weights * _multiplier_values(T_diag, vals)
    if extra_power:
        tw = tw * vals ** extra_power
    x_cut = _support_cut(f, p)
    lam_top = (float(vals[-1]) / x_cut) ** p
    if lam_top < 10 ** (config.window_decades + 2):
        raise PreconditionError(
            f"enumerated spectrum supports lambda only up to {lam_top:g}; raise the cutoff"
        )
    lam = log_grid(lam_top, 1.0, config.points_per_decade)
    out = np.empty_like(lam)
    for i, L in enumerate(lam):
        scale = L ** (1.0 / p)
        k = np.searchsorted(vals, x_cut * scale * 4, side="right")
        out[i] = np.sum(tw[:k] * f(vals[:k] / scale))
    out = out / (lam if normalize is None else normalize(lam))
    return lam, out, x_cut


def weighted_dixmier(D_spectrum: WeightedSpectrum, T_diag: Multiplier, p: float,
                     config: Optional[LimitProcessConfig] = None) -> LimitEstimate:
    """``tau_omega(T |D|^-p)`` for a diagonal bounded ``T``."""
    config = config or LimitProcessConfig()
    _require_discrete(D_spectrum)
    inv = D_spectrum.power(-p)
    tvals = _multiplier_values(T_diag, D_spectrum.values)[::-1]
    if np.all(tvals == tvals[0]):
        if tvals[0] == 0:
            return LimitEstimate(0.0, 0.0, True, {"method": "zero multiplier"})
        est = dixmier_trace(inv, config)
        return LimitEstimate(est.value * tvals[0], est.error_band * abs(tvals[0]), est.converged, est.diagnostics)
    return signed_dixmier_trace(tvals, inv, config)


def regularized_integral(D_spectrum: WeightedSpectrum, T_diag: Multiplier, f: Callable, p: float,
                         config: Optional[LimitProcessConfig] = None) -> LimitEstimate:
    """Generalized limit of ``tau(T f(|D| / lam^(1/p))) / lam`` as ``lam`` grows.

    The diagnostics carry ``C_p(f)`` and the predicted value
    ``C_p(f) * tau_omega(T |D|^-p)``.
    """
    config = config or LimitProcessConfig()
    cp = C_p(f, p)
    lam, g, x_cut = _tau_profile(D_spectrum, T_diag, f, p, config)
    if not np.any(g):
        return LimitEstimate(0.0, 0.0, True, {"method": "identically zero", "C_p": cp}, {"t": lam, "f": g})
    est = omega_limit(lam, g, config)
    est.diagnostics.update(C_p=cp, support_cut=x_cut, p=p)
    return est


def heat_trace_check(D_spectrum: WeightedSpectrum, T_diag: Multiplier, p: float,
                     config: Optional[LimitProcessConfig] = None) -> LimitEstimate:
    """Generalized limit of ``t^p tau(T exp(-t^2 D^2))`` as ``t -> 0``.

    Sampled in ``lam = t^-p``; predicted value ``Gamma(p/2+1) tau_omega(T |D|^-p)``.
    """
    est = regularized_integral(D_spectrum, T_diag, gaussian, p, config)
    est.diagnostics["Gamma(p/2+1)"] = float(gamma_fn(p / 2 + 1))
    return est


def mellin_plateau(D_spectrum: WeightedSpectrum, T_diag: Multiplier, f: Callable, p: float,
                   config: Optional[LimitProcessConfig] = None) -> LimitEstimate:
    """Generalized limit of ``tau(T f(|D|/lam^(1/p)) |D|^-p) / log(1+lam)``; predicted ``f(0) tau_omega(T|D|^-p)``."""
    config = config or LimitProcessConfig()
    h = 1e-6
    deriv = lambda t: (f(t + h) - f(max(t - h, 0.0))) / (t + h - max(t - h, 0.0))  # noqa: E731
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        moment = sum(integrate.quad(lambda t: abs(math.log(t)) * abs(deriv(t)), a, b, limit=400)[0]
                     for a, b in ((0, 1), (1, np.inf)))
    if not math.isfinite(moment):
        raise PreconditionError("f violates the log-moment condition on f'")
    if abs(f(1e6)) > 1e-8:
        raise PreconditionError("f must vanish at infinity")
    lam, g, x_cut = _tau_profile(D_spectrum, T_diag, f, p, config, extra_power=-p, normalize=np.log1p)
    if not np.any(g):
        return LimitEstimate(0.0, 0.0, True, {"method": "identically zero", "f(0)": float(f(0.0))},
                             {"t": lam, "f": g})
    est = omega_limit(lam, g, config)
    est.diagnostics.update({"f(0)": float(f(0.0)), "log_moment": moment, "support_cut": x_cut, "p": p})
    return est
