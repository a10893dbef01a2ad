"""Weighted spectra, generalized singular numbers and ideal membership.

A positive operator affiliated with a semifinite algebra is represented by
its spectral atoms ``(value, weight)``, where the weight is the trace of the
spectral projection.  Weights are arbitrary positive reals, so type-II
dimensions are first-class.  Infinite spectra are enumerated up to a cutoff
and carry a power-law tail model used for extrapolation and error bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate

from .errors import ClassificationError, PreconditionError, TailUncertainError

#: Tail extrapolation is trusted up to this factor beyond the enumerated range.
TAIL_REACH = 10.0
#: Default density of log-spaced evaluation grids.
POINTS_PER_DECADE = 64


@dataclass(frozen=True)
class TailModel:
    """Power-law counting model ``N(lam) ~ c * lam**d`` past the cutoff.

    ``side`` says where the unresolved atoms accumulate.  For ``"zero"``
    (a compact operator) ``N`` counts atoms with ``1/value <= lam``; for
    ``"infinity"`` (an unbounded operator with discrete spectrum) it counts
    atoms with ``value <= lam``.  Both read as the counting function of the
    unbounded member of the pair ``{A, A^-1}``.
    """

    c: float
    d: float
    side: str = "zero"
    rel_tol: float = 0.1

    def __post_init__(self):
        if not (self.c > 0 and self.d > 0):
            raise PreconditionError("tail requires c > 0 and d > 0")
        if self.side not in ("zero", "infinity"):
            raise PreconditionError("tail side must be 'zero' or 'infinity'")

    def count(self, lam):
        return self.c * np.power(lam, self.d)

    def mu(self, t):
        """Tail value of the singular value function (side ``zero``)."""
        return np.power(self.c / np.asarray(t, dtype=float), 1.0 / self.d)

    def sigma_increment(self, t0, t1):
        """Integral of the tail singular value function over ``[t0, t1]``."""
        alpha = 1.0 / self.d
        k = self.c ** alpha
        if abs(alpha - 1.0) < 1e-15:
            return k * math.log(t1 / t0)
        return k * (t1 ** (1 - alpha) - t0 ** (1 - alpha)) / (1 - alpha)

    def to_dict(self):
        return {"c": self.c, "d": self.d, "side": self.side, "rel_tol": self.rel_tol}

    @classmethod
    def from_dict(cls, data):
        if data is None:
            return None
        return cls(
            c=float(data["c"]),
            d=float(data["d"]),
            side=data.get("side", "zero"),
            rel_tol=float(data.get("rel_tol", 0.1)),
        )


class WeightedSpectrum:
    """Merged, sorted atom list with an optional tail.

    Atoms are stored in decreasing value order, equal values merged.
    Instances are treated as immutable; every transform returns a new one.

    Args:
        values: nonnegative atom values.
        weights: positive trace weights, same length as ``values``.
        tail: optional :class:`TailModel`.
        cutoff_note: free-form description of the enumeration cutoff.
    """

    __slots__ = ("values", "weights", "tail", "cutoff_note", "_cum", "_cum_mass", "tail_mismatch")

    def __init__(self, values, weights, tail: Optional[TailModel] = None, cutoff_note: str = ""):
        values = np.asarray(values, dtype=float).ravel()
        weights = np.asarray(weights, dtype=float).ravel()
        if values.shape != weights.shape:
            raise PreconditionError("values and weights must have equal length")
        if values.size and (not np.all(np.isfinite(values)) or values.min() < 0):
            raise PreconditionError("atom values must be finite and >= 0")
        if weights.size and (not np.all(np.isfinite(weights)) or weights.min() <= 0):
            raise PreconditionError("atom weights must be finite and > 0")
        order = np.argsort(-values, kind="stable")
        values, weights = values[order], weights[order]
        if values.size > 1 and np.any(values[1:] == values[:-1]):
            uniq, start = np.unique(-values, return_index=True)
            weights = np.add.reduceat(weights, start)
            values = -uniq
        self.values = values
        self.weights = weights
        self.tail = tail
        self.cutoff_note = cutoff_note
        self._cum = np.cumsum(weights)
        self._cum_mass = np.cumsum(values * weights)
        self.tail_mismatch = self._check_tail() if tail is not None else 0.0
        for arr in (self.values, self.weights, self._cum, self._cum_mass):
            arr.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_atoms(cls, atoms: Iterable, tail=None, cutoff_note=""):
        atoms = list(atoms)
        if not atoms:
            return cls([], [], tail, cutoff_note)
        arr = np.asarray(atoms, dtype=float)
        return cls(arr[:, 0], arr[:, 1], tail, cutoff_note)

    @classmethod
    def from_mu_profile(
        cls,
        mu: Callable,
        t_max: float,
        *,
        antiderivative: Optional[Callable] = None,
        t_min: float = 1e-3,
        per_decade: int = 256,
        tail: Optional[TailModel] = None,
    ):
        """Atomize a continuous singular value function.

        Cells are log-spaced on ``[t_min, t_max]`` plus ``[0, t_min]``; each
        cell becomes one atom carrying the cell average of ``mu`` so that
        ``sigma`` is exact at every cell boundary.
        """
        decades = math.log10(t_max / t_min)
        edges = np.concatenate(([0.0], np.logspace(math.log10(t_min), math.log10(t_max), int(round(decades * per_decade)) + 1)))
        widths = np.diff(edges)
        if antiderivative is not None:
            prim = np.asarray(antiderivative(edges), dtype=float)
            masses = np.diff(prim)
        else:
            masses = np.array([integrate.quad(mu, a, b)[0] for a, b in zip(edges[:-1], edges[1:])])
        return cls(masses / widths, widths, tail, cutoff_note=f"profile atomized on [0, {t_max:g}]")

    # -- basic properties -----------------------------------------------------

    def __len__(self):
        return self.values.size

    @property
    def atoms(self):
        return list(zip(self.values.tolist(), self.weights.tolist()))

    @property
    def total_weight(self) -> float:
        return float(self._cum[-1]) if self.values.size else 0.0

    @property
    def total_mass(self) -> float:
        """Sum of value * weight over enumerated atoms (the truncated trace)."""
        return float(self._cum_mass[-1]) if self.values.size else 0.0

    @property
    def is_empty(self):
        return self.values.size == 0

    def __eq__(self, other):
        if not isinstance(other, WeightedSpectrum):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and np.array_equal(self.weights, other.weights)
            and self.tail == other.tail
        )

    def __repr__(self):
        return f"WeightedSpectrum({len(self)} atoms, mass={self.total_weight:g}, tail={self.tail})"

    def svf(self) -> "SingularValueFunction":
        return SingularValueFunction(self)

    # -- transforms -----------------------------------------------------------

    def with_tail(self, tail):
        return WeightedSpectrum(self.values, self.weights, tail, self.cutoff_note)

    def power(self, s: float) -> "WeightedSpectrum":
        """Spectrum of ``A**s``; negative ``s`` moves the tail to the other side."""
        if s == 0:
            raise PreconditionError("power 0 is not a spectral transform of interest")
        if s < 0 and self.values.size and self.values.min() == 0:
            raise PreconditionError("negative power of a spectrum with a zero atom")
        tail = None
        if self.tail is not None:
            side = self.tail.side
            if s < 0:
                side = "infinity" if side == "zero" else "zero"
            tail = TailModel(self.tail.c, self.tail.d / abs(s), side, self.tail.rel_tol)
        return WeightedSpectrum(np.power(self.values, s), self.weights, tail, self.cutoff_note)

    def scale(self, lam: float) -> "WeightedSpectrum":
        """Spectrum of ``|lam| * A``."""
        lam = abs(lam)
        if lam == 0:
            return WeightedSpectrum([], [], None, self.cutoff_note)
        tail = None
        if self.tail is not None:
            factor = lam ** self.tail.d if self.tail.side == "zero" else lam ** (-self.tail.d)
            tail = TailModel(self.tail.c * factor, self.tail.d, self.tail.side, self.tail.rel_tol)
        return WeightedSpectrum(self.values * lam, self.weights, tail, self.cutoff_note)

    def scale_weights(self, m: float) -> "WeightedSpectrum":
        """Multiply every trace weight by ``m > 0`` (amplification by a trace of mass ``m``)."""
        if m <= 0:
            raise PreconditionError("weight scale must be positive")
        tail = None
        if self.tail is not None:
            tail = TailModel(self.tail.c * m, self.tail.d, self.tail.side, self.tail.rel_tol)
        return WeightedSpectrum(self.values, self.weights * m, tail, self.cutoff_note)

    def apply(self, f: Callable, tail=None) -> "WeightedSpectrum":
        """Spectrum of ``f(A)``; the caller supplies the transformed tail, if any."""
        return WeightedSpectrum(f(self.values), self.weights, tail, self.cutoff_note)

    def direct_sum(self, other: "WeightedSpectrum") -> "WeightedSpectrum":
        """Atom-list union, i.e. the spectrum of ``A (+) B``."""
        tail = self.tail
        if other.tail is not None:
            if tail is None:
                tail = other.tail
            elif tail.side != other.tail.side:
                raise PreconditionError("cannot merge tails on opposite sides")
            elif abs(tail.d - other.tail.d) < 1e-12:
                tail = TailModel(tail.c + other.tail.c, tail.d, tail.side, max(tail.rel_tol, other.tail.rel_tol))
            else:
                tail = max(tail, other.tail, key=lambda m: m.d)
        return WeightedSpectrum(
            np.concatenate((self.values, other.values)),
            np.concatenate((self.weights, other.weights)),
            tail,
            "; ".join(n for n in (self.cutoff_note, other.cutoff_note) if n),
        )

    # -- counting ---------------------------------------------------------------

    def counting(self, lam):
        """Enumerated weight of atoms with value ``<= lam`` (no tail)."""
        asc_vals = self.values[::-1]
        asc_cum = np.cumsum(self.weights[::-1])
        idx = np.searchsorted(asc_vals, np.asarray(lam, dtype=float), side="right")
        out = np.where(idx > 0, asc_cum[np.maximum(idx - 1, 0)], 0.0)
        return out if np.ndim(lam) else float(out)

    def _check_tail(self) -> float:
        """Relative mismatch between the tail model and the last enumerated decade."""
        tail = self.tail
        if self.values.size == 0:
            return 0.0
        if tail.side == "zero":
            positive = self.values > 0
            if not np.any(positive):
                return 0.0
            vals = self.values[positive]
            cum = self._cum[positive]
            targets = cum[-1] * 10.0 ** (-np.arange(5) / 4.0)
            idx = np.clip(np.searchsorted(cum, targets, side="left"), 0, cum.size - 1)
            observed = cum[idx]
            predicted = tail.count(1.0 / vals[idx])
        else:
            asc_vals = self.values[::-1]
            asc_cum = np.cumsum(self.weights[::-1])
            if asc_vals[0] <= 0:
                raise PreconditionError("an unbounded-side tail needs strictly positive atoms")
            targets = asc_vals[-1] * 10.0 ** (-np.arange(5) / 4.0)
            idx = np.clip(np.searchsorted(asc_vals, targets, side="right") - 1, 0, asc_vals.size - 1)
            observed = asc_cum[idx]
            predicted = tail.count(asc_vals[idx])
        mismatch = float(np.max(np.abs(observed - predicted) / observed))
        if mismatch > tail.rel_tol:
            raise PreconditionError(
                f"tail model disagrees with the last enumerated decade "
                f"(relative mismatch {mismatch:.3g} > {tail.rel_tol:g})"
            )
        return mismatch

    # -- serialization ------------------------------------------------------------

    def to_dict(self):
        return {
            "atoms": [[v, w] for v, w in zip(self.values.tolist(), self.weights.tolist())],
            "tail": self.tail.to_dict() if self.tail is not None else None,
            "cutoff_note": self.cutoff_note,
        }

    @classmethod
    def from_dict(cls, data):
        atoms = data["atoms"]
        tail = TailModel.from_dict(data.get("tail"))
        if len(atoms) == 0:
            return cls([], [], tail, data.get("cutoff_note", ""))
        arr = np.asarray(atoms, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], tail, data.get("cutoff_note", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))


class SingularValueFunction:
    """The non-increasing right-continuous step function ``t -> mu_t``."""

    def __init__(self, spectrum: WeightedSpectrum):
        self.spectrum = spectrum

    @property
    def breakpoints(self):
        return self.spectrum._cum

    def __call__(self, t):
        return mu(self.spectrum, t)

    def integral(self, t):
        return sigma(self.spectrum, t)


@dataclass(frozen=True)
class Estimate:
    """A number with an absolute error bound."""

    value: float
    error: float = 0.0


# -- singular numbers ------------------------------------------------------------


def _require_compact_side(spectrum):
    if spectrum.tail is not None and spectrum.tail.side != "zero":
        raise PreconditionError("singular numbers need a tau-compact spectrum (tail side 'zero')")


def mu(spectrum: WeightedSpectrum, t):
    """Generalized singular number ``mu_t``.

    Vectorized over ``t``.  Past the enumerated mass the tail model is used up
    to ``TAIL_REACH`` times that mass; further out a :class:`TailUncertainError`
    is raised carrying the interval ``[0, mu_W]``.
    """
    _require_compact_side(spectrum)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise PreconditionError("mu_t requires t > 0")
    if spectrum.is_empty:
        out = np.zeros_like(t_arr)
        return out if out.ndim else float(out)
    cum = spectrum._cum
    idx = np.searchsorted(cum, t_arr, side="right")
    inside = idx < cum.size
    out = np.zeros_like(t_arr)
    out[inside] = spectrum.values[idx[inside]]
    beyond = ~inside
    if np.any(beyond) and spectrum.tail is not None:
        w = cum[-1]
        tb = t_arr[beyond]
        if np.any(tb > w * TAIL_REACH):
            raise TailUncertainError(
                f"t beyond tail reach ({w * TAIL_REACH:g})", (0.0, float(spectrum.values[-1]))
            )
        out[beyond] = np.minimum(spectrum.tail.mu(tb), spectrum.values[-1])
    return out if out.ndim else float(out)


def sigma(spectrum: WeightedSpectrum, t, *, with_bound: bool = False):
    """Partial trace ``sigma_t = int_0^t mu_s ds`` (exact for enumerated atoms).

    With ``with_bound=True`` returns ``(value, bound)`` where ``bound`` is an
    additive error from the tail model (zero inside the enumerated mass).
    """
    _require_compact_side(spectrum)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise PreconditionError("sigma_t requires t > 0")
    bound = np.zeros_like(t_arr)
    if spectrum.is_empty:
        out = np.zeros_like(t_arr)
    else:
        cum, cmass, vals = spectrum._cum, spectrum._cum_mass, spectrum.values
        idx = np.searchsorted(cum, t_arr, side="right")
        inside = idx < cum.size
        out = np.empty_like(t_arr)
        ii = idx[inside]
        prev_cum = np.where(ii > 0, cum[np.maximum(ii - 1, 0)], 0.0)
        prev_mass = np.where(ii > 0, cmass[np.maximum(ii - 1, 0)], 0.0)
        out[inside] = prev_mass + (t_arr[inside] - prev_cum) * vals[ii]
        beyond = ~inside
        if np.any(beyond):
            out[beyond] = cmass[-1]
            if spectrum.tail is not None:
                w = cum[-1]
                tb = t_arr[beyond]
                if np.any(tb > w * TAIL_REACH):
                    raise TailUncertainError(
                        f"t beyond tail reach ({w * TAIL_REACH:g})",
                        (float(cmass[-1]), float(cmass[-1] + vals[-1] * (tb.max() - w))),
                    )
                inc = np.array([spectrum.tail.sigma_increment(w, x) for x in tb])
                out[beyond] += inc
                bound[beyond] = max(spectrum.tail_mismatch, 1e-12) * inc
    if out.ndim == 0:
        out, bound = float(out), float(bound)
    return (out, bound) if with_bound else out


def norm_p(spectrum: WeightedSpectrum, p: float, *, with_bound: bool = False):
    """Schatten-type norm ``(int mu^p)^(1/p)``; ``math.inf`` when the tail diverges."""
    if p < 1:
        raise PreconditionError("norm_p requires p >= 1")
    _require_compact_side(spectrum)
    head = float(np.sum(spectrum.weights * spectrum.values ** p))
    tail_part = 0.0
    if spectrum.tail is not None:
        q = p / spectrum.tail.d
        if q <= 1:
            return (math.inf, 0.0) if with_bound else math.inf
        w = spectrum.total_weight
        tail_part = spectrum.tail.c ** q * w ** (1 - q) / (q - 1)
    value = (head + tail_part) ** (1.0 / p)
    if not with_bound:
        return value
    rel = max(spectrum.tail_mismatch, 1e-12) if tail_part else 0.0
    err = value - (head + tail_part * (1 - rel)) ** (1.0 / p)
    return value, err


def norm_1inf(spectrum: WeightedSpectrum) -> Estimate:
    """Dixmier-ideal norm ``sup_t sigma_t / log(1+t)``.

    On each linear piece of ``sigma`` the ratio is quasi-convex, so the
    supremum over the enumerated range is attained at a breakpoint.  The tail
    region is scanned on a log grid out to the asymptote.
    """
    cls = classify(spectrum, 1.0)
    if cls.dixmier is not True:
        raise ClassificationError("spectrum is not (certifiably) in the Dixmier ideal")
    if spectrum.is_empty:
        return Estimate(0.0, 0.0)
    t = spectrum._cum
    ratios = spectrum._cum_mass / np.log1p(t)
    best = float(ratios.max())
    err = 0.0
    if spectrum.tail is not None:
        w = spectrum.total_weight
        tg = w * np.logspace(0, 300 - math.log10(w), 4096)
        tail = spectrum.tail
        inc = np.array([tail.sigma_increment(w, x) for x in tg])
        tail_ratios = (spectrum.total_mass + inc) / np.log1p(tg)
        asymptote = tail.c if abs(tail.d - 1.0) < 1e-15 else 0.0
        best = max(best, float(tail_ratios.max()), asymptote)
        err = float(np.max(np.abs(np.diff(tail_ratios)))) + spectrum.tail_mismatch * best
    return Estimate(best, err)


# -- ideal classification ------------------------------------------------------------


@dataclass
class IdealClassification:
    """Membership flags; ``None`` means indeterminate.

    ``dixmier`` is membership in L^{1,inf}; ``weak_p`` in L^{p,inf};
    ``schatten_above_1`` in every L^q with q > 1.
    """

    p: float
    tau_compact: Optional[bool]
    trace_class: Optional[bool]
    dixmier: Optional[bool]
    weak_p: Optional[bool]
    schatten_above_1: Optional[bool]
    statistics: dict = field(default_factory=dict)

    @property
    def indeterminate(self) -> bool:
        return any(
            f is None for f in (self.tau_compact, self.trace_class, self.dixmier, self.weak_p, self.schatten_above_1)
        )

    def to_dict(self):
        return {
            "p": self.p,
            "tau_compact": self.tau_compact,
            "L1": self.trace_class,
            "L1inf": self.dixmier,
            "Lpinf": self.weak_p,
            "Lq_all_q_gt_1": self.schatten_above_1,
            "indeterminate": self.indeterminate,
            "statistics": self.statistics,
        }


def _decay_exponent(spectrum: WeightedSpectrum, decades: float):
    """Least-squares slope of ``-log mu`` against ``log t`` over the top decades."""
    w = spectrum.total_weight
    lo = w / 10.0 ** decades
    t = np.logspace(math.log10(lo), math.log10(w), int(decades * POINTS_PER_DECADE) + 1)[:-1]
    m = mu(spectrum, t)
    keep = m > 0
    if keep.sum() < 8:
        return None, None
    x, y = np.log(t[keep]), np.log(m[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return -float(slope), resid


def classify(spectrum: WeightedSpectrum, p: float = 1.0, *, window_decades: float = 2.0, confidence: float = 0.1):
    """Decide ideal membership from the declared tail and enumerated decades.

    A finite spectrum without tail is finite rank and belongs to everything.
    With a tail, the declared decay exponent ``1/d`` is cross-checked against
    a fit over the top ``window_decades`` decades of enumerated mass; a
    disagreement beyond ``confidence`` (relative) yields indeterminate flags.
    """
    if p < 1:
        raise PreconditionError("classify requires p >= 1")
    stats = {"total_weight": spectrum.total_weight, "enumerated_trace": spectrum.total_mass}
    tail = spectrum.tail
    if tail is None:
        stats["reason"] = "finite rank (no tail declared)"
        return IdealClassification(p, True, True, True, True, True, stats)
    if tail.side == "infinity":
        stats["reason"] = "unbounded (tail at infinity)"
        return IdealClassification(p, False, False, False, False, False, stats)
    alpha = 1.0 / tail.d
    stats["declared_decay_exponent"] = alpha
    stats["tail_mismatch"] = spectrum.tail_mismatch
    w = spectrum.total_weight
    available = math.log10(w) if w > 1 else 0.0
    if available >= window_decades:
        fitted, resid = _decay_exponent(spectrum, window_decades)
        stats["fitted_decay_exponent"] = fitted
        stats["fit_residual"] = resid
        if fitted is None or abs(fitted - alpha) > confidence * alpha:
            stats["reason"] = "enumerated decay disagrees with declared tail"
            return IdealClassification(p, True, None, None, None, None, stats)
    else:
        stats["reason"] = "too few enumerated decades; declared tail used alone"
    trace_class = alpha > 1
    dixmier = alpha >= 1
    weak_p = alpha >= 1.0 / p
    above_1 = alpha >= 1
    if trace_class and not dixmier or dixmier and not above_1:
        raise AssertionError("ideal inclusion chain violated")
    return IdealClassification(p, True, trace_class, dixmier, weak_p, above_1, stats)
