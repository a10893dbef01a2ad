"""Seeded property suite for generalized singular numbers on weighted matrix models.

Each case draws a random ``n x n`` algebra with trace ``c * Tr`` and checks
the singular-number inequalities and identities listed in
:data:`PROPERTY_NAMES` on a grid of ``t`` values.  Matrix-side quantities
(SVDs, functional calculus, trace norms) are computed with dense linear
algebra, while ``mu`` and ``sigma`` come from :mod:`spectral_core`, so every
check pits the two routes against each other.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Dict, List

import numpy as np

from .models.matrix import WeightedMatrixAlgebra
from .spectral_core import mu

NOISE = 1e-10

PROPERTY_NAMES = (
    "scaling",
    "rearrangement",
    "sum_subadditive",
    "product_submultiplicative",
    "two_sided_bound",
    "monotone",
    "sigma_superadditive",
    "sigma_subadditive",
    "interpolation_upper_bound",
    "interpolation_attained",
    "trace_of_function",
)

# nondecreasing functions with f(0) >= 0, used for rearrangement and traces
FUNCTIONS: Dict[str, Callable] = {
    "square": lambda x: x * x,
    "sqrt": np.sqrt,
    "saturating": lambda x: x / (1.0 + x),
    "clipped": lambda x: np.minimum(x, 1.5),
    "shifted": lambda x: 0.25 + x,
}


@dataclass
class PropertyResult:
    name: str
    cases: int
    checks: int
    max_violation: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= NOISE

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _functional_calculus(x, f):
    """``f(|x|)`` through the singular value decomposition."""
    _, s, vh = np.linalg.svd(x)
    return (vh.conj().T * f(s)) @ vh


def _grid(rng, alg, size=24):
    """Random ``t`` in ``[0, c n)`` kept away from the breakpoints ``c k``."""
    t = rng.uniform(0, alg.c * alg.n, size)
    frac = (t / alg.c) % 1.0
    return t[(frac > 1e-6) & (frac < 1 - 1e-6)]


class _Tracker:
    def __init__(self):
        self.stats = {name: [0, 0, 0.0] for name in PROPERTY_NAMES}

    def record(self, name, lhs, rhs, scale=1.0):
        """Record the violation of ``lhs <= rhs`` (arrays allowed)."""
        lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
        viol = float(np.max(lhs - rhs, initial=0.0)) / max(1.0, scale)
        entry = self.stats[name]
        entry[1] += lhs.size
        entry[2] = max(entry[2], viol)

    def equal(self, name, a, b, scale=1.0):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        viol = float(np.max(np.abs(a - b), initial=0.0)) / max(1.0, scale)
        entry = self.stats[name]
        entry[1] += a.size
        entry[2] = max(entry[2], viol)

    def close_case(self):
        for entry in self.stats.values():
            entry[0] += 1


def _one_case(rng, track: _Tracker):
    n = int(rng.integers(2, 8))
    c = float(rng.choice([1.0, 1.0 / 3.0, 0.5, 2.0, rng.uniform(0.1, 3.0)]))
    alg = WeightedMatrixAlgebra(n, c)
    rank = int(rng.integers(1, n + 1))
    T = alg.random(rng, rank=rank)
    S = alg.random(rng)
    A, B = alg.random(rng), alg.random(rng)
    t = _grid(rng, alg)
    s = _grid(rng, alg)[: t.size]
    t = t[: s.size]
    mu_T = alg.mu(T, t)
    scale = alg.op_norm(T) * alg.op_norm(S) + alg.op_norm(T) + alg.op_norm(S)

    lam = complex(rng.standard_normal(), rng.standard_normal())
    track.equal("scaling", alg.mu(lam * T, t), abs(lam) * mu_T, scale * abs(lam))

    for f in FUNCTIONS.values():
        fT = _functional_calculus(T, f)
        track.equal("rearrangement", alg.mu(fT, t), f(mu_T), scale + 1.0)

    track.record("sum_subadditive", alg.mu(T + S, t + s), alg.mu(T, t) + alg.mu(S, s), scale)
    track.record("product_submultiplicative", alg.mu(T @ S, t + s), alg.mu(T, t) * alg.mu(S, s), scale)
    bound = alg.op_norm(A) * mu_T * alg.op_norm(B)
    track.record("two_sided_bound", alg.mu(A @ T @ B, t), bound, scale * alg.op_norm(A) * alg.op_norm(B))

    P1 = alg.random_positive(rng)
    P2 = alg.random_positive(rng)
    track.record("monotone", alg.mu(P1, t), alg.mu(P1 + P2, t), alg.op_norm(P1 + P2))

    left = alg.sigma(P1, t) + alg.sigma(P2, s)
    track.record("sigma_superadditive", left, alg.sigma(P1 + P2, t + s), alg.op_norm(P1 + P2) * alg.c * n)
    track.record("sigma_subadditive", alg.sigma(P1 + P2, t), alg.sigma(P1, t) + alg.sigma(P2, t),
                 alg.op_norm(P1 + P2) * alg.c * n)

    # sigma_t(T) = inf ||T1||_1 + t ||T2|| over splits T = T1 + T2
    sig = alg.sigma(T, t)
    norm_scale = alg.op_norm(T) * alg.c * n
    for _ in range(4):
        T2 = rng.uniform(0, 1.5) * alg.random(rng)
        T1 = T - T2
        track.record("interpolation_upper_bound", sig, alg.trace_norm(T1) + t * alg.op_norm(T2), norm_scale)
    u, sv, vh = np.linalg.svd(T)
    attained = []
    for ti, m in zip(t, mu_T):
        T1 = (u * np.clip(sv - m, 0, None)) @ vh
        T2 = (u * np.minimum(sv, m)) @ vh
        attained.append(alg.trace_norm(T1) + ti * alg.op_norm(T2))
    track.equal("interpolation_attained", sig, attained, norm_scale)

    spec = alg.spectrum(T)
    cuts = np.concatenate(([0.0], spec._cum))
    mids = 0.5 * (cuts[1:] + cuts[:-1])
    for f in FUNCTIONS.values():
        g = (lambda x, f=f: f(x) - f(0.0))
        direct = alg.tau(_functional_calculus(T, g)).real
        integral = float(np.sum(g(mu(spec, mids)) * np.diff(cuts)))
        track.equal("trace_of_function", direct, integral, (scale + 1.0) * alg.c * n)
    track.close_case()


def run_property_suite(seed: int = 0, cases: int = 200) -> List[PropertyResult]:
    """Run ``cases`` random models from ``seed``; one result per property."""
    rng = np.random.default_rng(seed)
    track = _Tracker()
    for _ in range(cases):
        _one_case(rng, track)
    return [PropertyResult(name, *track.stats[name]) for name in PROPERTY_NAMES]

