"""Trigonometric polynomials on the torus ``T^p`` with scalar or matrix coefficients."""

from __future__ import annotations

import itertools
import json
from typing import Dict, Tuple

import numpy as np

from .errors import PreconditionError

Index = Tuple[int, ...]


def _parse_number(value):
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    if isinstance(value, (int, float, complex)):
        return complex(value)
    raise PreconditionError(f"cannot parse coefficient {value!r}")


def _parse_coefficient(value):
    """Number, ``[re, im]`` pair, or a square matrix (list of rows) of either."""
    if isinstance(value, (list, tuple)) and value and all(isinstance(row, (list, tuple)) for row in value):
        mat = np.array([[_parse_number(v) for v in row] for row in value], dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise PreconditionError("matrix coefficients must be square")
        return mat
    return _parse_number(value)


def _encode_number(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


class TrigPoly:
    """Finite Fourier sum ``sum_m C_m exp(i m.x)`` on ``T^p``.

    Args:
        coeffs: mapping from integer index tuples (length ``p``) to complex
            scalars or ``N x N`` complex matrices.
        p: torus dimension.
    """

    def __init__(self, coeffs: Dict[Index, object], p: int = 1):
        self.p = int(p)
        clean: Dict[Index, object] = {}
        size = None
        for key, val in coeffs.items():
            key = (int(key),) if np.isscalar(key) else tuple(int(k) for k in key)
            if len(key) != self.p:
                raise PreconditionError(f"index {key} does not match dimension {self.p}")
            arr = np.asarray(val, dtype=complex)
            if arr.ndim == 0:
                this = None
            elif arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
                this = arr.shape[0]
            else:
                raise PreconditionError("coefficients must be scalars or square matrices")
            if size is None:
                size = this
            elif size != this:
                raise PreconditionError("all coefficients must share one matrix size")
            if np.any(arr != 0):
                clean[key] = arr if arr.ndim else complex(arr)
        self.coeffs = clean
        self.matrix_size = size

    # -- construction ---------------------------------------------------------

    @classmethod
    def monomial(cls, m, coefficient=1.0, p: int = 1):
        key = (int(m),) if np.isscalar(m) else tuple(m)
        return cls({key: coefficient}, p=len(key) if not np.isscalar(m) else p)

    @classmethod
    def constant(cls, value, p: int = 1):
        return cls({(0,) * p: value}, p)

    @classmethod
    def from_dict(cls, data, p: int = None):
        """Parse ``{"coeffs": {"1": 1}}`` or ``{"coeffs": [[[1, 0], 2.5], ...]}``."""
        raw = data["coeffs"] if isinstance(data, dict) and "coeffs" in data else data
        if p is None and isinstance(data, dict):
            p = data.get("p")
        items = []
        if isinstance(raw, dict):
            for key, val in raw.items():
                idx = tuple(int(k) for k in str(key).replace(" ", "").split(","))
                items.append((idx, _parse_coefficient(val)))
        elif isinstance(raw, list):
            for pair in raw:
                idx, val = pair
                idx = (int(idx),) if np.isscalar(idx) else tuple(int(k) for k in idx)
                items.append((idx, _parse_coefficient(val)))
        else:
            raise PreconditionError("coeffs must be an object or a list of pairs")
        if not items:
            raise PreconditionError("symbol has no coefficients")
        dim = p or len(items[0][0])
        return cls(dict(items), dim)

    def to_dict(self):
        out = []
        for key in sorted(self.coeffs):
            val = self.coeffs[key]
            if isinstance(val, np.ndarray):
                enc = [[_encode_number(z) for z in row] for row in val]
            else:
                enc = _encode_number(val)
            out.append([list(key), enc])
        return {"p": self.p, "coeffs": out}

    def to_json(self):
        return json.dumps(self.to_dict())

    # -- algebra ----------------------------------------------------------------

    @property
    def support(self):
        return sorted(self.coeffs)

    @property
    def degree(self) -> int:
        """Largest ``|m|_1`` in the support."""
        return max((sum(abs(k) for k in key) for key in self.coeffs), default=0)

    def _zero(self):
        return 0j if self.matrix_size is None else np.zeros((self.matrix_size,) * 2, complex)

    def coefficient(self, m):
        key = (int(m),) if np.isscalar(m) else tuple(m)
        return self.coeffs.get(key, self._zero())

    def __add__(self, other):
        other = other if isinstance(other, TrigPoly) else TrigPoly.constant(other, self.p)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TrigPoly(out, self.p)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly({k: -v for k, v in self.coeffs.items()}, self.p)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            return TrigPoly({k: v * other for k, v in self.coeffs.items()}, self.p)
        out: Dict[Index, object] = {}
        for (k1, v1), (k2, v2) in itertools.product(self.coeffs.items(), other.coeffs.items()):
            key = tuple(a + b for a, b in zip(k1, k2))
            prod = v1 @ v2 if isinstance(v1, np.ndarray) and isinstance(v2, np.ndarray) else v1 * v2
            out[key] = out.get(key, 0) + prod
        return TrigPoly(out, self.p)

    def __rmul__(self, other):
        return TrigPoly({k: other * v for k, v in self.coeffs.items()}, self.p)

    def adjoint(self):
        """Pointwise conjugate transpose: ``u*(x) = sum conj(C_m)^T exp(-i m.x)``."""
        out = {}
        for k, v in self.coeffs.items():
            key = tuple(-a for a in k)
            out[key] = v.conj().T if isinstance(v, np.ndarray) else np.conj(v)
        return TrigPoly(out, self.p)

    def is_monomial(self) -> bool:
        return len(self.coeffs) == 1

    # -- evaluation ----------------------------------------------------------------

    def __call__(self, x):
        """Evaluate at points ``x`` of shape ``(..., p)`` (or ``(...)`` when ``p == 1``)."""
        x = np.asarray(x, dtype=float)
        if self.p == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        shape = x.shape[:-1]
        if self.matrix_size is None:
            out = np.zeros(shape, complex)
        else:
            out = np.zeros(shape + (self.matrix_size,) * 2, complex)
        for key, val in self.coeffs.items():
            phase = np.exp(1j * (x @ np.asarray(key, dtype=float)))
            out = out + (phase[..., None, None] * val if isinstance(val, np.ndarray) else phase * val)
        return out

    def derivative(self, axis: int):
        """Partial derivative along coordinate ``axis``."""
        return TrigPoly({k: 1j * k[axis] * v for k, v in self.coeffs.items() if k[axis] != 0}, self.p)

    def mean(self):
        return self.coefficient((0,) * self.p)

    def inverse(self, grid: int = 4096, tol: float = 1e-14):
        """Fourier coefficients of ``1/u`` on the circle (exact for monomials).

        Returns a :class:`TrigPoly` truncated where coefficients fall below
        ``tol`` times the largest one.
        """
        if self.p != 1:
            raise PreconditionError("symbol inversion is implemented on the circle only")
        if self.is_monomial():
            (key, val), = self.coeffs.items()
            inv = np.linalg.inv(val) if isinstance(val, np.ndarray) else 1.0 / val
            return TrigPoly({(-key[0],): inv}, 1)
        theta = 2 * np.pi * np.arange(grid) / grid
        values = self(theta)
        if self.matrix_size is None:
            if np.min(np.abs(values)) < 1e-12 * np.max(np.abs(values)):
                raise PreconditionError("symbol vanishes on the circle; not invertible")
            inv_vals = 1.0 / values
        else:
            dets = np.abs(np.linalg.det(values))
            if np.min(dets) < 1e-12 * np.max(dets):
                raise PreconditionError("symbol is singular somewhere on the circle")
            inv_vals = np.linalg.inv(values)
        coeffs = np.fft.fft(inv_vals, axis=0) / grid
        freqs = np.fft.fftfreq(grid, 1.0 / grid).astype(int)
        mags = np.abs(coeffs).reshape(grid, -1).max(axis=1)
        if mags[np.abs(freqs) >= grid // 4].max(initial=0) > 1e3 * tol * mags.max():
            raise PreconditionError("inverse symbol decays too slowly for the sampling grid")
        keep = mags > tol * mags.max()
        return TrigPoly({(int(f),): c for f, c, k in zip(freqs, coeffs, keep) if k}, 1)

    def min_modulus(self, grid: int = 4096) -> float:
        """Minimum over the circle of ``|u|`` (or of the smallest singular value)."""
        theta = 2 * np.pi * np.arange(grid) / grid
        values = self(theta)
        if self.matrix_size is None:
            return float(np.min(np.abs(values)))
        return float(np.min(np.linalg.svd(values, compute_uv=False)))

    def winding_number(self, grid: int = 4096) -> int:
        """Winding number of ``det u`` around 0 (circle only)."""
        theta = 2 * np.pi * np.arange(grid + 1) / grid
        values = self(theta)
        if self.matrix_size is not None:
            values = np.linalg.det(values)
        phase = np.unwrap(np.angle(values))
        return int(round((phase[-1] - phase[0]) / (2 * np.pi)))

    def __repr__(self):
        return f"TrigPoly(p={self.p}, support={self.support})"
