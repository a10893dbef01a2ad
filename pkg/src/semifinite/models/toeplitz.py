"""Toeplitz operators on the Hardy space of the circle, in the Fourier basis."""

from __future__ import annotations

from functools import cached_property

import numpy as np
from scipy import sparse

from ..errors import PreconditionError
from ..trig import TrigPoly

DEFAULT_CUTOFF = 512


def band_matrix(symbol: TrigPoly, rows: np.ndarray, cols: np.ndarray, *, fmt: str = "dense"):
    """Matrix of multiplication by ``symbol`` from ``span{e_cols}`` to ``span{e_rows}``.

    Entry block ``(j, k)`` is the coefficient ``C_{j-k}``; matrix symbols give
    ``N x N`` blocks with basis index ``mode * N + component``.  ``rows`` and
    ``cols`` must be contiguous increasing mode ranges.  The result is real
    when every coefficient is real; ``fmt`` is ``"dense"`` or a scipy sparse
    format name.
    """
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    size = symbol.matrix_size or 1
    real = all(np.all(np.imag(c) == 0) for c in symbol.coeffs.values())
    dtype = float if real else complex
    r_idx, c_idx, vals = [], [], []
    block_r, block_c = np.divmod(np.arange(size * size), size)
    for (m,), coef in symbol.coeffs.items():
        # rows j = k + m with k in cols and j in rows
        lo = max(cols[0], rows[0] - m) if cols.size and rows.size else 0
        hi = min(cols[-1], rows[-1] - m) if cols.size and rows.size else -1
        if hi < lo:
            continue
        k = np.arange(lo, hi + 1)
        j = k + m
        ri = (j - rows[0])[:, None] * size + block_r[None, :]
        ci = (k - cols[0])[:, None] * size + block_c[None, :]
        v = np.broadcast_to(np.asarray(coef, dtype=complex).reshape(-1), ri.shape)
        r_idx.append(ri.ravel())
        c_idx.append(ci.ravel())
        vals.append(v.ravel())
    shape = (rows.size * size, cols.size * size)
    if r_idx:
        r_all, c_all, v_all = np.concatenate(r_idx), np.concatenate(c_idx), np.concatenate(vals)
    else:
        r_all = c_all = np.zeros(0, int)
        v_all = np.zeros(0, complex)
    if real:
        v_all = v_all.real
    out = sparse.coo_matrix((v_all, (r_all, c_all)), shape=shape, dtype=dtype)
    if fmt == "dense":
        return out.toarray()
    return out.asformat(fmt)


class ToeplitzModel:
    """``T = P u P`` on the Hardy space, ``P`` the projection onto modes ``n >= 0``.

    Args:
        symbol: trigonometric polynomial ``u`` (scalar or matrix valued).
        cutoff: mode cutoff ``M`` for truncations.
        c: transverse trace scale, ``tau = c * Tr``.
    """

    def __init__(self, symbol: TrigPoly, cutoff: int = DEFAULT_CUTOFF, c: float = 1.0):
        if symbol.p != 1:
            raise PreconditionError("Toeplitz symbols live on the circle (p = 1)")
        if not symbol.coeffs:
            raise PreconditionError("zero symbol")
        if not c > 0:
            raise PreconditionError("trace scale must be positive")
        self.symbol = symbol
        self.cutoff = int(cutoff)
        self.c = float(c)

    @property
    def size(self) -> int:
        return self.symbol.matrix_size or 1

    @property
    def modes(self):
        return [m for (m,) in self.symbol.coeffs]

    @property
    def bandwidth(self) -> int:
        return max(abs(m) for m in self.modes)

    def is_invertible(self, grid: int = 4096) -> bool:
        theta = 2 * np.pi * np.arange(grid) / grid
        vals = self.symbol(theta)
        if self.symbol.matrix_size is None:
            mags = np.abs(vals)
        else:
            mags = np.linalg.svd(vals, compute_uv=False).min(axis=-1)
        return bool(mags.min() > 1e-10 * mags.max())

    @cached_property
    def inverse_symbol(self) -> TrigPoly:
        if not self.is_invertible():
            raise PreconditionError("symbol is not invertible on the circle")
        return self.symbol.inverse()

    def with_cutoff(self, cutoff: int) -> "ToeplitzModel":
        out = ToeplitzModel(self.symbol, cutoff, self.c)
        if "inverse_symbol" in self.__dict__:
            out.__dict__["inverse_symbol"] = self.inverse_symbol
        return out

    def with_scale(self, c: float) -> "ToeplitzModel":
        out = ToeplitzModel(self.symbol, self.cutoff, c)
        if "inverse_symbol" in self.__dict__:
            out.__dict__["inverse_symbol"] = self.inverse_symbol
        return out

    # -- truncations -------------------------------------------------------------------

    def tall(self, cutoff: int = None, adjoint: bool = False) -> np.ndarray:
        """``T`` (or ``T*``) restricted to modes ``0..M`` with every image row kept.

        Keeping all rows reached by the band means no spurious kernel appears
        at the truncation edge.
        """
        m = self.cutoff if cutoff is None else int(cutoff)
        sym = self.symbol.adjoint() if adjoint else self.symbol
        reach = max(max(k for (k,) in sym.coeffs), 0)
        return band_matrix(sym, np.arange(0, m + reach + 1), np.arange(0, m + 1))

    def square(self, size: int, with_parametrix: bool = True, fmt: str = "dense"):
        """Square truncations ``(T_K, S_K)`` on modes ``0..K`` with ``S = P u^{-1} P``."""
        modes = np.arange(0, int(size) + 1)
        T = band_matrix(self.symbol, modes, modes, fmt=fmt)
        if not with_parametrix:
            return T, None
        return T, band_matrix(self.inverse_symbol, modes, modes, fmt=fmt)

    def parametrix_bandwidth(self) -> int:
        return max(abs(m) for (m,) in self.inverse_symbol.coeffs)


def toeplitz(symbol, cutoff: int = DEFAULT_CUTOFF, c: float = 1.0, *, require_invertible: bool = True):
    """Build a :class:`ToeplitzModel` and its square truncations ``(T, S)``.

    Returns ``(model, T, S)`` with ``T`` and ``S`` on modes ``0..cutoff``.
    """
    if not isinstance(symbol, TrigPoly):
        symbol = TrigPoly.from_dict(symbol, p=1)
    model = ToeplitzModel(symbol, cutoff, c)
    if require_invertible:
        T, S = model.square(cutoff)
    else:
        T, S = model.square(cutoff, with_parametrix=False)
    return model, T, S


def sign_commutator_rank(symbol: TrigPoly, window: int = None) -> int:
    """Rank of ``[F, u]`` on the full circle (``F = +1`` on modes ``n >= 0``)."""
    b = max(abs(m) for (m,) in symbol.coeffs)
    window = window or 4 * b + 4
    modes = np.arange(-window, window + 1)
    U = band_matrix(symbol, modes, modes)
    size = symbol.matrix_size or 1
    f = np.repeat(np.where(modes >= 0, 1.0, -1.0), size)
    comm = f[:, None] * U - U * f[None, :]
    s = np.linalg.svd(comm, compute_uv=False)
    return int(np.sum(s > 1e-10 * max(s.max(initial=0), 1.0)))
