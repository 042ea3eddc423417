"""Truncated multivariate Fourier series on the m-torus.

A series of order K keeps the modes k in {-K..K}^m as a dense complex
cube; a vector-valued series keeps one cube per component.  Values on the
torus are ``f(z) = sum_k c_k exp(i <k, z>)``.  Real-valued functions have
Hermitian coefficients, ``c_{-k} = conj(c_k)``, and every operation here
preserves that symmetry.

Analytic size is measured by the coefficient majorant
``sum_k |c_k| exp(r |k|_1)`` which dominates the sup of the series on the
complex strip of half-width r; all quantitative inequalities used by the
conjugation engine are phrased in terms of this majorant.

Series are immutable after construction and all functions are pure.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, ValidationError

__all__ = [
    "FourierSeries",
    "StripNorm",
    "from_grid",
    "to_grid",
    "from_modes",
    "zeros",
    "stack",
    "majorant_norm",
    "decay_fit",
    "compose_displacement",
    "mean",
    "remove_mean",
    "derivative",
    "shifted",
    "truncated",
    "eval_at",
    "grid_nodes",
    "reconstruction_bound",
    "to_flat",
    "from_flat",
]

_EVAL_CHUNK = 8192


class FourierSeries:
    """Truncated Fourier series on the `dim`-torus.

    Parameters
    ----------
    coeffs : array_like, complex
        Shape ``(2K+1,)*dim`` for a scalar series or
        ``(value_dim,) + (2K+1,)*dim`` for a vector-valued one.  The index
        ``i`` along each mode axis corresponds to the wavenumber ``i - K``.
    dim : int
        Torus dimension m.
    """

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, coeffs, dim: int):
        dim = int(dim)
        if dim < 1:
            raise ConfigurationError("torus dimension must be >= 1")
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == dim:
            c = c[np.newaxis, ...]
        if c.ndim != dim + 1:
            raise ConfigurationError(
                f"coefficient array rank {c.ndim} incompatible with dim={dim}"
            )
        sides = c.shape[1:]
        if any(s != sides[0] for s in sides) or sides[0] % 2 != 1:
            raise ConfigurationError(
                f"coefficient cube must have equal odd sides, got {sides}"
            )
        if c.shape[0] not in (1, dim):
            raise ConfigurationError(
                f"value_dim must be 1 or {dim}, got {c.shape[0]}"
            )
        c = np.ascontiguousarray(c)
        c.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "order", (sides[0] - 1) // 2)
        object.__setattr__(self, "coeffs", c)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("FourierSeries is immutable")

    # -- basic introspection -------------------------------------------------

    @property
    def value_dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def ks(self) -> np.ndarray:
        """Wavenumbers along one axis, -K..K."""
        return np.arange(-self.order, self.order + 1)

    def component(self, j: int) -> "FourierSeries":
        return FourierSeries(self.coeffs[j], self.dim)

    def is_zero(self, tol: float = 0.0) -> bool:
        m = np.abs(self.coeffs).max() if self.coeffs.size else 0.0
        return m <= tol

    def is_real_symmetric(self, tol: float = 1e-12) -> bool:
        """c_{-k} == conj(c_k) within tol relative to the largest mode."""
        flipped = np.conj(self.coeffs[(slice(None),) + (slice(None, None, -1),) * self.dim])
        scale = max(np.abs(self.coeffs).max(), 1e-300)
        return float(np.abs(self.coeffs - flipped).max()) <= tol * scale

    def mode(self, k) -> complex | np.ndarray:
        """Coefficient(s) at mode k (tuple of ints, or int when dim == 1)."""
        idx = _mode_index(self, k)
        vals = self.coeffs[(slice(None),) + idx]
        return complex(vals[0]) if self.value_dim == 1 else vals.copy()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"FourierSeries(dim={self.dim}, order={self.order}, "
            f"value_dim={self.value_dim})"
        )


@dataclass(frozen=True)
class StripNorm:
    """Coefficient majorant on the complex strip of half-width `radius`."""

    radius: float
    value: float


def _mode_index(f: FourierSeries, k) -> tuple:
    if np.isscalar(k):
        k = (k,)
    k = tuple(int(v) for v in k)
    if len(k) != f.dim:
        raise ValidationError(f"mode index length {len(k)} != dim {f.dim}")
    if any(abs(v) > f.order for v in k):
        raise ValidationError(f"mode {k} outside retained cube of order {f.order}")
    return tuple(v + f.order for v in k)


@functools.lru_cache(maxsize=64)
def _abs_k1(dim: int, order: int) -> np.ndarray:
    """|k|_1 over the mode cube, shape (2K+1,)*dim."""
    ax = np.abs(np.arange(-order, order + 1)).astype(float)
    out = ax
    for _ in range(dim - 1):
        out = out[..., np.newaxis] + ax
    out.setflags(write=False)
    return out


def _hermitian_part(coeffs: np.ndarray, dim: int) -> np.ndarray:
    flipped = np.conj(coeffs[(slice(None),) + (slice(None, None, -1),) * dim])
    return 0.5 * (coeffs + flipped)


# -- construction ------------------------------------------------------------


def zeros(dim: int, order: int, value_dim: int = 1) -> FourierSeries:
    return FourierSeries(
        np.zeros((value_dim,) + (2 * order + 1,) * dim, dtype=complex), dim
    )


def from_modes(dim: int, order: int, modes: Mapping, value_dim: int = 1) -> FourierSeries:
    """Series with the given nonzero modes; keys are k tuples (ints for dim 1)."""
    c = np.zeros((value_dim,) + (2 * order + 1,) * dim, dtype=complex)
    for k, v in modes.items():
        if np.isscalar(k):
            k = (k,)
        idx = tuple(int(ki) + order for ki in k)
        vv = np.asarray(v, dtype=complex).reshape(-1)
        if vv.size == 1:
            vv = np.full(value_dim, vv[0])
        c[(slice(None),) + idx] = vv
    return FourierSeries(c, dim)


def stack(components: Sequence[FourierSeries]) -> FourierSeries:
    """Vector series from scalar components (all same dim and order)."""
    dims = {c.dim for c in components}
    orders = {c.order for c in components}
    if len(dims) != 1 or len(orders) != 1:
        raise ConfigurationError("components must share dim and order")
    return FourierSeries(
        np.concatenate([c.coeffs for c in components], axis=0), components[0].dim
    )


def from_grid(samples, order: int, dim: int | None = None) -> FourierSeries:
    """Discrete Fourier coefficients of equispaced torus samples.

    `samples` has shape ``(N,)*dim`` (scalar) or ``(v,)+(N,)*dim`` (vector)
    with nodes ``x_j = 2*pi*j/N``.  Requires N >= 4*order so that the
    retained band sits well inside the grid Nyquist range; exact for
    band-limited inputs of order <= N/2 - order - 1.
    """
    s = np.asarray(samples, dtype=complex)
    if dim is None:
        dim = s.ndim
    if s.ndim == dim:
        s = s[np.newaxis, ...]
    elif s.ndim != dim + 1:
        raise ConfigurationError(
            f"sample array rank {s.ndim} incompatible with dim={dim}"
        )
    grid_shape = s.shape[1:]
    if any(n != grid_shape[0] for n in grid_shape):
        raise ConfigurationError(f"grid must be square, got {grid_shape}")
    N = grid_shape[0]
    order = int(order)
    if order < 0:
        raise ConfigurationError("order must be >= 0")
    if N < 4 * order or N < 1:
        raise ConfigurationError(
            f"grid size {N} incompatible with order {order}: need N >= {4 * order}"
        )
    c = np.fft.fftn(s, axes=tuple(range(1, dim + 1))) / float(N) ** dim
    idx = np.arange(-order, order + 1) % N
    for axis in range(1, dim + 1):
        c = np.take(c, idx, axis=axis)
    return FourierSeries(c, dim)


def to_grid(f: FourierSeries, grid_size: int) -> np.ndarray:
    """Sample the series on the equispaced N-per-axis torus grid.

    Exact evaluation at the nodes for any N >= 1 (modes beyond the grid
    alias onto their residues mod N, which is what pointwise evaluation
    does anyway).  Returns complex samples, shape ``(N,)*dim`` for scalar
    series, ``(v,)+(N,)*dim`` for vector ones.
    """
    N = int(grid_size)
    if N < 1:
        raise ConfigurationError("grid size must be >= 1")
    v = f.value_dim
    A = np.zeros((v,) + (N,) * f.dim, dtype=complex)
    idx = f.ks % N
    np.add.at(A, (slice(None),) + np.ix_(*([idx] * f.dim)), f.coeffs)
    out = np.fft.ifftn(A, axes=tuple(range(1, f.dim + 1))) * float(N) ** f.dim
    return out[0] if v == 1 else out


def grid_nodes(dim: int, grid_size: int) -> np.ndarray:
    """Node coordinates 2*pi*j/N, shape (dim,) + (N,)*dim."""
    ax = 2.0 * np.pi * np.arange(grid_size) / grid_size
    mesh = np.meshgrid(*([ax] * dim), indexing="ij")
    return np.stack(mesh, axis=0)


# -- elementwise coefficient operations --------------------------------------


def mean(f: FourierSeries):
    """Zero-mode coefficient; complex scalar, or length-v array for vectors."""
    center = (slice(None),) + (f.order,) * f.dim
    vals = f.coeffs[center]
    return complex(vals[0]) if f.value_dim == 1 else vals.copy()


def remove_mean(f: FourierSeries) -> FourierSeries:
    c = f.coeffs.copy()
    c[(slice(None),) + (f.order,) * f.dim] = 0.0
    return FourierSeries(c, f.dim)


def derivative(f: FourierSeries, axis: int = 0) -> FourierSeries:
    if not 0 <= axis < f.dim:
        raise ValidationError(f"axis {axis} out of range for dim {f.dim}")
    shape = [1] * (f.dim + 1)
    shape[axis + 1] = 2 * f.order + 1
    factor = (1j * f.ks).reshape(shape)
    return FourierSeries(f.coeffs * factor, f.dim)


def shifted(f: FourierSeries, shift) -> FourierSeries:
    """Exact translate f(. + shift) via phase multiplication."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if shift.shape != (f.dim,):
        raise ValidationError(f"shift must have length {f.dim}")
    c = f.coeffs
    for axis in range(f.dim):
        shape = [1] * (f.dim + 1)
        shape[axis + 1] = 2 * f.order + 1
        c = c * np.exp(1j * f.ks * shift[axis]).reshape(shape)
    return FourierSeries(c, f.dim)


def truncated(f: FourierSeries, order: int) -> FourierSeries:
    """Project onto (or zero-pad to) the mode cube of the given order."""
    order = int(order)
    if order == f.order:
        return f
    out = np.zeros((f.value_dim,) + (2 * order + 1,) * f.dim, dtype=complex)
    lo = min(order, f.order)
    src = (slice(None),) + (slice(f.order - lo, f.order + lo + 1),) * f.dim
    dst = (slice(None),) + (slice(order - lo, order + lo + 1),) * f.dim
    out[dst] = f.coeffs[src]
    return FourierSeries(out, f.dim)


# -- norms and decay ----------------------------------------------------------


def majorant_norm(f: FourierSeries, r: float) -> StripNorm:
    """Coefficient majorant sum_k |c_k| e^{r|k|_1} on the strip of radius r.

    For vector series the maximum over components is returned.  This
    majorant dominates the sup of the series on the closed strip, so it is
    a safe stand-in for the complex sup-norm in every inequality used here.
    """
    r = float(r)
    if r < 0:
        raise ValidationError("strip radius must be >= 0")
    w = np.exp(r * _abs_k1(f.dim, f.order))
    per_comp = np.abs(f.coeffs).reshape(f.value_dim, -1) @ w.reshape(-1)
    return StripNorm(radius=r, value=float(per_comp.max()))


def decay_fit(f: FourierSeries) -> tuple[float, float]:
    """Tightest exponential envelope |c_k| <= M exp(-|k|_1 r).

    Least-squares fit of log|c_k| against -|k|_1 over the nonzero modes
    (pooled across components), then M inflated so the bound holds for
    every retained mode.  Needs nonzero coefficients on at least two
    distinct |k|_1 shells.
    """
    absk = np.broadcast_to(_abs_k1(f.dim, f.order), f.coeffs.shape).reshape(-1)
    mags = np.abs(f.coeffs).reshape(-1)
    nz = mags > 0.0
    if not nz.any():
        raise DegenerateInputError("all coefficients are zero")
    shells = np.unique(absk[nz])
    if shells.size < 2:
        raise DegenerateInputError(
            "need nonzero coefficients on at least two |k| shells"
        )
    a = absk[nz]
    y = np.log(mags[nz])
    design = np.column_stack([np.ones_like(a), -a])
    (logM, r), *_ = np.linalg.lstsq(design, y, rcond=None)
    M = float(np.max(mags[nz] * np.exp(r * a)))
    return M, float(r)


def reconstruction_bound(M: float, r: float, delta: float, dim: int) -> float:
    """Majorant bound at radius r - delta for coefficients below M e^{-|k|r}.

    Equals ``8 ((4m-4)/e)^(m-1) M delta^-m`` with the one-dimensional
    convention 0^0 = 1; valid for 0 < delta < min(1, r).
    """
    if not 0 < delta < min(1.0, r):
        raise ValidationError("delta must lie in (0, min(1, r))")
    base = (4.0 * dim - 4.0) / math.e
    lead = 1.0 if dim == 1 else base ** (dim - 1)
    return 8.0 * lead * M * delta ** (-dim)


# -- evaluation and composition ------------------------------------------------


def eval_at(f: FourierSeries, points) -> np.ndarray:
    """Evaluate the series at arbitrary real points.

    `points` has shape ``(dim,) + S`` (a bare array is accepted when
    dim == 1).  Returns complex values of shape S for scalar series and
    ``(v,) + S`` for vector series.
    """
    pts = np.asarray(points, dtype=float)
    if f.dim == 1 and (pts.ndim == 0 or pts.shape[0] != 1):
        pts = pts[np.newaxis, ...]
    if pts.shape[0] != f.dim:
        raise ValidationError(f"points must have leading axis of length {f.dim}")
    out_shape = pts.shape[1:]
    flat = pts.reshape(f.dim, -1)
    P = flat.shape[1]
    ks = f.ks
    out = np.empty((f.value_dim, P), dtype=complex)
    for start in range(0, max(P, 1), _EVAL_CHUNK):
        sl = slice(start, min(start + _EVAL_CHUNK, P))
        if sl.start >= P:
            break
        R = f.coeffs
        for axis in range(f.dim):
            E = np.exp(1j * np.outer(flat[axis, sl], ks))
            if axis == 0:
                R = np.einsum("vi...,pi->vp...", R, E)
            else:
                R = np.einsum("vpi...,pi->vp...", R, E)
        out[:, sl] = R
    out = out.reshape((f.value_dim,) + out_shape)
    return out[0] if f.value_dim == 1 else out


def compose_displacement(
    p: FourierSeries,
    h: FourierSeries | None = None,
    shift=None,
    order: int | None = None,
    oversample: int = 4,
) -> FourierSeries:
    """Projection of ``z -> p(z + shift + h(z))`` onto a mode cube.

    The displacement `h` must be vector-valued with one component per
    torus coordinate (a scalar series qualifies when dim == 1).  The pure
    translate (h absent) is computed exactly in coefficient space; the
    general case is evaluated on an oversampled grid and re-projected, so
    the result of order `order` (default: p's order) carries an aliasing
    error controlled by the oversampling factor.
    """
    out_order = p.order if order is None else int(order)
    if shift is None:
        shift = np.zeros(p.dim)
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if shift.shape != (p.dim,):
        raise ValidationError(f"shift must have length {p.dim}")
    if h is None or h.is_zero():
        return truncated(shifted(p, shift) if shift.any() else p, out_order)
    if h.dim != p.dim:
        raise ValidationError("displacement dim differs from map dim")
    if h.value_dim != p.dim:
        raise ValidationError(
            f"displacement must have value_dim {p.dim}, got {h.value_dim}"
        )
    if oversample < 2:
        raise ConfigurationError("oversample factor must be >= 2")

    k_eval = max(p.order, h.order, out_order)
    N = oversample * (2 * k_eval + 1)
    N += N % 2
    nodes = grid_nodes(p.dim, N)
    hv = to_grid(h, N)
    if h.value_dim == 1:
        hv = hv[np.newaxis, ...]
    symmetric = p.is_real_symmetric() and h.is_real_symmetric()
    points = nodes + shift.reshape((p.dim,) + (1,) * p.dim) + hv.real
    vals = eval_at(p, points)
    if p.value_dim == 1:
        vals = vals[np.newaxis, ...]
    if symmetric:
        vals = vals.real
    out = from_grid(vals, out_order, dim=p.dim)
    if symmetric:
        out = FourierSeries(_hermitian_part(out.coeffs, p.dim), p.dim)
    return out


# -- serialization -------------------------------------------------------------


def to_flat(f: FourierSeries) -> list[float]:
    """Flat record: dim, order, value_dim, then (re, im) pairs row-major."""
    head = [float(f.dim), float(f.order), float(f.value_dim)]
    flat = f.coeffs.reshape(-1)
    body = np.column_stack([flat.real, flat.imag]).reshape(-1)
    return head + [float(x) for x in body]


def from_flat(record: Iterable[float]) -> FourierSeries:
    rec = list(record)
    if len(rec) < 3:
        raise ValidationError("flat series record too short")
    dim, order, value_dim = (int(round(x)) for x in rec[:3])
    side = 2 * order + 1
    expect = value_dim * side**dim * 2
    body = rec[3:]
    if len(body) != expect:
        raise ValidationError(
            f"flat series record has {len(body)} numbers, expected {expect}"
        )
    arr = np.asarray(body, dtype=float).reshape(-1, 2)
    c = (arr[:, 0] + 1j * arr[:, 1]).reshape((value_dim,) + (side,) * dim)
    return FourierSeries(c, dim)
