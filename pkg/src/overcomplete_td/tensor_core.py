"""Dense symmetric third-order tensors, flattening conventions and contractions.

Components are passed around as ``(n, d)`` arrays, one unit vector per row.
All index arithmetic is 0-based; mode labels inside :class:`FlatteningSpec`
are 1-based so flattenings read the same way they are usually written, e.g.
``{1,2,3,4}{5,6}``.

Linearization rule (used everywhere in the package): inside a mode group the
first listed mode is the most significant digit, so for ``{1,2,3}{4,5,6}``
the row index is ``i1*d**2 + i2*d + i3``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when array shapes do not agree."""


@dataclass(frozen=True)
class Tensor3:
    """Dense order-3 tensor over R^d stored row-major as a ``(d, d, d)`` array."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 3 or len(set(arr.shape)) != 1:
            raise DimensionError(f"expected a (d, d, d) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @cached_property
    def mat12_3(self) -> np.ndarray:
        """The ``d^2 x d`` flattening ``T_{{1,2}{3}}``."""
        m = self.data.reshape(self.d * self.d, self.d)
        m.setflags(write=False)
        return m

    def __repr__(self):
        return f"Tensor3(d={self.d}, fro={np.linalg.norm(self.data):.6g})"


def as_tensor3(T) -> Tensor3:
    return T if isinstance(T, Tensor3) else Tensor3(np.asarray(T))


def as_components(components, d: int | None = None) -> np.ndarray:
    """Coerce to a float ``(n, d)`` array; a single vector becomes ``(1, d)``."""
    A = np.atleast_2d(np.asarray(components, dtype=np.float64))
    if A.ndim != 2:
        raise DimensionError(f"components must be a 2-D array, got ndim={A.ndim}")
    if d is not None and A.shape[1] != d:
        raise DimensionError(f"components have dimension {A.shape[1]}, expected {d}")
    return A


def build_symmetric_tensor(components) -> Tensor3:
    """Return ``T = sum_m a_m (x) a_m (x) a_m``."""
    if isinstance(components, (list, tuple)):
        dims = {len(np.ravel(a)) for a in components}
        if len(dims) > 1:
            raise DimensionError(f"components have mismatched dimensions {sorted(dims)}")
    A = as_components(components)
    if A.shape[0] < 1:
        raise ValueError("need at least one component")
    return Tensor3(np.einsum("mi,mj,mk->ijk", A, A, A))


def _check_vec(v, d: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (d,):
        raise DimensionError(f"{name} has shape {v.shape}, expected ({d},)")
    return v


def contract3(T, u, v) -> np.ndarray:
    """``out[k] = sum_{i,j} T[i,j,k] u[i] v[j]``."""
    T = as_tensor3(T)
    u = _check_vec(u, T.d, "u")
    v = _check_vec(v, T.d, "v")
    return v @ (u @ T.data.reshape(T.d, T.d * T.d)).reshape(T.d, T.d)


def eval3(T, b) -> float:
    """``<T, b (x) b (x) b>``."""
    T = as_tensor3(T)
    b = _check_vec(b, T.d, "b")
    return float(contract3(T, b, b) @ b)


@dataclass(frozen=True)
class FlatteningSpec:
    """Row/column mode grouping of an order-``k`` tensor (1-based mode labels)."""

    row_modes: tuple[int, ...]
    col_modes: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(m) for m in self.row_modes)
        cols = tuple(int(m) for m in self.col_modes)
        object.__setattr__(self, "row_modes", rows)
        object.__setattr__(self, "col_modes", cols)
        modes = rows + cols
        if sorted(modes) != list(range(1, len(modes) + 1)):
            raise ValueError(f"modes {rows}{cols} must partition 1..{len(modes)}")

    @classmethod
    def parse(cls, text: str) -> "FlatteningSpec":
        """Parse the ``"{1,2,5,6}{3,4}"`` notation."""
        parts = [p.strip("{} ") for p in text.replace("}{", "}|{").split("|")]
        if len(parts) != 2:
            raise ValueError(f"cannot parse flattening {text!r}")
        rows, cols = ([int(x) for x in p.split(",") if x.strip()] for p in parts)
        return cls(tuple(rows), tuple(cols))

    @property
    def order(self) -> int:
        return len(self.row_modes) + len(self.col_modes)

    @property
    def axes(self) -> tuple[int, ...]:
        """0-based axis permutation bringing row modes first."""
        return tuple(m - 1 for m in self.row_modes + self.col_modes)

    def shape(self, d: int) -> tuple[int, int]:
        return d ** len(self.row_modes), d ** len(self.col_modes)

    def __str__(self):
        fmt = lambda ms: "{" + ",".join(map(str, ms)) + "}"
        return fmt(self.row_modes) + fmt(self.col_modes)


def _digits_to_int(digits: Sequence[int], d: int) -> int:
    out = 0
    for x in digits:
        out = out * d + x
    return out


def _int_to_digits(value: int, count: int, d: int) -> list[int]:
    digits = [0] * count
    for pos in range(count - 1, -1, -1):
        value, digits[pos] = divmod(value, d)
    return digits


def flat_index(spec: FlatteningSpec, multi_index: Sequence[int], d: int) -> tuple[int, int]:
    """Map an order-``k`` multi-index to ``(row, col)`` of the flattening."""
    idx = [int(i) for i in multi_index]
    if len(idx) != spec.order:
        raise IndexError(f"expected {spec.order} indices, got {len(idx)}")
    if any(i < 0 or i >= d for i in idx):
        raise IndexError(f"multi-index {tuple(idx)} out of range for d={d}")
    row = _digits_to_int([idx[m - 1] for m in spec.row_modes], d)
    col = _digits_to_int([idx[m - 1] for m in spec.col_modes], d)
    return row, col


def unflat_index(spec: FlatteningSpec, row: int, col: int, d: int) -> tuple[int, ...]:
    nr, nc = spec.shape(d)
    if not (0 <= row < nr and 0 <= col < nc):
        raise IndexError(f"(row={row}, col={col}) out of range for shape {(nr, nc)}")
    idx = [0] * spec.order
    for m, x in zip(spec.row_modes, _int_to_digits(row, len(spec.row_modes), d)):
        idx[m - 1] = x
    for m, x in zip(spec.col_modes, _int_to_digits(col, len(spec.col_modes), d)):
        idx[m - 1] = x
    return tuple(idx)


def flatten(tensor: np.ndarray, spec: FlatteningSpec) -> np.ndarray:
    """Dense flattening of an order-``k`` array with all sides equal to ``d``."""
    tensor = np.asarray(tensor)
    if tensor.ndim != spec.order:
        raise DimensionError(f"tensor order {tensor.ndim} != spec order {spec.order}")
    d = tensor.shape[0]
    return np.transpose(tensor, spec.axes).reshape(spec.shape(d))


def unflatten(matrix: np.ndarray, spec: FlatteningSpec, d: int) -> np.ndarray:
    """Inverse of :func:`flatten`."""
    shaped = np.asarray(matrix).reshape((d,) * spec.order)
    return np.transpose(shaped, np.argsort(spec.axes))


def reshape_vec_to_matrix(u) -> np.ndarray:
    """``U[i, j] = u[i*d + j]`` for a length-``d^2`` vector."""
    u = np.asarray(u)
    d = int(round(np.sqrt(u.size)))
    if u.ndim != 1 or d * d != u.size:
        raise DimensionError(f"length {u.size} is not a perfect square")
    return u.reshape(d, d)


def matrix_to_vec(U) -> np.ndarray:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {U.shape}")
    return U.reshape(-1)


def kron_power(a, times: int) -> np.ndarray:
    """``a^{(x) times}`` as a flat vector (row-major)."""
    out = np.ones(1)
    for _ in range(times):
        out = np.multiply.outer(out, a).ravel()
    return out
