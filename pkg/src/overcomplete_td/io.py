"""Little-endian binary formats for tensors, component sets and eigenpairs.

``T3DX``: magic, u32 version=1, u32 order, u32 dims[order], f64 entries (row-major).
``CMPX``: magic, u32 version=1, u32 d, u32 n, then n f64 vectors of length d.
``EIGX``: magic, u32 rows, u32 k, f64 eigvals[k], f64 U column-major.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .tensor_core import Tensor3

TENSOR_MAGIC = b"T3DX"
COMPONENTS_MAGIC = b"CMPX"
EIG_MAGIC = b"EIGX"
VERSION = 1

_F64 = np.dtype("<f8")


class FormatError(ValueError):
    pass


def _read_exact(fh, nbytes: int) -> bytes:
    buf = fh.read(nbytes)
    if len(buf) != nbytes:
        raise FormatError(f"truncated file: wanted {nbytes} bytes, got {len(buf)}")
    return buf


def _expect_magic(fh, magic: bytes):
    got = _read_exact(fh, 4)
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}")


def _u32(fh, count=1):
    vals = struct.unpack(f"<{count}I", _read_exact(fh, 4 * count))
    return vals if count > 1 else vals[0]


def _f64(fh, count: int) -> np.ndarray:
    return np.frombuffer(_read_exact(fh, 8 * count), dtype=_F64).astype(np.float64)


def write_tensor(path: str | os.PathLike, T) -> None:
    data = T.data if isinstance(T, Tensor3) else np.asarray(T, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<II", VERSION, data.ndim))
        fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
        fh.write(np.ascontiguousarray(data, dtype=_F64).tobytes())


def read_tensor_array(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        _expect_magic(fh, TENSOR_MAGIC)
        version, order = _u32(fh, 2)
        if version != VERSION:
            raise FormatError(f"unsupported T3DX version {version}")
        dims = _u32(fh, order) if order > 1 else (_u32(fh),)
        size = int(np.prod(dims))
        data = _f64(fh, size).reshape(dims)
        if fh.read(1):
            raise FormatError("trailing bytes after tensor payload")
    return data


def read_tensor(path: str | os.PathLike) -> Tensor3:
    data = read_tensor_array(path)
    if data.ndim != 3:
        raise FormatError(f"expected an order-3 tensor, file holds order {data.ndim}")
    return Tensor3(data)


def write_components(path: str | os.PathLike, components) -> None:
    A = np.atleast_2d(np.asarray(components, dtype=np.float64))
    n, d = A.shape
    with open(path, "wb") as fh:
        fh.write(COMPONENTS_MAGIC)
        fh.write(struct.pack("<III", VERSION, d, n))
        fh.write(np.ascontiguousarray(A, dtype=_F64).tobytes())


def read_components(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        _expect_magic(fh, COMPONENTS_MAGIC)
        version, d, n = _u32(fh, 3)
        if version != VERSION:
            raise FormatError(f"unsupported CMPX version {version}")
        A = _f64(fh, n * d).reshape(n, d)
        if fh.read(1):
            raise FormatError("trailing bytes after component payload")
    return A


def write_eig(path: str | os.PathLike, U, eigvals) -> None:
    U = np.asarray(U, dtype=np.float64)
    lam = np.asarray(eigvals, dtype=np.float64)
    rows, k = U.shape
    if lam.shape != (k,):
        raise ValueError(f"{lam.shape[0]} eigenvalues for {k} columns")
    with open(path, "wb") as fh:
        fh.write(EIG_MAGIC)
        fh.write(struct.pack("<II", rows, k))
        fh.write(lam.astype(_F64).tobytes())
        fh.write(np.asfortranarray(U).astype(_F64).tobytes(order="F"))


def read_eig(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    with open(path, "rb") as fh:
        _expect_magic(fh, EIG_MAGIC)
        rows, k = _u32(fh, 2)
        lam = _f64(fh, k)
        U = _f64(fh, rows * k).reshape((rows, k), order="F")
        if fh.read(1):
            raise FormatError("trailing bytes after eigenpair payload")
    return U, lam
