"""Matrix-free application of the lifted sixth-order operator.

The lifted operator is the d^3 x d^3 matrix

    M = sum_{i,j,k,l} <a_i,a_j><a_i,a_k><a_i,a_l> (a_j a_j^T) (x) (a_k a_k^T) (x) (a_l a_l^T)

with ``(x)`` the Kronecker product of d x d matrices. It only depends on T:
``M = sum_{x,y,z} T[x,y,z] T_x (x) T_y (x) T_z`` with ``T_x = T[:, :, x]``,
i.e. a ternary tree of four copies of T. Applying it never forms the d^6
matrix; each block of columns goes through four dense matmul stages:

    (a) X_{(s,t),u} @ T_{u,(r,z)}                         (k d^2 x d) @ (d x d^2)
    (b) G = T_{{1,2}{3}} T_{{3}{1,2}}                     cached, d^2 x d^2
    (c) G_{(x,q),(z,t)} @ A_{(z,t),(s,r)} per column      d^2 x d^2 @ d^2 x d^2
    (d) C_{(q,r),(x,s)} @ T_{(x,s),p}                     (k d^2 x d^2) @ (d^2 x d)

Sixth-order mode labels. Rows of M carry physical indices (r0, r1, r2) and
columns (c0, c1, c2). The package labels them so that the d^2 super-modes
{1,2}, {3,4}, {5,6} are (r0,c0), (r1,r2), (c1,c2); M is therefore the
``{1,3,4}{2,5,6}`` flattening (:data:`LIFT_FLATTENING`). With this choice
both rectangular flattenings used by truncation keep a super-mode entirely
on one side of the factor pair, and the signal term
``sum_i (a_i^{(x)3})(a_i^{(x)3})^T`` is unaffected by the labelling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor_core import DimensionError, FlatteningSpec, Tensor3, as_components, as_tensor3

LIFT_FLATTENING = FlatteningSpec((1, 3, 4), (2, 5, 6))
FLAT_A = FlatteningSpec((1, 2, 3, 4), (5, 6))
FLAT_B = FlatteningSpec((1, 2, 5, 6), (3, 4))

DENSE_DIM_LIMIT = 12

# columns per stage-(c) batch; keeps the k x d^4 intermediates bounded
_BLOCK_ENTRIES = 1 << 22


class NonFiniteError(FloatingPointError):
    """A computation produced NaN or inf."""


@dataclass(frozen=True)
class LiftedOperator:
    """The lifted operator of a symmetric order-3 tensor."""

    tensor: Tensor3
    gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        T = as_tensor3(self.tensor)
        object.__setattr__(self, "tensor", T)
        data = T.data
        asym = max(
            np.abs(data - data.transpose(1, 0, 2)).max(),
            np.abs(data - data.transpose(0, 2, 1)).max(),
        )
        if asym > 1e-10 * max(1.0, np.abs(data).max()):
            raise ValueError(f"tensor is not symmetric (max deviation {asym:.3g})")
        d = T.d
        T12 = T.mat12_3
        # stage (b), input independent: G[(x,z),(q,t)] = sum_y T[x,z,y] T[q,t,y]
        G = T12 @ T12.T
        Gk = G.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
        Gk = np.ascontiguousarray(Gk)
        Gk.setflags(write=False)
        object.__setattr__(self, "gram", Gk)

    @property
    def d(self) -> int:
        return self.tensor.d

    @property
    def dim(self) -> int:
        return self.tensor.d ** 3

    def __call__(self, X):
        return lifted_matmat(self, X)

    def __repr__(self):
        return f"LiftedOperator(d={self.d})"


def _matmat_block(op: LiftedOperator, X: np.ndarray) -> np.ndarray:
    d = op.d
    k = X.shape[1]
    T12 = op.tensor.mat12_3
    # (a) A[c, s, t, r, z] = sum_u X_c[s, t, u] T[u, r, z]
    A = X.T.reshape(k * d * d, d) @ T12.T
    A = A.reshape(k, d, d, d, d).transpose(0, 4, 2, 1, 3).reshape(k, d * d, d * d)
    # (c) C[c, (x,q), (s,r)] = sum_{z,t} G[(x,q),(z,t)] A[c, (z,t), (s,r)]
    C = np.matmul(op.gram, A)
    # (d) out[c, q, r, p] = sum_{x,s} C[c, x, q, s, r] T[x, s, p]
    C = C.reshape(k, d, d, d, d).transpose(0, 2, 4, 1, 3).reshape(k * d * d, d * d)
    out = (C @ T12).reshape(k, d, d, d)
    return out.transpose(3, 1, 2, 0).reshape(d ** 3, k)


def lifted_matmat(op: LiftedOperator, X) -> np.ndarray:
    """Return ``M @ X`` for a ``d^3 x k`` block (a 1-D ``X`` is treated as one column)."""
    X = np.asarray(X, dtype=np.float64)
    vector = X.ndim == 1
    if vector:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != op.dim:
        raise DimensionError(f"X has shape {X.shape}, expected ({op.dim}, k)")
    if X.shape[1] == 0:
        raise DimensionError("X must have at least one column")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("input block contains non-finite values")
    block = max(1, _BLOCK_ENTRIES // op.d ** 4)
    parts = [_matmat_block(op, X[:, s:s + block]) for s in range(0, X.shape[1], block)]
    out = parts[0] if len(parts) == 1 else np.concatenate(parts, axis=1)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("lifted operator produced non-finite values")
    return out[:, 0] if vector else out


def _guard(d: int):
    if d > DENSE_DIM_LIMIT:
        raise DimensionError(f"dense d^6 oracle refused for d={d} > {DENSE_DIM_LIMIT}")


def dense_quadsum_oracle(components) -> np.ndarray:
    """The lifted matrix summed term by term over all (i, j, k, l). Test-only."""
    A = as_components(components)
    n, d = A.shape
    _guard(d)
    gram = A @ A.T
    P = [np.outer(a, a) for a in A]
    M = np.zeros((d ** 3, d ** 3))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                PjPk = np.kron(P[j], P[k])
                for l in range(n):
                    c = gram[i, j] * gram[i, k] * gram[i, l]
                    M += c * np.kron(PjPk, P[l])
    return M


def dense_lifted_matrix(op: LiftedOperator) -> np.ndarray:
    """Materialize the operator column by column (cross-validation only)."""
    _guard(op.d)
    return lifted_matmat(op, np.eye(op.dim))
