"""Small dense linear-algebra helpers shared across modules."""

from __future__ import annotations

from typing import Sequence

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
PAULIS = (I2, SX, SY, SZ)


def dagger(X: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(X, -1, -2))


def op_norm(X: np.ndarray) -> float:
    """Largest singular value, via the spectrum of X* X."""
    X = np.asarray(X)
    if X.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(dagger(X) @ X)
    return float(np.sqrt(max(w[-1], 0.0)))


def herm(X: np.ndarray) -> np.ndarray:
    return (X + dagger(X)) / 2


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def permutation_unitary(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Unitary P with P (X_0 (x) X_1 (x) ...) P* = X_order[0] (x) X_order[1] (x) ..."""
    dims = [int(x) for x in dims]
    d = int(np.prod(dims))
    idx = np.arange(d).reshape(dims).transpose(list(order)).ravel()
    P = np.zeros((d, d), dtype=complex)
    P[np.arange(d), idx] = 1.0
    return P


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every leg not listed in ``keep`` (kept legs stay in original order)."""
    dims = [int(x) for x in dims]
    n = len(dims)
    keep = sorted(keep)
    T = np.asarray(rho).reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = [letters[n + k] if k in keep else row[k] for k in range(n)]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, T)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return res.reshape(dk, dk)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (Ginibre construction)."""
    rank = n if rank is None else rank
    G = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = G @ dagger(G)
    return rho / np.trace(rho).real


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return herm(G)


def sign_hermitian(H: np.ndarray, rel_zero: float = 1e-12) -> np.ndarray:
    w, V = np.linalg.eigh(herm(H))
    scale = np.max(np.abs(w), initial=0.0)
    s = np.where(w < -rel_zero * scale, -1.0, 1.0)
    return (V * s) @ dagger(V)


def ket(bits: str, d: int = 2) -> np.ndarray:
    v = np.zeros(d ** len(bits), dtype=complex)
    v[int(bits, d)] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())
