"""Finite-dimensional matrix *-algebras and three-party commuting scenarios.

Every algebra is stored in the canonical form

    U X U* = (+)_i  M_{n_i} (x) I_{m_i}

so that structural questions (abelianness, matrix-block sizes) are read off
the block list, and the trace-orthogonal projection onto the algebra is a
partial trace over each multiplicity factor.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import dagger, op_norm, permutation_unitary

TOL_UNITARY = 1e-10
DEFAULT_MAX_DIM = 64


class AlgebraError(ValueError):
    """Raised for inconsistent algebra or scenario construction."""


def max_ambient_dim() -> int:
    """Ambient dimension cap, read from ``BILOC_MAX_DIM`` (default 64)."""
    raw = os.environ.get("BILOC_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DIM


def tol_commute(d: int) -> float:
    return 1e-10 * d


@dataclass(frozen=True, eq=False)
class MatrixAlgebra:
    ambient_dim: int
    blocks: tuple[tuple[int, int], ...]
    embedding: np.ndarray
    basis: np.ndarray = field(repr=False)

    @property
    def offsets(self) -> list[int]:
        out, acc = [], 0
        for n, m in self.blocks:
            out.append(acc)
            acc += n * m
        return out

    def to_blocks(self, X: np.ndarray) -> np.ndarray:
        U = self.embedding
        return U @ X @ dagger(U)

    def from_blocks(self, Y: np.ndarray) -> np.ndarray:
        U = self.embedding
        return dagger(U) @ Y @ U

    def compress(self, X: np.ndarray) -> list[np.ndarray]:
        """Per-block n_i x n_i images of X under the normalized partial trace."""
        Y = self.to_blocks(X)
        out = []
        for (n, m), o in zip(self.blocks, self.offsets):
            sub = Y[o:o + n * m, o:o + n * m].reshape(n, m, n, m)
            out.append(np.einsum("ajbj->ab", sub) / m)
        return out

    def expand(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        """Inverse of :meth:`compress` on the algebra: rebuild the ambient operator."""
        d = self.ambient_dim
        Y = np.zeros((d, d), dtype=complex)
        for (n, m), o, P in zip(self.blocks, self.offsets, parts):
            Y[o:o + n * m, o:o + n * m] = np.kron(P, np.eye(m))
        return self.from_blocks(Y)

    def project(self, X: np.ndarray) -> np.ndarray:
        """Trace-orthogonal projection of an arbitrary (not necessarily Hermitian) X."""
        return self.expand(self.compress(np.asarray(X, dtype=complex)))


def _matrix_units(n: int) -> list[np.ndarray]:
    units = []
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1.0
            units.append(e)
    return units


def make_block_algebra(
    ambient_dim: int,
    blocks: Sequence[Sequence[int]],
    embedding: np.ndarray | None = None,
) -> MatrixAlgebra:
    """Build the algebra U* ((+)_i M_{n_i} (x) I_{m_i}) U.

    The basis consists of embedded matrix units, one per (block, j, k), each
    of unit operator norm.
    """
    blocks = tuple((int(n), int(m)) for n, m in blocks)
    if any(n < 1 or m < 1 for n, m in blocks):
        raise AlgebraError("block sizes and multiplicities must be positive")
    total = sum(n * m for n, m in blocks)
    if total != ambient_dim:
        raise AlgebraError(
            f"dimension mismatch: blocks cover {total}, ambient dimension is {ambient_dim}"
        )
    U = np.eye(ambient_dim, dtype=complex) if embedding is None else np.asarray(embedding, dtype=complex)
    if U.shape != (ambient_dim, ambient_dim):
        raise AlgebraError(f"embedding has shape {U.shape}, expected {(ambient_dim, ambient_dim)}")
    dev = op_norm(U @ dagger(U) - np.eye(ambient_dim))
    if dev > TOL_UNITARY:
        raise AlgebraError(f"non-unitary embedding (deviation {dev:.3e})")

    proto = MatrixAlgebra(ambient_dim, blocks, U, np.empty((0, ambient_dim, ambient_dim)))
    basis = []
    for i, (n, _) in enumerate(blocks):
        for e in _matrix_units(n):
            parts = [np.zeros((bn, bn)) for bn, _ in blocks]
            parts[i] = e
            basis.append(proto.expand(parts))
    basis = np.array(basis)
    basis.setflags(write=False)
    U.setflags(write=False)
    return MatrixAlgebra(ambient_dim, blocks, U, basis)


def leg_algebra(
    dims: Sequence[int],
    legs: Sequence[int],
    local_blocks: Sequence[Sequence[int]] | None = None,
    local_embedding: np.ndarray | None = None,
) -> MatrixAlgebra:
    """Algebra acting on a subset of tensor legs, identity on the others.

    ``local_blocks``/``local_embedding`` describe the algebra on the joint
    space of ``legs`` (full matrix algebra by default).
    """
    dims = [int(x) for x in dims]
    legs = list(legs)
    rest = [k for k in range(len(dims)) if k not in legs]
    d = int(np.prod(dims))
    d_local = int(np.prod([dims[k] for k in legs])) if legs else 1
    r = d // d_local
    if local_blocks is None:
        local_blocks = [(d_local, 1)]
    V = np.eye(d_local) if local_embedding is None else np.asarray(local_embedding)
    P = permutation_unitary(dims, legs + rest)
    U = np.kron(V, np.eye(r)) @ P
    blocks = [(n, m * r) for n, m in local_blocks]
    return make_block_algebra(d, blocks, U)


@dataclass(frozen=True, eq=False)
class Scenario:
    dim: int
    alg_A: MatrixAlgebra
    alg_B: MatrixAlgebra
    alg_C: MatrixAlgebra
    labels: tuple[str, str, str] = ("A", "B", "C")
    tensor_dims: tuple[int, int, int, int] | None = None

    def __post_init__(self):
        for alg in (self.alg_A, self.alg_B, self.alg_C):
            if alg.ambient_dim != self.dim:
                raise AlgebraError(
                    f"dimension mismatch: algebra on {alg.ambient_dim}, scenario on {self.dim}"
                )

    def algebra(self, party: str) -> MatrixAlgebra:
        return {"A": self.alg_A, "B": self.alg_B, "C": self.alg_C}[party]


def make_tensor_scenario(
    d_A: int,
    d_B1: int,
    d_B2: int,
    d_C: int,
    blocks_A: Sequence[Sequence[int]] | None = None,
    blocks_B: Sequence[Sequence[int]] | None = None,
    blocks_C: Sequence[Sequence[int]] | None = None,
) -> Scenario:
    """Tensor-product scenario on legs (A, B1, B2, C).

    Bob owns the two middle legs. The optional ``blocks_*`` arguments replace
    a party's full matrix algebra by a block subalgebra of its local space,
    e.g. ``blocks_A=[(1, 1)] * d_A`` for a diagonal (abelian) Alice.
    """
    dims = (int(d_A), int(d_B1), int(d_B2), int(d_C))
    if min(dims) < 1:
        raise AlgebraError("all tensor dimensions must be >= 1")
    d = int(np.prod(dims))
    cap = max_ambient_dim()
    if d > cap:
        raise AlgebraError(f"scenario too large: dimension {d} exceeds {cap}")
    alg_A = leg_algebra(dims, [0], blocks_A)
    alg_B = leg_algebra(dims, [1, 2], blocks_B)
    alg_C = leg_algebra(dims, [3], blocks_C)
    return Scenario(d, alg_A, alg_B, alg_C, tensor_dims=dims)


def check_mutual_commutation(s: Scenario) -> float:
    """Largest commutator norm over basis pairs from distinct parties."""
    worst = 0.0
    algs = (s.alg_A, s.alg_B, s.alg_C)
    for i in range(3):
        for j in range(i + 1, 3):
            for X in algs[i].basis:
                XY = np.einsum("ab,kbc->kac", X, algs[j].basis)
                YX = np.einsum("kab,bc->kac", algs[j].basis, X)
                for D in XY - YX:
                    if np.any(D):
                        worst = max(worst, op_norm(D))
    return worst


def is_valid_scenario(s: Scenario) -> bool:
    return check_mutual_commutation(s) <= tol_commute(s.dim)


def _check_hermitian(X: np.ndarray, what: str = "operator") -> None:
    scale = max(1.0, float(np.max(np.abs(X))) if X.size else 1.0)
    if np.max(np.abs(X - dagger(X)), initial=0.0) > 1e-12 * scale:
        raise AlgebraError(f"{what} is not Hermitian")


def conditional_expectation(alg: MatrixAlgebra, X: np.ndarray) -> np.ndarray:
    """Hilbert-Schmidt projection of a Hermitian X onto ``alg``."""
    X = np.asarray(X, dtype=complex)
    _check_hermitian(X, "input to conditional expectation")
    E = alg.project(X)
    return (E + dagger(E)) / 2


def membership_residual(alg: MatrixAlgebra, X: np.ndarray) -> float:
    X = np.asarray(X, dtype=complex)
    return op_norm(X - alg.project(X))


def is_abelian(alg: MatrixAlgebra) -> bool:
    return all(n == 1 for n, _ in alg.blocks)


def contains_M2(alg: MatrixAlgebra) -> bool:
    # block-size criterion; whether the copy of M_2 must be unital is left open
    return any(n >= 2 for n, _ in alg.blocks)


def sign_in_algebra(alg: MatrixAlgebra, H: np.ndarray, rel_zero: float = 1e-12) -> np.ndarray:
    """Sign operator of a Hermitian element of ``alg``, eigenvalue 0 mapped to +1.

    Computed block by block on the compressed n_i x n_i parts, so the result
    lies in the algebra exactly up to the embedding round-off.
    """
    parts = alg.compress(H)
    scale = max((np.max(np.abs(P)) for P in parts), default=0.0)
    out = []
    for P in parts:
        P = (P + dagger(P)) / 2
        w, V = np.linalg.eigh(P)
        s = np.where(w < -rel_zero * scale, -1.0, 1.0)
        out.append((V * s) @ dagger(V))
    S = alg.expand(out)
    return (S + dagger(S)) / 2


def random_sign_element(alg: MatrixAlgebra, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix, projected onto ``alg``, then mapped through sign."""
    d = alg.ambient_dim
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    H = conditional_expectation(alg, (G + dagger(G)) / 2)
    return sign_in_algebra(alg, H)


def anticommuting_pair(alg: MatrixAlgebra) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Two anticommuting Hermitian elements X, Y of ``alg`` with X^2 = Y^2 = P.

    Each block M_n carries floor(n/2) copies of (sigma_x, sigma_z); P is the
    projection they live on, so P = I exactly when every block size is even.
    Raises if no block has n >= 2.
    """
    if not contains_M2(alg):
        raise AlgebraError("algebra has no matrix block of size >= 2")
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)

    def lift(p):
        parts = []
        for n, _ in alg.blocks:
            part = np.zeros((n, n), dtype=complex)
            k = n // 2
            part[:2 * k, :2 * k] = np.kron(np.eye(k), p)
            parts.append(part)
        return alg.expand(parts)

    X, Y = lift(sx), lift(sz)
    return X, Y, X @ X
