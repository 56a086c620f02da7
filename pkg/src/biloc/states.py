"""Network states: density matrices on the shared space plus source-independence bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import Scenario
from .linalg import dagger, op_norm, proj

TOL_STATE = 1e-12
TOL_FAITHFUL = 1e-12


class StateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NetworkState:
    rho: np.ndarray
    independence_residual: float | None = None
    source_form: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def faithful(self) -> bool:
        return is_faithful(self)


def check_density(rho: np.ndarray, what: str = "rho", tol: float = TOL_STATE) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateError(f"{what}: expected a square matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - dagger(rho)), initial=0.0) > tol:
        raise StateError(f"{what}: not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise StateError(f"{what}: trace is {tr!r}, expected 1")
    w = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    if w[0] < -tol:
        raise StateError(f"{what}: negative eigenvalue {w[0]:.3e}")
    return rho


def make_state(rho: np.ndarray, scenario: Scenario | None = None) -> NetworkState:
    """Wrap a density matrix; the independence residual is cached when a scenario is given."""
    rho = check_density(rho)
    res = None
    if scenario is not None:
        if scenario.dim != rho.shape[0]:
            raise StateError(f"state dimension {rho.shape[0]} != scenario dimension {scenario.dim}")
        res = _independence(rho, scenario)
    return NetworkState(rho, res)


def product_source_state(s: Scenario, rho_AB: np.ndarray, rho_BC: np.ndarray) -> NetworkState:
    """rho_AB (x) rho_BC on legs (A, B1, B2, C) of a tensor scenario."""
    if s.tensor_dims is None:
        raise StateError("product-source states need a tensor scenario")
    dA, dB1, dB2, dC = s.tensor_dims
    rho_AB = check_density(rho_AB, "rho_AB")
    rho_BC = check_density(rho_BC, "rho_BC")
    if rho_AB.shape[0] != dA * dB1:
        raise StateError(f"rho_AB has dimension {rho_AB.shape[0]}, expected {dA * dB1}")
    if rho_BC.shape[0] != dB2 * dC:
        raise StateError(f"rho_BC has dimension {rho_BC.shape[0]}, expected {dB2 * dC}")
    # leg order of the kron already matches (A, B1, B2, C)
    rho = np.kron(rho_AB, rho_BC)
    return NetworkState(rho, _independence(rho, s), (rho_AB, rho_BC))


def _normalized_basis(basis: np.ndarray) -> np.ndarray:
    norms = np.array([op_norm(X) for X in basis])
    return basis / norms[:, None, None]


def _independence(rho: np.ndarray, s: Scenario) -> float:
    A = _normalized_basis(s.alg_A.basis)
    C = _normalized_basis(s.alg_C.basis)
    tA = np.einsum("ij,kji->k", rho, A)
    tC = np.einsum("ij,kji->k", rho, C)
    rhoA = np.einsum("ij,kjl->kil", rho, A)
    tAC = np.einsum("kij,lji->kl", rhoA, C)
    return float(np.max(np.abs(tAC - np.outer(tA, tC))))


def check_independence(state: NetworkState, s: Scenario) -> float:
    """max |tau(AC) - tau(A) tau(C)| over normalized basis elements of Alice and Charles."""
    if state.dim != s.dim:
        raise StateError(f"state dimension {state.dim} != scenario dimension {s.dim}")
    return _independence(state.rho, s)


def is_faithful(state: NetworkState) -> bool:
    return bool(np.linalg.eigvalsh(state.rho)[0] > TOL_FAITHFUL)


def mix_toward(
    state: NetworkState, other: NetworkState, t: float, scenario: Scenario | None = None
) -> NetworkState:
    """(1 - t) rho + t rho'. The independence residual is recomputed when a scenario is given."""
    if not 0.0 <= t <= 1.0:
        raise StateError(f"mixing parameter t={t} outside [0, 1]")
    if state.dim != other.dim:
        raise StateError("states have different dimensions")
    if t == 0.0:
        return state
    if t == 1.0:
        return other
    rho = (1 - t) * state.rho + t * other.rho
    res = _independence(rho, scenario) if scenario is not None else None
    return NetworkState(rho, res)


def trace_distance(a: NetworkState, b: NetworkState) -> float:
    """Trace norm of rho_a - rho_b (no factor 1/2)."""
    if a.dim != b.dim:
        raise StateError("states have different dimensions")
    D = a.rho - b.rho
    return float(np.sum(np.abs(np.linalg.eigvalsh((D + dagger(D)) / 2))))


# -- common two-qubit sources -------------------------------------------------

def singlet() -> np.ndarray:
    return proj(np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2))


def werner(v: float) -> np.ndarray:
    """v |psi-><psi-| + (1 - v) I/4."""
    return v * singlet() + (1 - v) * np.eye(4) / 4


def embedded_singlet(d_A: int, levels: tuple[int, int], d_B: int = 2) -> np.ndarray:
    """Singlet between Alice levels ``levels`` of a d_A-dim leg and a qubit."""
    i, j = levels
    v = np.zeros(d_A * d_B, dtype=complex)
    v[i * d_B + 1] = 1 / np.sqrt(2)
    v[j * d_B + 0] = -1 / np.sqrt(2)
    return proj(v)
