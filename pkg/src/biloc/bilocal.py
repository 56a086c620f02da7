"""Bilocal functionals I, J, S for the entanglement-swapping network.

    I = tau((A0 + A1) B0 (C0 + C1))
    J = tau((A0 - A1) B1 (C0 - C1))
    S = sqrt|I| + sqrt|J|

tau is the trace against the network density matrix. Bob's operators sit in
the middle; since the three algebras commute the ordering is immaterial.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields
from typing import Iterator

import numpy as np

from .algebra import Scenario, make_tensor_scenario, membership_residual
from .linalg import SX, SZ, dagger, kron, op_norm
from .states import (
    NetworkState,
    check_independence,
    embedded_singlet,
    product_source_state,
    singlet,
    werner,
)

TOL_HERMITIAN = 1e-12
TOL_SPECTRUM = 1e-10
TOL_MEMBERSHIP = 1e-10
TOL_EXPECTATION_IMAG = 1e-12
TOL_PROBABILITY = 1e-12
TOL_POVM = 1e-10

PARTY_OF = {"A0": "A", "A1": "A", "B0": "B", "B1": "B", "C0": "C", "C1": "C"}


class ObservableError(ValueError):
    """An observable violates Hermiticity, the [-1, 1] spectrum bound or algebra membership."""

    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.field = name


@dataclass(frozen=True, eq=False)
class ObservableSet:
    A0: np.ndarray
    A1: np.ndarray
    B0: np.ndarray
    B1: np.ndarray
    C0: np.ndarray
    C1: np.ndarray

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        for f in fields(self):
            yield f.name, getattr(self, f.name)

    def replace(self, **kw) -> "ObservableSet":
        return ObservableSet(**{**dict(self.items()), **kw})

    @property
    def dim(self) -> int:
        return self.A0.shape[0]


def identity_observables(d: int) -> ObservableSet:
    I = np.eye(d, dtype=complex)
    return ObservableSet(I, I, I, I, I, I)


def validate_observables(obs: ObservableSet, scenario: Scenario | None = None) -> None:
    """Raise :class:`ObservableError` naming the first offending field."""
    d = obs.dim
    for name, X in obs.items():
        if X.shape != (d, d):
            raise ObservableError(name, f"shape {X.shape}, expected {(d, d)}")
        if np.max(np.abs(X - dagger(X))) > TOL_HERMITIAN:
            raise ObservableError(name, "not Hermitian")
        w = np.linalg.eigvalsh((X + dagger(X)) / 2)
        if w[0] < -1 - TOL_SPECTRUM or w[-1] > 1 + TOL_SPECTRUM:
            raise ObservableError(name, f"spectrum [{w[0]:.6g}, {w[-1]:.6g}] leaves [-1, 1]")
        if scenario is not None:
            if scenario.dim != d:
                raise ObservableError(name, f"dimension {d} != scenario dimension {scenario.dim}")
            r = membership_residual(scenario.algebra(PARTY_OF[name]), X)
            if r > TOL_MEMBERSHIP:
                raise ObservableError(
                    name, f"not in party {PARTY_OF[name]}'s algebra (residual {r:.3e})"
                )


def expectation(state: NetworkState, X: np.ndarray) -> float:
    val = np.trace(state.rho @ X)
    if abs(val.imag) > TOL_EXPECTATION_IMAG:
        raise ValueError(f"non-Hermitian expectation (imaginary part {val.imag:.3e})")
    return float(val.real)


def correlators(rho: np.ndarray, obs: ObservableSet) -> tuple[float, float]:
    """(I, J) without validation; the hot path for optimizers and sampling."""
    O_I = (obs.A0 + obs.A1) @ obs.B0 @ (obs.C0 + obs.C1)
    O_J = (obs.A0 - obs.A1) @ obs.B1 @ (obs.C0 - obs.C1)
    # Tr(rho O) as an elementwise sum
    I = np.sum(rho.T * O_I).real
    J = np.sum(rho.T * O_J).real
    return float(I), float(J)


def s_value(I: float, J: float) -> float:
    return float(np.sqrt(abs(I)) + np.sqrt(abs(J)))


@dataclass
class BilocalReport:
    I: float
    J: float
    S: float
    residuals: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"I": self.I, "J": self.J, "S": self.S, "residuals": dict(self.residuals)}


def evaluate(
    state: NetworkState,
    obs: ObservableSet,
    scenario: Scenario | None = None,
    validate: bool = True,
) -> BilocalReport:
    """I, J, S together with the maximal-violation residuals.

    With a scenario the observables are also checked for algebra membership
    and the tau-weighted residuals are included.
    """
    if validate:
        validate_observables(obs, scenario)
    I = expectation(state, (obs.A0 + obs.A1) @ obs.B0 @ (obs.C0 + obs.C1))
    J = expectation(state, (obs.A0 - obs.A1) @ obs.B1 @ (obs.C0 - obs.C1))
    return BilocalReport(I, J, s_value(I, J), max_violation_residuals(state, obs, scenario))


def _anti(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y + Y @ X


def max_violation_residuals(
    state: NetworkState, obs: ObservableSet, scenario: Scenario | None = None
) -> dict[str, float]:
    """Deviation from the maximal-violation conditions.

    Operator-norm forms ``X^2-I`` and ``{A0,A1}``/``{C0,C1}`` are always
    reported. With a scenario, ``tau:`` keys hold
    sup_X |tau(D X)| over the owning algebra's unit-norm basis, where D is
    X_i^2 - I or the anticommutator.
    """
    d = obs.dim
    I = np.eye(d)
    defects = {f"{name}^2-I": (PARTY_OF[name], X @ X - I) for name, X in obs.items()}
    defects["{A0,A1}"] = ("A", _anti(obs.A0, obs.A1))
    defects["{C0,C1}"] = ("C", _anti(obs.C0, obs.C1))

    out = {key: op_norm(D) for key, (_, D) in defects.items()}
    if scenario is not None:
        bases = {}
        for party in "ABC":
            B = scenario.algebra(party).basis
            norms = np.array([op_norm(X) for X in B])
            bases[party] = B / norms[:, None, None]
        for key, (party, D) in defects.items():
            vals = np.einsum("ij,kji->k", state.rho @ D, bases[party])
            out["tau:" + key] = float(np.max(np.abs(vals)))
    return out


# -- probabilities ------------------------------------------------------------

def povm_from_observable(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Effects X_a = (I + (-1)^a X) / 2 for a = 0, 1."""
    X = np.asarray(X, dtype=complex)
    I = np.eye(X.shape[0])
    return (I + X) / 2, (I - X) / 2


def observable_from_povm(effects: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    E0, E1 = (np.asarray(E, dtype=complex) for E in effects)
    d = E0.shape[0]
    for a, E in enumerate((E0, E1)):
        if np.max(np.abs(E - dagger(E))) > TOL_POVM:
            raise ValueError(f"effect {a} is not Hermitian")
        if np.linalg.eigvalsh((E + dagger(E)) / 2)[0] < -TOL_POVM:
            raise ValueError(f"effect {a} is not positive semidefinite")
    if np.max(np.abs(E0 + E1 - np.eye(d))) > TOL_POVM:
        raise ValueError("effects do not sum to the identity")
    return E0 - E1


def probability_table(state: NetworkState, obs: ObservableSet) -> np.ndarray:
    """p[x, y, z, a, b, c] = tau(A_{a|x} B_{b|y} C_{c|z})."""
    A = [povm_from_observable(obs.A0), povm_from_observable(obs.A1)]
    B = [povm_from_observable(obs.B0), povm_from_observable(obs.B1)]
    C = [povm_from_observable(obs.C0), povm_from_observable(obs.C1)]
    rho = state.rho
    p = np.zeros((2,) * 6)
    for x, y, z, a, b, c in itertools.product((0, 1), repeat=6):
        val = np.sum(rho.T * (A[x][a] @ B[y][b] @ C[z][c]))
        p[x, y, z, a, b, c] = val.real
    if p.min() < -TOL_PROBABILITY:
        raise ValueError(
            f"negative probability {p.min():.3e}: observable spectrum outside [-1, 1]"
        )
    return p


def marginal_factorization_residual(table: np.ndarray) -> float:
    """max |p(ac|xz) - p(a|x) p(c|z)| over a, c, x, z and Bob's setting y.

    The single-party marginals are taken from each (x, y, z) slice, and their
    spread across the other parties' settings is folded into the result, so a
    signalling table also shows up here.
    """
    p = np.asarray(table)
    p_ac = p.sum(axis=4)                   # [x, y, z, a, c]
    p_a = p_ac.sum(axis=4)                 # [x, y, z, a]
    p_c = p_ac.sum(axis=3)                 # [x, y, z, c]
    fact = np.abs(p_ac - p_a[..., :, None] * p_c[..., None, :]).max()
    sig_a = np.ptp(p_a, axis=(1, 2)).max()  # depends only on x
    sig_c = np.ptp(p_c, axis=(0, 1)).max()  # depends only on z
    sig_ac = np.ptp(p_ac, axis=1).max()     # independent of y
    return float(max(fact, sig_a, sig_c, sig_ac))


# -- canonical maximal violation ----------------------------------------------

def canonical_observables() -> ObservableSet:
    """Two-singlet optimal settings on the (2, 2, 2, 2) tensor scenario."""
    I2 = np.eye(2)
    a0 = (SX + SZ) / np.sqrt(2)
    a1 = (SX - SZ) / np.sqrt(2)
    return ObservableSet(
        A0=kron(a0, I2, I2, I2),
        A1=kron(a1, I2, I2, I2),
        B0=kron(I2, SX, SX, I2),
        B1=kron(I2, SZ, SZ, I2),
        C0=kron(I2, I2, I2, a0),
        C1=kron(I2, I2, I2, a1),
    )


def canonical_max_violation() -> tuple[Scenario, NetworkState, ObservableSet]:
    s = make_tensor_scenario(2, 2, 2, 2)
    state = product_source_state(s, singlet(), singlet())
    return s, state, canonical_observables()


def werner_canonical(v: float) -> tuple[Scenario, NetworkState, ObservableSet]:
    """Canonical observables with both sources replaced by Werner(v)."""
    s = make_tensor_scenario(2, 2, 2, 2)
    return s, product_source_state(s, werner(v), werner(v)), canonical_observables()


def independence_of(state: NetworkState, scenario: Scenario) -> float:
    if state.independence_residual is not None:
        return state.independence_residual
    return check_independence(state, scenario)


def odd_block_example() -> tuple[Scenario, NetworkState]:
    """Qutrit Alice (a single 3 x 3 block) with singlet-grade sources.

    rho_AB mixes embedded singlets on the level pairs (0, 1), (1, 2), (0, 2),
    so Alice's marginal is I/3 and faithful on M_3; rho_BC is the singlet.
    """
    s = make_tensor_scenario(3, 2, 2, 2)
    pairs = [(0, 1), (1, 2), (0, 2)]
    rho_AB = sum(embedded_singlet(3, p) for p in pairs) / len(pairs)
    return s, product_source_state(s, rho_AB, singlet())
