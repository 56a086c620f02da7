"""Brute-force baselines for the bilocal quantity.

* ``classical_bilocal_max`` enumerates deterministic response functions of
  a two-source hidden-variable model.
* ``grid_search_qubit`` scans Bloch-sphere grids for Alice and Charles with
  Bob restricted to the two-qubit Pauli frame.
* ``random_search`` samples random sign observables.

None of these share code with the see-saw update rule, which is what makes
them usable as cross-checks.
"""

from __future__ import annotations

import datetime as _dt
import itertools
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .algebra import Scenario
from .bilocal import ObservableSet, correlators, evaluate, identity_observables, s_value
from .linalg import PAULIS, kron, partial_trace
from .optimize import random_observables
from .states import NetworkState

CLASSICAL_CAP = 4096
_B_ENUM_MAX_CELLS = 12
PAULI_LABELS = ("I", "X", "Y", "Z")


class OracleError(ValueError):
    pass


@dataclass
class DeterministicStrategy:
    """Responses a[x, l], b[y, l, m], c[z, m] in {-1, +1} with source weights p1[l], p2[m]."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def __post_init__(self):
        for w in (self.p1, self.p2):
            if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
                raise OracleError("hidden-variable weights must be a probability vector")

    def correlator(self, x: int, y: int, z: int) -> float:
        return float(np.einsum("l,m,l,lm,m->", self.p1, self.p2, self.a[x], self.b[y], self.c[z]))

    def IJ(self) -> tuple[float, float]:
        E = {(x, y, z): self.correlator(x, y, z) for x, y, z in itertools.product((0, 1), repeat=3)}
        I = sum(E[x, 0, z] for x in (0, 1) for z in (0, 1))
        J = sum((-1) ** (x + z) * E[x, 1, z] for x in (0, 1) for z in (0, 1))
        return I, J

    @property
    def S(self) -> float:
        return s_value(*self.IJ())


def _sign_tables(shape: tuple[int, ...]) -> np.ndarray:
    n = int(np.prod(shape))
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1
    return (1 - 2 * bits).reshape((2 ** n,) + shape).astype(float)


def _simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All probability vectors of length k with entries in (1/resolution) Z."""
    pts = [
        np.array(c) / resolution
        for c in itertools.product(range(resolution + 1), repeat=k)
        if sum(c) == resolution
    ]
    return np.array(pts)


def classical_bilocal_search(
    L: int, M: int, weight_resolution: int = 4, cap: int = CLASSICAL_CAP
) -> tuple[float, DeterministicStrategy]:
    """Maximize S over deterministic strategies with L x M hidden-variable values.

    Alice's and Charles' response tables are enumerated exhaustively. S is a
    sum of a term depending on b(0, ., .) and one depending on b(1, ., .), so
    each of Bob's two tables is maximized on its own: by enumeration when
    L*M <= 12, otherwise by aligning each cell's sign with its coefficient.
    Weights range over every vertex of the two simplices plus a rational grid
    of mixed weights.
    """
    if L < 1 or M < 1:
        raise OracleError("L and M must be >= 1")
    if L * M > cap:
        raise OracleError(f"cap exceeded: L*M = {L * M} > {cap}")
    if 4 ** L * 4 ** M > 2 ** 20:
        raise OracleError(f"cap exceeded: {4 ** L * 4 ** M} response tables for Alice x Charles")

    a = _sign_tables((2, L))                       # [na, x, l]
    c = _sign_tables((2, M))                       # [nc, z, m]
    alpha_p, alpha_m = a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]
    gamma_p, gamma_m = c[:, 0] + c[:, 1], c[:, 0] - c[:, 1]
    enum_b = L * M <= _B_ENUM_MAX_CELLS
    btab = _sign_tables((L, M)).reshape(-1, L * M) if enum_b else None

    P1 = _simplex_grid(L, weight_resolution)
    P2 = _simplex_grid(M, weight_resolution)

    def best_term(alpha, gamma, p1, p2):
        Q = np.einsum("al,cm,l,m->aclm", alpha, gamma, p1, p2).reshape(-1, L * M)
        if enum_b:
            vals = np.abs(Q @ btab.T)
            arg = vals.argmax(axis=1)
            return vals[np.arange(len(arg)), arg], btab[arg]
        return np.abs(Q).sum(axis=1), np.where(Q >= 0, 1.0, -1.0)

    best_S, best = -1.0, None
    for p1 in P1:
        for p2 in P2:
            vI, bI = best_term(alpha_p, gamma_p, p1, p2)
            vJ, bJ = best_term(alpha_m, gamma_m, p1, p2)
            S = np.sqrt(vI) + np.sqrt(vJ)
            k = int(S.argmax())
            if S[k] > best_S:
                ia, ic = divmod(k, len(c))
                b = np.stack([bI[k].reshape(L, M), bJ[k].reshape(L, M)])
                best_S, best = float(S[k]), DeterministicStrategy(a[ia], b, c[ic], p1, p2)
    return best_S, best


def classical_bilocal_max(L: int, M: int, weight_resolution: int = 4, cap: int = CLASSICAL_CAP) -> float:
    return classical_bilocal_search(L, M, weight_resolution, cap)[0]


# -- qubit grid ----------------------------------------------------------------

def bloch_grid(resolution: int) -> np.ndarray:
    """Bloch vectors of cos(t) Z + sin(t) cos(f) X + sin(t) sin(f) Y on a (t, f) grid.

    Rows are (x, y, z) coordinates; each pole appears once.
    """
    if resolution < 1:
        raise OracleError("resolution must be >= 1")
    if resolution == 1:
        return np.array([[0.0, 0.0, 1.0]])
    thetas = np.linspace(0, np.pi, resolution)
    phis = 2 * np.pi * np.arange(resolution) / resolution
    pts = [[0.0, 0.0, 1.0]]
    for t in thetas[1:-1]:
        for f in phis:
            pts.append([np.sin(t) * np.cos(f), np.sin(t) * np.sin(f), np.cos(t)])
    pts.append([0.0, 0.0, -1.0])
    return np.array(pts)


def _bloch_op(v: np.ndarray) -> np.ndarray:
    return v[0] * PAULIS[1] + v[1] * PAULIS[2] + v[2] * PAULIS[3]


def _hemisphere(grid: np.ndarray) -> np.ndarray:
    """One representative of each antipodal pair (plus any self-paired leftovers)."""
    z, y, x = grid[:, 2], grid[:, 1], grid[:, 0]
    eps = 1e-12
    keep = (z > eps) | ((np.abs(z) <= eps) & ((y > eps) | ((np.abs(y) <= eps) & (x > 0))))
    idx = np.nonzero(keep)[0]
    return idx if len(idx) else np.arange(len(grid))


def _front(f0: np.ndarray, f1: np.ndarray, bins: int) -> np.ndarray:
    """Indices of a (binned) Pareto front of the point cloud (f0, f1), maximizing both."""
    top = f0.max()
    if top <= 0:
        return np.array([int(f1.argmax())])
    k = np.minimum((f0 * (bins / top)).astype(np.int64), bins - 1)
    best1 = np.full(bins, -np.inf, dtype=f1.dtype)
    np.maximum.at(best1, k, f1)
    cand = np.nonzero(f1 == best1[k])[0]
    _, first = np.unique(k[cand], return_index=True)
    reps = np.concatenate([cand[first], [int(f0.argmax()), int(f1.argmax())]])
    order = reps[np.argsort(-f0[reps], kind="stable")]
    keep, run = [], -np.inf
    for i in order:
        if f1[i] > run:
            keep.append(i)
            run = f1[i]
    return np.array(keep)


def _pair_front(s: np.ndarray, t: np.ndarray, hemi: np.ndarray, bins: int, zero: float = 1e-12):
    """Front of (sqrt|s_i + s_j|, sqrt|t_i - t_j|) over i in hemi, j arbitrary.

    The cloud is built in float32; candidates are rescored exactly downstream.
    A vanishing s or t collapses the front to a single point.
    """
    n = len(s)
    s_zero, t_zero = np.max(np.abs(s)) <= zero, np.max(np.abs(t)) <= zero
    if s_zero or t_zero:
        # maximize |x_i + sgn x_j| with i in hemi and j free
        x, sgn = (t, -1.0) if s_zero else (s, 1.0)
        y = sgn * x
        hi, lo = int(y.argmax()), int(y.argmin())
        up, down = x[hemi] + sgn * x[hi], -(x[hemi] + sgn * x[lo])
        if up.max() >= down.max():
            i, j = int(hemi[up.argmax()]), hi
        else:
            i, j = int(hemi[down.argmax()]), lo
        f0 = np.sqrt(abs(s[i] + s[j]))
        f1 = np.sqrt(abs(t[i] - t[j]))
        return np.array([f0]), np.array([f1]), np.array([i]), np.array([j])
    s32, t32 = s.astype(np.float32), t.astype(np.float32)
    f0 = np.sqrt(np.abs(np.add.outer(s32[hemi], s32))).ravel()
    f1 = np.sqrt(np.abs(np.subtract.outer(t32[hemi], t32))).ravel()
    idx = _front(f0, f1, bins)
    i, j = np.divmod(idx, n)
    i = hemi[i]
    # exact values for the surviving candidates
    return np.sqrt(np.abs(s[i] + s[j])), np.sqrt(np.abs(t[i] - t[j])), i, j


def _source_form(state: NetworkState, s: Scenario) -> tuple[np.ndarray, np.ndarray]:
    if state.source_form is not None:
        return state.source_form
    dims = s.tensor_dims
    rho_AB = partial_trace(state.rho, dims, [0, 1])
    rho_BC = partial_trace(state.rho, dims, [2, 3])
    if np.max(np.abs(np.kron(rho_AB, rho_BC) - state.rho)) > 1e-10:
        raise OracleError("grid search needs a product-source state")
    return rho_AB, rho_BC


@dataclass
class GridResult:
    S: float
    observables: ObservableSet
    settings: dict


def grid_search_qubit(
    state: NetworkState, s: Scenario, resolution: int = 64, bins: int = 1 << 14
) -> GridResult:
    """Best S over Bloch grids for A0, A1, C0, C1 and Pauli-frame B0, B1.

    With product sources and B_y = P_y (x) Q_y, I = (alpha+ . u_P0)(gamma+ . v_Q0)
    and likewise for J, so each party's pair grid reduces to a 2-D point cloud;
    only its Pareto front can hold the maximum. The identity assignment
    (S = 2) is always included.
    """
    if s.tensor_dims != (2, 2, 2, 2) or state.dim != 16:
        raise OracleError("grid search is defined on the (2, 2, 2, 2) tensor scenario")
    rho_AB, rho_BC = _source_form(state, s)
    sig = PAULIS[1:]
    u = np.array([[np.trace(rho_AB @ np.kron(si, P)).real for si in sig] for P in PAULIS])
    v = np.array([[np.trace(rho_BC @ np.kron(Q, sk)).real for sk in sig] for Q in PAULIS])

    grid = bloch_grid(resolution)
    # antipodes are on the grid only for even resolution
    hemi = _hemisphere(grid) if resolution % 2 == 0 else np.arange(len(grid))
    fronts_A = {}
    fronts_C = {}
    for p0, p1 in itertools.product(range(4), repeat=2):
        fronts_A[p0, p1] = _pair_front(grid @ u[p0], grid @ u[p1], hemi, bins)
        fronts_C[p0, p1] = _pair_front(grid @ v[p0], grid @ v[p1], hemi, bins)

    ident = identity_observables(16)
    best = GridResult(s_value(*correlators(state.rho, ident)), ident, {"identity": True})
    for (P0, P1), (Q0, Q1) in itertools.product(fronts_A, fronts_C):
        a0, a1, ai, aj = fronts_A[P0, P1]
        c0, c1, ci, cj = fronts_C[Q0, Q1]
        vals = np.outer(a0, c0) + np.outer(a1, c1)
        k = int(vals.argmax())
        if vals.flat[k] > best.S + 1e-15:
            ka, kc = divmod(k, len(c0))
            I2 = np.eye(2)
            obs = ObservableSet(
                A0=kron(_bloch_op(grid[ai[ka]]), I2, I2, I2),
                A1=kron(_bloch_op(grid[aj[ka]]), I2, I2, I2),
                B0=kron(I2, PAULIS[P0], PAULIS[Q0], I2),
                B1=kron(I2, PAULIS[P1], PAULIS[Q1], I2),
                C0=kron(I2, I2, I2, _bloch_op(grid[ci[kc]])),
                C1=kron(I2, I2, I2, _bloch_op(grid[cj[kc]])),
            )
            S_exact = evaluate(state, obs, validate=False).S
            settings = {
                "B0": PAULI_LABELS[P0] + PAULI_LABELS[Q0],
                "B1": PAULI_LABELS[P1] + PAULI_LABELS[Q1],
                "A0": grid[ai[ka]].tolist(), "A1": grid[aj[ka]].tolist(),
                "C0": grid[ci[kc]].tolist(), "C1": grid[cj[kc]].tolist(),
            }
            if S_exact > best.S:
                best = GridResult(S_exact, obs, settings)
    return best


def random_search(state: NetworkState, s: Scenario, n: int, seed: int = 0) -> float:
    """Best S over n random sign-observable sets (identity assignment included)."""
    rng = np.random.default_rng(seed)
    best = s_value(*correlators(state.rho, identity_observables(s.dim)))
    for _ in range(n):
        best = max(best, s_value(*correlators(state.rho, random_observables(s, rng))))
    return best


# -- frozen constants ---------------------------------------------------------

DERIVED_CONSTANTS_FILE = "derived_constants.json"


def load_derived_constants(path: str | Path | None = None) -> dict:
    if path is None:
        text = resources.files("biloc").joinpath("data", DERIVED_CONSTANTS_FILE).read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)["constants"]


def constant_record(value: float, oracle: str, seed: int, **extra) -> dict:
    rec = {"value": value, "oracle": oracle, "seed": seed, "date": _dt.date.today().isoformat()}
    rec.update(extra)
    return rec
