"""See-saw maximization of S = sqrt|I| + sqrt|J| over the parties' observables.

Each sub-step linearizes S at the current point (weights 1/(2 sqrt|I|) and
1/(2 sqrt|J|)), which makes the objective linear in the observables of one
party. The maximizer of a linear functional Tr(X H) over contractions X in a
party's algebra is the sign operator of the projection of H onto that algebra.
Because the linearization is not a minorizer of S, a step is only kept when
it raises S by more than ``tol_improve``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .algebra import (
    Scenario,
    check_mutual_commutation,
    random_sign_element,
    sign_in_algebra,
    tol_commute,
)
from .bilocal import ObservableSet, correlators, evaluate, identity_observables, s_value
from .linalg import herm
from .states import NetworkState, check_independence

log = logging.getLogger(__name__)

TOL_INDEPENDENCE = 1e-8


class OptimizationError(ValueError):
    pass


@dataclass
class SeesawOptions:
    max_iters: int = 500
    restarts: int = 20
    tol_improve: float = 1e-10
    weight_guard: float = 1e-12
    seed: int = 0
    optimize_sources: bool = False

    def __post_init__(self):
        if self.tol_improve <= 0 or self.weight_guard <= 0:
            raise ValueError("tolerances must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass
class OptimizationTrace:
    s_values: list[float]
    best_observables: ObservableSet
    best_sources: tuple[np.ndarray, np.ndarray] | None
    converged: bool
    iterations: int
    seed: int = 0
    restart_S: list[float] = field(default_factory=list)
    restart_iterations: list[int] = field(default_factory=list)

    @property
    def best_S(self) -> float:
        return self.s_values[-1]

    @property
    def median_iterations(self) -> float:
        return float(np.median(self.restart_iterations)) if self.restart_iterations else 0.0


class PartyStep(NamedTuple):
    """Accepted observables plus the sign-update proposal, which may have been rejected."""

    obs: ObservableSet
    S: float
    stalled: bool
    proposal: ObservableSet | None = None


def surrogate_weights(I: float, J: float, guard: float) -> tuple[float, float]:
    """Gradient of S in (I, J); sign(0) is taken as +1."""
    wI = (1.0 if I >= 0 else -1.0) / (2 * max(np.sqrt(abs(I)), guard))
    wJ = (1.0 if J >= 0 else -1.0) / (2 * max(np.sqrt(abs(J)), guard))
    return wI, wJ


def effective_operators(rho: np.ndarray, obs: ObservableSet, party: str, wI: float, wJ: float):
    """Operators M0, M1 with dS_lin = Re Tr(X0 M0) + Re Tr(X1 M1) for the party's (X0, X1)."""
    Xp, Xm = obs.A0 + obs.A1, obs.A0 - obs.A1
    Yp, Ym = obs.C0 + obs.C1, obs.C0 - obs.C1
    if party == "A":
        KI = obs.B0 @ Yp @ rho
        KJ = obs.B1 @ Ym @ rho
        return wI * KI + wJ * KJ, wI * KI - wJ * KJ
    if party == "B":
        return wI * (Yp @ rho @ Xp), wJ * (Ym @ rho @ Xm)
    if party == "C":
        KI = rho @ Xp @ obs.B0
        KJ = rho @ Xm @ obs.B1
        return wI * KI + wJ * KJ, wI * KI - wJ * KJ
    raise ValueError(f"unknown party {party!r}")


def party_update(
    state: NetworkState,
    obs: ObservableSet,
    s: Scenario,
    party: str,
    tol_improve: float = 1e-10,
    weight_guard: float = 1e-12,
) -> PartyStep:
    """One accept-if-improve sign update of a party's observable pair."""
    rho = state.rho
    I, J = correlators(rho, obs)
    S_old = s_value(I, J)
    wI, wJ = surrogate_weights(I, J, weight_guard)
    alg = s.algebra(party)
    M0, M1 = effective_operators(rho, obs, party, wI, wJ)
    X0 = sign_in_algebra(alg, herm(alg.project(M0)))
    X1 = sign_in_algebra(alg, herm(alg.project(M1)))
    cand = obs.replace(**{party + "0": X0, party + "1": X1})
    S_new = s_value(*correlators(rho, cand))
    if S_new > S_old + tol_improve:
        return PartyStep(cand, S_new, False, cand)
    return PartyStep(obs, S_old, True, cand)


def _source_effective(W: np.ndarray, fixed: np.ndarray, d1: int, d2: int, which: str) -> np.ndarray:
    T = W.reshape(d1, d2, d1, d2)
    if which == "AB":
        # Tr((rho (x) sigma) W) = Tr(rho K),  K[j,i] = sum_kl sigma[l,k] W[j,k,i,l]
        return np.einsum("lk,jkil->ji", fixed, T)
    return np.einsum("ij,jkil->kl", fixed, T)


def source_update(
    obs: ObservableSet,
    s: Scenario,
    rho_AB: np.ndarray,
    rho_BC: np.ndarray,
    which: str = "AB",
    tol_improve: float = 1e-10,
    weight_guard: float = 1e-12,
    rel_gap: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray, float, bool]:
    """Replace one source by the top eigenprojector of its effective operator.

    Returns ``(rho_AB, rho_BC, S, stalled)``. A degenerate top eigenspace
    keeps the current source.
    """
    if s.tensor_dims is None:
        raise OptimizationError("source optimization requires tensor model")
    dA, dB1, dB2, dC = s.tensor_dims
    d1, d2 = dA * dB1, dB2 * dC
    rho = np.kron(rho_AB, rho_BC)
    I, J = correlators(rho, obs)
    S_old = s_value(I, J)
    wI, wJ = surrogate_weights(I, J, weight_guard)
    O_I = (obs.A0 + obs.A1) @ obs.B0 @ (obs.C0 + obs.C1)
    O_J = (obs.A0 - obs.A1) @ obs.B1 @ (obs.C0 - obs.C1)
    W = herm(wI * O_I + wJ * O_J)
    fixed = rho_BC if which == "AB" else rho_AB
    K = herm(_source_effective(W, fixed, d1, d2, which))
    w, V = np.linalg.eigh(K)
    scale = max(np.max(np.abs(w)), 1e-300)
    if len(w) > 1 and w[-1] - w[-2] <= rel_gap * scale:
        return rho_AB, rho_BC, S_old, True
    top = np.outer(V[:, -1], V[:, -1].conj())
    new_AB, new_BC = (top, rho_BC) if which == "AB" else (rho_AB, top)
    S_new = s_value(*correlators(np.kron(new_AB, new_BC), obs))
    if S_new > S_old + tol_improve:
        return new_AB, new_BC, S_new, False
    return rho_AB, rho_BC, S_old, True


def random_observables(s: Scenario, rng: np.random.Generator) -> ObservableSet:
    """Sign operators of random Hermitian matrices projected into each party's algebra."""
    return ObservableSet(
        A0=random_sign_element(s.alg_A, rng),
        A1=random_sign_element(s.alg_A, rng),
        B0=random_sign_element(s.alg_B, rng),
        B1=random_sign_element(s.alg_B, rng),
        C0=random_sign_element(s.alg_C, rng),
        C1=random_sign_element(s.alg_C, rng),
    )


def _check_inputs(state: NetworkState, s: Scenario, opts: SeesawOptions) -> None:
    if state.dim != s.dim:
        raise OptimizationError(f"dimension mismatch: state {state.dim}, scenario {s.dim}")
    r = check_mutual_commutation(s)
    if r > tol_commute(s.dim):
        raise OptimizationError(f"non-commuting scenario (residual {r:.3e})")
    if opts.optimize_sources:
        if s.tensor_dims is None or state.source_form is None:
            raise OptimizationError("source optimization requires tensor model")
    else:
        ind = state.independence_residual
        if ind is None:
            ind = check_independence(state, s)
        if ind > TOL_INDEPENDENCE:
            warnings.warn(
                f"state violates source independence (residual {ind:.3e}); "
                "bounds that assume independence may not apply",
                stacklevel=3,
            )


def _run_restart(state, s, opts, obs):
    sources = state.source_form if opts.optimize_sources else None
    cur = state if sources is None else NetworkState(np.kron(*sources))
    S = s_value(*correlators(cur.rho, obs))
    trace = [S]
    converged = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        stalled = True
        for party in "ABC":
            step = party_update(cur, obs, s, party, opts.tol_improve, opts.weight_guard)
            if not step.stalled:
                obs, S, stalled = step.obs, step.S, False
        if sources is not None:
            for which in ("AB", "BC"):
                ab, bc, S_src, st = source_update(
                    obs, s, *sources, which, opts.tol_improve, opts.weight_guard
                )
                if not st:
                    sources, S, stalled = (ab, bc), S_src, False
            cur = NetworkState(np.kron(*sources))
        trace.append(S)
        if stalled:
            converged = True
            break
    if opts.max_iters == 0:
        it = 0
    return trace, obs, sources, converged, it


def seesaw(state: NetworkState, s: Scenario, opts: SeesawOptions | None = None) -> OptimizationTrace:
    """Best S over ``opts.restarts`` random starts, each run to a fixed point.

    The all-identity assignment (S = 2) is always a candidate, so the result
    is never below 2.
    """
    opts = opts or SeesawOptions()
    _check_inputs(state, s, opts)

    ident = identity_observables(s.dim)
    S_id = s_value(*correlators(state.rho, ident))
    best = OptimizationTrace([S_id], ident, state.source_form if opts.optimize_sources else None,
                             True, 0, seed=opts.seed)
    restart_S, restart_it = [], []
    for child in np.random.SeedSequence(opts.seed).spawn(opts.restarts):
        rng = np.random.default_rng(child)
        trace, obs, sources, converged, iters = _run_restart(state, s, opts, random_observables(s, rng))
        restart_S.append(trace[-1])
        restart_it.append(iters)
        if trace[-1] > best.s_values[-1]:
            best = OptimizationTrace(trace, obs, sources, converged, iters, seed=opts.seed)
    best.restart_S = restart_S
    best.restart_iterations = restart_it
    log.debug("seesaw seed=%d best S=%.12f", opts.seed, best.best_S)
    return best


@dataclass
class SweepRow:
    param: float
    S_best: float
    converged: bool
    iters: int


Builder = Callable[[float], tuple[NetworkState, Scenario]]


def sweep(
    params: Iterable[float],
    builder: Builder,
    opts: SeesawOptions | None = None,
    observables: ObservableSet | Callable[[float], ObservableSet] | None = None,
) -> list[SweepRow]:
    """One row per parameter value.

    With ``observables`` the fixed observables are only evaluated (no
    optimization); otherwise a see-saw run provides S_best.
    """
    rows = []
    for p in params:
        state, s = builder(p)
        if observables is not None:
            obs = observables(p) if callable(observables) else observables
            rows.append(SweepRow(float(p), evaluate(state, obs, validate=False).S, True, 0))
        else:
            tr = seesaw(state, s, opts)
            rows.append(SweepRow(float(p), tr.best_S, tr.converged, tr.iterations))
    return rows


def werner_builder(v: float) -> tuple[NetworkState, Scenario]:
    from .bilocal import werner_canonical

    s, state, _ = werner_canonical(v)
    return state, s


def parse_grid(spec: str | Sequence[float]) -> list[float]:
    """Comma list ``"0,0.1,0.5"`` or range ``"start:stop:step"`` (stop inclusive)."""
    if not isinstance(spec, str):
        return [float(x) for x in spec]
    spec = spec.strip()
    if ":" in spec:
        start, stop, step = (float(x) for x in spec.split(":"))
        n = int(round((stop - start) / step))
        return [round(start + k * step, 12) for k in range(n + 1)]
    return [float(x) for x in spec.split(",") if x.strip()]
