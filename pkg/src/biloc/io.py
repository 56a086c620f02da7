"""JSON and CSV file formats.

Complex matrices are stored row-major as nested ``[re, im]`` pairs. Python's
float repr is the shortest round-trip form, so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .algebra import AlgebraError, Scenario, make_block_algebra
from .bilocal import BilocalReport, ObservableSet
from .optimize import OptimizationTrace, SweepRow
from .states import NetworkState, StateError, check_density, make_state, product_source_state

SCENARIO_SCHEMA = "biloc-scenario/1"
STATE_SCHEMA = "biloc-state/1"
OBSERVABLES_SCHEMA = "biloc-observables/1"
REPORT_SCHEMA = "biloc-report/1"
TRACE_SCHEMA = "biloc-trace/1"

SWEEP_HEADER = ("param", "S_best", "converged", "iters")
TABLE_HEADER = ("x", "y", "z", "a", "b", "c", "p")


class FormatError(ValueError):
    """Unreadable file, malformed JSON or a document that does not fit its schema."""


# -- matrices -----------------------------------------------------------------

def matrix_to_json(X: np.ndarray) -> list:
    X = np.asarray(X, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in X]


def matrix_from_json(data: Any, what: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: not a numeric array") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise FormatError(f"{what}: expected an n x n array of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{what}: non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


# -- documents ----------------------------------------------------------------

def read_json(path: str | Path, schema: str | None = None) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not text.strip():
        raise FormatError(f"{path}: empty file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")
    if schema is not None and doc.get("schema") != schema:
        raise FormatError(f"{path}: schema {doc.get('schema')!r}, expected {schema!r}")
    return doc


def write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def _field(doc: dict, key: str, what: str):
    if key not in doc:
        raise FormatError(f"{what}: missing field {key!r}")
    return doc[key]


def scenario_to_json(s: Scenario) -> dict:
    algs = {}
    for party in "ABC":
        alg = s.algebra(party)
        algs[party] = {
            "ambient_dim": alg.ambient_dim,
            "blocks": [list(b) for b in alg.blocks],
            "embedding": matrix_to_json(alg.embedding),
        }
    return {
        "schema": SCENARIO_SCHEMA,
        "dim": s.dim,
        "labels": list(s.labels),
        "tensor_dims": list(s.tensor_dims) if s.tensor_dims is not None else None,
        "algebras": algs,
    }


def scenario_from_json(doc: dict) -> Scenario:
    """Rebuild a scenario. Algebra errors (bad blocks, non-unitary embedding) propagate."""
    what = "scenario"
    try:
        dim = int(_field(doc, "dim", what))
        algs_doc = _field(doc, "algebras", what)
        algs = []
        for party in "ABC":
            a = _field(algs_doc, party, f"{what}.algebras")
            blocks = [tuple(int(x) for x in b) for b in _field(a, "blocks", f"algebra {party}")]
            if any(len(b) != 2 for b in blocks):
                raise FormatError(f"algebra {party}: blocks must be [n, m] pairs")
            U = a.get("embedding")
            U = matrix_from_json(U, f"algebra {party}.embedding") if U is not None else None
            algs.append(make_block_algebra(int(a.get("ambient_dim", dim)), blocks, U))
        labels = tuple(doc.get("labels") or ("A", "B", "C"))
        td = doc.get("tensor_dims")
        td = tuple(int(x) for x in td) if td is not None else None
    except (TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, (FormatError, AlgebraError)):
            raise
        raise FormatError(f"{what}: {exc}") from exc
    if td is not None and int(np.prod(td)) != dim:
        raise AlgebraError(f"dimension mismatch: tensor_dims {td} do not multiply to {dim}")
    return Scenario(dim, *algs, labels=labels, tensor_dims=td)


def state_to_json(state: NetworkState) -> dict:
    doc = {"schema": STATE_SCHEMA, "rho": matrix_to_json(state.rho)}
    if state.source_form is not None:
        doc["source_form"] = {
            "rho_AB": matrix_to_json(state.source_form[0]),
            "rho_BC": matrix_to_json(state.source_form[1]),
        }
    return doc


def state_from_json(doc: dict, scenario: Scenario | None = None) -> NetworkState:
    """Density-matrix checks raise :class:`StateError`. With a tensor scenario and a
    ``source_form`` the state is rebuilt from its sources."""
    sf = doc.get("source_form")
    if sf is not None and scenario is not None and scenario.tensor_dims is not None:
        rho_AB = matrix_from_json(_field(sf, "rho_AB", "source_form"), "rho_AB")
        rho_BC = matrix_from_json(_field(sf, "rho_BC", "source_form"), "rho_BC")
        st = product_source_state(scenario, rho_AB, rho_BC)
        rho = matrix_from_json(_field(doc, "rho", "state"), "rho")
        if rho.shape != st.rho.shape or np.max(np.abs(rho - st.rho)) > 1e-12:
            raise StateError("rho does not match its source_form")
        return NetworkState(rho, st.independence_residual, st.source_form)
    rho = matrix_from_json(_field(doc, "rho", "state"), "rho")
    if sf is not None:
        src = (matrix_from_json(sf["rho_AB"], "rho_AB"), matrix_from_json(sf["rho_BC"], "rho_BC"))
        return NetworkState(check_density(rho), None, src)
    return make_state(rho, scenario)


def observables_to_json(obs: ObservableSet) -> dict:
    return {"schema": OBSERVABLES_SCHEMA, **{k: matrix_to_json(X) for k, X in obs.items()}}


def observables_from_json(doc: dict) -> ObservableSet:
    mats = {k: matrix_from_json(_field(doc, k, "observables"), k) for k in ("A0", "A1", "B0", "B1", "C0", "C1")}
    d = mats["A0"].shape[0]
    for k, X in mats.items():
        if X.shape != (d, d):
            raise FormatError(f"{k}: shape {X.shape}, expected {(d, d)}")
    return ObservableSet(**mats)


def report_to_json(
    report: BilocalReport,
    independence_residual: float | None = None,
    marginal_factorization_residual: float | None = None,
) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        **report.to_dict(),
        "independence_residual": independence_residual,
        "marginal_factorization_residual": marginal_factorization_residual,
    }


def trace_to_json(trace: OptimizationTrace) -> dict:
    doc = {
        "schema": TRACE_SCHEMA,
        "seed": trace.seed,
        "best_S": trace.best_S,
        "s_values": [float(x) for x in trace.s_values],
        "converged": bool(trace.converged),
        "iterations": int(trace.iterations),
        "restart_S": [float(x) for x in trace.restart_S],
        "restart_iterations": [int(x) for x in trace.restart_iterations],
        "median_iterations": trace.median_iterations,
        "best_observables": observables_to_json(trace.best_observables),
    }
    if trace.best_sources is not None:
        doc["best_sources"] = {
            "rho_AB": matrix_to_json(trace.best_sources[0]),
            "rho_BC": matrix_to_json(trace.best_sources[1]),
        }
    return doc


def trace_from_json(doc: dict) -> OptimizationTrace:
    src = doc.get("best_sources")
    if src is not None:
        src = (matrix_from_json(src["rho_AB"], "rho_AB"), matrix_from_json(src["rho_BC"], "rho_BC"))
    return OptimizationTrace(
        s_values=[float(x) for x in _field(doc, "s_values", "trace")],
        best_observables=observables_from_json(_field(doc, "best_observables", "trace")),
        best_sources=src,
        converged=bool(doc.get("converged", False)),
        iterations=int(doc.get("iterations", 0)),
        seed=int(doc.get("seed", 0)),
        restart_S=[float(x) for x in doc.get("restart_S", [])],
        restart_iterations=[int(x) for x in doc.get("restart_iterations", [])],
    )


# -- CSV ----------------------------------------------------------------------

def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([repr(float(r.param)), repr(float(r.S_best)), str(bool(r.converged)).lower(), int(r.iters)])
    return buf.getvalue()


def sweep_from_csv(text: str) -> list[SweepRow]:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != SWEEP_HEADER:
        raise FormatError(f"sweep CSV: header {header!r}, expected {','.join(SWEEP_HEADER)}")
    rows = []
    for n, rec in enumerate(reader, start=2):
        try:
            p, S, conv, it = rec
            rows.append(SweepRow(float(p), float(S), conv == "true", int(it)))
        except ValueError as exc:
            raise FormatError(f"sweep CSV line {n}: {exc}") from exc
    return rows


def probability_table_to_csv(p: np.ndarray) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for idx in np.ndindex(*p.shape):
        w.writerow([*idx, repr(float(p[idx]))])
    return buf.getvalue()


def probability_table_from_csv(text: str) -> np.ndarray:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != TABLE_HEADER:
        raise FormatError("probability CSV: bad header")
    p = np.zeros((2,) * 6)
    for rec in reader:
        try:
            p[tuple(int(x) for x in rec[:6])] = float(rec[6])
        except (ValueError, IndexError) as exc:
            raise FormatError(f"probability CSV: {exc}") from exc
    return p
