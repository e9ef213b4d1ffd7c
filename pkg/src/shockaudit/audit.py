"""Sweeps over left states: trace, sample, evaluate every criterion, tally.

The headline check: every sampled shock that is a strict Lax 1-shock with
``sigma' < 0`` and nondecreasing relative entropy at the endpoint must have a
nonvanishing Lopatinski determinant.  Any exception is a counterexample.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .criteria import TolerancePolicy, cumulative_flags, evaluate_point, flags_for
from .exprlang import build_system
from .hugoniot import ContinuationConfig, ContinuationError, point_at, trace_branches
from .model import ShockAuditError, SystemModel
from .serialize import report_to_doc
from .spectral import align_frame, eigen_decompose
from .systems import catalog_lookup

log = logging.getLogger(__name__)


def resolve_system(source: Mapping) -> SystemModel:
    """``{"name": ..., "params": {...}}`` for the catalog, or an expression document."""
    if "name" in source and "flux" not in source:
        return catalog_lookup(source["name"], source.get("params") or {})
    return build_system(source)


def _primitive_to_conservative(source: Mapping, w: np.ndarray) -> np.ndarray:
    name = source.get("name")
    if name == "euler_ideal":
        gamma = float((source.get("params") or {}).get("gamma", 1.4))
        rho, vel, p = w
        return np.array([rho, rho * vel, p / (gamma - 1) + 0.5 * rho * vel * vel])
    if name == "shallow_water":
        h, vel = w
        return np.array([h, h * vel])
    if name in ("burgers", "p_system"):
        return np.asarray(w, dtype=float)
    raise ShockAuditError(f"primitive grid variables are not defined for {name!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Left-state grid and sampling for one system.

    ``ranges[i] = (lo, hi)`` and ``counts[i]`` define a tensor grid in
    ``grid_variables`` ("conservative", or "primitive" for euler_ideal
    (rho, u, p) and shallow_water (h, u)).
    """

    system: Mapping
    ranges: Sequence
    counts: Sequence
    label: str = ""
    grid_variables: str = "conservative"
    max_arclength: float = 2.0
    samples_per_curve: int = 60
    policy: TolerancePolicy = TolerancePolicy()
    continuation: ContinuationConfig = ContinuationConfig()

    def __post_init__(self):
        if len(self.ranges) != len(self.counts):
            raise ValueError("ranges and counts must have the same length")
        if any(int(c) < 0 for c in self.counts):
            raise ValueError("grid counts must be nonnegative")
        if self.samples_per_curve < 1:
            raise ValueError("samples_per_curve must be positive")
        if self.grid_variables not in ("conservative", "primitive"):
            raise ValueError(f"unknown grid_variables {self.grid_variables!r}")

    def left_states(self) -> list:
        axes = [np.linspace(lo, hi, int(c)) if int(c) > 1 else np.array([lo] * int(c))
                for (lo, hi), c in zip(self.ranges, self.counts)]
        states = [np.array(w, dtype=float) for w in itertools.product(*axes)]
        if self.grid_variables == "primitive":
            states = [_primitive_to_conservative(self.system, w) for w in states]
        return states

    @property
    def name(self) -> str:
        return self.label or str(self.system.get("name", "expression_system"))


@dataclass
class StateAudit:
    grid_index: int
    branch: int
    left_state: np.ndarray
    status: str  # "traced", "untraced", "inadmissible"
    message: str = ""
    stop_reason: str = ""
    reports: list = field(default_factory=list)
    range_flags: list = field(default_factory=list)


@dataclass
class SweepResult:
    label: str
    system: Mapping
    states: list


@dataclass
class AuditResult:
    sweeps: list
    tallies: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)
    policy: TolerancePolicy = TolerancePolicy()

    def all_states(self):
        for sweep in self.sweeps:
            for st in sweep.states:
                yield sweep, st


def _audit_state(model: SystemModel, spec: SweepSpec, index: int, u: np.ndarray) -> list:
    if not model.admissible(u):
        return [StateAudit(index, 0, u, "inadmissible", message="left state outside the domain")]
    cfg = spec.continuation.replace(max_arclength=spec.max_arclength)
    try:
        curves = trace_branches(model, u, cfg)
    except (ContinuationError, ShockAuditError) as exc:
        return [StateAudit(index, 0, u, "untraced", message=str(exc))]
    out = []
    for branch, curve in enumerate(curves):
        st = StateAudit(index, branch, u, "traced", stop_reason=curve.stop_reason)
        try:
            left = eigen_decompose(model, u)
            grid = np.linspace(0.0, curve.arclength, spec.samples_per_curve + 1)
            frame = None
            for s in grid:
                pt = point_at(model, curve, float(s), cfg)
                right = align_frame(eigen_decompose(model, pt.state), frame)
                st.reports.append(evaluate_point(model, u, pt, spec.policy, left=left, right=right))
                frame = right.eigenvectors
            st.range_flags = [
                {"i": c.i.passed, "ii": c.ii.passed, "ii_star": c.ii_star.passed}
                for c in cumulative_flags(st.reports, spec.policy)
            ]
        except (ContinuationError, ShockAuditError) as exc:
            st = StateAudit(index, branch, u, "untraced", message=str(exc), stop_reason=curve.stop_reason)
        out.append(st)
    return out


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    model = resolve_system(spec.system)
    states = spec.left_states()

    def work(item):
        index, u = item
        return _audit_state(model, spec, index, u)

    if jobs > 1 and len(states) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(work, enumerate(states)))
    else:
        chunks = [work(item) for item in enumerate(states)]
    return SweepResult(label=spec.name, system=dict(spec.system), states=[st for c in chunks for st in c])


def tally(result: AuditResult) -> tuple:
    """Implication tallies and counterexample list recomputed from stored reports."""
    policy = result.policy
    t = {
        "states": 0,
        "untraced": 0,
        "inadmissible": 0,
        "points": 0,
        "hypothesis_points": 0,
        "hypothesis_stable": 0,
        "dissipation_points": 0,
        "dissipation_violations": 0,
        "max_dissipation_under_i": None,
        "openness_probe": 0,
    }
    counterexamples = []
    for sweep, st in result.all_states():
        t["states"] += 1
        if st.status != "traced":
            t[st.status] += 1
            continue
        for k, rep in enumerate(st.reports):
            t["points"] += 1
            flags = flags_for(rep, policy)
            if flags["hypotheses"]:
                t["hypothesis_points"] += 1
                if flags["lopatinski"]:
                    t["hypothesis_stable"] += 1
                else:
                    counterexamples.append({
                        "sweep": sweep.label,
                        "grid_index": st.grid_index,
                        "branch": st.branch,
                        "left_state": np.asarray(st.left_state, dtype=float),
                        "s": rep.point.s,
                        "lax_margins": np.asarray(rep.lax_margins, dtype=float),
                        "speed_deriv": rep.speed_deriv,
                        "rel_entropy_deriv": rep.rel_entropy_deriv,
                        "lopatinski_det": rep.lopatinski_det,
                    })
            if flags["lopatinski"] and not (flags["i_prime"] and flags["ii_prime"]):
                t["openness_probe"] += 1
            in_range_i = k < len(st.range_flags) and st.range_flags[k]["i"]
            if in_range_i and rep.dissipation is not None and rep.point.s > 0:
                t["dissipation_points"] += 1
                prev = t["max_dissipation_under_i"]
                t["max_dissipation_under_i"] = rep.dissipation if prev is None else max(prev, rep.dissipation)
                if rep.dissipation > policy.eps_eq:
                    t["dissipation_violations"] += 1
    return t, counterexamples


def run_audit(specs, jobs: int = 1, policy: Optional[TolerancePolicy] = None) -> AuditResult:
    """Run one or more sweeps; results are ordered by sweep and grid index."""
    if isinstance(specs, SweepSpec):
        specs = [specs]
    specs = list(specs)
    if policy is None:
        policy = specs[0].policy if specs else TolerancePolicy()
    result = AuditResult(sweeps=[run_sweep(s, jobs) for s in specs], policy=policy)
    result.tallies, result.counterexamples = tally(result)
    return result


@dataclass(frozen=True)
class Verdict:
    passed: bool
    vacuous: bool
    counterexamples: list
    message: str


def implication_check(result: AuditResult) -> Verdict:
    tallies, counterexamples = tally(result)
    if counterexamples:
        lines = [f"FAIL: {len(counterexamples)} counterexample(s) to (i')+(ii') => Lopatinski"]
        for c in counterexamples:
            lines.append(
                f"  {c['sweep']}[{c['grid_index']}] u={np.asarray(c['left_state']).tolist()} s={c['s']:.6g} "
                f"sigma'={c['speed_deriv']:.3e} d_s eta={c['rel_entropy_deriv']:.3e} "
                f"det={c['lopatinski_det']:.3e} lax={np.asarray(c['lax_margins']).tolist()}"
            )
        return Verdict(False, False, counterexamples, "\n".join(lines))
    if tallies["hypothesis_points"] == 0:
        return Verdict(True, True, [], "PASS (vacuous: no sampled point satisfies the hypotheses)")
    return Verdict(
        True, False, [],
        f"PASS: {tallies['hypothesis_stable']}/{tallies['hypothesis_points']} hypothesis points Lopatinski-stable",
    )


def default_sweeps(policy: Optional[TolerancePolicy] = None, samples_per_curve: int = 60,
                   max_arclength: float = 2.0) -> list:
    """p-system 5x5 for gamma in {1.4, 2}, Euler 3x3 in (rho, p), Burgers 3 states."""
    policy = policy or TolerancePolicy()
    common = dict(policy=policy, samples_per_curve=samples_per_curve, max_arclength=max_arclength)
    specs = [
        SweepSpec(system={"name": "p_system", "params": {"k": 1.0, "gamma": g}},
                  ranges=[(0.5, 2.0), (-1.0, 1.0)], counts=[5, 5], label=f"p_system_gamma{g:g}", **common)
        for g in (1.4, 2.0)
    ]
    specs.append(SweepSpec(system={"name": "euler_ideal", "params": {"gamma": 1.4}},
                           ranges=[(0.5, 2.0), (0.0, 0.0), (0.5, 2.0)], counts=[3, 1, 3],
                           grid_variables="primitive", label="euler_ideal", **common))
    specs.append(SweepSpec(system={"name": "burgers", "params": {}}, ranges=[(0.5, 2.0)], counts=[3],
                           label="burgers", **common))
    return specs


def _state_doc(st: StateAudit) -> dict:
    return {
        "grid_index": st.grid_index,
        "branch": st.branch,
        "left_state": np.asarray(st.left_state, dtype=float),
        "status": st.status,
        "message": st.message,
        "stop_reason": st.stop_reason,
        "reports": [report_to_doc(r) for r in st.reports],
        "range_flags": [dict(f) for f in st.range_flags],
    }


def result_to_doc(result: AuditResult) -> dict:
    verdict = implication_check(result)
    return {
        "kind": "audit_result",
        "schema": 1,
        "policy": {"eps_eq": result.policy.eps_eq, "delta_lop": result.policy.delta_lop},
        "verdict": {"passed": verdict.passed, "vacuous": verdict.vacuous},
        "tallies": dict(result.tallies),
        "counterexamples": list(result.counterexamples),
        "sweeps": [
            {"label": sw.label, "system": _plain(sw.system), "states": [_state_doc(st) for st in sw.states]}
            for sw in result.sweeps
        ],
    }


def _plain(obj):
    if isinstance(obj, Mapping):
        return {str(k): _plain(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def plot_rows(result: AuditResult) -> tuple:
    """Columns and rows of the plot-ready profile table."""
    columns = ["sweep", "grid_index", "branch", "s", "speed", "speed_deriv", "rel_entropy_deriv",
               "abs_lopatinski", "dissipation"]
    rows = []
    for sweep, st in result.all_states():
        for rep in st.reports:
            rows.append([
                sweep.label, st.grid_index, st.branch, float(rep.point.s), float(rep.point.speed),
                float(rep.speed_deriv), float(rep.rel_entropy_deriv),
                float("nan") if rep.lopatinski_det is None else abs(float(rep.lopatinski_det)),
                float("nan") if rep.dissipation is None else float(rep.dissipation),
            ])
    return columns, rows
