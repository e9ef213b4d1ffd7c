"""Command-line frontend: ``shockaudit {trace,check,audit,validate}``.

Exit codes: 0 success/PASS, 1 configuration error, 2 continuation stall or
unreachable target, 3 audit (or validation) FAIL.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import __version__
from .audit import (
    SweepSpec,
    default_sweeps,
    implication_check,
    plot_rows,
    resolve_system,
    result_to_doc,
    run_audit,
)
from .criteria import TolerancePolicy, evaluate_point, lv_conditions
from .exprlang import ParseError, SystemConfigError, SystemValidationError
from .hugoniot import (
    ContinuationConfig,
    ContinuationError,
    TargetNotFound,
    locate_parameter,
    point_at,
    trace_branches,
)
from .model import HugoniotCurve, ShockAuditError, SystemModel, validate_system
from .serialize import curve_to_lines, delimited_table, encode, report_to_doc
from .systems import CatalogError, catalog_names, sample_states

log = logging.getLogger("shockaudit")

EXIT_OK, EXIT_CONFIG, EXIT_STALL, EXIT_FAIL = 0, 1, 2, 3


class ConfigError(ShockAuditError):
    pass


@dataclass
class RunConfig:
    system: dict
    left_state: Optional[list] = None
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    policy: TolerancePolicy = field(default_factory=TolerancePolicy)
    check: dict = field(default_factory=dict)
    audit: dict = field(default_factory=dict)
    samples: Optional[list] = None
    out: Path = Path("out")
    fmt: str = "structured"
    jobs: int = 1


def _parse_params(text: str) -> dict:
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    out = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in item:
            raise ConfigError(f"bad --params entry {item!r}; expected key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = float(value)
    return out


def _parse_vector(text: str) -> list:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ConfigError(f"cannot read a state from {text!r}") from None


def load_config(args: argparse.Namespace) -> RunConfig:
    doc: dict[str, Any] = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        loaded = yaml.safe_load(path.read_text(encoding="utf-8"))
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError("config document must be a mapping")
        doc = loaded or {}

    system = dict(doc.get("system") or {})
    if args.system:
        system = {"name": args.system, "params": system.get("params", {}) if system.get("name") == args.system else {}}
    if args.params:
        if "flux" in system:
            system["parameters"] = {**(system.get("parameters") or {}), **_parse_params(args.params)}
        else:
            system["params"] = {**(system.get("params") or {}), **_parse_params(args.params)}
    if not system and args.command != "audit":
        raise ConfigError("no system given: set 'system' in the config or pass --system")
    if "name" in system and "flux" in system:
        raise ConfigError("system must be either a catalog entry ('name') or an expression document ('flux'), not both")
    if system and "name" not in system and "flux" not in system:
        raise ConfigError("system needs 'name' (catalog) or 'flux'/'entropy' (expression document)")

    cont = dict(doc.get("continuation") or {})
    if getattr(args, "arclength", None) is not None:
        cont["max_arclength"] = args.arclength
    try:
        continuation = ContinuationConfig(**cont)
    except TypeError as exc:
        raise ConfigError(f"bad continuation settings: {exc}") from None

    tol = dict(doc.get("tolerances") or {})
    if args.tol_eq is not None:
        tol["eps_eq"] = args.tol_eq
    if args.delta_lop is not None:
        tol["delta_lop"] = args.delta_lop
    try:
        policy = TolerancePolicy(**tol)
    except TypeError as exc:
        raise ConfigError(f"bad tolerance settings: {exc}") from None

    left = doc.get("left_state")
    if getattr(args, "left_state", None):
        left = _parse_vector(args.left_state)

    check = dict(doc.get("check") or {})
    for key in ("s_plus", "target_speed"):
        value = getattr(args, key, None)
        if value is not None:
            check = {key: value}
    if getattr(args, "target_coord", None):
        index, _, value = args.target_coord.partition("=")
        check = {"target_coordinate": {"index": int(index), "value": float(value)}}

    out = Path(args.out or doc.get("out") or "out")
    fmt = args.format or doc.get("format") or "structured"
    if fmt not in ("structured", "delimited"):
        raise ConfigError(f"unknown format {fmt!r}")
    jobs = args.jobs if args.jobs is not None else int(doc.get("jobs", 1))
    return RunConfig(system=system, left_state=left, continuation=continuation, policy=policy, check=check,
                     audit=dict(doc.get("audit") or {}), samples=doc.get("samples"), out=out, fmt=fmt,
                     jobs=max(1, jobs))


def _model(cfg: RunConfig) -> SystemModel:
    return resolve_system(cfg.system)


def _left_state(cfg: RunConfig, model: SystemModel) -> np.ndarray:
    if cfg.left_state is None:
        raise ConfigError("missing key 'left_state' (or --left-state)")
    u = np.asarray(cfg.left_state, dtype=float)
    if u.shape != (model.n,):
        raise ConfigError(f"'left_state' must have {model.n} entries, got {u.size}")
    if not model.admissible(u):
        raise ConfigError(f"'left_state' {u.tolist()} is outside the domain of {model.name}")
    return u


def _prepare_out(cfg: RunConfig) -> Path:
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {cfg.out}: {exc}") from None
    return cfg.out


def _write_curve(cfg: RunConfig, model: SystemModel, curve: HugoniotCurve, stem: str) -> Path:
    out = _prepare_out(cfg)
    u = curve.left_state
    rh = [p.rh_residual(model, u) for p in curve.points]
    if cfg.fmt == "structured":
        path = out / f"{stem}.jsonl"
        path.write_text(curve_to_lines(curve, rh), encoding="utf-8")
    else:
        n = model.n
        cols = (["s"] + [f"S{i + 1}" for i in range(n)] + ["sigma"] + [f"dS{i + 1}" for i in range(n)]
                + ["dsigma", "rh_residual"])
        rows = [[p.s, *p.state, p.speed, *p.state_tangent, p.speed_tangent, r] for p, r in zip(curve.points, rh)]
        path = out / f"{stem}.csv"
        path.write_text(delimited_table(cols, rows), encoding="utf-8")
    return path


def cmd_trace(cfg: RunConfig) -> int:
    model = _model(cfg)
    u = _left_state(cfg, model)
    try:
        curves = trace_branches(model, u, cfg.continuation)
    except ContinuationError as exc:
        if exc.curve is not None:
            path = _write_curve(cfg, model, exc.curve, "curve")
            print(f"partial curve written to {path}", file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STALL
    for k, curve in enumerate(curves):
        path = _write_curve(cfg, model, curve, "curve" if len(curves) == 1 else f"curve_branch{k + 1}")
        print(f"{path}: {len(curve.points)} points, s_end={curve.arclength:.6g}, stop: {curve.stop_reason}")
    return EXIT_OK


def _select_point(model, curve, check: dict, cont: ContinuationConfig):
    if "s_plus" in check:
        return point_at(model, curve, float(check["s_plus"]), cont)
    if "target_speed" in check:
        target = float(check["target_speed"])
        return locate_parameter(model, curve, lambda p: p.speed - target, cont)
    if "target_coordinate" in check:
        tc = check["target_coordinate"]
        index, value = int(tc["index"]), float(tc["value"])
        if not 0 <= index < model.n:
            raise ConfigError(f"target_coordinate index {index} out of range for n={model.n}")
        return locate_parameter(model, curve, lambda p: p.state[index] - value, cont)
    raise ConfigError("missing key 'check' selector: one of s_plus, target_speed, target_coordinate")


def _fmt_flag(v) -> str:
    return "n/a" if v is None else ("PASS" if v else "FAIL")


def cmd_check(cfg: RunConfig) -> int:
    model = _model(cfg)
    u = _left_state(cfg, model)
    cont = cfg.continuation
    if "s_plus" in cfg.check:
        cont = cont.replace(max_arclength=max(cont.max_arclength, float(cfg.check["s_plus"])))
    try:
        curve = trace_branches(model, u, cont)[0]
        point = _select_point(model, curve, cfg.check, cont)
        lv = lv_conditions(model, u, curve, point.s, cfg.policy, cont)
    except (ContinuationError, TargetNotFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STALL
    report = evaluate_point(model, u, point, cfg.policy)

    grid = np.linspace(0.0, point.s, 51) if point.s > 0 else np.array([0.0])
    profile = [evaluate_point(model, u, point_at(model, curve, float(s), cont), cfg.policy) for s in grid]

    out = _prepare_out(cfg)
    doc = {
        "kind": "check_result",
        "schema": 1,
        "system": cfg.system,
        "s_plus": point.s,
        "report": report_to_doc(report),
        "conditions": {
            k: {"passed": c.passed, "worst_margin": c.worst_margin, "worst_s": c.worst_s}
            for k, c in (("i", lv.i), ("ii", lv.ii), ("i_prime", lv.i_prime), ("ii_prime", lv.ii_prime),
                         ("ii_star", lv.ii_star))
        },
        "profile": [report_to_doc(r) for r in profile],
    }
    (out / "report.json").write_text(encode(doc) + "\n", encoding="utf-8")
    cols = ["s", "speed", "speed_deriv", "rel_entropy", "rel_entropy_deriv", "lopatinski", "dissipation"]
    rows = [[r.point.s, r.point.speed, r.speed_deriv, r.rel_entropy, r.rel_entropy_deriv,
             float("nan") if r.lopatinski_det is None else r.lopatinski_det,
             float("nan") if r.dissipation is None else r.dissipation] for r in profile]
    (out / "profile.csv").write_text(delimited_table(cols, rows), encoding="utf-8")

    f = report.flags
    print(f"shock at s_+ = {point.s:.12g}: S = {point.state.tolist()}, sigma = {point.speed:.12g}")
    print(f"  Lax 1-shock       {_fmt_flag(f['lax'])}  margins {np.round(report.lax_margins, 12).tolist()}")
    if report.lopatinski_det is None:
        print("  Lopatinski        ERROR degenerate: zero-amplitude shock")
    else:
        print(f"  Lopatinski        {_fmt_flag(f['lopatinski'])}  |det| = {abs(report.lopatinski_det):.6g}")
    for key, label in (("i", "(i)  on [0,s_+]"), ("ii", "(ii) on [0,s_+]"), ("i_prime", "(i')"),
                       ("ii_prime", "(ii')"), ("ii_star", "(ii*)")):
        c = getattr(lv, key)
        print(f"  {label:<17} {_fmt_flag(c.passed)}  worst margin {c.worst_margin:.6g} at s={c.worst_s:.6g}")
    if report.dissipation is None:
        print("  dissipation       n/a   entropy flux unavailable")
    else:
        print(f"  dissipation       {_fmt_flag(f['dissipative'])}  [q]-sigma[eta] = {report.dissipation:.12g}")
    print(f"written: {out / 'report.json'}, {out / 'profile.csv'}")
    return EXIT_OK


def _sweeps_from_config(cfg: RunConfig) -> list:
    audit = cfg.audit
    common = {
        "policy": cfg.policy,
        "continuation": cfg.continuation,
        "samples_per_curve": int(audit.get("samples_per_curve", 60)),
        "max_arclength": float(audit.get("max_arclength", cfg.continuation.max_arclength)),
    }
    sweeps = audit.get("sweeps")
    if not sweeps:
        return default_sweeps(cfg.policy, common["samples_per_curve"], common["max_arclength"])
    specs = []
    for k, sw in enumerate(sweeps):
        grid = sw.get("grid") or {}
        if "ranges" not in grid or "counts" not in grid:
            raise ConfigError(f"audit sweep {k}: missing key 'grid.ranges' or 'grid.counts'")
        system = sw.get("system") or cfg.system
        if not system:
            raise ConfigError(f"audit sweep {k}: missing key 'system'")
        try:
            specs.append(SweepSpec(
                system=system,
                ranges=[tuple(r) for r in grid["ranges"]],
                counts=list(grid["counts"]),
                label=str(sw.get("label", "")),
                grid_variables=str(grid.get("variables", "conservative")),
                **common,
            ))
        except ValueError as exc:
            raise ConfigError(f"audit sweep {k}: {exc}") from None
    return specs


def cmd_audit(cfg: RunConfig) -> int:
    specs = _sweeps_from_config(cfg)
    for spec in specs:
        resolve_system(spec.system)
    start = time.perf_counter()
    result = run_audit(specs, jobs=cfg.jobs, policy=cfg.policy)
    elapsed = time.perf_counter() - start
    verdict = implication_check(result)

    out = _prepare_out(cfg)
    (out / "audit_result.json").write_text(encode(result_to_doc(result)) + "\n", encoding="utf-8")
    cols, rows = plot_rows(result)
    (out / "audit_profiles.csv").write_text(delimited_table(cols, rows), encoding="utf-8")
    meta = {"created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "runtime_seconds": elapsed, "jobs": cfg.jobs,
            "version": __version__}
    (out / "audit_meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")

    t = result.tallies
    if t["states"] and t["inadmissible"] == t["states"]:
        print("warning: every left state is outside the domain; nothing was audited", file=sys.stderr)
    print(f"states {t['states']} (untraced {t['untraced']}, inadmissible {t['inadmissible']}), "
          f"points {t['points']}, hypothesis points {t['hypothesis_points']}, "
          f"openness probe {t['openness_probe']}, dissipation violations {t['dissipation_violations']}")
    print(verdict.message)
    return EXIT_OK if verdict.passed else EXIT_FAIL


def cmd_validate(cfg: RunConfig) -> int:
    model = _model(cfg)
    if cfg.samples:
        samples = cfg.samples
    elif cfg.left_state is not None:
        samples = [cfg.left_state]
    elif "name" in cfg.system:
        samples = sample_states(cfg.system["name"], cfg.system.get("params"), 20, np.random.default_rng(0))
    else:
        raise ConfigError("missing key 'samples' (or 'left_state') for validation")
    report = validate_system(model, samples)
    for s in report.samples:
        status = "PASS" if s.passed else "FAIL: " + "; ".join(s.failures)
        res = ", ".join(f"{k}={v:.2e}" for k, v in s.residuals.items())
        print(f"{np.asarray(s.state).tolist()}: {status} ({res})")
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"trace": cmd_trace, "check": cmd_check, "audit": cmd_audit, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shockaudit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--system", help=f"catalog system ({', '.join(catalog_names())})")
    common.add_argument("--params", help="system parameters, 'k=1,gamma=2' or JSON")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--format", choices=("delimited", "structured"))
    common.add_argument("--tol-eq", type=float, dest="tol_eq", help="band for nonstrict inequalities")
    common.add_argument("--delta-lop", type=float, dest="delta_lop", help="Lopatinski degeneracy threshold")
    common.add_argument("--jobs", type=int, help="worker threads for audit sweeps")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("trace", "check", "validate"):
            p.add_argument("--left-state", dest="left_state", help="comma-separated left state")
        if name in ("trace", "check", "audit"):
            p.add_argument("--arclength", type=float, help="maximum pseudo-arclength")
        if name == "check":
            p.add_argument("--s-plus", type=float, dest="s_plus")
            p.add_argument("--target-speed", type=float, dest="target_speed")
            p.add_argument("--target-coord", dest="target_coord", help="INDEX=VALUE (0-based index)")
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, CatalogError, SystemConfigError, SystemValidationError, ParseError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShockAuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STALL


if __name__ == "__main__":
    sys.exit(main())
