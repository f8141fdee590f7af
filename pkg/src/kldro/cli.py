"""Batch front end.

Subcommands write CSV outputs plus a ``report.json`` into ``--out``. Exit
status is 0 on success, 1 on input errors and 2 when a certificate check,
bound check or property suite fails.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import conic, ldp, validation
from . import predictors as pr
from .config import RunConfig, load_config
from .errors import BudgetError, DomainError, InputError
from .io import (
    parse_vector, read_centers, read_cost_matrix, read_observations, slugify, write_csv, write_json,
)
from .simplex import CostMatrix, Distribution, ball_boundary, empirical_distribution, ternary_embed

log = logging.getLogger("kldro")

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2
MAX_D, MAX_T = 4, 500
EXACT_ARITHMETIC_TYPES = 200_000

FIGURE2_CENTERS = (
    (1 / 3, 1 / 3, 1 / 3),
    (14 / 18, 3 / 18, 1 / 18),
    (2 / 36, 17 / 36, 17 / 36),
    (1.0, 0.0, 0.0),
)


def _sample_complexity(cfg: RunConfig, d: int) -> dict | None:
    if cfg.beta is None:
        return None
    kinds = [k for k in cfg.predictor_kinds() if k.rate > 0]
    rates = sorted({k.rate for k in kinds} | ({cfg.rate} if cfg.rate > 0 else set()))
    return {repr(r): pr.sample_complexity(d, r, cfg.beta) for r in rates}


def _load_problem(cfg, obs_path, costs_path):
    C = read_cost_matrix(costs_path)
    obs = read_observations(obs_path)
    bad = [i for i in obs if i > C.d]
    if bad:
        raise InputError(f"{obs_path}: scenario id {bad[0]} exceeds the {C.d} scenarios of {costs_path}")
    return C, obs, empirical_distribution(obs, C.d)


def cmd_predict(cfg: RunConfig, obs_path, costs_path, prescribe: bool = False) -> tuple[dict, int]:
    C, obs, Pp = _load_problem(cfg, obs_path, costs_path)
    kinds = cfg.predictor_kinds()
    out = Path(cfg.out)
    failures = 0
    decisions, rows = [], []
    for k in range(C.n):
        g = C.row(k)
        base = pr.sample_average(g, Pp)
        entry = {"decision": C.decision_labels[k], "sample_average": base, "values": {}, "conservatism": {}, "certificates": {}}
        for kind in kinds:
            try:
                if kind.name == "dro":
                    value, cert = pr.dro_predictor(g, Pp, kind.rate)
                    check = conic.verify_exp_cone_solution(g, Pp, kind.rate, cert)
                    problems = cert.problems(g)
                    summary = cert.summary() | {"conic": check.summary(), "invariant_problems": problems}
                    entry["certificates"][kind.label] = summary
                    if not check.ok or problems or value - base < -1e-10:
                        failures += 1
                else:
                    value = pr.predict(g, Pp, kind)
            except DomainError as exc:
                value = math.nan
                entry.setdefault("errors", {})[kind.label] = str(exc)
            entry["values"][kind.label] = value
            entry["conservatism"][kind.label] = value - base
            rows.append((C.decision_labels[k], kind.label, value, base, value - base))
        decisions.append(entry)
    files = [write_csv(out / "predictions.csv", ["decision", "kind", "value", "sample_average", "conservatism"], rows)]
    prescriptions = {}
    if prescribe:
        prow = []
        for kind in kinds:
            vals = [d["values"][kind.label] for d in decisions]
            if any(math.isnan(v) for v in vals):
                continue
            idx = int(np.argmin(vals))
            prescriptions[kind.label] = {"decision": C.decision_labels[idx], "index": idx + 1, "predicted_cost": vals[idx]}
            prow.append((kind.label, C.decision_labels[idx], idx + 1, vals[idx]))
        files.append(write_csv(out / "prescriptions.csv", ["kind", "decision", "index", "predicted_cost"], prow))
    report = {
        "command": "prescribe" if prescribe else "predict",
        "config": cfg.as_dict(),
        "T": len(obs),
        "empirical_distribution": Pp.weights.tolist(),
        "decisions": decisions,
        "prescriptions": prescriptions,
        "certificate_failures": failures,
        "bound_violations": 0,
        "sample_complexity": _sample_complexity(cfg, C.d),
        "files": [p.name for p in files],
    }
    return report, EXIT_VIOLATION if failures else EXIT_OK


def _model(cfg: RunConfig, d: int | None = None) -> Distribution:
    if cfg.model is None:
        raise InputError("this command needs --model")
    P = Distribution(cfg.model)
    if d is not None and P.d != d:
        raise InputError(f"model has {P.d} scenarios, costs have {d}")
    return P


def _guard(cfg: RunConfig, d: int, n_curves: int) -> int:
    if (d > MAX_D or cfg.tmax > MAX_T) and not cfg.force:
        need = ldp.enumeration_cost(d, cfg.Ts) * n_curves
        raise InputError(
            f"exact enumeration is limited to d <= {MAX_D} and T <= {MAX_T} (got d={d}, tmax={cfg.tmax}); "
            f"the job needs about {need} type evaluations; rerun with --force to override"
        )
    return ldp.check_budget(d, cfg.Ts, force=cfg.force)


def _curve_report(curve, path, Ts) -> dict:
    try:
        rate = ldp.fit_decay_rate(curve)
    except DomainError:
        rate = None
    return {
        "context": curve.context,
        "kind": curve.predictor.label,
        "file": path.name,
        "fitted_decay_rate": rate,
        "bound_violations": len(curve.violations()),
        "pearson_fallback_types": curve.fallback_count,
    }


CURVE_HEADER = ["T", "exact_probability", "strong_bound", "log_probability"]


def cmd_disappoint(cfg: RunConfig, costs_path) -> tuple[dict, int]:
    C = read_cost_matrix(costs_path)
    P = _model(cfg, C.d)
    kinds = cfg.predictor_kinds()
    types = _guard(cfg, C.d, (C.n + 1) * len(kinds))
    exact = types <= EXACT_ARITHMETIC_TYPES
    out = Path(cfg.out)
    curves = []
    violations = 0
    jobs = [(C.row(k), C.decision_labels[k]) for k in range(C.n)] + [(C, "prescriptor")]
    for g, label in jobs:
        for kind in kinds:
            curve = ldp.disappointment_curve(P, g, kind, cfg.Ts, context=label, exact=exact)
            path = write_csv(out / f"curve_{slugify(label)}_{slugify(kind.slug)}.csv", CURVE_HEADER, curve.rows())
            curves.append(_curve_report(curve, path, cfg.Ts))
            violations += len(curve.violations())
    report = {
        "command": "disappoint",
        "config": cfg.as_dict(),
        "model": P.weights.tolist(),
        "arithmetic": "rational" if exact else "float",
        "types_per_curve": types,
        "curves": curves,
        "bound_violations": violations,
        "sample_complexity": _sample_complexity(cfg, C.d),
    }
    return report, EXIT_VIOLATION if violations else EXIT_OK


def cmd_sanov(cfg: RunConfig) -> tuple[dict, int]:
    P = _model(cfg)
    if cfg.event is None:
        raise InputError("sanov needs --event 'a1,...,ad>=b'")
    event = ldp.Halfspace.parse(cfg.event)
    if len(event.coef) != P.d:
        raise InputError(f"event has {len(event.coef)} coefficients, model has {P.d} scenarios")
    _guard(cfg, P.d, 1)
    rate = ldp.event_rate(P, event, None, cfg.grid)
    rows, violations = [], 0
    for T in cfg.Ts:
        res = ldp.sanov_set_probability(P, T, event, cfg.grid)
        lp = math.log(res.exact) if res.exact > 0 else -math.inf
        rows.append((T, res.exact, res.rate_bound, lp))
        violations += res.exact > res.rate_bound
    path = write_csv(Path(cfg.out) / "sanov.csv", CURVE_HEADER, rows)
    report = {
        "command": "sanov",
        "config": cfg.as_dict(),
        "model": P.weights.tolist(),
        "event": {"coef": list(event.coef), "threshold": event.threshold},
        "grid_rate": rate,
        "bound_violations": violations,
        "files": [path.name],
    }
    return report, EXIT_VIOLATION if violations else EXIT_OK


def _level_line(c: float) -> list[tuple[float, float]]:
    """Segment ``{P : P(1) = c}`` across the triangle, as ternary points."""
    c = min(max(c, 0.0), 1.0)
    return [ternary_embed((c, 1 - c, 0.0)), ternary_embed((c, 0.0, 1 - c))]


def _type_size(P: Distribution, limit: int = 10_000) -> int | None:
    """Smallest sample size ``T`` for which ``P`` is an empirical distribution."""
    return next((T for T in range(1, limit + 1) if P.is_type(T)), None)


def cmd_figure2(cfg: RunConfig, centers_path=None) -> tuple[dict, int]:
    centers = read_centers(centers_path) if centers_path else [Distribution(c) for c in FIGURE2_CENTERS]
    r = cfg.rate
    if not r > 0:
        raise InputError("figure2 needs a positive --rate")
    g = np.array([1.0, 0.0, 0.0])
    out = Path(cfg.out)
    entries = []
    for j, Pp in enumerate(centers, start=1):
        if Pp.d != 3:
            raise InputError(f"center {j} has {Pp.d} scenarios; figure2 needs 3")
        pts = ball_boundary(Pp, r, cfg.directions)
        T_c = _type_size(Pp)
        base = pr.sample_average(g, Pp)
        value, _ = pr.dro_predictor(g, Pp, r)
        rows = [(*ternary_embed(b.point), "face" if b.on_face else "boundary") for b in pts]
        rows += [(*pt, "level_sample_average") for pt in _level_line(base)]
        rows += [(*pt, "level_dro") for pt in _level_line(value)]
        rows.append((*ternary_embed(Pp), "center"))
        path = write_csv(out / f"figure2_center{j}.csv", ["u", "v", "tag"], rows)
        entries.append({
            "center": Pp.weights.tolist(),
            "file": path.name,
            "sample_average": base,
            "dro_value": value,
            "conservatism": value - base,
            "min_P1_on_boundary": min(float(b.point[0]) for b in pts),
            "face_points": sum(b.on_face for b in pts),
            # the guarantees concern empirical distributions; flag other centers
            "type_sample_size": T_c,
            "is_type": T_c is not None,
        })
    report = {"command": "figure2", "config": cfg.as_dict(), "rate": r, "centers": entries, "bound_violations": 0}
    return report, EXIT_OK


def cmd_validate(cfg: RunConfig, inject_fault: bool = False) -> tuple[dict, int]:
    results = validation.run_all(cfg.seed, inject_fault=inject_fault)
    report = {
        "command": "validate",
        "config": cfg.as_dict(),
        "suites": [r.summary() for r in results],
        "passed": all(r.passed for r in results),
        "bound_violations": sum(r.failures for r in results if r.name == "finite_sample"),
    }
    for r in results:
        log.info("%-20s %5d checks  %3d failures  worst residual %.3g", r.name, r.checks, r.failures, r.worst_residual)
    return report, EXIT_OK if report["passed"] else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--rate", type=float, help="decay rate r (nats per sample)")
    common.add_argument("--model", help="model distribution, e.g. 0.5,0.5")
    common.add_argument("--tmin", type=int)
    common.add_argument("--tmax", type=int)
    common.add_argument("--tstep", type=int)
    common.add_argument("--kinds", help="comma-separated kinds: sample_average,dro,reverse,markowitz,pearson[:rate]")
    common.add_argument("--grid", type=int, help="simplex grid resolution")
    common.add_argument("--beta", type=float, help="significance level for the sample-complexity display")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--force", action="store_true", default=None, help="lift the enumeration budget")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="kldro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("predict", "prescribe"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("observations")
        p.add_argument("costs")
    p = sub.add_parser("disappoint", parents=[common])
    p.add_argument("costs")
    p = sub.add_parser("sanov", parents=[common])
    p.add_argument("--event", help="halfspace event 'a1,...,ad>=b'")
    p = sub.add_parser("figure2", parents=[common])
    p.add_argument("centers", nargs="?")
    p.add_argument("--directions", type=int)
    p = sub.add_parser("validate", parents=[common])
    p.add_argument("--inject-fault", action="store_true", help="perturb certificates to exercise failure reporting")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        overrides = {
            "rate": args.rate,
            "model": parse_vector(args.model) if args.model else None,
            "tmin": args.tmin, "tmax": args.tmax, "tstep": args.tstep,
            "kinds": [k for k in args.kinds.split(",") if k.strip()] if args.kinds else None,
            "grid": args.grid, "beta": args.beta, "out": args.out, "seed": args.seed, "force": args.force,
            "event": getattr(args, "event", None), "directions": getattr(args, "directions", None),
        }
        cfg = load_config(args.config, overrides)
        if args.command in ("predict", "prescribe"):
            report, status = cmd_predict(cfg, args.observations, args.costs, prescribe=args.command == "prescribe")
        elif args.command == "disappoint":
            report, status = cmd_disappoint(cfg, args.costs)
        elif args.command == "sanov":
            report, status = cmd_sanov(cfg)
        elif args.command == "figure2":
            report, status = cmd_figure2(cfg, args.centers)
        else:
            report, status = cmd_validate(cfg, args.inject_fault)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report["exit_status"] = status
    path = write_json(Path(cfg.out) / "report.json", report)
    print(f"{args.command}: wrote {path} (exit {status})")
    return status


if __name__ == "__main__":
    sys.exit(main())
