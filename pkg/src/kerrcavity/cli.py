"""Batch front-end: ``kerrcavity evolve|compare|validate|kraus-check --config PATH``.

Exit codes: 0 success, 1 validation/threshold/solver failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from .config import FORMATS, RunConfig, parse_config
from .errors import ConfigError, KerrCavityError
from .fock import Truncation, make_state, max_abs
from .kraus import ChannelParams, completeness_residual, evolve_kraus, kraus_reconstruct, kraus_terms
from .observables import husimi_q, observe
from .solvers import IntegratorConfig, run_solver, solver_compare
from .validation import run_checks

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

RECORD_FIELDS = ("t", "solver", "trace_re", "trace_im", "purity", "mean_n", "fidelity_vs_ref", "min_eig")


def fmt(x) -> str:
    """17 significant digits, locale independent."""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _json_num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _write(cfg: RunConfig, text: str):
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _initial(cfg):
    return make_state(cfg.initial_state, Truncation(cfg.dimension))


def _evolve_rows(cfg: RunConfig):
    rho0 = _initial(cfg)
    rows = []
    for t in cfg.times:
        params = ChannelParams(cfg.chi, cfg.gamma, t)
        steps = IntegratorConfig.per_unit_time(cfg.rk4_steps_per_unit_time, t)
        for name in cfg.solvers:
            rho, _ = run_solver(name, rho0, params, steps, max_dim=cfg.liouville_max_dim)
            rows.append((name, rho, observe(rho, t, cfg.reference)))
    return rows


def records_csv(rows, dim) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(RECORD_FIELDS) + [f"p{k}" for k in range(dim)])
    for name, _, rec in rows:
        w.writerow([fmt(rec.t), name] + [fmt(getattr(rec, f)) for f in RECORD_FIELDS[2:]]
                   + [fmt(p) for p in rec.photon_dist])
    return buf.getvalue()


def records_json(cfg: RunConfig, rows) -> str:
    doc = {"config": cfg.to_dict(), "records": []}
    for name, _, rec in rows:
        entry = {"t": rec.t, "solver": name}
        entry.update({f: _json_num(getattr(rec, f)) for f in RECORD_FIELDS[2:]})
        entry["photon_dist"] = [_json_num(p) for p in rec.photon_dist]
        doc["records"].append(entry)
    if cfg.dump_density_matrices:
        doc["density_matrices"] = [
            {"t": rec.t, "solver": name, "dim": rho.dim,
             "data": np.stack([rho.elements.real, rho.elements.imag], axis=-1).ravel().tolist()}
            for name, rho, rec in rows
        ]
    if cfg.qgrid is not None:
        name, rho, rec = rows[-len(cfg.solvers)]
        q = husimi_q(rho, cfg.qgrid)
        doc["qgrid"] = {"t": rec.t, "solver": name, "re_min": q.re_min, "re_max": q.re_max,
                        "im_min": q.im_min, "im_max": q.im_max, "resolution": q.resolution,
                        "values": q.values.tolist()}
    return json.dumps(doc, indent=1) + "\n"


def run_evolve(cfg: RunConfig) -> int:
    rows = _evolve_rows(cfg)
    if cfg.output_format == "json":
        _write(cfg, records_json(cfg, rows))
    else:
        _write(cfg, records_csv(rows, cfg.dimension))
    return EXIT_OK


def run_compare(cfg: RunConfig) -> int:
    if len(cfg.solvers) < 2:
        raise ConfigError("compare needs at least two solvers", field="solvers")
    rho0 = _initial(cfg)
    reports = []
    for t in cfg.times:
        steps = IntegratorConfig.per_unit_time(cfg.rk4_steps_per_unit_time, t)
        reports.append(solver_compare(rho0, ChannelParams(cfg.chi, cfg.gamma, t), steps,
                                      solvers=cfg.solvers, max_dim=cfg.liouville_max_dim))
    passed = all(r.max_deviation <= cfg.threshold for r in reports)

    table = [f"{'t':>12} {'pair':>18} {'max_deviation':>14}  status"]
    for r in reports:
        for (a, b), d in r.deviations.items():
            table.append(f"{r.t:>12.6g} {a + '-' + b:>18} {d:>14.3e}  {'ok' if d <= cfg.threshold else 'FAIL'}")
        timing = ", ".join(f"{k}={v:.3f}s" for k, v in r.wall_time.items())
        drift = ", ".join(f"{k}={v:.1e}" for k, v in r.trace_drift.items())
        table.append(f"{'':>12} timings: {timing}; trace drift: {drift}")
    table.append(f"{'PASS' if passed else 'FAIL'}: threshold {cfg.threshold:.1e}")
    text = "\n".join(table) + "\n"

    if cfg.output_path:
        if cfg.output_format == "json":
            doc = {"config": cfg.to_dict(), "threshold": cfg.threshold, "passed": passed,
                   "comparisons": [{"t": r.t,
                                    "deviations": {f"{a}-{b}": d for (a, b), d in r.deviations.items()},
                                    "trace_drift": r.trace_drift, "wall_time": r.wall_time} for r in reports]}
            _write(cfg, json.dumps(doc, indent=1) + "\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["t", "solver_a", "solver_b", "max_deviation", "time_a", "time_b", "trace_drift_a", "trace_drift_b"])
            for r in reports:
                for (a, b), d in r.deviations.items():
                    w.writerow([fmt(r.t), a, b, fmt(d), fmt(r.wall_time[a]), fmt(r.wall_time[b]),
                                fmt(r.trace_drift[a]), fmt(r.trace_drift[b])])
            _write(cfg, buf.getvalue())
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


def run_validate(cfg: RunConfig) -> int:
    checks = run_checks(cfg.dimension, cfg.chi, cfg.gamma, cfg.times, cfg.initial_state)
    for c in checks:
        sys.stdout.write(c.line() + "\n")
    ok = all(c.passed for c in checks)
    sys.stdout.write(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed\n")
    if cfg.output_path:
        doc = {"config": cfg.to_dict(), "passed": ok,
               "checks": [{"name": c.name, "measured": c.measured, "tol": c.tol, "passed": c.passed,
                           "detail": c.detail} for c in checks]}
        _write(cfg, json.dumps(doc, indent=1) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def run_kraus_check(cfg: RunConfig) -> int:
    trunc = Truncation(cfg.dimension)
    rho0 = _initial(cfg)
    t = cfg.times[-1]
    params = ChannelParams(cfg.chi, cfg.gamma, t)
    terms = list(kraus_terms(trunc, params))
    recon = kraus_reconstruct(rho0, params)
    recon_dev = max_abs(recon - evolve_kraus(rho0, params).elements)
    resid = completeness_residual(trunc, params)
    diag_defect = max((k.defect for k in terms if k.m == k.n), default=0.0)
    max_defect = max(k.defect for k in terms)
    n_large = sum(k.defect > 1e-3 for k in terms)

    lines = [
        f"t={t:g} chi={cfg.chi:g} gamma={cfg.gamma:g} N={cfg.dimension}: {len(terms)} terms",
        f"max conjugacy defect (all terms): {max_defect:.3e}; terms with defect > 1e-3: {n_large}",
        f"{'PASS' if diag_defect <= 1e-14 else 'FAIL'} diagonal (m=n) defect: {diag_defect:.3e} tol=1.0e-14",
        f"{'PASS' if recon_dev <= 1e-10 else 'FAIL'} reconstruction deviation: {recon_dev:.3e} tol=1.0e-10",
        f"{'PASS' if resid <= 1e-12 else 'FAIL'} completeness residual: {resid:.3e} tol=1.0e-12",
    ]
    sys.stdout.write("\n".join(lines) + "\n")
    if cfg.output_path:
        if cfg.output_format == "json":
            doc = {"config": cfg.to_dict(), "reconstruction_deviation": recon_dev, "completeness_residual": resid,
                   "terms": [{"m": k.m, "n": k.n, "l": k.l, "defect": k.defect} for k in terms]}
            _write(cfg, json.dumps(doc, indent=1) + "\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["m", "n", "l", "defect"])
            for k in terms:
                w.writerow([k.m, k.n, k.l, fmt(k.defect)])
            _write(cfg, buf.getvalue())
    ok = diag_defect <= 1e-14 and recon_dev <= 1e-10 and resid <= 1e-12
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "evolve": run_evolve,
    "compare": run_compare,
    "validate": run_validate,
    "kraus-check": run_kraus_check,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="kerrcavity", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output file (default: config output.path, else stdout)")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--threshold", type=float, help="compare: max allowed pairwise deviation")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        overrides = {}
        if args.out is not None:
            overrides["output_path"] = args.out
        if args.format is not None:
            overrides["output_format"] = args.format
        if args.threshold is not None:
            if not args.threshold >= 0:
                raise ConfigError("--threshold must be >= 0", field="threshold")
            overrides["threshold"] = args.threshold
        cfg = replace(cfg, **overrides)
        return COMMANDS[args.command](cfg)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"kerrcavity: config error: {exc}\n")
        return EXIT_USAGE
    except KerrCavityError as exc:
        sys.stderr.write(f"kerrcavity: {args.command} failed: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
