#!/usr/bin/env python3
"""
OPA Lab command-line interface
Reproduces the exclusion, extremal and tau tables, solves single OPAs,
searches extra-zero examples, exports cobweb data and runs the verification suite.

    python app.py tables --format csv --out results
    python app.py opa --p 4 --degree 1 -- 1 3.64836 1.92310
    python app.py orbit --p 4 --t 1.1 --budget 20
"""

import argparse
import logging
import os
import sys

import pandas as pd

from config import SUPPORTED_PRECISION_BITS, get_config
from dynamics import export_cobweb, fixed_points, iterate_orbit
from errors import OpaLabError
from extra_zeros import find_min_k_extra_zero
from extremal import direct_maximize_t, extremal_table, solve_tdp
from models import RunConfig, PhiPsiParams, RealPoly
from opa import solve_opa
from precision import is_extended
from radius import exclusion_radius, solve_tau
from utils import (COMMANDS, OUTPUT_FORMATS, dumps_records, format_text, json_safe, parse_degrees,
                   report_extension, validate_run_config, write_report)
from verify import run_verification
from version import get_provenance, get_version_info

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
EXAMPLE_PS = (1.5, 1.75, 3.0, 4.0, 6.0)


def status(message):
    """Progress lines go to stderr so stdout stays machine-readable"""
    print(message, file=sys.stderr)


def split_coefficients(argv):
    """Numbers after `--` are coefficients; options following them go back to the parser"""
    if '--' not in argv:
        return list(argv), []
    i = argv.index('--')
    head, tail = list(argv[:i]), list(argv[i + 1:])
    coeffs = []
    while tail:
        try:
            coeffs.append(float(tail[0]))
        except ValueError:
            break
        tail.pop(0)
    return head + tail, coeffs


def build_parser(settings):
    parser = argparse.ArgumentParser(prog='opa-lab', description='Optimal polynomial approximants in l^p_A')
    parser.add_argument('command', nargs='?', choices=COMMANDS, help='Action to perform')
    parser.add_argument('--command', dest='command_flag', choices=COMMANDS, help=argparse.SUPPRESS)
    parser.add_argument('--p', type=float, nargs='*', help='Exponent(s) 1 < p < inf')
    parser.add_argument('--d', type=parse_degrees, help="Extremal degrees, e.g. '2-4' or '2,3'")
    parser.add_argument('--degree', type=int, default=1, help='OPA degree n')
    parser.add_argument('--tol', type=float, default=settings.TOL, help='Solver tolerance')
    parser.add_argument('--precision-bits', type=int, default=settings.PRECISION_BITS,
                        help=f"Working precision, one of {SUPPORTED_PRECISION_BITS}")
    parser.add_argument('--format', dest='output_format', default='text', choices=OUTPUT_FORMATS)
    parser.add_argument('--out', dest='output_path', help='Output file (directory for tables/orbit)')
    parser.add_argument('--budget', type=int, default=settings.ORBIT_BUDGET, help='Orbit step budget')
    parser.add_argument('--restarts', type=int, default=8, help='Restarts of the direct t_f ascent')
    parser.add_argument('--t', type=float, help='Orbit parameter t')
    parser.add_argument('--x1', type=float, help='Orbit start (default pt)')
    return parser


# Output helpers

def emit(table, cfg, name):
    """Write to --out when given, otherwise print in the requested format"""
    if cfg.output_path:
        result = write_report(table, cfg.output_path, cfg.output_format, get_provenance())
        if not result['success']:
            status(f"❌ Could not write {name}: {result['error']}")
            return False
        status(f"✅ {name}: {result['rows']} rows written to {result['file_path']}")
        return True

    if cfg.output_format == 'json':
        print(dumps_records(table.to_dict(orient='records'), get_provenance()))
    elif cfg.output_format == 'csv':
        sys.stdout.write(table.to_csv(index=False, lineterminator='\n'))
    else:
        print(format_text(table))
    return True


def report_failures(failures):
    for failure in failures:
        status(f"❌ {failure['error']}")
    return EXIT_FAILURE if failures else EXIT_OK


def _failure(e, **row):
    logger.error(f"{row}: {e}")
    return {**row, 'success': False, 'error': str(e)}


def _extremal_config(cfg):
    extremal_cfg = get_config().extremal_config()
    if is_extended(cfg.precision_bits):
        return extremal_cfg.with_overrides(double_max_degree=1, extended_bits=cfg.precision_bits)
    return extremal_cfg


# Commands

def cmd_opa(cfg, coeffs):
    if not coeffs:
        status('❌ Coefficients are required after --, e.g. `opa --p 4 -- 1 2 1`')
        return EXIT_USAGE
    if coeffs[0] == 0:
        print('f(0) = 0: every optimal polynomial approximant of 1/f is identically zero.')
        return EXIT_OK

    f = RealPoly(tuple(coeffs))
    solver_cfg = get_config().solver_config().with_overrides(tol=cfg.tol)
    rows, failures = [], []
    for p in cfg.p or [2.0]:
        try:
            result = solve_opa(f, p, cfg.degree, solver_cfg)
        except OpaLabError as e:
            failures.append(_failure(e, p=p, degree=cfg.degree))
            continue
        rows.append({
            'p': p,
            'degree': cfg.degree,
            'coeffs': json_safe(result.q),
            'residual_norm': result.residual_norm,
            'zeros': result.zeros,
            'orth_residuals': result.orth_residuals,
        })
        status(f"✅ p={p}: zeros {', '.join(f'{z:.6f}' for z in result.zeros) or 'none'}")

    if rows:
        emit(pd.DataFrame(rows), cfg, 'opa')
    return report_failures(failures)


def cmd_extremal(cfg):
    ps = cfg.p or list(get_config().EXTREMAL_PS)
    ds = cfg.d or list(get_config().EXTREMAL_DS)
    extremal_cfg = _extremal_config(cfg)
    solver_cfg = get_config().solver_config().with_overrides(tol=cfg.tol)

    solutions, direct, failures = [], [], []
    for p in ps:
        prev = None
        for d in sorted(ds):
            try:
                seed = prev if prev is not None and prev.d == d - 1 else None
                prev = solve_tdp(p, d, seed=seed, cfg=extremal_cfg)
            except OpaLabError as e:
                failures.append(_failure(e, p=p, d=d))
                prev = None
                continue
            solutions.append(prev)
            try:
                direct.append(direct_maximize_t(p, d, restarts=cfg.restarts, cfg=solver_cfg)[0])
            except OpaLabError as e:
                logger.warning(f"direct ascent failed for p={p} d={d}: {e}")
                direct.append(float('nan'))
            status(f"✅ p={p} d={d}: 1/T = {prev.inv_t:.6f}")

    if solutions:
        table = extremal_table(solutions)
        table['direct_t'] = direct
        emit(table, cfg, 'extremal')
    return report_failures(failures)


def cmd_tau(cfg):
    rows, failures = [], []
    for p in cfg.p or list(get_config().TAU_PS):
        try:
            rows.append(solve_tau(p, cfg.precision_bits).to_record())
        except OpaLabError as e:
            failures.append(_failure(e, p=p))
    if rows:
        emit(pd.DataFrame(rows, columns=['p', 'tau', 'xi1', 'xi2']), cfg, 'tau')
    return report_failures(failures)


def cmd_exclusion(cfg):
    rows = [exclusion_radius(p).to_record() for p in cfg.p or list(get_config().EXCLUSION_PS)]
    emit(pd.DataFrame(rows, columns=['p', 's', 'r']), cfg, 'exclusion')
    return EXIT_OK


def cmd_examples(cfg):
    settings = get_config()
    solver_cfg = settings.solver_config().with_overrides(tol=cfg.tol)
    rows, failures = [], []
    for p in cfg.p or list(EXAMPLE_PS):
        try:
            witness = find_min_k_extra_zero(p, cap=settings.SEARCH_CAP, cfg=solver_cfg)
        except OpaLabError as e:
            failures.append(_failure(e, p=p))
            continue
        rows.append({'p': p, 'k': witness.k, 'family': witness.family, 'zero': witness.zero,
                     'degree': witness.f.degree})
        status(f"✅ p={p}: k={witness.k}, zero {witness.zero:.6f}")
    if rows:
        emit(pd.DataFrame(rows), cfg, 'examples')
    return report_failures(failures)


def cmd_orbit(cfg, t, x1=None):
    if not cfg.p or t is None:
        status('❌ orbit needs --p and --t')
        return EXIT_USAGE
    p = cfg.p[0]
    try:
        params = PhiPsiParams(p, t)
        start = x1 if x1 is not None else p * t
        trace = iterate_orbit(params, start, budget=cfg.budget, cfg=get_config().orbit_config())
    except OpaLabError as e:
        return report_failures([_failure(e, p=p, t=t)])

    status(f"🔍 p={p} t={t}: {trace.status} after {trace.steps} steps via {' '.join(trace.branches)}")
    if t >= 1:
        try:
            fp = fixed_points(params)
            status(f"   fixed points xi1={fp.xi1:.10f} t={fp.t} xi2={fp.xi2:.10f}")
        except OpaLabError as e:
            logger.warning(f"fixed points unavailable: {e}")

    cobweb = export_cobweb(trace, params)
    directory = cfg.output_path or get_config().OUTPUT_DIR
    stem = f"orbit_p{p:g}_t{t:g}"
    ok = True
    for name, table in (('curves', cobweb.curves), ('segments', cobweb.segments)):
        result = write_report(table, os.path.join(directory, f"{stem}_{name}.csv"), 'csv')
        if result['success']:
            status(f"✅ {name}: {result['file_path']}")
        else:
            status(f"❌ {name}: {result['error']}")
            ok = False
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_verify(cfg):
    checks = run_verification(cfg.p, cfg.tol)
    width = max(len(c.name) for c in checks)
    for check in checks:
        mark = '✅' if check.passed else '❌'
        print(f"{mark} {check.name.ljust(width)}  {check.detail}")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        status(f"❌ {len(failed)} of {len(checks)} checks failed: {', '.join(failed)}")
        return EXIT_FAILURE
    status(f"✅ all {len(checks)} checks passed")
    return EXIT_OK


def cmd_tables(cfg):
    settings = get_config()
    directory = cfg.output_path or settings.OUTPUT_DIR
    ext = report_extension(cfg.output_format)
    provenance = get_provenance()
    failures = []

    exclusion = pd.DataFrame([exclusion_radius(p).to_record() for p in cfg.p or settings.EXCLUSION_PS],
                             columns=['p', 's', 'r'])

    # extremal and tau rows exist only for p > 2
    large_ps = [p for p in (cfg.p or settings.EXTREMAL_PS) if p > 2]
    extremal_cfg = _extremal_config(cfg)
    solutions = []
    for p in large_ps:
        prev = None
        for d in sorted(cfg.d or settings.EXTREMAL_DS):
            try:
                seed = prev if prev is not None and prev.d == d - 1 else None
                prev = solve_tdp(p, d, seed=seed, cfg=extremal_cfg)
                solutions.append(prev)
            except OpaLabError as e:
                failures.append(_failure(e, p=p, d=d))
                prev = None

    tau_rows = []
    for p in [p for p in (cfg.p or settings.TAU_PS) if p > 2]:
        try:
            tau_rows.append(solve_tau(p, cfg.precision_bits).to_record())
        except OpaLabError as e:
            failures.append(_failure(e, p=p))

    tables = {
        'exclusion': exclusion,
        'extremal': extremal_table(solutions),
        'tau': pd.DataFrame(tau_rows, columns=['p', 'tau', 'xi1', 'xi2']),
    }
    for name, table in tables.items():
        result = write_report(table, os.path.join(directory, f"{name}.{ext}"), cfg.output_format, provenance)
        if result['success']:
            status(f"✅ {name}: {result['rows']} rows written to {result['file_path']}")
        else:
            failures.append(_failure(result['error'], table=name))
    if failures:
        write_report(failures, os.path.join(directory, f"errors.{ext}"), cfg.output_format, provenance)
    return report_failures(failures)


def cmd_version():
    info = get_version_info()
    print(f"🎯 {info['display_name']}")
    print(f"   release date: {info['release_date'] or 'unreleased'}")
    print(f"   git commit:   {info['git_commit'] or 'unknown'}")
    return EXIT_OK


def main(argv=None):
    """Main function; returns the exit code"""
    settings = get_config()
    settings.init_logging()

    argv, coeffs = split_coefficients(sys.argv[1:] if argv is None else argv)
    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    command = args.command_flag or args.command
    if command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    cfg = RunConfig(
        command=command,
        p=args.p,
        d=args.d,
        degree=args.degree,
        tol=args.tol,
        precision_bits=args.precision_bits,
        output_format=args.output_format,
        output_path=args.output_path,
        budget=args.budget,
        restarts=args.restarts,
    )
    errors = validate_run_config(vars(cfg))
    if errors:
        for error in errors:
            status(f"❌ {error}")
        return EXIT_USAGE

    logger.info(f"running {command} with {cfg}")
    try:
        if command == 'opa':
            return cmd_opa(cfg, coeffs)
        if command == 'extremal':
            return cmd_extremal(cfg)
        if command == 'tau':
            return cmd_tau(cfg)
        if command == 'exclusion':
            return cmd_exclusion(cfg)
        if command == 'examples':
            return cmd_examples(cfg)
        if command == 'orbit':
            return cmd_orbit(cfg, args.t, args.x1)
        if command == 'verify':
            return cmd_verify(cfg)
        if command == 'tables':
            return cmd_tables(cfg)
        return cmd_version()
    except OpaLabError as e:
        logger.error(f"{command} failed: {e}")
        status(f"❌ {e}")
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
