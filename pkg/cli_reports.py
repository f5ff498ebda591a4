"""
Command-line front end: lewis, embed, convexity and certificate commands.

Each command layers its configuration (environment defaults, optional
key=value file, flags), runs its pipeline, writes its data files atomically
and finishes with a run manifest referencing every file it wrote.
"""
import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler

from config import VERSION, ExperimentConfig, get_config, read_config_file
from convexity_lab import (
    PointMap, diamond_canonical_chain, diamond_convexity_ratio, impossibility_certificate,
    laakso_canonical_chain, markov_convexity_ratio,
)
from errors import ChecksFailed, InvalidExponents, UsageError
from graph_factory import diamond, l1_embed, shortest_path_metric, write_edge_list, write_embedding
from io_utils import read_matrix_stack, write_csv, write_json, write_text
from lewis_solver import MODES, SolverConfig, SubspaceBasis, certify_lewis, diagonal_subspace, random_subspace, solve_lewis
from middleware import cli_command, timed
from sq_embedding import build_embedding
from svg_plot import write_line_plot
from validators import validate_exponent_pair

logger = logging.getLogger('geolab.cli')

FORMATS = ('json', 'csv', 'svg')
KINDS = ('laakso', 'diamond', 'both')
TAIL_REL = 1e-6

_log_handler = None


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    tool_version: str = VERSION
    checks: dict = field(default_factory=lambda: {'passed': 0, 'failed': 0})
    files: list = field(default_factory=list)
    created_at: str = None
    wall_time_s: float = None

    def record(self, passed):
        self.checks['passed' if passed else 'failed'] += 1

    def to_dict(self, no_timestamp=False):
        data = {
            'tool_version': self.tool_version,
            'command': self.command,
            'config': self.config,
            'seed': self.seed,
            'checks': dict(self.checks),
            'files': list(self.files),
        }
        if not no_timestamp:
            data['created_at'] = self.created_at
            data['wall_time_s'] = self.wall_time_s
        return data


def configure_logging(base):
    """File logging with rotation in production, console logging in debug/testing."""
    global _log_handler
    root = logging.getLogger('geolab')
    if _log_handler is not None:
        root.removeHandler(_log_handler)
    if not base.DEBUG:
        log_dir = os.path.dirname(base.LOG_FILE)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir)
        handler = RotatingFileHandler(base.LOG_FILE, maxBytes=10240000, backupCount=10)
        handler.setFormatter(logging.Formatter(
            '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'
        ))
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    handler.setLevel(base.LOG_LEVEL)
    root.addHandler(handler)
    root.setLevel(base.LOG_LEVEL)
    _log_handler = handler
    root.info(f'geolab {VERSION} startup')


def _param(exp, name, cast, default=None):
    value = exp.params.get(name)
    if value is None:
        return default
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise UsageError(f"{name}: invalid value {value!r}")


def _flag(exp, name):
    value = exp.params.get(name)
    if isinstance(value, str):
        return value.strip().lower() in ('1', 'true', 'yes', 'on')
    return bool(value)


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(part) for part in str(text).split(',') if part.strip()]


def _path(exp, manifest, name):
    manifest.files.append(name)
    return os.path.join(exp.out, name)


def _sweep(exp, fn, items):
    """Run fn over items on a pool of exp.threads workers; results keep input order."""
    with ThreadPoolExecutor(max_workers=exp.threads) as pool:
        return list(pool.map(fn, items))


def _new_manifest(exp):
    return RunManifest(
        command=exp.command, config=exp.echo(), seed=exp.seed,
        created_at=datetime.now(timezone.utc).isoformat(),
    )


@timed
def run_lewis(exp):
    """Solve and certify a Lewis basis; writes lewis.json."""
    manifest = _new_manifest(exp)
    p = _param(exp, 'p', float)
    basis_file = exp.params.get('basis')
    if basis_file:
        elements, extra = read_matrix_stack(basis_file)
        basis = SubspaceBasis(elements, p if p is not None else extra.get('p', 1.0))
    elif _flag(exp, 'diagonal'):
        basis = diagonal_subspace(_param(exp, 'k', int, 3), p if p is not None else 1.0)
    else:
        basis = random_subspace(_param(exp, 'k', int, 3), _param(exp, 'm', int, 4), p if p is not None else 1.0, exp.seed)

    cert = solve_lewis(basis, SolverConfig.from_experiment(exp))
    residuals = certify_lewis(cert, basis.p)
    manifest.record(residuals.worst <= exp.tol)

    if 'json' in exp.formats:
        data = cert.to_dict()
        data.update(residuals.as_dict())
        write_json(_path(exp, manifest, 'lewis.json'), data)
    return manifest


@timed
def run_embed(exp):
    """q-sweep of S_p -> S_q embeddings; writes embed.json, embed.csv, embed.svg."""
    manifest = _new_manifest(exp)
    p = _param(exp, 'p', float, 1.0)
    qs = _param(exp, 'q', _float_list, [2.0])
    for q in qs:
        is_valid, error = validate_exponent_pair(p, q)
        if not is_valid:
            raise InvalidExponents(error)
    k = _param(exp, 'k', int, 3)
    if _flag(exp, 'diagonal'):
        basis = diagonal_subspace(k, p)
    else:
        basis = random_subspace(k, _param(exp, 'm', int, 4), p, exp.seed)
    solver = SolverConfig.from_experiment(exp)

    def build(q):
        return build_embedding(basis, q, solver, eps=exp.eps, probes=exp.probes, seed=exp.seed)

    results = _sweep(exp, build, qs)
    reports = []
    for q, (emb, cert) in zip(qs, results):
        ok = cert.violations == 0 and cert.empirical_distortion <= cert.certified_bound * (1 + 1e-6)
        manifest.record(ok)
        row = cert.to_dict()
        row.update({'p': p, 'q': q, 'k': k, 'm': emb.m, 'seed': exp.seed})
        reports.append(row)

    if 'json' in exp.formats:
        write_json(_path(exp, manifest, 'embed.json'), {'reports': reports})
    if 'csv' in exp.formats:
        write_csv(_path(exp, manifest, 'embed.csv'), ['q', 'empirical_distortion', 'theorem_bound'],
                  [(r['q'], r['empirical_distortion'], r['theorem_bound']) for r in reports])
    if 'svg' in exp.formats:
        write_line_plot(
            _path(exp, manifest, 'embed.svg'),
            [('empirical', qs, [r['empirical_distortion'] for r in reports]),
             ('theorem bound', qs, [r['theorem_bound'] for r in reports])],
            title=f'S_{p:g} -> S_q distortion, k={k}', x_label='q', y_label='distortion',
        )
    return manifest


def _laakso_point(exp):
    def evaluate(k):
        canonical = laakso_canonical_chain(k, exp.scale_margin, exp.budget_edges, exp.max_points)
        return canonical.graph, markov_convexity_ratio(canonical.chain, canonical.f, canonical.metric)
    return evaluate


def _diamond_point(exp):
    def evaluate(k):
        g = diamond(k, exp.budget_edges)
        metric = shortest_path_metric(g, exp.max_points)
        ratio = diamond_convexity_ratio(PointMap.identity(g.n), g, metric)
        canonical = diamond_canonical_chain(k, exp.scale_margin, exp.budget_edges, exp.max_points)
        return g, ratio, markov_convexity_ratio(canonical.chain, canonical.f, canonical.metric)
    return evaluate


@timed
def run_convexity(exp):
    """Markov convexity of L_2..L_kmax and diamond convexity of D_2..D_kmax."""
    manifest = _new_manifest(exp)
    kmax = _param(exp, 'kmax', int, 4)
    kind = exp.params.get('kind') or 'both'
    if kind not in KINDS:
        raise UsageError(f"unknown kind '{kind}' (expected one of {list(KINDS)})")
    levels = list(range(2, kmax + 1))
    summary = {}

    if kind in ('laakso', 'both'):
        points = _sweep(exp, _laakso_point(exp), levels)
        rows = []
        for k, (g, report) in zip(levels, points):
            rows.append((k, g.n, report.lhs, report.rhs, report.pi2_lower, report.truncation_error_bound))
            manifest.record(report.truncation_error_bound <= TAIL_REL * report.lhs)
            write_edge_list(_path(exp, manifest, f'graphs/laakso_{k}.edges'), g)
            write_embedding(_path(exp, manifest, f'graphs/laakso_{k}.l1.json'), l1_embed(g))
        pi2 = [row[4] for row in rows]
        for previous, current in zip(pi2, pi2[1:]):
            manifest.record(current > previous)
        summary['laakso'] = [
            dict(zip(('k', 'n', 'lhs', 'rhs', 'pi2_lower', 'error_bound'), row)) for row in rows
        ]
        if 'csv' in exp.formats:
            write_csv(_path(exp, manifest, 'convexity_laakso.csv'),
                      ['k', 'n', 'lhs', 'rhs', 'pi2_lower', 'error_bound'], rows)
        if 'svg' in exp.formats:
            reference = pi2[0] / math.sqrt(levels[0]) if rows else 1.0
            write_line_plot(
                _path(exp, manifest, 'convexity.svg'),
                [('pi2_lower(L_k)', levels, pi2),
                 ('sqrt(k), scaled', levels, [reference * math.sqrt(k) for k in levels])],
                title='Markov 2-convexity of Laakso graphs', x_label='k', y_label='pi2_lower',
            )

    if kind in ('diamond', 'both'):
        points = _sweep(exp, _diamond_point(exp), levels)
        rows = []
        for k, (g, ratio, report) in zip(levels, points):
            rows.append((k, g.n, ratio.lhs, ratio.rhs, ratio.ratio, report.pi2_lower))
            write_edge_list(_path(exp, manifest, f'graphs/diamond_{k}.edges'), g)
            write_embedding(_path(exp, manifest, f'graphs/diamond_{k}.l1.json'), l1_embed(g))
        summary['diamond'] = [
            dict(zip(('k', 'n', 'delta2_lhs', 'delta2_rhs', 'delta2_ratio', 'pi2_lower'), row)) for row in rows
        ]
        if 'csv' in exp.formats:
            write_csv(_path(exp, manifest, 'convexity_diamond.csv'),
                      ['k', 'n', 'delta2_lhs', 'delta2_rhs', 'delta2_ratio', 'pi2_lower'], rows)

    if 'json' in exp.formats:
        write_json(_path(exp, manifest, 'convexity.json'), summary)
    return manifest


@timed
def run_certificate(exp):
    """Impossibility certificate for the l1 image of L_k; writes certificate.txt and .json."""
    manifest = _new_manifest(exp)
    k = _param(exp, 'k', int)
    if k is None:
        raise UsageError("certificate needs --k")
    alpha = _param(exp, 'alpha', float, 1.0)
    cert = impossibility_certificate(k, alpha, exp.scale_margin, exp.budget_edges, exp.max_points)
    manifest.record(math.isfinite(cert.log_dim_lower_bound))

    lines = [
        f"Laakso level k = {k}, image size n = {cert.n}",
        f"certified Markov 2-convexity lower bound pi = {cert.pi2_lower:.12g}",
        f"truncation remainder = {cert.convexity.truncation_error_bound:.6g}",
        f"constant C = {cert.constant:.12g}",
        cert.statement(),
    ]
    write_text(_path(exp, manifest, 'certificate.txt'), '\n'.join(lines) + '\n')
    if 'json' in exp.formats:
        write_json(_path(exp, manifest, 'certificate.json'), cert.to_dict())
    return manifest


def _experiment(command, args, extra):
    base = get_config(args.env)
    configure_logging(base)
    file_values = read_config_file(args.config) if args.config else {}
    flags = {
        'seed': args.seed, 'tol': args.tol, 'max_iters': args.max_iters, 'probes': args.probes,
        'scale_margin': args.scale_margin, 'budget_edges': args.budget_edges, 'out': args.out,
        'formats': tuple(args.format) if args.format else None,
        'no_timestamp': args.no_timestamp,
    }
    flags.update(extra)
    return ExperimentConfig.from_sources(command, base, file_values, flags)


def _finish(exp, manifest):
    write_json(os.path.join(exp.out, f'manifest_{exp.command}.json'), manifest.to_dict(exp.no_timestamp))
    failed = manifest.checks['failed']
    if failed:
        raise ChecksFailed(f"{exp.command}: {failed} check(s) failed")
    return 0


@cli_command
def cmd_lewis(args):
    exp = _experiment('lewis', args, {
        'basis': args.basis, 'k': args.k, 'm': args.m, 'p': args.p,
        'diagonal': args.diagonal, 'mode': args.mode,
    })
    return _finish(exp, run_lewis(exp))


@cli_command
def cmd_embed(args):
    exp = _experiment('embed', args, {
        'p': args.p, 'q': args.q, 'k': args.k, 'm': args.m, 'diagonal': args.diagonal, 'mode': args.mode,
    })
    return _finish(exp, run_embed(exp))


@cli_command
def cmd_convexity(args):
    exp = _experiment('convexity', args, {'kmax': args.kmax, 'kind': args.kind})
    return _finish(exp, run_convexity(exp))


@cli_command
def cmd_certificate(args):
    exp = _experiment('certificate', args, {'k': args.k, 'alpha': args.alpha})
    return _finish(exp, run_certificate(exp))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int)
    common.add_argument('--tol', type=float)
    common.add_argument('--out')
    common.add_argument('--format', action='append', choices=FORMATS,
                        help='output format; repeat for several (default: all)')
    common.add_argument('--budget-edges', type=int)
    common.add_argument('--no-timestamp', action='store_true', default=None)
    common.add_argument('--config', help='key=value configuration file')
    common.add_argument('--env', choices=('development', 'production', 'testing', 'default'))
    common.add_argument('--probes', type=int)
    common.add_argument('--scale-margin', type=int)
    common.add_argument('--max-iters', type=int)

    parser = argparse.ArgumentParser(prog='geolab', description='Schatten-class embeddings and Markov convexity')
    parser.add_argument('--version', action='version', version=f'geolab {VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)

    lewis = sub.add_parser('lewis', parents=[common], help='solve and certify a Lewis basis')
    lewis.add_argument('--basis', help='basis file (text blocks or JSON matrix list)')
    lewis.add_argument('--k', type=int)
    lewis.add_argument('--m', type=int)
    lewis.add_argument('--p', type=float)
    lewis.add_argument('--diagonal', action='store_true', default=None)
    lewis.add_argument('--mode', choices=MODES)
    lewis.set_defaults(handler=cmd_lewis)

    embed = sub.add_parser('embed', parents=[common], help='embed a subspace of S_p into S_q')
    embed.add_argument('--p', type=float)
    embed.add_argument('--q', help='comma-separated list of target exponents')
    embed.add_argument('--k', type=int)
    embed.add_argument('--m', type=int)
    embed.add_argument('--diagonal', action='store_true', default=None)
    embed.add_argument('--mode', choices=MODES)
    embed.set_defaults(handler=cmd_embed)

    convexity = sub.add_parser('convexity', parents=[common], help='Markov and diamond convexity sweeps')
    convexity.add_argument('--kmax', type=int)
    convexity.add_argument('--kind', choices=KINDS)
    convexity.set_defaults(handler=cmd_convexity)

    certificate = sub.add_parser('certificate', parents=[common], help='dimension reduction impossibility certificate')
    certificate.add_argument('--k', type=int, required=True)
    certificate.add_argument('--alpha', type=float)
    certificate.set_defaults(handler=cmd_certificate)
    return parser


def main(argv=None):
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    return args.handler(args)
