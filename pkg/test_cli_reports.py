"""
End-to-end tests for the geolab command line
"""
import csv
import json
import os
from types import SimpleNamespace

import jsonschema
import pytest

from cli_reports import RunManifest, _finish, main
from middleware import cli_command

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'schemas')


def run(command, out, *extra):
    return main([command, '--env', 'testing', '--out', str(out), *extra])


def load(path):
    with open(path, encoding='utf-8') as fh:
        return json.load(fh)


def assert_valid(path, schema_name):
    jsonschema.validate(load(path), load(os.path.join(SCHEMA_DIR, schema_name)))


def read_rows(path):
    with open(path, newline='', encoding='utf-8') as fh:
        return list(csv.reader(fh))


def test_lewis_diagonal(tmp_path):
    assert run('lewis', tmp_path, '--diagonal', '--k', '3', '--p', '1', '--tol', '1e-11') == 0
    report = load(tmp_path / 'lewis.json')
    assert report['gram_residual'] <= 1e-10
    assert report['trace_residual'] <= 1e-10
    assert_valid(tmp_path / 'lewis.json', 'lewis.schema.json')
    manifest = load(tmp_path / 'manifest_lewis.json')
    assert manifest['files'] == ['lewis.json']
    assert manifest['checks'] == {'passed': 1, 'failed': 0}
    assert_valid(tmp_path / 'manifest_lewis.json', 'manifest.schema.json')


def test_lewis_from_basis_file(tmp_path):
    basis = tmp_path / 'basis.txt'
    basis.write_text("2 2\n1 0\n0 0\n2 2\n0 0\n0 1\n")
    assert run('lewis', tmp_path / 'out', '--basis', str(basis), '--p', '1.5') == 0
    report = load(tmp_path / 'out' / 'lewis.json')
    assert (report['k'], report['m'], report['p']) == (2, 2, 1.5)


def test_lewis_rejects_zero_exponent(tmp_path, capsys):
    assert run('lewis', tmp_path, '--p', '0') == 2
    assert 'InvalidExponent' in capsys.readouterr().err


def test_runs_are_byte_identical(tmp_path):
    for name in ('a', 'b'):
        assert run('lewis', tmp_path / name, '--seed', '4', '--no-timestamp') == 0
    for filename in ('lewis.json', 'manifest_lewis.json'):
        assert (tmp_path / 'a' / filename).read_bytes() == (tmp_path / 'b' / filename).read_bytes()


def test_no_timestamp_omits_run_fields(tmp_path):
    run('lewis', tmp_path / 'plain', '--diagonal')
    run('lewis', tmp_path / 'fixed', '--diagonal', '--no-timestamp')
    assert {'created_at', 'wall_time_s'} <= set(load(tmp_path / 'plain' / 'manifest_lewis.json'))
    assert not {'created_at', 'wall_time_s'} & set(load(tmp_path / 'fixed' / 'manifest_lewis.json'))


def test_embed_sweep(tmp_path):
    assert run('embed', tmp_path, '--p', '1', '--q', '1.5,2', '--k', '2', '--m', '3', '--probes', '200') == 0
    assert_valid(tmp_path / 'embed.json', 'embed.schema.json')
    rows = read_rows(tmp_path / 'embed.csv')
    assert rows[0] == ['q', 'empirical_distortion', 'theorem_bound']
    assert [float(row[0]) for row in rows[1:]] == [1.5, 2.0]
    assert '<svg' in (tmp_path / 'embed.svg').read_text()
    manifest = load(tmp_path / 'manifest_embed.json')
    assert manifest['files'] == ['embed.json', 'embed.csv', 'embed.svg']


def test_embed_rank_one_is_isometric(tmp_path):
    assert run('embed', tmp_path, '--k', '1', '--q', '2', '--probes', '50', '--format', 'json') == 0
    report = load(tmp_path / 'embed.json')['reports'][0]
    assert report['empirical_distortion'] == pytest.approx(1.0, abs=1e-9)
    assert not (tmp_path / 'embed.csv').exists()


def test_embed_rejects_q_not_above_p(tmp_path, capsys):
    assert run('embed', tmp_path, '--p', '2', '--q', '1.5') == 2
    assert 'InvalidExponents' in capsys.readouterr().err


def test_convexity_sweep(tmp_path):
    assert run('convexity', tmp_path, '--kmax', '3') == 0
    assert_valid(tmp_path / 'convexity.json', 'convexity.schema.json')
    summary = load(tmp_path / 'convexity.json')
    assert [row['n'] for row in summary['laakso']] == [6, 30]
    assert summary['laakso'][0]['pi2_lower'] < summary['laakso'][1]['pi2_lower']
    assert summary['diamond'][0]['delta2_ratio'] == 1.0
    assert (tmp_path / 'graphs' / 'laakso_3.edges').exists()
    manifest = load(tmp_path / 'manifest_convexity.json')
    assert manifest['checks']['failed'] == 0
    assert 'graphs/diamond_2.edges' in manifest['files']
    assert 'graphs/laakso_3.l1.json' in manifest['files']
    assert all((tmp_path / name).exists() for name in manifest['files'])


def test_convexity_below_level_two_is_empty(tmp_path):
    assert run('convexity', tmp_path, '--kmax', '1') == 0
    assert read_rows(tmp_path / 'convexity_laakso.csv') == [['k', 'n', 'lhs', 'rhs', 'pi2_lower', 'error_bound']]
    assert len(read_rows(tmp_path / 'convexity_diamond.csv')) == 1


def test_convexity_rejects_unknown_kind(tmp_path):
    assert run('convexity', tmp_path, '--kind', 'hexagon') == 2


def test_certificate_requires_level(tmp_path):
    assert run('certificate', tmp_path) == 2


def test_certificate(tmp_path):
    assert run('certificate', tmp_path, '--k', '3', '--alpha', '2') == 0
    assert_valid(tmp_path / 'certificate.json', 'certificate.schema.json')
    text = (tmp_path / 'certificate.txt').read_text()
    assert 'n = 30' in text
    assert 'dim X >= exp(' in text
    assert load(tmp_path / 'manifest_certificate.json')['files'] == ['certificate.txt', 'certificate.json']


def test_config_file_layers_under_flags(tmp_path):
    config_file = tmp_path / 'run.env'
    config_file.write_text("seed=9\nprobes=123\n")
    assert run('lewis', tmp_path, '--diagonal', '--config', str(config_file), '--seed', '5') == 0
    config = load(tmp_path / 'manifest_lewis.json')['config']
    assert (config['seed'], config['probes']) == (5, 123)


def test_missing_config_file(tmp_path):
    assert run('lewis', tmp_path, '--config', str(tmp_path / 'absent.env')) == 2


def test_failed_checks_exit_one(tmp_path, capsys):
    exp = SimpleNamespace(out=str(tmp_path), command='lewis', no_timestamp=True)
    manifest = RunManifest(command='lewis', config={}, seed=0)
    manifest.record(True)
    manifest.record(False)
    assert cli_command(_finish)(exp, manifest) == 1
    assert 'ChecksFailed: lewis: 1 check(s) failed' in capsys.readouterr().err
    assert load(tmp_path / 'manifest_lewis.json')['checks'] == {'passed': 1, 'failed': 1}
