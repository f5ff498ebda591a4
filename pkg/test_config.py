"""
Tests for configuration layering, validators and the command wrappers
"""
import math

import numpy as np
import pytest

from config import Config, ExperimentConfig, get_config, read_config_file
from errors import InvalidExponent, NoConvergence, TooLarge, UsageError
from middleware import cli_command, timed
from validators import (
    validate_exponent, validate_exponent_pair, validate_level, validate_positive_int,
    validate_probability_vector, validate_stochastic_matrix, validate_symmetric_psd, validate_tolerance,
)


def test_get_config_by_name():
    assert get_config('testing').TESTING
    with pytest.raises(UsageError):
        get_config('staging')


def test_defaults_come_from_base():
    exp = ExperimentConfig.from_sources('lewis', get_config('testing'))
    assert exp.probes == 2000
    assert exp.scale_margin == Config.SCALE_MARGIN
    assert exp.formats == ('json', 'csv', 'svg')


def test_flags_override_file(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text("SEED=3\nbudget-edges=500\nkmax=5\n")
    file_values = read_config_file(str(path))
    assert file_values == {'seed': '3', 'budget_edges': '500', 'kmax': '5'}
    exp = ExperimentConfig.from_sources('convexity', Config, file_values, {'seed': 8, 'tol': None})
    assert (exp.seed, exp.budget_edges, exp.tol) == (8, 500, Config.TOL)
    assert exp.params == {'kmax': '5'}


def test_format_string_is_split():
    exp = ExperimentConfig.from_sources('embed', Config, {'formats': 'json, csv'})
    assert exp.formats == ('json', 'csv')


@pytest.mark.parametrize('values, error', [
    ({'probes': '0'}, UsageError),
    ({'tol': '-1'}, UsageError),
    ({'eps': '1.5'}, InvalidExponent),
    ({'formats': 'json,pdf'}, UsageError),
    ({'seed': 'abc'}, UsageError),
])
def test_invalid_values_rejected(values, error):
    with pytest.raises(error):
        ExperimentConfig.from_sources('lewis', Config, values)


def test_echo_sorts_params_and_drops_output():
    exp = ExperimentConfig.from_sources('embed', Config, flags={'q': '2', 'p': '1', 'out': '/tmp/x'})
    echo = exp.echo()
    assert list(echo['params']) == ['p', 'q']
    assert 'out' not in echo


def test_validate_exponent():
    assert validate_exponent(1.5)[0]
    assert validate_exponent(math.inf)[0]
    assert not validate_exponent(0)[0]
    assert not validate_exponent(float('nan'))[0]
    assert not validate_exponent(2.5, high=2.0)[0]
    assert validate_exponent(1.0, low=1.0, low_inclusive=True)[0]


def test_validate_exponent_pair():
    assert validate_exponent_pair(1, 2) == (True, "")
    assert not validate_exponent_pair(2, 2)[0]
    assert not validate_exponent_pair(0.5, 2)[0]


def test_validate_matrices():
    assert validate_symmetric_psd(np.diag([1.0, 0.0]))[0]
    assert not validate_symmetric_psd(np.array([[0.0, 1.0], [0.0, 0.0]]))[0]
    assert validate_stochastic_matrix(np.array([[0.5, 0.5], [0.0, 1.0]]))[0]
    assert not validate_stochastic_matrix(np.array([[1.5, -0.5], [0.0, 1.0]]))[0]
    assert not validate_probability_vector([0.5, 0.4])[0]


def test_validate_integers():
    assert validate_level(2, minimum=2)[0]
    assert not validate_level(True)[0]
    assert not validate_level(0)[0]
    assert not validate_positive_int(2.0)[0]
    assert not validate_tolerance(float('inf'))[0]


def test_cli_command_maps_errors_to_exit_codes(capsys):
    @cli_command
    def raises(error):
        raise error

    assert raises(UsageError('bad flag')) == 2
    assert raises(TooLarge('too many edges')) == 3
    assert raises(NoConvergence('stuck')) == 1
    assert raises(ValueError('boom')) == 1
    err = capsys.readouterr().err
    assert 'UsageError: bad flag' in err
    assert 'InternalError: boom' in err


def test_timed_sets_wall_time():
    class Manifest:
        wall_time_s = None

    @timed
    def work():
        return Manifest()

    assert work().wall_time_s >= 0
