"""
Application Configuration
"""
import os
from dataclasses import dataclass, field, fields
from dotenv import load_dotenv, dotenv_values

from errors import InvalidExponent, UsageError
from validators import validate_positive_int, validate_tolerance

# Load environment variables from .env file
load_dotenv()

VERSION = '0.1.0'


class Config:
    """Base configuration"""

    # Numerics
    SEED = int(os.getenv('GEOLAB_SEED', 0))
    TOL = float(os.getenv('GEOLAB_TOL', 1e-8))
    MAX_ITERS = int(os.getenv('GEOLAB_MAX_ITERS', 10000))
    PROBES = int(os.getenv('GEOLAB_PROBES', 10000))
    TRUNCATION_EPS = float(os.getenv('GEOLAB_EPS', 0.01))
    SCALE_MARGIN = int(os.getenv('GEOLAB_SCALE_MARGIN', 10))

    # Resource budgets
    BUDGET_EDGES = int(os.getenv('GEOLAB_BUDGET_EDGES', 1000000))
    MAX_POINTS = int(os.getenv('GEOLAB_MAX_POINTS', 5000))
    THREADS = max(1, int(os.getenv('GEOLAB_THREADS', 1)))

    # Output
    OUTPUT_DIR = os.getenv('GEOLAB_OUT', 'results')

    DEBUG = os.getenv('GEOLAB_ENV') == 'development'
    TESTING = os.getenv('GEOLAB_ENV') == 'testing'

    # Logging
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('LOG_FILE', 'logs/geolab.log')


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False
    TESTING = False


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    DEBUG = True
    PROBES = 2000
    MAX_ITERS = 5000


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': ProductionConfig
}


def get_config(env=None):
    """Resolve a configuration class by name, falling back to GEOLAB_ENV."""
    name = env or os.getenv('GEOLAB_ENV', 'default')
    if name not in config:
        raise UsageError(f"unknown environment '{name}' (expected one of {sorted(config)})")
    return config[name]


def read_config_file(path):
    """
    Parse a key=value configuration file.

    Keys are case-insensitive and may use dashes or underscores
    (``budget-edges`` and ``BUDGET_EDGES`` name the same field).

    Returns:
        dict: normalized key -> raw string value
    """
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    values = dotenv_values(path)
    return {key.strip().lower().replace('-', '_'): value for key, value in values.items() if value is not None}


@dataclass
class ExperimentConfig:
    """Parameters of one CLI invocation: defaults < config file < flags."""

    command: str
    seed: int = 0
    tol: float = 1e-8
    max_iters: int = 10000
    probes: int = 10000
    eps: float = 0.01
    scale_margin: int = 10
    budget_edges: int = 1000000
    max_points: int = 5000
    threads: int = 1
    out: str = 'results'
    formats: tuple = ('json', 'csv', 'svg')
    no_timestamp: bool = False
    params: dict = field(default_factory=dict)

    _BASE_FIELDS = {
        'seed': 'SEED', 'tol': 'TOL', 'max_iters': 'MAX_ITERS', 'probes': 'PROBES',
        'eps': 'TRUNCATION_EPS', 'scale_margin': 'SCALE_MARGIN', 'budget_edges': 'BUDGET_EDGES',
        'max_points': 'MAX_POINTS', 'threads': 'THREADS', 'out': 'OUTPUT_DIR',
    }

    @classmethod
    def from_sources(cls, command, base=Config, file_values=None, flags=None):
        """
        Layer configuration sources.

        Args:
            command: CLI command name
            base: Config class supplying defaults
            file_values: mapping parsed from a key=value file
            flags: mapping of explicitly given command-line flags (None values ignored)
        """
        known = {f.name: f for f in fields(cls) if f.name not in ('command', 'params')}
        merged = {name: getattr(base, attr) for name, attr in cls._BASE_FIELDS.items()}
        params = {}
        for source in (file_values or {}, flags or {}):
            for key, value in source.items():
                if value is None:
                    continue
                if key in known:
                    merged[key] = value
                else:
                    params[key] = value

        exp = cls(command=command, params=params)
        for key, value in merged.items():
            setattr(exp, key, _coerce(key, value, known[key].type))
        exp.validate()
        return exp

    def validate(self):
        for name in ('max_iters', 'probes', 'budget_edges', 'max_points', 'threads'):
            is_valid, error = validate_positive_int(getattr(self, name), name)
            if not is_valid:
                raise UsageError(error)
        is_valid, error = validate_tolerance(self.tol)
        if not is_valid:
            raise UsageError(error)
        if not 0 < self.eps < 1:
            raise InvalidExponent(f"eps must lie in (0,1), got {self.eps}")
        if self.scale_margin < 0:
            raise UsageError(f"scale_margin must be >= 0, got {self.scale_margin}")
        unknown = set(self.formats) - {'json', 'csv', 'svg'}
        if unknown:
            raise UsageError(f"unknown output format(s): {sorted(unknown)}")

    def echo(self):
        """Config echo for the run manifest (output location excluded)."""
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ('out', 'no_timestamp')}
        data['formats'] = list(self.formats)
        data['params'] = {key: self.params[key] for key in sorted(self.params)}
        return data


def _coerce(key, value, annotation):
    if annotation in ('int', int):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise UsageError(f"{key} must be an integer, got {value!r}")
    if annotation in ('float', float):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise UsageError(f"{key} must be a number, got {value!r}")
    if annotation in ('bool', bool):
        if isinstance(value, str):
            return value.strip().lower() in ('1', 'true', 'yes', 'on')
        return bool(value)
    if annotation in ('tuple', tuple):
        if isinstance(value, str):
            return tuple(part.strip() for part in value.split(',') if part.strip())
        return tuple(value)
    return value
