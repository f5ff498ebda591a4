"""
Command wrappers: error-to-exit-code mapping and timing
"""
import logging
import sys
import time
from functools import wraps

from errors import GeolabError

logger = logging.getLogger('geolab.cli')


def cli_command(f):
    """Decorator for CLI commands: returns an exit code instead of raising"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            result = f(*args, **kwargs)
        except GeolabError as e:
            logger.error(f"{f.__name__} failed: {e}")
            print(str(e), file=sys.stderr)
            return e.exit_code
        except Exception as e:
            logger.error(f"{f.__name__} crashed: {str(e)}", exc_info=True)
            print(f"InternalError: {e}", file=sys.stderr)
            return 1
        return 0 if result is None else result
    return decorated_function


def timed(f):
    """Decorator that stores the wall time of a manifest-producing call on the manifest"""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        start = time.perf_counter()
        manifest = f(*args, **kwargs)
        elapsed = time.perf_counter() - start
        if manifest is not None:
            manifest.wall_time_s = elapsed
        logger.info(f"{f.__name__} finished in {elapsed:.3f}s")
        return manifest
    return decorated_function
