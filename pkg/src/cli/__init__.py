"""
Command-line driver: configuration layering, the subcommands and the
reproduction of the worked examples.
"""

from .commands import cmd_asymptotic, cmd_check, cmd_curve, cmd_hier_check
from .config import RunConfig, load_config_file, parse_set, resolve
from .reproduce import EXAMPLES, cmd_reproduce

__all__ = [
    'RunConfig', 'load_config_file', 'parse_set', 'resolve',
    'cmd_check', 'cmd_hier_check', 'cmd_curve', 'cmd_asymptotic', 'cmd_reproduce', 'EXAMPLES',
]
