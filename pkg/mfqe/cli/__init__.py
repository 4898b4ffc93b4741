# Command-line interface module

from .parser import (
    EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, COMMANDS, Cli_Parser, UsageError, build_parser,
)
from .commands import COMMAND_HANDLERS, cli_dispatch, load_run_config

__all__ = [
    'EXIT_OK', 'EXIT_VALIDATION', 'EXIT_RUNTIME', 'COMMANDS', 'Cli_Parser', 'UsageError',
    'build_parser', 'COMMAND_HANDLERS', 'cli_dispatch', 'load_run_config',
]
