from .commands import COMMANDS, CommandResult, parse_initial_point
from .main import build_parser, main, run

__all__ = [
    "COMMANDS",
    "CommandResult",
    "build_parser",
    "main",
    "parse_initial_point",
    "run",
]
