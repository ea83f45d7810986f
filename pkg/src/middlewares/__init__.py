from .command_context import run_command
