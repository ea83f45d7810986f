import functools
import uuid

import click
from pydantic import ValidationError

from src.core.ctx_vars import run_id_ctx_var
from src.core.exceptions import CannError
from src.core.logger import logger


def run_command(func):
    """Tag the command's log records with a run id and turn service errors into click errors."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        token = run_id_ctx_var.set(f"{ctx.info_name}-{uuid.uuid4().hex[:8]}")
        logger.info(f"Start command {ctx.info_name}")
        try:
            result = func(*args, **kwargs)
            logger.info(f"End command {ctx.info_name}")
            return result
        except ValidationError as e:
            raise click.UsageError(str(e), ctx=ctx) from e
        except CannError as e:
            logger.info(f"Command failed with {type(e).__name__}: {e}")
            raise click.ClickException(str(e)) from e
        finally:
            run_id_ctx_var.reset(token)

    return wrapper
