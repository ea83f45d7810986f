import logging
import logging.config
import multiprocessing
import os

from .ctx_vars import run_id_ctx_var
from .settings import settings


# Custom logging filter to add the run id from context
class RunIdFilter(logging.Filter):
    def filter(self, record):
        record.run_id = run_id_ctx_var.get()
        return True


run_id_filter = RunIdFilter()

os.makedirs(os.path.join(settings.LOG_DIR), exist_ok=True)
os.makedirs(os.path.join(settings.LOG_DIR, "training"), exist_ok=True)

# Load logging configuration from ini file
logging.config.fileConfig(
    os.path.join(settings.ROOT_DIR, settings.LOG_CONFIG),
    defaults={
        "log_dir": settings.LOG_DIR.as_posix(),
        "log_backup_count": str(settings.LOG_BACKUP_COUNT),
    },
    disable_existing_loggers=False,
)

logger = logging.getLogger()
training_logger = logging.getLogger("training")

for _handler in [
    *logger.handlers,
    *training_logger.handlers,
]:
    _handler.addFilter(run_id_filter)


def detach_file_handlers() -> None:
    """In a worker process, stop writing the log files; the parent process owns them."""
    if multiprocessing.parent_process() is None:
        return
    for log in (logger, training_logger):
        for handler in list(log.handlers):
            if isinstance(handler, logging.FileHandler):
                log.removeHandler(handler)
                handler.close()
