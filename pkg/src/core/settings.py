from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # general
    ROOT_DIR: Path = Field(
        default=Path(__file__).resolve().parents[2], description="Project root directory"
    )

    # logging
    LOG_DIR: Path = Field(
        default_factory=lambda: Path.cwd() / "logs", description="Directory for log files"
    )
    LOG_BACKUP_COUNT: int = Field(default=7, description="Number of log backups to keep")
    LOG_CONFIG: str = Field(default="logging.ini", description="Logging config file name")

    # experiment hyperparameters come from command flags only
    model_config = SettingsConfigDict(env_file=".env", env_prefix="CANN_", case_sensitive=True)


# create a single, ready-to-use settings instance
settings = Settings()
