import warnings
from pathlib import Path
from typing import Literal

from pydantic import HttpUrl, computed_field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing_extensions import Self

INTEL_DATA_FILE = "data.txt"
INTEL_LOCATIONS_FILE = "mote_locs.txt"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        # Use top level .env file (one level above ./backend/)
        env_file="../.env",
        env_ignore_empty=True,
        extra="ignore",
    )
    PROJECT_NAME: str = "qsensor-fusion"
    ENVIRONMENT: Literal["local", "staging", "production"] = "local"
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    DATA_DIR: Path = Path("data/intel")
    OUTPUT_DIR: Path = Path("results")

    DEFAULT_SEED: int = 42
    DEFAULT_TRIALS: int = 10_000
    WORKERS: int = 1

    SENTRY_DSN: HttpUrl | None = None

    INTEL_DATA_URL: HttpUrl = HttpUrl("http://db.csail.mit.edu/labdata/data.txt.gz")
    INTEL_LOCATIONS_URL: HttpUrl = HttpUrl(
        "http://db.csail.mit.edu/labdata/mote_locs.txt"
    )
    INTEL_DATA_SHA256: str | None = None
    INTEL_LOCATIONS_SHA256: str | None = None
    FETCH_MAX_TRIES: int = 5
    FETCH_WAIT_SECONDS: float = 2.0

    @computed_field  # type: ignore[prop-decorator]
    @property
    def intel_data_path(self) -> Path:
        return self.DATA_DIR / INTEL_DATA_FILE

    @computed_field  # type: ignore[prop-decorator]
    @property
    def intel_locations_path(self) -> Path:
        return self.DATA_DIR / INTEL_LOCATIONS_FILE

    @computed_field  # type: ignore[prop-decorator]
    @property
    def error_reporting_enabled(self) -> bool:
        return bool(self.SENTRY_DSN and self.ENVIRONMENT != "local")

    def _check_positive(self, var_name: str, value: float) -> None:
        if value <= 0:
            message = f"The value of {var_name} must be positive, got {value}."
            if self.ENVIRONMENT == "local":
                warnings.warn(message, stacklevel=1)
            else:
                raise ValueError(message)

    @model_validator(mode="after")
    def _enforce_positive_budgets(self) -> Self:
        self._check_positive("DEFAULT_TRIALS", self.DEFAULT_TRIALS)
        self._check_positive("WORKERS", self.WORKERS)
        self._check_positive("FETCH_MAX_TRIES", self.FETCH_MAX_TRIES)

        return self


settings = Settings()
