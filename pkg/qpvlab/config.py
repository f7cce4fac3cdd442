"""Environment-driven settings.

Values are read from the process environment (a ``.env`` file in the working
directory is loaded first). ``get_settings()`` re-reads the environment on each
call so a changed ``QPVLAB_DIM_CAP`` takes effect immediately.
"""

import os
from typing import Dict

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

from qpvlab import __version__
from qpvlab.errors import ConfigError

load_dotenv()

_ENV_FIELDS: Dict[str, str] = {
    "dim_cap": "QPVLAB_DIM_CAP",
    "rank_tol": "QPVLAB_RANK_TOL",
    "verdict_tol": "QPVLAB_VERDICT_TOL",
    "log_level": "LOG_LEVEL",
    "log_dir": "LOG_DIR",
    "log_to_file": "QPVLAB_LOG_TO_FILE",
    "version": "QPVLAB_VERSION",
}


class Settings(BaseModel):
    """Resolved runtime settings.

    Attributes:
        dim_cap: Largest register dimension (and eigen/SVD operand side) accepted
        rank_tol: Eigenvalue threshold used for every rank decision
        verdict_tol: Tolerance of hidden-measurement verdicts
        log_level: Root logging level name
        log_dir: Directory receiving rotating log files
        log_to_file: Whether file handlers are attached by ``setup_logging``
        version: Tool version embedded in reports
    """
    dim_cap: int = Field(64, ge=2, description="Register dimension cap")
    rank_tol: float = Field(1e-10, gt=0, description="Eigen/SVD rank tolerance")
    verdict_tol: float = Field(1e-9, gt=0, description="Hidden-measurement verdict tolerance")
    log_level: str = Field("INFO", description="Logging level")
    log_dir: str = Field("logs", description="Log directory")
    log_to_file: bool = Field(False, description="Attach rotating file handlers")
    version: str = Field(__version__, description="Tool version")


def get_settings() -> Settings:
    """Build settings from the current environment.

    Raises:
        ConfigError: if any variable fails validation; the message lists all of them
    """
    raw = {
        field: os.getenv(env_name)
        for field, env_name in _ENV_FIELDS.items()
        if os.getenv(env_name)
    }
    try:
        return Settings(**raw)
    except ValidationError as e:
        problems = [
            f"{_ENV_FIELDS[str(err['loc'][0])]}={raw.get(str(err['loc'][0]))!r} ({err['msg']})"
            for err in e.errors()
        ]
        raise ConfigError("invalid environment: " + "; ".join(problems)) from e
