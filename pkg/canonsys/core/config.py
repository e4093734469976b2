import os
from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Compute absolute path to .env
BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "../../"))
DOTENV_PATH = os.path.join(BASE_DIR, ".env")

# Load .env manually so pytest and the CLI see the same values
load_dotenv(DOTENV_PATH)


class Settings(BaseSettings):
    """
    Numerical defaults loaded from environment variables or the .env file.
    Every field can be overridden with a CANONSYS_ prefixed variable; library
    calls fall back to these values when a keyword argument is left as None.
    """

    model_config = SettingsConfigDict(
        env_file=DOTENV_PATH,
        env_file_encoding="utf-8",
        env_prefix="CANONSYS_",
        extra="ignore",
    )

    ode_tol: float = Field(1e-10, gt=0, description="Local relative error per step")
    disc_tol: float = Field(1e-8, gt=0, description="Accepted Weyl disc radius")
    t_max: float = Field(1e6, gt=0, description="Integration horizon")
    t0: float = Field(1e-3, gt=0, description="Anchor of the checkpoint schedule")
    seed_mass: float = Field(
        1e-10, gt=0, description="Primitive size at the first-order seed"
    )
    quad_rel_tol: float = Field(1e-10, gt=0)
    inverse_rel_tol: float = Field(1e-12, gt=0)
    kummer_max_terms: int = Field(10000, gt=0)

    # grid fan-out
    max_concurrency: int = Field(4, ge=1)
    retry_attempts: int = Field(3, ge=1)
    horizon_growth: float = Field(100.0, gt=1)

    log_level: str = "WARNING"


settings = Settings()
