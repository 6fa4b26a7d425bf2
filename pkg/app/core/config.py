from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    # Load settings from the environment or a .env file, e.g. RHGT_MAX_AREA=10
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", env_prefix="RHGT_", extra="ignore")

    # Ball enumeration and truncation
    MAX_BALL_VERTICES: int = 250_000
    SUBGROUP_ENUM_CAP: int = 64
    OMEGA_BFS_CAP: int = 20_000

    # Filling search
    DEFAULT_MAX_AREA: int = 8
    MAX_SEARCH_STATES: int = 200_000
    DEHN_UNBOUNDED_THRESHOLD: int = 6

    # Bounded searches and sampled scans
    DEFAULT_RADIUS: int = 3
    DEFAULT_SEED: int = 0

    # Logging
    LOG_ENV: str = "prod"
    LOG_TO_FILE: bool = False
    LOG_DIR: str = "logs"

    # Regression baselines
    BASELINE_DIR: str = ".baselines"

    # HTTP API
    API_HOST: str = "127.0.0.1"
    API_PORT: int = 8005
    # API Security (unset disables the check)
    API_KEY: str | None = None

# Create a single settings instance to be used across the application
settings = Settings()
