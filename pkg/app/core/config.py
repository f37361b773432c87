from typing import Optional
from pydantic_settings import BaseSettings
from functools import lru_cache

class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = "Mapping Class Growth Toolkit"
    VERSION: str = "0.1.0"
    DEBUG: bool = False

    # Logging
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = True
    LOG_LEVEL: str = "INFO"

    # Ball cache (MCG_CACHE_DIR); disabled when unset
    CACHE_DIR: Optional[str] = None

    # Farey graph
    DISTANCE_CAP: int = 1000
    BRUTE_FORCE_BOX: int = 30

    # Twist ping-pong
    SAMPLE_BOX: int = 5

    # Free subgroup certification
    MAX_POWER: int = 32
    ORACLE_DEPTH: int = 10
    PRECISION_LADDER_MAX: int = 64

    # Growth and random walks
    BALL_CAP: int = 10_000_000
    WALK_STATE_CAP: int = 2_000_000
    MC_BATCH_SIZE: int = 10_000
    SEED: int = 0

    class Config:
        env_file = ".env"
        env_prefix = "MCG_"

@lru_cache()
def get_settings() -> Settings:
    return Settings()
