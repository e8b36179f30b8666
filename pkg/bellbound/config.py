import os

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    log_level: str = "INFO"
    threads: int = os.cpu_count() or 1
    seed: int = 0

    # "local" runs restarts/trials in a process pool, "celery" dispatches them to workers
    executor: str = "local"
    celery_broker_url: str = "redis://localhost:6379/0"
    celery_result_backend: str = "redis://localhost:6379/0"
    celery_always_eager: bool = False

    seesaw_restarts: int = 50
    seesaw_sweeps_max: int = 500
    seesaw_improvement_tol: float = 1e-9
    sweep_restarts: int = 10

    bruteforce_max_candidates: int = 10**8
    verify_vertex_limit: int = 10**6

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="BELLBOUND_",
        case_sensitive=False,
        extra="ignore"
    )


settings = Settings()
