from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_prefix="NLOS_SSL_", extra="ignore")

    # Output
    output_dir: Path = Path("results")
    write_html_report: bool = True
    log_level: str = "INFO"

    # Execution
    threads: int = 1
    frame_budget_ms: float = 200.0

    # Geometry
    wedge_threshold_deg: float = 170.0
    self_intersection_eps: float = 1e-4
    bvh_leaf_size: int = 4


settings = Settings()
