from __future__ import annotations

import re
from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from qubo_approx.errors import ConfigError


def _split_csv(value: str | None) -> list[str]:
    """Split comma/space-separated env strings into a clean list."""
    if value is None:
        return []
    s = str(value).strip()
    if not s:
        return []
    parts = re.split(r"[\s,]+", s)
    return [p for p in (p.strip() for p in parts) if p]


def parse_chimera(value: str) -> tuple[int, int, int]:
    """Parse an ``RxCxS`` chimera shape (e.g. ``16x16x4``)."""
    parts = [p for p in re.split(r"[xX×]", str(value).strip()) if p]
    if len(parts) != 3:
        raise ConfigError(f"Chimera shape must look like RxCxS, got {value!r}")
    try:
        rows, cols, shore = (int(p) for p in parts)
    except ValueError as e:
        raise ConfigError(f"Chimera shape must be integers, got {value!r}") from e
    if min(rows, cols, shore) < 1:
        raise ConfigError(f"Chimera dimensions must be >= 1, got {value!r}")
    return rows, cols, shore


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
    )

    # -----------------------------
    # Experiments
    # -----------------------------
    output_dir: str = Field("./results", alias="QUBO_OUTPUT_DIR")
    granularity: float = Field(0.05, alias="QUBO_GRANULARITY")
    runs: int = Field(100, alias="QUBO_RUNS")
    agap_runs: int = Field(200, alias="QUBO_AGAP_RUNS")
    master_seed: int = Field(0, alias="QUBO_MASTER_SEED")
    log_level: str = Field("INFO", alias="QUBO_LOG_LEVEL")

    # -----------------------------
    # Samplers
    # -----------------------------
    sweeps: int = Field(1000, alias="QUBO_SWEEPS")
    effort_sweeps_raw: str = Field("1000,2000,4000", alias="QUBO_EFFORT_SWEEPS")
    brute_force_cap: int = Field(24, alias="QUBO_BRUTE_FORCE_CAP")

    # -----------------------------
    # Embedding
    # -----------------------------
    chimera_raw: str = Field("16x16x4", alias="QUBO_CHIMERA")
    embed_attempts: int = Field(10, alias="QUBO_EMBED_ATTEMPTS")

    # -----------------------------
    # Service (MCP over FastAPI)
    # -----------------------------
    app_name: str = Field("qubo-approx", alias="APP_NAME")
    host: str = Field("127.0.0.1", alias="HOST")
    port: int = Field(8080, alias="PORT")
    mcp_name: str = Field("qubo-approx", alias="MCP_NAME")
    mcp_mount_path: str = Field("/mcp", alias="MCP_MOUNT_PATH")

    @property
    def effort_sweeps(self) -> list[int]:
        try:
            return [int(s) for s in _split_csv(self.effort_sweeps_raw)]
        except ValueError as e:
            raise ConfigError(f"QUBO_EFFORT_SWEEPS must list integers, got {self.effort_sweeps_raw!r}") from e

    @property
    def chimera(self) -> tuple[int, int, int]:
        return parse_chimera(self.chimera_raw)

    def output_path(self) -> Path:
        return Path(self.output_dir).expanduser()


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
