import os
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

load_dotenv()


class BaseAppSettings(BaseSettings):
    BASE_DIR: Path = Path(__file__).parent.parent
    OUTPUT_DIR: str = os.getenv(
        "PGC_OUTPUT_DIR", str(BASE_DIR.parent / "runs")
    )

    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    PGC_THREADS: int = int(os.getenv("PGC_THREADS", 0))
    DEFAULT_SEED: int = int(os.getenv("PGC_SEED", 0))
    PROGRESS_BARS: bool = (
        os.getenv("PGC_PROGRESS_BARS", "True").lower() == "true"
    )

    BENCH_SHAPE: tuple[int, int, int] = (64, 96, 128)
    BENCH_REPS: int = 5
    BENCH_MIN_SPEEDUP: float = 5.0

    @property
    def THREAD_COUNT(self) -> int:
        if self.PGC_THREADS > 0:
            return self.PGC_THREADS
        return os.cpu_count() or 1


class Settings(BaseAppSettings):
    pass


class TestingSettings(BaseAppSettings):
    PGC_THREADS: int = 1
    PROGRESS_BARS: bool = False

    def model_post_init(self, __context: dict[str, Any] | None = None) -> None:
        object.__setattr__(
            self,
            "OUTPUT_DIR",
            os.getenv("PGC_OUTPUT_DIR", str(self.BASE_DIR / "tests" / "runs")),
        )
