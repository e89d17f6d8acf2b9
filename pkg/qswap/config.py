import os

from dotenv import load_dotenv

load_dotenv()


class Settings:
    THREADS: int = int(os.getenv("QSWAP_THREADS", "0")) or (os.cpu_count() or 1)
    BRIGHTNESS_THRESHOLD: float = float(os.getenv("QSWAP_BRIGHTNESS_THRESHOLD", "1e-6"))
    ELEC_NOISE_DB: float = float(os.getenv("QSWAP_ELEC_NOISE_DB", "-10.0"))
    ORACLE_CHUNK: int = int(os.getenv("QSWAP_ORACLE_CHUNK", "131072"))
    LOG_LEVEL: str = os.getenv("QSWAP_LOG_LEVEL", "INFO")
    OUT_DIR: str = os.getenv("QSWAP_OUT_DIR", "out")


settings = Settings()
