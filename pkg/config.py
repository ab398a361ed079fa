import os
from typing import List
from dotenv import load_dotenv

load_dotenv()

REPORT_FORMATS = ("text", "jsonl")

class Config:
    THREADS: int = int(os.getenv("HECKE2_THREADS", "1"))
    LOG_LEVEL: str = os.getenv("HECKE2_LOG_LEVEL", "INFO")

    KARATSUBA_THRESHOLD: int = int(os.getenv("HECKE2_KARATSUBA_THRESHOLD", "4096"))

    ADAPTED_START_N: int = int(os.getenv("HECKE2_ADAPTED_START_N", "48"))
    ADAPTED_MAX_N: int = int(os.getenv("HECKE2_ADAPTED_MAX_N", "6144"))

    THETA_CHECK_PRECISION: int = int(os.getenv("HECKE2_THETA_CHECK_PRECISION", "10000"))

    REPORT_FORMAT: str = os.getenv("HECKE2_REPORT_FORMAT", "text")

    @classmethod
    def validate(cls) -> List[str]:
        problems = []

        if cls.THREADS < 1:
            problems.append("HECKE2_THREADS must be at least 1")

        if cls.KARATSUBA_THRESHOLD < 64:
            problems.append("HECKE2_KARATSUBA_THRESHOLD must be at least 64")

        if cls.ADAPTED_START_N < 2:
            problems.append("HECKE2_ADAPTED_START_N must be at least 2")

        if cls.ADAPTED_START_N > cls.ADAPTED_MAX_N:
            problems.append("HECKE2_ADAPTED_START_N exceeds HECKE2_ADAPTED_MAX_N")

        if cls.REPORT_FORMAT not in REPORT_FORMATS:
            problems.append(f"HECKE2_REPORT_FORMAT must be one of: {', '.join(REPORT_FORMATS)}")

        return problems

config = Config()
