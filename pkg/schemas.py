from pydantic import BaseModel, Field, StrictInt, validator
from typing import Any, Dict, List, Optional

VERIFY_TARGETS = [
    "recurrence", "kernel", "normalize", "projection",
    "u-agreement", "adapted", "hecke-u", "wa",
]

EMIT_TARGETS = ["sequences", "kernel-basis", "adapted-basis", "theta"]

class PolyPayload(BaseModel):
    exponents: List[StrictInt]

    @validator('exponents')
    def validate_exponents(cls, v):
        for previous, current in zip(v, v[1:]):
            if current <= previous:
                raise ValueError('Exponents must be strictly ascending')
        if v and v[0] < 0:
            raise ValueError('Exponents must be nonnegative')
        return v

class SeriesPayload(PolyPayload):
    precision: StrictInt = Field(..., ge=0)

    @validator('precision')
    def validate_precision(cls, v, values):
        exponents = values.get('exponents') or []
        if exponents and exponents[-1] >= v:
            raise ValueError('Series exponent at or beyond precision')
        return v

class ReportRow(BaseModel):
    campaign: str
    item: Any
    status: str
    witness: Dict[str, Any] = Field(default_factory=dict)
    ms: float = 0.0

    @validator('status')
    def validate_status(cls, v):
        if v not in ("pass", "fail"):
            raise ValueError('Status must be pass or fail')
        return v

    def to_record(self, with_timing: bool = True) -> str:
        exclude = None if with_timing else {"ms"}
        return self.model_dump_json(exclude=exclude)

class Campaign(BaseModel):
    command: str = "verify"
    target: str
    max_n: Optional[int] = Field(None, ge=0)
    max_m: Optional[int] = Field(None, ge=0)
    start: int = Field(0, ge=0)
    depth: Optional[int] = Field(None, ge=0)
    primes: Optional[List[int]] = None
    precision: Optional[int] = Field(None, ge=1)
    threads: int = 1
    out: Optional[str] = None
    format: str = "text"
    normalization: str = "reduced"

    @validator('command')
    def validate_command(cls, v):
        if v not in ("verify", "emit"):
            raise ValueError('Command must be verify or emit')
        return v

    @validator('target')
    def validate_target(cls, v, values):
        valid_targets = EMIT_TARGETS if values.get('command') == "emit" else VERIFY_TARGETS
        if v not in valid_targets:
            raise ValueError(f'Target must be one of: {", ".join(valid_targets)}')
        return v

    @validator('start')
    def validate_start(cls, v, values):
        end = values.get('max_m') if values.get('target') == "projection" else values.get('max_n')
        if end is not None and v > end:
            raise ValueError(f'Start {v} is beyond the end of the range {end}')
        return v

    @validator('primes')
    def validate_primes(cls, v):
        from modforms import is_prime

        if v is not None:
            for p in v:
                if p in (2, 5) or not is_prime(p):
                    raise ValueError(f'{p} is not an odd prime other than 5')
        return v

    @validator('threads')
    def validate_threads(cls, v):
        if v < 1:
            raise ValueError('Thread count must be at least 1')
        return v

    @validator('format')
    def validate_format(cls, v):
        if v not in ("text", "jsonl"):
            raise ValueError('Format must be text or jsonl')
        return v

    @validator('normalization')
    def validate_normalization(cls, v):
        if v not in ("reduced", "lemma34"):
            raise ValueError('Normalization must be reduced or lemma34')
        return v

    @property
    def campaign_id(self) -> str:
        return f"{self.command}:{self.target}"

class CampaignSummary(BaseModel):
    campaign: str
    total: int
    passed: int
    failed: int
    seconds: float

    @property
    def ok(self) -> bool:
        return self.failed == 0
