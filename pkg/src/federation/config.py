"""
FedNDES Configuration

Frozen pydantic model shared by the library entry point ``fedndes_run`` and the
experiment schema.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.constants import FEDNDES_ARMIJO_A, FEDNDES_BACKTRACK_B, FEDNDES_DELTA, FEDNDES_ETA


class ExitRule(str, Enum):
    """
    FedNDES stopping test on the decrement:

    - paper: decrement^2 <= 3/4 * delta (the default; "squared" is accepted as an alias)
    - linear: decrement <= 3/4 * delta
    """

    PAPER = "paper"
    LINEAR = "linear"


EXIT_RULE_ALIASES = {"squared": ExitRule.PAPER}


class FedNDESConfig(BaseModel):
    """
    Attributes:
        delta: Accuracy tolerance of the exit test (> 0)
        a: Armijo slope in (0, 0.5)
        b: Backtracking factor in (0, 1)
        mbar1: Sketch rows while the decrement exceeds eta; None derives
               ceil(4 * effective dimension) at w0
        mbar2: Sketch rows once the decrement is at most eta; None derives
               ceil(16 * effective dimension) at w0
        eta: Decrement threshold switching between mbar1 and mbar2
        exit_rule: ExitRule
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    delta: float = Field(default=FEDNDES_DELTA, gt=0)
    a: float = Field(default=FEDNDES_ARMIJO_A, gt=0, lt=0.5)
    b: float = Field(default=FEDNDES_BACKTRACK_B, gt=0, lt=1)
    mbar1: int | None = Field(default=None, ge=1)
    mbar2: int | None = Field(default=None, ge=1)
    eta: float = Field(default=FEDNDES_ETA, gt=0)
    exit_rule: ExitRule = ExitRule.PAPER

    @field_validator("exit_rule", mode="before")
    @classmethod
    def resolve_exit_rule_alias(cls, value):
        return EXIT_RULE_ALIASES.get(value, value) if isinstance(value, str) else value

    @model_validator(mode="after")
    def check_finite(self) -> "FedNDESConfig":
        for name in ("delta", "eta"):
            if getattr(self, name) == float("inf"):
                raise ValueError(f"{name} must be finite")
        return self

    def should_exit(self, decrement: float) -> bool:
        """Applies the configured exit test to a decrement value."""
        threshold = 0.75 * self.delta
        if self.exit_rule is ExitRule.PAPER:
            return decrement * decrement <= threshold
        return decrement <= threshold
