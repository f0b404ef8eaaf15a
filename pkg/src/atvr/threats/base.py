"""Threat models: l_p balls and finite unions of them (pydantic)."""

import math
from enum import Enum
from typing import Annotated, Any

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    field_validator,
    model_serializer,
    model_validator,
)


class Norm(str, Enum):
    """Norm order of a ball."""

    L1 = "1"
    L2 = "2"
    LINF = "inf"

    @property
    def order(self) -> float:
        """Numeric order (math.inf for LINF)."""
        return {Norm.L1: 1.0, Norm.L2: 2.0, Norm.LINF: math.inf}[self]

    @property
    def dual(self) -> "Norm":
        """Dual norm: l1 <-> linf, l2 <-> l2."""
        return {Norm.L1: Norm.LINF, Norm.L2: Norm.L2, Norm.LINF: Norm.L1}[self]

    @property
    def label(self) -> str:
        return f"l{self.value}"

    @classmethod
    def parse(cls, value: Any) -> "Norm":
        """Accept 1, 2, "inf", "Infinity", "linf", "l2", math.inf, ..."""
        if isinstance(value, Norm):
            return value
        if isinstance(value, float) and math.isinf(value):
            return cls.LINF
        text = str(value).strip().lower()
        if text.startswith("l"):
            text = text[1:]
        aliases = {"1": "1", "1.0": "1", "2": "2", "2.0": "2", "inf": "inf", "infinity": "inf", "∞": "inf"}
        if text not in aliases:
            raise ValueError(f"Unsupported norm order: {value!r} (expected 1, 2 or inf)")
        return cls(aliases[text])


class Ball(BaseModel):
    """An l_p ball of radius eps; N(x) = {x' : ||x' - x||_p <= eps}."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    p: Norm = Field(..., description="Norm order (1, 2 or inf)")
    eps: float = Field(..., ge=0.0, description="Radius")

    @field_validator("p", mode="before")
    @classmethod
    def _parse_norm(cls, v: Any) -> Norm:
        return Norm.parse(v)

    @field_validator("eps")
    @classmethod
    def _finite_eps(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("eps must be finite")
        return v

    @model_serializer
    def _serialize(self) -> dict[str, Any]:
        return {"p": self.p.value, "eps": self.eps}

    @property
    def label(self) -> str:
        return f"{self.p.label}({self.eps:g})"

    def scaled(self, eps: float) -> "Ball":
        """Same norm, different radius."""
        return Ball(p=self.p, eps=eps)


class ThreatModel(BaseModel):
    """
    A nonempty finite union of balls. A single member is a plain ball.

    Config form: {"p": "inf", "eps": 0.01} or {"union": [{...}, {...}]}.
    """

    model_config = ConfigDict(frozen=True)

    members: list[Ball] = Field(..., min_length=1)

    @model_validator(mode="before")
    @classmethod
    def _parse_config(cls, data: Any) -> Any:
        if isinstance(data, Ball):
            return {"members": [data]}
        if isinstance(data, dict):
            if "members" in data:
                return data
            if "union" in data:
                return {"members": data["union"]}
            if "p" in data:
                return {"members": [data]}
        return data

    @model_serializer
    def _serialize(self) -> dict[str, Any]:
        if len(self.members) == 1:
            return self.members[0].model_dump()
        return {"union": [m.model_dump() for m in self.members]}

    @classmethod
    def ball(cls, p: Norm | str | int | float, eps: float) -> "ThreatModel":
        return cls(members=[Ball(p=p, eps=eps)])

    def union(self, other: "ThreatModel | Ball") -> "ThreatModel":
        """Union of two threat models (members concatenated, duplicates dropped)."""
        extra = [other] if isinstance(other, Ball) else list(other.members)
        merged = list(self.members)
        for ball in extra:
            if ball not in merged:
                merged.append(ball)
        return ThreatModel(members=merged)

    @property
    def is_single(self) -> bool:
        return len(self.members) == 1

    @property
    def label(self) -> str:
        return "|".join(m.label for m in self.members)

    @property
    def max_eps(self) -> float:
        return max(m.eps for m in self.members)


# Norm field for config models that accepts 1, 2, "inf", "l2", ...
NormField = Annotated[Norm, BeforeValidator(Norm.parse)]
