"""Attack and variation-ascent configuration."""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from atvr.threats.base import Ball, Norm

DEFAULT_STEP_DIVISOR = 9.0
DEFAULT_VERTEX_STARTS = 8


class AttackConfig(BaseModel):
    """
    Projected-ascent parameters shared by PGD attacks and variation PGD.

    step_size=None means eps/9 for each ball.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    steps: int = Field(10, ge=0, description="Ascent steps per restart")
    step_size: float | None = Field(None, gt=0, description="Absolute step; None means eps/9")
    restarts: int = Field(1, ge=1, description="Independent random starts")
    keep_best: bool = Field(True, description="Return the best iterate instead of the last")
    track_best: bool = Field(
        False, description="Variation only: report best-so-far instead of the final iterate"
    )
    random_init: bool = Field(True, description="Start each restart from a uniform draw in the ball")
    vertex_starts: int | None = Field(
        None,
        ge=0,
        description="Variation only: antipodal vertex starts per restart on linf and l1 balls; None means 8",
    )
    seed: int = Field(0, ge=0)
    clip_box: tuple[float, float] | None = Field(
        None, description="Optional input domain, e.g. [0, 1]; off by default"
    )

    @model_validator(mode="after")
    def _check_box(self) -> "AttackConfig":
        if self.clip_box is not None and self.clip_box[0] > self.clip_box[1]:
            raise ValueError("clip_box lower bound exceeds upper bound")
        return self

    def step_for(self, ball: Ball) -> float:
        if self.step_size is not None:
            return self.step_size
        return ball.eps / DEFAULT_STEP_DIVISOR

    def vertex_starts_for(self, ball: Ball) -> int:
        """Extra variation starts per restart; l2 balls have no vertices."""
        if ball.p is Norm.L2:
            return 0
        return DEFAULT_VERTEX_STARTS if self.vertex_starts is None else self.vertex_starts


def evaluation_attack(seed: int = 0, steps: int = 100) -> AttackConfig:
    """Stronger settings used for evaluation runs."""
    return AttackConfig(steps=steps, restarts=10, seed=seed)
