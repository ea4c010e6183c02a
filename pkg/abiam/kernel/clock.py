from pydantic import BaseModel, ConfigDict, Field

from abiam.schemas import MONTHS_PER_STEP, Granularity


class SimClock(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int = Field(0, ge=0)
    granularity: Granularity = Granularity.QUARTER

    @property
    def months_per_step(self) -> int:
        return MONTHS_PER_STEP[self.granularity]

    @property
    def months_elapsed(self) -> int:
        return self.step * self.months_per_step

    @property
    def annual(self) -> bool:
        return self.step > 0 and self.months_elapsed % 12 == 0

    def fires_every(self, months: int) -> bool:
        """True when the current step closes a period of `months` months."""
        return self.step > 0 and self.months_elapsed % months == 0


def advance_clock(clock: SimClock) -> SimClock:
    return SimClock(step=clock.step + 1, granularity=clock.granularity)
