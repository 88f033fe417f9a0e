from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

from kawlab.core.forcing import ForcingSignal, c1_norm

STRICT = {"extra": "forbid"}


class ForcingMode(BaseModel):
    """One ``amplitude * sin(argument + phase)`` term.

    Periodic modes name a ``harmonic`` of the base period, almost-periodic
    modes a ``frequency``, quasi-periodic modes a torus ``wavevector``.
    """

    amplitude: float
    phase: float = 0.0
    harmonic: int | None = Field(default=None, ge=1)
    frequency: float | None = None
    wavevector: list[int] | None = None

    model_config = STRICT


class ForcingSpec(BaseModel):
    variant: Literal["periodic", "quasi_periodic", "almost_periodic", "zero"] = "zero"
    period: float | None = Field(default=None, gt=0)
    amplitude: float | None = None
    modes: list[ForcingMode] = []
    frequencies: list[float] | None = None
    torus_modes: list[ForcingMode] = []
    phase_offset: list[float] | None = None
    epsilon: float | None = Field(default=None, gt=0)
    epsilon_budget: float | None = Field(default=None, gt=0)

    model_config = STRICT

    @model_validator(mode="after")
    def _check_variant(self) -> ForcingSpec:
        if self.variant == "periodic":
            if self.period is None:
                raise ValueError("periodic forcing needs a period")
            if self.amplitude is None and not self.modes:
                raise ValueError("periodic forcing needs an amplitude or modes")
            if any(m.harmonic is None for m in self.modes):
                raise ValueError("every periodic mode needs a harmonic")
        elif self.variant == "quasi_periodic":
            if not self.frequencies:
                raise ValueError("quasi-periodic forcing needs frequencies")
            k = len(self.frequencies)
            if self.phase_offset is not None and len(self.phase_offset) != k:
                raise ValueError(f"phase_offset must have {k} entries")
            for mode in self.torus_modes:
                if mode.wavevector is None or len(mode.wavevector) != k:
                    raise ValueError(f"every torus mode needs a wavevector of length {k}")
        elif self.variant == "almost_periodic":
            if any(m.frequency is None for m in self.modes):
                raise ValueError("every almost-periodic mode needs a frequency")
        return self

    def to_signal(self) -> ForcingSignal:
        """The signal, rescaled to C1 size ``epsilon`` when one is given."""
        signal = self._raw_signal()
        if self.epsilon is not None and not signal.is_zero:
            signal = signal.scaled(self.epsilon / c1_norm(signal))
        return signal

    def _raw_signal(self) -> ForcingSignal:
        if self.variant == "periodic":
            harmonics = [(m.harmonic, m.amplitude, m.phase) for m in self.modes]
            if self.amplitude is not None:
                harmonics.insert(0, (1, self.amplitude, 0.0))
            return ForcingSignal.periodic(self.period, harmonics)
        if self.variant == "quasi_periodic":
            phases = self.phase_offset or [0.0] * len(self.frequencies)
            terms = [(m.wavevector, m.amplitude, m.phase) for m in self.torus_modes]
            return ForcingSignal.quasi(self.frequencies, phases, terms)
        if self.variant == "almost_periodic":
            return ForcingSignal.almost([(m.amplitude, m.frequency, m.phase) for m in self.modes])
        return ForcingSignal.zero()

    @property
    def size(self) -> float:
        """C1 size of the signal, the epsilon every small-data claim refers to."""
        return c1_norm(self.to_signal())
