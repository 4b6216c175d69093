"""Local-oscillator phase schedules for synthetic homodyne runs."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * np.pi


class PhaseKind(Enum):
    """How the local-oscillator phase moves from sample to sample."""

    UNIFORM_RANDOM = "uniform_random"   # i.i.d. phases over [0, 2 pi)
    SAWTOOTH = "sawtooth"               # linear ramp over [0, pi) repeated `cycles` times
    FIXED = "fixed"                     # every sample at `phase`


@dataclass(frozen=True)
class PhaseSchedule:
    """
    n_phases = 0 means continuous phases; n_phases > 0 quantizes them to
    equally spaced steps (over [0, 2 pi) for random, per ramp for sawtooth).
    """
    kind: PhaseKind = PhaseKind.SAWTOOTH
    n_phases: int = 0
    cycles: int = 20
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PhaseKind(self.kind))
        if self.n_phases < 0:
            raise ValueError(f"n_phases must be >= 0, got {self.n_phases}")
        if self.cycles < 1:
            raise ValueError(f"cycles must be >= 1, got {self.cycles}")
        if not 0.0 <= self.phase < TWO_PI:
            raise ValueError(f"phase must be in [0, 2 pi), got {self.phase}")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n_phases": self.n_phases,
                "cycles": self.cycles, "phase": self.phase}


def phases_for(sched: PhaseSchedule, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")

    if sched.kind is PhaseKind.FIXED:
        return np.full(n_samples, sched.phase)

    if sched.kind is PhaseKind.UNIFORM_RANDOM:
        if sched.n_phases > 0:
            return rng.integers(sched.n_phases, size=n_samples) * (TWO_PI / sched.n_phases)
        return rng.uniform(0.0, TWO_PI, size=n_samples)

    ramp = np.mod(np.arange(n_samples) * sched.cycles / n_samples, 1.0)
    if sched.n_phases > 0:
        ramp = np.floor(ramp * sched.n_phases) / sched.n_phases
    return np.pi * ramp
