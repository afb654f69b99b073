"""Scalar forcing inputs u(t).

Every simulation in this package is driven by a single scalar input. The
three carriers below cover everything the scenarios need: a constant level,
a sinusoid, and a sampled table (linearly interpolated) for inputs loaded
from file. Signals are immutable and safe to share between concurrent
integrations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InputSignal",
    "Constant",
    "Sinusoid",
    "Sampled",
    "eval_input",
    "parse_input_spec",
]


class InputSignal:
    """Base class for scalar inputs. Subclasses implement ``__call__(t)``."""

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    @property
    def spec(self) -> str:
        """Canonical spec string (the CLI input grammar)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(InputSignal):
    """u(t) = value for all t."""

    value: float = 0.0

    def __call__(self, t: float) -> float:
        return self.value

    @property
    def spec(self) -> str:
        return f"const:{self.value:g}"


@dataclass(frozen=True)
class Sinusoid(InputSignal):
    """u(t) = amplitude * sin(omega * t + phase), omega in rad/s."""

    amplitude: float = 1.0
    omega: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"sinusoid omega must be positive, got {self.omega}")

    def __call__(self, t: float) -> float:
        return self.amplitude * np.sin(self.omega * t + self.phase)

    @property
    def spec(self) -> str:
        return f"sin:{self.amplitude:g}:{self.omega:g}:{self.phase:g}"


@dataclass(frozen=True)
class Sampled(InputSignal):
    """Tabulated signal, linearly interpolated between samples.

    Evaluation outside [times[0], times[-1]] raises ValueError: extrapolating
    a measured input silently would corrupt a simulation.
    """

    times: np.ndarray
    values: np.ndarray
    source: str = field(default="", compare=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or values.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if times.size < 2:
            raise ValueError("sampled signal needs at least two samples")
        if not np.all(np.diff(times) > 0):
            raise ValueError("sample times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("sample times and values must be finite")

    def __call__(self, t: float) -> float:
        if t < self.times[0] or t > self.times[-1]:
            raise ValueError(
                f"t={t} outside sampled range [{self.times[0]}, {self.times[-1]}]"
            )
        return float(np.interp(t, self.times, self.values))

    @property
    def spec(self) -> str:
        return self.source if self.source else f"sampled:{self.times.size}pts"


def eval_input(sig: InputSignal, t: float) -> float:
    """Evaluate u(t). Thin functional alias for ``sig(t)``."""
    if not np.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    return float(sig(t))


def parse_input_spec(spec: str) -> InputSignal:
    """Parse the CLI input grammar.

    ``const:<c>``                        constant level
    ``sin:<amplitude>:<omega>[:<phase>]`` sinusoid (omega in rad/s, phase in rad)
    ``file:<path>``                       two-column CSV ``t,u``
    """
    kind, _, rest = spec.partition(":")
    if kind == "const":
        try:
            return Constant(float(rest))
        except ValueError:
            raise ValueError(f"bad constant input spec {spec!r}") from None
    if kind == "sin":
        parts = rest.split(":") if rest else []
        if len(parts) not in (2, 3):
            raise ValueError(f"bad sinusoid input spec {spec!r}, "
                             "expected sin:<amplitude>:<omega>[:<phase>]")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"bad sinusoid input spec {spec!r}") from None
        phase = nums[2] if len(nums) == 3 else 0.0
        return Sinusoid(amplitude=nums[0], omega=nums[1], phase=phase)
    if kind == "file":
        try:
            data = np.loadtxt(rest, delimiter=",", ndmin=2)
        except ValueError:
            # tolerate a header row such as "t,u"
            data = np.loadtxt(rest, delimiter=",", ndmin=2, skiprows=1)
        if data.shape[1] != 2:
            raise ValueError(f"input file {rest!r} must have two columns t,u")
        return Sampled(times=data[:, 0], values=data[:, 1], source=spec)
    raise ValueError(f"unknown input spec {spec!r}")
