"""Physical parameters shared by the closed forms, the spectral flows and the CLI."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from .switching import ConfigurationError, SwitchingLaws


@dataclass(frozen=True)
class Params:
    """Switching rates ``r0``, ``r1``, diffusivity ``D``, length ``L`` and boundary value ``b``.

    ``b`` may be zero (the null field); everything else must be positive.
    """

    r0: float = 1.0
    r1: float = 1.0
    D: float = 1.0
    L: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        for name in ("r0", "r1", "D", "L"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"{name} must be a positive finite number, got {v!r}")
        if not math.isfinite(self.b) or self.b < 0:
            raise ConfigurationError(f"b must be finite and nonnegative, got {self.b!r}")

    @property
    def p(self) -> float:
        """Long-run probability of the Neumann / homogeneous state."""
        return self.r0 / (self.r0 + self.r1)

    @property
    def rho(self) -> float:
        return self.r0 / self.r1

    @property
    def gamma(self) -> float:
        return self.L * math.sqrt((self.r0 + self.r1) / self.D)

    def laws(self) -> SwitchingLaws:
        return SwitchingLaws.exponential(self.r0, self.r1)

    def with_total_rate(self, total: float) -> "Params":
        """Same ``rho``, rates rescaled so that ``r0 + r1 = total``."""
        p = self.p
        return replace(self, r0=p * total, r1=(1 - p) * total)

    def to_dict(self) -> dict:
        return asdict(self)
