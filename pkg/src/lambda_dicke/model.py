"""Model constants, thermal state parameters and mean-field vocabulary.

Natural units throughout: hbar = k_B = 1, so mode frequencies are energies and
``beta = 1 / T``.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised when model or thermal parameters violate their invariants."""


@dataclass(frozen=True)
class ModelParams:
    """The six constants of the Lambda Hamiltonian.

    ``delta`` and ``Delta`` are the energies of levels 2 and 3 above level 1,
    ``omega1``/``omega2`` the mode frequencies and ``g1``/``g2`` the couplings
    of mode 1 to the 1-3 transition and of mode 2 to the 2-3 transition.
    """

    delta: float
    Delta: float
    omega1: float
    omega2: float
    g1: float
    g2: float

    def omega(self, branch: int) -> float:
        return self.omega1 if _branch(branch) == 1 else self.omega2

    def g(self, branch: int) -> float:
        return self.g1 if _branch(branch) == 1 else self.g2

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


# (field, predicate, message) in reporting order.
_CHECKS = (
    ("Delta", lambda v: v > 0, "Delta must be positive"),
    ("omega1", lambda v: v > 0, "omega1 must be positive"),
    ("omega2", lambda v: v > 0, "omega2 must be positive"),
    ("delta", lambda v: v >= 0, "delta must be non-negative"),
    ("g1", lambda v: v >= 0, "g1 must be non-negative"),
    ("g2", lambda v: v >= 0, "g2 must be non-negative"),
)


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged or raise on the first violated invariant."""
    for name in ("delta", "Delta", "omega1", "omega2", "g1", "g2"):
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ParameterError(f"{name} must be finite")
    for name, ok, message in _CHECKS:
        if not ok(getattr(params, name)):
            raise ParameterError(message)
    return params


def critical_coupling(params: ModelParams, branch: int) -> float:
    """Critical coupling ``sqrt(Delta * omega_n) / 2`` of the requested mode."""
    validate(params)
    return math.sqrt(params.Delta * params.omega(branch)) / 2.0


def check_beta(beta: float) -> float:
    if not isinstance(beta, (int, float)) or not math.isfinite(beta) or beta <= 0:
        raise ParameterError("beta must be positive and finite")
    return float(beta)


def _branch(branch: int) -> int:
    if branch not in (1, 2):
        raise ParameterError(f"branch must be 1 or 2, got {branch!r}")
    return branch


@dataclass(frozen=True)
class ThermoPoint:
    """Inverse temperature; zero temperature lives in :mod:`zero_temp`."""

    beta: float

    def __post_init__(self):
        check_beta(self.beta)

    @classmethod
    def from_temperature(cls, kT: float) -> "ThermoPoint":
        if not math.isfinite(kT) or kT <= 0:
            raise ParameterError("temperature must be positive and finite")
        return cls(1.0 / kT)

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta


@dataclass(frozen=True)
class MeanField:
    """Scaled field quadratures, ``alpha_n = sqrt(N) (y_n + i z_n)``."""

    y1: float = 0.0
    z1: float = 0.0
    y2: float = 0.0
    z2: float = 0.0

    def __post_init__(self):
        for name in ("y1", "z1", "y2", "z2"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    def canonical(self) -> "MeanField":
        """Reflect into the quadrant ``y >= 0``; z is kept as is."""
        return MeanField(abs(self.y1), self.z1, abs(self.y2), self.z2)

    @property
    def is_canonical(self) -> bool:
        return self.y1 >= 0 and self.y2 >= 0 and self.z1 == 0 and self.z2 == 0


class PhaseLabel(enum.Enum):
    NORMAL = "Normal"
    SR1 = "SR1"
    SR2 = "SR2"

    @property
    def display(self) -> str:
        """Colour alias used in plots: mode 1 active is "red", mode 2 "blue"."""
        return {"Normal": "normal", "SR1": "red", "SR2": "blue"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "PhaseLabel":
        key = text.strip().lower()
        aliases = {"normal": cls.NORMAL, "sr1": cls.SR1, "red": cls.SR1,
                   "sr2": cls.SR2, "blue": cls.SR2}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown phase label {text!r}") from None

    def __str__(self) -> str:
        return self.value


def classification_tolerance(params: ModelParams, branch: int) -> float:
    """Threshold above which ``y_n`` counts as nonzero."""
    return 1e-4 * math.sqrt(params.Delta / params.omega(branch))
