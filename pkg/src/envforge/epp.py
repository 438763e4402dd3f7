"""Episode Parameter Provider: per-episode sampling of named distributions.

Each parameter is a distribution sampled once per episode with a generator
keyed by (episode seed, parameter name), so adding or renaming one parameter
never perturbs another's draws.  Updaters mutate distribution hyperparameters
between episodes to implement curricula.  The Reference Store makes a single
sampled value visible to every functor that references it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Any

import numpy as np

from .units import NONE, Quantity, Unit


class EppError(Exception):
    pass


class UnknownHyperparameter(EppError):
    def __init__(self, target: str, distribution: "Distribution"):
        super().__init__(
            f"updater target '{target}' is not a mutable hyperparameter of "
            f"{type(distribution).__name__}"
        )


class UnknownReference(EppError):
    def __init__(self, key: str):
        super().__init__(f"reference store has no key '{key}'")


class NotYetSampled(EppError):
    def __init__(self):
        super().__init__("reference store read before the first episode sample")


_STD_NORMAL = NormalDist()


class Distribution:
    """Base distribution; subclasses expose mutable hyperparameters."""

    #: names of hyperparameters an updater may target
    mutable: tuple[str, ...] = ()

    def sample(self, rng: np.random.Generator) -> float:
        raise NotImplementedError

    def validate(self) -> None:
        """Re-check invariants; called after construction and after updates."""

    def clamp(self) -> None:
        """Restore invariants after an update, clamping where possible."""


@dataclass
class Constant(Distribution):
    value: float

    mutable = ("value",)

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.value)


@dataclass
class Uniform(Distribution):
    low: float
    high: float

    mutable = ("low", "high")

    def validate(self) -> None:
        if self.low > self.high:
            raise ValueError(f"Uniform: low ({self.low}) > high ({self.high})")

    def clamp(self) -> None:
        if self.low > self.high:
            self.low = self.high

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))


@dataclass
class TruncatedGaussian(Distribution):
    mu: float
    sigma: float
    low: float
    high: float

    mutable = ("mu", "sigma", "low", "high")

    def validate(self) -> None:
        if self.sigma <= 0:
            raise ValueError(f"TruncatedGaussian: sigma ({self.sigma}) must be > 0")
        if self.low >= self.high:
            raise ValueError(
                f"TruncatedGaussian: low ({self.low}) must be < high ({self.high})"
            )

    def clamp(self) -> None:
        if self.sigma <= 0:
            self.sigma = np.finfo(float).tiny
        if self.low >= self.high:
            self.low = np.nextafter(self.high, -np.inf)

    def sample(self, rng: np.random.Generator) -> float:
        # Inverse-CDF sampling: deterministic cost, exact seed reproducibility.
        a = _STD_NORMAL.cdf((self.low - self.mu) / self.sigma)
        b = _STD_NORMAL.cdf((self.high - self.mu) / self.sigma)
        u = rng.uniform(0.0, 1.0)
        p = a + u * (b - a)
        # Guard the open-interval requirement of inv_cdf at the extremes.
        p = min(max(p, np.finfo(float).tiny), 1.0 - np.finfo(float).epsneg)
        x = self.mu + self.sigma * _STD_NORMAL.inv_cdf(p)
        return float(min(max(x, self.low), self.high))


@dataclass
class DiscreteChoice(Distribution):
    values: list[float]
    weights: list[float] | None = None

    mutable = ()

    def validate(self) -> None:
        if not self.values:
            raise ValueError("DiscreteChoice: values must be non-empty")
        if self.weights is not None:
            if len(self.weights) != len(self.values):
                raise ValueError("DiscreteChoice: weights length != values length")
            if any(w < 0 for w in self.weights):
                raise ValueError("DiscreteChoice: weights must be non-negative")
            if sum(self.weights) <= 0:
                raise ValueError("DiscreteChoice: weights must sum to > 0")

    def sample(self, rng: np.random.Generator) -> float:
        if self.weights is None:
            idx = rng.integers(0, len(self.values))
        else:
            p = np.asarray(self.weights, dtype=float)
            idx = rng.choice(len(self.values), p=p / p.sum())
        return float(self.values[idx])


DISTRIBUTION_KINDS = {
    "constant": Constant,
    "uniform": Uniform,
    "truncated_gaussian": TruncatedGaussian,
    "discrete_choice": DiscreteChoice,
}


@dataclass
class Increment:
    """Add ``step`` to the target hyperparameter each application, clamped at ``limit``."""

    target: str
    step: float
    limit: float | None = None

    def apply(self, dist: Distribution) -> None:
        if self.target not in dist.mutable:
            raise UnknownHyperparameter(self.target, dist)
        value = getattr(dist, self.target) + self.step
        if self.limit is not None:
            if self.step >= 0:
                value = min(value, self.limit)
            else:
                value = max(value, self.limit)
        setattr(dist, self.target, value)
        dist.clamp()


@dataclass
class ParameterSpec:
    """A named distribution with a unit and optional curriculum updaters."""

    name: str
    distribution: Distribution
    unit: Unit = NONE
    updaters: list[Increment] = field(default_factory=list)

    def __post_init__(self):
        self.distribution.validate()


@dataclass(frozen=True)
class SampledParameters:
    """Immutable per-episode snapshot of every parameter's drawn value."""

    values: dict[str, Quantity]
    episode_seed: int

    def __getitem__(self, name: str) -> Quantity:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def get(self, name: str, default=None):
        return self.values.get(name, default)


def _parameter_rng(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


class EpisodeParameterProvider:
    """Holds parameter specs, samples them per episode, and hosts the Reference Store."""

    def __init__(self, specs: list[ParameterSpec] | None = None):
        self._specs: dict[str, ParameterSpec] = {}
        for spec in specs or []:
            self.add(spec)
        self._current: SampledParameters | None = None

    def add(self, spec: ParameterSpec) -> None:
        if spec.name in self._specs:
            raise ValueError(f"duplicate parameter name '{spec.name}'")
        self._specs[spec.name] = spec

    @property
    def specs(self) -> dict[str, ParameterSpec]:
        return dict(self._specs)

    def __contains__(self, name: str) -> bool:
        return name in self._specs

    def sample_episode(
        self, seed: int, overrides: dict[str, Quantity] | None = None
    ) -> SampledParameters:
        """Draw every parameter for one episode.

        ``overrides`` replaces named distributions with fixed values for this
        episode only (used by the evaluation pipeline's test cases).
        """
        overrides = overrides or {}
        values: dict[str, Quantity] = {}
        for name, spec in self._specs.items():
            if name in overrides:
                values[name] = overrides[name].to(spec.unit)
            else:
                rng = _parameter_rng(seed, name)
                values[name] = Quantity.scalar(spec.distribution.sample(rng), spec.unit)
        self._current = SampledParameters(values, seed)
        return self._current

    @property
    def current_sample(self) -> SampledParameters | None:
        return self._current

    def apply_training_result(self, result: dict[str, Any] | None = None) -> None:
        """Fire every updater once; built-in Increment ignores the payload."""
        for spec in self._specs.values():
            for updater in spec.updaters:
                updater.apply(spec.distribution)

    def reference_lookup(self, key: str) -> Quantity:
        """The value sampled for ``key`` this episode; stable within an episode."""
        if self._current is None:
            raise NotYetSampled()
        if key not in self._current.values:
            raise UnknownReference(key)
        return self._current.values[key]

    def snapshot_state(self) -> dict[str, Any]:
        """Serializable view of the current distribution hyperparameters."""
        out: dict[str, Any] = {}
        for name, spec in self._specs.items():
            dist = spec.distribution
            fields = {k: v for k, v in vars(dist).items()}
            out[name] = {
                "kind": type(dist).__name__,
                "unit": spec.unit.name,
                **fields,
            }
        return out
