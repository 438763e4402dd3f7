"""Functor contracts: Glue, Done, Reward, and the spec/extractor datatypes.

Glues move information between platform parts and agents.  Dones test
termination criteria and emit a status code.  Rewards produce scalar
components, evaluated after dones so they can see the step's done results.
All three compile into a deduplicated DAG (see :mod:`envforge.functors.graph`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from ..parts import Platform
from ..units import NONE, Quantity, Unit, get_unit


class FunctorError(Exception):
    pass


class PartBindingError(FunctorError):
    """A glue references a part that is absent from the agent's platforms."""


class UnknownExtractorTarget(FunctorError):
    def __init__(self, target: str):
        super().__init__(f"extractor targets unknown glue '{target}'")


class DoneStatusCode(enum.Enum):
    WIN = "WIN"
    PARTIAL_WIN = "PARTIAL_WIN"
    DRAW = "DRAW"
    PARTIAL_LOSS = "PARTIAL_LOSS"
    LOSS = "LOSS"


@dataclass(frozen=True)
class DoneResult:
    code: DoneStatusCode
    truncation: bool = False


@dataclass(frozen=True)
class ObservationBox:
    """Shape, bounds, and unit of one observation entry (mirrors PartProperty)."""

    shape: int
    low: np.ndarray
    high: np.ndarray
    unit: Unit = NONE

    def __post_init__(self):
        low = np.broadcast_to(np.asarray(self.low, dtype=float), (self.shape,)).copy()
        high = np.broadcast_to(np.asarray(self.high, dtype=float), (self.shape,)).copy()
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    def contains(self, values: np.ndarray) -> bool:
        v = np.asarray(values, dtype=float)
        return v.shape == (self.shape,) and bool(
            np.all(v >= self.low) and np.all(v <= self.high)
        )


@dataclass(frozen=True)
class ExtractorSpec:
    """Declarative pointer into a compiled glue's observation."""

    glue: str
    key: str | None = None


WrappedSpec = Union["FunctorSpec", str, list, dict, None]


@dataclass
class FunctorSpec:
    """Declarative description of one glue/done/reward instance."""

    functor: str
    name: str | None = None
    config: dict[str, Any] = field(default_factory=dict)
    references: dict[str, str] = field(default_factory=dict)
    wrapped: WrappedSpec = None
    extractor: ExtractorSpec | None = None

    @property
    def display_name(self) -> str:
        return self.name or self.functor


class EpisodeState:
    """Mutable per-step view handed to functors during evaluation."""

    def __init__(self, platforms: dict[str, Platform], epp, horizon: int):
        self.platforms = platforms
        self.epp = epp
        self.horizon = horizon
        self.step_count = 0
        self.sim_time = 0.0
        # node id -> {key: Quantity}, refreshed every step
        self.observations: dict[str, dict[str, Quantity]] = {}
        # agent name -> {done node name: DoneResult} for the current step
        self.done_results: dict[str, dict[str, DoneResult]] = {}
        self.shared_done_results: dict[str, DoneResult] = {}
        self.agent_done: dict[str, bool] = {}

    def reference(self, key: str) -> Quantity:
        return self.epp.reference_lookup(key)


class Functor:
    """Base for all functors; state is episode-local and cleared by reset()."""

    kind: str = ""
    #: config keys that must be present (after merging references)
    required: tuple[str, ...] = ()
    #: parameter name -> dimension tag enforced at config validation time
    reference_dimensions: dict[str, str] = {}
    #: "none" | "single" | "list" | "map" | "any"
    wrapped_arity: str = "none"

    def __init__(
        self,
        spec: FunctorSpec,
        children: dict[str, "FunctorNode"],
        extractor: "Extractor | None",
        platforms: dict[str, Platform],
    ):
        self.spec = spec
        self.name = spec.display_name
        self.config = spec.config
        self.references = spec.references
        self.children = children
        self.extractor = extractor
        self.platforms = platforms

    def reset(self) -> None:
        """Clear episode-local state."""

    def param(self, state: EpisodeState, name: str, unit: Unit | None = None, default=None):
        """A parameter value: reference-store lookup first, then config, then default."""
        if name in self.references:
            q = state.reference(self.references[name])
        elif name in self.config:
            q = _as_quantity(self.config[name])
        elif default is not None:
            q = _as_quantity(default)
        else:
            raise FunctorError(f"{self.name}: missing parameter '{name}'")
        return q.to(unit) if unit is not None else q

    def child_observation(self, state: EpisodeState, key: str | None = None) -> Quantity:
        """The (single) observation of a wrapped child, by child key."""
        if not self.children:
            raise FunctorError(f"{self.name}: has no wrapped children")
        if key is None:
            if len(self.children) != 1:
                raise FunctorError(f"{self.name}: child key required (multiple children)")
            key = next(iter(self.children))
        node = self.children[key]
        obs = state.observations[node.id]
        if len(obs) != 1:
            raise FunctorError(f"{self.name}: child '{key}' has {len(obs)} observations")
        return next(iter(obs.values()))

    def child_space(self, key: str | None = None) -> ObservationBox:
        if key is None:
            key = next(iter(self.children))
        node = self.children[key]
        spaces = node.functor.observation_space()
        if len(spaces) != 1:
            raise FunctorError(f"{self.name}: child '{key}' has {len(spaces)} spaces")
        return next(iter(spaces.values()))


class Glue(Functor):
    kind = "glue"

    def observation_space(self) -> dict[str, ObservationBox]:
        return {}

    def get_observation(self, state: EpisodeState) -> dict[str, Quantity]:
        return {}

    def action_space(self) -> ObservationBox | None:
        return None

    def apply_action(self, fragment: np.ndarray, state: EpisodeState) -> None:
        """Default: sensor-only glues ignore actions."""


class Done(Functor):
    kind = "done"

    def evaluate(self, state: EpisodeState) -> DoneResult | None:
        raise NotImplementedError


class SharedDone(Functor):
    kind = "shared_done"

    def evaluate(self, state: EpisodeState) -> DoneResult | None:
        raise NotImplementedError


class Reward(Functor):
    kind = "reward"

    def evaluate(
        self, state: EpisodeState, done_results: dict[str, DoneResult]
    ) -> float:
        raise NotImplementedError


class Extractor:
    """Resolved accessor into a compiled glue's observation value/space/unit."""

    def __init__(self, node: "FunctorNode", key: str | None):
        spaces = node.functor.observation_space()
        if key is None:
            if len(spaces) != 1:
                raise FunctorError(
                    f"extractor on '{node.name}' needs a key ({len(spaces)} observations)"
                )
            key = next(iter(spaces))
        if key not in spaces:
            raise UnknownExtractorTarget(f"{node.name}/{key}")
        self.node = node
        self.key = key

    def value(self, state: EpisodeState) -> Quantity:
        return state.observations[self.node.id][self.key]

    def space(self) -> ObservationBox:
        return self.node.functor.observation_space()[self.key]

    def unit(self) -> Unit:
        return self.space().unit


@dataclass
class FunctorNode:
    """One deduplicated node of the compiled DAG."""

    id: str
    kind: str
    name: str
    functor: Functor
    children: tuple[str, ...]


def _as_quantity(value) -> Quantity:
    if isinstance(value, Quantity):
        return value
    if isinstance(value, dict) and "value" in value:
        return Quantity.scalar(float(value["value"]), get_unit(value.get("unit", "none")))
    if isinstance(value, (list, tuple, np.ndarray)):
        return Quantity(np.asarray(value, dtype=float), NONE)
    return Quantity.scalar(float(value), NONE)
