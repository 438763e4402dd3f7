"""Built-in glue, done, and reward functors."""

from __future__ import annotations

import math

import numpy as np

from ..parts import Controller, Sensor
from ..units import NONE, Quantity, get_unit
from .base import (
    Done,
    DoneResult,
    DoneStatusCode,
    EpisodeState,
    Glue,
    ObservationBox,
    PartBindingError,
    Reward,
    SharedDone,
)
from .graph import register_functor


def _find_part(platforms, part_name: str, platform_name: str | None, part_type):
    candidates = (
        [platforms[platform_name]] if platform_name else list(platforms.values())
    )
    for platform in candidates:
        part = platform.parts.get(part_name)
        if isinstance(part, part_type):
            return platform, part
    raise PartBindingError(
        f"part '{part_name}' not found on platforms {sorted(platforms)}"
    )


class ObserveSensor(Glue):
    """Exposes a sensor measurement, optionally min-max normalized into [-1, 1]."""

    required = ("sensor",)

    def __init__(self, spec, children, extractor, platforms):
        super().__init__(spec, children, extractor, platforms)
        self.platform, self.sensor = _find_part(
            platforms, self.config["sensor"], self.config.get("platform"), Sensor
        )
        self.normalize = bool(self.config.get("normalize", True))

    def observation_space(self):
        prop = self.sensor.property
        if not self.normalize:
            return {
                "direct_observation": ObservationBox(
                    prop.shape, prop.low, prop.high, prop.unit
                )
            }
        bounded = np.isfinite(prop.low) & np.isfinite(prop.high)
        low = np.where(bounded, -1.0, prop.low)
        high = np.where(bounded, 1.0, prop.high)
        return {"direct_observation": ObservationBox(prop.shape, low, high, prop.unit)}

    def get_observation(self, state):
        measured = self.sensor.measure(self.platform.state)
        values = measured.values
        if self.normalize:
            prop = self.sensor.property
            bounded = np.isfinite(prop.low) & np.isfinite(prop.high)
            span = np.where(bounded, prop.high - prop.low, 1.0)
            scaled = -1.0 + 2.0 * (values - prop.low) / np.where(span == 0, 1.0, span)
            values = np.where(bounded, scaled, values)
        return {"direct_observation": Quantity(values, measured.unit)}


class ControllerGlue(Glue):
    """Forwards an agent action fragment to a controller's pending buffer."""

    required = ("controller",)

    def __init__(self, spec, children, extractor, platforms):
        super().__init__(spec, children, extractor, platforms)
        self.platform, self.controller = _find_part(
            platforms, self.config["controller"], self.config.get("platform"), Controller
        )

    def action_space(self):
        prop = self.controller.property
        return ObservationBox(prop.shape, prop.low, prop.high, prop.unit)

    def apply_action(self, fragment, state):
        self.controller.apply(Quantity(fragment, self.controller.property.unit))


class TargetValueDifference(Glue):
    """target_value minus one element of the wrapped glue's observation."""

    wrapped_arity = "single"

    def observation_space(self):
        unit = get_unit(self.config.get("unit", "none"))
        low = float(self.config.get("min", -np.inf))
        high = float(self.config.get("max", np.inf))
        return {"target_value_difference": ObservationBox(1, low, high, unit)}

    def get_observation(self, state):
        child = self.child_observation(state)
        index = int(self.config.get("index", 0))
        target = self.param(state, "target_value", default=0.0).item
        unit = get_unit(self.config.get("unit", "none"))
        return {
            "target_value_difference": Quantity.scalar(
                target - float(child.values[index]), unit
            )
        }


class UnitVector(Glue):
    """Wrapped observation scaled to unit Euclidean norm (zero stays zero)."""

    wrapped_arity = "single"

    def observation_space(self):
        child = self.child_space()
        return {"unit_vector": ObservationBox(child.shape, -1.0, 1.0, NONE)}

    def get_observation(self, state):
        child = self.child_observation(state)
        norm = float(np.linalg.norm(child.values))
        values = child.values / norm if norm > 0 else np.zeros_like(child.values)
        return {"unit_vector": Quantity(values, NONE)}


class Norm(Glue):
    """Euclidean norm of the wrapped observation."""

    wrapped_arity = "single"

    def observation_space(self):
        child = self.child_space()
        bound = float(
            np.sqrt(np.sum(np.maximum(np.abs(child.low), np.abs(child.high)) ** 2))
        )
        return {"norm": ObservationBox(1, 0.0, bound, child.unit)}

    def get_observation(self, state):
        child = self.child_observation(state)
        return {"norm": Quantity.scalar(float(np.linalg.norm(child.values)), child.unit)}


class Projection(Glue):
    """Scalar projection of child 'value' onto the direction of child 'onto'."""

    wrapped_arity = "map"

    def observation_space(self):
        value = self.child_space("value")
        bound = float(
            np.sqrt(np.sum(np.maximum(np.abs(value.low), np.abs(value.high)) ** 2))
        )
        return {"projection": ObservationBox(1, -bound, bound, value.unit)}

    def get_observation(self, state):
        value = self.child_observation(state, "value")
        onto = self.child_observation(state, "onto")
        norm = float(np.linalg.norm(onto.values))
        direction = onto.values / norm if norm > 0 else np.zeros_like(onto.values)
        return {
            "projection": Quantity.scalar(
                float(np.dot(value.values, direction)), value.unit
            )
        }


class Difference(Glue):
    """Element-wise difference of two wrapped observations: first - second."""

    wrapped_arity = "map"

    def observation_space(self):
        first = self.child_space("first")
        second = self.child_space("second")
        return {
            "difference": ObservationBox(
                first.shape, first.low - second.high, first.high - second.low, first.unit
            )
        }

    def get_observation(self, state):
        first = self.child_observation(state, "first")
        second = self.child_observation(state, "second").to(first.unit)
        return {"difference": Quantity(first.values - second.values, first.unit)}


class Wrapper(Glue):
    """Groups child glues, re-exporting their observations namespaced by child key."""

    wrapped_arity = "any"

    def observation_space(self):
        out = {}
        for key, node in self.children.items():
            for obs_key, box in node.functor.observation_space().items():
                out[f"{key}/{obs_key}"] = box
        return out

    def get_observation(self, state):
        out = {}
        for key, node in self.children.items():
            for obs_key, value in state.observations[node.id].items():
                out[f"{key}/{obs_key}"] = value
        return out


# Dones --------------------------------------------------------------------


class EpisodeHorizon(SharedDone):
    """Truncates the episode (DRAW) once the step counter reaches the horizon."""

    def evaluate(self, state):
        horizon = int(self.config.get("horizon", state.horizon))
        if state.step_count >= horizon:
            return DoneResult(DoneStatusCode.DRAW, truncation=True)
        return None


class StateBounds(Done):
    """Fires when the extracted (or wrapped) observation leaves [min, max]."""

    def evaluate(self, state):
        if self.extractor is not None:
            value = self.extractor.value(state).values
        else:
            value = self.child_observation(state).values
        low = self.param(state, "min", default=-math.inf)
        high = self.param(state, "max", default=math.inf)
        if np.any(value < low.values) or np.any(value > high.values):
            code = DoneStatusCode[self.config.get("status", "LOSS")]
            return DoneResult(code)
        return None


class DockingSuccess(Done):
    """WIN when the craft is within dock_radius at a safe closing speed."""

    reference_dimensions = {"dock_radius": "length", "velocity_limit": "velocity"}

    def _entity(self, state):
        name = self.config.get("platform") or next(iter(self.platforms))
        return state.platforms[name].state

    def evaluate(self, state):
        entity = self._entity(state)
        radius = self.param(state, "dock_radius").item
        v_max = self.param(state, "velocity_limit").item
        if abs(entity.x) <= radius and abs(entity.xdot) <= v_max:
            return DoneResult(DoneStatusCode.WIN)
        return None


class DockingFailure(DockingSuccess):
    """LOSS (crash) when the craft reaches dock_radius too fast."""

    def evaluate(self, state):
        entity = self._entity(state)
        radius = self.param(state, "dock_radius").item
        v_max = self.param(state, "velocity_limit").item
        if abs(entity.x) <= radius and abs(entity.xdot) > v_max:
            return DoneResult(DoneStatusCode.LOSS)
        return None


# Rewards --------------------------------------------------------------------


class ConstantStepReward(Reward):
    """A fixed payment every step on which no done has fired for the agent."""

    def evaluate(self, state, done_results):
        if done_results:
            return 0.0
        return float(self.config.get("reward", 1.0))


class ExponentialDecayFromTargetValue(Reward):
    """scale * exp(-|v - target| / eps), damped when moving away from the target.

    When the current distance to target exceeds the previous step's distance,
    the payment is multiplied by ``reward_when_farther`` (default 0).
    """

    required = ("eps",)

    def __init__(self, spec, children, extractor, platforms):
        super().__init__(spec, children, extractor, platforms)
        self._previous_distance: float | None = None

    def reset(self):
        self._previous_distance = None

    def evaluate(self, state, done_results):
        if self.extractor is not None:
            value = float(self.extractor.value(state).values[0])
        else:
            value = float(self.child_observation(state).values[0])
        target = self.param(state, "target_value", default=0.0).item
        eps = float(self.config["eps"])
        scale = float(self.config.get("scale", 1.0))
        distance = abs(value - target)
        reward = scale * math.exp(-distance / eps)
        if self._previous_distance is not None and distance > self._previous_distance:
            reward *= float(self.config.get("reward_when_farther", 0.0))
        self._previous_distance = distance
        return reward


class DoneStatusReward(Reward):
    """Pays configured amounts keyed by the done status codes fired this step."""

    def evaluate(self, state, done_results):
        total = 0.0
        for result in done_results.values():
            total += float(self.config.get(result.code.value.lower(), 0.0))
        return total


BUILTIN_FUNCTORS = {
    "ObserveSensor": ObserveSensor,
    "ControllerGlue": ControllerGlue,
    "TargetValueDifference": TargetValueDifference,
    "UnitVector": UnitVector,
    "Norm": Norm,
    "Projection": Projection,
    "Difference": Difference,
    "Wrapper": Wrapper,
    "EpisodeHorizon": EpisodeHorizon,
    "StateBounds": StateBounds,
    "DockingSuccess": DockingSuccess,
    "DockingFailure": DockingFailure,
    "ConstantStepReward": ConstantStepReward,
    "ExponentialDecayFromTargetValue": ExponentialDecayFromTargetValue,
    "DoneStatusReward": DoneStatusReward,
}

for _name, _cls in BUILTIN_FUNCTORS.items():
    register_functor(_name, _cls)
