"""Policy contract and the reference policies: random, scripted, replay.

No RL algorithm ships here; the Policy interface is the seam for external
training libraries.  Scripted rules are registered by name and referenced
from the agent file's policy block.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .functors.base import ObservationBox
from .units import Quantity

ActionDict = dict[str, np.ndarray]
ObservationDict = dict[str, Quantity]
ActionSpace = dict[str, ObservationBox]


class PolicyError(Exception):
    pass


class Policy:
    """Maps glue observations to an action inside the declared action space."""

    def __init__(self, config: dict | None = None, seed: int = 0):
        self.config = config or {}
        self.seed = seed
        self.calls = 0  # instrumentation for shared-policy aliasing checks
        self.reset()

    def reset(self) -> None:
        self._rng = np.random.default_rng(self.seed)

    def reseed(self, seed: int) -> None:
        self.seed = seed
        self.reset()

    def compute_action(self, observation: ObservationDict, action_space: ActionSpace) -> ActionDict:
        self.calls += 1
        return self._compute(observation, action_space)

    def _compute(self, observation: ObservationDict, action_space: ActionSpace) -> ActionDict:
        raise NotImplementedError


class RandomPolicy(Policy):
    """Uniform per-element sampling inside the action bounds."""

    def _compute(self, observation, action_space):
        action: ActionDict = {}
        for name, box in action_space.items():
            low = np.where(np.isfinite(box.low), box.low, -1.0)
            high = np.where(np.isfinite(box.high), box.high, 1.0)
            action[name] = self._rng.uniform(low, high)
        return action


ScriptedRule = Callable[[ObservationDict, ActionSpace], ActionDict]

SCRIPTED_RULES: dict[str, Callable[[dict], ScriptedRule]] = {}


def register_scripted_rule(name: str, factory: Callable[[dict], ScriptedRule]) -> None:
    SCRIPTED_RULES[name] = factory


class ScriptedPolicy(Policy):
    """Evaluates a registered deterministic rule over named observations."""

    def __init__(self, config=None, seed: int = 0):
        config = config or {}
        rule_name = config.get("rule")
        if rule_name not in SCRIPTED_RULES:
            raise PolicyError(
                f"unknown scripted rule '{rule_name}' (registered: {sorted(SCRIPTED_RULES)})"
            )
        self._rule = SCRIPTED_RULES[rule_name](config)
        super().__init__(config, seed)

    def _compute(self, observation, action_space):
        action = self._rule(observation, action_space)
        return {
            name: np.clip(np.atleast_1d(np.asarray(values, dtype=float)), box.low, box.high)
            for name, (box, values) in (
                (n, (action_space[n], action[n])) for n in action
            )
        }


class ReplayPolicy(Policy):
    """Plays back a recorded action sequence; used by the evaluation pipeline tests."""

    def __init__(self, config=None, seed: int = 0):
        config = config or {}
        self._sequence = [
            {name: np.atleast_1d(np.asarray(v, dtype=float)) for name, v in step.items()}
            for step in config.get("actions", [])
        ]
        super().__init__(config, seed)

    def reset(self):
        super().reset()
        self._cursor = 0

    def _compute(self, observation, action_space):
        if self._cursor < len(self._sequence):
            action = self._sequence[self._cursor]
            self._cursor += 1
            return {n: np.clip(v, action_space[n].low, action_space[n].high) for n, v in action.items()}
        return {n: np.clip(np.zeros(b.shape), b.low, b.high) for n, b in action_space.items()}


POLICY_REGISTRY: dict[str, type[Policy]] = {
    "random": RandomPolicy,
    "scripted": ScriptedPolicy,
    "replay": ReplayPolicy,
}


# Built-in scripted rules ----------------------------------------------------


def _zero_rule(config: dict) -> ScriptedRule:
    def rule(observation, action_space):
        return {n: np.zeros(b.shape) for n, b in action_space.items()}

    return rule


def _bang_bang_docking(config: dict) -> ScriptedRule:
    """Bang-off-bang thrust tracking a braking velocity profile toward x = 0.

    Accelerates toward the dock up to a cruise speed, then follows a
    proportional slow-down profile near the dock so arrival speed stays under
    the docking limit.
    """
    position_obs = config.get("position_obs", "ObservePosition/direct_observation")
    velocity_obs = config.get("velocity_obs", "ObserveVelocity/direct_observation")
    action_glue = config.get("action_glue", "ThrustControl")
    thrust = float(config.get("thrust", 0.1))
    v_cruise = float(config.get("v_cruise", 0.15))
    gain = float(config.get("gain", 0.1))
    band = float(config.get("band", 0.01))

    def rule(observation, action_space):
        x = float(observation[position_obs].values[0])
        v = float(observation[velocity_obs].values[0])
        v_desired = -np.sign(x) * min(v_cruise, gain * abs(x))
        err = v_desired - v
        if err > band:
            command = thrust
        elif err < -band:
            command = -thrust
        else:
            command = 0.0
        return {action_glue: np.array([command])}

    return rule


register_scripted_rule("zero", _zero_rule)
register_scripted_rule("bang_bang_docking", _bang_bang_docking)
