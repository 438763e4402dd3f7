"""Platforms, Sensor/Controller parts, and the condition-matched plugin registry.

A platform is a simulator-backed entity with measurable or modifiable state.
Parts attach to platforms with bounded, unit-tagged property spaces.  Part
group names in agent config files resolve through the plugin registry, so
swapping simulators never requires editing agent configs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .units import Quantity, Unit, check_compatibility


class PartError(Exception):
    pass


class NoValidMeasurementYet(PartError):
    def __init__(self, sensor: str):
        super().__init__(f"sensor '{sensor}' got an invalid reading before any valid one")


class RegistryFrozen(PartError):
    def __init__(self, group: str):
        super().__init__(f"cannot register '{group}': plugin registry is frozen")


class UnknownGroup(PartError):
    def __init__(self, group: str):
        self.group = group
        super().__init__(f"no part group named '{group}' in the plugin registry")


class NoMatch(PartError):
    def __init__(self, group: str, simulator_type: str, platform_type: str):
        super().__init__(
            f"part group '{group}' has no entry matching simulator "
            f"'{simulator_type}' and platform '{platform_type}'"
        )


@dataclass(frozen=True)
class PartProperty:
    """Limits, cardinality, and unit of the space in which a part is valid."""

    name: str
    shape: int
    low: np.ndarray
    high: np.ndarray
    unit: Unit

    def __post_init__(self):
        low = np.broadcast_to(np.asarray(self.low, dtype=float), (self.shape,)).copy()
        high = np.broadcast_to(np.asarray(self.high, dtype=float), (self.shape,)).copy()
        if np.any(low > high):
            raise ValueError(f"property '{self.name}': low > high")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    def contains(self, values: np.ndarray) -> bool:
        v = np.asarray(values, dtype=float)
        return v.shape == (self.shape,) and bool(
            np.all(v >= self.low) and np.all(v <= self.high)
        )


class Part:
    def __init__(self, name: str, prop: PartProperty):
        self.name = name
        self.property = prop

    def reset(self) -> None:
        pass


class Sensor(Part):
    """Reads platform state; holds the last valid value on malformed readings."""

    def __init__(self, name: str, prop: PartProperty, read: Callable[[Any], Quantity]):
        super().__init__(name, prop)
        self._read = read
        self.last_valid: Quantity | None = None

    def reset(self) -> None:
        self.last_valid = None

    def _is_valid(self, q: Quantity) -> bool:
        return (
            q.values.shape == (self.property.shape,)
            and q.is_finite()
            and check_compatibility(q.unit, self.property.unit)
        )

    def measure(self, platform_state: Any) -> Quantity:
        reading = self._read(platform_state)
        if self._is_valid(reading):
            self.last_valid = reading.to(self.property.unit)
            return self.last_valid
        if self.last_valid is None:
            raise NoValidMeasurementYet(self.name)
        return self.last_valid


class Controller(Part):
    """Accepts commanded values, clamped element-wise into the property bounds."""

    def __init__(self, name: str, prop: PartProperty):
        super().__init__(name, prop)
        self.pending: Quantity | None = None
        self.clamp_count = 0

    def reset(self) -> None:
        self.pending = None
        self.clamp_count = 0

    def apply(self, command: Quantity) -> None:
        values = command.to(self.property.unit).values
        clamped = np.clip(values, self.property.low, self.property.high)
        if not np.array_equal(clamped, values):
            self.clamp_count += 1
        self.pending = Quantity(clamped, self.property.unit)

    def take_pending(self) -> Quantity:
        """Pending command, or a zero command if none was applied this step."""
        if self.pending is None:
            zero = np.clip(
                np.zeros(self.property.shape), self.property.low, self.property.high
            )
            return Quantity(zero, self.property.unit)
        return self.pending


class Platform:
    """A named simulator entity carrying parts; inoperable platforms ignore controls."""

    def __init__(self, name: str, platform_type: str, state: Any = None):
        self.name = name
        self.platform_type = platform_type
        self.state = state
        self.parts: dict[str, Part] = {}
        self.operable = True

    def add_part(self, part: Part) -> None:
        if part.name in self.parts:
            raise ValueError(f"platform '{self.name}': duplicate part '{part.name}'")
        self.parts[part.name] = part

    def sensors(self) -> dict[str, Sensor]:
        return {n: p for n, p in self.parts.items() if isinstance(p, Sensor)}

    def controllers(self) -> dict[str, Controller]:
        return {n: p for n, p in self.parts.items() if isinstance(p, Controller)}

    def measure_all(self) -> None:
        for sensor in self.sensors().values():
            sensor.measure(self.state)


@dataclass(frozen=True)
class Conditions:
    """Match constraints for a plugin registry entry; absent field = wildcard."""

    simulator_type: str | None = None
    platform_type: str | None = None

    def matches(self, simulator_type: str, platform_type: str) -> bool:
        return (self.simulator_type is None or self.simulator_type == simulator_type) and (
            self.platform_type is None or self.platform_type == platform_type
        )


PartFactory = Callable[[str, dict], Part]


@dataclass
class _Entry:
    conditions: Conditions
    factory: PartFactory


class PluginRegistry:
    """Ordered condition-matched mapping from part group names to factories."""

    def __init__(self):
        self._entries: dict[str, list[_Entry]] = {}
        self._frozen = False

    def register(
        self,
        group: str,
        factory: PartFactory,
        simulator_type: str | None = None,
        platform_type: str | None = None,
    ) -> None:
        if self._frozen:
            raise RegistryFrozen(group)
        entry = _Entry(Conditions(simulator_type, platform_type), factory)
        self._entries.setdefault(group, []).append(entry)

    def freeze(self) -> None:
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    def has_group(self, group: str) -> bool:
        return group in self._entries

    def resolve(self, group: str, simulator_type: str, platform_type: str) -> PartFactory:
        if group not in self._entries:
            raise UnknownGroup(group)
        for entry in self._entries[group]:
            if entry.conditions.matches(simulator_type, platform_type):
                return entry.factory
        raise NoMatch(group, simulator_type, platform_type)


#: process-wide registry populated by the built-in simulators at import time
GLOBAL_REGISTRY = PluginRegistry()
