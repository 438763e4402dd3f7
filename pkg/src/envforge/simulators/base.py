"""Simulator contract: reset/step with frame_rate, sim_time, and platforms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..epp import SampledParameters
from ..parts import Platform
from ..units import Quantity


class SimulatorError(Exception):
    pass


class MissingInitParameter(SimulatorError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"missing initialization parameter '{key}'")


class UnknownPlatform(SimulatorError):
    def __init__(self, name: str):
        super().__init__(f"no platform named '{name}'")


@dataclass
class PlatformSetup:
    """Construction plan for one platform: name, type, and init parameter names."""

    name: str
    platform_type: str
    init_params: list[str] = field(default_factory=list)


def init_key(platform_name: str, param: str) -> str:
    """EPP key under which a platform initialization parameter is sampled."""
    return f"{platform_name}.{param}"


class Simulator:
    """Base simulator: owns platforms and advances sim_time at a fixed frame rate.

    Subclasses implement :meth:`_build_platform` and :meth:`_advance`.
    """

    simulator_type = "Simulator"
    #: init parameter names each platform of this simulator must declare
    required_init_params: tuple[str, ...] = ()

    def __init__(self, config: dict[str, Any], platform_setups: list[PlatformSetup]):
        self.config = config
        self.frame_rate = float(config.get("frame_rate", self.default_frame_rate()))
        self.platform_setups = platform_setups
        self.platforms: dict[str, Platform] = {}
        self._persistent: dict[str, Platform] = {}
        self._steps = 0

    @classmethod
    def default_frame_rate(cls) -> float:
        return 1.0

    @property
    def sim_time(self) -> float:
        return self._steps / self.frame_rate

    @property
    def dt(self) -> float:
        return 1.0 / self.frame_rate

    def _init_value(self, sampled: SampledParameters, platform: str, param: str) -> Quantity:
        key = init_key(platform, param)
        value = sampled.get(key)
        if value is None:
            raise MissingInitParameter(key)
        return value

    def reset(self, sampled: SampledParameters) -> dict[str, Platform]:
        """Construct entities from sampled parameters and pair them with platforms.

        Platform objects (and the parts attached to them) persist across
        resets; only their entity state is rebuilt.
        """
        self._steps = 0
        self.platforms = {}
        for setup in self.platform_setups:
            platform = self._persistent.get(setup.name)
            if platform is None:
                platform = Platform(setup.name, setup.platform_type)
                self._persistent[setup.name] = platform
            platform.state = self._make_entity(setup, sampled)
            platform.operable = True
            for part in platform.parts.values():
                part.reset()
            self.platforms[setup.name] = platform
            platform.measure_all()
        return self.platforms

    def step(self) -> dict[str, Platform]:
        """Apply pending controls, advance dynamics by one frame, refresh sensors."""
        for platform in self.platforms.values():
            self._advance(platform)
        self._steps += 1
        for platform in self.platforms.values():
            platform.measure_all()
        return self.platforms

    def mark_platform_inoperable(self, name: str) -> None:
        if name not in self.platforms:
            raise UnknownPlatform(name)
        self.platforms[name].operable = False

    def remove_platform(self, name: str) -> None:
        if name not in self.platforms:
            raise UnknownPlatform(name)
        del self.platforms[name]

    # subclass hooks ---------------------------------------------------

    def _make_entity(self, setup: PlatformSetup, sampled: SampledParameters) -> Any:
        raise NotImplementedError

    def _advance(self, platform: Platform) -> None:
        raise NotImplementedError
