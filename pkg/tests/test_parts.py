import numpy as np
import pytest

from envforge.parts import (
    Controller,
    NoMatch,
    NoValidMeasurementYet,
    PartProperty,
    Platform,
    PluginRegistry,
    RegistryFrozen,
    Sensor,
    UnknownGroup,
)
from envforge.units import METER, NONE, Quantity


def position_property():
    return PartProperty("position", 1, -10.0, 10.0, METER)


class TestPartProperty:
    def test_broadcast_bounds(self):
        prop = PartProperty("p", 3, -1.0, 1.0, NONE)
        assert prop.low.shape == (3,) and prop.high.shape == (3,)

    def test_low_above_high_rejected(self):
        with pytest.raises(ValueError):
            PartProperty("p", 1, 2.0, 1.0, NONE)

    def test_contains(self):
        prop = PartProperty("p", 2, -1.0, 1.0, NONE)
        assert prop.contains(np.array([0.0, 1.0]))
        assert not prop.contains(np.array([0.0, 1.5]))
        assert not prop.contains(np.array([0.0]))


class TestSensor:
    def test_valid_reading_converted_to_property_unit(self):
        from envforge.units import get_unit

        sensor = Sensor(
            "s", position_property(), lambda _: Quantity.scalar(200.0, get_unit("centimeter"))
        )
        assert sensor.measure(None) == Quantity.scalar(2.0, METER)

    def test_invalid_reading_holds_last_valid(self):
        values = iter([1.0, float("nan"), 2.0])
        sensor = Sensor(
            "s", position_property(), lambda _: Quantity.scalar(next(values), METER)
        )
        assert sensor.measure(None).item == 1.0
        assert sensor.measure(None).item == 1.0  # NaN reading: held
        assert sensor.measure(None).item == 2.0  # recovers on next valid value

    def test_invalid_first_reading_raises(self):
        sensor = Sensor(
            "s", position_property(), lambda _: Quantity.scalar(float("inf"), METER)
        )
        with pytest.raises(NoValidMeasurementYet):
            sensor.measure(None)

    def test_wrong_shape_is_invalid(self):
        values = iter(
            [Quantity(np.array([1.0]), METER), Quantity(np.array([1.0, 2.0]), METER)]
        )
        sensor = Sensor("s", position_property(), lambda _: next(values))
        assert sensor.measure(None).item == 1.0
        assert sensor.measure(None).item == 1.0  # shape mismatch: held

    def test_wrong_dimension_is_invalid(self):
        values = iter([Quantity.scalar(1.0, METER), Quantity.scalar(2.0, NONE)])
        sensor = Sensor("s", position_property(), lambda _: next(values))
        assert sensor.measure(None).item == 1.0
        assert sensor.measure(None).item == 1.0

    def test_reset_clears_hold(self):
        sensor = Sensor("s", position_property(), lambda _: Quantity.scalar(1.0, METER))
        sensor.measure(None)
        sensor.reset()
        assert sensor.last_valid is None


class TestController:
    def test_clamping_and_count(self):
        ctrl = Controller("c", PartProperty("thrust", 1, -1.0, 1.0, NONE))
        ctrl.apply(Quantity.scalar(0.5))
        assert ctrl.clamp_count == 0
        assert ctrl.take_pending().item == 0.5
        ctrl.apply(Quantity.scalar(5.0))
        assert ctrl.clamp_count == 1
        assert ctrl.take_pending().item == 1.0

    def test_no_pending_yields_zero(self):
        ctrl = Controller("c", PartProperty("thrust", 1, -1.0, 1.0, NONE))
        assert ctrl.take_pending().item == 0.0

    def test_zero_clipped_into_bounds(self):
        ctrl = Controller("c", PartProperty("thrust", 1, 0.5, 1.0, NONE))
        assert ctrl.take_pending().item == 0.5

    def test_reset(self):
        ctrl = Controller("c", PartProperty("thrust", 1, -1.0, 1.0, NONE))
        ctrl.apply(Quantity.scalar(9.0))
        ctrl.reset()
        assert ctrl.pending is None and ctrl.clamp_count == 0


class TestPlatform:
    def test_duplicate_part_rejected(self):
        platform = Platform("p", "T")
        part = Controller("c", PartProperty("thrust", 1, -1.0, 1.0, NONE))
        platform.add_part(part)
        with pytest.raises(ValueError):
            platform.add_part(Controller("c", PartProperty("thrust", 1, -1.0, 1.0, NONE)))

    def test_sensor_controller_partition(self):
        platform = Platform("p", "T")
        platform.add_part(Controller("c", PartProperty("t", 1, -1.0, 1.0, NONE)))
        platform.add_part(Sensor("s", position_property(), lambda _: Quantity.scalar(0.0, METER)))
        assert set(platform.sensors()) == {"s"}
        assert set(platform.controllers()) == {"c"}


class TestPluginRegistry:
    def factory(self, tag):
        def make(name, config):
            part = Controller(name, PartProperty("t", 1, -1.0, 1.0, NONE))
            part.tag = tag
            return part

        return make

    def test_first_matching_entry_wins(self):
        reg = PluginRegistry()
        reg.register("G", self.factory("specific"), simulator_type="SimA")
        reg.register("G", self.factory("generic"))
        assert reg.resolve("G", "SimA", "P")("x", {}).tag == "specific"
        assert reg.resolve("G", "SimB", "P")("x", {}).tag == "generic"

    def test_wildcard_conditions(self):
        reg = PluginRegistry()
        reg.register("G", self.factory("any"))
        assert reg.resolve("G", "whatever", "thing")("x", {}).tag == "any"

    def test_platform_condition(self):
        reg = PluginRegistry()
        reg.register("G", self.factory("cart"), platform_type="Cart")
        with pytest.raises(NoMatch):
            reg.resolve("G", "Sim", "Rover")

    def test_unknown_group(self):
        reg = PluginRegistry()
        with pytest.raises(UnknownGroup):
            reg.resolve("Missing", "Sim", "P")

    def test_freeze_blocks_registration(self):
        reg = PluginRegistry()
        reg.register("G", self.factory("a"))
        reg.freeze()
        assert reg.frozen
        with pytest.raises(RegistryFrozen):
            reg.register("H", self.factory("b"))
        # Resolution still works after freezing.
        assert reg.resolve("G", "Sim", "P")("x", {}).tag == "a"

    def test_same_group_across_simulators(self):
        # The simulator-swap property: one group name, per-simulator factories.
        reg = PluginRegistry()
        reg.register("Sensor_State", self.factory("dock"), simulator_type="Dock")
        reg.register("Sensor_State", self.factory("cart"), simulator_type="Cart")
        assert reg.resolve("Sensor_State", "Dock", "P")("x", {}).tag == "dock"
        assert reg.resolve("Sensor_State", "Cart", "P")("x", {}).tag == "cart"
