import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from envforge.units import (
    NONE,
    REGISTRY,
    DimensionMismatch,
    Quantity,
    UnknownUnit,
    check_compatibility,
    convert,
    get_unit,
)


def units_by_dimension():
    groups = {}
    for unit in REGISTRY.values():
        groups.setdefault(unit.dimension, []).append(unit)
    return groups


class TestRegistry:
    def test_lookup_is_case_insensitive(self):
        assert get_unit("Meter") is REGISTRY["meter"]
        assert get_unit("  METER ") is REGISTRY["meter"]

    def test_na_aliases_to_none(self):
        assert get_unit("N/A") is NONE
        assert get_unit("n/a") is NONE

    def test_unknown_unit_raises(self):
        with pytest.raises(UnknownUnit):
            get_unit("furlong")

    def test_registry_is_closed_and_scales_positive(self):
        assert len(REGISTRY) == 14
        assert all(u.scale_to_base > 0 for u in REGISTRY.values())


class TestConversion:
    def test_known_factors(self):
        assert convert(Quantity.scalar(1.0, get_unit("kilometer")), get_unit("meter")).item == 1000.0
        assert convert(Quantity.scalar(1.0, get_unit("foot")), get_unit("meter")).item == pytest.approx(0.3048, rel=1e-15)
        assert convert(Quantity.scalar(180.0, get_unit("degree")), get_unit("radian")).item == pytest.approx(np.pi, rel=1e-15)

    def test_percent_fraction(self):
        assert convert(Quantity.scalar(50.0, get_unit("percent")), get_unit("fraction")).item == pytest.approx(0.5, rel=1e-15)
        assert convert(Quantity.scalar(0.25, get_unit("fraction")), get_unit("percent")).item == pytest.approx(25.0, rel=1e-15)

    def test_pairwise_round_trip_within_each_dimension(self):
        # Exhaustive: a -> b -> a must come back within 1e-12 relative.
        for units in units_by_dimension().values():
            for a, b in itertools.permutations(units, 2):
                q = Quantity.scalar(3.7, a)
                back = q.to(b).to(a)
                assert back.item == pytest.approx(3.7, rel=1e-12), (a.name, b.name)

    def test_identity_conversion_is_exact(self):
        q = Quantity.scalar(1.23456789, get_unit("meter"))
        assert q.to(get_unit("meter")).item == 1.23456789

    def test_cross_dimension_raises(self):
        with pytest.raises(DimensionMismatch):
            convert(Quantity.scalar(1.0, get_unit("meter")), get_unit("second"))

    def test_none_only_matches_none(self):
        assert check_compatibility(NONE, NONE)
        assert not check_compatibility(NONE, get_unit("fraction"))
        with pytest.raises(DimensionMismatch):
            Quantity.scalar(1.0, NONE).to(get_unit("fraction"))

    @given(
        value=st.floats(-1e12, 1e12, allow_nan=False),
        pair=st.sampled_from(
            [
                (a, b)
                for units in units_by_dimension().values()
                for a in units
                for b in units
            ]
        ),
    )
    def test_round_trip_property(self, value, pair):
        a, b = pair
        back = Quantity.scalar(value, a).to(b).to(a).item
        assert back == pytest.approx(value, rel=1e-12, abs=1e-12)

    @given(
        value=st.floats(-1e9, 1e9, allow_nan=False),
        scale=st.floats(-1e3, 1e3, allow_nan=False),
    )
    def test_conversion_is_linear(self, value, scale):
        meter, foot = get_unit("meter"), get_unit("foot")
        lhs = Quantity.scalar(value * scale, meter).to(foot).item
        rhs = Quantity.scalar(value, meter).to(foot).item * scale
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

    def test_transitivity(self):
        # a -> c directly equals a -> b -> c within tolerance.
        m, cm, km = get_unit("meter"), get_unit("centimeter"), get_unit("kilometer")
        q = Quantity.scalar(123.456, cm)
        direct = q.to(km).item
        chained = q.to(m).to(km).item
        assert direct == pytest.approx(chained, rel=1e-12)


class TestQuantity:
    def test_vector_storage(self):
        q = Quantity(np.array([1.0, 2.0, 3.0]), get_unit("meter"))
        assert q.values.shape == (3,)
        with pytest.raises(ValueError):
            q.item

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Quantity(np.array([]), NONE)

    def test_scalar_and_equality(self):
        a = Quantity.scalar(2.0, get_unit("meter"))
        assert a == Quantity(np.array([2.0]), get_unit("meter"))
        assert a != Quantity.scalar(2.0, get_unit("kilometer"))

    def test_is_finite(self):
        assert Quantity.scalar(1.0).is_finite()
        assert not Quantity(np.array([1.0, np.nan]), NONE).is_finite()
        assert not Quantity(np.array([np.inf]), NONE).is_finite()
