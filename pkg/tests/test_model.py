import math

import pytest
from hypothesis import given, strategies as st

from slaq import (
    CustomerType,
    InvalidParameterError,
    TypePopulation,
    WtpModel,
    grid_population,
    wtp,
    zero_value_delay,
)


class TestWtp:
    def test_at_on_demand_delay_wtp_is_p(self, model):
        assert wtp(model, 10.0, model.T) == model.p

    def test_known_value(self, model):
        # alpha=2, phi=0.3: 1 - (2 * 0.25)**3 = 0.875
        assert wtp(model, 2.0, 0.3) == pytest.approx(0.875)

    def test_zero_at_zero_value_delay(self, model):
        alpha = 4.0
        phi0 = zero_value_delay(model, alpha)
        assert phi0 == pytest.approx(0.3)
        assert wtp(model, alpha, phi0) == pytest.approx(0.0, abs=1e-12)

    def test_not_clamped_beyond_zero_value_delay(self, model):
        assert wtp(model, 4.0, 1.0) < 0

    def test_scales_with_p(self):
        m = WtpModel(p=3.0, T=0.05, beta=3.0)
        assert wtp(m, 2.0, 0.3) == pytest.approx(3 * 0.875)

    def test_rejects_bad_inputs(self, model):
        with pytest.raises(InvalidParameterError):
            wtp(model, -1.0, 0.1)
        with pytest.raises(InvalidParameterError):
            wtp(model, 1.0, 0.01)  # below T
        with pytest.raises(InvalidParameterError):
            WtpModel(beta=1.5)
        with pytest.raises(InvalidParameterError):
            WtpModel(T=0.0)

    @given(
        alpha=st.floats(0.5, 50.0),
        phi_lo=st.floats(0.05, 2.0),
        dphi=st.floats(1e-3, 1.0),
    )
    def test_decreasing_in_delay(self, alpha, phi_lo, dphi):
        m = WtpModel()
        assert wtp(m, alpha, phi_lo + dphi) < wtp(m, alpha, phi_lo)

    @given(
        a_lo=st.floats(0.5, 50.0),
        da=st.floats(1e-3, 10.0),
        phi=st.floats(0.051, 2.0),
    )
    def test_decreasing_in_alpha(self, a_lo, da, phi):
        m = WtpModel()
        assert wtp(m, a_lo + da, phi) < wtp(m, a_lo, phi)

    @given(
        a_lo=st.floats(0.5, 20.0),
        da=st.floats(1e-3, 10.0),
        phi_lo=st.floats(0.05, 1.0),
        dphi=st.floats(1e-3, 1.0),
    )
    def test_wtp_difference_ordering(self, a_lo, da, phi_lo, dphi):
        # a more delay-sensitive type loses strictly more WTP over the
        # same delay increase (single-crossing of the curves)
        m = WtpModel()
        a_hi = a_lo + da
        drop_hi = wtp(m, a_hi, phi_lo) - wtp(m, a_hi, phi_lo + dphi)
        drop_lo = wtp(m, a_lo, phi_lo) - wtp(m, a_lo, phi_lo + dphi)
        assert drop_hi > drop_lo


class TestCustomerType:
    def test_offset_alpha_roundtrip(self, model):
        t = CustomerType(alpha=12.5)
        assert t.phi0_prime == pytest.approx(0.08)
        assert t.phi0(model) == pytest.approx(0.13)

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(InvalidParameterError):
            CustomerType(alpha=0.0)


class TestGridPopulation:
    def test_structure(self, pop_dense):
        assert len(pop_dense) == 50
        assert pop_dense.probs == tuple([1 / 50] * 50)
        assert pop_dense.total_rate == 1.0
        # type 1 is effectively delay-intolerant
        assert pop_dense.alpha_max == pytest.approx(1e6)
        # type i >= 2 has zero-value offset (i - 1) * delta
        assert pop_dense.types[1].alpha == pytest.approx(1 / 0.02)
        assert pop_dense.types[49].alpha == pytest.approx(1 / 0.98)
        assert pop_dense.alpha_min == pytest.approx(1 / 0.98)

    def test_alphas_strictly_decreasing(self, pop_wide):
        a = pop_wide.alphas
        assert all(x > y for x, y in zip(a, a[1:]))

    def test_with_total_rate(self, pop_dense):
        scaled = pop_dense.with_total_rate(12.0)
        assert scaled.total_rate == 12.0
        assert scaled.alphas == pop_dense.alphas
        assert pop_dense.total_rate == 1.0  # original untouched

    def test_rejects_bad_grid(self):
        with pytest.raises(InvalidParameterError):
            grid_population(n=1, delta=0.02)
        with pytest.raises(InvalidParameterError):
            grid_population(n=10, delta=0.0)
        with pytest.raises(InvalidParameterError):
            grid_population(n=10, delta=0.02, epsilon=0.05)


class TestTypePopulationValidation:
    def test_probs_must_sum_to_one(self):
        types = (CustomerType(alpha=2.0), CustomerType(alpha=1.0))
        with pytest.raises(InvalidParameterError):
            TypePopulation(types=types, probs=(0.6, 0.3), total_rate=1.0)

    def test_alphas_must_decrease(self):
        types = (CustomerType(alpha=1.0), CustomerType(alpha=2.0))
        with pytest.raises(InvalidParameterError):
            TypePopulation(types=types, probs=(0.5, 0.5), total_rate=1.0)

    def test_rate_positive(self):
        types = (CustomerType(alpha=2.0), CustomerType(alpha=1.0))
        with pytest.raises(InvalidParameterError):
            TypePopulation(types=types, probs=(0.5, 0.5), total_rate=0.0)


def test_zero_value_delay_inverse(model):
    for offset in (0.02, 0.1, 0.98):
        alpha = 1.0 / offset
        assert zero_value_delay(model, alpha) == pytest.approx(offset + model.T)
    assert math.isclose(zero_value_delay(model, 1e6), model.T + 1e-6)
