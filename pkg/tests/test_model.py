import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from noethercheck import jetcalc
from noethercheck import model
from noethercheck.model import DampingSpec, ModelSpec, NonlinearitySpec


def euler_identity(spec):
    """E_u(mu L0) + mu E, which vanishes with the sign convention."""
    space = spec.space
    return jetcalc.canonical(
        jetcalc.euler(model.lagrangian(spec), space)
        + model.mu(spec) * model.residual(spec)
    )


class TestLagrangian:
    def test_symbolic_power_model(self):
        spec = ModelSpec(
            2, DampingSpec.power(jetcalc.m), NonlinearitySpec.power(jetcalc.f0, jetcalc.p)
        )
        assert euler_identity(spec) == 0

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_special_exponent_model(self, n):
        spec = ModelSpec(
            n,
            DampingSpec.power(jetcalc.m),
            NonlinearitySpec.power(1, model.special_exponent(n, jetcalc.m)),
        )
        assert euler_identity(spec) == 0

    def test_constant_damping_logarithmic_model(self):
        spec = ModelSpec(
            1,
            DampingSpec.constant(jetcalc.a0),
            NonlinearitySpec.logarithmic(jetcalc.sigma, jetcalc.kappa),
        )
        assert euler_identity(spec) == 0

    def test_generic_interaction(self):
        spec = ModelSpec(3, DampingSpec.none(), NonlinearitySpec.generic())
        assert euler_identity(spec) == 0

    @given(
        n=st.integers(1, 3),
        m=st.integers(-3, 3),
        rate=st.integers(-2, 2).filter(lambda r: r != 0),
    )
    def test_exponential_models(self, n, m, rate):
        spec = ModelSpec(
            n, DampingSpec.power(m), NonlinearitySpec.exponential(jetcalc.f0, rate)
        )
        assert euler_identity(spec) == 0

    def test_tabulated_damping_is_numeric(self):
        spec = ModelSpec(
            1, DampingSpec.tabulated([1, 2, 3], [1, 1, 1]), NonlinearitySpec.power(1, 3)
        )
        with pytest.raises(model.SymbolicDampingError):
            model.lagrangian(spec)
        with pytest.raises(model.SymbolicDampingError):
            model.damping_coefficient(spec)


class TestExponents:
    def test_special_exponent(self):
        assert model.special_exponent(3, 0) == 3
        assert model.special_exponent(1, 2) == 3
        assert model.special_exponent(2, jetcalc.m) == sp.cancel(
            (5 + jetcalc.m) / (1 + jetcalc.m)
        )

    def test_special_exponent_pole(self):
        with pytest.raises(ValueError, match="pole"):
            model.special_exponent(2, -1)

    def test_factors(self):
        assert model.conformal_factor(3, 0) == -2
        assert model.conformal_factor(2, jetcalc.m) == -1 - jetcalc.m
        assert model.dilation_weight(1, 0) == 0
        assert model.dilation_weight(3, 1) == sp.Rational(-3, 2)

    def test_has_special_exponent(self):
        special = ModelSpec(3, DampingSpec.none(), NonlinearitySpec.power(1, 3))
        other = ModelSpec(3, DampingSpec.none(), NonlinearitySpec.power(1, 5))
        assert model.has_special_exponent(special)
        assert not model.has_special_exponent(other)


class TestValidation:
    def test_unknown_kinds(self):
        with pytest.raises(ValueError):
            DampingSpec("linear")
        with pytest.raises(ValueError):
            NonlinearitySpec("cubic")

    def test_missing_parameters(self):
        with pytest.raises(ValueError):
            DampingSpec("power")
        with pytest.raises(ValueError):
            NonlinearitySpec("power")
        with pytest.raises(ValueError):
            NonlinearitySpec.exponential(1, 0)

    def test_power_without_antiderivative(self):
        with pytest.raises(ValueError):
            NonlinearitySpec.power(1, -1)

    def test_linear_interactions_need_opt_in(self):
        with pytest.raises(ValueError):
            NonlinearitySpec.power(1, 1)
        with pytest.raises(ValueError):
            NonlinearitySpec.power(0, 3)
        with pytest.raises(ValueError):
            NonlinearitySpec.logarithmic(1, 0)
        assert NonlinearitySpec.power(1, 1, allow_linear=True).allow_linear

    def test_tabulated_times_increase(self):
        with pytest.raises(ValueError):
            DampingSpec.tabulated([1, 3, 2], [0, 0, 0])
        with pytest.raises(ValueError):
            DampingSpec.tabulated([1], [0])

    def test_power_damping_needs_positive_start(self):
        with pytest.raises(ValueError):
            ModelSpec(1, DampingSpec.power(2), NonlinearitySpec.power(1, 3), t0=0)

    def test_damping_exponent(self):
        nl = NonlinearitySpec.power(1, 3)
        assert ModelSpec(1, DampingSpec.none(), nl).damping_exponent == 0
        assert ModelSpec(1, DampingSpec.power(2), nl).damping_exponent == 2
        assert ModelSpec(1, DampingSpec.constant(1), nl).damping_exponent is None


class TestNumeric:
    def test_tabulated_integrating_factor(self):
        times = np.linspace(1, 3, 2001)
        spec = ModelSpec(
            1, DampingSpec.tabulated(times, 1 / times), NonlinearitySpec.power(1, 3)
        )
        assert np.allclose(model.mu_numeric(spec, times), times, rtol=1e-6)

    def test_power_integrating_factor(self):
        spec = ModelSpec(
            1, DampingSpec.power(2), NonlinearitySpec.power(1, 3), t0=2
        )
        assert np.allclose(model.mu_numeric(spec, [2.0, 4.0]), [1.0, 4.0])

    def test_bindings(self):
        spec = ModelSpec(1, DampingSpec.power(jetcalc.m), NonlinearitySpec.power(1, 3))
        damping = model.damping_function(spec, {"m": 2})
        assert damping(4.0) == pytest.approx(0.5)
        with pytest.raises(ValueError, match="bind"):
            model.damping_function(spec)

    def test_logarithmic_floor(self):
        spec = ModelSpec(
            1, DampingSpec.none(), NonlinearitySpec.logarithmic(0, 1)
        )
        force = model.force_function(spec)
        values = force(np.array([0.0, 1.0, -np.e]))
        assert np.allclose(values, [0.0, 0.0, -np.e])

    def test_potential_is_antiderivative(self):
        spec = ModelSpec(
            1, DampingSpec.none(), NonlinearitySpec.exponential(2, sp.Rational(1, 2))
        )
        potential = model.potential_function(spec)
        force = model.force_function(spec)
        u = np.linspace(-1, 1, 11)
        step = 1e-6
        derivative = (potential(u + step) - potential(u - step)) / (2 * step)
        assert np.allclose(derivative, force(u), rtol=1e-6)

    def test_generic_is_symbolic_only(self):
        spec = ModelSpec(1, DampingSpec.none(), NonlinearitySpec.generic())
        with pytest.raises(ValueError):
            model.force_function(spec)
