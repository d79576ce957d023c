import pytest
import sympy as sp

from noethercheck import currents
from noethercheck import jetcalc
from noethercheck import model
from noethercheck import symmetry
from noethercheck.currents import (
    CurrentSet,
    InapplicableModelError,
    NotVariationalError,
    current_to_dict,
    multiplier_check,
    noether_current,
    null_difference,
    transcribed_catalog,
    transcribed_current,
    verify_identity,
)
from noethercheck.model import DampingSpec, ModelSpec, NonlinearitySpec

m = jetcalc.m


class TestNoetherCurrent:
    @classmethod
    def setup_class(self):
        self.spec = ModelSpec(
            2, DampingSpec.power(m), NonlinearitySpec.power(jetcalc.f0, jetcalc.p)
        )
        self.space = self.spec.space

    def test_translation_current_satisfies_the_identity(self):
        current = noether_current(symmetry.translation(1, self.space), self.spec)
        assert current.sign == 1
        assert current.verified
        assert multiplier_check(current)

    def test_rotation_current(self):
        current = noether_current(symmetry.rotation(1, 2, self.space), self.spec)
        assert current.sign == 1

    def test_not_variational(self):
        with pytest.raises(NotVariationalError) as error:
            noether_current(symmetry.boost(1, self.space), self.spec)
        assert error.value.obstruction != 0

    def test_divergence_symmetry_needs_its_potential(self):
        spec = ModelSpec(3, DampingSpec.none(), NonlinearitySpec.power(1, 3))
        space = spec.space
        field = symmetry.conformal_time(-2, space)
        with pytest.raises(NotVariationalError, match="potential"):
            noether_current(field, spec)
        potential = (-space.u ** 2,) + (sp.Integer(0),) * 3
        current = noether_current(field, spec, potential=potential)
        assert current.sign == 1

    def test_broken_current_fails(self):
        current = noether_current(symmetry.translation(1, self.space), self.spec)
        broken = CurrentSet(
            current.density + self.space.u,
            current.flux,
            current.generator,
            self.spec,
            current.multiplier,
        )
        check = verify_identity(broken)
        assert not check.passed
        assert check.sign is None
        assert check.residual != 0


class TestTranscribedFamilies:
    @classmethod
    def setup_class(self):
        self.special = ModelSpec(
            2,
            DampingSpec.power(m),
            NonlinearitySpec.power(1, model.special_exponent(2, m)),
        )
        self.undamped = ModelSpec(2, DampingSpec.none(), NonlinearitySpec.power(1, 3))

    def test_linear_momentum(self):
        current = transcribed_current("linear_momentum", self.special, 1)
        assert current.reading == "negated flux"
        assert current.sign == -1

    def test_angular_momentum(self):
        current = transcribed_current("angular_momentum", self.special, 1, 2)
        assert current.reading == "kinetic trace"
        assert current.sign == -1

    def test_dilation(self):
        current = transcribed_current("dilation", self.special)
        assert current.reading == "spatial momentum sign"
        assert current.sign == 1

    def test_conformal(self):
        current = transcribed_current("conformal", self.special, 2)
        assert current.reading == "horizontal coefficient"
        assert current.sign == 1
        assert multiplier_check(current)

    def test_energy(self):
        current = transcribed_current("energy", self.undamped)
        assert current.sign == -1
        with pytest.raises(InapplicableModelError):
            transcribed_current("energy", self.special)

    def test_dilation_needs_the_special_exponent(self):
        with pytest.raises(InapplicableModelError):
            transcribed_current("dilation", self.undamped)

    def test_exponential_conformal(self):
        spec = ModelSpec(2, DampingSpec.power(-1), NonlinearitySpec.exponential(1, -1))
        current = transcribed_current("conformal_exponential", spec, 1)
        assert current.verified
        assert current.reading.startswith("horizontal coefficient")
        other = ModelSpec(2, DampingSpec.power(1), NonlinearitySpec.exponential(1, 1))
        with pytest.raises(InapplicableModelError):
            transcribed_current("conformal_exponential", other, 1)

    def test_index_checks(self):
        with pytest.raises(ValueError):
            transcribed_current("linear_momentum", self.undamped, 3)
        with pytest.raises(ValueError):
            transcribed_current("angular_momentum", self.undamped, 2, 1)
        with pytest.raises(ValueError):
            transcribed_current("vorticity", self.undamped)

    def test_tabulated_damping_is_inapplicable(self):
        spec = ModelSpec(
            1, DampingSpec.tabulated([1, 2], [0, 0]), NonlinearitySpec.power(1, 3)
        )
        with pytest.raises(InapplicableModelError):
            transcribed_current("linear_momentum", spec, 1)


@pytest.mark.parametrize("n", [2, 3, pytest.param(4, marks=pytest.mark.slow)])
class TestSymbolicDimensions:
    def special(self, n):
        return ModelSpec(
            n,
            DampingSpec.power(m),
            NonlinearitySpec.power(1, model.special_exponent(n, m)),
        )

    def test_scaling_currents(self, n):
        spec = self.special(n)
        for family, indices in (
            ("linear_momentum", (n,)),
            ("angular_momentum", (1, n)),
            ("dilation", ()),
            ("conformal", (n,)),
        ):
            current = transcribed_current(family, spec, *indices)
            assert current.verified, family
            assert multiplier_check(current), family

    def test_generated_dilation_current(self, n):
        spec = self.special(n)
        field = symmetry.dilation(model.dilation_weight(n, m), spec.space)
        current = noether_current(field, spec)
        assert current.verified
        assert multiplier_check(current)
        assert null_difference(current, transcribed_current("dilation", spec))

    def test_exponential_currents(self, n):
        spec = ModelSpec(
            n, DampingSpec.power(1 - n), NonlinearitySpec.exponential(1, 1 - n)
        )
        current = transcribed_current("conformal_exponential", spec, 1)
        assert current.verified
        assert multiplier_check(current)
        generated = noether_current(
            symmetry.dilation_exponential(1 - n, spec.space), spec
        )
        assert generated.verified
        assert multiplier_check(generated)


class TestCrossChecks:
    @classmethod
    def setup_class(self):
        self.spec = ModelSpec(1, DampingSpec.none(), NonlinearitySpec.power(1, 3))
        self.space = self.spec.space

    def test_transcribed_and_generated_currents_agree(self):
        generated = noether_current(symmetry.translation(1, self.space), self.spec)
        transcribed = transcribed_current("linear_momentum", self.spec, 1)
        assert null_difference(generated, transcribed)
        energy = noether_current(symmetry.translation(0, self.space), self.spec)
        assert null_difference(energy, transcribed_current("energy", self.spec))

    def test_different_currents_differ(self):
        momentum = noether_current(symmetry.translation(1, self.space), self.spec)
        energy = noether_current(symmetry.translation(0, self.space), self.spec)
        assert not null_difference(momentum, energy)

    def test_catalog_skips_inapplicable_families(self):
        catalog = transcribed_catalog(self.spec)
        families = {c.family for c in catalog}
        assert families == {"linear_momentum", "energy"}
        assert all(c.verified for c in catalog)

    def test_report(self):
        report = current_to_dict(transcribed_current("energy", self.spec))
        assert report["sign"] == -1
        assert report["verified"]
        assert len(report["flux"]) == 1
        assert report["density"].startswith("(+")
        assert "latex" in report

    def test_families(self):
        assert "conformal_exponential" in currents.FAMILIES
