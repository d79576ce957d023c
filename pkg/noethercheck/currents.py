"""
Noether currents of variational generators and the characteristic-form
identity

    D_t I_0 + sum_j D_j I_j = s mu Q E,    s = +1 or -1,

with Q the characteristic of the generator and E the residual of the model.
Currents built from I_a = xi_a L + Q dL/du_a - B_a satisfy it with s = +1.

The module also carries transcriptions of the classical current families
(linear and angular momentum, dilation, conformal, exponential conformal and
energy). Each family lists its printed reading followed by alternative
readings; the first reading that passes the identity is adopted.
"""

import logging
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import sympy as sp

from noethercheck import jetcalc
from noethercheck import model
from noethercheck import symmetry
from noethercheck.sexpr import to_sexpr


class NotVariationalError(ValueError):
    """Raised for generators without a Noether current; carries the obstruction."""

    def __init__(self, message, obstruction=None):
        super().__init__(message)
        self.obstruction = obstruction


class InapplicableModelError(ValueError):
    pass


FAMILIES = (
    "linear_momentum",
    "angular_momentum",
    "dilation",
    "conformal",
    "conformal_exponential",
    "energy",
)

IdentityCheck = namedtuple("IdentityCheck", ["passed", "sign", "residual"])


@dataclass(frozen=True)
class CurrentSet:
    """
    Conserved density and flux of one generator.

    `sign` is the s of the characteristic-form identity, None while the set
    has not passed :py:func:`verify_identity`. `reading` names the
    transcription reading, "generated" for currents built by
    :py:func:`noether_current`.
    """

    density: object
    flux: tuple
    generator: str
    spec: model.ModelSpec
    multiplier: object
    sign: int = None
    reading: str = "generated"
    family: str = "noether"

    @property
    def components(self):
        return (self.density,) + tuple(self.flux)

    @property
    def verified(self):
        return self.sign is not None


def verify_identity(current):
    """
    Checks D_t I_0 + Div I - s mu Q E = 0 for s = +1 and s = -1.

    Parameters
    ----------
    current: :class:`CurrentSet`

    Returns
    -------
    IdentityCheck
        `passed`, the sign s that works (None if neither does) and the
        canonical residual (the one for s = +1 on failure)
    """
    space = current.spec.space
    divergence = jetcalc.divergence(current.components, space)
    source = jetcalc.canonical(current.multiplier * model.residual(current.spec))
    residual = None
    for sign in (1, -1):
        rest = jetcalc.canonical(divergence - sign * source)
        if rest == 0:
            logging.info(
                f"The {current.family} current of {current.generator} "
                f"({current.reading}) satisfies the identity with s = {sign}."
            )
            return IdentityCheck(True, sign, rest)
        if residual is None:
            residual = rest
    logging.warning(
        f"The {current.family} current of {current.generator} "
        f"({current.reading}) fails the identity."
    )
    return IdentityCheck(False, None, residual)


def multiplier_check(current):
    """True iff E_u(mu Q E) vanishes identically."""
    product = jetcalc.canonical(current.multiplier * model.residual(current.spec))
    return jetcalc.euler(product, current.spec.space) == 0


def noether_current(vector_field, spec, verdict=None, potential=None):
    """
    Noether current I_a = xi_a L + Q dL/du_a - B_a of a variational generator.

    Parameters
    ----------
    vector_field: :class:`~.jetcalc.VectorField`
    spec: :class:`~.model.ModelSpec`
    verdict: :class:`~.symmetry.VariationalVerdict` or None
        computed with :py:func:`~.symmetry.variational_test` if not given
    potential: tuple or None
        divergence potential B, used when `verdict` is computed here

    Returns
    -------
    :class:`CurrentSet`
        with the sign found by :py:func:`verify_identity`
    """
    space = spec.space
    lagrangian = model.lagrangian(spec)
    if verdict is None:
        verdict = symmetry.variational_test(vector_field, lagrangian, space, potential)
    if not verdict.is_variational:
        raise NotVariationalError(
            f"The generator {vector_field.name} is not variational for this "
            f"model; its obstruction is {verdict.obstruction}.",
            verdict.obstruction,
        )
    if verdict.status == "divergence" and verdict.potential is None:
        raise NotVariationalError(
            f"The generator {vector_field.name} is a divergence symmetry without "
            f"a verified potential B. Please provide the potential.",
            verdict.obstruction,
        )
    zero = (sp.Integer(0),) * (space.n + 1)
    potential = verdict.potential if verdict.potential is not None else zero
    characteristic = jetcalc.characteristic(vector_field, space)
    components = [
        jetcalc.canonical(
            xi_a * lagrangian
            + characteristic * sp.diff(lagrangian, space.jet(a))
            - potential[a]
        )
        for a, xi_a in enumerate(vector_field.xi)
    ]
    current = CurrentSet(
        components[0],
        tuple(components[1:]),
        vector_field.name,
        spec,
        jetcalc.canonical(model.mu(spec) * characteristic),
    )
    check = verify_identity(current)
    return replace(current, sign=check.sign)


def _delta(i, j):
    return sp.Integer(1 if i == j else 0)


def _symbolic_mu(spec, family):
    try:
        return model.mu(spec)
    except model.SymbolicDampingError:
        raise InapplicableModelError(
            f"The {family} currents need a symbolic damping law, the model has "
            f"{spec.damping.kind} damping."
        )


def _check_index(k, space, family):
    if k not in range(1, space.n + 1):
        raise ValueError(
            f"The {family} index {k} is out of range. Please choose an index "
            f"between 1 and {space.n}."
        )


def _is_undamped(spec):
    damping = spec.damping
    if damping.kind == "none":
        return True
    if damping.kind == "power":
        return jetcalc.is_zero(damping.m)
    if damping.kind == "constant":
        return jetcalc.is_zero(damping.a0)
    return False


def _linear_momentum(spec, k):
    space = spec.space
    _check_index(k, space, "linear momentum")
    mu = _symbolic_mu(spec, "linear momentum")
    lagrangian0 = model.undamped_lagrangian(spec)
    u_k = space.jet(k)
    density = mu * u_k * space.u_t
    flux = tuple(
        mu * (u_k * space.jet(j) + lagrangian0 * _delta(j, k))
        for j in range(1, space.n + 1)
    )
    readings = [
        ("printed", density, flux),
        ("negated flux", density, tuple(-c for c in flux)),
    ]
    return symmetry.translation(k, space), readings


def _angular_momentum(spec, k, l):
    space = spec.space
    _check_index(k, space, "angular momentum")
    _check_index(l, space, "angular momentum")
    if k >= l:
        raise ValueError(
            f"Angular momentum currents are indexed by k < l, got k = {k}, l = {l}."
        )
    mu = _symbolic_mu(spec, "angular momentum")
    x_k, x_l = space.coordinates[k], space.coordinates[l]
    u_k, u_l = space.jet(k), space.jet(l)
    potential = model.potential(spec)
    gradient_squared = sp.Add(*(g ** 2 for g in space.gradient))

    def flux(trace):
        def phi(j, i):
            return (
                space.jet(j) * space.jet(i)
                - (gradient_squared - trace) / 2 * _delta(j, i)
            )

        return tuple(
            mu
            * (
                x_l * phi(j, k)
                - x_k * phi(j, l)
                + (_delta(j, l) * x_k - _delta(j, k) * x_l) * potential
            )
            for j in range(1, space.n + 1)
        )

    density = mu * (x_k * u_l - x_l * u_k) * space.u_t
    readings = [
        ("printed", density, flux(0)),
        ("kinetic trace", density, flux(space.u_t ** 2)),
    ]
    return symmetry.rotation(k, l, space), readings


def _require_special_power(spec, family):
    if spec.nonlinearity.kind != "power" or spec.damping.kind not in (
        "none",
        "power",
    ):
        raise InapplicableModelError(
            f"The {family} currents need f = f0 u^p with a = m/t or a = 0."
        )
    if not model.has_special_exponent(spec):
        raise InapplicableModelError(
            f"The {family} currents need p = (n+3+m)/(n-1+m), the model has "
            f"p = {spec.nonlinearity.p}."
        )


def _dilation(spec):
    space = spec.space
    _require_special_power(spec, "dilation")
    mu = model.mu(spec)
    weight = model.dilation_weight(spec.n, spec.damping_exponent)
    vector_field = symmetry.dilation(weight, space)
    characteristic = jetcalc.characteristic(vector_field, space)
    lagrangian0 = model.undamped_lagrangian(spec)
    density = mu * (space.t * lagrangian0 + characteristic * space.u_t)

    def flux(sign):
        return tuple(
            mu * (x_j * lagrangian0 + sign * characteristic * u_j)
            for x_j, u_j in zip(space.x, space.gradient)
        )

    readings = [
        ("printed", density, flux(1)),
        ("spatial momentum sign", density, flux(-1)),
    ]
    return vector_field, readings


def _conformal_densities(vector_field, k, mu, lagrangian0, characteristic, space):
    x_k = space.coordinates[k]
    return [
        ("printed", mu * (2 * x_k * lagrangian0 - characteristic * space.jet(k))),
        ("time index", mu * (2 * x_k * lagrangian0 - characteristic * space.u_t)),
        (
            "horizontal coefficient",
            mu * (vector_field.xi[0] * lagrangian0 + characteristic * space.u_t),
        ),
    ]


def _conformal(spec, k):
    space = spec.space
    _check_index(k, space, "conformal")
    _require_special_power(spec, "conformal")
    mu = model.mu(spec)
    factor = model.conformal_factor(spec.n, spec.damping_exponent)
    vector_field = symmetry.conformal_space(k, factor, space)
    characteristic = jetcalc.characteristic(vector_field, space)
    lagrangian0 = model.undamped_lagrangian(spec)
    flux = tuple(
        mu
        * (
            lagrangian0 * vector_field.xi[j]
            - characteristic * space.jet(j)
            + factor / 2 * space.u ** 2 * _delta(j, k)
        )
        for j in range(1, space.n + 1)
    )
    readings = [
        (name, density, flux)
        for name, density in _conformal_densities(
            vector_field, k, mu, lagrangian0, characteristic, space
        )
    ]
    return vector_field, readings


def _conformal_exponential(spec, k):
    space = spec.space
    _check_index(k, space, "exponential conformal")
    m = spec.damping_exponent
    if spec.nonlinearity.kind != "exponential" or m is None:
        raise InapplicableModelError(
            "The exponential conformal currents need f = f0 exp(rate u) with "
            "a = m/t or a = 0."
        )
    if not jetcalc.is_zero(m - (1 - spec.n)):
        raise InapplicableModelError(
            f"The exponential conformal currents need m = 1 - n = {1 - spec.n}, "
            f"the model has m = {m}."
        )
    mu = model.mu(spec)
    rate = spec.nonlinearity.rate
    vector_field = symmetry.conformal_space_exponential(k, rate, space)
    characteristic = jetcalc.characteristic(vector_field, space)
    lagrangian0 = model.undamped_lagrangian(spec)

    def flux(coefficient):
        return tuple(
            mu
            * (
                lagrangian0 * vector_field.xi[j]
                - characteristic * space.jet(j)
                - coefficient * space.u * _delta(j, k)
            )
            for j in range(1, space.n + 1)
        )

    densities = _conformal_densities(
        vector_field, k, mu, lagrangian0, characteristic, space
    )
    readings = []
    # 4/(1-n) has a pole in one dimension
    if spec.n != 1:
        printed = flux(sp.Rational(4, 1 - spec.n))
        readings += [(name, density, printed) for name, density in densities]
    readings.append(
        ("horizontal coefficient, rate potential", densities[-1][1], flux(4 / rate))
    )
    return vector_field, readings


def _energy(spec):
    space = spec.space
    if not _is_undamped(spec):
        raise InapplicableModelError(
            "The energy is conserved only without damping; with a(t) > 0 it "
            "decays. Please use diagnostics.energy_decay_check."
        )
    density = model.energy_density(spec)
    flux = tuple(-space.u_t * u_j for u_j in space.gradient)
    return symmetry.translation(0, space), [("energy functional", density, flux)]


_TRANSCRIPTIONS = {
    "linear_momentum": _linear_momentum,
    "angular_momentum": _angular_momentum,
    "dilation": _dilation,
    "conformal": _conformal,
    "conformal_exponential": _conformal_exponential,
    "energy": _energy,
}


def transcribed_current(family, spec, *indices):
    """
    Transcribed current of a classical family, verified reading by reading.

    Parameters
    ----------
    family: str
        one of :py:data:`FAMILIES`
    spec: :class:`~.model.ModelSpec`
    indices: int
        k for momentum and conformal families, k < l for angular momentum

    Returns
    -------
    :class:`CurrentSet`
        the first reading that passes :py:func:`verify_identity`; if none
        does, the printed reading with sign None

    Raises
    ------
    InapplicableModelError
        if the family does not apply to `spec`
    """
    if family not in _TRANSCRIPTIONS:
        raise ValueError(
            f"The current family {family} is not recognized. Please choose one "
            f"of {FAMILIES}."
        )
    vector_field, readings = _TRANSCRIPTIONS[family](spec, *indices)
    space = spec.space
    multiplier = jetcalc.canonical(
        model.mu(spec) * jetcalc.characteristic(vector_field, space)
    )
    printed = None
    for name, density, flux in readings:
        current = CurrentSet(
            jetcalc.canonical(density),
            tuple(jetcalc.canonical(c) for c in flux),
            vector_field.name,
            spec,
            multiplier,
            reading=name,
            family=family,
        )
        check = verify_identity(current)
        if check.passed:
            return replace(current, sign=check.sign)
        if printed is None:
            printed = current
    logging.warning(
        f"No reading of the {family} current of {vector_field.name} satisfies "
        f"the identity."
    )
    return printed


def catalog_requests(n):
    """(family, indices) of every transcribed current in n dimensions."""
    requests = [("linear_momentum", (k,)) for k in range(1, n + 1)]
    requests += [
        ("angular_momentum", (k, l))
        for k in range(1, n + 1)
        for l in range(k + 1, n + 1)
    ]
    requests.append(("dilation", ()))
    requests += [("conformal", (k,)) for k in range(1, n + 1)]
    requests += [("conformal_exponential", (k,)) for k in range(1, n + 1)]
    requests.append(("energy", ()))
    return requests


def _transcribe(arguments):
    family, indices, spec = arguments
    try:
        return transcribed_current(family, spec, *indices)
    except InapplicableModelError as error:
        logging.info(f"Skipping the {family} current {indices}: {error}")
        return None


def transcribed_catalog(spec, jobs=1):
    """
    All transcribed currents that apply to `spec`, each passed through
    :py:func:`verify_identity`. Inapplicable families are skipped.

    Parameters
    ----------
    spec: :class:`~.model.ModelSpec`
    jobs: int
        number of worker processes; results keep the catalog order

    Returns
    -------
    list of :class:`CurrentSet`
    """
    arguments = [(family, indices, spec) for family, indices in catalog_requests(spec.n)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_transcribe, arguments))
    else:
        results = [_transcribe(a) for a in arguments]
    currents = [c for c in results if c is not None]
    failed = [c.generator for c in currents if not c.verified]
    logging.info(
        f"{len(currents) - len(failed)} of {len(currents)} transcribed currents "
        f"verify for n = {spec.n}."
    )
    return currents


def null_difference(first, second):
    """
    True iff the sign-normalized currents differ by a null current, i.e.
    Div(s1 I - s2 J) vanishes identically. Unverified sets count with s = 1.
    """
    if first.generator != second.generator:
        logging.warning(
            f"Comparing currents of different generators {first.generator} and "
            f"{second.generator}."
        )
    if first.spec.n != second.spec.n:
        raise ValueError(
            f"The currents live in {first.spec.n} and {second.spec.n} space "
            f"dimensions."
        )
    s1 = first.sign or 1
    s2 = second.sign or 1
    difference = [
        s1 * a - s2 * b for a, b in zip(first.components, second.components)
    ]
    return jetcalc.divergence(difference, first.spec.space) == 0


def current_to_dict(current):
    """JSON-ready form of a current with s-expressions and LaTeX renderings."""
    return {
        "generator": current.generator,
        "family": current.family,
        "reading": current.reading,
        "sign": current.sign,
        "verified": current.verified,
        "density": to_sexpr(current.density),
        "flux": [to_sexpr(c) for c in current.flux],
        "multiplier": to_sexpr(current.multiplier),
        "latex": {
            "density": jetcalc.render(current.density),
            "flux": [jetcalc.render(c) for c in current.flux],
        },
    }
