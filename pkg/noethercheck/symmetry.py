"""
Catalog of candidate point symmetry generators and the decision procedure
for variational and divergence symmetries of L = mu L0.

A generator v is tested with the infinitesimal criterion

    pr v(L) + L Div(xi) = Div(B).

The left side is the remainder R; v is variational if R = 0, a divergence
symmetry if E_u(R) = 0 and not variational otherwise.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import sympy as sp

from noethercheck import jetcalc
from noethercheck import model
from noethercheck.jetcalc import VectorField
from noethercheck.sexpr import to_sexpr


class NonPolynomialFactorError(ValueError):
    pass


STATUSES = ("variational", "divergence", "not-variational")


@dataclass(frozen=True)
class CatalogEntry:
    """A generator with its family name, factors and cataloged potential B."""

    field: VectorField
    family: str
    factors: dict = field(default_factory=dict)
    potential: tuple = None


@dataclass(frozen=True)
class VariationalVerdict:
    generator: str
    status: str
    obstruction: object
    remainder: object
    factors: dict = field(default_factory=dict)
    potential: tuple = None
    potential_verified: bool = False

    @property
    def is_variational(self):
        return self.status != "not-variational"


def _unit(a, space):
    return tuple(sp.Integer(1 if b == a else 0) for b in range(space.n + 1))


def translation(a, space):
    """P_a = d/dx_a, with P_t = d/dt."""
    name = "P_t" if a == 0 else f"P_{a}"
    return VectorField(_unit(a, space), 0, name)


def rotation(k, l, space):
    """J_kl = x_k d/dx_l - x_l d/dx_k."""
    x = space.coordinates
    xi = [sp.Integer(0)] * (space.n + 1)
    xi[l] = x[k]
    xi[k] = -x[l]
    return VectorField(tuple(xi), 0, f"J_{k}{l}")


def boost(k, space):
    """K_k = J_k0 = t d/dx_k + x_k d/dt."""
    x = space.coordinates
    xi = [sp.Integer(0)] * (space.n + 1)
    xi[0] = x[k]
    xi[k] = space.t
    return VectorField(tuple(xi), 0, f"K_{k}")


def dilation(weight, space):
    """D = t d/dt + x_k d/dx_k + d u d/du."""
    return VectorField(space.coordinates, weight * space.u, "D")


def dilation_exponential(rate, space):
    """D = t d/dt + x_k d/dx_k - (2/rate) d/du."""
    return VectorField(space.coordinates, -2 / sp.sympify(rate), "D_exp")


def _radius_squared(space):
    return sp.Add(*(x ** 2 for x in space.x))


def conformal_time(weight, space):
    """C_0 = (t^2 + r^2) d/dt + 2 t x_l d/dx_l + w t u d/du."""
    t = space.t
    xi = (t ** 2 + _radius_squared(space),) + tuple(2 * t * x for x in space.x)
    return VectorField(xi, weight * t * space.u, "C_0")


def _conformal_space_xi(k, space):
    t = space.t
    x = space.coordinates
    xi = [2 * t * x[k]]
    for l in range(1, space.n + 1):
        value = 2 * x[k] * x[l]
        if l == k:
            value += t ** 2 - _radius_squared(space)
        xi.append(value)
    return tuple(xi)


def conformal_space(k, factor, space):
    """C_k = 2 t x_k d/dt + 2 x_k x_l d/dx_l + (t^2 - r^2) d/dx_k + q x_k u d/du."""
    eta = factor * space.coordinates[k] * space.u
    return VectorField(_conformal_space_xi(k, space), eta, f"C_{k}")


def conformal_space_exponential(k, rate, space):
    """C_k with the vertical part -(4/rate) x_k d/du."""
    eta = -4 / sp.sympify(rate) * space.coordinates[k]
    return VectorField(_conformal_space_xi(k, space), eta, f"C_{k}_exp")


def _component(index, value, space):
    return tuple(value if a == index else sp.Integer(0) for a in range(space.n + 1))


def generator_catalog(spec):
    """
    Candidate generators for `spec`.

    Translations, rotations and boosts are always listed. For a power
    interaction with a = m/t (or a = 0) the dilation and the conformal
    generators follow with d = (1-m-n)/2 and q = 1-n-m; for an exponential
    interaction the exponential dilation and conformal generators follow.
    Divergence potentials B are attached where they are known.

    Parameters
    ----------
    spec: :class:`~.model.ModelSpec`

    Returns
    -------
    list of :class:`CatalogEntry`
    """
    space = spec.space
    n = spec.n
    entries = [CatalogEntry(translation(a, space), "translation") for a in range(n + 1)]
    for k in range(1, n + 1):
        for l in range(k + 1, n + 1):
            entries.append(CatalogEntry(rotation(k, l, space), "rotation"))
    entries += [CatalogEntry(boost(k, space), "boost") for k in range(1, n + 1)]

    m = spec.damping_exponent
    if m is None:
        return entries
    mu = model.mu(spec)
    u = space.u
    kind = spec.nonlinearity.kind
    if kind == "power" and not jetcalc.is_zero(n - 1 + m):
        weight = model.dilation_weight(n, m)
        factor = model.conformal_factor(n, m)
        entries.append(CatalogEntry(dilation(weight, space), "dilation", {"d": weight}))
        entries.append(
            CatalogEntry(
                conformal_time(factor, space),
                "conformal_time",
                {"w": factor},
                _component(0, factor * mu * u ** 2 / 2, space),
            )
        )
        for k in range(1, n + 1):
            entries.append(
                CatalogEntry(
                    conformal_space(k, factor, space),
                    "conformal_space",
                    {"q": factor},
                    _component(k, -factor * mu * u ** 2 / 2, space),
                )
            )
    if kind == "exponential":
        rate = spec.nonlinearity.rate
        entries.append(
            CatalogEntry(dilation_exponential(rate, space), "dilation_exponential")
        )
        for k in range(1, n + 1):
            entries.append(
                CatalogEntry(
                    conformal_space_exponential(k, rate, space),
                    "conformal_space_exponential",
                    {},
                    _component(k, 4 / rate * mu * u, space),
                )
            )
    return entries


def remainder(vector_field, lagrangian, space):
    """R = pr v(L) + L Div(xi)."""
    return jetcalc.canonical(
        jetcalc.prolonged_action(vector_field, lagrangian, space)
        + lagrangian * jetcalc.divergence_of_vector_field(vector_field, space)
    )


def variational_test(vector_field, lagrangian, space, potential=None, factors=None):
    """
    Decides whether `vector_field` is a variational or divergence symmetry.

    Parameters
    ----------
    vector_field: :class:`~.jetcalc.VectorField`
    lagrangian: sympy expression
        first order Lagrangian L
    space: :class:`~.jetcalc.JetSpace`
    potential: tuple or None
        cataloged divergence potential B; checked against R = Div(B)
    factors: dict or None
        factor values recorded in the verdict

    Returns
    -------
    :class:`VariationalVerdict`
    """
    if space.order(lagrangian) > 1:
        raise jetcalc.JetOrderError(
            "The variational test needs a first order Lagrangian."
        )
    rest = remainder(vector_field, lagrangian, space)
    if rest == 0:
        status, obstruction = "variational", sp.Integer(0)
    else:
        test = jetcalc.is_total_divergence(rest, space)
        obstruction = test.obstruction
        status = "divergence" if test.passed else "not-variational"
    verified = False
    if potential is not None and status != "not-variational":
        verified = jetcalc.is_zero(rest - jetcalc.divergence(potential, space))
        if status == "divergence" and not verified:
            logging.warning(
                f"The cataloged potential of {vector_field.name} does not "
                f"reproduce the remainder; the Noether current is not available."
            )
    logging.info(f"The generator {vector_field.name} is {status}.")
    return VariationalVerdict(
        vector_field.name,
        status,
        obstruction,
        rest,
        dict(factors or {}),
        potential if verified else None,
        verified,
    )


def _evaluate_entry(arguments):
    entry, lagrangian, space = arguments
    return variational_test(
        entry.field, lagrangian, space, entry.potential, entry.factors
    )


def list_symmetries(spec, jobs=1):
    """
    Evaluates the whole generator catalog of `spec`.

    Parameters
    ----------
    spec: :class:`~.model.ModelSpec`
    jobs: int
        number of worker processes; results keep the catalog order

    Returns
    -------
    list of (:class:`CatalogEntry`, :class:`VariationalVerdict`)
    """
    lagrangian = model.lagrangian(spec)
    entries = generator_catalog(spec)
    arguments = [(entry, lagrangian, spec.space) for entry in entries]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            verdicts = list(executor.map(_evaluate_entry, arguments))
    else:
        verdicts = [_evaluate_entry(a) for a in arguments]
    count = sum(v.is_variational for v in verdicts)
    logging.info(
        f"{count} of {len(entries)} cataloged generators are variational for "
        f"n = {spec.n}."
    )
    return list(zip(entries, verdicts))


def solve_factor(vector_field, lagrangian, space, unknown, constrained=()):
    """
    Values of a free factor that make `vector_field` a divergence symmetry.

    The Euler obstruction E_u(R) is split into its canonical coefficients;
    their numerators must vanish. They have to be polynomials of degree <= 2
    in the unknowns. Every candidate solution is substituted back and kept
    only if the obstruction vanishes identically.

    Parameters
    ----------
    vector_field: :class:`~.jetcalc.VectorField`
        generator containing the unknown
    lagrangian: sympy expression
        may contain the unknown and the constrained symbols
    space: :class:`~.jetcalc.JetSpace`
    unknown: :sympy:`Symbol`
    constrained: tuple of :sympy:`Symbol`
        further symbols that are solved for together with `unknown`

    Returns
    -------
    list of dict
        symbol -> exact value; empty if no value works, `[{}]` if the
        obstruction vanishes for every value
    """
    unknowns = (unknown,) + tuple(constrained)
    obstruction = jetcalc.euler(remainder(vector_field, lagrangian, space), space)
    if obstruction == 0:
        return [{}]
    numerators = []
    denominators = []
    for coefficient in jetcalc.coefficients(obstruction).values():
        numerator, denominator = sp.fraction(sp.cancel(coefficient))
        if not numerator.is_polynomial(*unknowns):
            raise NonPolynomialFactorError(
                f"The obstruction of {vector_field.name} depends on "
                f"{unknowns} through {numerator}, which is not polynomial."
            )
        if sp.Poly(numerator, *unknowns).total_degree() > 2:
            raise NonPolynomialFactorError(
                f"The obstruction of {vector_field.name} has degree above 2 in "
                f"{unknowns}."
            )
        numerators.append(numerator)
        denominators.append(denominator)
    candidates = sp.solve(numerators, unknowns, dict=True)
    solutions = []
    for candidate in candidates:
        values = {s: sp.cancel(v) for s, v in candidate.items()}
        if any(jetcalc.is_zero(den.subs(values)) for den in denominators):
            continue
        rest = remainder(
            vector_field.subs(values), jetcalc.canonical(lagrangian.subs(values)), space
        )
        if jetcalc.euler(rest, space) == 0:
            solutions.append(values)
    logging.info(f"Solved {unknown} for {vector_field.name}: {solutions}")
    return solutions


def verdict_to_dict(verdict):
    """JSON-ready form of a verdict."""
    report = {
        "generator": verdict.generator,
        "status": verdict.status,
        "factors": {k: str(v) for k, v in verdict.factors.items()},
        "potential_verified": verdict.potential_verified,
    }
    if verdict.obstruction != 0:
        report["obstruction"] = to_sexpr(verdict.obstruction)
    return report
