"""
Exact calculus on the jet space of a scalar field u(t, x_1, ..., x_n).

Expressions are plain sympy expressions built from

 * the independent variables t, x1, ..., xn,
 * the jet coordinates u, u_t, u_x1, u_tt, u_tx1, u_x1x2, ... (order <= 3),
 * parameter symbols (m, f0, kappa, sigma, sigma0, d, q, p, a0, ...),
 * the opaque interaction atoms Potential(u) and Force(u).

The canonical form produced by :py:func:`canonical` is a sum of terms
`coefficient * atoms` where the coefficient is a reduced ratio of polynomials
in the parameters and the atoms are products of powers of jet-space objects
with merged, reduced exponents. Two expressions are equal iff the canonical
form of their difference is zero.
"""

import functools
import itertools
import re
from collections import namedtuple
from dataclasses import dataclass

import sympy as sp

from noethercheck import constants


class JetOrderError(ValueError):
    pass


_SPACE_NAME = re.compile(r"^(t|x\d+|u(_(t|x\d+)+)?)$")
_JET_NAME = re.compile(r"^u_(t|x\d+)+$")

PARAMETERS = {}


def parameter(name):
    """
    Returns the parameter symbol `name`, registering it on first use.

    Parameter names must not collide with the names of jet-space symbols.

    Parameters
    ----------
    name: str
        name of the parameter, e.g. "m" or "f0"

    Returns
    -------
    :sympy:`Symbol`
    """
    if name in PARAMETERS:
        return PARAMETERS[name]
    if _SPACE_NAME.match(name):
        raise ValueError(
            f"The parameter name {name} is reserved for jet-space symbols. "
            f"Please choose a name that is not t, x<k> or u<...>."
        )
    symbol = sp.Symbol(name, real=True)
    PARAMETERS[name] = symbol
    return symbol


m = parameter("m")
f0 = parameter("f0")
kappa = parameter("kappa")
sigma = parameter("sigma")
sigma0 = parameter("sigma0")
d = parameter("d")
q = parameter("q")
p = parameter("p")
a0 = parameter("a0")
rate = parameter("rate")

t = sp.Symbol("t", positive=True)
u = sp.Symbol("u", positive=True)


class Potential(sp.Function):
    """Opaque interaction potential F(u); its derivative is Force(u)."""

    nargs = 1

    def fdiff(self, argindex=1):
        return Force(self.args[0])


class Force(sp.Function):
    """Opaque interaction term f(u) = F'(u)."""

    nargs = 1


def is_space_symbol(symbol):
    return isinstance(symbol, sp.Symbol) and bool(_SPACE_NAME.match(symbol.name))


def is_parameter_expression(expr):
    return not any(is_space_symbol(s) for s in expr.free_symbols)


class JetSpace:
    """
    Coordinates of the jet space over (t, x1, ..., xn) up to order 3.

    Variable index 0 is t, index k is x_k. A multi-index is a sorted tuple of
    variable indices, e.g. (0, 1) for u_tx1.
    """

    def __init__(self, n):
        if n not in constants.SYMBOLIC_DIMENSIONS:
            raise ValueError(
                f"The spatial dimension {n} is not supported. Please choose one "
                f"of {constants.SYMBOLIC_DIMENSIONS}."
            )
        self.n = n
        self.t = t
        self.x = tuple(sp.Symbol(f"x{k}", real=True) for k in range(1, n + 1))
        self.coordinates = (t,) + self.x
        self.u = u
        self.variable_names = ("t",) + tuple(f"x{k}" for k in range(1, n + 1))
        self._jets = {(): u}
        self._indices = {u: ()}
        for order in range(1, constants.MAX_JET_ORDER + 1):
            for index in itertools.combinations_with_replacement(
                range(n + 1), order
            ):
                name = "u_" + "".join(self.variable_names[a] for a in index)
                symbol = sp.Symbol(name, real=True)
                self._jets[index] = symbol
                self._indices[symbol] = index

    def __repr__(self):
        return f"JetSpace(n={self.n})"

    def __eq__(self, other):
        return isinstance(other, JetSpace) and other.n == self.n

    def __hash__(self):
        return hash(("JetSpace", self.n))

    def jet(self, *index):
        index = tuple(sorted(index))
        if len(index) > constants.MAX_JET_ORDER:
            raise JetOrderError(
                f"Jet coordinates are available up to order "
                f"{constants.MAX_JET_ORDER}, requested order {len(index)}."
            )
        return self._jets[index]

    def multi_index(self, symbol):
        return self._indices.get(symbol)

    @property
    def u_t(self):
        return self._jets[(0,)]

    @property
    def gradient(self):
        """Spatial first derivatives (u_x1, ..., u_xn)."""
        return tuple(self._jets[(k,)] for k in range(1, self.n + 1))

    @property
    def first_derivatives(self):
        return tuple(self._jets[(a,)] for a in range(self.n + 1))

    def jet_symbols(self, expr):
        """Jet coordinates (u included) occurring in `expr`, sorted by order."""
        found = [s for s in expr.free_symbols if s in self._indices]
        return sorted(found, key=lambda s: (len(self._indices[s]), self._indices[s]))

    def order(self, expr):
        """Highest derivative order occurring in `expr` (0 without derivatives)."""
        orders = [len(self._indices[s]) for s in self.jet_symbols(expr)]
        return max(orders, default=0)

    def raise_index(self, symbol, a):
        return self.jet(*(self._indices[symbol] + (a,)))


@functools.lru_cache(maxsize=None)
def jet_space(n):
    return JetSpace(n)


def _collect_factor(factor, power, coefficient, exponents):
    """
    Files `factor**power` under the parameter coefficient or under the
    exponent of its jet-space base.

    Products raised to integer powers are split factor by factor. Sums are
    reduced to a primitive part with a positive leading sign, their content
    joins the coefficient.
    """
    if is_parameter_expression(factor):
        coefficient.append(sp.Pow(factor, power))
        return
    if isinstance(factor, sp.Mul) and power.is_Integer:
        for argument in factor.args:
            _collect_factor(argument, power, coefficient, exponents)
        return
    base, exponent = factor.as_base_exp()
    total = exponent * power
    if base is not factor and isinstance(base, (sp.Mul, sp.Add)) and total.is_Integer:
        _collect_factor(base, total, coefficient, exponents)
        return
    if isinstance(base, sp.Add) and total.is_Integer:
        if base.could_extract_minus_sign():
            coefficient.append(sp.Integer(-1) ** total)
            base = -base
        content = sp.factor_terms(base, sign=False)
        if isinstance(content, sp.Mul):
            _collect_factor(content, total, coefficient, exponents)
            return
    exponents[base] = exponents.get(base, 0) + total


def _split_term(term):
    coefficient = []
    exponents = {}
    for factor in sp.Mul.make_args(term):
        _collect_factor(factor, sp.Integer(1), coefficient, exponents)
    atoms = []
    for base in sorted(exponents, key=sp.default_sort_key):
        exponent = sp.cancel(exponents[base])
        if exponent != 0:
            atoms.append(sp.Pow(base, exponent))
    return sp.Mul(*coefficient), sp.Mul(*atoms)


def canonical(expr):
    """
    Canonical form of `expr`.

    Terms are expanded, powers of a common base are merged with their
    exponents reduced, like atom products are collected and every
    coefficient is reduced to a coprime ratio of polynomials in the
    parameters. Zero coefficients are dropped.

    Parameters
    ----------
    expr: sympy expression

    Returns
    -------
    sympy expression
        canonical representative; `0` iff `expr` vanishes identically
    """
    expr = sp.sympify(expr)
    expanded = sp.expand(
        expr, power_exp=False, power_base=False, log=False, multinomial=True
    )
    collected = {}
    for term in sp.Add.make_args(expanded):
        coefficient, key = _split_term(term)
        collected.setdefault(key, []).append(coefficient)
    terms = []
    for key in sorted(collected, key=sp.default_sort_key):
        value = sp.cancel(sp.Add(*collected[key]))
        if value != 0:
            terms.append(value * key)
    return sp.Add(*terms)


def is_zero(expr):
    return canonical(expr) == 0


def coefficients(expr):
    """
    Maps every atom product of the canonical form of `expr` to its
    coefficient in the parameter field.
    """
    table = {}
    for term in sp.Add.make_args(canonical(expr)):
        if term == 0:
            continue
        coefficient, key = _split_term(term)
        table[key] = sp.cancel(table.get(key, 0) + coefficient)
    return table


def total_derivative(expr, a, space):
    """
    Total derivative D_a of `expr`.

    D_a = d/dx_a + sum_J u_{J+a} d/du_J, with x_0 = t.

    Parameters
    ----------
    expr: sympy expression
        expression of derivative order <= 2
    a: int
        variable index, 0 for t and k for x_k
    space: :class:`JetSpace`

    Returns
    -------
    sympy expression
        canonical form of D_a(expr)
    """
    expr = sp.sympify(expr)
    if space.order(expr) >= constants.MAX_JET_ORDER:
        raise JetOrderError(
            f"The total derivative of an expression of order "
            f"{space.order(expr)} exceeds the order cap "
            f"{constants.MAX_JET_ORDER}."
        )
    result = sp.diff(expr, space.coordinates[a])
    for symbol in space.jet_symbols(expr):
        result += space.raise_index(symbol, a) * sp.diff(expr, symbol)
    return canonical(result)


def euler(expr, space):
    """
    Euler operator E_u(expr) = sum_J (-D)_J d(expr)/du_J.

    The sum runs over unordered multi-indices J; for order-2 inputs this is
    dL/du - D_a(dL/du_a) + sum_{a<=b} D_a D_b(dL/du_ab).
    """
    expr = canonical(expr)
    result = []
    for symbol in space.jet_symbols(expr):
        partial = sp.diff(expr, symbol)
        index = space.multi_index(symbol)
        for a in index:
            partial = total_derivative(partial, a, space)
        result.append((-1) ** len(index) * partial)
    return canonical(sp.Add(*result))


def divergence(components, space):
    """
    Total divergence D_t I_0 + sum_k D_k I_k of an (n+1)-tuple.
    """
    if len(components) != space.n + 1:
        raise ValueError(
            f"A divergence in {space.n} space dimensions needs {space.n + 1} "
            f"components, {len(components)} were given."
        )
    return canonical(
        sp.Add(*(total_derivative(c, a, space) for a, c in enumerate(components)))
    )


DivergenceTest = namedtuple("DivergenceTest", ["passed", "obstruction"])


def is_total_divergence(expr, space):
    """
    Tests whether `expr` is a total divergence by applying the Euler operator.

    Returns
    -------
    DivergenceTest
        `passed` is True iff E_u(expr) vanishes; `obstruction` is E_u(expr)
    """
    obstruction = euler(expr, space)
    return DivergenceTest(obstruction == 0, obstruction)


@dataclass(frozen=True)
class VectorField:
    """
    Point vector field sum_a xi_a d/dx_a + eta d/du, x_0 = t.

    `xi` holds the n+1 horizontal coefficients, `eta` the vertical one. All
    coefficients depend on (t, x, u) and parameters only.
    """

    xi: tuple
    eta: object
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(sp.sympify(c) for c in self.xi))
        object.__setattr__(self, "eta", sp.sympify(self.eta))
        for coefficient in self.xi + (self.eta,):
            derivatives = [
                s.name for s in coefficient.free_symbols if _JET_NAME.match(s.name)
            ]
            if derivatives:
                raise ValueError(
                    f"The vector field {self.name} is not a point vector field: "
                    f"its coefficients depend on {derivatives}."
                )

    @property
    def n(self):
        return len(self.xi) - 1

    def subs(self, values):
        return VectorField(
            tuple(c.subs(values) for c in self.xi), self.eta.subs(values), self.name
        )


def prolong1(field, space):
    """
    Coefficients tau_a of the first prolongation of `field`.

    tau_a = D_a(eta) - sum_b u_b D_a(xi_b) for a = 0, ..., n.

    Returns
    -------
    dict
        variable index -> coefficient of d/du_a
    """
    first = space.first_derivatives
    table = {}
    for a in range(space.n + 1):
        value = total_derivative(field.eta, a, space)
        for b, xi_b in enumerate(field.xi):
            value -= first[b] * total_derivative(xi_b, a, space)
        table[a] = canonical(value)
    return table


def prolonged_action(field, expr, space, prolongation=None):
    """
    Action of the first prolongation of `field` on a first order `expr`.
    """
    if space.order(expr) > 1:
        raise JetOrderError(
            f"The first prolongation acts on first order expressions only, the "
            f"given expression has order {space.order(expr)}."
        )
    if prolongation is None:
        prolongation = prolong1(field, space)
    result = field.eta * sp.diff(expr, space.u)
    for a, xi_a in enumerate(field.xi):
        result += xi_a * sp.diff(expr, space.coordinates[a])
        result += prolongation[a] * sp.diff(expr, space.jet(a))
    return canonical(result)


def characteristic(field, space):
    """Characteristic Q = eta - sum_a xi_a u_a."""
    first = space.first_derivatives
    return canonical(
        field.eta - sp.Add(*(xi_a * first[a] for a, xi_a in enumerate(field.xi)))
    )


def divergence_of_vector_field(field, space):
    """Total divergence sum_a D_a(xi_a) of the horizontal coefficients."""
    return canonical(
        sp.Add(*(total_derivative(xi_a, a, space) for a, xi_a in enumerate(field.xi)))
    )


def evaluate(expr, values, precision=30):
    """
    Numerically evaluates `expr` at exact or floating values.

    `log(u)` stands for ln|u| and is evaluated as such.

    Parameters
    ----------
    expr: sympy expression
    values: dict
        symbol -> value for every free symbol of `expr`
    precision: int
        number of significant digits

    Returns
    -------
    sympy Float or complex number
    """
    real_u = sp.Dummy("w", real=True)
    expr = sp.sympify(expr).xreplace({u: real_u})
    expr = expr.replace(sp.log, lambda arg: sp.log(sp.Abs(arg)))
    values = {(real_u if key == u else key): value for key, value in values.items()}
    missing = expr.free_symbols - set(values)
    if missing:
        raise ValueError(
            f"Cannot evaluate the expression, no values given for "
            f"{sorted(s.name for s in missing)}."
        )
    return sp.N(expr.subs(values), precision)


def render(expr):
    """LaTeX rendering used in reports."""
    return sp.latex(expr)


