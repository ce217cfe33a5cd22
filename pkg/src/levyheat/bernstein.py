"""Bernstein and complete Bernstein functions.

A Bernstein function has the Lévy-Khintchine form

    f(x) = a + b x + \\int_{(0,inf)} (1 - e^{-x t}) mu(dt).

Three closed-form kinds are built in (``x**alpha``, ``log(1 + x)``,
``x / (1 + x)``); arbitrary triplets ``(a, b, mu)`` are evaluated by
quadrature, and ``custom`` functions carry their own value/derivative
callbacks (this is what :func:`mu_from_cbf` returns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .errors import (
    DivergenceError,
    InvalidInputError,
    OutOfRangeError,
    PreconditionError,
)
from .roots import expand_bracket, safeguarded_newton

INVERT_RTOL = 1e-12
INVERT_MAX_STEPS = 200
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class BernsteinFn:
    kind: str
    a: float = 0.0
    b: float = 0.0
    alpha: Optional[float] = None
    atoms: tuple = ()
    density: Optional[Callable] = None
    complete: bool = False
    value_fn: Optional[Callable] = None
    derivative_fns: tuple = ()
    upper: float = math.inf
    name: str = ""
    # growth annotation: t -> f(t) t^-kappa increasing; recorded, never verified
    kappa: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return eval_bernstein(self, x)

    @property
    def sup(self) -> float:
        """Supremum of f on [0, inf)."""
        if self.kind == "custom":
            return self.upper
        if self.kind == "ratio":
            return 1.0
        if self.kind in ("power", "log1p") or self.b > 0:
            return math.inf
        total = sum(m for _, m in self.atoms)
        if self.density is not None:
            tail, _ = integrate.quad(self.density, 1.0, np.inf, limit=200)
            head, _ = integrate.quad(self.density, 0.0, 1.0, limit=200)
            total += head + tail
        return self.a + total


def power(alpha: float) -> BernsteinFn:
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError(f"power exponent must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return BernsteinFn("power", b=1.0, alpha=1.0, name="power(1)")
    return BernsteinFn("power", alpha=float(alpha), complete=True,
                       name=f"power({alpha!r})", kappa=float(alpha))


def log1p() -> BernsteinFn:
    return BernsteinFn("log1p", complete=True, name="log1p")


def ratio() -> BernsteinFn:
    return BernsteinFn("ratio", complete=True, name="ratio")


def triplet(a=0.0, b=0.0, atoms=(), density=None, complete=False,
            name="triplet") -> BernsteinFn:
    """Bernstein function from its triplet; ``atoms`` is a list of ``(t, mass)``."""
    if a < 0 or b < 0:
        raise InvalidInputError("a and b must be nonnegative")
    atoms = tuple((float(t), float(m)) for t, m in atoms)
    if any(t <= 0 or m < 0 for t, m in atoms):
        raise InvalidInputError("atoms need positive location and nonnegative mass")
    return BernsteinFn("triplet", a=float(a), b=float(b), atoms=atoms,
                       density=density, complete=complete, name=name)


def _check_x(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("Bernstein functions take finite arguments")
    if np.any(arr < 0):
        raise InvalidInputError("Bernstein functions are defined on [0, inf)")
    return arr


def _triplet_scalar(f: BernsteinFn, x: float, k: int = 0) -> float:
    """k-th derivative (k = 0 is the value) of a triplet at a scalar x."""
    if k == 0:
        out = f.a + f.b * x
        kern = lambda t: -np.expm1(-x * t)
    else:
        out = f.b if k == 1 else 0.0
        sign = (-1.0) ** (k + 1)
        kern = lambda t: sign * t**k * np.exp(-x * t)
    for t, m in f.atoms:
        out += m * kern(t)
    if f.density is not None and (x > 0 or k > 0):
        g = lambda t: kern(t) * f.density(t)
        # t = s^2 softens the t^{-alpha} endpoint behaviour of typical densities
        head, _ = integrate.quad(lambda s: 2.0 * s * g(s * s), 0.0, 1.0, limit=200,
                                 epsabs=0.0, epsrel=1e-12)
        tail, _ = integrate.quad(g, 1.0, np.inf, limit=200, epsabs=0.0, epsrel=1e-12)
        out += head + tail
    return float(out)


def eval_bernstein(f: BernsteinFn, x):
    """f(x) for scalar or array ``x >= 0``."""
    arr = _check_x(x)
    if f.kind == "power":
        out = arr**f.alpha
    elif f.kind == "log1p":
        out = np.log1p(arr)
    elif f.kind == "ratio":
        out = arr / (1.0 + arr)
    elif f.kind == "triplet":
        out = np.vectorize(lambda v: _triplet_scalar(f, v), otypes=[float])(arr)
    elif f.kind == "custom":
        out = np.asarray(f.value_fn(arr), dtype=float)
    else:
        raise InvalidInputError(f"unknown Bernstein kind {f.kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def derivative(f: BernsteinFn, x, k: int = 1):
    """Analytic k-th derivative (k = 1, 2, ...) where available."""
    arr = _check_x(x)
    if f.kind == "power":
        coef = math.prod(f.alpha - j for j in range(k))
        with np.errstate(divide="ignore"):
            out = coef * arr ** (f.alpha - k)
    elif f.kind == "log1p":
        out = (-1.0) ** (k + 1) * math.factorial(k - 1) / (1.0 + arr) ** k
    elif f.kind == "ratio":
        out = (-1.0) ** (k + 1) * math.factorial(k) / (1.0 + arr) ** (k + 1)
    elif f.kind == "triplet":
        out = np.vectorize(lambda v: _triplet_scalar(f, v, k), otypes=[float])(arr)
    elif f.kind == "custom":
        if k > len(f.derivative_fns):
            return finite_difference(f, arr, k)
        out = np.asarray(f.derivative_fns[k - 1](arr), dtype=float)
    else:
        raise InvalidInputError(f"unknown Bernstein kind {f.kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def finite_difference(f: BernsteinFn, x, k: int):
    """Central difference with step x*eps^(1/3) (k=1) or x*eps^(1/4) (k=2)."""
    x = np.asarray(x, dtype=float)
    if k == 1:
        h = x * _EPS ** (1 / 3)
        return (eval_bernstein(f, x + h) - eval_bernstein(f, x - h)) / (2 * h)
    if k == 2:
        h = x * _EPS ** (1 / 4)
        return (eval_bernstein(f, x + h) - 2 * eval_bernstein(f, x)
                + eval_bernstein(f, x - h)) / h**2
    raise InvalidInputError("finite differences are provided for k = 1, 2 only")


def invert_bernstein(f: BernsteinFn, y: float) -> float:
    """Return x >= 0 with f(x) = y."""
    if not math.isfinite(y):
        raise InvalidInputError("cannot invert at a non-finite value")
    lower = float(eval_bernstein(f, 0.0))
    upper = f.sup
    if y < lower or y > upper:
        raise OutOfRangeError(
            f"{y!r} is outside the range [{lower!r}, {upper!r}] of {f.name or f.kind}",
            lower=lower, upper=upper)
    if y == upper:
        return math.inf
    if y == lower:
        return 0.0
    if f.kind == "power":
        return y ** (1.0 / f.alpha) if f.b == 0 else y
    if f.kind == "log1p":
        return math.expm1(y)
    if f.kind == "ratio":
        return y / (1.0 - y)

    tol = INVERT_RTOL * max(1.0, y)
    g = lambda v: float(eval_bernstein(f, v)) - y
    dg = lambda v: float(derivative(f, v, 1))
    lo, hi, _, _ = expand_bracket(g, 0.0, max(1.0, y))
    x, fx, _ = safeguarded_newton(g, lo, hi, dfun=dg, ftol=tol,
                                  maxiter=INVERT_MAX_STEPS)
    return x


@dataclass
class DerivativeBoundReport:
    rows: list  # (x, k, |f^(k)(x)| by finite differences, k! f(x)/x^k)
    max_violation: float
    max_relative_violation: float

    def passed(self, rtol: float = 1e-6) -> bool:
        return self.max_relative_violation <= rtol


def derivative_bound_check(f: BernsteinFn, xs) -> DerivativeBoundReport:
    """Check |f^(k)(x)| <= k! f(x) / x^k for k = 1, 2 by finite differences."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size == 0 or np.any(xs <= 0) or not np.all(np.isfinite(xs)):
        raise InvalidInputError("xs must be a nonempty list of positive reals")
    rows = []
    worst = -math.inf
    worst_rel = -math.inf
    for x in xs:
        fx = float(eval_bernstein(f, x))
        for k in (1, 2):
            d = abs(float(finite_difference(f, x, k)))
            bound = math.factorial(k) * fx / x**k
            rows.append((float(x), k, d, bound))
            worst = max(worst, d - bound)
            worst_rel = max(worst_rel, (d - bound) / bound if bound > 0 else d)
    return DerivativeBoundReport(rows, worst, worst_rel)


def build_psi1(f: BernsteinFn, dim: int = 1):
    """Lévy model with radial density f(1/|y|^2) / |y|^n on the unit ball."""
    from .levy_model import LevyModel, RadialDensity

    if f.b > 0 or f.a > 0:
        raise PreconditionError(
            "psi_1 needs a Bernstein function with f(0) = 0 and no linear term")
    if f.kind == "custom" and float(eval_bernstein(f, 0.0)) != 0.0:
        raise PreconditionError("psi_1 needs f(0) = 0")
    if not 1 <= dim <= 3:
        raise PreconditionError(f"psi_1 is supported for dimensions 1..3, got {dim}")

    def profile(r):
        r = np.asarray(r, dtype=float)
        return eval_bernstein(f, 1.0 / r**2) / r**dim

    measure = RadialDensity(profile, radius=1.0, dim=dim,
                            name=f"psi1[{f.name or f.kind}]")
    return LevyModel(measure=measure, dim=dim, name=measure.name, bernstein=f)


# Closed-form pieces of mu(t) = int_0^t g(s)/s ds + t int_t^inf g(s)/s^2 ds.
def _mu_parts_closed(g: BernsteinFn, t):
    if g.kind == "power":
        a = g.alpha
        return t**a / a, t ** (a - 1) / (1 - a)
    if g.kind == "log1p":
        return _dilog_neg(t), np.log1p(t) / t + np.log1p(1.0 / t)
    if g.kind == "ratio":
        return np.log1p(t), np.log1p(1.0 / t)
    return None


def _dilog_neg(t):
    # int_0^t log(1+s)/s ds = -Li2(-t);  scipy's spence(z) = Li2(1 - z)
    return -special.spence(1.0 + np.asarray(t, dtype=float))


def mu_from_cbf(g: BernsteinFn) -> BernsteinFn:
    """mu(t) = int_0^t int_r^inf g(s)/s^2 ds dr as a custom Bernstein function.

    The double integral is evaluated through its Fubini form
    ``int_0^t g(s)/s ds + t int_t^inf g(s)/s^2 ds``; closed forms are used
    for the built-in kinds.
    """
    if not g.complete:
        raise PreconditionError("mu_from_cbf expects a complete Bernstein function")
    if g.a > 0:
        raise DivergenceError("int_0 g(s)/s ds diverges when g(0) > 0")
    if g.b > 0:
        raise DivergenceError("int^inf g(s)/s^2 ds diverges for a linear term")

    def parts(t):
        closed = _mu_parts_closed(g, t)
        if closed is not None:
            return closed
        inner, _, ier1 = _quad_info(lambda s: float(g(s)) / s, 0.0, t)
        outer, _, ier2 = _quad_info(lambda s: float(g(s)) / s**2, t, np.inf)
        if ier1 or ier2:
            raise DivergenceError(f"quadrature for mu({t}) did not converge")
        return inner, outer

    def scalar_value(t):
        if t == 0.0:
            return 0.0
        head, tail = parts(t)
        return float(head + t * tail)

    def scalar_d1(t):
        if t == 0.0:
            return math.inf
        return float(parts(t)[1])

    def value(t):
        return np.vectorize(scalar_value, otypes=[float])(np.asarray(t, dtype=float))

    def d1(t):
        return np.vectorize(scalar_d1, otypes=[float])(np.asarray(t, dtype=float))

    def d2(t):
        t = np.asarray(t, dtype=float)
        return -np.asarray(g(t), dtype=float) / t**2

    return BernsteinFn("custom", complete=True, value_fn=value,
                       derivative_fns=(d1, d2), name=f"mu[{g.name or g.kind}]")


def _quad_info(fun, lo, hi):
    val, err, info = integrate.quad(fun, lo, hi, limit=200, epsabs=0.0,
                                    epsrel=1e-12, full_output=True)[:3]
    ier = 0 if err <= 1e-8 * max(1.0, abs(val)) else 1
    return val, err, ier
