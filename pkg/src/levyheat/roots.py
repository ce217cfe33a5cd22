"""Bracketing and safeguarded Newton/bisection for increasing scalar functions."""

import math

from .errors import NumericError


def expand_bracket(fun, lo=0.0, hi=1.0, cap=1e300, max_doublings=2000):
    """Double ``hi`` until ``fun(hi) >= 0``; ``fun(lo) < 0`` is assumed.

    Returns ``(lo, hi, f_lo, f_hi)``.  ``f_hi`` may be ``inf`` when the
    function overflows, which still closes the bracket.
    """
    f_lo = fun(lo)
    f_hi = fun(hi)
    n = 0
    while not f_hi >= 0.0:
        if math.isnan(f_hi):
            raise NumericError(f"function returned NaN at {hi!r} while bracketing")
        if hi >= cap or n >= max_doublings:
            raise NumericError(
                f"no sign change up to {hi!r}", estimate=hi, error_bound=float("inf")
            )
        lo, f_lo = hi, f_hi
        hi = min(2.0 * hi, cap)
        f_hi = fun(hi)
        n += 1
    return lo, hi, f_lo, f_hi


def safeguarded_newton(fun, lo, hi, dfun=None, x0=None, ftol=1e-14, xtol=0.0,
                       maxiter=200):
    """Find a zero of an increasing function inside ``[lo, hi]``.

    Newton steps are taken when a derivative is supplied and the step lands
    strictly inside the current bracket; otherwise the bracket is bisected.
    Returns ``(x, f(x), iterations)``.
    """
    f_lo = fun(lo)
    if f_lo >= 0.0:
        return lo, f_lo, 0
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else x0
    fx = fun(x)
    for it in range(1, maxiter + 1):
        if abs(fx) <= ftol:
            return x, fx, it
        if fx < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol or hi <= math.nextafter(lo, math.inf):
            return x, fx, it
        step_ok = False
        if dfun is not None and math.isfinite(fx):
            d = dfun(x)
            if d > 0.0 and math.isfinite(d):
                xn = x - fx / d
                step_ok = lo < xn <= hi
        if not step_ok:
            xn = 0.5 * (lo + hi)
        x = xn
        fx = fun(x)
    return x, fx, maxiter
