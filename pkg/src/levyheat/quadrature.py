"""Fixed-node quadrature rules reused across the package.

The double-exponential rule below is the workhorse for radial Lévy densities:
it tolerates integrable singularities at the origin (``g(r) ~ r^{-1-2a}``) and,
with the step chosen from the largest frequency, resolves the oscillation of
``1 - cos(xi r)`` without adaptive refinement, so it can be vectorised over
whole frequency grids.
"""

from functools import lru_cache

import numpy as np
from scipy.special import expit

# y = R * 1e-60 at the lower end; weights are below 1e-17 at the upper end.
_T_MIN = -4.5
_T_MAX = 3.3
# Largest xi * R handled by the fixed rule before callers fall back to QUADPACK.
MAX_DE_PHASE = 4000.0


@lru_cache(maxsize=32)
def de_unit_nodes(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights of the logistic-sinh rule on (0, 1) with step 2**-level."""
    h = 2.0**-level
    t = np.arange(np.ceil(_T_MIN / h), np.floor(_T_MAX / h) + 1) * h
    s = np.pi * np.sinh(t)
    y = expit(s)
    w = h * np.pi * np.cosh(t) * expit(s) * expit(-s)
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w


def de_level(phase: float) -> int:
    """Step level needed to integrate an oscillation of total phase ``phase``."""
    h = 2.0 * np.pi / (40.0 + abs(phase))
    return max(3, int(np.ceil(np.log2(1.0 / h))))


def integrate_de(fun, lo: float, hi: float, level: int = 5) -> float:
    """Integrate a vectorised callable over [lo, hi] with the fixed rule."""
    y, w = de_unit_nodes(level)
    x = lo + (hi - lo) * y
    return float((hi - lo) * np.sum(w * fun(x)))
