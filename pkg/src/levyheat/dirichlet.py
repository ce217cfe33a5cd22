"""Dirichlet forms of symmetric jump processes on the line.

Two representations of the same energy are provided:

    spectral:    (2 pi) \\int psi(xi) |u^(xi)|^2 d xi,   u^ = (2 pi)^{-1} \\int u e^{-i x xi} dx
    difference:  1/2 \\int\\int (u(x+y) - u(x))^2 nu(dy) dx

The spectral sum is scaled by (2 pi)^n so that both agree (Plancherel); the
unscaled integral is available with ``normalization="raw"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bernstein import BernsteinFn, eval_bernstein
from .errors import (
    AccuracyWarning,
    FeatureUnavailableError,
    InvalidInputError,
)
from .levy_model import (
    Composite,
    DiscreteAtoms,
    LevyModel,
    RadialDensity,
    SemiStableAtoms,
)
from .quadrature import de_unit_nodes

SPECTRAL_TAIL_TOL = 1e-8
EDGE_TOL = 1e-12
# Gaussian decays below 1e-12 beyond this many widths
_GAUSS_REACH = math.sqrt(2.0 * math.log(1e12))


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Real test function with an analytic formula and an accurate difference."""

    kind: str
    center: float = 0.0
    width: float = 1.0
    fn: Optional[Callable] = None
    diff_fn: Optional[Callable] = None
    extent: float = 0.0
    label: str = ""

    __test__ = False  # not a pytest class

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def diff(self, x, y):
        """u(x + y) - u(x), avoiding cancellation where the formula allows."""
        x = np.asarray(x, dtype=float)
        if self.diff_fn is not None:
            return self.diff_fn(x, y)
        return self.fn(x + y) - self.fn(x)

    def samples(self, grid: "DirichletGrid") -> np.ndarray:
        return self(grid.x)

    def fourier(self, grid: "DirichletGrid"):
        """(xi, u^(xi)) on the DFT frequencies, u^ = (2 pi)^{-1} \\int u e^{-i x xi} dx."""
        return grid.fourier(self.samples(grid))

    def __mul__(self, other: "TestFunction") -> "TestFunction":
        return product(self, other)

    def __neg__(self):
        return scaled(self, -1.0)


def gaussian(center: float = 0.0, width: float = 1.0) -> TestFunction:
    """exp(-(x - c)^2 / (2 w^2))."""
    if not width > 0:
        raise InvalidInputError("width must be positive")
    c, w2 = float(center), 2.0 * float(width) ** 2

    def fn(x):
        return np.exp(-((x - c) ** 2) / w2)

    def diff(x, y):
        z = x - c
        arg = -(2.0 * z * y + y * y) / w2
        with np.errstate(over="ignore", invalid="ignore"):
            inner = np.exp(-(z * z) / w2) * np.expm1(arg)
        # far growth: no cancellation, and 0 * inf must not appear
        return np.where(arg < 1.0, inner, fn(x + y) - fn(x))

    return TestFunction("gaussian", c, float(width), fn, diff,
                        extent=abs(c) + _GAUSS_REACH * width,
                        label=f"gaussian({c:g},{width:g})")


def bump(center: float = 0.0, radius: float = 1.0) -> TestFunction:
    """exp(-1 / (1 - s^2)) for s = (x - c)/r inside (-1, 1), zero outside."""
    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    c, r = float(center), float(radius)

    def expo(x):
        s = (x - c) / r
        inside = np.abs(s) < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            e = np.where(inside, -1.0 / np.where(inside, 1.0 - s * s, 1.0), -np.inf)
        return e, inside

    def fn(x):
        e, _ = expo(x)
        return np.exp(e)

    def diff(x, y):
        e0, in0 = expo(x)
        e1, in1 = expo(x + y)
        s0, s1 = (x - c) / r, (x + y - c) / r
        both = in0 & in1
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            # e1 - e0 = (s0^2 - s1^2) / ((1 - s0^2)(1 - s1^2)), s0^2 - s1^2 = -(y/r)(s0 + s1)
            de = np.where(both, -(y / r) * (s0 + s1) /
                          np.where(both, (1 - s0 * s0) * (1 - s1 * s1), 1.0), 0.0)
            inner = np.exp(e0) * np.expm1(de)
        plain = np.exp(e1) - np.exp(e0)
        return np.where(both & (np.abs(de) < 1.0), inner, plain)

    return TestFunction("bump", c, r, fn, diff, extent=abs(c) + r,
                        label=f"bump({c:g},{r:g})")


def hat(center: float = 0.0, radius: float = 1.0) -> TestFunction:
    """max(0, 1 - |x - c| / r)."""
    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    c, r = float(center), float(radius)
    fn = lambda x: np.maximum(0.0, 1.0 - np.abs(x - c) / r)
    return TestFunction("hat", c, r, fn, None, extent=abs(c) + r,
                        label=f"hat({c:g},{r:g})")


def constant_zero() -> TestFunction:
    return TestFunction("zero", fn=lambda x: np.zeros_like(x),
                        diff_fn=lambda x, y: np.zeros_like(x), label="zero")


def from_callable(fn: Callable, extent: float, label: str = "custom") -> TestFunction:
    return TestFunction("custom", fn=fn, extent=float(extent), label=label)


def product(u: TestFunction, v: TestFunction) -> TestFunction:
    def diff(x, y):
        # (uv)(x+y) - (uv)(x) = du v(x+y) + u(x) dv
        return u.diff(x, y) * v(x + y) + u(x) * v.diff(x, y)

    return TestFunction("product", fn=lambda x: u(x) * v(x), diff_fn=diff,
                        extent=min(u.extent, v.extent), label=f"{u.label}*{v.label}")


def scaled(u: TestFunction, a: float) -> TestFunction:
    return TestFunction("scaled", fn=lambda x: a * u(x),
                        diff_fn=lambda x, y: a * u.diff(x, y), extent=u.extent,
                        label=f"{a:g}*{u.label}")


@dataclass(frozen=True)
class DirichletGrid:
    """Uniform periodic grid x_j = -L + j h, h = 2L/N."""

    n: int = 4096
    L: float = 16.0

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.rfftfreq(self.n, d=self.h)

    def fourier(self, values):
        """u^ on the nonnegative DFT frequencies, normalised by (2 pi)^{-1}."""
        phase = np.exp(1j * self.xi * self.L)  # shift from x_0 = -L
        return self.xi, np.fft.rfft(values) * self.h * phase / (2.0 * math.pi)

    def refined(self) -> "DirichletGrid":
        return DirichletGrid(2 * self.n, self.L)

    def integrate(self, values) -> float:
        return float(np.sum(values) * self.h)


def grid_for(family: Sequence[TestFunction], model: Optional[LevyModel] = None,
             n: int = 4096) -> DirichletGrid:
    """Grid wide enough for the family and every jump of the model; L is a power of two."""
    reach = max([u.extent for u in family] + [1.0])
    if model is not None and model.measure is not None:
        reach += _jump_radius(model.measure)
    L = 2.0 ** math.ceil(math.log2(reach * 1.05))
    return DirichletGrid(n=n, L=L)


def _jump_radius(measure) -> float:
    if isinstance(measure, DiscreteAtoms):
        return measure.support_radius
    if isinstance(measure, SemiStableAtoms):
        return 1.0
    if isinstance(measure, RadialDensity):
        return measure.radius
    if isinstance(measure, Composite):
        return max(_jump_radius(p) for p in measure.parts)
    raise FeatureUnavailableError(
        f"difference form not available for {measure.variant} measures")


# --------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class SpectralForm:
    value: float
    tail_fraction: float


def form_spectral_detail(model: LevyModel, u: TestFunction,
                         grid: Optional[DirichletGrid] = None,
                         v: Optional[TestFunction] = None,
                         normalization: str = "plancherel") -> SpectralForm:
    if model.dim != 1:
        raise FeatureUnavailableError("Dirichlet forms are implemented in 1-D")
    grid = grid_for([u] + ([v] if v else []), model) if grid is None else grid
    xi, uh = grid.fourier(u.samples(grid))
    vh = uh if v is None else grid.fourier(v.samples(grid))[1]
    psi = model._psi(xi.reshape(-1, 1))
    dens = psi * np.real(uh * np.conj(vh))
    weights = np.full(xi.size, 2.0)
    weights[0] = 1.0
    if grid.n % 2 == 0:
        weights[-1] = 1.0
    dxi = 2.0 * math.pi / (grid.n * grid.h)
    contrib = weights * dens * dxi
    total = float(np.sum(contrib))
    scale = float(np.sum(np.abs(contrib)))
    tail = float(np.sum(np.abs(contrib[int(0.8 * xi.size):])) / scale) if scale > 0 else 0.0
    if tail > SPECTRAL_TAIL_TOL:
        warnings.warn(f"spectral energy tail fraction {tail:.2e} exceeds "
                      f"{SPECTRAL_TAIL_TOL:g}; refine the grid", AccuracyWarning,
                      stacklevel=3)
    factor = 2.0 * math.pi if normalization == "plancherel" else 1.0
    return SpectralForm(factor * total, tail)


def form_spectral(model: LevyModel, u: TestFunction, grid: Optional[DirichletGrid] = None,
                  normalization: str = "plancherel") -> float:
    """(2 pi)^n \\int psi |u^|^2 d xi on the DFT frequency grid."""
    return form_spectral_detail(model, u, grid, normalization=normalization).value


def _pair_sum(u, v, x, y, h):
    return float(np.sum(u.diff(x, y) * v.diff(x, y)) * h)


def _edge_check(u: TestFunction, grid: DirichletGrid, shift: float):
    for s in (0.0, shift, -shift):
        edge = np.abs(u(np.array([grid.x[0] + s, grid.x[-1] + s])))
        if np.max(edge) > EDGE_TOL:
            warnings.warn(f"test function {u.label} leaks past the grid edge "
                          f"(|u| = {np.max(edge):.2e})", AccuracyWarning, stacklevel=4)
            return


def _bilinear(measure, u, v, grid) -> float:
    x, h = grid.x, grid.h
    if isinstance(measure, DiscreteAtoms):
        total = 0.0
        for y, m in zip(measure.points[:, 0], measure.masses):
            total += m * _pair_sum(u, v, x, y, h)
        return 0.5 * total
    if isinstance(measure, SemiStableAtoms):
        levels = 40
        total = 0.0
        for n in range(levels):
            y = 2.0**-n
            w = 2.0 ** (measure.alpha * n)
            total += w * (_pair_sum(u, v, x, y, h) + _pair_sum(u, v, x, -y, h))
        # remaining atoms: (u(x+y) - u(x))(v(x+y) - v(x)) ~ y^2 u' v'
        d = 2.0**-levels
        du = (u(x + d) - u(x - d)) / (2 * d)
        dv = (v(x + d) - v(x - d)) / (2 * d)
        total += measure.tail_variance(levels) * float(np.sum(du * dv) * h)
        return 0.5 * total
    if isinstance(measure, RadialDensity):
        if measure.dim != 1:
            raise FeatureUnavailableError("difference form is implemented in 1-D")
        yn, wn = de_unit_nodes(7)
        r = measure.radius * yn
        g = measure.radius * wn * np.asarray(measure.profile(r), dtype=float)
        vals = np.array([_pair_sum(u, v, x, ri, h) + _pair_sum(u, v, x, -ri, h)
                         for ri in r])
        return 0.5 * float(np.sum(g * vals))
    if isinstance(measure, Composite):
        return sum(_bilinear(p, u, v, grid) for p in measure.parts)
    raise FeatureUnavailableError(
        f"difference form not available for {measure.variant} measures")


def form_difference(model: LevyModel, u: TestFunction, grid: Optional[DirichletGrid] = None,
                    v: Optional[TestFunction] = None) -> float:
    """1/2 \\int\\int (u(x+y) - u(x))(v(x+y) - v(x)) nu(dy) dx (v defaults to u)."""
    if model.measure is None:
        raise FeatureUnavailableError(
            "the difference form needs a Lévy measure; closed-form channels have none")
    if model.dim != 1:
        raise FeatureUnavailableError("Dirichlet forms are implemented in 1-D")
    v = u if v is None else v
    grid = grid_for([u, v], model) if grid is None else grid
    _edge_check(u, grid, _jump_radius(model.measure))
    return _bilinear(model.measure, u, v, grid)


def energy(model: LevyModel, u: TestFunction, grid: Optional[DirichletGrid] = None,
           method: str = "auto") -> float:
    """E(u, u) by the difference form when a measure is present, else spectrally."""
    if method == "auto":
        method = "difference" if model.measure is not None else "spectral"
    if method == "difference":
        return form_difference(model, u, grid)
    if method == "spectral":
        return form_spectral(model, u, grid)
    raise InvalidInputError(f"unknown energy method {method!r}")


def carre_du_champ_integral(model: LevyModel, f: TestFunction, h: TestFunction,
                            grid: DirichletGrid) -> tuple[float, float]:
    """(\\int h Gamma(f, f) dx, \\int |h| Gamma(f, f) dx) on the grid."""
    x = grid.x
    gam = np.asarray(model.measure.carre_du_champ(f, x), dtype=float)
    hx = h(x)
    return grid.integrate(hx * gam), grid.integrate(np.abs(hx) * gam)


@dataclass(frozen=True)
class CdcResult:
    residual: float
    scale: float
    terms: dict
    raw_residual: float = 0.0

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual


# With E(u, v) = 1/2 \int\int (u(x+y)-u(x))(v(x+y)-v(x)) nu(dy) dx one has
#   2 E(fh, f) - E(h, f^2) = \int h(x) \int (f(x+y) - f(x))^2 nu(dy) dx,
# i.e. the operator induced by the form is twice the half-normalised Gamma.
FORM_GAMMA_FACTOR = 2.0


def cdc_identity_check(model: LevyModel, f: TestFunction, h: TestFunction,
                       grid: Optional[DirichletGrid] = None,
                       gamma_factor: float = FORM_GAMMA_FACTOR) -> CdcResult:
    """|2 E(fh, f) - E(h, f^2) - \\int h Gamma_E(f, f) dx| with its natural scale.

    ``Gamma_E = gamma_factor * Gamma`` where ``Gamma`` is the half-normalised
    operator returned by :func:`levyheat.levy_model.gamma_op`.  The residual
    against ``Gamma`` itself is kept in ``raw_residual``.
    """
    if model.measure is None:
        raise FeatureUnavailableError("the carré du champ needs a Lévy measure")
    grid = grid_for([f, h], model) if grid is None else grid
    fh = product(f, h)
    ff = product(f, f)
    e1 = _bilinear(model.measure, fh, f, grid)
    e2 = _bilinear(model.measure, h, ff, grid)
    g, g_abs = carre_du_champ_integral(model, f, h, grid)
    lhs = 2.0 * e1 - e2
    resid = abs(lhs - gamma_factor * g)
    return CdcResult(resid, max(abs(e1), gamma_factor * g_abs),
                     {"E(fh,f)": e1, "E(h,f^2)": e2, "int h Gamma(f,f)": g},
                     raw_residual=abs(lhs - g))


# --------------------------------------------------------------------------
# Nash inequality


@dataclass
class NashReport:
    rows: list = field(default_factory=list)
    worst_C0: float = 0.0
    counterexample: bool = False
    delta: float = 0.0

    @property
    def finite(self) -> bool:
        return math.isfinite(self.worst_C0) and not self.counterexample

    def csv_rows(self):
        for r in self.rows:
            yield (r["function_id"], r["L1"], r["L2"], r["form"], r["lhs"], r["rhs0"],
                   r["C0"])


def nash_check(model: LevyModel, f: BernsteinFn, delta: float,
               family: Sequence[TestFunction], grid: Optional[DirichletGrid] = None,
               method: str = "spectral") -> NashReport:
    """C0(u) = ||u||_2^2 f((||u||_2/||u||_1)^{4/n}) / (E(u,u) + delta ||u||_2^2)."""
    if delta < 0:
        raise InvalidInputError("delta must be nonnegative")
    n = model.dim
    grid = grid_for(list(family), model if model.measure is not None else None) \
        if grid is None else grid
    report = NashReport(delta=delta)
    worst = 0.0
    for k, u in enumerate(family):
        vals = u.samples(grid)
        l1 = grid.integrate(np.abs(vals))
        l2 = math.sqrt(grid.integrate(vals * vals))
        if l2 == 0.0:
            continue
        form = energy(model, u, grid, method)
        lhs = l2 * l2 * float(eval_bernstein(f, (l2 / l1) ** (4.0 / n)))
        rhs0 = form + delta * l2 * l2
        if rhs0 <= 0.0:
            c0 = math.inf
            report.counterexample = lhs > 0
        else:
            c0 = lhs / rhs0
        worst = max(worst, c0)
        report.rows.append({"function_id": u.label or f"u{k}", "L1": l1, "L2": l2,
                            "form": form, "lhs": lhs, "rhs0": rhs0, "C0": c0})
    report.worst_C0 = worst
    return report


def nash_on_diagonal_consistency(nash: NashReport, gamma: float, factor: float = 10.0):
    """Whether the C0 implied by an on-diagonal fit (8/gamma) dominates worst_C0 / factor."""
    implied = 8.0 / gamma
    return {"implied_C0": implied, "worst_C0": nash.worst_C0,
            "consistent": factor * implied >= nash.worst_C0}


def default_family(count: int = 12, seed: int = 0, kinds=("gaussian", "bump")):
    """Deterministic mix of smooth test functions with varied centres and widths."""
    rng = np.random.default_rng(seed)
    makers = {"gaussian": gaussian, "bump": bump, "hat": hat}
    out = []
    for k in range(count):
        kind = kinds[k % len(kinds)]
        c = float(rng.uniform(-2.0, 2.0))
        w = float(2.0 ** rng.uniform(-1.5, 1.5))
        out.append(makers[kind](round(c, 6), round(w, 6)))
    return out
