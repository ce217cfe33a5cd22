"""Transition densities by Fourier inversion of exp(-t psi).

    p_t(x) = (2 pi)^{-n} \\int exp(i xi.x - t psi(xi)) d xi

The grid path uses a real FFT on a period-P lattice whose spacing is a
power of two, so dyadic points such as 0.5, 1, 1.5, ... are always nodes.
The period is widened until the density at the lattice edge is negligible
relative to its peak, which keeps periodic aliasing below the ringing floor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import integrate, signal
from scipy.interpolate import CubicSpline

from .errors import (
    AccuracyWarning,
    FeatureUnavailableError,
    InvalidInputError,
    NoDensityError,
    NumericError,
)
from .levy_model import DiscreteAtoms, LevyModel

# exp(-37) ~ 8.5e-17: below double-precision resolution of p_t(0)-scaled sums
CUTOFF_EXPONENT = 37.0
MAX_CUTOFF = 1e7
RINGING_FLOOR = -1e-9
EDGE_RATIO = 1e-9
N_MIN = 1 << 14
N_MAX = 1 << 21
N2D_MIN = 1 << 8
N2D_MAX = 1 << 12


@dataclass(frozen=True)
class GridSpec:
    """Lattice x_j = (j - N/2) h, j = 0..N-1, per axis."""

    h: float
    n: int
    dim: int = 1

    @property
    def period(self) -> float:
        return self.h * self.n

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.h


@dataclass(frozen=True, eq=False)
class DensityGrid:
    t: float
    dim: int
    h: float
    L: float
    x: np.ndarray
    values: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    model_name: str = ""

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.h, self.x.size, self.dim)

    @property
    def center_index(self) -> int:
        return self.x.size // 2

    @property
    def peak(self) -> float:
        return float(np.max(self.values))

    @property
    def at_origin(self) -> float:
        c = self.center_index
        return float(self.values[(c,) * self.dim])

    def node_index(self, x: float, rtol: float = 1e-9) -> Optional[int]:
        """Index of the grid node equal to x, or None if x is not a node."""
        k = x / self.h
        j = int(round(k))
        if abs(k - j) > rtol * max(1.0, abs(k)) or abs(j) > self.x.size // 2 - 1:
            return None
        return j + self.center_index

    def value_at(self, x) -> np.ndarray | float:
        """Node values where x is a node, interpolated from the upsampled grid elsewhere (1-D)."""
        if self.dim != 1:
            raise FeatureUnavailableError("point lookup is implemented for 1-D grids")
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        spline = None
        for i, v in enumerate(xs):
            j = self.node_index(v)
            if j is not None:
                out[i] = self.values[j]
                continue
            if abs(v) > self.L - 2 * self.h:
                raise InvalidInputError(f"x={v!r} lies outside the grid extent {self.L!r}")
            if spline is None:
                spline = self._local_spline(float(xs.min()), float(xs.max()))
            out[i] = spline(v)
        return float(out[0]) if np.ndim(x) == 0 else out

    def cdf(self) -> np.ndarray:
        """Cumulative distribution on the nodes (trapezoid rule)."""
        if self.dim != 1:
            raise FeatureUnavailableError("CDF is implemented for 1-D grids")
        return integrate.cumulative_trapezoid(self.values, self.x, initial=0.0)

    def _upsampled(self, upsample: int = 8):
        # zero-padded spectrum: band-limited interpolation onto a grid h / factor
        n = self.values.size
        factor = max(1, min(upsample, (1 << 22) // n))
        spec = np.fft.rfft(np.fft.ifftshift(self.values))
        fine = np.fft.fftshift(np.fft.irfft(spec, n * factor)) * factor
        x = (np.arange(n * factor) - (n * factor) // 2) * (self.h / factor)
        return x, fine

    @cached_property
    def _fine(self):
        return self._upsampled()

    def _local_spline(self, lo: float, hi: float, pad: int = 64) -> CubicSpline:
        x, fine = self._fine
        i = max(0, int(np.searchsorted(x, lo)) - pad)
        j = min(x.size, int(np.searchsorted(x, hi)) + pad)
        return CubicSpline(x[i:j], fine[i:j])

    def cdf_function(self, upsample: int = 8):
        """Callable CDF: spline antiderivative of the spectrally upsampled density."""
        if self.dim != 1:
            raise FeatureUnavailableError("CDF is implemented for 1-D grids")
        x, fine = self._upsampled(upsample)
        anti = CubicSpline(x, fine).antiderivative()
        base = float(anti(x[0]))
        total = float(anti(x[-1])) - base
        lo, hi = x[0], x[-1]

        def F(q):
            q = np.asarray(q, dtype=float)
            return (anti(np.clip(q, lo, hi)) - base) / total

        return F

    def window(self, x_max: float):
        """(x, p) restricted to |x| <= x_max."""
        keep = np.abs(self.x) <= x_max + 1e-12
        if self.dim == 1:
            return self.x[keep], self.values[keep]
        return self.x[keep], self.values[np.ix_(keep, keep)]

    def to_csv(self, path, x_max: Optional[float] = None, extra_header=()):
        from .io import write_text_atomic

        if self.dim != 1:
            raise FeatureUnavailableError("CSV export is implemented for 1-D grids")
        x, p = self.window(x_max) if x_max is not None else (self.x, self.values)
        lines = list(extra_header)
        lines += [f"#t={self.t!r}", f"#model={self.model_name}",
                  f"#mass={self.diagnostics.get('mass', float('nan')):.17g}", "x,p"]
        lines += [f"{a:.17g},{b:.17g}" for a, b in zip(x, p)]
        write_text_atomic(path, "\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# frequency cutoff


def _radial_psi(model: LevyModel, s: np.ndarray) -> np.ndarray:
    pts = np.zeros((s.size, model.dim))
    pts[:, 0] = s
    return model._psi(pts)


def _no_density(model, t, detail):
    hw = "passes" if model.hartman_wintner_ok else "fails"
    return NoDensityError(
        f"exp(-t psi) is not integrable for {model.name or 'model'} at t={t!r} "
        f"({detail}); the Hartman-Wintner check {hw}")


def frequency_cutoff(model: LevyModel, t: float, level: float = CUTOFF_EXPONENT) -> float:
    """Smallest Xi (up to a margin) beyond which t psi >= level along every sampled ray."""
    if model.measure is not None and isinstance(model.measure, DiscreteAtoms) \
            and model.closed_form is None:
        raise _no_density(model, t, "finite Lévy measure: the law has an atom at 0")
    fun = lambda s: t * float(_radial_psi(model, np.array([s]))[0]) - level
    hi = 1.0
    while fun(hi) < 0.0:
        hi *= 2.0
        if hi > MAX_CUTOFF:
            raise _no_density(model, t, f"t psi stays below {level} up to |xi|={MAX_CUTOFF:g}")
    lo = 0.0 if hi == 1.0 else hi / 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if fun(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-3 * hi:
            break
    xi_c = 1.25 * hi
    # psi need not be monotone: confirm the decay holds past the cutoff
    for _ in range(40):
        probe = np.linspace(xi_c, 4.0 * xi_c, 2049)
        if model.dim > 1:
            probe = probe[::8]
        worst = float(np.max(np.exp(-t * _radial_psi(model, probe))))
        if worst <= math.exp(-level) * 1.5:
            return xi_c
        xi_c *= 2.0
        if xi_c > MAX_CUTOFF:
            break
    raise _no_density(model, t, "exp(-t psi) does not decay past the sampled cutoff")


# --------------------------------------------------------------------------
# grids


def grid_spec(model: LevyModel, t: float, x_max: float = 10.0, n_min: Optional[int] = None,
              xi_cut: Optional[float] = None) -> GridSpec:
    """Initial lattice: dyadic spacing resolving the cutoff, period >= 4 x_max."""
    xi_cut = frequency_cutoff(model, t) if xi_cut is None else xi_cut
    h = 2.0 ** math.floor(math.log2(math.pi / xi_cut))
    n_min = (N_MIN if model.dim == 1 else N2D_MIN) if n_min is None else n_min
    n = max(n_min, 1 << int(math.ceil(math.log2(4.0 * x_max / h))))
    return GridSpec(h=h, n=n, dim=model.dim)


def _char_fn_1d(model, t, spec: GridSpec, xi_cut):
    dxi = 2.0 * math.pi / spec.period
    k_max = min(spec.n // 2, int(xi_cut / dxi) + 1)
    xi = np.arange(k_max + 1) * dxi
    phi = np.zeros(spec.n // 2 + 1)
    phi[: k_max + 1] = np.exp(-t * model._psi(xi.reshape(-1, 1)))
    return phi, dxi


def _invert_1d(model, t, spec, xi_cut):
    phi, dxi = _char_fn_1d(model, t, spec, xi_cut)
    raw = np.fft.irfft(phi, n=spec.n) * (spec.n * dxi / (2.0 * math.pi))
    k_tail = int(0.8 * min(spec.n // 2, xi_cut / dxi))
    tail = float(np.sum(phi[k_tail:]) / np.sum(phi))
    return np.fft.fftshift(raw), tail


def _invert_2d(model, t, spec, xi_cut):
    n = spec.n
    dxi = 2.0 * math.pi / spec.period
    k = np.fft.fftfreq(n, d=1.0 / n)
    kr = np.arange(n // 2 + 1)
    KX, KY = np.meshgrid(k, kr, indexing="ij")
    rad = np.hypot(KX, KY) * dxi
    inside = rad <= xi_cut
    phi = np.zeros(KX.shape)
    pts = np.column_stack([KX[inside], KY[inside]]) * dxi
    phi[inside] = np.exp(-t * model._psi(pts))
    raw = np.fft.irfft2(phi, s=(n, n)) * (n * dxi / (2.0 * math.pi)) ** 2
    tail = float(np.sum(phi[rad >= 0.8 * xi_cut]) / np.sum(phi))
    return np.fft.fftshift(raw), tail


def _edge_ratio(values, period, h):
    n = values.shape[0]
    x = (np.arange(n) - n // 2) * h
    far = np.abs(x) >= 0.45 * period
    peak = float(np.max(values))
    if values.ndim == 1:
        edge = np.max(np.abs(values[far]))
    else:
        edge = max(np.max(np.abs(values[far, :])), np.max(np.abs(values[:, far])))
    return float(edge) / peak


def density_grid(model: LevyModel, t: float, x_max: float = 10.0,
                 spec: Optional[GridSpec] = None, n_max: Optional[int] = None,
                 expand: bool = True) -> DensityGrid:
    """Fourier inversion of exp(-t psi) on a uniform lattice (dim 1 or 2)."""
    if not (t > 0 and math.isfinite(t)):
        raise InvalidInputError("t must be positive and finite")
    if model.dim > 2:
        raise FeatureUnavailableError("grid inversion is implemented for dim 1 and 2")
    xi_cut = frequency_cutoff(model, t)
    if spec is None:
        spec = grid_spec(model, t, x_max, xi_cut=xi_cut)
    elif spec.h > math.pi / xi_cut * (1 + 1e-12):
        warnings.warn(f"grid spacing {spec.h!r} under-resolves the frequency cutoff "
                      f"{xi_cut!r}", AccuracyWarning, stacklevel=2)
    n_max = (N_MAX if model.dim == 1 else N2D_MAX) if n_max is None else n_max
    invert = _invert_1d if model.dim == 1 else _invert_2d
    while True:
        values, freq_tail = invert(model, t, spec, xi_cut)
        ratio = _edge_ratio(values, spec.period, spec.h)
        if ratio <= EDGE_RATIO or not expand or spec.n >= n_max:
            break
        spec = GridSpec(spec.h, spec.n * 2, spec.dim)
    if ratio > EDGE_RATIO:
        warnings.warn(f"density has relative mass {ratio:.3g} at the grid edge "
                      f"(period {spec.period!r}); aliasing may exceed tolerances",
                      AccuracyWarning, stacklevel=2)
    min_value = float(np.min(values))
    if min_value < RINGING_FLOOR:
        raise NumericError(
            f"Fourier ringing: density reaches {min_value:.3g} < {RINGING_FLOOR}",
            estimate=min_value, error_bound=abs(min_value))
    clamped = int(np.count_nonzero(values < 0.0))
    values = np.where(values < 0.0, 0.0, values)
    if model.dim == 1:
        mass = float(np.sum(values) * spec.h)
    else:
        mass = float(np.sum(values) * spec.h**2)
    if not model.hartman_wintner_ok:
        warnings.warn("model fails the Hartman-Wintner heuristic; densities may be "
                      "irregular", AccuracyWarning, stacklevel=2)
    x = spec.axis
    values.setflags(write=False)
    x.setflags(write=False)
    diag = {
        "mass": mass,
        "min_value": min_value,
        "frequency_tail_mass": freq_tail,
        "edge_ratio": ratio,
        "clamped": clamped,
        "xi_cut": xi_cut,
        "n": spec.n,
        "period": spec.period,
    }
    return DensityGrid(t=float(t), dim=model.dim, h=spec.h, L=0.5 * spec.period, x=x,
                       values=values, diagnostics=diag, model_name=model.name)


def density_at(model: LevyModel, t: float, x: float) -> float:
    """Single-point inversion (1/pi) \\int_0^Xi exp(-t psi) cos(xi x) d xi (1-D)."""
    if model.dim != 1:
        raise FeatureUnavailableError("pointwise inversion is implemented in 1-D")
    if not (t > 0 and math.isfinite(t)) or not math.isfinite(x):
        raise InvalidInputError("t must be positive and x finite")
    xi_cut = frequency_cutoff(model, t)
    phi = lambda s: math.exp(-t * float(model._psi(np.array([[s]]))[0]))
    opts = dict(limit=2000, epsabs=1e-15, epsrel=1e-12, full_output=1)
    if x == 0.0:
        val, err, *rest = integrate.quad(phi, 0.0, xi_cut, **opts)
    else:
        val, err, *rest = integrate.quad(phi, 0.0, xi_cut, weight="cos", wvar=abs(x),
                                         **opts)
    if len(rest) > 1 and err > 1e-9 * max(abs(val), 1e-300):
        raise NumericError(f"oscillatory quadrature did not converge at x={x!r}",
                           estimate=val / math.pi, error_bound=err / math.pi)
    return val / math.pi


def common_spec(model: LevyModel, times, x_max: float = 10.0) -> GridSpec:
    """One lattice adequate for every time in ``times`` (finest h, widest period)."""
    specs = [density_grid(model, t, x_max).spec for t in times]
    h = min(s.h for s in specs)
    period = max(s.period for s in specs)
    return GridSpec(h, 1 << int(math.ceil(math.log2(period / h - 1e-9))), model.dim)


def semigroup_check(model: LevyModel, t: float, s: float, x_max: float = 10.0,
                    spec: Optional[GridSpec] = None) -> dict:
    """sup |p_{t+s} - p_t * p_s| over the window |x| <= x_max (linear convolution)."""
    if model.dim != 1:
        raise FeatureUnavailableError("semigroup check is implemented in 1-D")
    if spec is None:
        spec = common_spec(model, (t, s, t + s), x_max)
    grids = [density_grid(model, tau, spec=spec, expand=False) for tau in (t, s, t + s)]
    pt, ps, pts = (g.values for g in grids)
    n = spec.n
    conv = signal.fftconvolve(pt, ps, mode="full")[n // 2: n // 2 + n] * spec.h
    window = np.abs(spec.axis) <= x_max
    resid = float(np.max(np.abs(pts[window] - conv[window])))
    return {"residual": resid, "h": spec.h, "n": n,
            "relative": resid / grids[2].peak}
