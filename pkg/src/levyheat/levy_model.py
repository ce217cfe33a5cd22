"""Symmetric pure-jump Lévy measures and the exponent-level model view.

For a symmetric Lévy measure nu without drift or Gaussian part the
characteristic exponent and the cumulant of X_1 are

    psi(xi)    = \\int (1 - cos(xi . y)) nu(dy),
    Lambda(xi) = \\int (cosh(xi . y) - 1) nu(dy)  = -w(xi),

the latter being finite for all xi exactly when nu has exponential moments.

Frequencies are passed as scalars / 1-D arrays in dimension one and as
``(dim,)`` or ``(m, dim)`` arrays otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .errors import (
    FeatureUnavailableError,
    InvalidInputError,
    NumericError,
    PreconditionError,
)
from .quadrature import MAX_DE_PHASE, de_level, de_unit_nodes

OVERFLOW_ARG = 700.0
_CHUNK = 1 << 21


# --------------------------------------------------------------------------
# argument plumbing


def _as_points(xi, dim):
    """Normalise frequencies to an ``(m, dim)`` array and a shape restorer."""
    arr = np.asarray(xi, dtype=float)
    if dim == 1:
        shape = arr.shape
        pts = arr.reshape(-1, 1)
        restore = (lambda v: float(v[0])) if arr.ndim == 0 else (
            lambda v: v.reshape(shape))
        return pts, restore
    if arr.ndim == 1:
        if arr.shape[0] != dim:
            raise InvalidInputError(f"expected a point of dimension {dim}")
        return arr.reshape(1, dim), lambda v: (
            float(v[0]) if v.ndim == 1 else v[0])
    if arr.ndim == 2 and arr.shape[1] == dim:
        return arr, lambda v: v
    raise InvalidInputError(f"cannot interpret frequencies of shape {arr.shape}")


def _scaled_exp_pair(z, shift):
    """(e^{z-shift}, e^{-z-shift}) without overflow for |z| <= shift + 700."""
    return np.exp(z - shift), np.exp(-z - shift)


def _row_shift(z):
    """Per-row shift used to keep cosh/sinh in range (0 when unnecessary)."""
    m = np.max(np.abs(z), axis=1) if z.size else np.zeros(z.shape[0])
    return np.where(m > OVERFLOW_ARG, m, 0.0)


def _unscale(val, shift):
    sh = shift.reshape((-1,) + (1,) * (val.ndim - 1))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        # log-space product so that val * e^shift stays finite when representable
        out = np.sign(val) * np.exp(np.log(np.abs(val)) + sh)
    return np.where(np.isnan(out), np.inf, out)


# --------------------------------------------------------------------------
# measures


class LevyMeasure:
    """Interface shared by all measure variants (1-D frequency arrays are (m, dim))."""

    variant = "abstract"
    dim = 1
    name = ""

    def psi(self, pts):
        raise NotImplementedError

    def cumulant(self, pts):
        raise NotImplementedError

    def cumulant_grad(self, pts):
        raise NotImplementedError

    def cumulant_hess(self, pts):
        raise NotImplementedError

    def second_moment(self):
        raise NotImplementedError

    def small_jump_mass(self):
        """\\int (1 ^ |y|^2) nu(dy)."""
        raise NotImplementedError

    def has_exp_moments(self) -> bool:
        raise NotImplementedError

    def carre_du_champ(self, u, x):
        raise NotImplementedError


class DiscreteAtoms(LevyMeasure):
    """Finitely many atoms closed under y -> -y with equal masses."""

    variant = "discrete_atoms"

    def __init__(self, points, masses, name="atoms", atol=1e-12):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        ms = np.asarray(masses, dtype=float).reshape(-1)
        if pts.shape[0] != ms.shape[0] or pts.shape[0] == 0:
            raise InvalidInputError("need one positive mass per atom")
        if np.any(ms <= 0) or not np.all(np.isfinite(ms)):
            raise InvalidInputError("atom masses must be positive and finite")
        if np.any(np.all(pts == 0, axis=1)):
            raise InvalidInputError("a Lévy measure has no atom at the origin")
        for p, m in zip(pts, ms):
            hit = np.linalg.norm(pts + p, axis=1) <= atol * np.linalg.norm(p)
            if not np.any(hit) or abs(ms[hit].sum() - m) > atol * max(1.0, m):
                raise InvalidInputError(
                    f"atom {p.tolist()} has no mirror image with equal mass")
        self.points = pts
        self.masses = ms
        self.dim = pts.shape[1]
        self.name = name

    @classmethod
    def symmetric(cls, points, masses, name="atoms"):
        """Atoms at +-points, each side carrying the given mass."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        ms = np.asarray(masses, dtype=float).reshape(-1)
        return cls(np.vstack([pts, -pts]), np.concatenate([ms, ms]), name=name)

    @property
    def support_radius(self):
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    @property
    def total_mass(self):
        return float(self.masses.sum())

    def _phase(self, pts):
        return pts @ self.points.T

    def psi(self, pts):
        out = np.empty(pts.shape[0])
        step = max(1, _CHUNK // max(1, self.points.shape[0]))
        for i in range(0, pts.shape[0], step):
            z = self._phase(pts[i:i + step])
            out[i:i + step] = (2.0 * np.sin(0.5 * z) ** 2) @ self.masses
        return out

    def cumulant(self, pts):
        z = self._phase(pts)
        s = _row_shift(z)
        if not np.any(s):
            return (2.0 * np.sinh(0.5 * z) ** 2) @ self.masses
        ep, em = _scaled_exp_pair(np.abs(z), s[:, None])
        val = (0.5 * (ep + em) - np.exp(-s)[:, None]) @ self.masses
        return _unscale(val, s)

    def cumulant_grad(self, pts):
        z = self._phase(pts)
        s = _row_shift(z)
        ep, em = _scaled_exp_pair(z, s[:, None])
        val = (0.5 * (ep - em)) @ (self.masses[:, None] * self.points)
        return _unscale(val, s)

    def cumulant_hess(self, pts):
        z = self._phase(pts)
        s = _row_shift(z)
        ep, em = _scaled_exp_pair(z, s[:, None])
        outer = np.einsum("k,ki,kj->kij", self.masses, self.points, self.points)
        val = np.einsum("mk,kij->mij", 0.5 * (ep + em), outer)
        return _unscale(val, s)

    def second_moment(self):
        return np.einsum("k,ki,kj->ij", self.masses, self.points, self.points)

    def small_jump_mass(self):
        r2 = np.sum(self.points**2, axis=1)
        return float(np.minimum(1.0, r2) @ self.masses)

    def has_exp_moments(self):
        return True

    def carre_du_champ(self, u, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            ux = u(x)
            acc = np.zeros_like(ux, dtype=float)
            for y, m in zip(self.points[:, 0], self.masses):
                acc = acc + m * (u(x + y) - ux) ** 2
            return 0.5 * acc
        ux = u(x)
        return 0.5 * sum(m * (u(x + y) - ux) ** 2
                         for y, m in zip(self.points, self.masses))

    def atoms(self):
        return self


class SemiStableAtoms(LevyMeasure):
    """nu = sum_{n>=0} 2^{alpha n} (delta_{2^-n} + delta_{-2^-n}) on the line.

    The infinite atom family is summed explicitly while the phase
    |xi| 2^-n exceeds 1e-3; the remaining geometric tail is added in closed
    form from the Taylor expansion of (1 - cos) / (cosh - 1).
    """

    variant = "semi_stable"
    _SMALL = 1e-3

    def __init__(self, alpha: float, name=None):
        if not 0.0 < alpha < 2.0:
            raise InvalidInputError("semi-stable index must lie in (0, 2)")
        self.alpha = float(alpha)
        self.dim = 1
        self.name = name or f"semi_stable({alpha!r})"

    def _levels(self, xi_abs_max):
        if xi_abs_max <= self._SMALL:
            return 0
        return int(math.ceil(math.log2(xi_abs_max / self._SMALL)))

    def _geo(self, gamma, n0):
        # sum_{n >= n0} 2^{gamma n}, gamma < 0
        return 2.0 ** (gamma * n0) / (1.0 - 2.0**gamma)

    def _explicit(self, xi, nlev):
        n = np.arange(nlev)
        return xi[:, None] * 2.0 ** (-n)[None, :], 2.0 ** (self.alpha * n)

    def psi(self, pts):
        xi = pts[:, 0]
        nlev = self._levels(np.max(np.abs(xi), initial=0.0))
        a = self.alpha
        out = np.zeros_like(xi)
        if nlev:
            z, w = self._explicit(xi, nlev)
            out += (4.0 * np.sin(0.5 * z) ** 2) @ w
        x2 = xi * xi
        out += (x2 * self._geo(a - 2, nlev) - x2 * x2 / 12 * self._geo(a - 4, nlev)
                + x2**3 / 360 * self._geo(a - 6, nlev))
        return out

    def _cosh_family(self, xi, kind):
        """Explicit-level sums of 2 w_n k(z_n) with scaling, k in {cosh-1, sinh, cosh}."""
        nlev = self._levels(np.max(np.abs(xi), initial=0.0))
        a = self.alpha
        x2 = xi * xi
        if kind == "c":
            tail = (x2 * self._geo(a - 2, nlev) + x2 * x2 / 12 * self._geo(a - 4, nlev)
                    + x2**3 / 360 * self._geo(a - 6, nlev))
        elif kind == "s":
            tail = (2 * xi * self._geo(a - 2, nlev) + xi**3 / 3 * self._geo(a - 4, nlev)
                    + xi**5 / 60 * self._geo(a - 6, nlev))
        else:
            tail = (2 * self._geo(a - 2, nlev) + x2 * self._geo(a - 4, nlev)
                    + x2 * x2 / 12 * self._geo(a - 6, nlev))
        if not nlev:
            return tail
        z, w = self._explicit(xi, nlev)
        n = np.arange(nlev)
        s = _row_shift(z)
        if kind == "c":
            if not np.any(s):
                val = (4.0 * np.sinh(0.5 * z) ** 2) @ w
                return val + tail
            ep, em = _scaled_exp_pair(np.abs(z), s[:, None])
            val = (ep + em - 2.0 * np.exp(-s)[:, None]) @ w
        elif kind == "s":
            ep, em = _scaled_exp_pair(z, s[:, None])
            val = (ep - em) @ (w * 2.0 ** (-n))
        else:
            ep, em = _scaled_exp_pair(z, s[:, None])
            val = (ep + em) @ (w * 4.0 ** (-n))
        return _unscale(val, s) + tail

    def cumulant(self, pts):
        return self._cosh_family(pts[:, 0], "c")

    def cumulant_grad(self, pts):
        return self._cosh_family(pts[:, 0], "s").reshape(-1, 1)

    def cumulant_hess(self, pts):
        return self._cosh_family(pts[:, 0], "h").reshape(-1, 1, 1)

    def second_moment(self):
        return np.array([[2.0 / (1.0 - 2.0 ** (self.alpha - 2.0))]])

    def small_jump_mass(self):
        return float(self.second_moment()[0, 0])

    def has_exp_moments(self):
        return True

    def truncated(self, n_max: int) -> DiscreteAtoms:
        """Finite atom list for levels 0..n_max."""
        n = np.arange(n_max + 1)
        return DiscreteAtoms.symmetric(2.0 ** (-n), 2.0 ** (self.alpha * n),
                                       name=f"{self.name}[n<={n_max}]")

    def tail_variance(self, n_min: int) -> float:
        """\\int y^2 nu(dy) over the atoms of level >= n_min."""
        return 2.0 * self._geo(self.alpha - 2.0, n_min)

    def carre_du_champ(self, u, x):
        x = np.asarray(x, dtype=float)
        ux = u(x)
        acc = np.zeros_like(ux, dtype=float)
        n_top = 40
        for n in range(n_top):
            y = 2.0**-n
            acc = acc + 2.0 ** (self.alpha * n) * ((u(x + y) - ux) ** 2
                                                  + (u(x - y) - ux) ** 2)
        d = 2.0**-n_top
        slope = (u(x + d) - u(x - d)) / (2 * d)
        acc = acc + slope**2 * self.tail_variance(n_top)
        return 0.5 * acc


class RadialDensity(LevyMeasure):
    """nu(dy) = g(|y|) dy on r_min < |y| < radius, in dimension 1..3.

    Integrals are reduced to the radial variable (spherical means of
    cos / cosh are J0, sinc and I0, sinh(z)/z in dimension 2, 3) and
    evaluated with the fixed double-exponential rule.  For 1-D phases
    beyond the rule's range QUADPACK's cosine-weighted integrator is used.
    """

    variant = "radial_density"

    def __init__(self, profile: Callable, radius: float = 1.0, dim: int = 1,
                 name="radial"):
        if not 1 <= dim <= 3:
            raise PreconditionError("radial densities are supported for dim 1..3")
        if not radius > 0 or not math.isfinite(radius):
            raise InvalidInputError("support radius must be positive and finite")
        self.profile = profile
        self.radius = float(radius)
        self.dim = dim
        self.name = name

    @lru_cache(maxsize=16)
    def _nodes(self, level):
        y, w = de_unit_nodes(level)
        r = self.radius * y
        weight = self.radius * w * np.asarray(self.profile(r), dtype=float)
        weight = weight * {1: 2.0, 2: 2.0 * np.pi * r, 3: 4.0 * np.pi * r * r}[self.dim]
        return r, weight

    # spherical means of cos and cosh
    def _one_minus_cos_mean(self, z):
        if self.dim == 1:
            return 2.0 * np.sin(0.5 * z) ** 2
        small = np.abs(z) < 1e-3
        z2 = z * z
        if self.dim == 2:
            full = 1.0 - special.j0(z)
            series = z2 / 4 - z2 * z2 / 64
        else:
            with np.errstate(invalid="ignore", divide="ignore"):
                full = 1.0 - np.sin(z) / z
            series = z2 / 6 - z2 * z2 / 120
        return np.where(small, series, full)

    def psi(self, pts):
        s = np.linalg.norm(pts, axis=1) if self.dim > 1 else np.abs(pts[:, 0])
        out = np.empty_like(s)
        big = s * self.radius > MAX_DE_PHASE
        if np.any(big) and self.dim == 1:
            out[big] = [self._psi_qawo(v) for v in s[big]]
            rest = ~big
        else:
            rest = np.ones_like(s, dtype=bool)
        if np.any(rest):
            sv = s[rest]
            level = de_level(float(np.max(sv)) * self.radius)
            r, weight = self._nodes(level)
            res = np.empty_like(sv)
            step = max(1, _CHUNK // r.size)
            for i in range(0, sv.size, step):
                z = np.outer(sv[i:i + step], r)
                res[i:i + step] = self._one_minus_cos_mean(z) @ weight
            out[rest] = res
        return out

    def _psi_qawo(self, xi):
        with warnings.catch_warnings():
            return self._psi_qawo_inner(xi)

    def _psi_qawo_inner(self, xi):
        g = self.profile
        a = min(self.radius, 1.0 / xi)
        opts = dict(epsabs=0.0, epsrel=1e-12, limit=400)
        near, _ = integrate.quad(lambda y: 2 * math.sin(0.5 * xi * y) ** 2 * g(y),
                                 0.0, a, **opts)
        flat = osc = 0.0
        if a < self.radius:
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            # geometric panels keep singular profiles well conditioned
            edges = np.geomspace(a, self.radius, 2 + int(np.log2(self.radius / a)))
            for lo, hi in zip(edges[:-1], edges[1:]):
                flat += integrate.quad(g, lo, hi, **opts)[0]
                osc += integrate.quad(g, lo, hi, weight="cos", wvar=xi, **opts)[0]
        return 2.0 * (near + flat - osc)

    def _radial_cosh(self, s, order):
        """Phi^(order)(s) for Phi(s) = int (K(s r) - 1) G(r) dr, with overflow guard."""
        r, weight = self._nodes(5)
        z = np.outer(s, r)
        shift = np.where(s * self.radius > OVERFLOW_ARG, s * self.radius, 0.0)[:, None]
        scale = np.exp(-shift)
        d = self.dim
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if d == 1:
                if not np.any(shift):
                    kern = {0: 2.0 * np.sinh(0.5 * z) ** 2,
                            1: np.sinh(z) * r,
                            2: np.cosh(z) * r * r}[order]
                else:
                    ep, em = np.exp(z - shift), np.exp(-z - shift)
                    kern = {0: 0.5 * (ep + em) - scale,
                            1: 0.5 * (ep - em) * r,
                            2: 0.5 * (ep + em) * r * r}[order]
            elif d == 2:
                small = z < 0.05
                zz = np.where(small, 1.0, z)
                z2 = z * z
                sc = np.exp(z - shift)
                if order == 0:
                    series = (z2 / 4 + z2 * z2 / 64 + z2**3 / 2304) * scale
                    kern = np.where(small, series, special.i0e(zz) * sc - scale)
                elif order == 1:
                    kern = special.i1e(z) * sc * r
                else:
                    series = (0.5 + 3 * z2 / 16 + 5 * z2 * z2 / 384) * scale
                    full = (special.i0e(zz) - special.i1e(zz) / zz) * sc
                    kern = np.where(small, series, full) * r * r
            else:
                small = z < 0.05
                zz = np.where(small, 1.0, z)
                z2 = z * z
                ep, em = np.exp(zz - shift), np.exp(-zz - shift)
                sh, ch = 0.5 * (ep - em), 0.5 * (ep + em)
                if order == 0:
                    series = z2 / 6 + z2 * z2 / 120 + z2**3 / 5040
                    kern = np.where(small, series * scale, sh / zz - scale)
                elif order == 1:
                    series = z / 3 + z * z2 / 30 + z * z2 * z2 / 840
                    kern = np.where(small, series * scale, ch / zz - sh / zz**2) * r
                else:
                    series = 1 / 3 + z2 / 10 + z2 * z2 / 168
                    full = ((zz * zz + 2) * sh - 2 * zz * ch) / zz**3
                    kern = np.where(small, series * scale, full) * r * r
            val = kern @ weight
        return _unscale(val, shift[:, 0])

    def _radial_norm(self, pts):
        return np.linalg.norm(pts, axis=1)

    def cumulant(self, pts):
        s = self._radial_norm(pts)
        return self._radial_cosh(s, 0)

    def cumulant_grad(self, pts):
        if self.dim == 1:
            xi = pts[:, 0]
            return (np.sign(xi) * self._radial_cosh(np.abs(xi), 1)).reshape(-1, 1)
        s = self._radial_norm(pts)
        d1 = self._radial_cosh(s, 1)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(s[:, None] > 0, pts / np.where(s == 0, 1, s)[:, None], 0.0)
        return d1[:, None] * unit

    def cumulant_hess(self, pts):
        if self.dim == 1:
            return self._radial_cosh(np.abs(pts[:, 0]), 2).reshape(-1, 1, 1)
        s = self._radial_norm(pts)
        d1 = self._radial_cosh(s, 1)
        d2 = self._radial_cosh(s, 2)
        eye = np.eye(self.dim)
        out = np.empty((pts.shape[0], self.dim, self.dim))
        for i, (si, p) in enumerate(zip(s, pts)):
            if si == 0:
                out[i] = d2[i] * eye
            else:
                e = p / si
                out[i] = d2[i] * np.outer(e, e) + d1[i] / si * (eye - np.outer(e, e))
        return out

    def second_moment(self):
        r, weight = self._nodes(6)
        return float(np.sum(weight * r * r)) / self.dim * np.eye(self.dim)

    def small_jump_mass(self):
        r, weight = self._nodes(6)
        return float(np.sum(weight * np.minimum(1.0, r * r)))

    def has_exp_moments(self):
        return True

    def mass_beyond(self, eps):
        """nu(|y| >= eps), for simulation."""
        if self.dim != 1:
            raise FeatureUnavailableError("jump sampling is implemented in 1-D only")
        val, _ = integrate.quad(self.profile, eps, self.radius, limit=200,
                                epsabs=0.0, epsrel=1e-12)
        return 2.0 * val

    def variance_below(self, eps):
        if self.dim != 1:
            raise FeatureUnavailableError("jump sampling is implemented in 1-D only")
        val, _ = integrate.quad(lambda r: r * r * self.profile(r), 0.0,
                                min(eps, self.radius), limit=200, epsabs=0.0, epsrel=1e-12)
        return 2.0 * val

    def carre_du_champ(self, u, x):
        if self.dim != 1:
            raise FeatureUnavailableError("carré du champ is implemented in 1-D only")
        r, weight = self._nodes(8)
        x = np.asarray(x, dtype=float)
        ux = u(x)[..., None]
        xs = x[..., None]
        diff = (u(xs + r) - ux) ** 2 + (u(xs - r) - ux) ** 2
        # weight already counts both half-lines
        return 0.25 * diff @ weight


class TemperedTail(LevyMeasure):
    """nu = core + 1_{|y| >= 1} exp(-|y|^beta) dy on the line."""

    variant = "tempered_tail"

    def __init__(self, beta: float, core: Optional[LevyMeasure] = None, name=None):
        if not beta > 0:
            raise InvalidInputError("tail exponent beta must be positive")
        if core is not None and core.dim != 1:
            raise PreconditionError("tempered tails are implemented in dimension 1")
        self.beta = float(beta)
        self.core = core
        self.dim = 1
        self.name = name or f"tempered({beta!r})"

    def _tail_density(self, r):
        return np.exp(-np.abs(r) ** self.beta)

    @cached_property
    def tail_mass(self):
        """\\int_{|y|>=1} exp(-|y|^beta) dy."""
        a = 1.0 / self.beta
        return 2.0 * special.gamma(a) * special.gammaincc(a, 1.0) / self.beta

    _SERIES_XI = 0.25
    _SERIES_TERMS = 40

    def _moment(self, k):
        """\\int_1^inf r^k exp(-r^beta) dr."""
        a = (k + 1.0) / self.beta
        return special.gamma(a) * special.gammaincc(a, 1.0) / self.beta

    @cached_property
    def _series_coeffs(self):
        k = np.arange(1, self._SERIES_TERMS + 1)
        return k, np.array([2.0 * self._moment(2 * j) for j in k])

    def _series(self, xi, order, alternating):
        # 2 sum_k (+-)^{k+1} xi^{2k-order} M_{2k} / (2k-order)!
        k, m = self._series_coeffs
        p = 2 * k - order
        sign = (-1.0) ** (k + 1) if alternating else 1.0
        logf = special.gammaln(p + 1.0)
        with np.errstate(divide="ignore"):
            terms = sign * m * np.exp(p * np.log(abs(xi)) - logf) if xi != 0 else \
                np.where(p == 0, sign * m, 0.0)
        out = float(np.sum(terms[::-1]))
        return -out if order == 1 and xi < 0 else out

    @cached_property
    def _r_far(self):
        return 745.0 ** (1.0 / self.beta)

    def _tail_cos(self, xi):
        """\\int_1^inf cos(xi r) exp(-r^beta) dr."""
        if xi == 0.0:
            return 0.5 * self.tail_mass
        if self.beta == 2.0:
            val = 0.5 * math.sqrt(math.pi) * np.exp(-1.0 + 1j * xi) * special.wofz(
                0.5 * xi + 1j)
            return float(val.real)
        # the density is below e^-745 beyond r_far
        val, _ = integrate.quad(self._tail_density, 1.0, self._r_far, weight="cos",
                                wvar=abs(xi), limit=400, epsabs=0.0, epsrel=1e-13)
        return val

    def _tail_psi(self, xi):
        return np.array([self._series(v, 0, True) if abs(v) <= self._SERIES_XI
                         else self.tail_mass - 2.0 * self._tail_cos(v) for v in xi])

    def psi(self, pts):
        out = self._tail_psi(pts[:, 0])
        if self.core is not None:
            out = out + self.core.psi(pts)
        return out

    def _tail_cosh_scalar(self, xi, order):
        if self.beta <= 1.0:
            raise FeatureUnavailableError(
                "tail exp(-|y|^beta) with beta <= 1 has no exponential moments (A1)")
        if abs(xi) <= self._SERIES_XI:
            return self._series(xi, order, False)
        b = self.beta
        s = abs(xi)
        r0 = max(1.0, (s / b) ** (1.0 / (b - 1.0))) if s > 0 else 1.0
        hmax = s * r0 - r0**b
        shift = hmax if hmax > OVERFLOW_ARG else 0.0
        r_up = max(2.0 * r0, 2.0)
        while s * r_up - r_up**b > min(hmax, 0.0) - 60.0:
            r_up *= 1.5
        if order == 0:
            def f(r):
                e = -r**b - shift
                return 0.5 * (math.exp(s * r + e) + math.exp(-s * r + e)) - math.exp(e)
        elif order == 1:
            def f(r):
                e = -r**b - shift
                return 0.5 * r * (math.exp(s * r + e) - math.exp(-s * r + e))
        else:
            def f(r):
                e = -r**b - shift
                return 0.5 * r * r * (math.exp(s * r + e) + math.exp(-s * r + e))
        pts = [r0] if 1.0 < r0 < r_up else None
        val, _ = integrate.quad(f, 1.0, r_up, points=pts, limit=400, epsabs=0.0,
                                epsrel=1e-13)
        with np.errstate(over="ignore"):
            out = 2.0 * val * np.exp(shift)
        if order == 1 and xi < 0:
            out = -out
        return float(out)

    def cumulant(self, pts):
        out = np.array([self._tail_cosh_scalar(v, 0) for v in pts[:, 0]])
        return out + (self.core.cumulant(pts) if self.core is not None else 0.0)

    def cumulant_grad(self, pts):
        out = np.array([self._tail_cosh_scalar(v, 1) for v in pts[:, 0]]).reshape(-1, 1)
        return out + (self.core.cumulant_grad(pts) if self.core is not None else 0.0)

    def cumulant_hess(self, pts):
        out = np.array([self._tail_cosh_scalar(v, 2) for v in pts[:, 0]]).reshape(-1, 1, 1)
        return out + (self.core.cumulant_hess(pts) if self.core is not None else 0.0)

    def second_moment(self):
        a = 3.0 / self.beta
        tail = 2.0 * special.gamma(a) * special.gammaincc(a, 1.0) / self.beta
        core = self.core.second_moment() if self.core is not None else 0.0
        return np.array([[tail]]) + core

    def small_jump_mass(self):
        core = self.core.small_jump_mass() if self.core is not None else 0.0
        return self.tail_mass + core

    def has_exp_moments(self):
        core_ok = self.core is None or self.core.has_exp_moments()
        return self.beta > 1.0 and core_ok

    def tail_quantile_table(self, n=4096):
        """Grid of |y| and the tail CDF on [1, r_hi] for inverse-CDF sampling."""
        r_hi = 1.0
        while r_hi**self.beta < 745.0:
            r_hi *= 1.25
        r = np.linspace(1.0, r_hi, n)
        dens = self._tail_density(r)
        cdf = integrate.cumulative_trapezoid(dens, r, initial=0.0)
        return r, cdf / cdf[-1]

    def carre_du_champ(self, u, x):
        x = float(x)
        ux = u(x)
        f = lambda y: (u(x + y) - ux) ** 2 * self._tail_density(y)
        right, _ = integrate.quad(f, 1.0, np.inf, limit=200)
        left, _ = integrate.quad(f, -np.inf, -1.0, limit=200)
        core = self.core.carre_du_champ(u, x) if self.core is not None else 0.0
        return 0.5 * (right + left) + core


class Composite(LevyMeasure):
    variant = "composite"

    def __init__(self, parts: Sequence[LevyMeasure], name="composite"):
        if not parts:
            raise InvalidInputError("a composite measure needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise InvalidInputError("all parts of a composite measure share a dimension")
        self.parts = tuple(parts)
        self.dim = dims.pop()
        self.name = name

    def _sum(self, method, pts):
        return sum(getattr(p, method)(pts) for p in self.parts)

    def psi(self, pts):
        return self._sum("psi", pts)

    def cumulant(self, pts):
        return self._sum("cumulant", pts)

    def cumulant_grad(self, pts):
        return self._sum("cumulant_grad", pts)

    def cumulant_hess(self, pts):
        return self._sum("cumulant_hess", pts)

    def second_moment(self):
        return sum(p.second_moment() for p in self.parts)

    def small_jump_mass(self):
        return sum(p.small_jump_mass() for p in self.parts)

    def has_exp_moments(self):
        return all(p.has_exp_moments() for p in self.parts)

    def carre_du_champ(self, u, x):
        return sum(p.carre_du_champ(u, x) for p in self.parts)


# --------------------------------------------------------------------------
# closed-form exponents (oracle channel)


@dataclass(frozen=True, eq=False)
class ClosedFormPsi:
    """Exponent given by formula; bypasses any measure."""

    tag: str
    psi: Callable
    cumulant: Optional[Callable] = None
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    second_moment: Optional[np.ndarray] = None
    has_exp_moments: bool = False


def gaussian_psi(dim=1) -> ClosedFormPsi:
    """psi = |xi|^2 (generator = Laplacian), Lambda(xi) = |xi|^2."""
    return ClosedFormPsi(
        tag="gaussian",
        psi=lambda p: np.sum(p * p, axis=1),
        cumulant=lambda p: np.sum(p * p, axis=1),
        grad=lambda p: 2.0 * p,
        hess=lambda p: np.broadcast_to(2.0 * np.eye(p.shape[1]),
                                       (p.shape[0], p.shape[1], p.shape[1])).copy(),
        second_moment=2.0 * np.eye(dim),
        has_exp_moments=True,
    )


def stable_psi(alpha: float) -> ClosedFormPsi:
    if not 0.0 < alpha <= 2.0:
        raise InvalidInputError("stable index must lie in (0, 2]")
    return ClosedFormPsi(tag=f"stable({alpha!r})",
                         psi=lambda p: np.linalg.norm(p, axis=1) ** alpha)


def subordinate_psi(f) -> ClosedFormPsi:
    """psi(xi) = f(|xi|^2) for a Bernstein function f."""
    return ClosedFormPsi(tag=f"subordinate({f.name or f.kind})",
                         psi=lambda p: np.asarray(f(np.sum(p * p, axis=1)), dtype=float))


# --------------------------------------------------------------------------
# model


@dataclass(frozen=True, eq=False)
class LevyModel:
    measure: Optional[LevyMeasure] = None
    dim: int = 1
    closed_form: Optional[ClosedFormPsi] = None
    name: str = ""
    bernstein: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.measure is None and self.closed_form is None:
            raise InvalidInputError("a model needs a measure or a closed-form exponent")
        if self.measure is not None and self.measure.dim != self.dim:
            raise InvalidInputError("model and measure dimensions differ")

    # exponent-level views on (m, dim) arrays
    def _psi(self, pts):
        if self.closed_form is not None:
            return np.asarray(self.closed_form.psi(pts), dtype=float)
        return self.measure.psi(pts)

    def _require_exp(self):
        if not self.has_exp_moments:
            raise FeatureUnavailableError(
                f"{self.name or 'model'} has no exponential moments (assumption A1); "
                "the cumulant is infinite off the origin")

    def _cumulant(self, pts):
        self._require_exp()
        if self.closed_form is not None and self.closed_form.cumulant is not None:
            return self.closed_form.cumulant(pts)
        return self.measure.cumulant(pts)

    def _grad(self, pts):
        self._require_exp()
        if self.closed_form is not None and self.closed_form.grad is not None:
            return self.closed_form.grad(pts)
        return self.measure.cumulant_grad(pts)

    def _hess(self, pts):
        self._require_exp()
        if self.closed_form is not None and self.closed_form.hess is not None:
            return self.closed_form.hess(pts)
        return self.measure.cumulant_hess(pts)

    @cached_property
    def has_exp_moments(self) -> bool:
        if self.closed_form is not None and self.closed_form.cumulant is not None:
            return self.closed_form.has_exp_moments
        if self.measure is None:
            return False
        return check_exp_moments(self.measure)

    @cached_property
    def hartman_wintner_ok(self) -> bool:
        return check_hartman_wintner(self, 1.0)

    @property
    def flags(self) -> dict:
        return {"has_exp_moments": self.has_exp_moments,
                "hartman_wintner_ok": self.hartman_wintner_ok}

    @cached_property
    def second_moment_matrix(self) -> np.ndarray:
        if self.closed_form is not None:
            if self.closed_form.second_moment is not None:
                return np.asarray(self.closed_form.second_moment, dtype=float)
            return np.full((self.dim, self.dim), np.inf)
        return np.asarray(self.measure.second_moment(), dtype=float)

    @property
    def quadratic_constant(self) -> float:
        """c = lambda_min(second moment) / 2, so that Lambda(xi) >= c |xi|^2."""
        return 0.5 * float(np.min(np.linalg.eigvalsh(self.second_moment_matrix)))


def symmetric_atoms_model(points, masses, name="atoms") -> LevyModel:
    measure = DiscreteAtoms.symmetric(points, masses, name=name)
    return LevyModel(measure=measure, dim=measure.dim, name=name)


def atoms_model(points, masses, name="atoms") -> LevyModel:
    measure = DiscreteAtoms(points, masses, name=name)
    return LevyModel(measure=measure, dim=measure.dim, name=name)


def semi_stable_model(alpha: float) -> LevyModel:
    measure = SemiStableAtoms(alpha)
    return LevyModel(measure=measure, dim=1, name=measure.name)


def tempered_model(beta: float, core: Optional[LevyMeasure] = None) -> LevyModel:
    measure = TemperedTail(beta, core)
    return LevyModel(measure=measure, dim=1, name=measure.name)


def gaussian_model(dim: int = 1) -> LevyModel:
    return LevyModel(dim=dim, closed_form=gaussian_psi(dim), name="gaussian")


def stable_model(alpha: float, dim: int = 1) -> LevyModel:
    cf = stable_psi(alpha)
    return LevyModel(dim=dim, closed_form=cf, name=cf.tag)


def subordinate_model(f, dim: int = 1) -> LevyModel:
    cf = subordinate_psi(f)
    return LevyModel(dim=dim, closed_form=cf, name=cf.tag, bernstein=f)


# --------------------------------------------------------------------------
# operations


def psi(model: LevyModel, xi):
    """Characteristic exponent \\int (1 - cos(xi . y)) nu(dy)."""
    pts, restore = _as_points(xi, model.dim)
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("frequencies must be finite")
    return restore(model._psi(pts))


def cumulant(model: LevyModel, xi):
    """Lambda(xi) = \\int (cosh(xi . y) - 1) nu(dy); +inf past the float range."""
    pts, restore = _as_points(xi, model.dim)
    return restore(np.asarray(model._cumulant(pts), dtype=float))


def cumulant_grad(model: LevyModel, xi):
    pts, restore = _as_points(xi, model.dim)
    g = np.asarray(model._grad(pts), dtype=float)
    if model.dim == 1:
        return restore(g[:, 0])
    return g[0] if np.asarray(xi).ndim == 1 else g


def cumulant_hess(model: LevyModel, xi):
    pts, restore = _as_points(xi, model.dim)
    h = np.asarray(model._hess(pts), dtype=float)
    if np.asarray(xi).ndim <= (0 if model.dim == 1 else 1):
        return h[0]
    return h


def check_exp_moments(measure: LevyMeasure) -> bool:
    """Assumption A1: \\int_{|y|>=1} e^{a.y} nu(dy) < inf for every a."""
    return bool(measure.has_exp_moments())


def hartman_wintner_ratios(model: LevyModel, k_max: int = 24):
    """psi(2^k e_1) / log(1 + 2^k) for k = 0..k_max."""
    k = np.arange(k_max + 1)
    s = 2.0**k
    pts = np.zeros((k.size, model.dim))
    pts[:, 0] = s
    return s, model._psi(pts) / np.log1p(s)


def check_hartman_wintner(model: LevyModel, C: float, k_max: int = 24) -> bool:
    """Heuristic: min of psi/log(1+|xi|) over the upper half of a dyadic grid exceeds C."""
    _, ratio = hartman_wintner_ratios(model, k_max)
    return bool(np.min(ratio[k_max // 2:]) > C)


def gamma_op(model: LevyModel, u: Callable, x):
    """Carré du champ Gamma(u, u)(x) = 1/2 \\int (u(x+y) - u(x))^2 nu(dy)."""
    if model.measure is None:
        raise FeatureUnavailableError(
            "the carré du champ needs a Lévy measure; closed-form channels have none")
    out = model.measure.carre_du_champ(u, x)
    return float(out) if np.ndim(out) == 0 else out


def polynomial_bound_constant(model: LevyModel, n: int = 257) -> float:
    """c_psi = sup_{|eta| <= 1} psi(eta), sampled."""
    r = np.linspace(0.0, 1.0, n)
    if model.dim == 1:
        return float(np.max(model._psi(r.reshape(-1, 1))))
    rng = np.random.default_rng(0)
    dirs = rng.normal(size=(16, model.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = (r[:, None, None] * dirs[None]).reshape(-1, model.dim)
    return float(np.max(model._psi(pts)))


def validate_model(model: LevyModel, rng=None, n: int = 64) -> dict:
    """Numerical audit of the model invariants; returns named booleans and details."""
    rng = np.random.default_rng(0) if rng is None else rng
    pts = rng.normal(scale=3.0, size=(n, model.dim))
    p = model._psi(pts)
    pm = model._psi(-pts)
    zero = float(model._psi(np.zeros((1, model.dim)))[0])
    c_psi = polynomial_bound_constant(model)
    big = np.vstack([pts, 10.0 * pts])
    bound_ok = bool(np.all(model._psi(big) <= c_psi * (1 + np.sum(big**2, axis=1))
                           * (1 + 1e-9) + 1e-12))
    checks = {
        "psi_zero_at_origin": abs(zero) <= 1e-14,
        "psi_even": bool(np.allclose(p, pm, rtol=1e-10, atol=1e-12)),
        "psi_nonnegative": bool(np.all(p >= -1e-12)),
        "polynomial_bound": bound_ok,
    }
    if model.measure is not None:
        mass = model.measure.small_jump_mass()
        checks["integrable"] = bool(np.isfinite(mass))
    details = {"c_psi": c_psi, "flags": model.flags}
    if model.has_exp_moments:
        lam = np.asarray(model._cumulant(pts), dtype=float)
        c = model.quadratic_constant
        checks["cumulant_quadratic_lower_bound"] = bool(
            np.all(lam >= c * np.sum(pts**2, axis=1) * (1 - 1e-10) - 1e-12))
    return {"checks": checks, "ok": all(checks.values()), "details": details}
