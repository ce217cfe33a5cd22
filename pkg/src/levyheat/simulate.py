"""Monte Carlo sampling of X_t for the supported Lévy measures.

Large jumps are drawn exactly as compound Poisson sums; jumps smaller than a
truncation level eps are either dropped or replaced by a centred Gaussian
with the same variance t \\int_{|y|<eps} y^2 nu(dy).

Streams are reproducible: chunk k of a run with seed s draws from
PCG64(SeedSequence(s).spawn(...)[k]) and chunks have a fixed size, so the
output for a given (seed, N) never depends on how the work is scheduled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import FeatureUnavailableError, InvalidInputError
from .levy_model import (
    Composite,
    DiscreteAtoms,
    LevyModel,
    RadialDensity,
    SemiStableAtoms,
    TemperedTail,
)

CHUNK = 1 << 17
COMPENSATION_MODES = ("none", "gaussian")


@dataclass(frozen=True, eq=False)
class SamplePlan:
    model: LevyModel
    t: float
    n: int
    seed: int = 0
    eps: Optional[float] = None
    compensation: str = "gaussian"

    def __post_init__(self):
        if not (self.t > 0 and math.isfinite(self.t)):
            raise InvalidInputError("t must be positive and finite")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInputError("sample count must be a positive integer")
        if self.compensation not in COMPENSATION_MODES:
            raise InvalidInputError(f"compensation must be one of {COMPENSATION_MODES}")
        if self.eps is not None and not self.eps > 0:
            raise InvalidInputError("truncation eps must be positive")
        measure = self.model.measure
        if _infinite_activity(measure) and self.eps is None:
            raise InvalidInputError("an infinite-activity measure needs a truncation eps > 0")

    def sidecar(self) -> dict:
        return {"seed": self.seed, "N": self.n, "t": self.t, "model": self.model.name,
                "eps": self.eps, "compensation": self.compensation,
                "dtype": "<f8", "chunk": CHUNK}


def _infinite_activity(measure) -> bool:
    if measure is None or isinstance(measure, DiscreteAtoms):
        return False
    if isinstance(measure, (SemiStableAtoms, RadialDensity)):
        return True
    if isinstance(measure, TemperedTail):
        return _infinite_activity(measure.core)
    if isinstance(measure, Composite):
        return any(_infinite_activity(p) for p in measure.parts)
    return False


def _atoms(measure: DiscreteAtoms, t, n, rng):
    counts = rng.poisson(t * measure.masses, size=(n, measure.masses.size))
    out = counts @ measure.points
    return out[:, 0] if measure.dim == 1 else out


def _semi_stable(measure: SemiStableAtoms, t, n, rng, eps, compensation):
    n_top = int(math.floor(-math.log2(eps) + 1e-12))
    out = np.zeros(n)
    for level in range(n_top + 1):
        rate = t * 2.0 ** (measure.alpha * level)
        up = rng.poisson(rate, size=n)
        down = rng.poisson(rate, size=n)
        out += 2.0**-level * (up - down)
    if compensation == "gaussian":
        out += math.sqrt(t * measure.tail_variance(n_top + 1)) * rng.standard_normal(n)
    return out


def _compound(rate, draw_abs, t, n, rng):
    """Sum of Poisson(t rate) many symmetric jumps with |jump| ~ draw_abs."""
    counts = rng.poisson(t * rate, size=n)
    total = int(counts.sum())
    out = np.zeros(n)
    if total:
        jumps = draw_abs(rng, total) * rng.choice((-1.0, 1.0), size=total)
        owner = np.repeat(np.arange(n), counts)
        out += np.bincount(owner, weights=jumps, minlength=n)
    return out


def _inverse_cdf_table(profile, lo, hi, m=8192):
    r = np.geomspace(lo, hi, m) if lo > 0 else np.linspace(lo, hi, m)
    dens = np.asarray(profile(r), dtype=float)
    cdf = integrate.cumulative_trapezoid(dens, r, initial=0.0)
    return r, cdf / cdf[-1]


def _radial(measure: RadialDensity, t, n, rng, eps, compensation):
    if measure.dim != 1:
        raise FeatureUnavailableError("jump sampling is implemented in 1-D only")
    eps = min(eps, measure.radius)
    out = np.zeros(n)
    if eps < measure.radius:
        rate = measure.mass_beyond(eps)
        r, cdf = _inverse_cdf_table(measure.profile, eps, measure.radius)
        out += _compound(rate, lambda g, k: np.interp(g.random(k), cdf, r), t, n, rng)
    if compensation == "gaussian":
        out += math.sqrt(t * measure.variance_below(eps)) * rng.standard_normal(n)
    return out


def _tempered(measure: TemperedTail, t, n, rng, eps, compensation):
    r, cdf = measure.tail_quantile_table()
    out = _compound(measure.tail_mass, lambda g, k: np.interp(g.random(k), cdf, r),
                    t, n, rng)
    if measure.core is not None:
        out += _sample_measure(measure.core, t, n, rng, eps, compensation)
    return out


def _sample_measure(measure, t, n, rng, eps, compensation):
    if isinstance(measure, DiscreteAtoms):
        return _atoms(measure, t, n, rng)
    if isinstance(measure, SemiStableAtoms):
        return _semi_stable(measure, t, n, rng, eps, compensation)
    if isinstance(measure, RadialDensity):
        return _radial(measure, t, n, rng, eps, compensation)
    if isinstance(measure, TemperedTail):
        return _tempered(measure, t, n, rng, eps, compensation)
    if isinstance(measure, Composite):
        return sum(_sample_measure(p, t, n, rng, eps, compensation) for p in measure.parts)
    raise FeatureUnavailableError(f"no sampler for {measure.variant} measures")


def _sample_chunk(plan: SamplePlan, n, rng):
    model = plan.model
    if model.measure is None:
        if model.closed_form is not None and model.closed_form.tag == "gaussian":
            # psi = |xi|^2  <->  N(0, 2t I)
            z = rng.standard_normal((n, model.dim)) * math.sqrt(2.0 * plan.t)
            return z[:, 0] if model.dim == 1 else z
        raise FeatureUnavailableError(
            f"closed-form channel {model.name!r} has no sampler")
    return _sample_measure(model.measure, plan.t, n, rng, plan.eps, plan.compensation)


def sample_increments(plan: SamplePlan) -> np.ndarray:
    """N independent draws of X_t (approximate below the truncation level)."""
    n_chunks = -(-plan.n // CHUNK)
    children = np.random.SeedSequence(plan.seed).spawn(n_chunks)
    parts = []
    for k, child in enumerate(children):
        size = min(CHUNK, plan.n - k * CHUNK)
        rng = np.random.Generator(np.random.PCG64(child))
        parts.append(np.asarray(_sample_chunk(plan, size, rng), dtype=float))
    return np.concatenate(parts, axis=0)


def empirical_vs_fourier(plan: SamplePlan, grid=None, samples=None) -> dict:
    """KS distance to the Fourier CDF and the histogram-vs-density sup gap (1-D)."""
    from .density import density_grid

    if plan.model.dim != 1:
        raise FeatureUnavailableError("distribution comparison is implemented in 1-D")
    x = sample_increments(plan) if samples is None else np.asarray(samples, dtype=float)
    x = np.sort(x)
    if grid is None:
        grid = density_grid(plan.model, plan.t, x_max=max(abs(x[0]), abs(x[-1]), 1.0) + 1.0)
    cdf = grid.cdf_function()
    F = np.clip(cdf(x), 0.0, 1.0)
    n = x.size
    i = np.arange(1, n + 1)
    ks = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    # histogram on bins of width 4h centred on grid nodes
    width = 4.0 * grid.h
    lo = math.floor(x[0] / width) * width - 0.5 * width
    edges = np.arange(lo, x[-1] + width, width)
    counts, _ = np.histogram(x, bins=edges)
    emp = counts / (n * width)
    exact = np.diff(cdf(edges)) / width
    gap = float(np.max(np.abs(emp - exact)))
    return {"ks_distance": ks, "sup_density_gap": gap, "n": n,
            "ks_critical_95": 1.358 / math.sqrt(n), "bin_width": width}


def save_samples(path, samples: np.ndarray, plan: SamplePlan, extra=None) -> None:
    """Little-endian float64 array at ``path`` plus ``path + '.json'`` sidecar."""
    from .io import write_bytes_atomic, write_text_atomic

    data = np.ascontiguousarray(samples, dtype="<f8").tobytes()
    write_bytes_atomic(path, data)
    meta = plan.sidecar()
    meta["shape"] = list(np.shape(samples))
    meta.update(extra or {})
    write_text_atomic(str(path) + ".json", json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_samples(path) -> tuple[np.ndarray, dict]:
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    data = np.fromfile(path, dtype="<f8").reshape(meta["shape"])
    return data, meta
