"""Univariate probability densities evaluated in the log domain.

Every density carries ``log_pdf`` and ``log_pdf_derivative`` as vectorised
callables.  Zeros of the density map to ``-inf`` in ``log_pdf``; the
locations of isolated interior zeros are recorded on the support so that
quadrature can use them as breakpoints.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import log_ndtr, logsumexp

from .errors import (
    DensityError,
    NegativeDensity,
    NormalizationError,
    TooFewPoints,
    UnsortedAbscissae,
)
from .hermite import hermite_zeros, scaled_hermite
from .quadrature import QuadConfig, integrate

# exp(x) underflows to zero below this
LOG_UNDERFLOW = -745.0
# Fisher quantities of gamma-like densities exist only for beta > 1
GAMMA_FISHER_MIN_BETA = 1.0 + 1e-6

_LOG_SQRT_PI = 0.5 * math.log(math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Support:
    """Open interval ``(lower, upper)`` plus isolated interior zeros of a density."""

    lower: float
    upper: float
    interior_zeros: tuple = ()

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise ValueError(f"support needs lower < upper, got ({lo}, {hi})")
        zeros = tuple(float(z) for z in self.interior_zeros)
        for z in zeros:
            if not lo < z < hi:
                raise ValueError(f"interior zero {z} outside ({lo}, {hi})")
        if any(b <= a for a, b in zip(zeros, zeros[1:])):
            raise ValueError("interior zeros must be strictly increasing")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "interior_zeros", zeros)

    @property
    def is_finite(self):
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lower) & (x < self.upper)


@dataclass(frozen=True, eq=False)
class Density:
    """A probability density on ``support`` with log-domain evaluation.

    ``window`` is the finite interval used for integration (infinite supports
    are truncated where the density is below double-precision underflow).
    ``nodes`` are extra quadrature breakpoints that are not zeros, such as
    zeros of mixture components or kinks of an interpolant.
    """

    support: Support
    log_pdf: Callable[[np.ndarray], np.ndarray]
    log_pdf_derivative: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    window: Optional[tuple] = None
    nodes: tuple = ()
    fisher_admissible: bool = True
    fisher_note: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.window is None:
            if not self.support.is_finite:
                raise ValueError("a density on an infinite support needs a finite window")
            object.__setattr__(self, "window", (self.support.lower, self.support.upper))
        lo, hi = self.window
        object.__setattr__(self, "window", (float(lo), float(hi)))

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def __call__(self, x):
        return self.pdf(x)

    @property
    def interior_zeros(self):
        return self.support.interior_zeros

    def breakpoints(self):
        """Sorted interior zeros and nodes strictly inside the window."""
        lo, hi = self.window
        pts = {p for p in self.support.interior_zeros + tuple(self.nodes) if lo < p < hi}
        return tuple(sorted(pts))

    def __repr__(self):
        return f"Density({self.label or 'unnamed'})"


# -- parameter records ---------------------------------------------------------


@dataclass(frozen=True)
class SinusoidalParams:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"sinusoidal quantum number must be an integer >= 1, got {self.n}")


@dataclass(frozen=True)
class GammaLikeParams:
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"gamma-like exponent must be >= 0, got {self.beta}")

    @property
    def fisher_admissible(self):
        return self.beta == 0 or self.beta > GAMMA_FISHER_MIN_BETA


@dataclass(frozen=True)
class HermiteParams:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"Hermite level must be an integer >= 0, got {self.n}")


@dataclass(frozen=True)
class WeightVector:
    weights: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValueError("weight vector is empty")
        if any(not math.isfinite(v) or v < 0 for v in w):
            raise ValueError(f"weights must be finite and non-negative, got {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got sum {math.fsum(w)!r}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n):
        return cls((1.0 / n,) * n)

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)


def _as(params, cls, attr):
    return params if isinstance(params, cls) else cls(**{attr: params})


def _tail_cut(log_pdf, start, stop):
    """Outermost point in [start, stop] where log_pdf is still above underflow."""
    f = lambda x: float(log_pdf(np.array([x]))[0]) - LOG_UNDERFLOW
    if f(stop) >= 0:
        return stop
    return brentq(f, start, stop, xtol=1e-10)


# -- families -----------------------------------------------------------------


def make_sinusoidal(n):
    """Particle-in-a-box density ``2 sin^2(pi n x)`` on (0, 1)."""
    n = _as(n, SinusoidalParams, "n").n

    def reduced(x):
        t = n * np.asarray(x, dtype=float)
        return math.pi * (t - np.round(t))

    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        with np.errstate(divide="ignore"):
            val = math.log(2.0) + 2.0 * np.log(np.abs(np.sin(reduced(x))))
        return np.where(inside, val, -np.inf)

    def dlog(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        r = reduced(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 2.0 * math.pi * n * np.cos(r) / np.sin(r)
        return np.where(inside, val, 0.0)

    zeros = tuple(k / n for k in range(1, n))
    return Density(
        Support(0.0, 1.0, zeros), log_pdf, dlog, label=f"sinusoidal(n={n})", params={"n": n}
    )


def make_gamma_like(beta):
    """Generalised gamma-like density ``|x|^beta exp(-x^2/2)`` normalised on the real line."""
    beta = float(_as(beta, GammaLikeParams, "beta").beta)
    log_norm = 0.5 * math.log(2.0) + 0.5 * beta * math.log(2.0) + math.lgamma(0.5 * (1.0 + beta))

    if beta == 0:
        def log_pdf(x):
            x = np.asarray(x, dtype=float)
            return -0.5 * x * x - log_norm
    else:
        def log_pdf(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return beta * np.log(np.abs(x)) - 0.5 * x * x - log_norm

    def dlog(x):
        x = np.asarray(x, dtype=float)
        if beta == 0:
            return -x
        with np.errstate(divide="ignore"):
            return beta / x - x

    mode = math.sqrt(max(beta, 1.0))
    cut = _tail_cut(log_pdf, mode, 200.0)
    admissible = beta == 0 or beta > GAMMA_FISHER_MIN_BETA
    note = "" if admissible else (
        f"Fisher information of the gamma-like density diverges for 0 < beta <= 1 (beta={beta})"
    )
    return Density(
        Support(-math.inf, math.inf, (0.0,) if beta > 0 else ()),
        log_pdf,
        dlog,
        label=f"gamma(beta={beta:g})",
        window=(-cut, cut),
        fisher_admissible=admissible,
        fisher_note=note,
        params={"beta": beta},
    )


def make_rakhmanov_hermite(n):
    """Harmonic-oscillator density ``exp(-x^2) H_n(x)^2 / (2^n n! sqrt(pi))``."""
    n = _as(n, HermiteParams, "n").n
    root = math.sqrt(2.0 * n)

    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        h, _, log_scale = scaled_hermite(n, x)
        with np.errstate(divide="ignore"):
            return -x * x + 2.0 * (np.log(np.abs(h)) + log_scale) - _LOG_SQRT_PI

    def dlog(x):
        x = np.asarray(x, dtype=float)
        if n == 0:
            return -2.0 * x
        h, h_prev, _ = scaled_hermite(n, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -2.0 * x + 2.0 * root * h_prev / h

    bound = math.sqrt(2.0 * (2 * n + 1)) + 10.0
    cut = _tail_cut(log_pdf, math.sqrt(2 * n + 1), bound)
    zeros = tuple(hermite_zeros(n)) if n > 0 else ()
    return Density(
        Support(-math.inf, math.inf, zeros),
        log_pdf,
        dlog,
        label=f"hermite(n={n})",
        window=(-cut, cut),
        params={"n": n},
    )


def make_gaussian(mean=0.0, sigma=1.0):
    mean, sigma = float(mean), float(sigma)
    if not (math.isfinite(mean) and math.isfinite(sigma) and sigma > 0):
        raise ValueError(f"gaussian needs finite mean and sigma > 0, got ({mean}, {sigma})")
    log_norm = math.log(sigma) + _LOG_SQRT_2PI

    def log_pdf(x):
        z = (np.asarray(x, dtype=float) - mean) / sigma
        return -0.5 * z * z - log_norm

    def dlog(x):
        return -(np.asarray(x, dtype=float) - mean) / sigma**2

    half = sigma * math.sqrt(2.0 * (-LOG_UNDERFLOW - log_norm))
    return Density(
        Support(-math.inf, math.inf),
        log_pdf,
        dlog,
        label=f"gaussian(mean={mean:g},sigma={sigma:g})",
        window=(mean - half, mean + half),
        params={"mean": mean, "sigma": sigma},
    )


def make_uniform(lower=0.0, upper=1.0):
    lower, upper = float(lower), float(upper)
    support = Support(lower, upper)
    log_height = -math.log(upper - lower)

    def log_pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where((x > lower) & (x < upper), log_height, -np.inf)

    def dlog(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return Density(
        support, log_pdf, dlog, label=f"uniform({lower:g},{upper:g})",
        params={"lower": lower, "upper": upper},
    )


def make_smooth_uniform(half_width=1.0, softness=0.25):
    """Uniform density on (-half_width, half_width) convolved with N(0, softness^2).

    A smooth plateau: ``(Phi((x+a)/s) - Phi((x-a)/s)) / (2a)``.
    """
    a, s = float(half_width), float(softness)
    if not (a > 0 and s > 0):
        raise ValueError("smooth uniform needs half_width > 0 and softness > 0")
    log_2a = math.log(2.0 * a)

    def parts(x):
        # pdf is even; work with |x| so both Phi tails are upper tails
        ax = np.abs(np.asarray(x, dtype=float))
        u, v = (ax + a) / s, (ax - a) / s
        lu, lv = log_ndtr(-u), log_ndtr(-v)
        log_mass = lv + np.log1p(-np.exp(lu - lv))
        return ax, u, v, log_mass

    def log_pdf(x):
        return parts(x)[3] - log_2a

    def dlog(x):
        x = np.asarray(x, dtype=float)
        ax, u, v, log_mass = parts(x)
        log_phi = lambda t: -0.5 * t * t - _LOG_SQRT_2PI
        d_abs = (np.exp(log_phi(u) - log_mass) - np.exp(log_phi(v) - log_mass)) / s
        return np.sign(x) * d_abs

    edge = a + s * math.sqrt(-2.0 * LOG_UNDERFLOW)
    cut = _tail_cut(log_pdf, a, edge)
    return Density(
        Support(-math.inf, math.inf),
        log_pdf,
        dlog,
        label=f"smooth_uniform(a={a:g},s={s:g})",
        window=(-cut, cut),
        params={"half_width": a, "softness": s},
    )


# -- mixtures -----------------------------------------------------------------


def _is_zero_of(density, z):
    if not density.support.lower < z < density.support.upper:
        return True
    tol = 1e-12 * max(1.0, abs(z))
    return any(abs(z - q) <= tol for q in density.support.interior_zeros)


def _dip_nodes(near_zeros, active, log_pdf, nodes):
    """Breakpoints at the edges of the narrow dips a mixture has at its components' zeros.

    Where some components vanish like ``c (x - z)^2`` and the rest leave a
    small floor ``delta``, the mixture dips over a width ``sqrt(delta / c)``
    that an adaptive rule on coarse panels can step over entirely.
    """
    if not near_zeros:
        return []
    others = np.array(sorted(nodes))
    out = []
    for z in near_zeros:
        floor = math.exp(float(log_pdf(np.array([z]))[0]))
        t = 1e-6 * max(1.0, abs(z))
        c = sum(
            w * 0.5 * float(np.sum(d.pdf(np.array([z - t, z + t])))) / (t * t)
            for w, d in active
            if _is_zero_of(d, z)
        )
        if not (floor > 0 and c > 0):
            continue
        width = math.sqrt(floor / c)
        gaps = np.abs(others - z)
        nearest = float(np.min(gaps[gaps > 0])) if np.any(gaps > 0) else math.inf
        # the dip has Lorentzian flanks, so nodes go out geometrically to the neighbours
        while 64 * np.spacing(abs(z)) < width < 0.25 * nearest:
            out += [z - width, z + width]
            width *= 64.0
    return out


def mixture(densities: Sequence[Density], weights) -> Density:
    """Pointwise weighted sum of densities, evaluated with log-sum-exp."""
    densities = list(densities)
    if not isinstance(weights, WeightVector):
        weights = WeightVector(tuple(weights))
    if len(densities) != len(weights):
        raise ValueError(f"{len(densities)} densities but {len(weights)} weights")
    active = [(w, d) for w, d in zip(weights, densities) if w > 0]
    log_w = np.array([math.log(w) for w, _ in active])[:, None]
    comps = [d for _, d in active]

    def _stack(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        return x.shape, flat, np.stack([d.log_pdf(flat) for d in comps]) + log_w

    def log_pdf(x):
        shape, _, terms = _stack(x)
        with np.errstate(divide="ignore"):
            return logsumexp(terms, axis=0).reshape(shape)

    def dlog(x):
        shape, flat, terms = _stack(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            total = logsumexp(terms, axis=0)
            resp = np.exp(terms - total)
            slopes = np.stack([d.log_pdf_derivative(flat) for d in comps])
            out = np.where(resp > 0, resp * slopes, 0.0).sum(axis=0)
        out = np.where(np.isfinite(total), out, 0.0)
        return out.reshape(shape)

    lower = min(d.support.lower for d in comps)
    upper = max(d.support.upper for d in comps)
    candidates = sorted({z for d in comps for z in d.support.interior_zeros})
    common = tuple(z for z in candidates if all(_is_zero_of(d, z) for d in comps))
    nodes = set()
    for d in comps:
        nodes.update(d.breakpoints())
        nodes.update(e for e in (d.support.lower, d.support.upper) if math.isfinite(e))
    nodes.difference_update(common)
    nodes.update(_dip_nodes([z for z in candidates if z not in common], active, log_pdf, nodes))
    nodes = tuple(sorted(p for p in nodes if lower < p < upper))
    window = (min(d.window[0] for d in comps), max(d.window[1] for d in comps))
    admissible = all(d.fisher_admissible for d in comps)
    note = "; ".join(d.fisher_note for d in comps if not d.fisher_admissible)
    label = "mix(" + ", ".join(f"{w:g}*{d.label}" for w, d in active) + ")"
    return Density(
        Support(lower, upper, common),
        log_pdf,
        dlog,
        label=label,
        window=window,
        nodes=nodes,
        fisher_admissible=admissible,
        fisher_note=note,
    )


# -- tabulated densities --------------------------------------------------------


@dataclass(frozen=True)
class GridDensity:
    abscissae: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.abscissae, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape:
            raise DensityError("abscissae and values must be 1-d arrays of equal length")
        if x.size < 4:
            raise TooFewPoints(f"a grid density needs at least 4 points, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DensityError("grid contains non-finite numbers")
        if np.any(np.diff(x) <= 0):
            raise UnsortedAbscissae("abscissae must be strictly increasing")
        if np.any(v < 0):
            i = int(np.argmax(v < 0))
            raise NegativeDensity(f"negative density value {v[i]!r} at x={x[i]!r}")
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "values", v)

    def trapezoid(self):
        return float(np.trapezoid(self.values, self.abscissae))

    def lobes(self):
        """Index runs between numerical zeros (exact zeros or vanishing local minima)."""
        v = self.values
        small = 1e-8 * v.max()
        sep = v == 0
        interior = np.arange(1, v.size - 1)
        minima = (v[interior] <= v[interior - 1]) & (v[interior] <= v[interior + 1])
        sep[interior[minima & (v[interior] <= small)]] = True
        runs, start = [], None
        for i, s in enumerate(sep):
            if not s and start is None:
                start = i
            elif s and start is not None:
                runs.append((start, i))
                start = None
        if start is not None:
            runs.append((start, v.size))
        return runs


def read_grid_file(path):
    """Parse ``x,value`` records; ``#`` lines and blank lines are skipped."""
    xs, vs = [], []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise DensityError(f"{path}:{lineno}: expected 2 comma-separated fields, got {len(fields)}")
        try:
            xs.append(float(fields[0]))
            vs.append(float(fields[1]))
        except ValueError as exc:
            raise DensityError(f"{path}:{lineno}: {exc}") from None
    return GridDensity(np.array(xs), np.array(vs))


_GRID_ZERO = 1e-12


def _numerical_zeros(v):
    """Exact zeros plus local minima negligible against the peak (e.g. sin^2 sampled at pi)."""
    zero = v == 0
    padded = np.concatenate([[np.inf], v, [np.inf]])
    minima = (v <= padded[:-2]) & (v <= padded[2:])
    return zero | (minima & (v <= _GRID_ZERO * v.max()))


def grid_density(grid: GridDensity, renormalize=False, label="grid") -> Density:
    """Wrap tabulated values as a Density.

    Log values are interpolated with a monotone cubic on each run of
    positive samples.  Cells touching a zero sample interpolate ``sqrt(pdf)``
    linearly, so zeros are of second order as for smooth densities and the
    Fisher information stays finite.
    """
    mass = grid.trapezoid()
    if not mass > 0:
        raise NormalizationError("grid density has zero mass")
    if renormalize:
        grid = GridDensity(grid.abscissae, grid.values / mass)
    elif abs(mass - 1.0) > 0.01:
        raise NormalizationError(f"grid integrates to {mass!r}; pass renormalize to rescale")
    x = grid.abscissae
    v = np.where(_numerical_zeros(grid.values), 0.0, grid.values)
    root = np.sqrt(v)
    pos = v > 0
    # maximal runs of positive samples, as [start, stop) index ranges
    runs = []
    i = 0
    while i < v.size:
        if pos[i]:
            j = i
            while j + 1 < v.size and pos[j + 1]:
                j += 1
            if j > i:
                runs.append((i, j + 1, PchipInterpolator(x[i:j + 1], np.log(v[i:j + 1]))))
            i = j + 1
        else:
            i += 1
    cell_run = np.full(v.size - 1, -1)
    for r, (a, b, _) in enumerate(runs):
        cell_run[a:b - 1] = r

    def evaluate(xq):
        xq = np.asarray(xq, dtype=float)
        flat = xq.reshape(-1)
        lp = np.full(flat.shape, -np.inf)
        dl = np.zeros(flat.shape)
        inside = (flat > x[0]) & (flat < x[-1])
        cell = np.clip(np.searchsorted(x, flat, side="right") - 1, 0, v.size - 2)
        owner = np.where(inside, cell_run[cell], -2)
        for r, (_, _, interp) in enumerate(runs):
            m = owner == r
            if np.any(m):
                lp[m] = interp(flat[m])
                dl[m] = interp(flat[m], 1)
        lin = owner == -1
        if np.any(lin):
            c = cell[lin]
            x0, x1 = x[c], x[c + 1]
            slope = (root[c + 1] - root[c]) / (x1 - x0)
            q = root[c] + slope * (flat[lin] - x0)
            with np.errstate(divide="ignore", invalid="ignore"):
                lp[lin] = 2.0 * np.log(q)
                dl[lin] = np.where(q > 0, 2.0 * slope / q, 0.0)
        return lp.reshape(xq.shape), dl.reshape(xq.shape)

    zeros = tuple(x[1:-1][v[1:-1] == 0])
    short = [(a, b) for a, b in grid.lobes() if b - a < 8]
    note = ""
    if short:
        a, b = short[0]
        note = (
            f"grid resolves the lobe on [{x[a]:g}, {x[b - 1]:g}] with only {b - a} points; "
            "Fisher-based quantities need at least 8 per lobe"
        )
    # the interpolant's own mass differs slightly from the trapezoid sum; divide it out
    knots = tuple(x[1:-1])
    res = integrate(lambda xq: np.exp(evaluate(xq)[0]), (x[0], x[-1]), knots, QuadConfig(1e-13, 1e-12))
    if not (res.converged and res.value > 0):
        raise NormalizationError(f"could not normalise the interpolated grid density: {res}")
    log_mass = math.log(res.value)
    return Density(
        Support(float(x[0]), float(x[-1]), zeros),
        lambda xq: evaluate(xq)[0] - log_mass,
        lambda xq: evaluate(xq)[1],
        label=label,
        nodes=knots,
        fisher_admissible=not short,
        fisher_note=note,
    )


def load_grid_density(path, renormalize=False) -> Density:
    return grid_density(read_grid_file(path), renormalize=renormalize, label=f"grid({path})")
