"""Information functionals and divergences between univariate densities.

Every integral goes through :func:`jfdiv.quadrature.integrate` over the hull
of the inputs' windows, with all zeros, nodes and window edges as
breakpoints.  Non-convergent integrals (a non-integrable singularity) are
reported as ``Status.DIVERGENT`` with ``value = inf``; quadrature that runs
out of budget raises :class:`NotConvergedError`.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import logsumexp

from .densities import Density, Support, WeightVector, mixture
from .errors import InadmissibleDensity, NotConvergedError
from .quadrature import (
    QuadConfig,
    QuadStatus,
    fisher_integrand,
    integrate,
    relative_fisher_integrand,
)

_LN2 = math.log(2.0)


class Path(enum.Enum):
    DEFINITION = "definition"
    FUNCTIONAL = "functional"


class Status(enum.Enum):
    FINITE = "finite"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class DivergenceReport:
    value: float
    error_estimate: float
    path: Path = Path.DEFINITION
    status: Status = Status.FINITE

    @property
    def finite(self):
        return self.status is Status.FINITE

    @property
    def divergent(self):
        return self.status is Status.DIVERGENT

    def __float__(self):
        return float(self.value)


def _divergent(path):
    return DivergenceReport(math.inf, math.inf, path, Status.DIVERGENT)


def _span(densities):
    """Integration window and breakpoints shared by several densities."""
    lo = min(d.window[0] for d in densities)
    hi = max(d.window[1] for d in densities)
    pts = set()
    for d in densities:
        pts.update(d.breakpoints())
        pts.update(d.window)
        pts.update(e for e in (d.support.lower, d.support.upper) if math.isfinite(e))
    return (lo, hi), tuple(sorted(p for p in pts if lo < p < hi))


def _evaluate(f, densities, config, what, path=Path.DEFINITION):
    window, pts = _span(densities)
    res = integrate(f, window, pts, config)
    if res.status is QuadStatus.NOT_CONVERGED:
        raise NotConvergedError(res, what)
    if res.status is QuadStatus.DIVERGENT:
        return _divergent(path)
    return DivergenceReport(res.value, res.error_estimate, path)


def _require_fisher(*densities):
    for d in densities:
        if not d.fisher_admissible:
            note = d.fisher_note or "its Fisher information is not finite"
            raise InadmissibleDensity(f"{d.label}: {note}")


def _combine(path, *reports, scale=1.0):
    if any(r.divergent for r in reports):
        return _divergent(path)
    value = scale * sum(r.value for r in reports)
    err = abs(scale) * math.sqrt(sum(r.error_estimate**2 for r in reports))
    return DivergenceReport(value, err, path)


def _xlogratio(p, log_num, log_den):
    """``p * (log_num - log_den)`` with the convention ``0 * anything = 0``."""
    with np.errstate(invalid="ignore"):
        out = p * (log_num - log_den)
    return np.where(p > 0, out, 0.0)


# -- single-density functionals ---------------------------------------------------


def shannon_entropy(rho: Density, config: QuadConfig = None) -> DivergenceReport:
    """``-int rho ln rho``."""

    def f(x):
        lp = rho.log_pdf(x)
        p = np.exp(lp)
        return -_xlogratio(p, lp, 0.0)

    return _evaluate(f, [rho], config, "entropy")


def fisher_information(rho: Density, config: QuadConfig = None, strict=True) -> DivergenceReport:
    """``int rho (ln rho)'^2``.

    With ``strict`` (the default) densities flagged as having no finite
    Fisher information are rejected; otherwise the integral is attempted
    and divergence is reported as a result.
    """
    if strict:
        _require_fisher(rho)
    return _evaluate(fisher_integrand(rho), [rho], config, "Fisher information")


# -- directed and symmetric divergences ------------------------------------------


def kl_divergence(rho1: Density, rho2: Density, config: QuadConfig = None) -> DivergenceReport:
    """``int rho1 ln(rho1/rho2)``; divergent where rho2 vanishes under rho1."""

    def f(x):
        l1 = rho1.log_pdf(x)
        l2 = rho2.log_pdf(x)
        p1 = np.exp(l1)
        with np.errstate(invalid="ignore"):
            out = np.where(p1 > 0, p1 * (l1 - l2), 0.0)
        return out

    return _evaluate(f, [rho1, rho2], config, "KL divergence")


def relative_fisher(rho1: Density, rho2: Density, config: QuadConfig = None) -> DivergenceReport:
    """``int rho1 ((ln rho1/rho2)')^2``; divergent at zeros of rho2 that rho1 lacks."""
    _require_fisher(rho1, rho2)
    return _evaluate(relative_fisher_integrand(rho1, rho2), [rho1, rho2], config, "relative Fisher information")


def fisher_divergence_g(rho1: Density, rho2: Density, config: QuadConfig = None) -> DivergenceReport:
    """Symmetrised relative Fisher information."""
    a = relative_fisher(rho1, rho2, config)
    if a.divergent:
        return a
    return _combine(Path.DEFINITION, a, relative_fisher(rho2, rho1, config))


def _midpoint(rho1, rho2):
    return mixture([rho1, rho2], WeightVector((0.5, 0.5)))


def directed_jfd(rho1: Density, rho2: Density, config: QuadConfig = None) -> DivergenceReport:
    """Relative Fisher information of rho1 with respect to the equal-weight mixture."""
    return relative_fisher(rho1, _midpoint(rho1, rho2), config)


def jsd(rho1: Density, rho2: Density, config: QuadConfig = None) -> DivergenceReport:
    """Jensen-Shannon divergence, ``S[m] - (S[rho1] + S[rho2])/2`` with ``m`` the midpoint mixture.

    Integrated as ``sum_i 1/2 rho_i ln(rho_i/m)``, which is pointwise
    non-negative and free of the cancellation between three entropies.
    """

    def f(x):
        l1 = rho1.log_pdf(x)
        l2 = rho2.log_pdf(x)
        with np.errstate(divide="ignore"):
            lm = np.logaddexp(l1, l2) - _LN2
        return 0.5 * (_xlogratio(np.exp(l1), l1, lm) + _xlogratio(np.exp(l2), l2, lm))

    return _evaluate(f, [rho1, rho2], config, "Jensen-Shannon divergence")


def jfd(rho1: Density, rho2: Density, config: QuadConfig = None, path: Path = Path.FUNCTIONAL) -> DivergenceReport:
    """Jensen-Fisher divergence ``(F[rho1] + F[rho2])/2 - F[m]``.

    ``Path.FUNCTIONAL`` integrates that combination of Fisher integrands in
    one pass; ``Path.DEFINITION`` evaluates the equivalent
    ``(directed_jfd(rho1, rho2) + directed_jfd(rho2, rho1)) / 2``.
    """
    _require_fisher(rho1, rho2)
    path = Path(path)
    m = _midpoint(rho1, rho2)
    if path is Path.DEFINITION:
        a = relative_fisher(rho1, m, config)
        b = relative_fisher(rho2, m, config)
        return _combine(Path.DEFINITION, a, b, scale=0.5)
    f1, f2, fm = fisher_integrand(rho1), fisher_integrand(rho2), fisher_integrand(m)

    def f(x):
        return 0.5 * f1(x) + 0.5 * f2(x) - fm(x)

    return _evaluate(f, [rho1, rho2, m], config, "Jensen-Fisher divergence", Path.FUNCTIONAL)


def _check_weighted(densities, weights):
    densities = list(densities)
    if not isinstance(weights, WeightVector):
        weights = WeightVector(tuple(weights))
    if len(densities) < 2:
        raise ValueError(f"need at least two densities, got {len(densities)}")
    if len(densities) != len(weights):
        raise ValueError(f"{len(densities)} densities but {len(weights)} weights")
    return densities, weights


def jsd_weighted(densities: Sequence[Density], weights, config: QuadConfig = None) -> DivergenceReport:
    """``S[sum w_i rho_i] - sum w_i S[rho_i]``."""
    densities, weights = _check_weighted(densities, weights)
    pairs = [(w, d) for w, d in zip(weights, densities) if w > 0]
    log_w = np.array([math.log(w) for w, _ in pairs])[:, None]

    def f(x):
        x = np.asarray(x, dtype=float)
        logs = np.stack([d.log_pdf(x) for _, d in pairs])
        with np.errstate(divide="ignore"):
            lm = logsumexp(logs + log_w, axis=0)
        terms = [w * _xlogratio(np.exp(l), l, lm) for (w, _), l in zip(pairs, logs)]
        return np.sum(terms, axis=0)

    return _evaluate(f, densities, config, "weighted Jensen-Shannon divergence")


def jfd_weighted(densities: Sequence[Density], weights, config: QuadConfig = None) -> DivergenceReport:
    """``sum w_i F[rho_i] - F[sum w_i rho_i]``."""
    densities, weights = _check_weighted(densities, weights)
    _require_fisher(*densities)
    m = mixture(densities, weights)
    parts = [(w, fisher_integrand(d)) for w, d in zip(weights, densities) if w > 0]
    fm = fisher_integrand(m)

    def f(x):
        return np.sum([w * fi(x) for w, fi in parts], axis=0) - fm(x)

    return _evaluate(f, densities + [m], config, "weighted Jensen-Fisher divergence", Path.FUNCTIONAL)


# -- Gaussian smoothing and deBruijn-type identities ------------------------------------

SMOOTHING_NODES = 64


def gaussian_smooth(rho: Density, epsilon: float, nodes: int = SMOOTHING_NODES) -> Density:
    """Density of ``X + sqrt(epsilon) Z`` for ``X ~ rho`` and independent standard normal ``Z``.

    The convolution with the variance-``epsilon`` Gaussian kernel is
    discretised by ``nodes``-point Gauss-Hermite quadrature, so the result is
    an exactly normalised mixture of shifted copies of ``rho`` and is
    evaluated pointwise in the log domain.
    """
    epsilon = float(epsilon)
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError(f"smoothing variance must be positive, got {epsilon!r}")
    t, w = hermegauss(nodes)
    shifts = math.sqrt(epsilon) * t
    log_w = (np.log(w) - np.log(w.sum()))[:, None]
    reach = float(np.max(np.abs(shifts)))

    def _terms(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        pts = flat[None, :] - shifts[:, None]
        return x.shape, pts, rho.log_pdf(pts) + log_w

    def log_pdf(x):
        shape, _, terms = _terms(x)
        with np.errstate(divide="ignore"):
            return logsumexp(terms, axis=0).reshape(shape)

    def dlog(x):
        shape, pts, terms = _terms(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            total = logsumexp(terms, axis=0)
            resp = np.exp(terms - total)
            out = np.where(resp > 0, resp * rho.log_pdf_derivative(pts), 0.0).sum(axis=0)
        return np.where(np.isfinite(total), out, 0.0).reshape(shape)

    lo, hi = rho.window[0] - reach, rho.window[1] + reach
    # kinks of rho reappear at every shift
    kinks = set(rho.breakpoints())
    kinks.update(e for e in (rho.support.lower, rho.support.upper) if math.isfinite(e))
    nodes_out = tuple(sorted({k + s for k in kinks for s in shifts if lo < k + s < hi}))
    return Density(
        Support(-math.inf, math.inf),
        log_pdf,
        dlog,
        label=f"smooth({rho.label},eps={epsilon:g})",
        window=(lo, hi),
        nodes=nodes_out,
        fisher_admissible=rho.fisher_admissible,
        fisher_note=rho.fisher_note,
        params={"epsilon": epsilon, "base": rho.label},
    )


# tight enough that finite differences at epsilon ~ 1e-3 keep ~6 digits
DEBRUIJN_CONFIG = QuadConfig(abs_tol=1e-14, rel_tol=1e-12)


@dataclass(frozen=True)
class DeBruijnResult:
    lhs_slope: float
    rhs: float
    relative_gap: float
    epsilons: tuple = ()
    slopes: tuple = field(default=(), repr=False)


def _check_epsilons(eps_list):
    eps = tuple(float(e) for e in eps_list)
    if len(eps) < 3:
        raise ValueError(f"need at least 3 smoothing values for extrapolation, got {len(eps)}")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        raise ValueError("smoothing values must be positive and finite")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("smoothing values must be strictly decreasing")
    return eps


def extrapolate_to_zero(h, values):
    """Value at ``h = 0`` of the interpolating polynomial through ``(h_i, values_i)`` (Neville)."""
    h = np.asarray(h, dtype=float)
    p = np.array(values, dtype=float)
    n = h.size
    for k in range(1, n):
        p[: n - k] = (h[k:] * p[: n - k] - h[: n - k] * p[1 : n - k + 1]) / (h[k:] - h[: n - k])
    return float(p[0])


def _gap(lhs, rhs, floor=1e-9):
    if max(abs(lhs), abs(rhs)) <= floor:
        return 0.0
    if rhs == 0:
        return math.inf
    return abs(lhs - rhs) / abs(rhs)


def _slope_at_zero(functional, eps):
    base = functional(None)
    slopes = tuple((functional(e) - base) / e for e in eps)
    return extrapolate_to_zero(eps, slopes), slopes


def debruijn_check(rho1: Density, rho2: Density, eps_list, config: QuadConfig = None) -> DeBruijnResult:
    """Compare ``d/de JSD[rho1*G_e, rho2*G_e]`` at ``e = 0`` with ``-JFD[rho1, rho2]/2``."""
    eps = _check_epsilons(eps_list)
    config = config or DEBRUIJN_CONFIG
    _require_fisher(rho1, rho2)

    def j(e):
        if e is None:
            return _finite(jsd(rho1, rho2, config))
        return _finite(jsd(gaussian_smooth(rho1, e), gaussian_smooth(rho2, e), config))

    lhs, slopes = _slope_at_zero(j, eps)
    rhs = -0.5 * _finite(jfd(rho1, rho2, config))
    return DeBruijnResult(lhs, rhs, _gap(lhs, rhs), eps, slopes)


def classic_debruijn_check(rho: Density, eps_list, config: QuadConfig = None) -> DeBruijnResult:
    """Compare ``d/de S[rho*G_e]`` at ``e = 0`` with ``F[rho]/2``."""
    eps = _check_epsilons(eps_list)
    config = config or DEBRUIJN_CONFIG
    _require_fisher(rho)

    def s(e):
        return _finite(shannon_entropy(rho if e is None else gaussian_smooth(rho, e), config))

    lhs, slopes = _slope_at_zero(s, eps)
    rhs = 0.5 * _finite(fisher_information(rho, config))
    return DeBruijnResult(lhs, rhs, _gap(lhs, rhs), eps, slopes)


def _finite(report):
    if report.divergent:
        raise InadmissibleDensity("deBruijn check needs finite functionals; an input diverged")
    return report.value
