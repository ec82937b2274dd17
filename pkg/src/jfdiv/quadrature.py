"""Adaptive Gauss-Kronrod integration with endpoint-singularity handling.

Each sub-interval between consecutive breakpoints is split into two halves
that are each attached to one end.  An end is refined geometrically: its
innermost panel ``[anchor, anchor + h]`` is repeatedly halved, leaving a
ladder of dyadic cells behind.  For an integrand behaving like a power of
the distance to the anchor, cell contributions form a geometric sequence;
its ratio separates integrable singularities (ratio < 1), whose tail is
summed in closed form, from candidate divergences (ratio >= 1).  A
candidate is refined further and declared divergent once the partial sum
passes ``divergence_cap``, or once growth persists down to the finest
resolvable cell with contributions still above tolerance.  Near-poles that
saturate (a tiny but non-zero density in a denominator) thus resolve to
their finite value.

All integrands are vectorised: ``f(x)`` receives a 1-d array.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

# Kronrod 15-point abscissae (positive half, descending) and weights; Gauss 7-point weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5]] = _WG[:3]
_GAUSS[[13, 11, 9]] = _WG[:3]
_GAUSS[7] = _WG[3]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

# ratio above which cell contributions are treated as non-decaying
_GROWTH_RATIO = 1.0 - 1e-9
# cells shrinking by less than this per halving count as failing to decay
_SLOW_DECAY = 0.9
_SETTLED = 1e-9
_DIVERGENCE_RUN = 5
_MIN_DIVERGENCE_DEPTH = 10
_MAX_DEPTH = 1100


class QuadStatus(enum.Enum):
    CONVERGED = "converged"
    DIVERGENT = "divergent"
    NOT_CONVERGED = "not-converged"


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 10000
    divergence_cap: float = 1e12

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "max_subdivisions", "divergence_cap"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")

    def tightened(self, factor):
        return QuadConfig(
            self.abs_tol * factor, self.rel_tol * factor, self.max_subdivisions, self.divergence_cap
        )


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    status: QuadStatus
    subdivisions: int

    @property
    def converged(self):
        return self.status is QuadStatus.CONVERGED

    @property
    def divergent(self):
        return self.status is QuadStatus.DIVERGENT


def gauss_kronrod_15(f, a, b):
    """Apply the 7/15-point Gauss-Kronrod pair to panels ``[a_i, b_i]``.

    Returns ``(value, error)`` arrays; the error uses the QUADPACK scaling of
    the Gauss-Kronrod difference with a round-off floor.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.reshape(-1)), dtype=float)
    fx = np.broadcast_to(fx, (x.size,)).reshape(x.shape)
    with np.errstate(invalid="ignore", over="ignore"):
        res_k = fx @ _KRONROD
        res_g = fx @ _GAUSS
        res_abs = np.abs(fx) @ _KRONROD
        res_asc = np.abs(fx - 0.5 * res_k[:, None]) @ _KRONROD
        scale = np.abs(half)
        value = res_k * half
        err = np.abs((res_k - res_g) * half)
        res_abs *= scale
        res_asc *= scale
        ok = (res_asc != 0) & (err != 0)
        err = np.where(ok, res_asc * np.minimum(1.0, (200.0 * err / np.where(ok, res_asc, 1.0)) ** 1.5), err)
        floor = res_abs > _TINY / (50 * _EPS)
        err = np.where(floor, np.maximum(50 * _EPS * res_abs, err), err)
    return value, err


def _map_infinite(f, lo, hi):
    """Rewrite an integral over an infinite interval as one over a finite interval."""
    if math.isinf(lo) and math.isinf(hi):
        to_x = lambda t: t / (1 - t * t)
        dx = lambda t: (1 + t * t) / (1 - t * t) ** 2
        to_t = lambda x: 2 * x / (1 + math.sqrt(1 + 4 * x * x))
        bounds = (-1.0, 1.0)
    elif math.isinf(hi):
        to_x = lambda t: lo + t / (1 - t)
        dx = lambda t: 1 / (1 - t) ** 2
        to_t = lambda x: (x - lo) / (1 + x - lo)
        bounds = (0.0, 1.0)
    elif math.isinf(lo):
        to_x = lambda t: hi + t / (1 + t)
        dx = lambda t: 1 / (1 + t) ** 2
        to_t = lambda x: (x - hi) / (1 - (x - hi))
        bounds = (-1.0, 0.0)
    else:
        return f, (lo, hi), lambda x: x

    def g(t):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            x = to_x(t)
            val = np.asarray(f(x), dtype=float) * dx(t)
        return np.where(np.isfinite(x), val, 0.0)

    return g, bounds, to_t


class _Ladder:
    """Dyadic cells accumulated toward one anchor point."""

    __slots__ = ("anchor", "direction", "h", "h_min", "depth", "cells", "end_panel")

    def __init__(self, anchor, direction, h):
        self.anchor = anchor
        self.direction = direction
        self.h = h
        self.h_min = max(4096 * np.spacing(abs(anchor)), 1e-290)
        self.depth = 0
        self.cells = []
        self.end_panel = -1

    def exhausted(self):
        return 0.5 * self.h < self.h_min or self.depth >= _MAX_DEPTH

    def span(self, h):
        a, b = self.anchor, self.anchor + self.direction * h
        return (a, b) if a < b else (b, a)


class _Panels:
    def __init__(self):
        self.a = np.empty(0)
        self.b = np.empty(0)
        self.val = np.empty(0)
        self.err = np.empty(0)
        self.cell = np.empty(0, dtype=int)
        self.alive = np.empty(0, dtype=bool)
        self._pending = []

    def add(self, a, b, cell):
        self._pending.append((a, b, cell))
        return self.a.size + len(self._pending) - 1

    def flush(self, f):
        if not self._pending:
            return
        a, b, cell = (np.array(c) for c in zip(*self._pending))
        self._pending = []
        val, err = gauss_kronrod_15(f, a, b)
        self.a = np.concatenate([self.a, a])
        self.b = np.concatenate([self.b, b])
        self.val = np.concatenate([self.val, val])
        self.err = np.concatenate([self.err, err])
        self.cell = np.concatenate([self.cell, cell.astype(int)])
        self.alive = np.concatenate([self.alive, np.ones(a.size, dtype=bool)])


def _limit_ratio(ratios):
    """Aitken-accelerated limit of the last three cell ratios."""
    a, b, c = ratios[-3:]
    denom = (c - b) - (b - a)
    if denom == 0 or not np.isfinite(denom):
        return c
    r = c - (c - b) ** 2 / denom
    # acceleration is only trusted when it is a small correction
    return r if abs(r - c) <= 10 * abs(c - b) else c


def _tail(ladder, cell_sums):
    """Geometric-tail estimate for the innermost panel of a ladder.

    Returns None when the ladder is too shallow or its cells change sign,
    else ``(value, error, grows)``: ``value`` is None if the cells do not
    decay, and ``grows`` marks a settled non-decaying ratio.
    """
    if ladder.depth < 5:
        return None
    d = np.array([cell_sums[c] for c in ladder.cells[-(_DIVERGENCE_RUN + 1):]])
    if not np.all(np.isfinite(d)) or not (np.all(d > 0) or np.all(d < 0)):
        return None
    ratios = d[1:] / d[:-1]
    r_inf = _limit_ratio(ratios)
    # smooth corrections push ratios above 1 at coarse depth; only a settled ratio counts
    settled = abs(ratios[-1] - ratios[-2]) <= max(_SETTLED, 1e-2 * (r_inf - 1.0))
    grows = bool(
        ladder.depth >= _MIN_DIVERGENCE_DEPTH
        and np.all(ratios[-_DIVERGENCE_RUN:] >= _SLOW_DECAY)
        and r_inf >= _GROWTH_RATIO
        and settled
    )
    r_last, r_prev = ratios[-1], ratios[-2]
    if not all(0 < r < _GROWTH_RATIO for r in (r_inf, r_last, r_prev)):
        return None, None, grows
    last = d[-1]
    est = last * r_inf / (1 - r_inf)
    alt = last * r_last / (1 - r_last)
    older = last * r_prev / (1 - r_prev)
    # ratios of log-type singularities converge slowly; pad the spread
    err = 4.0 * max(abs(est - alt), abs(alt - older)) + 64 * _EPS * abs(est)
    return est, err, grows


def integrate(f, support, breakpoints=(), config=None):
    """Integrate vectorised ``f`` over ``support``.

    ``support`` is a ``Support`` (its interior zeros are used as
    breakpoints) or a ``(lower, upper)`` pair; either end may be infinite.
    """
    config = config or QuadConfig()
    if hasattr(support, "interior_zeros"):
        lo, hi = support.lower, support.upper
        breakpoints = tuple(breakpoints) + tuple(support.interior_zeros)
    else:
        lo, hi = (float(v) for v in support)
    if not lo < hi:
        raise ValueError(f"integration needs lower < upper, got ({lo}, {hi})")
    g, (lo_t, hi_t), to_t = _map_infinite(f, lo, hi)
    inner = sorted({to_t(float(p)) for p in breakpoints if lo < p < hi})
    pts = [lo_t] + [p for p in inner if lo_t < p < hi_t] + [hi_t]

    panels = _Panels()
    ladders = []
    for a, b in zip(pts, pts[1:]):
        w = 0.5 * (b - a)
        for anchor, direction in ((a, 1.0), (b, -1.0)):
            lad = _Ladder(anchor, direction, w)
            lad.end_panel = panels.add(*lad.span(w), -1)
            ladders.append(lad)
    n_cells = 0
    subdivisions = 0
    status = QuadStatus.NOT_CONVERGED

    while True:
        panels.flush(g)
        if np.any(np.isnan(panels.val[panels.alive])):
            return QuadResult(math.nan, math.inf, QuadStatus.NOT_CONVERGED, subdivisions)
        if np.any(np.isinf(panels.val[panels.alive])):
            return QuadResult(math.inf, math.inf, QuadStatus.DIVERGENT, subdivisions)
        body = panels.alive & (panels.cell >= 0)
        cell_sums = np.bincount(panels.cell[body], weights=panels.val[body], minlength=n_cells)

        tail_val = np.empty(len(ladders))
        tail_err = np.empty(len(ladders))
        growing = False
        stalled = []
        for i, lad in enumerate(ladders):
            v, e = panels.val[lad.end_panel], panels.err[lad.end_panel]
            est = _tail(lad, cell_sums)
            if est is not None:
                gv, ge, grows = est
                if grows or gv is None:
                    growing = True
                    if lad.exhausted():
                        stalled.append(i)
                elif ge < e:
                    v, e = gv, ge
            tail_val[i], tail_err[i] = v, e

        value = float(np.sum(panels.val[body]) + np.sum(tail_val))
        tol = max(config.abs_tol, config.rel_tol * abs(value))
        for i in stalled:
            # growth persisted down to the finest resolvable cell: a pole unless negligible
            last = abs(cell_sums[ladders[i].cells[-1]])
            if last > tol:
                return QuadResult(math.copysign(math.inf, value or 1.0), math.inf, QuadStatus.DIVERGENT, subdivisions)
            tail_err[i] = max(last, abs(tail_val[i]))
        err2 = float(np.sum(panels.err[body] ** 2) + np.sum(tail_err**2))
        error = math.sqrt(err2)

        if growing and abs(value) > config.divergence_cap:
            return QuadResult(math.copysign(math.inf, value or 1.0), math.inf, QuadStatus.DIVERGENT, subdivisions)
        if error <= tol:
            status = QuadStatus.CONVERGED
            break
        if subdivisions >= config.max_subdivisions:
            break

        n_items = int(body.sum()) + len(ladders)
        thresh = tol / math.sqrt(n_items)
        progressed = False
        for i in np.nonzero(body & (panels.err > thresh))[0]:
            a, b = panels.a[i], panels.b[i]
            mid = 0.5 * (a + b)
            if not a < mid < b or (b - a) < 16 * np.spacing(max(abs(a), abs(b))):
                continue
            panels.alive[i] = False
            panels.add(a, mid, panels.cell[i])
            panels.add(mid, b, panels.cell[i])
            subdivisions += 1
            progressed = True
        for i, lad in enumerate(ladders):
            if tail_err[i] <= thresh:
                continue
            steps = 1 if lad.depth < 4 else 4
            deepened = False
            for _ in range(steps):
                if lad.exhausted():
                    break
                h = 0.5 * lad.h
                outer = lad.anchor + lad.direction * lad.h
                inner = lad.anchor + lad.direction * h
                lad.cells.append(n_cells)
                panels.add(min(inner, outer), max(inner, outer), n_cells)
                n_cells += 1
                lad.h = h
                lad.depth += 1
                subdivisions += 1
                deepened = True
            if deepened:
                panels.alive[lad.end_panel] = False
                lad.end_panel = panels.add(*lad.span(lad.h), -1)
                progressed = True
        if not progressed:
            break

    return QuadResult(value, error, status, subdivisions)


# -- information-functional integrands ----------------------------------------

GUARD = 1e-280


def _flank_curvature(density, x):
    """Limit of (rho')^2/rho at points where rho vanishes to second order."""
    step = 1e-6 * np.maximum(1.0, np.abs(x))
    p_lo = density.pdf(x - step)
    p_hi = density.pdf(x + step)
    p_mid = density.pdf(x)
    big = np.maximum(p_lo, p_hi)
    small = np.minimum(p_lo, p_hi)
    curvature = (p_lo + p_hi - 2.0 * p_mid) / (2.0 * step * step)
    consistent = (small > 0) & (big <= 4.0 * small)
    return np.where(consistent, 4.0 * np.maximum(curvature, 0.0), 0.0)


def fisher_integrand(density, guard=GUARD):
    """``x -> rho(x) (d/dx ln rho(x))^2``.

    Evaluated as ``exp(ln rho + 2 ln|(ln rho)'|)`` so that tiny densities
    with large slopes keep their exact limit.  Points below ``guard`` where
    that form is undefined (a zero hit exactly) take the order-2-zero limit
    from a quadratic model of the flanks.
    """

    def f(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.reshape(-1)
        lp = density.log_pdf(x)
        s = density.log_pdf_derivative(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.exp(lp + 2.0 * np.log(np.abs(s)))
        bad = ~np.isfinite(out) & (np.exp(lp) < guard)
        if np.any(bad):
            out[bad] = _flank_curvature(density, x[bad])
        return out.reshape(shape)

    return f


def relative_fisher_integrand(rho1, rho2):
    """``x -> rho1 (d/dx ln(rho1/rho2))^2``; poles at zeros of rho2 are left in place."""

    def f(x):
        x = np.asarray(x, dtype=float)
        p = rho1.pdf(x)
        with np.errstate(invalid="ignore", over="ignore"):
            slope = rho1.log_pdf_derivative(x) - rho2.log_pdf_derivative(x)
            out = p * slope * slope
        return np.where(p == 0, 0.0, out)

    return f
