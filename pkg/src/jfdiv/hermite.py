"""Overflow-free Hermite polynomial evaluation and zeros.

The physicists' polynomials are carried in the normalised form
``h_k = H_k / sqrt(2**k k!)`` with the three-term recurrence

    h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}

and a per-point logarithmic scale that absorbs growth, so degrees in the
hundreds can be evaluated at any abscissa without overflow.
"""

import math

import numpy as np

_RESCALE = 1e150


def scaled_hermite(n, x):
    """Return ``(h_n, h_{n-1}, log_scale)`` with ``H_k/sqrt(2^k k!) = h_k * exp(log_scale)``.

    ``h_{-1}`` is reported as zero for ``n == 0``.
    """
    if n < 0:
        raise ValueError(f"Hermite degree must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    log_scale = np.zeros_like(x)
    for k in range(n):
        nxt = math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if np.any(big):
            s = np.abs(cur[big])
            cur[big] /= s
            prev[big] /= s
            log_scale[big] += np.log(s)
    return cur, prev, log_scale


def hermite_log_abs(n, x):
    """Return ``(log|H_n(x)|, sign(H_n(x)))`` for the physicists' Hermite polynomial.

    Works elementwise on arrays; scalars in give scalars out.
    """
    h, _, log_scale = scaled_hermite(n, x)
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(h)) + log_scale + 0.5 * (n * math.log(2.0) + math.lgamma(n + 1))
    sign = np.sign(h).astype(int)
    if np.ndim(log_mag) == 0:
        return float(log_mag), int(sign)
    return log_mag, sign


def hermite_function(n, x):
    """Orthonormal Hermite function ``H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi))``."""
    h, _, log_scale = scaled_hermite(n, x)
    x = np.asarray(x, dtype=float)
    return h * np.exp(log_scale - 0.5 * x * x - 0.25 * math.log(math.pi))


def hermite_zeros(n, tol=1e-13):
    """Real zeros of ``H_n`` in increasing order.

    Sign changes of the scaled recurrence are bracketed on a grid of
    ``8(n+1)`` points over ``[-sqrt(2n+1), sqrt(2n+1)]`` (all zeros lie
    inside) and refined by vectorised bisection.
    """
    if n < 1:
        raise ValueError(f"H_n has zeros only for n >= 1, got {n}")
    bound = math.sqrt(2 * n + 1)
    grid = np.linspace(-bound, bound, 8 * (n + 1))
    sgn = np.sign(scaled_hermite(n, grid)[0])
    exact = grid[sgn == 0]
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    lo, hi = grid[idx].copy(), grid[idx + 1].copy()
    s_lo = sgn[idx]
    while np.any(hi - lo > tol):
        mid = 0.5 * (lo + hi)
        s_mid = np.sign(scaled_hermite(n, mid)[0])
        left = s_mid == s_lo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
        hit = s_mid == 0
        lo[hit] = hi[hit] = mid[hit]
    zeros = np.sort(np.concatenate([0.5 * (lo + hi), exact]))
    if zeros.size != n:
        raise RuntimeError(f"found {zeros.size} zeros of H_{n}, expected {n}")
    # exact symmetry; odd degree has x = 0 as a root
    zeros = 0.5 * (zeros - zeros[::-1])
    return zeros
