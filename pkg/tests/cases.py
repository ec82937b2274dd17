"""Shared density pairs for property and acceptance tests."""

from jfdiv import make_gamma_like, make_gaussian, make_rakhmanov_hermite, make_sinusoidal

SIN_PAIRS = [(1, 2), (1, 3), (2, 5), (3, 7), (10, 20), (1, 50), (20, 21), (4, 8), (5, 17), (1, 10)]
GAMMA_PAIRS = [(0, 2), (0, 1.5), (2, 3), (1.5, 4), (0, 10), (2, 80), (10, 11), (5, 40)]
HERMITE_PAIRS = [(0, 1), (9, 10), (10, 11), (20, 21), (3, 17), (0, 40), (25, 50), (60, 61)]


def pair_matrix():
    """Thirty (label, rho1, rho2) triples over every family plus cross-family pairs."""
    out = []
    for a, b in SIN_PAIRS:
        out.append((f"sin{a}-sin{b}", make_sinusoidal(a), make_sinusoidal(b)))
    for a, b in GAMMA_PAIRS:
        out.append((f"gamma{a}-gamma{b}", make_gamma_like(a), make_gamma_like(b)))
    for a, b in HERMITE_PAIRS:
        out.append((f"ho{a}-ho{b}", make_rakhmanov_hermite(a), make_rakhmanov_hermite(b)))
    out += [
        ("n01-ho0", make_gaussian(0.0, 1.0), make_rakhmanov_hermite(0)),
        ("n12-gamma0", make_gaussian(1.0, 2.0), make_gamma_like(0)),
        ("ho2-gamma4", make_rakhmanov_hermite(2), make_gamma_like(4)),
        ("n01-n11", make_gaussian(0.0, 1.0), make_gaussian(1.0, 1.0)),
    ]
    return out


def single_densities():
    return [
        make_sinusoidal(1), make_sinusoidal(7), make_sinusoidal(50),
        make_gamma_like(0), make_gamma_like(2), make_gamma_like(80),
        make_rakhmanov_hermite(0), make_rakhmanov_hermite(13), make_rakhmanov_hermite(100),
        make_gaussian(-1.0, 0.5),
    ]
