import math

import numpy as np
import pytest

import oracle_values as ov
from cases import pair_matrix, single_densities
from jfdiv import (
    InadmissibleDensity,
    Path,
    QuadConfig,
    Status,
    WeightVector,
    directed_jfd,
    fisher_divergence_g,
    fisher_information,
    gaussian_smooth,
    integrate,
    jfd,
    jfd_weighted,
    jsd,
    jsd_weighted,
    kl_divergence,
    make_gamma_like,
    make_gaussian,
    make_rakhmanov_hermite,
    make_sinusoidal,
    make_smooth_uniform,
    make_uniform,
    mixture,
    relative_fisher,
    shannon_entropy,
)

LN2 = math.log(2.0)
PAIRS = pair_matrix()
PAIR_IDS = [p[0] for p in PAIRS]


def half(r1, r2):
    return mixture([r1, r2], WeightVector((0.5, 0.5)))


# -- frozen oracle values ---------------------------------------------------------


@pytest.mark.parametrize(
    "compute, expected, rtol",
    [
        (lambda: directed_jfd(make_sinusoidal(1), make_sinusoidal(2)), ov.FBAR_SIN1_SIN2, 1e-9),
        (lambda: directed_jfd(make_sinusoidal(2), make_sinusoidal(1)), ov.FBAR_SIN2_SIN1, 1e-9),
        (lambda: jfd(make_sinusoidal(1), make_sinusoidal(2)), ov.JFD_SIN1_SIN2, 1e-9),
        (lambda: jsd(make_sinusoidal(1), make_sinusoidal(2)), ov.JSD_SIN1_SIN2, 1e-9),
        (lambda: shannon_entropy(make_sinusoidal(1)), ov.ENTROPY_SIN1, 1e-9),
        (lambda: jsd(make_gaussian(0, 1), make_gaussian(1, 1)), ov.JSD_N0_N1, 1e-9),
        (lambda: jfd(make_gaussian(0, 1), make_gaussian(1, 1)), ov.JFD_N0_N1, 1e-9),
        (lambda: jfd(make_gaussian(0, 1), make_gaussian(0, 2)), ov.JFD_N01_N02, 1e-9),
        (lambda: kl_divergence(make_gamma_like(0), make_gamma_like(2)), ov.KL_GAMMA0_GAMMA2, 1e-8),
        (lambda: jfd(make_rakhmanov_hermite(9), make_rakhmanov_hermite(10)), ov.JFD_HO9_HO10, 1e-9),
        (lambda: jfd(make_rakhmanov_hermite(8), make_rakhmanov_hermite(10)), ov.JFD_HO8_HO10, 1e-9),
        (lambda: jfd(make_rakhmanov_hermite(11), make_rakhmanov_hermite(10)), ov.JFD_HO11_HO10, 1e-9),
        (lambda: jfd(make_rakhmanov_hermite(0), make_rakhmanov_hermite(40)), ov.JFD_HO0_HO40, 1e-9),
        (lambda: jsd(make_rakhmanov_hermite(20), make_rakhmanov_hermite(21)), ov.JSD_HO20_HO21, 1e-8),
        (lambda: jsd(make_rakhmanov_hermite(20), make_rakhmanov_hermite(30)), ov.JSD_HO20_HO30, 1e-8),
        (
            lambda: jsd_weighted([make_gaussian(m, 1) for m in (0, 1, 2)], WeightVector.uniform(3)),
            ov.JSDW_N0_N1_N2,
            1e-9,
        ),
    ],
)
def test_oracle_values(compute, expected, rtol):
    rep = compute()
    assert rep.finite
    assert rep.value == pytest.approx(expected, rel=rtol)


# -- worked examples ---------------------------------------------------------------


def test_entropy_examples():
    assert shannon_entropy(make_uniform(0, 1)).value == pytest.approx(0.0, abs=1e-12)
    assert shannon_entropy(make_gaussian(0, 1)).value == pytest.approx(0.5 * math.log(2 * math.pi * math.e), rel=1e-10)
    s1 = shannon_entropy(make_sinusoidal(1)).value
    assert shannon_entropy(make_sinusoidal(7)).value == pytest.approx(s1, abs=1e-8)


@pytest.mark.parametrize("n", [1, 2, 5, 13])
def test_fisher_sinusoidal(n):
    assert fisher_information(make_sinusoidal(n)).value == pytest.approx(4 * math.pi ** 2 * n ** 2, rel=1e-9)


@pytest.mark.parametrize("n", [0, 1, 5, 30])
def test_fisher_hermite(n):
    assert fisher_information(make_rakhmanov_hermite(n)).value == pytest.approx(2 * (2 * n + 1), rel=1e-9)


def gamma_fisher(beta):
    # F[gamma_beta] = <(beta/x - x)^2> = 1 + beta + beta^2 <x^-2> - 2 beta, with <x^-2> = 1/(beta - 1)
    return beta ** 2 / (beta - 1) - beta + 1


@pytest.mark.parametrize("beta", [0.0, 1.05, 1.5, 2.0, 10.0, 80.0])
def test_fisher_gamma(beta):
    expected = 1.0 if beta == 0 else gamma_fisher(beta)
    assert fisher_information(make_gamma_like(beta)).value == pytest.approx(expected, rel=1e-8)


def test_fisher_gamma_large_near_asymptote():
    assert fisher_information(make_gamma_like(1.05)).value > 20


@pytest.mark.parametrize("beta", [0.5, 1.0])
def test_fisher_gamma_rejected_at_or_below_asymptote(beta):
    with pytest.raises(InadmissibleDensity):
        fisher_information(make_gamma_like(beta))
    assert fisher_information(make_gamma_like(beta), strict=False).status is Status.DIVERGENT


def test_kl_examples():
    n0, n1 = make_gaussian(0, 1), make_gaussian(1, 1)
    assert kl_divergence(n0, n0).value == pytest.approx(0.0, abs=1e-12)
    assert kl_divergence(n0, n1).value == pytest.approx(0.5, rel=1e-10)
    assert kl_divergence(make_gamma_like(0), make_gamma_like(2)).finite


def test_kl_divergent_on_missing_support():
    assert kl_divergence(make_uniform(0, 2), make_uniform(0, 1)).divergent


def test_relative_fisher_examples():
    n0, n1 = make_gaussian(0, 1), make_gaussian(1, 1)
    assert relative_fisher(n0, n0).value == pytest.approx(0.0, abs=1e-12)
    assert relative_fisher(n0, n1).value == pytest.approx(1.0, rel=1e-10)
    assert relative_fisher(make_gamma_like(0), make_gamma_like(2)).divergent


def test_fisher_divergence_g_examples():
    n0, n1 = make_gaussian(0, 1), make_gaussian(1, 1)
    assert fisher_divergence_g(n0, n0).value == pytest.approx(0.0, abs=1e-12)
    assert fisher_divergence_g(n0, n1).value == pytest.approx(2.0, rel=1e-10)
    rep = fisher_divergence_g(make_sinusoidal(1), make_sinusoidal(2))
    assert rep.divergent and rep.value == math.inf


def test_directed_jfd_examples():
    s1, s2 = make_sinusoidal(1), make_sinusoidal(2)
    assert directed_jfd(s1, s1).value == pytest.approx(0.0, abs=1e-12)
    direct = directed_jfd(s1, s2)
    via = relative_fisher(s1, half(s1, s2))
    assert abs(direct.value - via.value) <= direct.error_estimate + via.error_estimate
    assert direct.finite


def test_jsd_examples():
    assert jsd(make_sinusoidal(4), make_sinusoidal(4)).value == pytest.approx(0.0, abs=1e-12)
    assert jsd(make_uniform(0, 1), make_uniform(2, 3)).value == pytest.approx(LN2, rel=1e-12)
    s1 = make_sinusoidal(1)
    j50, j20 = jsd(make_sinusoidal(50), s1).value, jsd(make_sinusoidal(20), s1).value
    assert abs(j50 - j20) < 0.02 * j20


def test_jfd_examples():
    s = make_sinusoidal(6)
    assert jfd(s, s).value == pytest.approx(0.0, abs=1e-10)
    h10 = make_rakhmanov_hermite(10)
    assert jfd(make_rakhmanov_hermite(9), h10).value > jfd(make_rakhmanov_hermite(8), h10).value


@pytest.mark.parametrize("n", [1, 2, 7, 19, 33, 50])
def test_jfd_dual_path_sinusoidal(n):
    a, b = make_sinusoidal(n), make_sinusoidal(1)
    f = jfd(a, b).value
    d = jfd(a, b, path=Path.DEFINITION).value
    assert d == pytest.approx(f, rel=1e-6, abs=1e-10)


def test_jfd_rejects_inadmissible():
    with pytest.raises(InadmissibleDensity):
        jfd(make_gamma_like(0.5), make_gaussian(0, 1))


def test_jfd_report_paths():
    a, b = make_gaussian(0, 1), make_gaussian(1, 1)
    assert jfd(a, b).path is Path.FUNCTIONAL
    assert jfd(a, b, path="definition").path is Path.DEFINITION


# -- weighted forms ----------------------------------------------------------------


def test_weighted_all_equal_zero():
    d = make_rakhmanov_hermite(3)
    w = WeightVector((0.2, 0.3, 0.5))
    assert jsd_weighted([d, d, d], w).value == pytest.approx(0.0, abs=1e-12)
    assert jfd_weighted([d, d, d], w).value == pytest.approx(0.0, abs=1e-9)


def test_weighted_reductions():
    a, b = make_sinusoidal(2), make_sinusoidal(5)
    w = WeightVector((0.5, 0.5))
    assert jsd_weighted([a, b], w).value == pytest.approx(jsd(a, b).value, abs=1e-10)
    assert jfd_weighted([a, b], w).value == pytest.approx(jfd(a, b).value, abs=1e-8)


def test_weighted_permutation_invariance():
    ds = [make_gaussian(0, 1), make_rakhmanov_hermite(2), make_gamma_like(3)]
    w = (0.2, 0.5, 0.3)
    base_s = jsd_weighted(ds, w).value
    base_f = jfd_weighted(ds, w).value
    for order in [(1, 2, 0), (2, 0, 1), (2, 1, 0)]:
        assert jsd_weighted([ds[i] for i in order], [w[i] for i in order]).value == pytest.approx(base_s, abs=1e-10)
        assert jfd_weighted([ds[i] for i in order], [w[i] for i in order]).value == pytest.approx(base_f, abs=1e-10)


def test_weighted_zero_weight_drops_component():
    a, b, c = make_gaussian(0, 1), make_gaussian(1, 1), make_gamma_like(0.5)
    assert jsd_weighted([a, b, c], (0.5, 0.5, 0.0)).value == pytest.approx(jsd(a, b).value, abs=1e-10)


@pytest.mark.parametrize(
    "densities, weights",
    [
        ([make_gaussian(0, 1)], (1.0,)),
        ([make_gaussian(0, 1), make_gaussian(1, 1)], (0.2, 0.3, 0.5)),
    ],
)
def test_weighted_validation(densities, weights):
    with pytest.raises(ValueError):
        jsd_weighted(densities, weights)
    with pytest.raises(ValueError):
        jfd_weighted(densities, weights)


# -- invariants over the pair matrix ---------------------------------------------


@pytest.fixture(scope="module")
def pair_reports():
    out = {}
    for label, a, b in PAIRS:
        out[label] = {
            "jsd": jsd(a, b),
            "jsd_rev": jsd(b, a),
            "jfd": jfd(a, b),
            "jfd_rev": jfd(b, a),
            "jfd_def": jfd(a, b, path=Path.DEFINITION),
        }
    return out


@pytest.mark.parametrize("label", PAIR_IDS)
def test_non_negative_and_bounded(pair_reports, label):
    r = pair_reports[label]
    for key in ("jsd", "jfd", "jfd_def"):
        assert r[key].finite
        assert r[key].value >= -r[key].error_estimate
    assert r["jsd"].value <= LN2 + 1e-8


@pytest.mark.parametrize("label", PAIR_IDS)
def test_symmetric(pair_reports, label):
    r = pair_reports[label]
    for a, b in (("jsd", "jsd_rev"), ("jfd", "jfd_rev")):
        budget = r[a].error_estimate + r[b].error_estimate + 1e-14 * abs(r[a].value)
        assert abs(r[a].value - r[b].value) <= budget


@pytest.mark.parametrize("label", PAIR_IDS)
def test_dual_path(pair_reports, label):
    r = pair_reports[label]
    assert r["jfd_def"].value == pytest.approx(r["jfd"].value, rel=1e-6)


@pytest.mark.parametrize("label", PAIR_IDS)
def test_distinct_pairs_positive(pair_reports, label):
    r = pair_reports[label]
    assert r["jsd"].value > 1e-6
    assert r["jfd"].value > 1e-6


@pytest.mark.parametrize("d", single_densities(), ids=repr)
def test_self_divergence(d):
    assert abs(jsd(d, d).value) <= 1e-10
    assert abs(jfd(d, d).value) <= 1e-10


CONVERGENT_KL = [p for p in PAIRS if p[0].startswith(("gamma", "n", "ho0-ho1", "ho2"))] + [
    (lab, a, b) for lab, a, b in PAIRS if lab in ("sin1-sin2", "sin3-sin7", "ho9-ho10")
]


@pytest.mark.parametrize("label, a, b", CONVERGENT_KL, ids=[p[0] for p in CONVERGENT_KL])
def test_jsd_relative_form(label, a, b):
    m = half(a, b)
    k1, k2 = kl_divergence(a, m), kl_divergence(b, m)
    assert k1.finite and k2.finite
    assert jsd(a, b).value == pytest.approx(0.5 * (k1.value + k2.value), abs=1e-8)


@pytest.mark.parametrize("label, a, b", PAIRS[::3], ids=PAIR_IDS[::3])
def test_fisher_convexity(label, a, b):
    fa, fb, fm = fisher_information(a), fisher_information(b), fisher_information(half(a, b))
    err = fa.error_estimate + fb.error_estimate + fm.error_estimate
    assert fm.value <= 0.5 * (fa.value + fb.value) + err


@pytest.mark.parametrize("label, a, b", PAIRS[::3], ids=PAIR_IDS[::3])
def test_other_divergences_non_negative(label, a, b):
    for compute in (kl_divergence, relative_fisher, fisher_divergence_g, directed_jfd):
        rep = compute(a, b)
        assert rep.divergent or rep.value >= -rep.error_estimate


def test_definiteness_contrast():
    s1, s2 = make_sinusoidal(1), make_sinusoidal(2)
    assert fisher_divergence_g(s1, s2).divergent
    assert jfd(s1, s2).finite
    g0, g2 = make_gamma_like(0), make_gamma_like(2)
    assert relative_fisher(g0, g2).divergent
    assert jfd(g0, g2).finite


def test_not_converged_raises():
    from jfdiv import NotConvergedError

    with pytest.raises(NotConvergedError):
        jfd(make_rakhmanov_hermite(30), make_rakhmanov_hermite(31), QuadConfig(1e-15, 1e-15, max_subdivisions=5))


# -- Gaussian smoothing -------------------------------------------------------------


def test_smoothing_gaussian_closed_form():
    sm = gaussian_smooth(make_gaussian(0, 1), 0.5)
    x = np.linspace(-6, 6, 101)
    exact = make_gaussian(0, math.sqrt(1.5)).pdf(x)
    assert np.max(np.abs(sm.pdf(x) - exact)) < 1e-6


@pytest.mark.parametrize(
    "d", [make_gaussian(0, 1), make_sinusoidal(2), make_rakhmanov_hermite(4), make_smooth_uniform(), make_gamma_like(2)],
    ids=repr,
)
def test_smoothing_mass_and_entropy(d):
    sm = gaussian_smooth(d, 1e-2)
    res = integrate(sm.pdf, sm.window, sm.breakpoints())
    assert res.value == pytest.approx(1.0, abs=1e-6)
    assert shannon_entropy(sm).value > shannon_entropy(d).value


def test_smoothing_log_derivative():
    sm = gaussian_smooth(make_rakhmanov_hermite(3), 0.05)
    x = np.linspace(-3, 3, 37)
    h = 1e-5
    fd = (sm.log_pdf(x + h) - sm.log_pdf(x - h)) / (2 * h)
    np.testing.assert_allclose(sm.log_pdf_derivative(x), fd, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("eps", [0.0, -1.0, math.inf])
def test_smoothing_rejects_bad_variance(eps):
    with pytest.raises(ValueError):
        gaussian_smooth(make_gaussian(0, 1), eps)
