import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frozen_designs import DESIGNS, DISPLACED_NAMES, THETA
from pairsqueeze import design, fock, interaction, metrology, squeezing
from pairsqueeze.errors import OracleInvalidError, SingularCovarianceError, ValidationError
from pairsqueeze.interaction import QubitPairState


def predicted(pair, theta=THETA):
    return design.predict_steady_state(pair, theta, warn=False)


def test_gaussian_summary_is_minimum_uncertainty():
    s = metrology.GaussianSummary.from_squeezed(1 + 1j, 0.4, 1.2, 0.5)
    assert np.linalg.det(s.sigma).real == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValidationError):
        metrology.GaussianSummary(np.zeros(2), np.array([[1, 1], [0, 1]]), np.zeros(2))


def test_qfi_gaussian_trivial_cases():
    assert metrology.qfi_gaussian(metrology.GaussianSummary.from_squeezed(1.0, 0.3, 0.2, 0.0)) == 0
    assert metrology.qfi_gaussian(metrology.GaussianSummary.from_squeezed(1.0, 0.0, 0.0, 0.7)) == pytest.approx(
        4 * 0.7**2
    )
    with pytest.raises(SingularCovarianceError):
        metrology.qfi_gaussian(metrology.GaussianSummary(np.ones(2), np.ones((2, 2)), np.ones(2)))


@settings(max_examples=50, deadline=None)
@given(
    r=st.floats(0, 1.5),
    phi=st.floats(0, 2 * math.pi),
    dot=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
)
def test_qfi_gaussian_matches_quadrature_form(r, phi, dot):
    s = metrology.GaussianSummary.from_squeezed(0.0, r, phi, dot)
    expected = 4 * abs(dot) ** 2 * (math.cosh(2 * r) + math.cos(phi - 2 * math.atan2(dot.imag, dot.real)) * math.sinh(2 * r))
    j = metrology.qfi_gaussian(s)
    assert j >= -1e-10
    assert j == pytest.approx(expected, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", sorted(DESIGNS))
def test_qfi_explicit_matches_gaussian(name):
    d = predicted(DESIGNS[name])
    j_gauss = metrology.qfi_gaussian(metrology.GaussianSummary.from_design(d))
    assert metrology.qfi_explicit(d) == pytest.approx(j_gauss, rel=1e-6, abs=1e-12)


def test_qfi_explicit_zero_without_epsilon_and_theta_scaling():
    assert metrology.qfi_explicit(predicted(DESIGNS["alternating_u0.45"])) == 0
    pair = DESIGNS["entangled_eps0.03"]
    ratio = metrology.qfi_explicit(predicted(pair, 0.025)) / metrology.qfi_explicit(predicted(pair, 0.05))
    assert ratio == pytest.approx(16.0, rel=1e-6)


def test_qfi_explicit_finite_without_squeezing():
    pair = QubitPairState.normalized(1, 0.01, 0.01, 0)
    assert predicted(pair).mu == math.inf
    assert metrology.qfi_explicit(predicted(pair)) > 0


def test_qfi_explicit_requires_mu_above_one():
    pair = QubitPairState.normalized(0.6, 0.01, 0.01, 0.6)
    fake = design.ReservoirDesign(THETA, pair, pair.epsilon, pair.mu, squeezing.SqueezedTarget(), 0.0)
    with pytest.raises(ValidationError):
        metrology.qfi_explicit(fake)


def test_qfi_explicit_on_tuned_design():
    pair = design.tune_pair_for_target(squeezing.SqueezedTarget(0.5, 0.3, math.pi), THETA)
    d = predicted(pair)
    assert abs(d.phases["alpha"]) < 1e-6
    j = metrology.qfi_explicit(d)
    assert j > 0
    assert j == pytest.approx(metrology.qfi_gaussian(metrology.GaussianSummary.from_design(d)), rel=1e-6)


def test_phase_separated_form_agrees_only_for_real_alpha():
    pair = design.tune_pair_for_target(squeezing.SqueezedTarget(0.5, 0.3, math.pi), THETA)
    d = predicted(pair)
    assert metrology.qfi_phase_separated(d) == pytest.approx(metrology.qfi_explicit(d), rel=1e-6)
    complex_alpha = predicted(DESIGNS["entangled_eps0.03"])
    assert metrology.qfi_phase_separated(complex_alpha) != pytest.approx(metrology.qfi_explicit(complex_alpha), rel=1e-2)


@pytest.mark.parametrize("name", sorted(DESIGNS))
def test_rate_adjusted_qfi_identity_and_theta_independence(name):
    pair = DESIGNS[name]
    value = metrology.rate_adjusted_qfi(predicted(pair, 0.02))
    assert value == pytest.approx(metrology.rate_adjusted_qfi(predicted(pair, 0.1)), rel=1e-9, abs=1e-15)
    gap = abs(pair.beta_gg) ** 2 - abs(pair.beta_ee) ** 2
    assert value == pytest.approx(16 * abs(pair.epsilon) ** 2 * gap, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("name", DISPLACED_NAMES)
def test_rate_adjusted_qfi_global_phase_invariance(name):
    pair = DESIGNS[name]
    rotated = QubitPairState(*(pair.amplitudes * cmath.exp(0.9j)))
    assert metrology.rate_adjusted_qfi(predicted(rotated)) == pytest.approx(
        metrology.rate_adjusted_qfi(predicted(pair)), rel=1e-9
    )


def test_entangled_qfi_bound_examples():
    assert metrology.entangled_qfi_bound(0.05, 2.0) == pytest.approx(1.08)
    assert metrology.entangled_qfi_bound(0.05, 1e9) == pytest.approx(16 * 0.05**2, rel=1e-6)
    assert metrology.entangled_qfi_bound(0.05, 1 + 1e-12) > 1e30
    with pytest.raises(ValidationError):
        metrology.entangled_qfi_bound(0.05, 1.0)


def test_separable_qfi_scan():
    scan = metrology.separable_qfi_scan(0.05, 2.0, 256)
    assert scan.sup < 1.08 and scan.margin > 0
    assert scan.conditions_met == 0
    finer = metrology.separable_qfi_scan(0.05, 2.0, 512)
    assert abs(finer.sup - scan.sup) / scan.sup < 1e-3


def test_separable_qfi_scan_matches_closed_form_sup():
    # 16 |eps|^2 (|gg|^2 - |ee|^2) is largest when |ee| is, which happens at the edge of the grid.
    eps, mu = 0.05, 2.0
    gg, ge, eg, ee, _ = design.separable_pairs_grid(eps, mu, 256)
    expected = 16 * eps**2 * np.max(np.abs(gg) ** 2 - np.abs(ee) ** 2)
    assert metrology.separable_qfi_scan(eps, mu, 256).sup == pytest.approx(expected, rel=1e-9)


def test_bures_oracle_trivial_and_coherent_family():
    dim = 60
    fixed = fock.projector(squeezing.coherent_state(0.5, dim))
    assert metrology.bures_qfi_oracle(lambda _: fixed, 0.1) == pytest.approx(0.0, abs=1e-6)
    c = 0.1
    family = lambda th: squeezing.coherent_state(c / th, dim)  # noqa: E731
    theta = 0.1
    assert metrology.bures_qfi_oracle(family, theta) == pytest.approx(4 * c**2 / theta**4, rel=1e-4)


def test_bures_oracle_rejects_invalid_states():
    with pytest.raises(OracleInvalidError):
        metrology.bures_qfi_oracle(lambda _: np.diag([2.0, 0.0]), 0.1)


@pytest.mark.parametrize("name", DISPLACED_NAMES)
def test_bures_oracle_on_target_states(name):
    pair = DESIGNS[name]
    dim = 60
    build = lambda th: squeezing.make_state(predicted(pair, th).predicted_target, dim)  # noqa: E731
    oracle = metrology.bures_qfi_oracle(build, THETA)
    closed = metrology.qfi_gaussian(metrology.GaussianSummary.from_design(predicted(pair)))
    assert oracle == pytest.approx(closed, rel=1e-3)


def test_cramer_rao():
    assert metrology.cramer_rao(4.0, 1) == pytest.approx(0.5)
    assert metrology.cramer_rao(1.08, 100) == pytest.approx(0.0962, abs=1e-4)
    assert metrology.cramer_rao(3.0, 40) == pytest.approx(metrology.cramer_rao(3.0, 10) / 2)
    with pytest.raises(ValidationError):
        metrology.cramer_rao(0.0)
    with pytest.raises(ValidationError):
        metrology.cramer_rao(1.0, 0)


def test_bures_oracle_on_simulated_steady_state():
    pair = DESIGNS["entangled_eps0.03"]
    oracle = metrology.bures_qfi_oracle(lambda th: interaction.steady_state(pair, th, 60), THETA)
    closed = metrology.qfi_gaussian(metrology.GaussianSummary.from_design(predicted(pair)))
    assert oracle == pytest.approx(closed, rel=0.05)
