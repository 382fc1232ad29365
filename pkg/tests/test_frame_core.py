from __future__ import annotations

import numpy as np
import pytest

from frameweave.errors import InvalidArgumentError, PreconditionError
from frameweave.systems.frame_core import (
    SystemParams,
    WeavingPattern,
    analytic_bounds,
    cross_term_sum,
    frame_bounds,
    multiplier,
    multiplier_curve,
    multiplier_from_scales,
    tail_bound_for,
    truncation_level,
)
from frameweave.systems.generators import make_indicator_wavelet, make_tapered_wavelet


def test_base_system_bounds(powerlaw, base_params, constant1):
    cert = frame_bounds(powerlaw, base_params, constant1)
    assert cert.A_num == pytest.approx(2.0, abs=1e-3)
    assert cert.B_num == pytest.approx(4.0, abs=1e-3)
    assert cert.certified
    assert cert.tail_bound < 1e-10
    assert cert.A_analytic == pytest.approx(1.0)
    assert cert.B_analytic == pytest.approx(8.0)
    assert (cert.J_const, cert.K_const) == (0, 2)


def test_single_family_of_two(powerlaw, woven_params):
    cert = frame_bounds(powerlaw, woven_params, WeavingPattern.constant(2, 0))
    assert cert.A_num == pytest.approx(2.0 / 3.0, abs=1e-3)
    assert cert.B_num == pytest.approx(8.0 / 3.0, abs=1e-3)


def test_other_family_has_same_bounds(powerlaw, woven_params):
    a0 = frame_bounds(powerlaw, woven_params, WeavingPattern.constant(2, 0), grid_points=1024)
    a1 = frame_bounds(powerlaw, woven_params, WeavingPattern.constant(2, 1), grid_points=1024)
    assert a1.A_num == pytest.approx(a0.A_num, abs=1e-3)
    assert a1.B_num == pytest.approx(a0.B_num, abs=1e-3)


def test_analytic_bounds_two_families(powerlaw, woven_params):
    ab = analytic_bounds(powerlaw, woven_params)
    assert ab.J_const == 0
    assert ab.K_const == 2
    assert ab.A_analytic == pytest.approx(0.25, rel=1e-12)
    assert ab.B_analytic == pytest.approx(20.0 / 3.0, rel=1e-12)


def test_analytic_bounds_need_valid_envelope(base_params):
    gen = make_indicator_wavelet(0.5, 1.0)
    with pytest.raises(PreconditionError):
        analytic_bounds(gen, base_params)


def test_multiplier_closed_form(powerlaw, base_params, woven_params, constant1):
    assert multiplier(powerlaw, base_params, constant1, 0.75) == pytest.approx(3.0, rel=1e-9)
    assert multiplier(powerlaw, base_params, constant1, 1.0) == pytest.approx(4.0, rel=1e-9)
    assert multiplier(powerlaw, base_params, constant1, -0.75) == pytest.approx(3.0, rel=1e-9)
    assert multiplier(powerlaw, woven_params, WeavingPattern.constant(2), 1.0) == pytest.approx(8.0 / 3.0, rel=1e-9)
    assert multiplier(powerlaw, base_params, constant1, 0.0) == 0.0


def test_multiplier_is_dilation_periodic(powerlaw, base_params, constant1):
    g = np.linspace(1.05, 1.95, 7)
    m = multiplier(powerlaw, base_params, constant1, g)
    m2 = multiplier(powerlaw, base_params, constant1, 2.0 * g)
    np.testing.assert_allclose(m, m2, rtol=1e-9)


def test_multiplier_from_explicit_scales(powerlaw):
    scales = [2.0**j for j in range(0, 60)]
    assert multiplier_from_scales(powerlaw, 0.5, scales, 0.75) == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(InvalidArgumentError):
        multiplier_from_scales(powerlaw, 0.5, [1.0, -2.0], 0.5)
    with pytest.raises(PreconditionError):
        multiplier_from_scales(powerlaw, 0.75, scales, 0.5)


def test_non_painless_system_is_rejected(powerlaw, constant1):
    params = SystemParams(a=2.0, b=0.6, N=1)
    assert not params.painless(powerlaw)
    with pytest.raises(PreconditionError):
        frame_bounds(powerlaw, params, constant1)
    with pytest.raises(PreconditionError):
        multiplier(powerlaw, params, constant1, 0.5)


@pytest.mark.parametrize("a, b, N", [(1.0, 0.5, 1), (0.5, 0.5, 1), (2.0, 0.0, 1), (2.0, 0.5, 0)])
def test_bad_system_params(a, b, N):
    with pytest.raises(InvalidArgumentError):
        SystemParams(a=a, b=b, N=N)


def test_truncation_range(powerlaw, base_params, constant1):
    tr = truncation_level(powerlaw, base_params, constant1, (1.0, 2.0))
    assert tr.j_min_eff <= 0
    assert tr.tail_bound <= 1e-12
    assert tr.tail_bound == pytest.approx(tail_bound_for(powerlaw, base_params, 2.0, tr.j_max_eff))
    looser = truncation_level(powerlaw, base_params, constant1, (1.0, 2.0), tail_target=1e-3)
    assert looser.j_max_eff < tr.j_max_eff
    with pytest.raises(InvalidArgumentError):
        truncation_level(powerlaw, base_params, constant1, (0.0, 2.0))
    with pytest.raises(InvalidArgumentError):
        truncation_level(powerlaw, base_params, constant1, (-1.0, 2.0))


def test_cross_terms_vanish_in_painless_regime(powerlaw, base_params, woven_params, rng):
    gammas = rng.uniform(-8.0, 8.0, size=1000)
    assert np.all(cross_term_sum(powerlaw, base_params, WeavingPattern.constant(1), gammas, 50) == 0.0)
    alt = WeavingPattern.alternating(2)
    assert np.all(cross_term_sum(powerlaw, woven_params, alt, gammas, 50) == 0.0)


def test_cross_terms_survive_beyond_painless_step(powerlaw, rng):
    # b = 0.75 > 1/|I|: shifted copies of the support overlap
    params = SystemParams(a=2.0, b=0.75, N=1)
    total = cross_term_sum(powerlaw, params, WeavingPattern.constant(1), rng.uniform(0.5, 1.0, size=20), 3)
    assert np.all(total > 0)


def test_cross_term_k_max_validated(powerlaw, base_params, constant1):
    with pytest.raises(InvalidArgumentError):
        cross_term_sum(powerlaw, base_params, constant1, 0.5, 0)


def test_same_exponents_give_same_numbers(powerlaw):
    # a = 4, N = 1 and a = 2, N = 2 with ℓ ≡ 0 use the very same scales 4^j
    one = frame_bounds(powerlaw, SystemParams(a=4.0, b=0.5, N=1), WeavingPattern.constant(1))
    two = frame_bounds(powerlaw, SystemParams(a=2.0, b=0.5, N=2), WeavingPattern.constant(2))
    assert one.A_num == pytest.approx(two.A_num, abs=1e-9)
    assert one.B_num == pytest.approx(two.B_num, abs=1e-9)


def test_windowed_pattern_sits_between_families(powerlaw, woven_params):
    pattern = WeavingPattern.explicit(2, -2, [1, 0, 1, 1, 0], "constant")
    cert = frame_bounds(powerlaw, woven_params, pattern, grid_points=1024)
    assert 1.0 / 3.0 - 1e-3 <= cert.A_num
    assert cert.B_num <= 10.0 / 3.0 + 1e-3
    assert any("windowed" in n for n in cert.notes)


def test_odd_generator_sweeps_both_signs(base_params, constant1):
    gen = make_indicator_wavelet(0.5, 1.0)
    params = SystemParams(a=2.0, b=2.0, N=1)
    cert = frame_bounds(gen, params, constant1, grid_points=256)
    assert cert.grid.both_signs
    # negative frequencies are never covered by a band in (0, ∞)
    assert cert.A_num == 0.0
    assert not cert.certified
    assert cert.B_num == pytest.approx(0.5)


def test_tapered_bounds_are_ordered():
    gen = make_tapered_wavelet(0.5, 1.0)
    cert = frame_bounds(gen, SystemParams(a=2.0, b=0.5, N=1), WeavingPattern.constant(1), grid_points=1024)
    assert cert.certified
    assert cert.A_analytic <= cert.A_num <= cert.B_num <= cert.B_analytic


def test_multiplier_curve_rows(powerlaw, base_params, woven_params, constant1):
    xs, m = multiplier_curve(powerlaw, base_params, constant1, 300)
    assert xs.shape == m.shape == (300,)
    xs2, m2 = multiplier_curve(powerlaw, woven_params, WeavingPattern.alternating(2), 300)
    assert xs2.shape == m2.shape == (300,)
    # the alternating pattern repeats after two periods of a^N
    assert xs2[0] == pytest.approx(1.0)
    assert xs2[-1] == pytest.approx(16.0)


def test_pattern_choices():
    p = WeavingPattern.alternating(2, window=(-2, 2))
    assert p.choice(-2) == 0 and p.choice(-1) == 1 and p.choice(1) == 1
    assert p.choice(7) == 0
    assert p.period is None
    periodic = WeavingPattern.alternating(2)
    assert periodic.period == 2
    assert periodic.choice(7) == 1
    assert WeavingPattern.constant(3, 2).choice(-5) == 2
    with pytest.raises(InvalidArgumentError):
        WeavingPattern.explicit(2, 0, [0, 2])
    with pytest.raises(InvalidArgumentError):
        WeavingPattern(N=2, extension="mirror")


@pytest.mark.parametrize(
    "pattern",
    [WeavingPattern.constant(2), WeavingPattern.alternating(2), WeavingPattern.explicit(2, -2, [1, 0, 0, 1, 1])],
    ids=["constant", "alternating", "windowed"],
)
def test_refining_the_grid_never_loosens_bounds(powerlaw, woven_params, pattern):
    for gen in (powerlaw, make_tapered_wavelet(0.5, 1.0)):
        prev = None
        for points in (128, 256, 512, 1024):
            cert = frame_bounds(gen, woven_params, pattern, grid_points=points)
            if prev is not None:
                assert cert.A_num <= prev.A_num + 1e-6
                assert cert.B_num >= prev.B_num - 1e-6
            prev = cert
