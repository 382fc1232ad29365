from __future__ import annotations

import pytest

from frameweave.errors import InvalidArgumentError
from frameweave.systems.frame_core import SystemParams, WeavingPattern, frame_bounds
from frameweave.systems.weaving import (
    enumerate_patterns,
    packet_family,
    sample_patterns,
    weave_certificate,
    woven_bounds,
)


@pytest.fixture(scope="module")
def certificate():
    from frameweave.systems.generators import make_powerlaw_wavelet

    return weave_certificate(make_powerlaw_wavelet(0.5, 1.0), SystemParams(a=2.0, b=0.5, N=2))


def test_two_family_certificate(certificate):
    assert certificate.L_weave == pytest.approx(1.0 / 3.0, abs=1e-3)
    assert certificate.U_weave == pytest.approx(10.0 / 3.0, abs=1e-3)
    assert certificate.certified
    assert certificate.grid.lo == 1.0 and certificate.grid.hi == 4.0


def test_certificate_witness_prefers_coarser_family(certificate):
    # just above γ = 1 the pointwise minimum drops family 0 at j = 0 and picks ℓ = 1 elsewhere
    assert certificate.argmin == pytest.approx(1.0, abs=1e-2)
    assert certificate.witness
    assert all(ell in (0, 1) for ell in certificate.witness.values())
    assert certificate.witness.get(1) == 1


@pytest.mark.parametrize("N, expected", [(1, 2.0), (2, 1.0 / 3.0), (3, 1.0 / 14.0), (4, 1.0 / 60.0)])
def test_lower_certificate_shrinks_with_order(powerlaw, N, expected):
    cert = weave_certificate(powerlaw, SystemParams(a=2.0, b=0.5, N=N), grid_points=2048)
    assert cert.L_weave == pytest.approx(expected, abs=1e-3)
    assert cert.L_weave > 0


def test_single_family_certificate_matches_bounds(powerlaw, base_params, constant1):
    cert = weave_certificate(powerlaw, base_params)
    bounds = frame_bounds(powerlaw, base_params, constant1)
    assert cert.L_weave == pytest.approx(bounds.A_num, abs=1e-6)
    assert cert.U_weave == pytest.approx(bounds.B_num, abs=1e-6)


def test_certificate_contains_both_families(powerlaw, woven_params, certificate):
    for ell in (0, 1):
        b = woven_bounds(powerlaw, woven_params, packet_family(woven_params, ell).pattern(), grid_points=1024)
        assert certificate.L_weave - 1e-3 <= b.A_num
        assert b.B_num <= certificate.U_weave + 1e-3


def test_alternating_pattern_within_certificate(powerlaw, woven_params, certificate):
    b = woven_bounds(powerlaw, woven_params, WeavingPattern.alternating(2), grid_points=1024)
    assert certificate.L_weave - 1e-3 <= b.A_num <= b.B_num <= certificate.U_weave + 1e-3


def test_sampled_patterns_stay_inside(powerlaw, woven_params, certificate):
    report = sample_patterns(
        powerlaw, woven_params, count=12, seed=5, window=(-3, 3), grid_points=256, refine_points=32, certificate=certificate
    )
    assert report.all_within
    assert report.count == len(report.entries) == 12
    assert certificate.L_weave - 1e-3 <= report.min_A
    assert report.max_B <= certificate.U_weave + 1e-3


def test_sampling_is_seeded(powerlaw, woven_params, certificate):
    kw = dict(count=4, seed=11, window=(0, 5), grid_points=128, refine_points=16, certificate=certificate)
    one = sample_patterns(powerlaw, woven_params, **kw)
    two = sample_patterns(powerlaw, woven_params, **kw)
    assert [e.pattern for e in one.entries] == [e.pattern for e in two.entries]
    assert one.as_dict() == two.as_dict()


def test_thread_pool_keeps_order(powerlaw, woven_params, certificate):
    kw = dict(count=6, seed=3, window=(0, 4), grid_points=128, refine_points=16, certificate=certificate)
    serial = sample_patterns(powerlaw, woven_params, threads=1, **kw)
    pooled = sample_patterns(powerlaw, woven_params, threads=3, **kw)
    assert serial.as_dict() == pooled.as_dict()


def test_small_enumeration(powerlaw, woven_params, certificate):
    report = enumerate_patterns(
        powerlaw, woven_params, (0, 3), grid_points=256, refine_points=32, certificate=certificate
    )
    assert report.patterns == 16
    assert report.all_within
    assert report.gap >= -1e-3
    assert len(report.worst_lower) == 4


@pytest.mark.slow
def test_length_ten_enumeration(powerlaw, woven_params, certificate):
    report = enumerate_patterns(
        powerlaw, woven_params, (0, 9), grid_points=256, refine_points=16, certificate=certificate, threads=2
    )
    assert report.patterns == 1024
    assert report.all_within


def test_enumeration_budget(powerlaw, woven_params, certificate):
    with pytest.raises(InvalidArgumentError, match="2097152"):
        enumerate_patterns(powerlaw, woven_params, (0, 20), certificate=certificate)


def test_packet_family_scales(woven_params):
    fam = packet_family(woven_params, 1)
    assert fam.scale(0) == 2.0
    assert fam.scale(-1) == 0.5
    assert fam.descriptor(0, (-1, 1)) == [(2.0, -0.5), (2.0, 0.0), (2.0, 0.5)]
    assert fam.pattern().choice(9) == 1
    with pytest.raises(InvalidArgumentError):
        packet_family(woven_params, 2)


def test_sample_count_validated(powerlaw, woven_params, certificate):
    with pytest.raises(InvalidArgumentError):
        sample_patterns(powerlaw, woven_params, count=0, seed=0, window=(0, 1), certificate=certificate)
