from __future__ import annotations

import numpy as np
import pytest

from frameweave.errors import InvalidArgumentError, NotAFusionFrameError, NotAnInformationPacketError
from frameweave.io.matrix_text import format_packet, parse_packet_text
from frameweave.lab.packets import (
    FinitePacket,
    counterexample_growth,
    counterexample_packet,
    enlarge_packet,
    expand_in_packet,
    frame_bounds_of,
    fusion_bounds,
    fusion_decompose,
    map_packet,
    onb_packet,
    packet_from_frame,
    random_packet,
    woven_frames_bounds,
)


def test_orthonormal_basis_packet_is_tight():
    A, B = fusion_bounds(onb_packet(6))
    assert A == pytest.approx(1.0)
    assert B == pytest.approx(1.0)


@pytest.mark.parametrize("M", [2, 4, 8, 16, 64])
def test_counterexample_ratio_grows(M):
    at_e1, at_ek, ratio = counterexample_growth(M)
    assert at_e1 == pytest.approx(M)
    assert at_ek == pytest.approx(1.0)
    assert ratio == pytest.approx(M)
    A, B = fusion_bounds(counterexample_packet(M))
    assert A == pytest.approx(1.0)
    assert B == pytest.approx(M)


def test_counterexample_needs_two():
    with pytest.raises(InvalidArgumentError):
        counterexample_growth(1)


def test_decomposition_of_random_packets(rng):
    worst = 0.0
    for _ in range(100):
        packet = random_packet(rng, ambient_dim=6, count=4, max_dim=3)
        f = rng.standard_normal(6)
        res = fusion_decompose(packet, f)
        worst = max(worst, res.residual_norm)
        np.testing.assert_allclose(res.total(), f, atol=1e-10)
    assert worst <= 1e-10


def test_complex_packet_decomposition(rng):
    subs = tuple(rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)) for _ in range(3))
    packet = FinitePacket(4, subs, (1.0, 2.0, 0.5))
    f = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    assert fusion_decompose(packet, f).residual_norm <= 1e-10


def test_deficient_packet_is_not_a_fusion_frame():
    eye = np.eye(3)
    packet = FinitePacket(3, (eye[:1], eye[1:2]), (1.0, 1.0))
    with pytest.raises(NotAFusionFrameError):
        fusion_decompose(packet, np.ones(3))
    with pytest.raises(NotAnInformationPacketError):
        expand_in_packet(packet, np.ones(3))


def test_rayleigh_estimate_above_dense_limit():
    packet = onb_packet(600)
    bounds = fusion_bounds(packet, trials=20, seed=1)
    assert bounds.method == "rayleigh"
    assert bounds.A_est == pytest.approx(1.0)
    assert bounds.B_est == pytest.approx(1.0)


def test_packet_from_frame_cover():
    F = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    packet = packet_from_frame(F, [[0, 2], [1]])
    assert len(packet) == 2
    assert expand_in_packet(packet, np.array([3.0, -1.0])).residual_norm <= 1e-12
    with pytest.raises(InvalidArgumentError, match="misses"):
        packet_from_frame(F, [[0, 1]])
    with pytest.raises(InvalidArgumentError):
        packet_from_frame(F, [[0, 1, 5]])


def test_invertible_image_keeps_expansions(rng):
    for _ in range(100):
        packet = random_packet(rng, ambient_dim=5, count=4, max_dim=2, weights=False)
        T = np.eye(5) + 0.2 * rng.standard_normal((5, 5))
        f = rng.standard_normal(5)
        assert expand_in_packet(map_packet(packet, T), f).residual_norm <= 1e-9


def test_singular_map_rejected():
    with pytest.raises(InvalidArgumentError, match="singular"):
        map_packet(onb_packet(3), np.diag([1.0, 1.0, 0.0]))


def test_enlarged_packet_still_expands():
    eye = np.eye(3)
    packet = FinitePacket(3, (eye[:1], eye[1:3]))
    bigger = enlarge_packet(packet, [eye[:2], eye[1:3]])
    assert expand_in_packet(bigger, np.array([1.0, 2.0, 3.0])).residual_norm <= 1e-12
    with pytest.raises(InvalidArgumentError, match="not contained"):
        enlarge_packet(packet, [eye[1:2], eye[1:3]])


def test_woven_orthonormal_bases():
    c = s = np.sqrt(0.5)
    rotated = np.array([[c, s], [-s, c]])
    report = woven_frames_bounds([np.eye(2), rotated])
    assert report.selections == 4
    assert report.woven
    assert report.worst_upper <= 2.0 + 1e-12

    swapped = np.eye(2)[::-1]
    assert not woven_frames_bounds([np.eye(2), swapped]).woven


def test_frame_bounds_of_tight_frame():
    angles = np.array([0.0, 2.0, 4.0]) * np.pi / 3.0
    mercedes = np.column_stack([np.cos(angles), np.sin(angles)])
    A, B = frame_bounds_of(mercedes)
    assert A == pytest.approx(1.5)
    assert B == pytest.approx(1.5)


def test_packet_text_format():
    text = "# two subspaces\n1 0 0\n0 1 0\n\n\n0 0 1\n"
    packet = parse_packet_text(text)
    assert packet.ambient_dim == 3
    assert [s.shape for s in packet.subspaces] == [(2, 3), (1, 3)]
    back = parse_packet_text(format_packet(packet))
    for s, t in zip(packet.subspaces, back.subspaces):
        np.testing.assert_array_equal(s, t)
    cplx = parse_packet_text("1+1j 0\n\n0 2j\n")
    assert np.iscomplexobj(cplx.subspaces[0])
    with pytest.raises(InvalidArgumentError):
        parse_packet_text("1 0\n0 1 0\n")
    with pytest.raises(InvalidArgumentError):
        parse_packet_text("\n# nothing\n")


def test_projections_are_orthogonal(rng):
    real = random_packet(rng, ambient_dim=6, count=4, max_dim=3)
    subs = tuple(rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)) for _ in range(3))
    cplx = FinitePacket(4, subs, (1.0, 1.0, 1.0))
    for packet in (real, cplx):
        for P in packet.projections():
            np.testing.assert_allclose(P @ P, P, atol=1e-12)
            np.testing.assert_allclose(P.conj().T, P, atol=1e-12)


def test_doubling_weights_quadruples_bounds(rng):
    for _ in range(10):
        packet = random_packet(rng, ambient_dim=6, count=5, max_dim=3)
        A, B = fusion_bounds(packet)
        A2, B2 = fusion_bounds(packet.with_weights([2.0 * w for w in packet.weights]))
        assert A2 == pytest.approx(4.0 * A, rel=1e-12)
        assert B2 == pytest.approx(4.0 * B, rel=1e-12)


def test_positive_lower_bound_gives_expansions(rng):
    for _ in range(100):
        packet = random_packet(rng, ambient_dim=5, count=4, max_dim=2)
        if fusion_bounds(packet).A_est <= 1e-10:
            continue
        f = rng.standard_normal(5)
        assert expand_in_packet(packet, f).residual_norm <= 1e-10


def test_counterexample_decomposes_second_basis_vector():
    M = 16
    e2 = np.zeros(M)
    e2[1] = 1.0
    res = fusion_decompose(counterexample_packet(M), e2)
    assert res.residual_norm <= 1e-12
    np.testing.assert_allclose(res.components[1], e2, atol=1e-12)
    others = [c for j, c in enumerate(res.components) if j != 1]
    assert max(np.linalg.norm(c) for c in others) <= 1e-12
