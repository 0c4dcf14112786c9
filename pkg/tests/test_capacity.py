from __future__ import annotations

import math

import numpy as np
import pytest

from hyperdense import capacity as cap
from hyperdense import optics, states
from hyperdense.optics import AccidentalModel, GateParams, TransferMatrix
from hyperdense.states import SourceParams

from _oracles import (
    grid_capacity,
    random_channel,
    split_channel_capacity_3,
    split_channel_capacity_4,
    uniform_noise_capacity,
)

_DEG = math.pi / 180.0


def test_validate_input_distribution():
    with pytest.raises(ValueError, match="entries"):
        cap.validate_input_distribution([0.5, 0.5], 4)
    with pytest.raises(ValueError, match="negative"):
        cap.validate_input_distribution([0.6, 0.6, -0.2, 0.0], 4)
    with pytest.raises(ValueError, match="sums"):
        cap.validate_input_distribution([0.3, 0.3, 0.3, 0.3], 4)


def test_mutual_information_reference_channels():
    uniform = np.full(4, 0.25)
    assert abs(cap.mutual_information(uniform, np.eye(4)) - 2.0) < 1e-12
    flat = np.full((4, 4), 0.25)
    assert abs(cap.mutual_information(uniform, flat)) < 1e-12
    t = cap.bound_lower_4(0.948)
    want = uniform_noise_capacity(0.948)
    assert abs(cap.mutual_information(uniform, t) - want) < 1e-12
    with pytest.raises(ValueError):
        cap.mutual_information([0.5, 0.5], np.eye(4))


def test_mutual_information_nonnegative_random():
    rng = np.random.default_rng(43)
    for _ in range(50):
        t = random_channel(rng, 4)
        px = rng.random(4)
        px /= px.sum()
        assert cap.mutual_information(px, t) >= 0.0


def test_capacity_identity_channel():
    result = cap.channel_capacity(np.eye(4))
    assert abs(result.capacity_bits - 2.0) < 1e-9
    assert result.converged
    assert np.allclose(result.input_distribution, 0.25, atol=1e-9)


def test_capacity_uniform_noise_closed_form():
    result = cap.channel_capacity(cap.bound_lower_4(0.948))
    assert abs(result.capacity_bits - uniform_noise_capacity(0.948)) < 1e-9
    assert abs(result.capacity_bits - 1.6227) < 1e-4
    assert np.allclose(result.input_distribution, 0.25, atol=1e-6)


def test_capacity_split_channel_closed_form():
    result = cap.channel_capacity(cap.bound_upper_4(0.948))
    assert abs(result.capacity_bits - split_channel_capacity_4(0.948)) < 1e-9
    assert abs(result.capacity_bits - 1.779) < 1e-3


def test_capacity_permutation_invariance():
    rng = np.random.default_rng(47)
    for _ in range(10):
        t = random_channel(rng, 4)
        base = cap.channel_capacity(t).capacity_bits
        perm = rng.permutation(4)
        shuffled = cap.channel_capacity(t[:, perm]).capacity_bits
        assert abs(base - shuffled) < 1e-9


def test_mutual_information_below_capacity():
    rng = np.random.default_rng(53)
    for _ in range(100):
        t = random_channel(rng, 4)
        px = rng.random(4)
        px /= px.sum()
        mi = cap.mutual_information(px, t)
        c = cap.channel_capacity(t).capacity_bits
        assert mi <= c + 1e-9


def test_symmetric_channel_optimal_distribution_uniform():
    rng = np.random.default_rng(59)
    for _ in range(10):
        row = rng.random(4)
        row /= row.sum()
        # circulant channel: every row a cyclic shift of the first
        t = np.array([np.roll(row, k) for k in range(4)])
        result = cap.channel_capacity(t)
        assert np.max(np.abs(result.input_distribution - 0.25)) < 1e-6


def test_capacity_vs_grid_search_small_channels():
    rng = np.random.default_rng(61)
    for _ in range(10):
        t = random_channel(rng, 3)
        ba = cap.channel_capacity(t).capacity_bits
        grid = grid_capacity(t, steps=100)
        assert abs(ba - grid) < 1e-3


def test_capacity_iteration_cap_flags_nonconvergence():
    # symmetric channels close the duality gap on the very first pass, so a
    # skewed channel is needed to observe the iteration cap taking effect
    t = TransferMatrix(np.array([[0.90, 0.30], [0.10, 0.70]]), labels=("a", "b"))
    result = cap.channel_capacity(t, tol_bits=1e-14, max_iterations=1)
    assert not result.converged
    assert result.iterations == 1
    assert result.capacity_bits <= cap.channel_capacity(t).capacity_bits + 1e-12


def test_average_success():
    assert cap.average_success(np.eye(4)) == 1.0
    assert cap.average_success(np.full((4, 4), 0.25)) == 0.25
    t = optics.transfer_matrix(
        SourceParams(eps_theta_spin=1.0 * _DEG, lambda_spin=0.010,
                     eps_theta_orbit=1.7 * _DEG, lambda_orbit=0.03),
        GateParams(eps_H=0.005, eps_V=0.010))
    t = optics.apply_accidentals(t, AccidentalModel(0.00267))
    assert abs(cap.average_success(t) - 0.953) < 0.003


def test_snr_per_message():
    counts = np.zeros((4, 16))
    for m in states.MESSAGES:
        for l1, l2 in states.signature_map(m):
            counts[m, l1 * 4 + l2] = 200.0
    assert cap.snr_per_message(counts) == [None, None, None, None]

    noisy = counts.copy()
    noisy[0, :] += 10.0 / 12.0
    noisy[0, [l1 * 4 + l2 for l1, l2 in states.signature_map(states.Message.PHI_PLUS)]] = 190.0 / 4.0
    snrs = cap.snr_per_message(noisy)
    assert abs(snrs[0] - 19.0) < 1e-12
    assert snrs[1:] == [None, None, None]

    expect = np.zeros((4, 16))
    for m in states.MESSAGES:
        sig = {l1 * 4 + l2 for l1, l2 in states.signature_map(m)}
        for j in range(16):
            expect[m, j] = 711.0 if j in sig else 13.0
    for snr in cap.snr_per_message(expect):
        assert abs(snr - 2844.0 / 156.0) < 1e-12
        assert abs(snr - 18.2) < 0.04

    zero_row = expect.copy()
    zero_row[2, :] = 0.0
    with pytest.raises(ValueError, match="Psi\\+"):
        cap.snr_per_message(zero_row)
    with pytest.raises(ValueError, match="4x16"):
        cap.snr_per_message(np.zeros((4, 4)))
    bad = expect.copy()
    bad[0, 0] = -1.0
    with pytest.raises(ValueError, match="non-negative"):
        cap.snr_per_message(bad)


def test_bound_lower_4_structure():
    assert np.allclose(cap.bound_lower_4(1.0).probabilities, np.eye(4), atol=1e-15)
    quarter = cap.bound_lower_4(0.25)
    assert np.allclose(quarter.probabilities, 0.25, atol=1e-15)
    assert abs(cap.channel_capacity(quarter).capacity_bits) < 1e-9
    t = cap.bound_lower_4(0.948).probabilities
    assert np.allclose(np.diag(t), 0.948, atol=1e-15)
    off = t[~np.eye(4, dtype=bool)]
    assert np.allclose(off, 0.052 / 3.0, atol=1e-15)
    with pytest.raises(ValueError):
        cap.bound_lower_4(0.2)
    with pytest.raises(ValueError):
        cap.bound_lower_4(1.1)


def test_bound_upper_4_structure():
    assert np.allclose(cap.bound_upper_4(1.0).probabilities, np.eye(4), atol=1e-15)
    t = cap.bound_upper_4(0.948).probabilities
    assert np.allclose(np.diag(t), [0.896, 0.896, 1.0, 1.0], atol=1e-12)
    assert abs(t[0, 1] - 0.104) < 1e-12 and abs(t[1, 0] - 0.104) < 1e-12
    assert np.max(np.abs(t[2:, :2])) == 0.0 and np.max(np.abs(t[:2, 2:])) == 0.0
    with pytest.raises(ValueError):
        cap.bound_upper_4(0.49)


def test_bound_3_structure():
    t = cap.bound_lower_3(1.0)
    assert t.labels == ("S1", "S2", "S3")
    assert np.allclose(t.probabilities, np.eye(3), atol=1e-15)
    assert abs(cap.channel_capacity(t).capacity_bits - math.log2(3.0)) < 1e-9
    third = cap.bound_lower_3(1.0 / 3.0)
    assert abs(cap.channel_capacity(third).capacity_bits) < 1e-9

    upper = cap.bound_upper_3(0.9)
    got = cap.channel_capacity(upper).capacity_bits
    assert abs(got - split_channel_capacity_3(0.9)) < 1e-9
    with pytest.raises(ValueError):
        cap.bound_lower_3(0.2)
    with pytest.raises(ValueError):
        cap.bound_upper_3(0.2)


def test_upper_bound_dominates_lower():
    for p_s in np.linspace(0.75, 1.0, 11):
        lo = cap.channel_capacity(cap.bound_lower_4(p_s)).capacity_bits
        hi = cap.channel_capacity(cap.bound_upper_4(p_s)).capacity_bits
        assert hi >= lo - 1e-9


def test_reported_point_containment():
    lo = cap.channel_capacity(cap.bound_lower_4(0.948)).capacity_bits
    hi = cap.channel_capacity(cap.bound_upper_4(0.948)).capacity_bits
    assert lo <= 1.630 <= hi
    assert abs(lo - 1.6227) < 1e-4


def test_bound_curve():
    curve = cap.bound_curve(4, "lower", resolution=11)
    assert curve.shape == (11, 2)
    assert abs(curve[0, 0] - 0.25) < 1e-15
    assert abs(curve[-1, 0] - 1.0) < 1e-15
    assert abs(curve[-1, 1] - 2.0) < 1e-9
    assert np.all(np.diff(curve[:, 1]) >= -1e-9)

    upper = cap.bound_curve(4, "upper", resolution=11)
    assert abs(upper[0, 0] - 0.75) < 1e-15
    assert abs(upper[0, 1] - math.log2(3.0)) < 1e-9
    assert np.all(np.diff(upper[:, 1]) >= -1e-9)

    three = cap.bound_curve(3, "lower", resolution=5)
    assert abs(three[-1, 1] - math.log2(3.0)) < 1e-9

    with pytest.raises(ValueError):
        cap.bound_curve(5, "lower")
    with pytest.raises(ValueError):
        cap.bound_curve(4, "middle")
    with pytest.raises(ValueError):
        cap.bound_curve(4, "lower", resolution=1)
