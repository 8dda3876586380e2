import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specord.channel import (CorrelationSpec, correlation_matrices, frequency_response,
                             generate_channel, matrix_to_vec, per_tone_from_taps,
                             spatial_correlation, tapped_channel, trial_rng, vec_to_matrix)
from specord.errors import (InvalidCorrelationError, InvalidProfileError,
                            UndefinedCorrelationError)


def sample_cov(h):
    v = matrix_to_vec(h)
    return v.T @ v.conj() / v.shape[0]


def test_levels_match_table():
    assert (CorrelationSpec.from_level("low").alpha, CorrelationSpec.from_level("low").beta) == (0, 0)
    assert (CorrelationSpec.from_level("medium").alpha, CorrelationSpec.from_level("medium").beta) == (0.3, 0.9)
    assert (CorrelationSpec.from_level("high").alpha, CorrelationSpec.from_level("high").beta) == (0.9, 0.9)
    with pytest.raises(InvalidCorrelationError):
        CorrelationSpec(1.2, 0.0)
    with pytest.raises(InvalidCorrelationError):
        CorrelationSpec(0.3, 0.3, "medium")


def test_low_is_identity():
    c = correlation_matrices(CorrelationSpec.from_level("low"), 2, 2)
    assert np.array_equal(c.r_h, np.eye(4))


@pytest.mark.parametrize("alpha,beta", [(0.3, 0.9), (0.9, 0.9)])
def test_displayed_matrix_entries(alpha, beta):
    c = correlation_matrices(CorrelationSpec(alpha, beta), 2, 2)
    expected = np.array([
        [1, beta, alpha, alpha * beta],
        [beta, 1, alpha * beta, alpha],
        [alpha, alpha * beta, 1, beta],
        [alpha * beta, alpha, beta, 1],
    ])
    assert np.array_equal(c.r_h, expected)


def test_medium_entries():
    r = correlation_matrices(CorrelationSpec.from_level("medium")).r_h
    assert (r[0, 1], r[0, 2], r[0, 3]) == (0.9, 0.3, 0.9 * 0.3)
    assert correlation_matrices(CorrelationSpec.from_level("high")).r_h[0, 3] == 0.9 * 0.9


@given(a=st.floats(-1, 1), b=st.floats(-1, 1), nt=st.integers(1, 4), nr=st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_kronecker_identity_and_reconstruction(a, b, nt, nr):
    c = correlation_matrices(CorrelationSpec(a, b), nt, nr)
    for i in range(nt):
        for j in range(nr):
            for p in range(nt):
                for q in range(nr):
                    assert c.r_h[i * nr + j, p * nr + q] == c.r_bs[i, p] * c.r_ms[j, q]
    assert np.all(np.diag(c.r_h) == 1)
    assert np.all(c.d >= 0)
    rec = (c.v * c.d) @ c.v.conj().T
    assert np.linalg.norm(rec - c.r_h) <= 1e-8 * max(1.0, np.linalg.norm(c.r_h))


@pytest.mark.parametrize("level", ["low", "medium", "high"])
def test_reconstruction_tight_for_table_levels(level):
    c = correlation_matrices(CorrelationSpec.from_level(level))
    rec = (c.v * c.d) @ c.v.conj().T
    assert np.linalg.norm(rec - c.r_h) / np.linalg.norm(c.r_h) < 1e-10


def test_exponential_extension():
    c = correlation_matrices(CorrelationSpec(0.5, 0.2), 3, 2)
    assert c.r_bs[0, 2] == 0.25 and c.r_bs[2, 0] == 0.25


def test_vec_ordering_receive_fastest():
    h = np.array([[1, 3], [2, 4]])
    assert list(matrix_to_vec(h)) == [1, 2, 3, 4]
    assert np.array_equal(vec_to_matrix(matrix_to_vec(h), 2, 2), h)


def test_identity_coloring_unit_variance():
    c = correlation_matrices(CorrelationSpec.from_level("low"))
    h = generate_channel(c, np.random.default_rng(0), size=100_000)
    var = np.mean(np.abs(h) ** 2, axis=0)
    assert np.all((var > 0.98) & (var < 1.02))


def test_rank_one_coloring_forces_equal_entries():
    c = correlation_matrices(CorrelationSpec(1.0, 1.0))
    assert np.allclose(c.r_h, np.ones((4, 4)))
    h = generate_channel(c, np.random.default_rng(3))
    assert np.allclose(h, h[0, 0], rtol=0, atol=1e-12 * abs(h[0, 0]) + 1e-15)


def test_medium_covariance_frobenius():
    c = correlation_matrices(CorrelationSpec.from_level("medium"))
    h = generate_channel(c, np.random.default_rng(0), size=100_000)
    assert np.linalg.norm(sample_cov(h) - c.r_h) < 0.02


def test_covariance_error_decays_like_inverse_sqrt():
    c = correlation_matrices(CorrelationSpec.from_level("medium"))
    rng = np.random.default_rng(5)
    errs = {}
    for n in (10_000, 100_000):
        # average over repetitions so the ratio reflects the rate, not one draw
        errs[n] = np.mean([np.linalg.norm(sample_cov(generate_channel(c, rng, size=n)) - c.r_h)
                           for _ in range(8)])
    ratio = errs[10_000] / errs[100_000]
    assert 2.0 <= ratio <= 4.5


def test_spatial_correlation_definitions():
    c = correlation_matrices(CorrelationSpec.from_level("medium"))
    h = generate_channel(c, np.random.default_rng(9), size=100_000)
    assert spatial_correlation(h, (0, 0), (0, 0)) == 1
    rho = spatial_correlation(h, (0, 0), (1, 0))
    assert abs(rho - 0.9) < 0.02
    iid = generate_channel(correlation_matrices(CorrelationSpec()), np.random.default_rng(2), size=100_000)
    for pq in [(1, 0), (0, 1), (1, 1)]:
        assert abs(spatial_correlation(iid, (0, 0), pq)) < 0.02


def test_spatial_correlation_zero_power():
    h = np.zeros((10, 2, 2), complex)
    h[:, 0, 0] = 1
    with pytest.raises(UndefinedCorrelationError):
        spatial_correlation(h, (0, 0), (1, 1))


def test_tapped_channel_profiles():
    c = correlation_matrices(CorrelationSpec.from_level("high"))
    one = tapped_channel(c, 1, [1.0], trial_rng(0, 0))
    ref = generate_channel(c, trial_rng(0, 0), size=1)
    assert np.array_equal(one.taps, ref)

    z = tapped_channel(c, 2, [1.0, 0.0], np.random.default_rng(1))
    assert np.all(z.taps[1] == 0)

    rng = np.random.default_rng(4)
    taps = np.stack([tapped_channel(c, 2, [0.5, 0.5], rng).taps for _ in range(100_000)])
    power = np.mean(np.sum(np.abs(taps) ** 2, axis=1), axis=0)
    assert np.all(np.abs(power - 1) < 0.02)

    with pytest.raises(InvalidProfileError):
        tapped_channel(c, 2, [0.5, 0.6], rng)
    with pytest.raises(InvalidProfileError):
        tapped_channel(c, 3, [0.5, 0.5], rng)


def test_frequency_response_trivial_cases():
    c = correlation_matrices(CorrelationSpec())
    single = tapped_channel(c, 1, [1.0], np.random.default_rng(0))
    for k in range(8):
        assert np.allclose(frequency_response(single, k, 8), single.taps[0], atol=0)
    taps = np.stack([np.eye(2), np.eye(2)]).astype(complex)
    assert np.allclose(frequency_response(taps, 1, 2), 0, atol=1e-15)


def direct_sum(taps, k, n):
    out = np.zeros(taps.shape[1:], complex)
    for l in range(taps.shape[0]):
        out += taps[l] * np.exp(-2j * np.pi * l * k / n)
    return out


@pytest.mark.parametrize("n_fft", [4, 16, 37, 64])
def test_frequency_response_matches_direct_sum(n_fft):
    c = correlation_matrices(CorrelationSpec.from_level("medium"))
    real = tapped_channel(c, 3, [0.5, 0.3, 0.2], np.random.default_rng(n_fft))
    tones = np.arange(n_fft)
    per_tone_from_taps(real, tones, n_fft)
    for k in tones:
        ref = direct_sum(real.taps, k, n_fft)
        assert np.max(np.abs(frequency_response(real, k, n_fft) - ref)) < 1e-12
        assert np.max(np.abs(real.per_tone[k] - ref)) < 1e-12


def test_trial_rng_is_keyed():
    a = trial_rng(7, 3).standard_normal(4)
    b = trial_rng(7, 3).standard_normal(4)
    c = trial_rng(7, 4).standard_normal(4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
