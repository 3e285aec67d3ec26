import math

import numpy as np
import pytest
import scipy.linalg

import cqcovert as cq
from cqcovert.errors import WrongRegimeError

from helpers import diag_state, random_square_root_channel, two_symbol_example_channel

D1 = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)


def nonzero_point_mass():
    return cq.InputDistribution([0.0, 1.0])


def test_alpha_n_hand_value():
    ch = two_symbol_example_channel()
    p = nonzero_point_mass()
    value = cq.alpha_n(ch, p, delta=0.01, n=100, beta=0.5)
    assert value == pytest.approx(0.5 * math.sqrt(1e-4) / math.sqrt(0.125), abs=1e-15)
    assert value == pytest.approx(0.014142135623730949, abs=1e-12)


def test_alpha_n_limits_and_scaling():
    ch = two_symbol_example_channel()
    p = nonzero_point_mass()
    assert cq.alpha_n(ch, p, 0.01, 100, beta=0.999999) < 1e-5
    a1 = cq.alpha_n(ch, p, 0.01, 50, beta=0.3)
    a4 = cq.alpha_n(ch, p, 0.01, 200, beta=0.3)
    assert a4 == pytest.approx(a1 / 2.0, abs=1e-15)
    # tiny n can push the formula above 1; it clamps
    assert cq.alpha_n(ch, p, 10.0, 1, beta=0.01) == 1.0


def test_alpha_n_rejects_mixture_direction():
    ch = two_symbol_example_channel()
    same = cq.CQWiretapChannel(ch.sigma, [ch.rho[0], ch.rho[0]])
    with pytest.raises(WrongRegimeError):
        cq.alpha_n(same, nonzero_point_mass(), 0.01, 10, beta=0.5)


def test_build_input_distribution():
    p = nonzero_point_mass()
    pn = cq.build_input_distribution(0.25, p)
    assert pn.probs.tolist() == [0.75, 0.25]
    assert pn.probs.sum() == 1.0
    assert cq.build_input_distribution(1.0, p).probs.tolist() == p.probs.tolist()
    with pytest.raises(ValueError):
        cq.build_input_distribution(0.0, p)
    with pytest.raises(ValueError):
        cq.build_input_distribution(0.5, cq.InputDistribution([0.5, 0.5]))


def test_sample_codebook_point_mass_and_determinism():
    idle = cq.InputDistribution([1.0, 0.0])
    cb = cq.sample_codebook(idle, 5, 4, seed=3)
    assert not cb.codewords.any()
    pn = cq.InputDistribution([0.7, 0.3])
    first = cq.sample_codebook(pn, 16, 8, seed=11)
    second = cq.sample_codebook(pn, 16, 8, seed=11)
    assert np.array_equal(first.codewords, second.codewords)
    other = cq.sample_codebook(pn, 16, 8, seed=12)
    assert not np.array_equal(first.codewords, other.codewords)


def test_sample_codebook_frequencies():
    pn = cq.InputDistribution([0.6, 0.3, 0.1])
    cb = cq.sample_codebook(pn, 1000, 100, seed=0)
    counts = np.bincount(cb.codewords.ravel(), minlength=3)
    total = cb.codewords.size
    for x in range(3):
        sigma3 = 3.0 * math.sqrt(total * pn.probs[x] * (1 - pn.probs[x]))
        assert abs(counts[x] - total * pn.probs[x]) <= sigma3


def test_covertness_divergence_idle_codebook():
    ch = two_symbol_example_channel()
    cb = cq.sample_codebook(cq.InputDistribution([1.0, 0.0]), 4, 3, seed=0)
    assert cq.covertness_divergence(ch, cb) == pytest.approx(0.0, abs=1e-9)


def test_covertness_divergence_single_codeword_additivity():
    ch = two_symbol_example_channel()
    cb = cq.Codebook(n=4, num_messages=1, codewords=np.array([[1, 0, 1, 1]]),
                     sampling_distribution=cq.InputDistribution([0.5, 0.5]))
    expected = 3 * cq.relative_entropy(ch.rho[1], ch.rho[0])
    assert cq.covertness_divergence(ch, cb) == pytest.approx(expected, abs=1e-9)


def test_covertness_divergence_against_logm_path():
    # independent spectral route: scipy logm on the explicit 4x4 matrices
    ch = two_symbol_example_channel()
    cb = cq.Codebook(n=2, num_messages=2, codewords=np.array([[1, 0], [0, 1]]),
                     sampling_distribution=cq.InputDistribution([0.5, 0.5]))
    value = cq.covertness_divergence(ch, cb)
    mixture = 0.5 * (np.kron(ch.rho[1].mat, ch.rho[0].mat)
                     + np.kron(ch.rho[0].mat, ch.rho[1].mat))
    idle = np.kron(ch.rho[0].mat, ch.rho[0].mat)
    direct = np.trace(mixture @ (scipy.linalg.logm(mixture) - scipy.linalg.logm(idle))).real
    assert value == pytest.approx(direct, abs=1e-9)


def test_pgm_orthogonal_and_identical_codewords():
    zero = cq.DensityOperator(np.diag([1.0, 0.0]))
    one = cq.DensityOperator(np.diag([0.0, 1.0]))
    ch = cq.CQWiretapChannel([zero, one], [diag_state(0.5, 0.5), diag_state(0.75, 0.25)])
    orth = cq.Codebook(n=1, num_messages=2, codewords=np.array([[0], [1]]),
                       sampling_distribution=cq.InputDistribution([0.5, 0.5]))
    assert cq.pgm_error_probability(ch, orth) == pytest.approx(0.0, abs=1e-12)
    same = cq.Codebook(n=1, num_messages=2, codewords=np.array([[1], [1]]),
                       sampling_distribution=cq.InputDistribution([0.5, 0.5]))
    assert cq.pgm_error_probability(ch, same) == pytest.approx(0.5, abs=1e-12)


def test_pgm_povm_completeness():
    ch = two_symbol_example_channel()
    cb = cq.sample_codebook(cq.InputDistribution([0.6, 0.4]), 3, 4, seed=5)
    outputs = [cq.product_output_state(ch, cw, "receiver").mat for cw in cb.codewords]
    avg = sum(outputs) / len(outputs)
    w, v = np.linalg.eigh(avg)
    on = w > 1e-12
    inv_sqrt = (v[:, on] / np.sqrt(w[on])) @ v[:, on].conj().T
    total = sum(inv_sqrt @ (o / len(outputs)) @ inv_sqrt for o in outputs)
    support = v[:, on] @ v[:, on].conj().T
    remainder = np.eye(avg.shape[0]) - support
    assert np.abs(total + remainder - np.eye(avg.shape[0])).max() < 1e-9


def test_pgm_unitary_invariance():
    from helpers import conjugated_channel, random_unitary
    rng = np.random.default_rng(6)
    ch = random_square_root_channel(rng, 2, 2, 2)
    cb = cq.sample_codebook(cq.InputDistribution([0.5, 0.5]), 3, 4, seed=9)
    base = cq.pgm_error_probability(ch, cb)
    for _ in range(3):
        u = random_unitary(rng, 2)
        rotated = cq.pgm_error_probability(conjugated_channel(ch, u_receiver=u), cb)
        assert rotated == pytest.approx(base, abs=1e-8)


def test_type_set_membership():
    pn = cq.InputDistribution([0.75, 0.25])
    assert cq.type_set_membership([1, 0, 0, 0], gamma=0.5, pn=pn)
    assert not cq.type_set_membership([0, 0, 0, 0], gamma=0.5, pn=pn)
    exact = [0, 0, 0, 1]
    assert cq.type_set_membership(exact, gamma=0.01, pn=pn)


def test_type_set_probability_meets_chernoff_bound():
    pn = cq.InputDistribution([0.8, 0.15, 0.05])
    n, trials, gamma = 60, 10_000, 0.5
    rng = np.random.Generator(np.random.Philox(key=123))
    u = rng.random((trials, n))
    cdf = np.cumsum(pn.probs)
    draws = np.searchsorted(cdf, u, side="right")
    hits = sum(
        cq.type_set_membership(row, gamma, pn) for row in draws
    )
    bound = 1.0 - sum(
        math.exp(-gamma ** 2 * n * pn.probs[x] / 2.0) for x in (1, 2)
    )
    assert hits / trials >= bound


def test_psi_n_zero_at_s_zero_and_idle():
    ch = two_symbol_example_channel()
    pn = cq.InputDistribution([0.9, 0.1])
    assert cq.psi_n(ch, pn, [1, 0, 1], 0.0) == 0.0
    idle = cq.InputDistribution([1.0, 0.0])
    for s in (0.0, 0.1, 0.5):
        assert cq.psi_n(ch, idle, [0, 0, 0, 0], s) == pytest.approx(0.0, abs=1e-12)


def test_psi_n_slope_matches_divergence():
    rng = np.random.default_rng(7)
    for _ in range(5):
        ch = random_square_root_channel(rng, 2, 2, 2)
        pn = cq.InputDistribution([0.8, 0.2])
        codeword = rng.integers(0, 2, size=8)
        if not codeword.any():
            codeword[0] = 1
        s = 1e-5
        slope = cq.psi_n(ch, pn, codeword, s) / s
        mix = cq.average_output_state(ch, pn, "eavesdropper")
        counts = np.bincount(codeword, minlength=2) / len(codeword)
        expected = len(codeword) * sum(
            counts[x] * cq.relative_entropy(ch.rho[x], mix) for x in range(2)
        )
        assert slope == pytest.approx(expected, rel=0.01)


def test_pinched_statistic_limits_and_range():
    ch = two_symbol_example_channel()
    pn = cq.InputDistribution([0.9, 0.1])
    xn = [1, 0]
    assert cq.pinched_test_statistic(ch, pn, xn, a=1e6, delta=0.05) == 0.0
    assert cq.pinched_test_statistic(ch, pn, xn, a=-1e6, delta=0.05) == pytest.approx(1.0, abs=1e-9)


def test_pinched_statistic_monotone_in_threshold():
    rng = np.random.default_rng(8)
    ch = random_square_root_channel(rng, 2, 2, 2)
    pn = cq.InputDistribution([0.85, 0.15])
    xn = [1, 0]
    grid = np.linspace(-30.0, 30.0, 50)
    values = [cq.pinched_test_statistic(ch, pn, xn, a, delta=0.05) for a in grid]
    for lo, hi in zip(values[1:], values[:-1]):
        assert lo <= hi + 1e-9
    assert all(-1e-9 <= v <= 1 + 1e-9 for v in values)


def test_a_hat_hand_value_and_slack_monotonicity():
    ch = two_symbol_example_channel()
    p = nonzero_point_mass()
    # with all slacks at zero this is the eavesdropper-divergence ratio
    assert cq.a_hat(ch, p, 0.0, 0.0, 0.0) == pytest.approx(D1 / math.sqrt(0.125), abs=1e-12)
    base = cq.a_hat(ch, p, 0.3, 0.3, 0.3)
    for bumped in (cq.a_hat(ch, p, 0.4, 0.3, 0.3),
                   cq.a_hat(ch, p, 0.3, 0.4, 0.3),
                   cq.a_hat(ch, p, 0.3, 0.3, 0.4)):
        assert bumped < base


def test_sweep_single_message_and_determinism():
    ch = two_symbol_example_channel()
    reports = cq.sqrt_law_sweep(ch, 0.05, [2, 3], [1, 2], 0.5, [0, 1])
    assert [r.n for r in reports] == sorted(r.n for r in reports)
    for r in reports:
        if r.num_messages == 1:
            assert r.k_n == 0.0 and r.epsilon_n == 0.0
        assert r.covert_div >= 0.0
        assert 0.0 <= r.epsilon_n <= 1.0
        assert r.chain.receiver_ok and r.chain.eavesdropper_ok
        assert r.normalized_throughput <= r.converse_bound + 1e-9
    again = cq.sqrt_law_sweep(ch, 0.05, [2, 3], [1, 2], 0.5, [0, 1])
    assert again == reports


def test_sweep_skips_cells_over_the_cap():
    ch = two_symbol_example_channel()
    reports = cq.sqrt_law_sweep(ch, 0.05, [2, 13], [2], 0.5, [0])
    small = [r for r in reports if r.n == 2][0]
    big = [r for r in reports if r.n == 13][0]
    assert small.skipped is None
    assert big.skipped is not None
    assert math.isnan(big.covert_div)


def test_sweep_parallel_matches_serial():
    ch = two_symbol_example_channel()
    serial = cq.sqrt_law_sweep(ch, 0.05, [2], [2], 0.5, [0, 1], workers=1)
    parallel = cq.sqrt_law_sweep(ch, 0.05, [2], [2], 0.5, [0, 1], workers=2)
    assert serial == parallel


def test_sweep_rejects_wrong_regime():
    from helpers import mixture_example_channel
    with pytest.raises(WrongRegimeError):
        cq.sqrt_law_sweep(mixture_example_channel(), 0.05, [2], [2], 0.5, [0])


def test_sim_params_validation():
    with pytest.raises(ValueError):
        cq.SimParams(delta=-1.0, n=2, num_messages=2)
    with pytest.raises(ValueError):
        cq.SimParams(delta=0.1, n=2, num_messages=2, beta=1.0)
    with pytest.raises(ValueError):
        cq.SimParams(delta=0.1, n=0, num_messages=2)
