"""Desk-scale exact simulation of the random-coding construction.

Codebooks are drawn i.i.d. from a sparse input distribution that puts mass
1 - alpha on the off symbol and spreads alpha over the optimizing nonzero
distribution, with alpha shrinking like 1/sqrt(n) so the covertness budget
is met with margin.  Covertness and decoding error are then evaluated
exactly on the n-letter spaces: the covertness divergence from the full
codebook mixture, and the decoding error of the square-root (pretty-good)
measurement over the codeword output states.

Randomness comes from numpy's Philox counter-based generator keyed by the
cell seed, with symbols drawn by inverse CDF, so reports are reproducible
bit for bit across runs and platforms.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import SUPPORT_TOL, dim_cap
from .channel import (
    CQWiretapChannel,
    InputDistribution,
    average_output_state,
    product_output_state,
    _check_codeword,
)
from .divergences import chi_squared, holevo_information, relative_entropy
from .errors import DimensionCapError, WrongRegimeError
from .operators import (
    DensityOperator,
    HermitianOperator,
    matrix_fn,
    pinch,
    positive_part_projector,
    tensor_power,
)
from .regime import Regime, classify
from .scaling import ConverseChainReport, converse_chain, scaling_constant


@dataclass(frozen=True)
class SimParams:
    """Knobs of one simulation cell.

    ``delta`` is the covertness budget in nats; ``beta``, ``gamma`` and
    ``theta`` are the slack constants of the construction, each in (0, 1);
    ``s`` is the exponent-diagnostic parameter in (0, 1).
    """

    delta: float
    n: int
    num_messages: int
    seed: int = 0
    beta: float = 0.5
    gamma: float = 0.5
    theta: float = 0.5
    s: float = 0.1

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError("covertness budget must be positive")
        for name in ("beta", "gamma", "theta", "s"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if self.num_messages < 1:
            raise ValueError("need at least one message")
        if self.n < 1:
            raise ValueError("blocklength must be at least 1")


@dataclass(frozen=True)
class Codebook:
    """M codewords of length n plus the distribution they were drawn from."""

    n: int
    num_messages: int
    codewords: np.ndarray
    sampling_distribution: InputDistribution


@dataclass(frozen=True)
class SimulationReport:
    """Per-(n, M, seed) record of one simulated cell.

    ``covert_div`` is the exact divergence of the realized codebook mixture
    from the idle state; ``covert_div_avg`` the same for the ensemble-average
    product state (n times the single-letter divergence).  ``converse_bound``
    is the throughput ceiling assembled from the converse chain and the
    realized error.  Cells that exceed the dimension cap carry ``skipped``
    with NaN values.
    """

    n: int
    num_messages: int
    seed: int
    k_n: float
    epsilon_n: float
    covert_div: float
    covert_div_avg: float
    normalized_throughput: float
    a_hat: float
    converse_bound: float
    meets_targets: bool
    chain: Optional[ConverseChainReport] = None
    skipped: Optional[str] = None


def alpha_n(ch: CQWiretapChannel, nonzero_dist: InputDistribution,
            delta: float, n: int, beta: float) -> float:
    """Per-use probability of a non-idle symbol at blocklength n.

    Sized as (1 - beta) sqrt(delta / n) over the root of half the
    chi-squared divergence of the nonzero-symbol mixture from rho(0), so
    the quadratic covertness expansion meets the budget with margin beta.
    Clamped into (0, 1].
    """
    mix = average_output_state(ch, nonzero_dist, "eavesdropper")
    chi2 = chi_squared(mix, ch.rho[0])
    if chi2 <= 1e-15:
        raise WrongRegimeError(
            "nonzero-symbol mixture equals rho(0); the channel admits a mixture"
        )
    value = (1.0 - beta) * math.sqrt(delta / n) / math.sqrt(0.5 * chi2)
    return min(value, 1.0)


def build_input_distribution(alpha: float, nonzero_dist: InputDistribution) -> InputDistribution:
    """Codebook sampling distribution: mass 1 - alpha on the off symbol,
    alpha spread over the nonzero symbols."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if nonzero_dist.probs[0] != 0.0:
        raise ValueError("the nonzero distribution must put zero mass on symbol 0")
    probs = alpha * nonzero_dist.probs.copy()
    probs[0] = 1.0 - alpha
    return InputDistribution(probs)


def sample_codebook(pn: InputDistribution, n: int, num_messages: int, seed: int) -> Codebook:
    """Draw M codewords of length n i.i.d. from ``pn``, reproducibly.

    Symbols are drawn by inverse CDF from Philox counter-based streams
    keyed by (seed, message), so the uniform behind symbol i of message m
    depends only on (seed, m, i): identical seeds give identical codebooks
    on every platform, and growing n or M extends a codebook instead of
    resampling it (common random numbers across sweep cells).
    """
    u = np.stack([
        np.random.Generator(np.random.Philox(key=[seed, m])).random(n)
        for m in range(num_messages)
    ])
    cdf = np.cumsum(pn.probs)
    symbols = np.searchsorted(cdf, u, side="right")
    symbols = np.minimum(symbols, len(pn.probs) - 1).astype(int)
    symbols.setflags(write=False)
    return Codebook(n=n, num_messages=num_messages, codewords=symbols,
                    sampling_distribution=pn)


def covertness_divergence(ch: CQWiretapChannel, cb: Codebook) -> float:
    """Exact divergence of the realized codebook's eavesdropper mixture from
    the idle product state."""
    dim = ch.eavesdropper_dim ** cb.n
    if dim > dim_cap():
        raise DimensionCapError(f"eavesdropper space of dimension {dim} exceeds the cap")
    mixture = np.zeros((dim, dim), dtype=np.complex128)
    for cw in cb.codewords:
        mixture += product_output_state(ch, cw, "eavesdropper").mat
    mixture /= cb.num_messages
    idle = tensor_power(ch.rho[0], cb.n)
    return relative_entropy(DensityOperator(mixture, validate=False), idle)


def pgm_error_probability(ch: CQWiretapChannel, cb: Codebook) -> float:
    """Average decoding error of the square-root measurement.

    The POVM elements are S^{-1/2} (sigma_m / M) S^{-1/2} on the support of
    the average output state S; the remainder element on ker(S) counts as a
    declared decoding failure.  Duplicate codewords are legal and share
    their success probability through the measurement itself.
    """
    dim = ch.receiver_dim ** cb.n
    if dim > dim_cap():
        raise DimensionCapError(f"receiver space of dimension {dim} exceeds the cap")
    outputs = [product_output_state(ch, cw, "receiver").mat for cw in cb.codewords]
    m = cb.num_messages
    avg = sum(outputs) / m
    w, v = np.linalg.eigh(avg)
    on = w > SUPPORT_TOL
    inv_sqrt = (v[:, on] / np.sqrt(w[on])) @ v[:, on].conj().T
    success = 0.0
    for out in outputs:
        rotated = inv_sqrt @ out @ inv_sqrt
        success += float(np.einsum("ij,ji->", rotated, out).real) / m
    error = 1.0 - success / m
    return min(max(error, 0.0), 1.0)


def type_set_membership(codeword, gamma: float, pn: InputDistribution) -> bool:
    """Whether the empirical type keeps at least (1 - gamma) of the sampling
    mass on every nonzero symbol."""
    symbols = _check_codeword(codeword, len(pn.probs))
    counts = np.bincount(symbols, minlength=len(pn.probs))
    empirical = counts / len(symbols)
    return bool(np.all(empirical[1:] >= (1.0 - gamma) * pn.probs[1:]))


def psi_n(ch: CQWiretapChannel, pn: InputDistribution, codeword, s: float) -> float:
    """Exponent diagnostic of the pinched hypothesis test, single-letterized.

    Computes -n Sum_x Q(x) log tr[rho(x) m^{s/2} rho(x)^{-s} m^{s/2}] where
    Q is the empirical type of the codeword and m the pn-average
    eavesdropper state (which must be full rank).  Negative powers of
    rho(x) are taken on its support, which restricts the trace accordingly.
    Never builds the n-letter tensor: both states involved are products.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError(f"s must lie in [0, 1), got {s}")
    symbols = _check_codeword(codeword, ch.k)
    mix = average_output_state(ch, pn, "eavesdropper")
    if float(np.linalg.eigvalsh(mix.mat)[0]) <= SUPPORT_TOL:
        raise ValueError("the sampling-average eavesdropper state must be full rank")
    half_power = matrix_fn(mix, lambda w: w ** (s / 2.0)).mat
    n = len(symbols)
    counts = np.bincount(symbols, minlength=ch.k)
    total = 0.0
    for x in np.nonzero(counts)[0]:
        neg_power = matrix_fn(ch.rho[x], lambda w: w ** (-s), on_support_only=True).mat
        value = float(np.einsum(
            "ij,jk,kl,li->", ch.rho[x].mat, half_power, neg_power, half_power
        ).real)
        if value <= 0.0:
            raise ArithmeticError(f"non-positive trace argument {value!r} for symbol {x}")
        total += (counts[x] / n) * math.log(value)
    return -n * total + 0.0


def pinched_test_statistic(ch: CQWiretapChannel, pn: InputDistribution,
                           codeword, a: float, delta: float) -> float:
    """Success probability of the pinched threshold test at level a.

    Builds the codeword's eavesdropper product state, pinches it in the
    eigenbasis of the i.i.d. average state, and returns the overlap of the
    codeword state with the projector onto the positive part of
    (pinched - e^{sqrt(n delta) a} average).  Lies in [0, 1] and is
    non-increasing in a.
    """
    symbols = _check_codeword(codeword, ch.k)
    n = len(symbols)
    state = product_output_state(ch, symbols, "eavesdropper")
    mix = average_output_state(ch, pn, "eavesdropper")
    avg_product = tensor_power(mix, n)

    exponent = math.sqrt(n * delta) * a
    if exponent > 700.0:
        return 0.0
    threshold = math.exp(exponent)
    pinched = pinch(state, avg_product)
    shifted = HermitianOperator(pinched.mat - threshold * avg_product.mat)
    projector = positive_part_projector(shifted)
    value = float(np.einsum("ij,ji->", state.mat, projector.mat).real)
    if not -1e-9 <= value <= 1.0 + 1e-9:
        raise ArithmeticError(f"test statistic {value!r} escaped [0, 1]")
    return value


def a_hat(ch: CQWiretapChannel, nonzero_dist: InputDistribution,
          theta: float, gamma: float, beta: float) -> float:
    """Achievable-threshold estimate from eavesdropper-side divergences.

    (1-theta)(1-gamma)(1-beta) times Sum_{x != 0} P(x) D(rho(x) || rho(0))
    over the root of half the chi-squared of the nonzero mixture; decreasing
    in each slack.
    """
    mix = average_output_state(ch, nonzero_dist, "eavesdropper")
    chi2 = chi_squared(mix, ch.rho[0])
    if chi2 <= 1e-15:
        raise WrongRegimeError("nonzero-symbol mixture equals rho(0)")
    numerator = float(sum(
        nonzero_dist.probs[x] * relative_entropy(ch.rho[x], ch.rho[0])
        for x in range(1, ch.k) if nonzero_dist.probs[x] > 0.0
    ))
    return (1.0 - theta) * (1.0 - gamma) * (1.0 - beta) * numerator / math.sqrt(0.5 * chi2)


def _run_cell(ch, nonzero_dist, params: SimParams, eps_target: float,
              a_hat_value: float) -> SimulationReport:
    n, m, seed = params.n, params.num_messages, params.seed
    nan = float("nan")
    try:
        alpha = alpha_n(ch, nonzero_dist, params.delta, n, params.beta)
        pn = build_input_distribution(alpha, nonzero_dist)
        cb = sample_codebook(pn, n, m, seed)

        covert = covertness_divergence(ch, cb)
        mix = average_output_state(ch, pn, "eavesdropper")
        covert_avg = n * relative_entropy(mix, ch.rho[0])
        epsilon = pgm_error_probability(ch, cb) if m > 1 else 0.0
        k_n = math.log(m)
        normalized = k_n / math.sqrt(n * params.delta)

        weights = np.full(m, 1.0 / m)
        chain = converse_chain(ch, cb.codewords, weights)
        marginals = np.mean([
            np.bincount(cb.codewords[:, i], minlength=ch.k) / m for i in range(n)
        ], axis=0)
        chi_bar = holevo_information(ch.sigma, marginals)
        if epsilon >= 1.0 - 1e-12:
            bound = float("inf")
        else:
            bound = (n * chi_bar + 1.0) / ((1.0 - epsilon) * math.sqrt(n * params.delta))

        return SimulationReport(
            n=n, num_messages=m, seed=seed,
            k_n=k_n,
            epsilon_n=epsilon,
            covert_div=covert,
            covert_div_avg=covert_avg,
            normalized_throughput=normalized,
            a_hat=a_hat_value,
            converse_bound=bound,
            meets_targets=bool(epsilon <= eps_target and covert <= params.delta),
            chain=chain,
        )
    except DimensionCapError as exc:
        return SimulationReport(
            n=n, num_messages=m, seed=seed,
            k_n=nan, epsilon_n=nan, covert_div=nan, covert_div_avg=nan,
            normalized_throughput=nan, a_hat=a_hat_value, converse_bound=nan,
            meets_targets=False, chain=None, skipped=str(exc),
        )


def sqrt_law_sweep(ch: CQWiretapChannel, delta: float, n_list, m_list,
                   eps_target: float, seeds, beta: float = 0.5,
                   gamma: float = 0.5, theta: float = 0.5, s: float = 0.1,
                   workers: int = 1) -> list:
    """Simulate every (n, M, seed) cell and report the full table.

    The nonzero-symbol distribution is the scaling-constant optimizer of
    the (square-root regime) channel.  Cells are independent; with
    ``workers`` > 1 they run in a process pool.  Reports come back sorted
    by (n, M, seed) regardless of completion order.
    """
    report = classify(ch)
    if report.regime != Regime.SQUARE_ROOT:
        raise WrongRegimeError(
            f"the sweep requires a square-root-regime channel, got {report.regime.value}"
        )
    nonzero = scaling_constant(ch, check_regime=False).optimizer
    a_hat_value = a_hat(ch, nonzero, theta, gamma, beta)

    cells = [
        SimParams(delta=delta, n=int(n), num_messages=int(m), seed=int(seed),
                  beta=beta, gamma=gamma, theta=theta, s=s)
        for n in n_list for m in m_list for seed in seeds
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(
                _run_cell,
                [ch] * len(cells), [nonzero] * len(cells), cells,
                [eps_target] * len(cells), [a_hat_value] * len(cells),
            ))
    else:
        reports = [_run_cell(ch, nonzero, p, eps_target, a_hat_value) for p in cells]
    reports.sort(key=lambda r: (r.n, r.num_messages, r.seed))
    return reports
