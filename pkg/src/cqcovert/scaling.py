"""Covert throughput quantities: positive-rate capacity, the square-root
scaling constant, perturbative expansion checks, and the converse chain.

The scaling constant maximizes a ratio of a linear numerator (receiver-side
divergences) over the square root of a quadratic form (eavesdropper-side
chi-squared).  On the simplex the quadratic form equals v^T (Q - 11^T) v
with Q the symmetrized chi-squared Gram matrix, and the ratio is invariant
under positive rescaling of v, so the maximization reduces to the convex
program

    minimize 1/2 v^T (Q - 11^T) v   subject to   d^T v = 1, v >= 0,

whose minimum m* gives the constant as 1/sqrt(m*).  The program is solved
exactly by active-set support enumeration and cross-checked against a
brute-force simplex grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog, minimize, minimize_scalar

from .config import (
    FRANK_WOLFE_GAP_TOL,
    FRANK_WOLFE_MAX_ITERS,
    KKT_TOL,
    MAX_GRID_POINTS,
    dim_cap,
)
from .channel import (
    CQWiretapChannel,
    InputDistribution,
    average_output_state,
    product_output_state,
)
from .divergences import (
    _clip_nonnegative,
    chi_squared,
    holevo_information,
    relative_entropy,
    von_neumann_entropy,
)
from .errors import DimensionCapError, WrongRegimeError
from .operators import DensityOperator, hermitian_to_realvec, tensor_power
from .regime import Regime, _require_sanitized, classify, informative_symbols


def divergence_vector(ch: CQWiretapChannel) -> np.ndarray:
    """Receiver-side divergences d(x) = D(sigma(x) || sigma(0)) for x != 0."""
    d = np.array([relative_entropy(ch.sigma[x], ch.sigma[0]) for x in range(1, ch.k)])
    if not np.all(np.isfinite(d)):
        raise WrongRegimeError(
            "some receiver state has support outside supp(sigma(0)); "
            "the channel is not in the square-root regime"
        )
    return d


def chi_sq_gram(ch: CQWiretapChannel) -> np.ndarray:
    """Symmetrized chi-squared Gram matrix over nonzero symbols.

    Q[x][y] = 1/2 tr[(rho(x) rho(y) + rho(y) rho(x)) rho(0)^{-1}].  The
    anticommutator makes each entry real while leaving the quadratic form
    unchanged, so p^T Q p - 1 equals the chi-squared divergence of the
    p-mixture from rho(0) for any probability vector p.
    """
    _require_sanitized(ch)
    w, v = np.linalg.eigh(ch.rho[0].mat)
    inv = (v / w) @ v.conj().T
    mats = [ch.rho[x].mat @ inv for x in range(1, ch.k)]
    r = ch.k - 1
    gram = np.empty((r, r))
    for i in range(r):
        for j in range(i, r):
            val = np.einsum("ij,ji->", ch.rho[i + 1].mat, mats[j]).real
            gram[i, j] = gram[j, i] = float(val)
    return gram


def _kkt_candidate(a_mat, d, support, scale):
    """Solve the equality KKT system on one support and verify optimality.

    Returns ``(v, objective, kkt_residual)`` when the candidate satisfies
    primal feasibility, stationarity on the support, and dual feasibility
    off it; otherwise None.
    """
    s = list(support)
    if not np.any(d[s] > 0.0):
        return None
    size = len(s)
    kkt = np.zeros((size + 1, size + 1))
    kkt[:size, :size] = a_mat[np.ix_(s, s)]
    kkt[:size, size] = -d[s]
    kkt[size, :size] = d[s]
    rhs = np.zeros(size + 1)
    rhs[size] = 1.0
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    v_s, mu = sol[:size], sol[size]
    if np.min(v_s) < -1e-12:
        return None
    v = np.zeros(len(d))
    v[s] = np.clip(v_s, 0.0, None)

    grad = a_mat @ v - mu * d
    tol = KKT_TOL * max(1.0, scale)
    primal = abs(float(d @ v) - 1.0)
    stationarity = float(np.abs(grad[s]).max()) if s else 0.0
    off = [i for i in range(len(d)) if i not in support]
    dual = float(max(0.0, -grad[off].min())) if off else 0.0
    residual = max(primal, stationarity, dual)
    if residual > tol:
        return None
    objective = 0.5 * float(v @ a_mat @ v)
    return v, objective, residual


def _solve_ray_qp(a_mat, d):
    """min 1/2 v^T A v  s.t.  d^T v = 1, v >= 0, for PSD A.

    Supports are enumerated exactly for small dimensions (any KKT point of
    a convex program is a global minimum, so the first verified candidate
    wins); larger instances are solved iteratively and polished on the
    detected support.
    """
    r = len(d)
    scale = max(float(np.abs(a_mat).max()), float(np.abs(d).max()), 1.0)
    if r <= 16:
        for size in range(1, r + 1):
            for support in combinations(range(r), size):
                found = _kkt_candidate(a_mat, d, support, scale)
                if found is not None:
                    return found
        raise ArithmeticError("no KKT-verified support exists; inputs are degenerate")

    # Iterative fallback for wide alphabets, polished through the same
    # KKT verification used above.
    x0 = np.zeros(r)
    imax = int(np.argmax(d))
    x0[imax] = 1.0 / d[imax]
    res = minimize(
        lambda v: 0.5 * v @ a_mat @ v,
        x0,
        jac=lambda v: a_mat @ v,
        constraints=[{"type": "eq", "fun": lambda v: d @ v - 1.0, "jac": lambda v: d}],
        bounds=[(0.0, None)] * r,
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-14},
    )
    if not res.success:
        raise ArithmeticError(f"quadratic program failed: {res.message}")
    support = tuple(np.nonzero(res.x > 1e-10)[0])
    found = _kkt_candidate(a_mat, d, support, scale)
    if found is None:
        raise ArithmeticError("iterative solution failed KKT verification")
    return found


@dataclass(frozen=True)
class ScalingConstantResult:
    """Square-root-law scaling constant with its backing data.

    ``optimizer`` is the maximizing distribution over the full alphabet
    (mass 0 on the off symbol); ``d`` and ``gram`` are the divergence vector
    and chi-squared Gram over nonzero symbols; ``qp_objective`` is the
    minimum of the convex reformulation; ``support`` lists the symbols the
    optimizer actually uses.
    """

    L: float
    optimizer: InputDistribution
    d: np.ndarray
    gram: np.ndarray
    qp_objective: float
    kkt_residual: float
    support: tuple


def _ratio_at(d, gram, p_nonzero) -> float:
    num = float(p_nonzero @ d)
    quad = float(p_nonzero @ gram @ p_nonzero) - 1.0
    if quad <= 0.0:
        return 0.0 if num <= 0.0 else float("inf")
    return num / math.sqrt(0.5 * quad)


def scaling_constant(ch: CQWiretapChannel, check_regime: bool = True) -> ScalingConstantResult:
    """Scaling constant of the square-root law, in nats per sqrt(n delta).

    Maximizes the divergence-over-root-chi-squared ratio over distributions
    on the nonzero symbols via the convex reformulation described in the
    module docstring, then validates the optimum: the quadratic form must
    match its trace identity, and the ratio evaluated at the optimizer must
    reproduce the constant.
    """
    _require_sanitized(ch)
    if check_regime:
        report = classify(ch)
        if report.regime != Regime.SQUARE_ROOT:
            raise WrongRegimeError(
                f"scaling constant is defined in the square-root regime only; "
                f"channel classified as {report.regime.value}"
            )

    d = divergence_vector(ch)
    gram = chi_sq_gram(ch)
    centered = gram - 1.0
    wmin = float(np.linalg.eigvalsh((centered + centered.T) / 2.0)[0])
    if wmin < -1e-9:
        raise ArithmeticError(f"centered Gram matrix has eigenvalue {wmin:.3e} < -1e-9")

    # Symbols with sigma(x) = sigma(0) contribute nothing to the numerator
    # and can only inflate the denominator; drop them before optimizing.
    informative = [x - 1 for x in informative_symbols(ch)]
    if not informative:
        uniform = np.zeros(ch.k)
        uniform[1:] = 1.0 / (ch.k - 1)
        return ScalingConstantResult(
            L=0.0,
            optimizer=InputDistribution(uniform),
            d=d,
            gram=gram,
            qp_objective=float("inf"),
            kkt_residual=float("nan"),
            support=(),
        )

    sub = np.ix_(informative, informative)
    v_sub, objective, kkt_residual = _solve_ray_qp(centered[sub], d[informative])
    if objective <= 1e-12:
        raise WrongRegimeError(
            "chi-squared denominator vanishes at the optimum: the channel "
            "admits a mixture and is not in the square-root regime"
        )
    v = np.zeros(ch.k - 1)
    v[informative] = v_sub

    # Runtime check of the identity that justifies convexity:
    # v^T (Q - 11^T) v = tr[(rho_v - s rho(0))^2 rho(0)^{-1}] with s = sum(v).
    s_total = float(v.sum())
    mix = sum(v[x - 1] * ch.rho[x].mat for x in range(1, ch.k))
    shifted = DensityOperator((mix / s_total), validate=False)
    identity_rhs = (s_total ** 2) * chi_squared(shifted, ch.rho[0])
    identity_lhs = float(v @ centered @ v)
    if abs(identity_lhs - identity_rhs) > 1e-9 * max(1.0, abs(identity_lhs)):
        raise ArithmeticError(
            f"quadratic-form identity violated: {identity_lhs!r} vs {identity_rhs!r}"
        )

    value = 1.0 / math.sqrt(objective)
    p_nonzero = v / s_total
    ratio = _ratio_at(d, gram, p_nonzero)
    if abs(ratio - value) > 1e-8 * max(1.0, value):
        raise ArithmeticError(
            f"ratio at optimizer ({ratio!r}) disagrees with QP value ({value!r})"
        )

    probs = np.concatenate([[0.0], p_nonzero])
    optimizer = InputDistribution(probs)
    support = tuple(int(x) for x in np.nonzero(probs > 0.0)[0])
    return ScalingConstantResult(
        L=value,
        optimizer=optimizer,
        d=d,
        gram=gram,
        qp_objective=objective,
        kkt_residual=kkt_residual,
        support=support,
    )


def _compositions(total: int, parts: int) -> np.ndarray:
    """All length-``parts`` nonnegative integer vectors summing to ``total``."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    if parts == 2:
        first = np.arange(total + 1, dtype=np.int64)
        return np.column_stack([first, total - first])
    blocks = []
    for first in range(total + 1):
        rest = _compositions(total - first, parts - 1)
        col = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([col, rest]))
    return np.vstack(blocks)


def scaling_constant_grid_oracle(ch: CQWiretapChannel, resolution: float,
                                 max_points: int = MAX_GRID_POINTS) -> float:
    """Brute-force maximum of the scaling ratio over a simplex grid.

    Enumerates every distribution on the nonzero symbols with entries that
    are multiples of ``resolution`` and evaluates the ratio directly.  The
    result lower-bounds the true constant and is the designated validation
    oracle for :func:`scaling_constant`.
    """
    _require_sanitized(ch)
    if ch.k > 5:
        raise ValueError("grid oracle is limited to alphabets of size k <= 5")
    steps = int(round(1.0 / resolution))
    if steps < 1:
        raise ValueError(f"resolution {resolution} coarser than the whole simplex")
    r = ch.k - 1
    count = math.comb(steps + r - 1, r - 1)
    if count > max_points:
        raise DimensionCapError(
            f"grid would contain {count} points, above the cap {max_points}"
        )

    grid = _compositions(steps, r).astype(float) / steps
    d = divergence_vector(ch)
    gram = chi_sq_gram(ch)
    centered = gram - 1.0

    num = grid @ d
    quad = np.einsum("ij,ij->i", grid @ centered, grid)
    quad = np.clip(quad, 0.0, None)

    degenerate = quad <= 1e-15
    if np.any(degenerate & (num > 1e-12)):
        raise WrongRegimeError(
            "grid hit a zero-denominator point with informative mass; "
            "the channel admits a mixture"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(degenerate, 0.0, num / np.sqrt(0.5 * quad))
    return float(ratio.max())


@dataclass(frozen=True)
class RateResult:
    """Covert capacity in the positive-rate regime, in nats per channel use."""

    rate: float
    optimizer: InputDistribution
    feasibility_residual: float
    iterations: int
    gap: float


def covert_rate(ch: CQWiretapChannel) -> RateResult:
    """Maximum covert rate: Holevo information maximized over mixtures.

    In the positive-rate regime, maximizes chi(P) over the polytope of
    distributions whose eavesdropper mixture reproduces rho(0), by
    conditional-gradient ascent: linearize chi at the current point
    (coordinate slope D(sigma(x) || sigma_bar) - 1), pick the best polytope
    vertex by LP, and line-search along the segment.  Outside that regime
    the rate is 0 with the point mass at the off symbol.
    """
    report = classify(ch)
    if report.regime != Regime.POSITIVE_RATE:
        return RateResult(
            rate=0.0,
            optimizer=InputDistribution.point_mass(ch.k, 0),
            feasibility_residual=0.0,
            iterations=0,
            gap=0.0,
        )

    columns = np.stack([hermitian_to_realvec(r.mat) for r in ch.rho], axis=1)
    a_eq = np.vstack([columns, np.ones((1, ch.k))])
    b_eq = np.concatenate([hermitian_to_realvec(ch.rho[0].mat), [1.0]])

    def chi_of(probs) -> float:
        return holevo_information(ch.sigma, probs)

    def gradient(probs) -> np.ndarray:
        mix = average_output_state(ch, probs, "receiver")
        g = np.array([relative_entropy(ch.sigma[x], mix) for x in range(ch.k)]) - 1.0
        if np.any(np.isinf(g)):
            finite_max = g[np.isfinite(g)].max() if np.any(np.isfinite(g)) else 0.0
            g[np.isinf(g)] = finite_max + math.log(ch.receiver_dim) + 1.0
        return g

    current = np.array(report.mixture_witness.probs)
    gap = float("inf")
    iterations = 0
    for iterations in range(1, FRANK_WOLFE_MAX_ITERS + 1):
        g = gradient(current)
        lp = linprog(-g, A_eq=a_eq, b_eq=b_eq, bounds=(0.0, None), method="highs")
        if lp.status != 0:
            raise RuntimeError(
                f"vertex LP failed ({lp.message}); contradicts the PositiveRate classification"
            )
        vertex = np.clip(lp.x, 0.0, None)
        vertex = vertex / vertex.sum()
        gap = float(g @ (vertex - current))
        if gap < FRANK_WOLFE_GAP_TOL:
            break
        segment = vertex - current

        def objective(t: float) -> float:
            return -chi_of(current + t * segment)

        res = minimize_scalar(objective, bounds=(0.0, 1.0), method="bounded",
                              options={"xatol": 1e-12})
        candidates = [float(res.x), 1.0]
        best_t = max(candidates, key=lambda t: chi_of(current + t * segment))
        if chi_of(current + best_t * segment) <= chi_of(current):
            break
        current = current + best_t * segment

    mix = sum(p * r.mat for p, r in zip(current, ch.rho))
    residual = float(np.linalg.norm(mix - ch.rho[0].mat))
    return RateResult(
        rate=chi_of(current),
        optimizer=InputDistribution(current),
        feasibility_residual=residual,
        iterations=iterations,
        gap=gap,
    )


@dataclass(frozen=True)
class ChiSquaredExpansionReport:
    """Ratios of the exact divergence to its small-perturbation quadratic model."""

    alphas: tuple
    ratios: tuple
    chi_squared_value: float
    degenerate: bool


def chi_sq_expansion_check(rho_zero: DensityOperator, rho_tilde: DensityOperator,
                           alphas) -> ChiSquaredExpansionReport:
    """Check that D((1-a) rho0 + a rho_tilde || rho0) ~ a^2/2 * chi^2 as a -> 0.

    Reports r(a) = D / (a^2/2 * chi^2) for each requested mixing weight;
    the ratios approach 1.  Identical inputs make the ratio undefined and
    are flagged as degenerate.
    """
    alphas = tuple(float(a) for a in alphas)
    if any(not 0.0 < a <= 0.1 for a in alphas):
        raise ValueError("mixing weights must lie in (0, 0.1]")
    chi2 = chi_squared(rho_tilde, rho_zero)
    if chi2 <= 1e-12:
        return ChiSquaredExpansionReport(alphas, (), chi2, True)
    ratios = []
    for a in alphas:
        mixed = DensityOperator(
            (1.0 - a) * rho_zero.mat + a * rho_tilde.mat, validate=False
        )
        div = relative_entropy(mixed, rho_zero)
        ratios.append(div / (0.5 * a * a * chi2))
    return ChiSquaredExpansionReport(alphas, tuple(ratios), chi2, False)


@dataclass(frozen=True)
class HolevoExpansionReport:
    """Slopes chi(P_a)/a against their small-perturbation limit."""

    alphas: tuple
    slopes: tuple
    limit: float


def holevo_expansion_check(ch: CQWiretapChannel, p_tilde: InputDistribution,
                           alphas) -> HolevoExpansionReport:
    """Check the first-order behavior of Holevo information near the off symbol.

    With P_a = (1-a) delta_0 + a p_tilde, the slope chi(P_a)/a converges to
    Sum_{x != 0} p_tilde(x) D(sigma(x) || sigma(0)) as a -> 0.
    """
    if p_tilde.probs[0] != 0.0:
        raise ValueError("the perturbing distribution must put zero mass on symbol 0")
    alphas = tuple(float(a) for a in alphas)
    if any(not 0.0 < a < 1.0 for a in alphas):
        raise ValueError("mixing weights must lie in (0, 1)")
    limit = float(sum(
        p_tilde.probs[x] * relative_entropy(ch.sigma[x], ch.sigma[0])
        for x in range(1, ch.k) if p_tilde.probs[x] > 0.0
    ))
    slopes = []
    for a in alphas:
        probs = a * p_tilde.probs.copy()
        probs[0] = 1.0 - a
        slopes.append(holevo_information(ch.sigma, probs) / a)
    return HolevoExpansionReport(alphas, tuple(slopes), limit)


@dataclass(frozen=True)
class ConverseChainReport:
    """Every link of the two converse chains, evaluated exactly.

    Receiver chain: joint Holevo information <= sum of per-letter Holevo
    informations <= n times the Holevo information of the averaged letter
    distribution.  Eavesdropper chain: joint divergence from the idle state
    >= sum of per-letter divergences >= n times the divergence of the
    averaged letter state.
    """

    n: int
    holevo_joint: float
    holevo_marginal_sum: float
    holevo_avg_scaled: float
    div_joint: float
    div_marginal_sum: float
    div_avg_scaled: float
    slack: float = 1e-9

    @property
    def receiver_ok(self) -> bool:
        return (self.holevo_joint <= self.holevo_marginal_sum + self.slack
                and self.holevo_marginal_sum <= self.holevo_avg_scaled + self.slack)

    @property
    def eavesdropper_ok(self) -> bool:
        return (self.div_joint >= self.div_marginal_sum - self.slack
                and self.div_marginal_sum >= self.div_avg_scaled - self.slack)


def converse_chain(ch: CQWiretapChannel, codewords, weights,
                   strict: bool = True) -> ConverseChainReport:
    """Evaluate both converse chains on an explicit weighted codeword ensemble.

    ``codewords`` is an (m, n) integer array; ``weights`` the ensemble
    distribution over its rows.  Entropies of the n-letter states are
    computed exactly, so n is limited by the dimension cap.  With
    ``strict``, a violated link raises instead of returning.
    """
    codewords = np.atleast_2d(np.asarray(codewords, dtype=int))
    weights = np.asarray(weights, dtype=float)
    if len(weights) != codewords.shape[0]:
        raise ValueError("one weight per codeword required")
    if abs(weights.sum() - 1.0) > 1e-10 or weights.min() < 0.0:
        raise ValueError("weights must form a probability vector")
    n = codewords.shape[1]
    cap = dim_cap()
    if ch.receiver_dim ** n > cap or ch.eavesdropper_dim ** n > cap:
        raise DimensionCapError(f"n = {n} letters exceed the dimension cap {cap}")

    sigma_entropy = [von_neumann_entropy(s) for s in ch.sigma]
    marginals = [
        np.bincount(codewords[:, i], weights=weights, minlength=ch.k)
        for i in range(n)
    ]
    p_bar = np.mean(marginals, axis=0)

    dim_y = ch.receiver_dim ** n
    joint_sigma = np.zeros((dim_y, dim_y), dtype=np.complex128)
    conditional = 0.0
    for w, cw in zip(weights, codewords):
        if w == 0.0:
            continue
        joint_sigma += w * product_output_state(ch, cw, "receiver").mat
        conditional += w * sum(sigma_entropy[x] for x in cw)
    holevo_joint = _clip_nonnegative(
        von_neumann_entropy(DensityOperator(joint_sigma, validate=False)) - conditional,
        "joint Holevo information",
    )
    holevo_marginal_sum = float(sum(holevo_information(ch.sigma, p) for p in marginals))
    holevo_avg_scaled = n * holevo_information(ch.sigma, p_bar)

    dim_z = ch.eavesdropper_dim ** n
    joint_rho = np.zeros((dim_z, dim_z), dtype=np.complex128)
    for w, cw in zip(weights, codewords):
        if w == 0.0:
            continue
        joint_rho += w * product_output_state(ch, cw, "eavesdropper").mat
    idle = tensor_power(ch.rho[0], n)
    div_joint = relative_entropy(DensityOperator(joint_rho, validate=False), idle)
    div_marginal_sum = float(sum(
        relative_entropy(average_output_state(ch, p, "eavesdropper"), ch.rho[0])
        for p in marginals
    ))
    div_avg_scaled = n * relative_entropy(
        average_output_state(ch, p_bar, "eavesdropper"), ch.rho[0]
    )

    report = ConverseChainReport(
        n=n,
        holevo_joint=holevo_joint,
        holevo_marginal_sum=holevo_marginal_sum,
        holevo_avg_scaled=holevo_avg_scaled,
        div_joint=div_joint,
        div_marginal_sum=div_marginal_sum,
        div_avg_scaled=div_avg_scaled,
    )
    if strict and not (report.receiver_ok and report.eavesdropper_ok):
        raise ArithmeticError(f"converse chain violated: {report}")
    return report
