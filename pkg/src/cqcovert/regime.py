"""Regime classification for a sanitized channel.

Three regimes are possible.  If the idle eavesdropper state rho(0) can be
written as a mixture of the others with an informative symbol (one whose
receiver state differs from sigma(0)) in the mixture support, a positive
covert rate is achievable.  Failing that, if every receiver state lives
inside supp(sigma(0)), throughput follows the square-root law; otherwise it
scales faster than square-root but sub-linearly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .config import (
    MIXTURE_MASS_TOL,
    MIXTURE_RESIDUAL_TOL,
    STATE_EQUALITY_TOL,
    SUPPORT_TOL,
)
from .channel import CQWiretapChannel, InputDistribution
from .divergences import holevo_information
from .operators import (
    HermitianOperator,
    hermitian_to_realvec,
    support_is_contained,
    trace_norm,
)


class Regime(str, Enum):
    POSITIVE_RATE = "PositiveRate"
    SQUARE_ROOT = "SquareRoot"
    SUPER_SQUARE_ROOT = "SuperSquareRoot"


@dataclass(frozen=True)
class RegimeReport:
    """Classification outcome with its witnessing data.

    ``mixture_witness`` is present exactly when the regime is PositiveRate.
    ``support_violations`` lists symbols whose receiver state escapes
    supp(sigma(0)).  ``lp_residual`` is the equality residual of the
    feasibility solve.  ``mixture_on_uninformative_only`` flags channels
    where rho(0) is a mixture of the others but only via symbols carrying no
    receiver-side information; these are reported as SquareRoot (their
    achievable rate is zero) with this flag raised.
    """

    regime: Regime
    mixture_witness: Optional[InputDistribution]
    support_violations: tuple
    lp_residual: float
    mixture_on_uninformative_only: bool = False


def informative_symbols(ch: CQWiretapChannel) -> list:
    """Nonzero symbols whose receiver state differs from sigma(0)."""
    out = []
    for x in range(1, ch.k):
        gap = trace_norm(HermitianOperator(ch.sigma[x].mat - ch.sigma[0].mat))
        if gap > STATE_EQUALITY_TOL:
            out.append(x)
    return out


def _require_sanitized(ch: CQWiretapChannel):
    w = np.linalg.eigvalsh(ch.rho[0].mat)
    if w[0] <= SUPPORT_TOL:
        raise ValueError("channel is not sanitized: rho(0) is singular")


def _mixture_lp(ch: CQWiretapChannel):
    """Search for a mixture witness by one linear program.

    Variables are P(x) for every symbol (uninformative symbols may serve as
    mixture components); the objective maximizes the mass on informative
    symbols, so a witness exists iff the maximum exceeds MIXTURE_MASS_TOL.
    Returns ``(witness, residual, uninformative_only)``.
    """
    informative = informative_symbols(ch)

    columns = np.stack([hermitian_to_realvec(r.mat) for r in ch.rho], axis=1)
    a_eq = np.vstack([columns, np.ones((1, ch.k))])
    b_eq = np.concatenate([hermitian_to_realvec(ch.rho[0].mat), [1.0]])

    def solve(objective_symbols):
        cost = np.zeros(ch.k)
        cost[objective_symbols] = -1.0
        return linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0.0, None), method="highs")

    def residual_of(probs):
        mix = sum(p * r.mat for p, r in zip(probs, ch.rho))
        return float(np.linalg.norm(mix - ch.rho[0].mat))

    if not informative:
        # No symbol can carry information; the degenerate point mass at 0 is
        # the only solution of interest.
        return None, 0.0, False

    res = solve(informative)
    if res.status == 2:  # infeasible: not even P = delta_0 fits (cannot happen post-sanitize)
        return None, float("inf"), False
    if res.status != 0:
        raise RuntimeError(f"mixture feasibility LP failed: {res.message}")

    mass = -float(res.fun)
    if mass > MIXTURE_MASS_TOL:
        probs = np.clip(res.x, 0.0, None)
        witness = InputDistribution(probs / probs.sum())
        residual = residual_of(witness.probs)
        if residual > MIXTURE_RESIDUAL_TOL:
            raise RuntimeError(
                f"mixture LP returned residual {residual:.3e} above "
                f"{MIXTURE_RESIDUAL_TOL}; channel data is ill-conditioned"
            )
        # The witness must carry receiver-side information.  A vertex fully
        # concentrated on informative symbols with identical receiver states
        # has zero Holevo information; blending in the off symbol fixes that
        # without leaving the feasible set.
        if holevo_information(ch.sigma, witness) <= 0.0:
            blended = 0.5 * witness.probs + 0.5 * np.eye(ch.k)[0]
            witness = InputDistribution(blended)
        return witness, residual, False

    # No informative witness; check whether mixtures exist at all off the
    # point mass, to flag the rate-zero corner case.
    off_zero = list(range(1, ch.k))
    res2 = solve(off_zero)
    uninformative_only = bool(res2.status == 0 and -float(res2.fun) > MIXTURE_MASS_TOL)
    residual = residual_of(np.clip(res.x, 0.0, None)) if res.x is not None else float("inf")
    return None, residual, uninformative_only


def mixture_feasible(ch: CQWiretapChannel) -> Optional[InputDistribution]:
    """Witness distribution with Sum_x P(x) rho(x) = rho(0) and informative
    support, or None when no such distribution exists."""
    _require_sanitized(ch)
    witness, _, _ = _mixture_lp(ch)
    return witness


def check_support_condition(ch: CQWiretapChannel) -> list:
    """Symbols whose receiver state has support outside supp(sigma(0))."""
    _require_sanitized(ch)
    return [
        x for x in range(1, ch.k)
        if not support_is_contained(ch.sigma[x], ch.sigma[0])
    ]


def classify(ch: CQWiretapChannel) -> RegimeReport:
    """Classify a sanitized channel into its covert-throughput regime."""
    _require_sanitized(ch)
    witness, residual, uninformative_only = _mixture_lp(ch)
    violations = tuple(check_support_condition(ch))
    if witness is not None:
        regime = Regime.POSITIVE_RATE
    elif violations:
        regime = Regime.SUPER_SQUARE_ROOT
    else:
        regime = Regime.SQUARE_ROOT
    return RegimeReport(
        regime=regime,
        mixture_witness=witness,
        support_violations=violations,
        lp_residual=residual,
        mixture_on_uninformative_only=uninformative_only,
    )
